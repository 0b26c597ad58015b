#include "assist/nn_math.h"

#include <algorithm>
#include <cmath>

#include "assist/errors.h"
#include "assist/random.h"

namespace assist::nn {

bool SharedWeights::all_finite() const {
  return hidden_bias.allFinite() && output_weights.allFinite() &&
         std::isfinite(output_bias);
}

bool operator==(const SharedWeights& a, const SharedWeights& b) {
  return a.hidden_bias.size() == b.hidden_bias.size() &&
         a.output_weights.size() == b.output_weights.size() &&
         a.hidden_bias == b.hidden_bias && a.output_weights == b.output_weights &&
         a.output_bias == b.output_bias;
}

namespace {

double bound_for(Eigen::Index fan_in) {
  return 1.0 / std::sqrt(static_cast<double>(std::max<Eigen::Index>(1, fan_in)));
}

Matrix hidden_preact(const Matrix& x, const Matrix& w, const Matrix* other,
                     const SharedWeights& shared) {
  Matrix z = w.rows() == 0 ? Matrix::Zero(x.rows(), shared.hidden()) : Matrix(x * w);
  if (other != nullptr) z += *other;
  z.rowwise() += shared.hidden_bias.transpose();
  return z;
}

}  // namespace

Matrix init_input_block(std::uint64_t seed, const char* stream, Eigen::Index rows,
                        Eigen::Index hidden, Eigen::Index fan_in) {
  Engine engine = make_engine(derive_seed(seed, stream));
  const double bound = bound_for(fan_in);
  Matrix w(rows, hidden);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < hidden; ++c) w(r, c) = uniform(engine, -bound, bound);
  }
  return w;
}

SharedWeights init_shared(std::uint64_t seed, Eigen::Index hidden, Eigen::Index fan_in) {
  Engine engine = make_engine(derive_seed(seed, kSharedStream));
  SharedWeights shared;
  shared.hidden_bias.resize(hidden);
  shared.output_weights.resize(hidden);
  const double input_bound = bound_for(fan_in);
  const double output_bound = bound_for(hidden);
  for (Eigen::Index j = 0; j < hidden; ++j) {
    shared.hidden_bias[j] = uniform(engine, -input_bound, input_bound);
  }
  for (Eigen::Index j = 0; j < hidden; ++j) {
    shared.output_weights[j] = uniform(engine, -output_bound, output_bound);
  }
  shared.output_bias = 0.0;
  return shared;
}

Vector output_from_preact(const SharedWeights& shared, const Matrix& preact) {
  const Matrix a = preact.array().tanh().matrix();
  return (a * shared.output_weights).array() + shared.output_bias;
}

Vector forward(const Matrix& x, const Matrix& w, const Matrix* other_partial,
               const SharedWeights& shared) {
  return output_from_preact(shared, hidden_preact(x, w, other_partial, shared));
}

Gradients gradients(const Matrix& x, const Matrix& w, const Matrix* other_partial,
                    const SharedWeights& shared, const Vector& y) {
  const Eigen::Index m = x.rows();
  const Matrix a = hidden_preact(x, w, other_partial, shared).array().tanh().matrix();
  const Vector out = (a * shared.output_weights).array() + shared.output_bias;
  const Vector err = out - y;

  Gradients g;
  g.loss = 0.5 * err.squaredNorm() / static_cast<double>(m);
  const Vector g_out = err / static_cast<double>(m);
  g.shared.output_weights = a.transpose() * g_out;
  g.shared.output_bias = g_out.sum();
  const Matrix g_z =
      ((g_out * shared.output_weights.transpose()).array() * (1.0 - a.array().square()))
          .matrix();
  g.shared.hidden_bias = g_z.colwise().sum().transpose();
  g.input = w.rows() == 0 ? Matrix(0, shared.hidden()) : Matrix(x.transpose() * g_z);
  return g;
}

double loss(const Matrix& x, const Matrix& w, const Matrix* other_partial,
            const SharedWeights& shared, const Vector& y) {
  const Vector err = forward(x, w, other_partial, shared) - y;
  return 0.5 * err.squaredNorm() / static_cast<double>(x.rows());
}

void train(Matrix& w, SharedWeights& shared, const Matrix& x,
           const Matrix* other_partial, const Vector& y, const Schedule& schedule,
           std::int64_t first_epoch) {
  if (schedule.batch < 1) throw Error(ErrorCode::kInvalidArgument, "batch must be >= 1");
  if (!(schedule.rate >= 0.0) || !std::isfinite(schedule.rate)) {
    throw Error(ErrorCode::kInvalidArgument, "learning rate must be finite and >= 0");
  }
  const Eigen::Index n = x.rows();
  if (y.size() != n || (other_partial != nullptr && other_partial->rows() != n)) {
    throw Error(ErrorCode::kDimensionMismatch, "network inputs disagree on row count");
  }
  if (n == 0) return;

  const Eigen::Index h = shared.hidden();
  for (int e = 0; e < schedule.epochs; ++e) {
    Engine engine = make_engine(derive_seed(
        schedule.seed, kShuffleStream, static_cast<std::uint64_t>(first_epoch + e)));
    const std::vector<std::size_t> order = permutation(static_cast<std::size_t>(n), engine);
    for (Eigen::Index start = 0; start < n; start += schedule.batch) {
      const Eigen::Index m = std::min<Eigen::Index>(schedule.batch, n - start);
      Matrix xb(m, x.cols());
      Vector yb(m);
      Matrix ob;
      if (other_partial != nullptr) ob.resize(m, h);
      for (Eigen::Index r = 0; r < m; ++r) {
        const auto src = static_cast<Eigen::Index>(order[static_cast<std::size_t>(start + r)]);
        xb.row(r) = x.row(src);
        yb[r] = y[src];
        if (other_partial != nullptr) ob.row(r) = other_partial->row(src);
      }
      const Gradients g =
          gradients(xb, w, other_partial != nullptr ? &ob : nullptr, shared, yb);
      if (!std::isfinite(g.loss)) {
        throw Error(ErrorCode::kNonFiniteLoss, "loss diverged; learning rate too large?");
      }
      w -= schedule.rate * g.input;
      shared.hidden_bias -= schedule.rate * g.shared.hidden_bias;
      shared.output_weights -= schedule.rate * g.shared.output_weights;
      shared.output_bias -= schedule.rate * g.shared.output_bias;
    }
    if (!w.allFinite() || !shared.all_finite()) {
      throw Error(ErrorCode::kNonFiniteLoss, "parameters diverged; learning rate too large?");
    }
  }
}

}  // namespace assist::nn
