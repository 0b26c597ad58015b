#include <charconv>
#include <cmath>
#include <sstream>

#include "assist/errors.h"
#include "assist/learners.h"

namespace assist {

std::string_view learner_kind_name(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::kLeastSquares: return "least_squares";
    case LearnerKind::kRidge: return "ridge";
    case LearnerKind::kRegressionTree: return "regression_tree";
    case LearnerKind::kGradientBoosting: return "gradient_boosting";
    case LearnerKind::kDenseNet: return "dense_net";
  }
  return "unknown";
}

LearnerKind learner_kind_from_name(std::string_view name) {
  if (name == "least_squares" || name == "lr") return LearnerKind::kLeastSquares;
  if (name == "ridge" || name == "rg") return LearnerKind::kRidge;
  if (name == "regression_tree" || name == "tree") return LearnerKind::kRegressionTree;
  if (name == "gradient_boosting" || name == "gb") return LearnerKind::kGradientBoosting;
  if (name == "dense_net" || name == "nn") return LearnerKind::kDenseNet;
  throw Error(ErrorCode::kInvalidArgument, "unknown learner kind '" + std::string(name) + "'");
}

LearnerSpec LearnerSpec::least_squares() { return LearnerSpec{}; }

LearnerSpec LearnerSpec::ridge(double lambda) {
  LearnerSpec spec;
  spec.kind_ = LearnerKind::kRidge;
  spec.lambda_ = lambda;
  spec.validate();
  return spec;
}

LearnerSpec LearnerSpec::regression_tree(TreeParams params) {
  LearnerSpec spec;
  spec.kind_ = LearnerKind::kRegressionTree;
  spec.tree_ = params;
  spec.validate();
  return spec;
}

LearnerSpec LearnerSpec::gradient_boosting(BoostingParams params) {
  LearnerSpec spec;
  spec.kind_ = LearnerKind::kGradientBoosting;
  spec.boosting_ = params;
  spec.validate();
  return spec;
}

LearnerSpec LearnerSpec::dense_net(DenseNetParams params, std::uint64_t seed) {
  LearnerSpec spec;
  spec.kind_ = LearnerKind::kDenseNet;
  spec.net_ = params;
  spec.seed_ = seed;
  spec.validate();
  return spec;
}

LearnerSpec LearnerSpec::with_seed(std::uint64_t seed) const {
  LearnerSpec copy = *this;
  copy.seed_ = seed;
  return copy;
}

void LearnerSpec::validate() const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument, what);
  };
  if (!(lambda_ >= 0.0) || !std::isfinite(lambda_)) fail("lambda must be >= 0");
  const TreeParams& tree = kind_ == LearnerKind::kGradientBoosting ? boosting_.tree : tree_;
  if (tree.max_depth < 1) fail("depth must be >= 1");
  if (tree.min_leaf < 1) fail("min_leaf must be >= 1");
  if (boosting_.stages < 1) fail("stages must be >= 1");
  if (!(boosting_.shrinkage >= 0.0) || !std::isfinite(boosting_.shrinkage)) {
    fail("shrinkage must be >= 0");
  }
  if (net_.hidden < 1) fail("hidden must be >= 1");
  if (net_.epochs < 0) fail("epochs must be >= 0");
  if (net_.batch < 1) fail("batch must be >= 1");
  if (!(net_.rate > 0.0) || !std::isfinite(net_.rate)) fail("learning rate must be > 0");
}

namespace {

double parse_number(std::string_view key, std::string_view text) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "bad value '" + std::string(text) + "' for '" + std::string(key) + "'");
  }
  return value;
}

int parse_int(std::string_view key, std::string_view text) {
  const double v = parse_number(key, text);
  if (v != std::floor(v) || std::abs(v) > 1e9) {
    throw Error(ErrorCode::kInvalidArgument, "'" + std::string(key) + "' must be an integer");
  }
  return static_cast<int>(v);
}

}  // namespace

LearnerSpec LearnerSpec::parse(std::string_view text) {
  LearnerSpec spec;
  const std::size_t colon = text.find(':');
  spec.kind_ = learner_kind_from_name(text.substr(0, colon));
  std::string_view rest = colon == std::string_view::npos ? std::string_view{}
                                                          : text.substr(colon + 1);
  while (!rest.empty()) {
    const std::size_t comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    const std::size_t eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kInvalidArgument, "expected key=value, got '" + std::string(item) + "'");
    }
    const std::string_view key = item.substr(0, eq);
    const std::string_view value = item.substr(eq + 1);
    TreeParams& tree =
        spec.kind_ == LearnerKind::kGradientBoosting ? spec.boosting_.tree : spec.tree_;
    if (key == "lambda") {
      spec.lambda_ = parse_number(key, value);
    } else if (key == "depth" || key == "max_depth") {
      tree.max_depth = parse_int(key, value);
    } else if (key == "min_leaf") {
      tree.min_leaf = parse_int(key, value);
    } else if (key == "stages") {
      spec.boosting_.stages = parse_int(key, value);
    } else if (key == "shrinkage") {
      spec.boosting_.shrinkage = parse_number(key, value);
    } else if (key == "hidden") {
      spec.net_.hidden = parse_int(key, value);
    } else if (key == "epochs") {
      spec.net_.epochs = parse_int(key, value);
    } else if (key == "batch") {
      spec.net_.batch = parse_int(key, value);
    } else if (key == "rate") {
      spec.net_.rate = parse_number(key, value);
    } else if (key == "seed") {
      spec.seed_ = static_cast<std::uint64_t>(parse_number(key, value));
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown hyperparameter '" + std::string(key) + "'");
    }
  }
  spec.validate();
  return spec;
}

namespace {

// Shortest text that parses back to the same double.
std::string shortest(double v) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

}  // namespace

std::string LearnerSpec::to_string() const {
  std::ostringstream out;
  out << learner_kind_name(kind_);
  switch (kind_) {
    case LearnerKind::kLeastSquares:
      break;
    case LearnerKind::kRidge:
      out << ":lambda=" << shortest(lambda_);
      break;
    case LearnerKind::kRegressionTree:
      out << ":depth=" << tree_.max_depth << ",min_leaf=" << tree_.min_leaf;
      break;
    case LearnerKind::kGradientBoosting:
      out << ":stages=" << boosting_.stages << ",depth=" << boosting_.tree.max_depth
          << ",min_leaf=" << boosting_.tree.min_leaf << ",shrinkage=" << shortest(boosting_.shrinkage);
      break;
    case LearnerKind::kDenseNet:
      out << ":hidden=" << net_.hidden << ",epochs=" << net_.epochs << ",batch=" << net_.batch
          << ",rate=" << shortest(net_.rate) << ",seed=" << seed_;
      break;
  }
  return out.str();
}

LearnerKind FittedModel::kind() const {
  switch (params.index()) {
    case 0: return LearnerKind::kLeastSquares;
    case 1: return LearnerKind::kRegressionTree;
    case 2: return LearnerKind::kGradientBoosting;
    default: return LearnerKind::kDenseNet;
  }
}

FittedModel fit(const LearnerSpec& spec, const Matrix& x, const Vector& y) {
  switch (spec.kind()) {
    case LearnerKind::kLeastSquares:
      return fit_least_squares(x, y, 0.0);
    case LearnerKind::kRidge:
      return fit_least_squares(x, y, spec.lambda());
    case LearnerKind::kRegressionTree:
      return fit_regression_tree(x, y, spec.tree());
    case LearnerKind::kGradientBoosting:
      return fit_gradient_boosting(x, y, spec.boosting());
    case LearnerKind::kDenseNet:
      return fit_dense_net(x, y, spec.net(), spec.seed());
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown learner kind");
}

namespace {

struct Predictor {
  const Matrix& x;

  Vector operator()(const LinearModel& m) const {
    return (x * m.coefficients).array() + m.intercept;
  }
  Vector operator()(const TreeModel& m) const {
    Vector out(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) out[i] = m.predict_row(x.data() + i, x.rows());
    return out;
  }
  Vector operator()(const BoostingModel& m) const {
    Vector out = Vector::Constant(x.rows(), m.base);
    for (const TreeModel& tree : m.trees) {
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        out[i] += m.shrinkage * tree.predict_row(x.data() + i, x.rows());
      }
    }
    return out;
  }
  Vector operator()(const DenseNetModel& m) const {
    return nn::forward(x, m.input_weights, nullptr, m.shared);
  }
};

}  // namespace

Vector predict(const FittedModel& model, const Matrix& x) {
  if (x.cols() != model.meta.p) {
    throw Error(ErrorCode::kDimensionMismatch,
                "model trained on " + std::to_string(model.meta.p) + " columns, got " +
                    std::to_string(x.cols()));
  }
  return std::visit(Predictor{x}, model.params);
}

}  // namespace assist
