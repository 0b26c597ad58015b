#include <cmath>

#include "assist/errors.h"
#include "assist/learners.h"
#include "learners/tree_builder.h"

namespace assist {

FittedModel fit_gradient_boosting(const Matrix& x, const Vector& y,
                                  BoostingParams params, BoostingTrace* trace) {
  if (x.rows() != y.size() || y.size() < 1) {
    throw Error(ErrorCode::kDimensionMismatch, "boosting: rows(X) != len(y) or empty");
  }
  if (params.stages < 1) {
    throw Error(ErrorCode::kInvalidArgument, "boosting needs stages >= 1");
  }
  if (!(params.shrinkage >= 0.0) || !std::isfinite(params.shrinkage)) {
    throw Error(ErrorCode::kInvalidArgument, "shrinkage must be finite and >= 0");
  }

  const Eigen::Index n = x.rows();
  BoostingModel model;
  model.base = y.mean();
  model.shrinkage = params.shrinkage;
  model.trees.reserve(static_cast<std::size_t>(params.stages));

  internal::TreeBuilder builder(x, params.tree);
  Vector fitted = Vector::Constant(n, model.base);
  if (trace != nullptr) {
    trace->stage_mse.clear();
    trace->stage_mse.push_back((y - fitted).squaredNorm() / static_cast<double>(n));
  }
  for (int s = 0; s < params.stages; ++s) {
    const Vector residual = y - fitted;
    TreeModel tree = builder.build(residual);
    // Same per-row update as predict(), so refitting the training rows
    // reproduces `fitted` exactly.
    for (Eigen::Index i = 0; i < n; ++i) {
      fitted[i] += model.shrinkage * tree.predict_row(x.data() + i, n);
    }
    model.trees.push_back(std::move(tree));
    if (trace != nullptr) {
      trace->stage_mse.push_back((y - fitted).squaredNorm() / static_cast<double>(n));
    }
  }
  if (trace != nullptr) trace->fitted = fitted;

  FittedModel out;
  out.params = std::move(model);
  out.meta.n = n;
  out.meta.p = x.cols();
  return out;
}

}  // namespace assist
