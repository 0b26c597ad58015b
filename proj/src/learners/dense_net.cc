#include "assist/errors.h"
#include "assist/learners.h"
#include "assist/nn_math.h"

namespace assist {

FittedModel fit_dense_net(const Matrix& x, const Vector& y, DenseNetParams params,
                          std::uint64_t seed) {
  if (x.rows() != y.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "dense net: rows(X) != len(y)");
  }
  if (params.hidden < 1) throw Error(ErrorCode::kInvalidArgument, "hidden must be >= 1");
  if (params.epochs < 0) throw Error(ErrorCode::kInvalidArgument, "epochs must be >= 0");

  DenseNetModel model;
  model.input_weights =
      nn::init_input_block(seed, nn::kOwnerInputStream, x.cols(), params.hidden, x.cols());
  model.shared = nn::init_shared(seed, params.hidden, x.cols());
  nn::train(model.input_weights, model.shared, x, nullptr, y,
            {params.epochs, params.batch, params.rate, seed}, 0);

  FittedModel fitted;
  fitted.params = std::move(model);
  fitted.meta.n = x.rows();
  fitted.meta.p = x.cols();
  return fitted;
}

}  // namespace assist
