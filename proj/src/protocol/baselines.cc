#include "assist/metrics.h"
#include "assist/protocol.h"
#include "assist/random.h"

namespace assist {

namespace {

Matrix pooled_or_fail(std::span<const FeaturePartition* const> partitions,
                      std::span<const SampleId> ids) {
  try {
    return pooled_features(partitions, ids);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kMissingId) throw Error(ErrorCode::kCollationFailure, e.what());
    throw;
  }
}

void score(Metrics& m, const Vector& y_train, const Vector& fit_train, const Vector& y_test,
           const Vector& fit_test) {
  m.train_rmse = rmse(y_train, fit_train);
  m.train_mad = mad(y_train, fit_train);
  if (y_test.size() > 0) {
    m.test_rmse = rmse(y_test, fit_test);
    m.test_mad = mad(y_test, fit_test);
  }
}

}  // namespace

Metrics oracle_baseline(std::span<const FeaturePartition* const> partitions,
                        const TaskLabels& labels, const LearnerSpec& learner,
                        const TrainTestIds& split) {
  if (partitions.empty()) throw Error(ErrorCode::kCollationFailure, "no partitions");
  const Matrix x_train = pooled_or_fail(partitions, split.train);
  const Vector y_train = labels.values_for(split.train);
  const FittedModel model = fit(learner, x_train, y_train);
  Metrics m;
  Vector y_test;
  Vector fit_test;
  if (!split.test.empty()) {
    y_test = labels.values_for(split.test);
    fit_test = predict(model, pooled_or_fail(partitions, split.test));
  }
  score(m, y_train, predict(model, x_train), y_test, fit_test);
  return m;
}

Metrics stacking_baseline(std::span<const FeaturePartition* const> partitions,
                          const TaskLabels& labels, const StackingConfig& config,
                          const TrainTestIds& split) {
  if (partitions.empty()) throw Error(ErrorCode::kCollationFailure, "no partitions");
  if (config.base.empty()) throw Error(ErrorCode::kInvalidArgument, "stacking needs a base learner");
  const auto n = static_cast<Eigen::Index>(split.train.size());
  if (config.folds < 2 || config.folds > n) {
    throw Error(ErrorCode::kInvalidArgument, "stacking folds must lie in [2, n_train]");
  }

  const Vector y_train = labels.values_for(split.train);
  // Fold of each training row: position in a seeded permutation, modulo folds.
  Engine engine = make_engine(derive_seed(config.seed, "stacking-folds"));
  const std::vector<std::size_t> order = permutation(static_cast<std::size_t>(n), engine);
  std::vector<int> fold_of(static_cast<std::size_t>(n));
  for (std::size_t k = 0; k < order.size(); ++k) {
    fold_of[order[k]] = static_cast<int>(k % static_cast<std::size_t>(config.folds));
  }

  const auto columns = static_cast<Eigen::Index>(partitions.size() * config.base.size());
  Matrix meta_train(n, columns);
  Matrix meta_test(static_cast<Eigen::Index>(split.test.size()), columns);
  Eigen::Index col = 0;
  for (const FeaturePartition* part : partitions) {
    Matrix x_train;
    Matrix x_test;
    try {
      x_train = part->rows_for(split.train);
      x_test = part->rows_for(split.test);
    } catch (const Error& e) {
      throw Error(ErrorCode::kCollationFailure, e.what());
    }
    for (const LearnerSpec& base : config.base) {
      for (int f = 0; f < config.folds; ++f) {
        std::vector<Eigen::Index> in;
        std::vector<Eigen::Index> out;
        for (Eigen::Index i = 0; i < n; ++i) (fold_of[i] == f ? out : in).push_back(i);
        const FittedModel model = fit(base, x_train(in, Eigen::all), y_train(in));
        const Vector oof = predict(model, x_train(out, Eigen::all));
        for (std::size_t k = 0; k < out.size(); ++k) meta_train(out[k], col) = oof[static_cast<Eigen::Index>(k)];
      }
      if (meta_test.rows() > 0) meta_test.col(col) = predict(fit(base, x_train, y_train), x_test);
      ++col;
    }
  }

  const FittedModel meta = fit(config.meta, meta_train, y_train);
  Metrics m;
  Vector y_test;
  Vector fit_test;
  if (!split.test.empty()) {
    y_test = labels.values_for(split.test);
    fit_test = predict(meta, meta_test);
  }
  score(m, y_train, predict(meta, meta_train), y_test, fit_test);
  return m;
}

}  // namespace assist
