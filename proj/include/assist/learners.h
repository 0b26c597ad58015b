#ifndef ASSIST_LEARNERS_H_
#define ASSIST_LEARNERS_H_

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "assist/core.h"
#include "assist/nn_math.h"

namespace assist {

enum class LearnerKind {
  kLeastSquares,
  kRidge,
  kRegressionTree,
  kGradientBoosting,
  kDenseNet,
};

std::string_view learner_kind_name(LearnerKind kind);
LearnerKind learner_kind_from_name(std::string_view name);  // InvalidArgument

struct TreeParams {
  int max_depth = 3;
  int min_leaf = 5;
};

struct BoostingParams {
  int stages = 100;
  double shrinkage = 0.1;
  TreeParams tree;
};

struct DenseNetParams {
  int hidden = 16;
  int epochs = 20;
  int batch = 32;
  double rate = 0.01;
};

// A private learning algorithm: kind plus validated hyperparameters.
class LearnerSpec {
 public:
  LearnerSpec() = default;

  static LearnerSpec least_squares();
  static LearnerSpec ridge(double lambda);
  static LearnerSpec regression_tree(TreeParams params = {});
  static LearnerSpec gradient_boosting(BoostingParams params = {});
  static LearnerSpec dense_net(DenseNetParams params = {}, std::uint64_t seed = 0);

  // "kind" or "kind:key=value,key=value", e.g.
  // "gradient_boosting:stages=50,depth=2,shrinkage=0.1".
  static LearnerSpec parse(std::string_view text);
  std::string to_string() const;

  LearnerKind kind() const noexcept { return kind_; }
  double lambda() const noexcept { return lambda_; }
  const TreeParams& tree() const noexcept { return tree_; }
  const BoostingParams& boosting() const noexcept { return boosting_; }
  const DenseNetParams& net() const noexcept { return net_; }
  std::uint64_t seed() const noexcept { return seed_; }

  LearnerSpec with_seed(std::uint64_t seed) const;

 private:
  void validate() const;

  LearnerKind kind_ = LearnerKind::kLeastSquares;
  double lambda_ = 0.0;
  TreeParams tree_;
  BoostingParams boosting_;
  DenseNetParams net_;
  std::uint64_t seed_ = 0;
};

struct LinearModel {
  Vector coefficients;
  double intercept = 0.0;
};

// Flat binary tree. Leaves have feature == -1. Rows go left when
// x[feature] <= threshold.
struct TreeModel {
  struct Node {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };
  std::vector<Node> nodes;

  int depth() const;
  double predict_row(const double* row, Eigen::Index stride) const;
};

struct BoostingModel {
  double base = 0.0;
  double shrinkage = 0.1;
  std::vector<TreeModel> trees;
};

// One hidden tanh layer, linear output.
struct DenseNetModel {
  Matrix input_weights;  // p x h
  nn::SharedWeights shared;
};

struct FitMetadata {
  Eigen::Index n = 0;
  Eigen::Index p = 0;
  int round = 0;
  std::string task_id;
};

struct FittedModel {
  std::variant<LinearModel, TreeModel, BoostingModel, DenseNetModel> params;
  FitMetadata meta;

  LearnerKind kind() const;
};

// Minimises ||y - X b - b0||^2 + lambda ||b||^2 with b0 unpenalised.
// Rank-deficient designs with lambda = 0 get the minimum-norm b.
FittedModel fit_least_squares(const Matrix& x, const Vector& y,
                              double lambda = 0.0);

FittedModel fit_regression_tree(const Matrix& x, const Vector& y,
                                TreeParams params = {});

// Per-stage training trace of a boosting fit.
struct BoostingTrace {
  std::vector<double> stage_mse;  // [0] is the constant model
  Vector fitted;                  // training predictions after the last stage
};

FittedModel fit_gradient_boosting(const Matrix& x, const Vector& y,
                                  BoostingParams params = {},
                                  BoostingTrace* trace = nullptr);

FittedModel fit_dense_net(const Matrix& x, const Vector& y,
                          DenseNetParams params = {}, std::uint64_t seed = 0);

// Dispatches on spec.kind(). The seed only matters for dense nets.
FittedModel fit(const LearnerSpec& spec, const Matrix& x, const Vector& y);

// Throws DimensionMismatch when the column count differs from training.
Vector predict(const FittedModel& model, const Matrix& x);

}  // namespace assist

#endif  // ASSIST_LEARNERS_H_
