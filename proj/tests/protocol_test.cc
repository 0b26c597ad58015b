#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "assist/data.h"
#include "assist/errors.h"
#include "assist/metrics.h"
#include "assist/protocol.h"
#include "assist/service.h"
#include "test_util.h"

namespace assist {
namespace {

using testing::make_module;
using testing::random_matrix;
using testing::random_vector;

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an assist::Error";
  return ErrorCode::kInvalidArgument;
}

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index r = 0;
  for (double x : values) v[r++] = x;
  return v;
}

ResidualMessage fit_message(const IdList& ids, const Vector& values, int round = 1) {
  ResidualMessage msg;
  msg.task_id = "t";
  msg.round = round;
  msg.sender = "alice";
  msg.receiver = "bob";
  msg.ids = ids;
  msg.values = values;
  return msg;
}

TEST(StopCheck, Examples) {
  const double improving[] = {5, 4, 3};
  EXPECT_EQ(stop_check(improving, 2), StopDecision::kContinue);
  const double plateau[] = {5, 4, 4.001, 4.0005};
  EXPECT_EQ(stop_check(plateau, 2, 1e-4), StopDecision::kStop);
  const double single[] = {5};
  EXPECT_EQ(stop_check(single, 3), StopDecision::kContinue);
  const double recovering[] = {5, 4, 4.001, 3.9};
  EXPECT_EQ(stop_check(recovering, 2, 1e-4), StopDecision::kContinue);
  EXPECT_EQ(code_of([&] { stop_check(improving, 0); }), ErrorCode::kInvalidArgument);
}

// Independent restatement: stop iff history is longer than patience and no
// tail entry beats the minimum of everything before it by tol_rel.
TEST(StopCheck, MatchesReferenceOnRandomHistories) {
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    Engine rng = make_engine(seed);
    const int len = 1 + static_cast<int>(uniform01(rng) * 10);
    const int patience = 1 + static_cast<int>(uniform01(rng) * 4);
    std::vector<double> h;
    double level = 10;
    for (int i = 0; i < len; ++i) {
      level *= 0.9 + 0.2 * uniform01(rng);
      h.push_back(level);
    }
    bool expected = false;
    if (len > patience) {
      double best = *std::min_element(h.begin(), h.end() - patience);
      bool improved = false;
      for (int i = len - patience; i < len; ++i) {
        if (h[i] < best - 1e-4 * std::abs(best)) {
          improved = true;
          best = h[i];
        }
      }
      expected = !improved;
    }
    EXPECT_EQ(stop_check(h, patience) == StopDecision::kStop, expected) << "seed " << seed;
  }
}

TEST(AssistFit, ZeroTargetGivesZeroResidual) {
  Engine rng = make_engine(1);
  const IdList ids = row_ids(12);
  for (const char* text : {"least_squares", "regression_tree", "gradient_boosting:stages=5"}) {
    auto module = make_module("bob", ids, random_matrix(rng, 12, 2), LearnerSpec::parse(text));
    const ResidualMessage reply = assist_fit(*module, fit_message(ids, Vector::Zero(12)));
    EXPECT_EQ(reply.values.norm(), 0.0) << text;
  }
}

TEST(AssistFit, ExactFitByHand) {
  Matrix x(3, 1);
  x << 1, 2, 3;
  auto module = make_module("bob", make_ids({"a", "b", "c"}), x, LearnerSpec::least_squares());
  const ResidualMessage reply =
      assist_fit(*module, fit_message(make_ids({"a", "b", "c"}), vec({2, 4, 6})));
  EXPECT_LE(reply.values.norm(), 1e-12);
  EXPECT_EQ(reply.sender, "bob");
  EXPECT_EQ(reply.receiver, "alice");
  EXPECT_NE(module->find("t", 1), nullptr);
}

TEST(AssistFit, ResidualOrthogonalToDesign) {
  Engine rng = make_engine(2);
  const IdList ids = row_ids(40);
  const Matrix x = random_matrix(rng, 40, 3);
  auto module = make_module("bob", ids, x, LearnerSpec::least_squares());
  const Vector r = assist_fit(*module, fit_message(ids, random_vector(rng, 40))).values;
  for (Eigen::Index c = 0; c < 3; ++c) EXPECT_LE(std::abs(r.dot(x.col(c))), 1e-9 * r.norm() * x.col(c).norm());
}

TEST(AssistFit, RejectsReplayAndUnknownRows) {
  Engine rng = make_engine(3);
  const IdList ids = row_ids(10);
  auto module = make_module("bob", ids, random_matrix(rng, 10, 1), LearnerSpec::least_squares());
  assist_fit(*module, fit_message(ids, random_vector(rng, 10)));
  EXPECT_EQ(code_of([&] { assist_fit(*module, fit_message(ids, random_vector(rng, 10))); }),
            ErrorCode::kStorageConflict);
  const IdList stranger = make_ids({"zz"});
  EXPECT_EQ(code_of([&] { assist_fit(*module, fit_message(stranger, vec({1}), 2)); }),
            ErrorCode::kMissingId);
  EXPECT_EQ(module->model_count(), 1u);
}

TEST(AssistPredict, SumsRoundsAndReportsErrors) {
  Engine rng = make_engine(4);
  const IdList ids = row_ids(20);
  auto module = make_module("bob", ids, random_matrix(rng, 20, 2), LearnerSpec::least_squares());
  assist_fit(*module, fit_message(ids, random_vector(rng, 20), 1));
  assist_fit(*module, fit_message(ids, random_vector(rng, 20), 2));
  const int both[] = {1, 2};
  const int first[] = {1};
  const int second[] = {2};
  const Vector sum = assist_predict(*module, "t", ids, both);
  EXPECT_LE((sum - assist_predict(*module, "t", ids, first) -
             assist_predict(*module, "t", ids, second))
                .norm(),
            1e-12);
  const int missing[] = {3};
  EXPECT_EQ(code_of([&] { assist_predict(*module, "t", ids, missing); }), ErrorCode::kUnknownRound);
  const IdList stranger = make_ids({"zz"});
  EXPECT_EQ(code_of([&] { assist_predict(*module, "t", stranger, first); }),
            ErrorCode::kMissingTestRows);
}

TEST(ResidualMessage, EnvelopeCarriesOnlyIdsAndValues) {
  const ResidualMessage msg = fit_message(make_ids({"a", "b"}), vec({0.5, -1}));
  const Envelope e = msg.to_envelope(MessageKind::kFitRequest);
  std::set<std::string> keys;
  for (auto it = e.payload.begin(); it != e.payload.end(); ++it) keys.insert(it.key());
  EXPECT_EQ(keys, (std::set<std::string>{"ids", "values"}));
  const ResidualMessage back = ResidualMessage::from_envelope(decode(encode(e)));
  EXPECT_EQ(back.ids, msg.ids);
  EXPECT_EQ(back.values, msg.values);
  EXPECT_EQ(back.round, 1);
}

// Alice plus assistants over in-process endpoints.
struct Federation {
  std::shared_ptr<LocalModule> alice;
  std::vector<std::shared_ptr<LocalModule>> modules;
  std::vector<Endpoint> endpoints;
  TaskLabels labels;
  IdList ids;
};

Federation federation(const Matrix& x, const Vector& y, const std::vector<Eigen::Index>& widths,
                      const std::vector<LearnerSpec>& learners) {
  Federation f;
  f.ids = row_ids(x.rows());
  f.labels = TaskLabels(f.ids, y);
  Eigen::Index col = 0;
  for (std::size_t j = 0; j < widths.size(); ++j) {
    const std::string id = j == 0 ? "alice" : "m" + std::to_string(j);
    const LearnerSpec& learner = learners[std::min(j, learners.size() - 1)];
    auto module = make_module(id, f.ids, x.middleCols(col, widths[j]), learner);
    col += widths[j];
    if (j == 0) {
      f.alice = module;
    } else {
      f.modules.push_back(module);
      f.endpoints.push_back(in_process_endpoint(module));
    }
  }
  return f;
}

ProtocolConfig quiet_config(int max_rounds) {
  ProtocolConfig c;
  c.max_rounds = max_rounds;
  c.validation_fraction = 0.0;
  c.patience = max_rounds;
  c.tol_rel = 0.0;
  return c;
}

TEST(LearningStage, NoAssistantsIsAliceAlone) {
  Engine rng = make_engine(5);
  const Matrix x = random_matrix(rng, 60, 2);
  const Vector y = x.col(0) + random_vector(rng, 60, 0.3);
  Federation f = federation(x, y, {2}, {LearnerSpec::least_squares()});
  ProtocolConfig config;
  config.max_rounds = 10;
  const TrainedTask task = run_learning_stage(*f.alice, {}, f.labels, config);
  EXPECT_EQ(task.stopping_round, 1);
  const Vector direct = predict(fit_least_squares(f.alice->partition().rows_for(task.fit_ids),
                                                  f.labels.values_for(task.fit_ids)),
                                f.alice->partition().rows_for(task.validation_ids));
  const Vector staged = predict_stage(task, *f.alice, {}, task.validation_ids);
  EXPECT_LE((staged - direct).norm(), 1e-12 * (1.0 + direct.norm()));
  EXPECT_EQ(predict_solo(task, *f.alice, task.validation_ids), staged);
}

TEST(LearningStage, DuplicatedColumnAddsNothing) {
  Matrix x(3, 2);
  x << 1, 1, 2, 2, 4, 4;
  Federation f = federation(x, vec({1, 3, 2}), {1, 1}, {LearnerSpec::least_squares()});
  const TrainedTask task = run_learning_stage(*f.alice, f.endpoints, f.labels, quiet_config(1));
  ASSERT_EQ(task.rounds[0].steps.size(), 2u);
  EXPECT_NEAR(task.rounds[0].steps[1].train_rmse, task.rounds[0].steps[0].train_rmse, 1e-12);
  // Residual after Alice's half-step, by hand: y - fitted on x = (1, 2, 4).
  const Vector expected = vec({1, 3, 2}) - predict(fit_least_squares(x.col(0), vec({1, 3, 2})), x.col(0));
  EXPECT_LE((task.rounds[0].residual - expected).norm(), 1e-12);
}

TEST(LearningStage, TwoModulesReachCentralisedOls) {
  Engine rng = make_engine(6);
  const Matrix x = random_matrix(rng, 300, 2) * (Matrix(2, 2) << 1, 0.6, 0, 0.8).finished();
  const Vector y = x.col(0) + x.col(1) + random_vector(rng, 300);
  Federation f = federation(x, y, {1, 1}, {LearnerSpec::least_squares()});
  const TrainedTask task = run_learning_stage(*f.alice, f.endpoints, f.labels, quiet_config(60));
  const double oracle = std::sqrt((y - predict(fit_least_squares(x, y), x)).squaredNorm() / 300);
  EXPECT_LE(std::abs(task.rounds.back().train_rmse - oracle), 1e-6 * oracle);
}

TEST(LearningStage, LeastSquaresHalfStepsNeverIncreaseError) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Engine rng = make_engine(100 + seed);
    const Matrix x = random_matrix(rng, 80, 4) + random_matrix(rng, 80, 1).replicate(1, 4);
    const Vector y = x.rowwise().sum() + random_vector(rng, 80);
    Federation f = federation(x, y, {2, 1, 1}, {LearnerSpec::least_squares()});
    const TrainedTask task = run_learning_stage(*f.alice, f.endpoints, f.labels, quiet_config(15));
    double last = std::sqrt(y.squaredNorm() / 80);
    for (const RoundRecord& r : task.rounds) {
      for (const HalfStep& s : r.steps) {
        EXPECT_LE(s.train_rmse, last * (1 + 1e-12)) << "seed " << seed;
        last = s.train_rmse;
      }
    }
  }
}

TEST(LearningStage, TelescopingForEveryLearnerKind) {
  SyntheticSpec spec;
  spec.n = 150;
  spec.seed = 7;
  const Dataset d = gen_friedman1(spec);
  for (const char* text : {"least_squares", "ridge:lambda=2", "regression_tree:depth=3",
                           "gradient_boosting:stages=10,depth=2", "dense_net:hidden=4,epochs=3,rate=0.05"}) {
    Federation f = federation(d.features.features(), d.labels.values(), {3, 1, 1},
                              {LearnerSpec::parse(text)});
    ProtocolConfig config;
    config.max_rounds = 6;
    config.run_to_max = true;
    const TrainedTask task = run_learning_stage(*f.alice, f.endpoints, f.labels, config);
    for (int k = 1; k <= static_cast<int>(task.rounds.size()); ++k) {
      const Vector y = f.labels.values_for(task.fit_ids);
      const Vector y_hat = predict_stage(task, *f.alice, f.endpoints, task.fit_ids, k);
      EXPECT_LE((y - y_hat - task.rounds[k - 1].residual).norm(), 1e-9 * y.norm())
          << text << " round " << k;
    }
  }
}

TEST(LearningStage, PredictRoundsSumToStage) {
  Engine rng = make_engine(8);
  const Matrix x = random_matrix(rng, 100, 3);
  const Vector y = x.col(0).array().sin().matrix() + x.col(2) + random_vector(rng, 100, 0.2);
  Federation f = federation(x, y, {1, 2}, {LearnerSpec::parse("regression_tree:depth=2")});
  ProtocolConfig config;
  config.max_rounds = 5;
  config.run_to_max = true;
  const TrainedTask task = run_learning_stage(*f.alice, f.endpoints, f.labels, config);
  Vector sum = Vector::Zero(static_cast<Eigen::Index>(task.validation_ids.size()));
  for (int k = 1; k <= 5; ++k) {
    sum += predict_round(task, *f.alice, f.endpoints, task.validation_ids, k);
    EXPECT_LE((sum - predict_stage(task, *f.alice, f.endpoints, task.validation_ids, k)).norm(),
              1e-12 * (1.0 + sum.norm()));
  }
  EXPECT_EQ(code_of([&] { predict_round(task, *f.alice, f.endpoints, task.validation_ids, 6); }),
            ErrorCode::kUnknownRound);
}

TEST(LearningStage, ValidationHoldoutAndStoppingRound) {
  Engine rng = make_engine(9);
  const Matrix x = random_matrix(rng, 200, 2);
  const Vector y = x.col(0) + x.col(1) + random_vector(rng, 200);
  Federation f = federation(x, y, {1, 1}, {LearnerSpec::least_squares()});
  ProtocolConfig config;
  config.max_rounds = 30;
  const TrainedTask task = run_learning_stage(*f.alice, f.endpoints, f.labels, config);
  EXPECT_EQ(task.validation_ids.size(), 40u);
  EXPECT_EQ(task.fit_ids.size(), 160u);
  EXPECT_GT(task.stop_fired_at, 0);
  EXPECT_EQ(static_cast<int>(task.rounds.size()), task.stop_fired_at);
  EXPECT_GE(task.stopping_round, 1);
  EXPECT_LE(task.stopping_round, task.stop_fired_at);
  const double best = *std::min_element(task.validation_history.begin(), task.validation_history.end());
  EXPECT_LE(task.validation_history[task.stopping_round - 1], best * (1 + config.tol_rel));
  for (std::size_t i = 0; i < task.rounds.size(); ++i) {
    const Vector y_val = f.labels.values_for(task.validation_ids);
    const Vector pred = predict_stage(task, *f.alice, f.endpoints, task.validation_ids,
                                      static_cast<int>(i) + 1);
    EXPECT_NEAR(rmse(y_val, pred), task.validation_history[i], 1e-12);
  }
}

TEST(LearningStage, RefusingModuleLeavesTheChain) {
  Engine rng = make_engine(10);
  const Matrix x = random_matrix(rng, 50, 3);
  const Vector y = x.rowwise().sum();
  Federation f = federation(x, y, {1, 1, 1}, {LearnerSpec::least_squares()});
  f.modules[0]->set_refusal_policy([](const std::string&, int round) { return round >= 2; });
  const TrainedTask task = run_learning_stage(*f.alice, f.endpoints, f.labels, quiet_config(4));
  ASSERT_EQ(task.events.size(), 1u);
  EXPECT_EQ(task.events[0].round, 2);
  EXPECT_EQ(task.events[0].module_id, "m1");
  EXPECT_EQ(task.rounds[0].contributors[0], (std::vector<std::string>{"alice", "m1", "m2"}));
  EXPECT_EQ(task.rounds[3].contributors[0], (std::vector<std::string>{"alice", "m2"}));
  EXPECT_EQ(f.modules[0]->rounds("task"), (std::vector<int>{1}));
  const Vector y_fit = f.labels.values_for(task.fit_ids);
  const Vector y_hat = predict_stage(task, *f.alice, f.endpoints, task.fit_ids, 4);
  EXPECT_LE((y_fit - y_hat - task.rounds[3].residual).norm(), 1e-9 * y_fit.norm());
}

TEST(LearningStage, MissingRowsAreACollationFailure) {
  Engine rng = make_engine(11);
  const IdList ids = row_ids(30);
  auto alice = make_module("alice", ids, random_matrix(rng, 30, 1), LearnerSpec::least_squares());
  const IdList fewer(ids.begin(), ids.begin() + 20);
  auto bob = make_module("bob", fewer, random_matrix(rng, 20, 1), LearnerSpec::least_squares());
  TaskLabels labels(ids, random_vector(rng, 30));
  EXPECT_EQ(code_of([&] {
              run_learning_stage(*alice, {in_process_endpoint(bob)}, labels, quiet_config(2));
            }),
            ErrorCode::kCollationFailure);
}

TEST(LearningStage, PairwiseWithOneAssistantMatchesSequential) {
  Engine rng = make_engine(12);
  const Matrix x = random_matrix(rng, 90, 2);
  const Vector y = x.col(0) - x.col(1) + random_vector(rng, 90, 0.5);
  Federation a = federation(x, y, {1, 1}, {LearnerSpec::least_squares()});
  Federation b = federation(x, y, {1, 1}, {LearnerSpec::least_squares()});
  ProtocolConfig config;
  config.max_rounds = 8;
  config.run_to_max = true;
  const TrainedTask seq = run_learning_stage(*a.alice, a.endpoints, a.labels, config);
  config.mode = ChainMode::kPairwise;
  const TrainedTask pair = run_learning_stage(*b.alice, b.endpoints, b.labels, config);
  ASSERT_EQ(seq.rounds.size(), pair.rounds.size());
  for (std::size_t k = 0; k < seq.rounds.size(); ++k) {
    EXPECT_EQ(seq.rounds[k].residual, pair.rounds[k].residual);
    EXPECT_EQ(seq.rounds[k].validation_rmse, pair.rounds[k].validation_rmse);
  }
  EXPECT_EQ(pair.chain_task_id(0), "task/0");
}

TEST(LearningStage, PairwiseAveragesChains) {
  Engine rng = make_engine(13);
  const Matrix x = random_matrix(rng, 70, 3);
  const Vector y = x.rowwise().sum() + random_vector(rng, 70, 0.5);
  Federation f = federation(x, y, {1, 1, 1}, {LearnerSpec::least_squares()});
  ProtocolConfig config = quiet_config(5);
  config.mode = ChainMode::kPairwise;
  const TrainedTask task = run_learning_stage(*f.alice, f.endpoints, f.labels, config);
  EXPECT_EQ(task.chain_count(), 2);
  EXPECT_EQ(f.alice->rounds("task/0").size(), 5u);
  EXPECT_EQ(f.alice->rounds("task/1").size(), 5u);
  EXPECT_TRUE(f.modules[0]->rounds("task/1").empty());
  const Vector y_fit = f.labels.values_for(task.fit_ids);
  for (int k = 1; k <= 5; ++k) {
    const Vector y_hat = predict_stage(task, *f.alice, f.endpoints, task.fit_ids, k);
    EXPECT_LE((y_fit - y_hat - task.rounds[k - 1].residual).norm(), 1e-9 * y_fit.norm());
  }
}

TEST(LearningStage, DeterministicAcrossRuns) {
  SyntheticSpec spec;
  spec.n = 120;
  spec.seed = 3;
  const Dataset d = gen_friedman1(spec);
  auto run = [&] {
    Federation f = federation(d.features.features(), d.labels.values(), {3, 2},
                              {LearnerSpec::parse("gradient_boosting:stages=5")});
    ProtocolConfig config;
    config.max_rounds = 4;
    config.seed = 99;
    return run_learning_stage(*f.alice, f.endpoints, f.labels, config);
  };
  const TrainedTask a = run();
  const TrainedTask b = run();
  ASSERT_EQ(a.rounds.size(), b.rounds.size());
  EXPECT_EQ(a.fit_ids, b.fit_ids);
  EXPECT_EQ(a.validation_history, b.validation_history);
  for (std::size_t k = 0; k < a.rounds.size(); ++k) EXPECT_EQ(a.rounds[k].residual, b.rounds[k].residual);
}

// Rounds until the training RMSE is within 1e-6 relative of pooled OLS.
int rounds_to_oracle(double rho) {
  SyntheticSpec spec;
  spec.kind = GeneratorKind::kLinear;
  spec.n = 500;
  spec.rho = rho;
  spec.seed = 21;
  spec.coefficients = Eigen::Vector4d(1, -1, 2, 0.5);
  const Dataset d = gen_linear(spec);
  const Matrix& x = d.features.features();
  const Vector& y = d.labels.values();
  Federation f = federation(x, y, {2, 2}, {LearnerSpec::least_squares()});
  const TrainedTask task = run_learning_stage(*f.alice, f.endpoints, f.labels, quiet_config(400));
  const double oracle = std::sqrt((y - predict(fit_least_squares(x, y), x)).squaredNorm() / y.size());
  for (const RoundRecord& r : task.rounds) {
    if (r.train_rmse <= oracle * (1 + 1e-6)) return r.round;
  }
  return 1000;
}

TEST(LearningStage, StrongCorrelationSlowsConvergence) {
  EXPECT_GT(rounds_to_oracle(0.99), rounds_to_oracle(0.0));
}

TEST(Baselines, OracleOnOnePartitionIsPlainFit) {
  Engine rng = make_engine(14);
  const IdList ids = row_ids(80);
  const Matrix x = random_matrix(rng, 80, 2);
  const Vector y = x.col(0) + random_vector(rng, 80);
  const FeaturePartition p = testing::make_partition(ids, x, "x");
  const TaskLabels labels(ids, y);
  const TrainTestIds s = split(ids, {0.7, 1, std::nullopt});
  const FeaturePartition* parts[] = {&p};
  const Metrics m = oracle_baseline(parts, labels, LearnerSpec::least_squares(), s);
  const FittedModel fitted = fit_least_squares(p.rows_for(s.train), labels.values_for(s.train));
  EXPECT_NEAR(m.test_rmse, rmse(labels.values_for(s.test), predict(fitted, p.rows_for(s.test))), 1e-12);
  EXPECT_NEAR(m.train_mad, mad(labels.values_for(s.train), predict(fitted, p.rows_for(s.train))), 1e-12);
}

TEST(Baselines, StackingOneModelIsCloseToTheModel) {
  Engine rng = make_engine(15);
  const IdList ids = row_ids(600);
  const Matrix x = random_matrix(rng, 600, 2);
  const Vector y = x.col(0) - 2 * x.col(1) + random_vector(rng, 600);
  const FeaturePartition p = testing::make_partition(ids, x, "x");
  const TaskLabels labels(ids, y);
  const TrainTestIds s = split(ids, {0.7, 2, std::nullopt});
  const FeaturePartition* parts[] = {&p};
  StackingConfig config;
  config.base = {LearnerSpec::least_squares()};
  config.meta = LearnerSpec::least_squares();
  const Metrics stacked = stacking_baseline(parts, labels, config, s);
  const Metrics plain = oracle_baseline(parts, labels, LearnerSpec::least_squares(), s);
  EXPECT_NEAR(stacked.test_rmse, plain.test_rmse, 0.02 * plain.test_rmse);
  config.folds = 1;
  EXPECT_EQ(code_of([&] { stacking_baseline(parts, labels, config, s); }), ErrorCode::kInvalidArgument);
}

TEST(Baselines, OracleLowerBoundsAssistedTrainingError) {
  Engine rng = make_engine(16);
  const Matrix x = random_matrix(rng, 200, 3) + random_matrix(rng, 200, 1).replicate(1, 3);
  const Vector y = x.rowwise().sum() + random_vector(rng, 200);
  Federation f = federation(x, y, {1, 1, 1}, {LearnerSpec::least_squares()});
  const TrainedTask task = run_learning_stage(*f.alice, f.endpoints, f.labels, quiet_config(20));
  const Matrix pooled = x;
  const double oracle =
      std::sqrt((y - predict(fit_least_squares(pooled, y), pooled)).squaredNorm() / y.size());
  for (const RoundRecord& r : task.rounds) EXPECT_GE(r.train_rmse, oracle - 1e-9);
}

}  // namespace
}  // namespace assist
