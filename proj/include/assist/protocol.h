#ifndef ASSIST_PROTOCOL_H_
#define ASSIST_PROTOCOL_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "assist/core.h"
#include "assist/data.h"
#include "assist/learners.h"
#include "assist/module.h"
#include "assist/transport.h"

namespace assist {

// Residual exchanged in the learning stage. Carries ids and one value per id
// and nothing else, so no feature column can ride along.
struct ResidualMessage {
  std::string task_id;
  int round = 0;
  std::string sender;
  std::string receiver;
  IdList ids;
  Vector values;

  Envelope to_envelope(MessageKind kind) const;
  static ResidualMessage from_envelope(const Envelope& envelope);
};

// Answers one FIT request: fit the module's learner to (X_j, residual),
// store the model under (task, round) and return residual - fitted.
// Throws MissingId or StorageConflict.
ResidualMessage assist_fit(LocalModule& module, const ResidualMessage& msg);

// Sum of the module's stored models for `rounds` on its rows for `ids`.
// Throws UnknownRound or MissingTestRows.
Vector assist_predict(const LocalModule& module, const std::string& task_id,
                      std::span<const SampleId> ids, std::span<const int> rounds);

enum class StopDecision { kContinue, kStop };

// Stops once none of the last `patience` entries improved on the running
// minimum (of everything before it) by more than tol_rel relative.
StopDecision stop_check(std::span<const double> history, int patience,
                        double tol_rel = 1e-4);

enum class ChainMode {
  // Alice -> M_1 -> ... -> M_m; the last residual seeds the next round.
  kSequential,
  // Independent Alice <-> M_j chains; predictions averaged over chains.
  kPairwise,
};

struct ProtocolConfig {
  std::string task_id = "task";
  int max_rounds = 20;
  int patience = 3;
  double tol_rel = 1e-4;
  // Fraction of the task rows held out for the stopping rule. With 0 the
  // stopping rule watches the training RMSE.
  double validation_fraction = 0.2;
  std::uint64_t seed = 0;
  ChainMode mode = ChainMode::kSequential;
  // Keep running after the stopping rule fires (K is still chosen among the
  // rounds up to the firing point). Used to record full error curves.
  bool run_to_max = false;
};

struct HalfStep {
  std::string module_id;
  int chain = 0;            // pairwise chain index; 0 in sequential mode
  double train_rmse = 0.0;  // RMSE of the residual this step produced
};

struct RoundRecord {
  int round = 0;
  std::vector<HalfStep> steps;
  // Modules (by id) holding a model for this round, per chain.
  std::vector<std::vector<std::string>> contributors;
  double train_rmse = 0.0;
  double validation_rmse = 0.0;
  // Training residual after the round (chain average in pairwise mode).
  Vector residual;
  double wall_ms = 0.0;  // time spent in the round's half-steps
};

struct ProtocolEvent {
  int round = 0;
  std::string module_id;
  std::string what;
};

struct TrainedTask {
  std::string task_id;
  ChainMode mode = ChainMode::kSequential;
  std::string alice_id;
  std::vector<std::string> chain;  // assistant ids in chain order
  IdList fit_ids;
  IdList validation_ids;
  std::vector<RoundRecord> rounds;
  std::vector<double> validation_history;
  int stop_fired_at = 0;  // 0 when the rule never fired
  int stopping_round = 0; // K
  std::vector<ProtocolEvent> events;

  // Task id used for chain j (pairwise tasks get one namespace per chain).
  std::string chain_task_id(int chain) const;
  int chain_count() const;
  const Vector& final_residual() const;  // residual after round K
};

// Procedure 1 learning stage. Alice is local; assistants are reached only
// through their endpoints. Throws CollationFailure or transport errors;
// refusals are recorded as events and the refusing module leaves the chain.
TrainedTask run_learning_stage(LocalModule& alice,
                               const std::vector<Endpoint>& assistants,
                               const TaskLabels& labels,
                               const ProtocolConfig& config);

// Prediction stage: unweighted sum over rounds 1..up_to_round (default K)
// and chain positions of every recorded model's prediction on its own slice.
// Throws UnknownRound or MissingTestRows.
Vector predict_stage(const TrainedTask& task, const LocalModule& alice,
                     const std::vector<Endpoint>& assistants,
                     std::span<const SampleId> ids,
                     std::optional<int> up_to_round = std::nullopt);

// Contribution of a single round (already averaged over chains). Summing
// over rounds 1..r gives predict_stage(..., r).
Vector predict_round(const TrainedTask& task, const LocalModule& alice,
                     const std::vector<Endpoint>& assistants,
                     std::span<const SampleId> ids, int round);

// Alice's round-1 model alone: her prediction before any assistance.
Vector predict_solo(const TrainedTask& task, const LocalModule& alice,
                    std::span<const SampleId> ids);

struct Metrics {
  double train_rmse = 0.0;
  double test_rmse = 0.0;
  double train_mad = 0.0;
  double test_mad = 0.0;
};

// Learner trained on the column-concatenated features of all partitions.
Metrics oracle_baseline(std::span<const FeaturePartition* const> partitions,
                        const TaskLabels& labels, const LearnerSpec& learner,
                        const TrainTestIds& split);

struct StackingConfig {
  std::vector<LearnerSpec> base;  // fitted by every partition
  LearnerSpec meta;
  int folds = 5;
  std::uint64_t seed = 0;
};

// Every partition fits the base learners to y; out-of-fold base predictions
// are the meta-features.
Metrics stacking_baseline(std::span<const FeaturePartition* const> partitions,
                          const TaskLabels& labels, const StackingConfig& config,
                          const TrainTestIds& split);

}  // namespace assist

#endif  // ASSIST_PROTOCOL_H_
