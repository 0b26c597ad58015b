#ifndef ASSIST_HARNESS_H_
#define ASSIST_HARNESS_H_

#include <optional>
#include <string>
#include <vector>

#include "assist/data.h"
#include "assist/learners.h"
#include "assist/metrics.h"
#include "assist/nn_protocol.h"
#include "assist/protocol.h"
#include "assist/transport.h"

namespace assist {

enum class ProtocolKind { kProcedure1, kProcedure2 };
enum class TransportKind { kInProcess, kTcp };

struct DataConfig {
  // Synthetic source (kind, noise, coefficients, rho...). The per-replication
  // seed is derived from the experiment seed.
  SyntheticSpec synthetic;
  std::size_t n_train = 2000;
  std::size_t n_test = 10000;
  // CSV source: replaces the generator when set.
  std::optional<std::string> csv_path;
  std::string id_column = "id";
  std::string label_column = "y";
  double train_fraction = 0.7;
};

struct StackingSpec {
  std::vector<LearnerSpec> base;
  LearnerSpec meta;
  int folds = 5;
};

struct ExperimentConfig {
  DataConfig data;
  // Column groups, Alice first.
  std::vector<std::vector<std::string>> groups;
  // One learner per module, or a single learner shared by all.
  std::vector<LearnerSpec> learners;
  ProtocolKind protocol = ProtocolKind::kProcedure1;
  ChainMode mode = ChainMode::kSequential;
  int max_rounds = 20;
  int patience = 3;
  double tol_rel = 1e-4;
  double validation_fraction = 0.2;
  bool run_to_max = true;
  int replications = 5;
  std::uint64_t seed = 0;
  TransportKind transport = TransportKind::kInProcess;
  std::optional<StackingSpec> stacking;
  // Procedure 2 only.
  Eigen::Index hidden = 16;
  NnOptConfig nn_opt;
  // Report path prefix: writes <output>.json and <output>.csv when set.
  std::string output;

  // Throws ConfigError on unknown keys or invalid values.
  static ExperimentConfig from_json(const Json& json);
  Json to_json() const;
  void validate() const;
  const LearnerSpec& learner_for(std::size_t module) const;
};

ExperimentConfig load_experiment_config(const std::string& path);

struct RoundMetrics {
  int round = 0;
  double train_rmse = 0.0;
  double train_mad = 0.0;
  double validation_rmse = 0.0;
  double test_rmse = 0.0;
  double test_mad = 0.0;
};

struct ReplicationReport {
  int replication = 0;
  std::uint64_t seed = 0;
  std::vector<RoundMetrics> rounds;
  // Timing, reported under "timing" and excluded from the determinism check.
  std::vector<double> round_wall_ms;
  double predict_latency_ms = 0.0;  // mean per-round test PREDICT round trip
  int stopping_round = 0;
  int stop_fired_at = 0;
  Metrics at_stopping_round;  // AL metrics at K
  Metrics oracle;
  Metrics solo;
  // Alice's first half-step before any assistance, scored directly from the
  // trained task; equals `solo` by construction.
  Metrics round0;
  std::optional<Metrics> stacking;
  std::size_t rows_retained = 0;  // collated rows used by the task
};

struct Report {
  ExperimentConfig config;
  std::vector<ReplicationReport> replications;
  std::string status = "ok";  // "failed" for a partial report
  std::string error;

  // Without timing the output is a pure function of the config.
  Json to_json(bool include_timing = true) const;
  // Long format: replication,round,method,split,metric,value.
  std::string per_round_csv() const;
};

// Writes a partial report marked "failed" to config.output before rethrowing.
Report run_experiment(const ExperimentConfig& config);
void write_report(const Report& report, const std::string& prefix);

struct StackingCell {
  std::string base;
  std::string meta;
  MeanSe stacking;
  std::optional<MeanSe> assisted;  // needs a single base learner
};

// Stacking versus assisted learning grid: each cell runs AL with the base
// learner and stacking with (base, meta) on the same replications.
struct CompareConfig {
  ExperimentConfig experiment;
  std::vector<StackingSpec> cells;

  static CompareConfig from_json(const Json& json);
};

std::vector<StackingCell> compare_stacking(const CompareConfig& config);
Json stacking_table_json(const std::vector<StackingCell>& cells);
std::string stacking_table_text(const std::vector<StackingCell>& cells);

}  // namespace assist

#endif  // ASSIST_HARNESS_H_
