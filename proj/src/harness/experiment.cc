#include <chrono>

#include "assist/harness.h"
#include "assist/random.h"
#include "assist/service.h"

namespace assist {

namespace {

struct ReplicationData {
  FeaturePartition full;
  TaskLabels labels;
  TrainTestIds split;
};

ReplicationData load_data(const ExperimentConfig& config, std::uint64_t rep_seed,
                          const std::optional<CsvTable>& csv) {
  if (csv) {
    if (!csv->labels) throw Error(ErrorCode::kConfigError, "CSV source needs a label column");
    SplitSpec spec{config.data.train_fraction, derive_seed(rep_seed, "split"), std::nullopt};
    TrainTestIds parts = split(csv->features.ids(), spec);
    return {csv->features, *csv->labels, std::move(parts)};
  }
  SyntheticSpec spec = config.data.synthetic;
  spec.n = static_cast<Eigen::Index>(config.data.n_train + config.data.n_test);
  spec.seed = derive_seed(rep_seed, "data");
  Dataset data = generate(spec);
  SplitSpec split_spec;
  split_spec.seed = derive_seed(rep_seed, "split");
  split_spec.train_count = config.data.n_train;
  TrainTestIds parts = split(data.features.ids(), split_spec);
  return {std::move(data.features), std::move(data.labels), std::move(parts)};
}

std::string module_name(std::size_t j) {
  return j == 0 ? std::string("alice") : "m" + std::to_string(j);
}

Metrics score(const Vector& y_fit, const Vector& p_fit, const Vector& y_test,
              const Vector& p_test) {
  Metrics m;
  m.train_rmse = rmse(y_fit, p_fit);
  m.train_mad = mad(y_fit, p_fit);
  m.test_rmse = rmse(y_test, p_test);
  m.test_mad = mad(y_test, p_test);
  return m;
}

// Starts the assistants' responders on the chosen transport.
struct Deployment {
  std::vector<Endpoint> endpoints;
  std::vector<std::unique_ptr<TcpServer>> servers;

  void add(std::shared_ptr<LocalModule> module, TransportKind transport) {
    if (transport == TransportKind::kInProcess) {
      endpoints.push_back(in_process_endpoint(std::move(module)));
      return;
    }
    const std::string id = module->id();
    servers.push_back(serve_module(std::move(module), "127.0.0.1", 0));
    endpoints.push_back(
        tcp_endpoint(id, "127.0.0.1:" + std::to_string(servers.back()->port())));
  }
};

void run_procedure1(const ExperimentConfig& config, std::uint64_t rep_seed,
                    const std::vector<FeaturePartition>& parts, const ReplicationData& data,
                    ReplicationReport& rep) {
  auto alice = std::make_shared<LocalModule>(module_name(0), parts[0], config.learner_for(0));
  Deployment deployment;
  for (std::size_t j = 1; j < parts.size(); ++j) {
    deployment.add(std::make_shared<LocalModule>(module_name(j), parts[j], config.learner_for(j)),
                   config.transport);
  }
  const TaskLabels train_labels(data.split.train, data.labels.values_for(data.split.train));

  ProtocolConfig pc;
  pc.task_id = "task-" + std::to_string(rep.replication);
  pc.max_rounds = config.max_rounds;
  pc.patience = config.patience;
  pc.tol_rel = config.tol_rel;
  pc.validation_fraction = config.validation_fraction;
  pc.seed = rep_seed;
  pc.mode = config.mode;
  pc.run_to_max = config.run_to_max;
  const TrainedTask task = run_learning_stage(*alice, deployment.endpoints, train_labels, pc);

  const Vector y_fit = data.labels.values_for(task.fit_ids);
  const Vector y_test = data.labels.values_for(data.split.test);
  Vector test_pred = Vector::Zero(y_test.size());
  double latency_total = 0.0;
  for (const RoundRecord& record : task.rounds) {
    const auto started = std::chrono::steady_clock::now();
    test_pred += predict_round(task, *alice, deployment.endpoints, data.split.test, record.round);
    latency_total +=
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
            .count();
    RoundMetrics m;
    m.round = record.round;
    m.train_rmse = record.train_rmse;
    m.train_mad = record.residual.cwiseAbs().mean();
    m.validation_rmse = record.validation_rmse;
    m.test_rmse = rmse(y_test, test_pred);
    m.test_mad = mad(y_test, test_pred);
    rep.rounds.push_back(m);
    rep.round_wall_ms.push_back(record.wall_ms);
  }
  rep.predict_latency_ms = latency_total / static_cast<double>(task.rounds.size());
  rep.stopping_round = task.stopping_round;
  rep.stop_fired_at = task.stop_fired_at;
  const RoundMetrics& at_k = rep.rounds[static_cast<std::size_t>(task.stopping_round - 1)];
  rep.at_stopping_round = {at_k.train_rmse, at_k.test_rmse, at_k.train_mad, at_k.test_mad};

  rep.round0 = score(y_fit, predict_solo(task, *alice, task.fit_ids), y_test,
                     predict_solo(task, *alice, data.split.test));
  const FittedModel solo =
      fit(config.learner_for(0), parts[0].rows_for(task.fit_ids), y_fit);
  rep.solo = score(y_fit, predict(solo, parts[0].rows_for(task.fit_ids)), y_test,
                   predict(solo, parts[0].rows_for(data.split.test)));

  std::vector<const FeaturePartition*> ptrs;
  for (const auto& p : parts) ptrs.push_back(&p);
  const TrainTestIds baseline_split{task.fit_ids, data.split.test};
  rep.oracle = oracle_baseline(ptrs, data.labels, config.learner_for(0), baseline_split);
  if (config.stacking) {
    StackingConfig sc{config.stacking->base, config.stacking->meta, config.stacking->folds,
                      derive_seed(rep_seed, "stacking")};
    rep.stacking = stacking_baseline(ptrs, data.labels, sc, baseline_split);
  }
}

void run_procedure2(const ExperimentConfig& config, std::uint64_t rep_seed,
                    const std::vector<FeaturePartition>& parts, const ReplicationData& data,
                    ReplicationReport& rep) {
  // Without a second group Bob joins with no columns.
  const FeaturePartition bob_part =
      parts.size() > 1 ? parts[1]
                       : FeaturePartition(parts[0].ids(), Matrix(parts[0].rows(), 0), {});
  auto bob = std::make_shared<LocalModule>("bob", bob_part, config.learner_for(parts.size() - 1));
  Deployment deployment;
  deployment.add(bob, config.transport);
  const Endpoint& bob_endpoint = deployment.endpoints[0];
  const TaskLabels train_labels(data.split.train, data.labels.values_for(data.split.train));

  NnConfig nc;
  nc.task_id = "nn-task-" + std::to_string(rep.replication);
  nc.hidden = config.hidden;
  nc.opt = config.nn_opt;
  nc.opt.seed = derive_seed(rep_seed, "nn");
  nc.max_rounds = config.max_rounds;
  nc.patience = config.patience;
  nc.tol_rel = config.tol_rel;
  nc.validation_fraction = config.validation_fraction;
  nc.run_to_max = config.run_to_max;
  const auto started = std::chrono::steady_clock::now();
  const NnResult result = run_nn_learning(parts[0], bob_endpoint, train_labels, nc);
  const double train_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
          .count();

  const Vector y_fit = data.labels.values_for(result.fit_ids);
  const Vector y_test = data.labels.values_for(data.split.test);
  double latency_total = 0.0;
  for (std::size_t k = 0; k < result.states.size(); ++k) {
    const SplitNetworkState& state = result.states[k];
    const auto t0 = std::chrono::steady_clock::now();
    const Vector test_pred = nn_predict(state, parts[0], bob_endpoint, nc.task_id, data.split.test);
    latency_total +=
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    const Vector fit_pred = nn_predict(state, parts[0], bob_endpoint, nc.task_id, result.fit_ids);
    RoundMetrics m;
    m.round = static_cast<int>(k) + 1;
    m.train_rmse = rmse(y_fit, fit_pred);
    m.train_mad = mad(y_fit, fit_pred);
    m.validation_rmse = result.validation_history[k];
    m.test_rmse = rmse(y_test, test_pred);
    m.test_mad = mad(y_test, test_pred);
    rep.rounds.push_back(m);
    rep.round_wall_ms.push_back(train_ms / static_cast<double>(result.states.size()));
  }
  rep.predict_latency_ms = latency_total / static_cast<double>(result.states.size());
  rep.stopping_round = result.stopping_round;
  rep.stop_fired_at = result.stop_fired_at;
  const RoundMetrics& at_k = rep.rounds[static_cast<std::size_t>(result.stopping_round - 1)];
  rep.at_stopping_round = {at_k.train_rmse, at_k.test_rmse, at_k.train_mad, at_k.test_mad};
  rep.round0 = rep.solo = Metrics{};

  // Baselines get the same total epoch budget as the split run.
  DenseNetParams net;
  net.hidden = config.hidden;
  net.epochs = static_cast<int>(result.states.size()) * config.nn_opt.epochs_per_round;
  net.batch = config.nn_opt.batch;
  net.rate = config.nn_opt.rate;
  const LearnerSpec dense = LearnerSpec::dense_net(net, nc.opt.seed);
  std::vector<const FeaturePartition*> ptrs{&parts[0]};
  if (parts.size() > 1) ptrs.push_back(&parts[1]);
  const TrainTestIds baseline_split{result.fit_ids, data.split.test};
  rep.oracle = oracle_baseline(ptrs, data.labels, dense, baseline_split);
  const FeaturePartition* alice_only[] = {&parts[0]};
  rep.solo = oracle_baseline(alice_only, data.labels, dense, baseline_split);
  rep.round0 = rep.solo;
  if (config.stacking) {
    StackingConfig sc{config.stacking->base, config.stacking->meta, config.stacking->folds,
                      derive_seed(rep_seed, "stacking")};
    rep.stacking = stacking_baseline(ptrs, data.labels, sc, baseline_split);
  }
}

}  // namespace

Report run_experiment(const ExperimentConfig& config) {
  config.validate();
  Report report;
  report.config = config;
  try {
    std::optional<CsvTable> csv;
    if (config.data.csv_path) {
      csv = load_csv(*config.data.csv_path, config.data.id_column, config.data.label_column);
    }
    for (int r = 0; r < config.replications; ++r) {
      ReplicationReport rep;
      rep.replication = r;
      rep.seed = derive_seed(config.seed, "replication", static_cast<std::uint64_t>(r));
      const ReplicationData data = load_data(config, rep.seed, csv);

      std::vector<FeaturePartition> parts;
      if (config.groups.empty()) {
        parts.push_back(data.full);
      } else {
        parts = vertical_split(data.full, config.groups);
      }
      if (parts.size() >= 2) {
        std::vector<const FeaturePartition*> ptrs;
        for (const auto& p : parts) ptrs.push_back(&p);
        rep.rows_retained = collate(ptrs).ids.size();
      } else {
        rep.rows_retained = static_cast<std::size_t>(parts[0].rows());
      }

      if (config.protocol == ProtocolKind::kProcedure1) {
        run_procedure1(config, rep.seed, parts, data, rep);
      } else {
        run_procedure2(config, rep.seed, parts, data, rep);
      }
      report.replications.push_back(std::move(rep));
    }
  } catch (const std::exception& e) {
    report.status = "failed";
    report.error = e.what();
    if (!config.output.empty()) {
      try {
        write_report(report, config.output);
      } catch (...) {
      }
    }
    throw;
  }
  if (!config.output.empty()) write_report(report, config.output);
  return report;
}

}  // namespace assist
