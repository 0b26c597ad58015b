#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include "assist/harness.h"

namespace assist {

namespace {

Json metrics_json(const Metrics& m) {
  return {{"train_rmse", m.train_rmse},
          {"test_rmse", m.test_rmse},
          {"train_mad", m.train_mad},
          {"test_mad", m.test_mad}};
}

Json mean_se_json(const std::vector<double>& values) {
  const MeanSe s = mean_se(values);
  return {{"mean", s.mean}, {"se", s.se}, {"n", values.size()}};
}

template <typename Get>
Json summarize(const std::vector<const Metrics*>& list, Get get) {
  std::vector<double> values;
  for (const Metrics* m : list) values.push_back(get(*m));
  return mean_se_json(values);
}

Json summary_of(const std::vector<const Metrics*>& list) {
  return {{"train_rmse", summarize(list, [](const Metrics& m) { return m.train_rmse; })},
          {"test_rmse", summarize(list, [](const Metrics& m) { return m.test_rmse; })},
          {"train_mad", summarize(list, [](const Metrics& m) { return m.train_mad; })},
          {"test_mad", summarize(list, [](const Metrics& m) { return m.test_mad; })}};
}

std::string number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

Json Report::to_json(bool include_timing) const {
  Json reps = Json::array();
  std::size_t max_rounds = 0;
  for (const ReplicationReport& r : replications) {
    Json rounds = Json::array();
    for (const RoundMetrics& m : r.rounds) {
      rounds.push_back({{"round", m.round},
                        {"train_rmse", m.train_rmse},
                        {"train_mad", m.train_mad},
                        {"validation_rmse", m.validation_rmse},
                        {"test_rmse", m.test_rmse},
                        {"test_mad", m.test_mad}});
    }
    max_rounds = std::max(max_rounds, r.rounds.size());
    Json j = {{"replication", r.replication},
              {"seed", r.seed},
              {"rows_retained", r.rows_retained},
              {"stopping_round", r.stopping_round},
              {"stop_fired_at", r.stop_fired_at},
              {"rounds", rounds},
              {"at_stopping_round", metrics_json(r.at_stopping_round)},
              {"oracle", metrics_json(r.oracle)},
              {"solo", metrics_json(r.solo)},
              {"round0", metrics_json(r.round0)}};
    if (r.stacking) j["stacking"] = metrics_json(*r.stacking);
    reps.push_back(std::move(j));
  }

  Json per_round = Json::array();
  for (std::size_t k = 0; k < max_rounds; ++k) {
    std::vector<double> test_rmse, test_mad, train_rmse, train_mad;
    for (const ReplicationReport& r : replications) {
      if (k >= r.rounds.size()) continue;
      test_rmse.push_back(r.rounds[k].test_rmse);
      test_mad.push_back(r.rounds[k].test_mad);
      train_rmse.push_back(r.rounds[k].train_rmse);
      train_mad.push_back(r.rounds[k].train_mad);
    }
    per_round.push_back({{"round", k + 1},
                         {"train_rmse", mean_se_json(train_rmse)},
                         {"train_mad", mean_se_json(train_mad)},
                         {"test_rmse", mean_se_json(test_rmse)},
                         {"test_mad", mean_se_json(test_mad)}});
  }
  std::vector<const Metrics*> at_k, oracle, solo, stacking;
  std::vector<double> k_values;
  for (const ReplicationReport& r : replications) {
    at_k.push_back(&r.at_stopping_round);
    oracle.push_back(&r.oracle);
    solo.push_back(&r.solo);
    if (r.stacking) stacking.push_back(&*r.stacking);
    k_values.push_back(r.stopping_round);
  }
  Json summary = {{"rounds", per_round},
                  {"stopping_round", mean_se_json(k_values)},
                  {"assisted", summary_of(at_k)},
                  {"oracle", summary_of(oracle)},
                  {"solo", summary_of(solo)}};
  if (!stacking.empty()) summary["stacking"] = summary_of(stacking);

  Json out = {{"status", status},
              {"config", config.to_json()},
              {"replications", reps},
              {"summary", summary}};
  if (!error.empty()) out["error"] = error;
  if (include_timing) {
    Json timing = Json::array();
    for (const ReplicationReport& r : replications) {
      timing.push_back({{"replication", r.replication},
                        {"round_wall_ms", r.round_wall_ms},
                        {"predict_latency_ms", r.predict_latency_ms}});
    }
    out["timing"] = timing;
    out["generated_at"] = utc_now();
  }
  return out;
}

std::string Report::per_round_csv() const {
  std::ostringstream out;
  out << "replication,round,method,split,metric,value\n";
  auto row = [&](int rep, int round, const char* method, const char* split, const char* metric,
                 double value) {
    out << rep << ',' << round << ',' << method << ',' << split << ',' << metric << ','
        << number(value) << '\n';
  };
  auto baseline = [&](int rep, const char* method, const Metrics& m) {
    row(rep, 0, method, "train", "rmse", m.train_rmse);
    row(rep, 0, method, "train", "mad", m.train_mad);
    row(rep, 0, method, "test", "rmse", m.test_rmse);
    row(rep, 0, method, "test", "mad", m.test_mad);
  };
  for (const ReplicationReport& r : replications) {
    for (const RoundMetrics& m : r.rounds) {
      row(r.replication, m.round, "assisted", "train", "rmse", m.train_rmse);
      row(r.replication, m.round, "assisted", "train", "mad", m.train_mad);
      row(r.replication, m.round, "assisted", "validation", "rmse", m.validation_rmse);
      row(r.replication, m.round, "assisted", "test", "rmse", m.test_rmse);
      row(r.replication, m.round, "assisted", "test", "mad", m.test_mad);
    }
    baseline(r.replication, "oracle", r.oracle);
    baseline(r.replication, "solo", r.solo);
    if (r.stacking) baseline(r.replication, "stacking", *r.stacking);
  }
  return out.str();
}

void write_report(const Report& report, const std::string& prefix) {
  std::ofstream json(prefix + ".json");
  if (!json) throw Error(ErrorCode::kConfigError, "cannot write '" + prefix + ".json'");
  json << report.to_json(true).dump(2) << '\n';
  std::ofstream csv(prefix + ".csv");
  if (!csv) throw Error(ErrorCode::kConfigError, "cannot write '" + prefix + ".csv'");
  csv << report.per_round_csv();
}

}  // namespace assist
