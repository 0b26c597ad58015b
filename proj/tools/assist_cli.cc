// Command-line front end: run experiments, serve a module over TCP, and
// generate synthetic data.

#include <spdlog/spdlog.h>

#include <csignal>
#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "assist/data.h"
#include "assist/harness.h"
#include "assist/service.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitTransport = 3;

void configure_logging() {
  spdlog::set_level(spdlog::level::warn);
  if (const char* level = std::getenv("ASSIST_LOG")) {
    spdlog::set_level(spdlog::level::from_str(level));
  }
}

int exit_code_for(assist::ErrorCode code) {
  if (code == assist::ErrorCode::kConfigError || code == assist::ErrorCode::kInvalidArgument ||
      code == assist::ErrorCode::kUnknownColumn || code == assist::ErrorCode::kMissingColumn ||
      code == assist::ErrorCode::kOverlappingGroups || code == assist::ErrorCode::kNonNumericCell) {
    return kExitConfig;
  }
  return assist::is_transport_error(code) ? kExitTransport : kExitFailure;
}

void print_summary(const assist::Report& report) {
  const assist::Json summary = report.to_json(false)["summary"];
  auto line = [&](const char* name) {
    if (!summary.contains(name)) return;
    const auto& s = summary[name]["test_rmse"];
    std::cout << "  " << name << ": test RMSE " << s["mean"].get<double>() << " (se "
              << s["se"].get<double>() << ")\n";
  };
  std::cout << report.replications.size() << " replication(s), stopping round "
            << summary["stopping_round"]["mean"].get<double>() << " on average\n";
  line("assisted");
  line("oracle");
  line("solo");
  line("stacking");
}

int cmd_run(const std::string& config_path, const std::string& output) {
  assist::ExperimentConfig config = assist::load_experiment_config(config_path);
  if (!output.empty()) config.output = output;
  spdlog::info("running {} replication(s), {} round(s) max", config.replications,
               config.max_rounds);
  const assist::Report report = assist::run_experiment(config);
  print_summary(report);
  if (!config.output.empty()) {
    spdlog::info("wrote {}.json and {}.csv", config.output, config.output);
  }
  return kExitOk;
}

int cmd_compare(const std::string& config_path, const std::string& output) {
  std::ifstream in(config_path);
  if (!in) throw assist::Error(assist::ErrorCode::kConfigError, "cannot open '" + config_path + "'");
  const assist::Json json = assist::Json::parse(in, nullptr, false);
  if (json.is_discarded()) {
    throw assist::Error(assist::ErrorCode::kConfigError, "'" + config_path + "' is not valid JSON");
  }
  const auto cells = assist::compare_stacking(assist::CompareConfig::from_json(json));
  std::cout << assist::stacking_table_text(cells);
  if (!output.empty()) {
    std::ofstream out(output);
    if (!out) throw assist::Error(assist::ErrorCode::kConfigError, "cannot write '" + output + "'");
    out << assist::stacking_table_json(cells).dump(2) << '\n';
  }
  return kExitOk;
}

int cmd_serve(const std::string& partition_path, const std::string& learner,
              const std::string& listen, const std::string& id, const std::string& id_column) {
  const auto [host, port] = assist::parse_host_port(listen);
  assist::CsvTable table = assist::load_csv(partition_path, id_column);
  auto module = std::make_shared<assist::LocalModule>(id, std::move(table.features),
                                                      assist::LearnerSpec::parse(learner));

  // Block the stop signals before any thread starts so sigwait sees them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  auto server = assist::serve_module(module, host, port);
  std::cout << "serving module '" << id << "' (" << module->partition().rows() << " rows, "
            << module->partition().cols() << " columns, " << module->learner().to_string()
            << ") on " << host << ":" << server->port() << std::endl;
  int received = 0;
  sigwait(&signals, &received);
  spdlog::info("signal {}; shutting down", received);
  server->stop();
  return kExitOk;
}

int cmd_gen(const std::string& kind, long long n, std::uint64_t seed, const std::string& out,
            double noise_sd, const std::vector<double>& coefficients, double rho,
            int noise_features) {
  assist::SyntheticSpec spec;
  if (kind == "friedman1") {
    spec.kind = assist::GeneratorKind::kFriedman1;
  } else if (kind == "linear") {
    spec.kind = assist::GeneratorKind::kLinear;
    spec.coefficients = Eigen::Map<const assist::Vector>(
        coefficients.data(), static_cast<Eigen::Index>(coefficients.size()));
  } else {
    throw assist::Error(assist::ErrorCode::kConfigError, "--kind must be friedman1 or linear");
  }
  spec.n = n;
  spec.seed = seed;
  spec.noise_sd = noise_sd;
  spec.rho = rho;
  spec.noise_features = noise_features;
  const assist::Dataset data = assist::generate(spec);
  assist::write_csv(out, data.features, &data.labels);
  spdlog::info("wrote {} rows to {}", n, out);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Assisted learning protocol engine and simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output;
  auto* run = app.add_subcommand("run", "Run an experiment from a JSON config");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--output", output, "Report path prefix (overrides the config)");

  std::string compare_out;
  auto* compare = app.add_subcommand("compare-stacking", "Stacking versus assisted learning grid");
  compare->add_option("--config", config_path, "Compare config (JSON)")->required();
  compare->add_option("--output", compare_out, "Write the table as JSON");

  std::string partition;
  std::string learner = "least_squares";
  std::string listen;
  std::string module_id = "assistant";
  std::string id_column = "id";
  auto* serve = app.add_subcommand("serve", "Serve one module over TCP");
  serve->add_option("--partition", partition, "CSV with the module's columns")->required();
  serve->add_option("--learner", learner, "Learner spec, e.g. gb:stages=100,depth=3");
  serve->add_option("--listen", listen, "host:port (port 0 picks one)")->required();
  serve->add_option("--id", module_id, "Module id");
  serve->add_option("--id-column", id_column, "Name of the id column");

  std::string kind = "friedman1";
  long long n = 1000;
  std::uint64_t seed = 0;
  std::string gen_out;
  double noise_sd = 1.0;
  std::vector<double> coefficients;
  double rho = 0.0;
  int noise_features = 0;
  auto* gen = app.add_subcommand("gen", "Write a synthetic dataset as CSV");
  gen->add_option("--kind", kind, "friedman1 or linear");
  gen->add_option("--n", n, "Row count")->check(CLI::PositiveNumber);
  gen->add_option("--seed", seed, "Seed");
  gen->add_option("--out", gen_out, "Output CSV")->required();
  gen->add_option("--noise-sd", noise_sd, "Noise standard deviation");
  gen->add_option("--coefficients", coefficients, "Linear coefficients")->delimiter(',');
  gen->add_option("--rho", rho, "Equicorrelation between columns (linear)");
  gen->add_option("--noise-features", noise_features, "Extra unused columns (friedman1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(config_path, output);
    if (*compare) return cmd_compare(config_path, compare_out);
    if (*serve) return cmd_serve(partition, learner, listen, module_id, id_column);
    if (*gen) {
      return cmd_gen(kind, n, seed, gen_out, noise_sd, coefficients, rho, noise_features);
    }
  } catch (const assist::Error& e) {
    std::cerr << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}
