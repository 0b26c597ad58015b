#include <fstream>
#include <set>
#include <sstream>

#include "assist/harness.h"

namespace assist {

namespace {

[[noreturn]] void config_error(const std::string& what) {
  throw Error(ErrorCode::kConfigError, what);
}

// Typed access to one JSON object that rejects keys nobody asked for.
class Section {
 public:
  Section(const Json& json, std::string path) : json_(json), path_(std::move(path)) {
    if (!json_.is_object()) config_error(path_ + " must be an object");
  }

  bool has(const char* key) {
    seen_.insert(key);
    return json_.contains(key) && !json_[key].is_null();
  }

  const Json& raw(const char* key) {
    seen_.insert(key);
    return json_.at(key);
  }

  template <typename T>
  void read(const char* key, T& out) {
    if (!has(key)) return;
    const Json& v = json_[key];
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) config_error(where(key) + " must be true or false");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) config_error(where(key) + " must be an integer");
        if (std::is_unsigned_v<T> && v.get<std::int64_t>() < 0 && !v.is_number_unsigned()) {
          config_error(where(key) + " must be non-negative");
        }
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) config_error(where(key) + " must be a number");
      } else {
        if (!v.is_string()) config_error(where(key) + " must be a string");
      }
      out = v.get<T>();
    } catch (const Json::exception& e) {
      config_error(where(key) + ": " + e.what());
    }
  }

  void finish() const {
    for (auto it = json_.begin(); it != json_.end(); ++it) {
      if (seen_.count(it.key()) == 0) config_error("unknown key " + where(it.key()));
    }
  }

  std::string where(const std::string& key) const {
    return path_.empty() ? "'" + key + "'" : "'" + path_ + "." + key + "'";
  }

 private:
  const Json& json_;
  std::string path_;
  std::set<std::string> seen_;
};

LearnerSpec parse_learner(const Json& v, const std::string& where) {
  if (!v.is_string()) config_error(where + " must be a learner string such as \"gb:stages=100\"");
  try {
    return LearnerSpec::parse(v.get<std::string>());
  } catch (const Error& e) {
    config_error(where + ": " + e.what());
  }
}

std::vector<LearnerSpec> parse_learner_list(const Json& v, const std::string& where) {
  std::vector<LearnerSpec> out;
  if (v.is_string()) {
    out.push_back(parse_learner(v, where));
  } else if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(parse_learner(v[i], where + "[" + std::to_string(i) + "]"));
    }
  } else {
    config_error(where + " must be a learner string or a list of them");
  }
  return out;
}

StackingSpec parse_stacking(const Json& v, const std::string& path) {
  Section s(v, path);
  StackingSpec spec;
  if (!s.has("base") || !s.has("meta")) config_error("'" + path + "' needs base and meta");
  spec.base = parse_learner_list(s.raw("base"), path + ".base");
  spec.meta = parse_learner(s.raw("meta"), path + ".meta");
  s.read("folds", spec.folds);
  s.finish();
  return spec;
}

Json stacking_to_json(const StackingSpec& spec) {
  Json base = Json::array();
  for (const auto& b : spec.base) base.push_back(b.to_string());
  return {{"base", base}, {"meta", spec.meta.to_string()}, {"folds", spec.folds}};
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const Json& json) {
  ExperimentConfig c;
  Section top(json, "");

  if (top.has("data")) {
    Section d(top.raw("data"), "data");
    std::string generator = "friedman1";
    d.read("generator", generator);
    if (generator == "friedman1") {
      c.data.synthetic.kind = GeneratorKind::kFriedman1;
    } else if (generator == "linear") {
      c.data.synthetic.kind = GeneratorKind::kLinear;
    } else {
      config_error("'data.generator' must be friedman1 or linear");
    }
    d.read("n_train", c.data.n_train);
    d.read("n_test", c.data.n_test);
    d.read("noise_sd", c.data.synthetic.noise_sd);
    d.read("noise_features", c.data.synthetic.noise_features);
    d.read("rho", c.data.synthetic.rho);
    d.read("empirical", c.data.synthetic.empirical);
    if (d.has("coefficients")) {
      const Json& v = d.raw("coefficients");
      if (!v.is_array()) config_error("'data.coefficients' must be a number array");
      c.data.synthetic.coefficients.resize(static_cast<Eigen::Index>(v.size()));
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) config_error("'data.coefficients' must be a number array");
        c.data.synthetic.coefficients[static_cast<Eigen::Index>(i)] = v[i].get<double>();
      }
    }
    if (d.has("csv")) {
      std::string path;
      d.read("csv", path);
      c.data.csv_path = path;
    }
    d.read("id_column", c.data.id_column);
    d.read("label_column", c.data.label_column);
    d.read("train_fraction", c.data.train_fraction);
    d.finish();
  }

  if (top.has("groups")) {
    const Json& g = top.raw("groups");
    if (!g.is_array()) config_error("'groups' must be a list of column-name lists");
    for (const Json& group : g) {
      if (!group.is_array()) config_error("'groups' must be a list of column-name lists");
      std::vector<std::string> names;
      for (const Json& name : group) {
        if (!name.is_string()) config_error("'groups' entries must be column names");
        names.push_back(name.get<std::string>());
      }
      c.groups.push_back(std::move(names));
    }
  }
  if (top.has("learners")) c.learners = parse_learner_list(top.raw("learners"), "learners");

  std::string protocol = "procedure1";
  top.read("protocol", protocol);
  if (protocol == "procedure1") {
    c.protocol = ProtocolKind::kProcedure1;
  } else if (protocol == "procedure2") {
    c.protocol = ProtocolKind::kProcedure2;
  } else {
    config_error("'protocol' must be procedure1 or procedure2");
  }
  std::string mode = "sequential";
  top.read("mode", mode);
  if (mode == "sequential") {
    c.mode = ChainMode::kSequential;
  } else if (mode == "pairwise") {
    c.mode = ChainMode::kPairwise;
  } else {
    config_error("'mode' must be sequential or pairwise");
  }
  top.read("max_rounds", c.max_rounds);
  top.read("patience", c.patience);
  top.read("tol_rel", c.tol_rel);
  top.read("validation_fraction", c.validation_fraction);
  top.read("run_to_max", c.run_to_max);
  top.read("replications", c.replications);
  top.read("seed", c.seed);
  std::string transport = "inproc";
  top.read("transport", transport);
  if (transport == "inproc") {
    c.transport = TransportKind::kInProcess;
  } else if (transport == "tcp") {
    c.transport = TransportKind::kTcp;
  } else {
    config_error("'transport' must be inproc or tcp");
  }
  if (top.has("stacking")) c.stacking = parse_stacking(top.raw("stacking"), "stacking");
  top.read("hidden", c.hidden);
  if (top.has("nn")) {
    Section n(top.raw("nn"), "nn");
    n.read("rate", c.nn_opt.rate);
    n.read("batch", c.nn_opt.batch);
    n.read("epochs_per_round", c.nn_opt.epochs_per_round);
    n.finish();
  }
  top.read("output", c.output);
  top.finish();

  if (c.learners.empty()) c.learners.push_back(LearnerSpec::least_squares());
  c.validate();
  return c;
}

Json ExperimentConfig::to_json() const {
  Json d = {{"generator", data.synthetic.kind == GeneratorKind::kFriedman1 ? "friedman1" : "linear"},
            {"n_train", data.n_train},
            {"n_test", data.n_test},
            {"noise_sd", data.synthetic.noise_sd},
            {"noise_features", data.synthetic.noise_features},
            {"rho", data.synthetic.rho},
            {"empirical", data.synthetic.empirical},
            {"coefficients", vector_to_json(data.synthetic.coefficients)},
            {"id_column", data.id_column},
            {"label_column", data.label_column},
            {"train_fraction", data.train_fraction}};
  if (data.csv_path) d["csv"] = *data.csv_path;
  Json learner_names = Json::array();
  for (const auto& l : learners) learner_names.push_back(l.to_string());
  Json j = {{"data", d},
            {"groups", groups},
            {"learners", learner_names},
            {"protocol", protocol == ProtocolKind::kProcedure1 ? "procedure1" : "procedure2"},
            {"mode", mode == ChainMode::kSequential ? "sequential" : "pairwise"},
            {"max_rounds", max_rounds},
            {"patience", patience},
            {"tol_rel", tol_rel},
            {"validation_fraction", validation_fraction},
            {"run_to_max", run_to_max},
            {"replications", replications},
            {"seed", seed},
            {"transport", transport == TransportKind::kInProcess ? "inproc" : "tcp"},
            {"hidden", hidden},
            {"nn",
             {{"rate", nn_opt.rate},
              {"batch", nn_opt.batch},
              {"epochs_per_round", nn_opt.epochs_per_round}}},
            {"output", output}};
  if (stacking) j["stacking"] = stacking_to_json(*stacking);
  return j;
}

void ExperimentConfig::validate() const {
  if (replications < 1) config_error("replications must be >= 1");
  if (max_rounds < 1) config_error("max_rounds must be >= 1");
  if (patience < 1) config_error("patience must be >= 1");
  if (!(tol_rel >= 0.0)) config_error("tol_rel must be >= 0");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    config_error("validation_fraction must lie in [0, 1)");
  }
  const std::size_t modules = std::max<std::size_t>(1, groups.size());
  if (learners.empty()) config_error("at least one learner is needed");
  if (learners.size() != 1 && learners.size() != modules) {
    config_error("give one learner, or one per group (" + std::to_string(modules) + ")");
  }
  if (protocol == ProtocolKind::kProcedure2 && modules > 2) {
    config_error("procedure2 takes one or two groups (Alice, Bob)");
  }
  if (hidden < 1) config_error("hidden must be >= 1");
  if (!(nn_opt.rate > 0.0) || nn_opt.batch < 1 || nn_opt.epochs_per_round < 0) {
    config_error("nn needs rate > 0, batch >= 1, epochs_per_round >= 0");
  }
  if (data.csv_path) {
    if (!(data.train_fraction > 0.0 && data.train_fraction < 1.0)) {
      config_error("data.train_fraction must lie in (0, 1)");
    }
  } else {
    if (data.n_train < 2) config_error("data.n_train must be >= 2");
    if (data.n_test < 1) config_error("data.n_test must be >= 1");
    if (!(data.synthetic.noise_sd >= 0.0)) config_error("data.noise_sd must be >= 0");
    if (data.synthetic.kind == GeneratorKind::kLinear) {
      if (data.synthetic.coefficients.size() < 1) {
        config_error("linear data needs data.coefficients");
      }
      if (!(data.synthetic.rho >= 0.0 && data.synthetic.rho < 1.0)) {
        config_error("data.rho must lie in [0, 1)");
      }
    }
    if (data.synthetic.noise_features < 0) config_error("data.noise_features must be >= 0");
  }
  if (stacking && stacking->folds < 2) config_error("stacking.folds must be >= 2");
  if (stacking && stacking->base.empty()) config_error("stacking.base must not be empty");
}

const LearnerSpec& ExperimentConfig::learner_for(std::size_t module) const {
  return learners.size() == 1 ? learners[0] : learners.at(module);
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open config '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const Json json = Json::parse(buffer.str(), nullptr, false);
  if (json.is_discarded()) config_error("'" + path + "' is not valid JSON");
  return ExperimentConfig::from_json(json);
}

CompareConfig CompareConfig::from_json(const Json& json) {
  Section top(json, "");
  CompareConfig c;
  if (!top.has("experiment") || !top.has("cells")) {
    config_error("compare config needs 'experiment' and 'cells'");
  }
  const Json& exp = top.raw("experiment");
  c.experiment = ExperimentConfig::from_json(exp);
  const Json& cells = top.raw("cells");
  if (!cells.is_array() || cells.empty()) config_error("'cells' must be a non-empty list");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    c.cells.push_back(parse_stacking(cells[i], "cells[" + std::to_string(i) + "]"));
  }
  top.finish();
  return c;
}

}  // namespace assist
