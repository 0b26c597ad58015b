#include <algorithm>
#include <cmath>

#include "assist/metrics.h"
#include "assist/nn_protocol.h"
#include "assist/protocol.h"
#include "assist/random.h"

namespace assist {

namespace {

Json shared_to_json(const nn::SharedWeights& w) {
  return {{"hidden_bias", vector_to_json(w.hidden_bias)},
          {"output_weights", vector_to_json(w.output_weights)},
          {"output_bias", w.output_bias}};
}

nn::SharedWeights shared_from_json(const Json& p) {
  if (!p.contains("hidden_bias") || !p.contains("output_weights") ||
      !p.contains("output_bias") || !p["output_bias"].is_number()) {
    throw Error(ErrorCode::kMalformedMessage, "w~ payload needs hidden_bias, output_weights, output_bias");
  }
  nn::SharedWeights w;
  w.hidden_bias = vector_from_json(p["hidden_bias"]);
  w.output_weights = vector_from_json(p["output_weights"]);
  w.output_bias = p["output_bias"].get<double>();
  if (w.hidden_bias.size() != w.output_weights.size() || w.hidden_bias.size() < 1) {
    throw Error(ErrorCode::kShapeMismatch, "w~ blocks disagree on the hidden width");
  }
  return w;
}

template <typename T>
T number_field(const Json& p, const char* name) {
  if (!p.contains(name) || !p[name].is_number()) {
    throw Error(ErrorCode::kMalformedMessage, std::string("missing numeric field '") + name + "'");
  }
  return p[name].get<T>();
}

Envelope reply_to(const Envelope& request, MessageKind kind, const std::string& self_id,
                  Json payload) {
  Envelope e;
  e.kind = kind;
  e.task_id = request.task_id;
  e.round = request.round;
  e.sender = self_id;
  e.receiver = request.sender;
  e.payload = std::move(payload);
  return e;
}

}  // namespace

SplitNetworkAssistant::SplitNetworkAssistant(const FeaturePartition& partition)
    : partition_(partition) {}

Matrix SplitNetworkAssistant::partial_for(const Session& session, std::span<const SampleId> ids,
                                          int version) const {
  auto it = session.versions.upper_bound(version);
  if (it == session.versions.begin()) {
    throw Error(ErrorCode::kUnknownRound, "no weights as of round " + std::to_string(version));
  }
  --it;
  for (const SampleId& id : ids) {
    if (!partition_.contains(id)) {
      throw Error(ErrorCode::kMissingTestRows, "no row for id '" + id.value() + "'");
    }
  }
  return partial_preactivation(partition_.rows_for(ids), it->second);
}

Envelope SplitNetworkAssistant::handle(const Envelope& request, const std::string& self_id) {
  std::lock_guard lock(mu_);
  const Json& p = request.payload;

  if (request.kind == MessageKind::kLabelsTransfer) {
    if (sessions_.count(request.task_id) > 0) {
      throw Error(ErrorCode::kStorageConflict, "task '" + request.task_id + "' already started");
    }
    Session s;
    s.label_ids = ids_from_json(p.at("ids"));
    s.labels = vector_from_json(p.at("values"));
    if (s.labels.size() != static_cast<Eigen::Index>(s.label_ids.size())) {
      throw Error(ErrorCode::kMalformedMessage, "label ids and values differ in length");
    }
    for (const SampleId& id : s.label_ids) {
      if (!partition_.contains(id)) {
        throw Error(ErrorCode::kCollationFailure, "no row for id '" + id.value() + "'");
      }
    }
    s.hidden = number_field<Eigen::Index>(p, "hidden");
    s.opt.seed = number_field<std::uint64_t>(p, "seed");
    s.opt.rate = number_field<double>(p, "rate");
    s.opt.batch = number_field<int>(p, "batch");
    s.opt.epochs_per_round = number_field<int>(p, "epochs");
    const auto alice_features = number_field<Eigen::Index>(p, "alice_features");
    if (s.hidden < 1 || alice_features < 0) {
      throw Error(ErrorCode::kInvalidArgument, "bad network shape");
    }
    const Eigen::Index p_b = partition_.cols();
    s.versions[0] = nn::init_input_block(s.opt.seed, nn::kPartnerInputStream, p_b, s.hidden,
                                         alice_features + p_b);
    sessions_.emplace(request.task_id, std::move(s));
    return reply_to(request, MessageKind::kLabelsTransfer, self_id, {{"features", p_b}});
  }

  auto found = sessions_.find(request.task_id);
  if (found == sessions_.end()) {
    throw Error(ErrorCode::kInvalidArgument, "no network session for task '" + request.task_id + "'");
  }
  Session& s = found->second;

  switch (request.kind) {
    case MessageKind::kPartialPreact: {
      if (p.contains("matrix")) {
        // Alice's partial for the coming Bob round.
        PartialPreactivation partial = PartialPreactivation::from_envelope(request);
        if (partial.values.cols() != s.hidden) {
          throw Error(ErrorCode::kShapeMismatch, "Alice's partial has the wrong width");
        }
        s.partial_round = request.round;
        s.partial_ids = std::move(partial.ids);
        s.alice_partial = std::move(partial.values);
        return reply_to(request, MessageKind::kPartialPreact, self_id,
                        {{"ids", Json::array()}, {"matrix", Json::array()}});
      }
      const IdList ids = ids_from_json(p.at("ids"));
      PartialPreactivation out{request.task_id, request.round, ids,
                               partial_for(s, ids, request.round)};
      return out.to_envelope(MessageKind::kPartialPreact, self_id, request.sender);
    }
    case MessageKind::kWtildeTransfer: {
      const int round = request.round;
      if (s.partial_round != round || s.partial_ids != s.label_ids) {
        throw Error(ErrorCode::kInvalidArgument,
                    "no partial from Alice for round " + std::to_string(round));
      }
      if (!s.versions.empty() && s.versions.rbegin()->first >= round) {
        throw Error(ErrorCode::kStorageConflict, "round " + std::to_string(round) + " already run");
      }
      const nn::SharedWeights w_tilde = shared_from_json(p);
      if (w_tilde.hidden() != s.hidden) throw Error(ErrorCode::kShapeMismatch, "w~ width");
      const BobUpdate update =
          bob_update_round(s.versions.rbegin()->second, partition_.rows_for(s.label_ids),
                           s.alice_partial, s.labels, w_tilde, s.opt, round, s.epochs);
      s.versions[round] = update.w_b;
      s.epochs = update.bob_epochs;
      s.partial_round = -1;
      s.alice_partial.resize(0, 0);
      return reply_to(request, MessageKind::kWtildeTransfer, self_id,
                      shared_to_json(update.shared));
    }
    case MessageKind::kNnPredictRequest: {
      const IdList ids = ids_from_json(p.at("ids"));
      PartialPreactivation out{request.task_id, request.round, ids,
                               partial_for(s, ids, request.round)};
      return out.to_envelope(MessageKind::kNnPredictResponse, self_id, request.sender);
    }
    default:
      throw Error(ErrorCode::kMalformedMessage,
                  "not a split-network message: " + std::string(message_kind_name(request.kind)));
  }
}

Matrix SplitNetworkAssistant::weights_at(const std::string& task_id, int round) const {
  std::lock_guard lock(mu_);
  auto found = sessions_.find(task_id);
  if (found == sessions_.end()) throw Error(ErrorCode::kInvalidArgument, "unknown task");
  auto it = found->second.versions.upper_bound(round);
  if (it == found->second.versions.begin()) throw Error(ErrorCode::kUnknownRound, "no weights");
  return std::prev(it)->second;
}

std::vector<int> SplitNetworkAssistant::weight_versions(const std::string& task_id) const {
  std::lock_guard lock(mu_);
  std::vector<int> out;
  auto found = sessions_.find(task_id);
  if (found == sessions_.end()) return out;
  for (const auto& [round, w] : found->second.versions) out.push_back(round);
  return out;
}

namespace {

// Alice's side of the wire.
class BobLink {
 public:
  BobLink(const Endpoint& bob, std::string task, std::string alice_id)
      : bob_(bob), task_(std::move(task)), alice_id_(std::move(alice_id)) {}

  Envelope make(MessageKind kind, int round, Json payload) const {
    Envelope e;
    e.kind = kind;
    e.task_id = task_;
    e.round = round;
    e.sender = alice_id_;
    e.receiver = bob_.module_id;
    e.payload = std::move(payload);
    return e;
  }

  Envelope call(const Envelope& e, MessageKind expected) const {
    return expect_reply(request(bob_, e), expected);
  }

  Matrix partial(MessageKind kind, std::span<const SampleId> ids, int version,
                 Eigen::Index hidden) const {
    const MessageKind reply_kind =
        kind == MessageKind::kNnPredictRequest ? MessageKind::kNnPredictResponse : kind;
    const Envelope reply = call(make(kind, version, {{"ids", ids_to_json(ids)}}), reply_kind);
    PartialPreactivation partial = PartialPreactivation::from_envelope(reply);
    if (partial.ids.size() != ids.size() ||
        !std::equal(partial.ids.begin(), partial.ids.end(), ids.begin()) ||
        partial.values.cols() != hidden) {
      throw Error(ErrorCode::kShapeMismatch, "Bob's partial does not match the request");
    }
    return std::move(partial.values);
  }

 private:
  const Endpoint& bob_;
  std::string task_;
  std::string alice_id_;
};

Vector evaluate(const SplitNetworkState& state, const Matrix& own, const Matrix* other) {
  return other != nullptr ? split_forward(state.shared, own, *other)
                          : split_forward(state.shared, own, Matrix::Zero(own.rows(), own.cols()));
}

}  // namespace

NnResult run_nn_learning(const FeaturePartition& alice, const Endpoint& bob,
                         const TaskLabels& labels, const NnConfig& config) {
  if (config.max_rounds < 1) throw Error(ErrorCode::kInvalidArgument, "max_rounds must be >= 1");
  if (!(config.validation_fraction >= 0.0 && config.validation_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "validation_fraction must lie in [0, 1)");
  }
  NnResult result;
  const IdList* lists[] = {&alice.ids(), &labels.ids()};
  IdList ids = intersect_ids(lists);
  if (ids.empty()) throw Error(ErrorCode::kCollationFailure, "Alice's rows carry no labels");
  const auto holdout = static_cast<std::size_t>(
      std::floor(config.validation_fraction * static_cast<double>(ids.size())));
  if (config.validation_fraction > 0.0 && holdout >= 1 && holdout < ids.size()) {
    SplitSpec spec;
    spec.seed = derive_seed(config.opt.seed, "validation");
    spec.train_count = ids.size() - holdout;
    TrainTestIds parts = split(ids, spec);
    result.fit_ids = std::move(parts.train);
    result.validation_ids = std::move(parts.test);
  } else {
    result.fit_ids = std::move(ids);
  }
  const bool holdout_used = !result.validation_ids.empty();

  const Matrix x_fit = alice.rows_for(result.fit_ids);
  const Vector y_fit = labels.values_for(result.fit_ids);
  const Matrix x_val = holdout_used ? alice.rows_for(result.validation_ids) : Matrix();
  const Vector y_val = holdout_used ? labels.values_for(result.validation_ids) : Vector();

  const std::string alice_id = "alice";
  BobLink link(bob, config.task_id, alice_id);
  const Envelope hello =
      link.call(link.make(MessageKind::kLabelsTransfer, 0,
                          {{"ids", ids_to_json(result.fit_ids)},
                           {"values", vector_to_json(y_fit)},
                           {"hidden", config.hidden},
                           {"seed", config.opt.seed},
                           {"rate", config.opt.rate},
                           {"batch", config.opt.batch},
                           {"epochs", config.opt.epochs_per_round},
                           {"alice_features", alice.cols()}}),
                MessageKind::kLabelsTransfer);
  const auto p_b = number_field<Eigen::Index>(hello.payload, "features");

  SplitNetworkState state = init_split_state(config.opt.seed, alice.cols(), p_b, config.hidden);
  state.w_b.resize(0, 0);  // Bob's weights never leave Bob
  const Eigen::Index h = config.hidden;

  // Bob's partial on the fit rows, refreshed whenever his weights change.
  Matrix bob_fit;
  int bob_fit_version = -1;
  auto bob_fit_at = [&](int version) -> const Matrix& {
    if (bob_fit_version != version) {
      bob_fit = link.partial(MessageKind::kPartialPreact, result.fit_ids, version, h);
      bob_fit_version = version;
    }
    return bob_fit;
  };

  for (int k = 1; k <= config.max_rounds; ++k) {
    if (updater_for_round(k, state.partner_present) == Party::kAlice) {
      const Matrix empty;
      state = alice_update_round(state, x_fit,
                                 state.partner_present ? bob_fit_at(k - 1) : empty, y_fit,
                                 config.opt);
    } else {
      PartialPreactivation mine{config.task_id, k, result.fit_ids,
                                partial_preactivation(x_fit, state.w_a)};
      link.call(mine.to_envelope(MessageKind::kPartialPreact, alice_id, bob.module_id),
                MessageKind::kPartialPreact);
      const Envelope reply = link.call(
          link.make(MessageKind::kWtildeTransfer, k, shared_to_json(state.shared)),
          MessageKind::kWtildeTransfer);
      state.shared = shared_from_json(reply.payload);
      if (state.shared.hidden() != h) throw Error(ErrorCode::kShapeMismatch, "w~ width");
      state.bob_epochs += config.opt.epochs_per_round;
      state.round += 1;
    }

    const Matrix own_fit = partial_preactivation(x_fit, state.w_a);
    const Vector fit_pred =
        evaluate(state, own_fit, state.partner_present ? &bob_fit_at(k) : nullptr);
    result.train_history.push_back(rmse(y_fit, fit_pred));
    if (holdout_used) {
      const Matrix own_val = partial_preactivation(x_val, state.w_a);
      Matrix bob_val;
      if (state.partner_present) {
        bob_val = link.partial(MessageKind::kPartialPreact, result.validation_ids, k, h);
      }
      result.validation_history.push_back(
          rmse(y_val, evaluate(state, own_val, state.partner_present ? &bob_val : nullptr)));
    } else {
      result.validation_history.push_back(result.train_history.back());
    }
    result.states.push_back(state);

    if (result.stop_fired_at == 0 &&
        stop_check(result.validation_history, config.patience, config.tol_rel) ==
            StopDecision::kStop) {
      result.stop_fired_at = k;
      if (!config.run_to_max) break;
    }
  }

  const std::size_t limit = result.stop_fired_at > 0
                                ? static_cast<std::size_t>(result.stop_fired_at)
                                : result.validation_history.size();
  const double best = *std::min_element(
      result.validation_history.begin(),
      result.validation_history.begin() + static_cast<std::ptrdiff_t>(limit));
  for (std::size_t i = 0; i < limit; ++i) {
    if (result.validation_history[i] <= best + config.tol_rel * std::abs(best)) {
      result.stopping_round = static_cast<int>(i) + 1;
      break;
    }
  }
  result.state = result.states[static_cast<std::size_t>(result.stopping_round - 1)];
  result.final_state = result.states.back();
  return result;
}

Vector nn_predict(const SplitNetworkState& state, const FeaturePartition& alice,
                  const Endpoint& bob, const std::string& task_id, std::span<const SampleId> ids) {
  for (const SampleId& id : ids) {
    if (!alice.contains(id)) {
      throw Error(ErrorCode::kMissingTestRows, "Alice holds no row for id '" + id.value() + "'");
    }
  }
  const Matrix own = partial_preactivation(alice.rows_for(ids), state.w_a);
  if (!state.partner_present) return evaluate(state, own, nullptr);
  BobLink link(bob, task_id, "alice");
  const Matrix other =
      link.partial(MessageKind::kNnPredictRequest, ids, state.round - 1, state.hidden());
  return split_forward(state.shared, own, other);
}

}  // namespace assist
