#include <algorithm>
#include <chrono>
#include <cmath>

#include "assist/metrics.h"
#include "assist/protocol.h"
#include "assist/random.h"

namespace assist {

namespace {

double root_mean_square(const Vector& v) {
  return v.size() == 0 ? 0.0 : std::sqrt(v.squaredNorm() / static_cast<double>(v.size()));
}

const Endpoint& endpoint_for(const std::vector<Endpoint>& assistants, const std::string& id) {
  for (const Endpoint& e : assistants) {
    if (e.module_id == id) return e;
  }
  throw Error(ErrorCode::kInvalidArgument, "no endpoint for module '" + id + "'");
}

Vector remote_predict(const Endpoint& endpoint, const std::string& task_id,
                      const std::string& alice_id, std::span<const SampleId> ids,
                      const std::vector<int>& rounds) {
  Envelope req;
  req.kind = MessageKind::kPredictRequest;
  req.task_id = task_id;
  req.round = rounds.empty() ? 0 : rounds.back();
  req.sender = alice_id;
  req.receiver = endpoint.module_id;
  req.payload = {{"ids", ids_to_json(ids)}, {"rounds", rounds}};
  const Envelope response = request(endpoint, req);
  const Envelope& reply = expect_reply(response, MessageKind::kPredictResponse);
  if (!reply.payload.contains("values")) {
    throw Error(ErrorCode::kMalformedMessage, "PREDICT_RESPONSE without values");
  }
  Vector values = vector_from_json(reply.payload["values"]);
  if (values.size() != static_cast<Eigen::Index>(ids.size())) {
    throw Error(ErrorCode::kMalformedMessage, "PREDICT_RESPONSE has the wrong length");
  }
  return values;
}

void check_round(const TrainedTask& task, int round) {
  if (round < 1 || round > static_cast<int>(task.rounds.size())) {
    throw Error(ErrorCode::kUnknownRound, "task '" + task.task_id + "' has no round " +
                                              std::to_string(round));
  }
}

// One FIT half-step through an assistant. Returns nullopt on refusal.
std::optional<Vector> remote_fit(const Endpoint& endpoint, const ResidualMessage& msg) {
  try {
    const Envelope e = request(endpoint, msg.to_envelope(MessageKind::kFitRequest));
    const ResidualMessage reply =
        ResidualMessage::from_envelope(expect_reply(e, MessageKind::kFitResponse));
    if (reply.ids != msg.ids) {
      throw Error(ErrorCode::kMalformedMessage, "FIT_RESPONSE ids differ from the request");
    }
    return reply.values;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kAssistantRefused) return std::nullopt;
    if (e.code() == ErrorCode::kMissingId) {
      throw Error(ErrorCode::kCollationFailure,
                  "module '" + endpoint.module_id + "' lacks task rows: " + e.what());
    }
    throw;
  }
}

}  // namespace

std::string TrainedTask::chain_task_id(int chain) const {
  if (mode == ChainMode::kSequential) return task_id;
  return task_id + "/" + std::to_string(chain);
}

int TrainedTask::chain_count() const {
  if (mode == ChainMode::kSequential) return 1;
  return std::max<int>(1, static_cast<int>(chain.size()));
}

const Vector& TrainedTask::final_residual() const {
  check_round(*this, stopping_round);
  return rounds[static_cast<std::size_t>(stopping_round - 1)].residual;
}

TrainedTask run_learning_stage(LocalModule& alice, const std::vector<Endpoint>& assistants,
                               const TaskLabels& labels, const ProtocolConfig& config) {
  if (config.max_rounds < 1) throw Error(ErrorCode::kInvalidArgument, "max_rounds must be >= 1");
  if (!(config.validation_fraction >= 0.0 && config.validation_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "validation_fraction must lie in [0, 1)");
  }

  TrainedTask task;
  task.task_id = config.task_id;
  task.mode = config.mode;
  task.alice_id = alice.id();
  for (const Endpoint& e : assistants) task.chain.push_back(e.module_id);

  const IdList* lists[] = {&alice.partition().ids(), &labels.ids()};
  IdList ids = intersect_ids(lists);
  if (ids.empty()) throw Error(ErrorCode::kCollationFailure, "Alice's rows carry no labels");

  const auto holdout = static_cast<std::size_t>(
      std::floor(config.validation_fraction * static_cast<double>(ids.size())));
  if (config.validation_fraction > 0.0 && holdout >= 1 && holdout < ids.size()) {
    SplitSpec spec;
    spec.seed = derive_seed(config.seed, "validation");
    spec.train_count = ids.size() - holdout;
    TrainTestIds parts = split(ids, spec);
    task.fit_ids = std::move(parts.train);
    task.validation_ids = std::move(parts.test);
  } else {
    task.fit_ids = std::move(ids);
  }
  const bool holdout_used = !task.validation_ids.empty();

  const Vector y_fit = labels.values_for(task.fit_ids);
  const Vector y_val = holdout_used ? labels.values_for(task.validation_ids) : Vector();
  Vector val_pred = Vector::Zero(y_val.size());

  const int chains = task.chain_count();
  // Per chain: residual and the assistants still taking part.
  std::vector<Vector> residual(static_cast<std::size_t>(chains), y_fit);
  std::vector<std::vector<const Endpoint*>> members(static_cast<std::size_t>(chains));
  if (config.mode == ChainMode::kSequential) {
    for (const Endpoint& e : assistants) members[0].push_back(&e);
  } else {
    for (std::size_t j = 0; j < assistants.size(); ++j) members[j].push_back(&assistants[j]);
  }

  for (int k = 1; k <= config.max_rounds; ++k) {
    const auto started = std::chrono::steady_clock::now();
    RoundRecord record;
    record.round = k;
    record.contributors.resize(static_cast<std::size_t>(chains));
    for (int c = 0; c < chains; ++c) {
      auto& e = residual[static_cast<std::size_t>(c)];
      auto& contributors = record.contributors[static_cast<std::size_t>(c)];
      ResidualMessage msg;
      msg.task_id = task.chain_task_id(c);
      msg.round = k;
      msg.sender = alice.id();
      msg.receiver = alice.id();
      msg.ids = task.fit_ids;
      msg.values = e;
      e = assist_fit(alice, msg).values;
      contributors.push_back(alice.id());
      record.steps.push_back({alice.id(), c, root_mean_square(e)});

      auto& active = members[static_cast<std::size_t>(c)];
      for (auto it = active.begin(); it != active.end();) {
        const Endpoint& endpoint = **it;
        msg.receiver = endpoint.module_id;
        msg.values = e;
        std::optional<Vector> next = remote_fit(endpoint, msg);
        if (!next) {
          task.events.push_back({k, endpoint.module_id, "refused; dropped from the chain"});
          it = active.erase(it);
          continue;
        }
        e = std::move(*next);
        contributors.push_back(endpoint.module_id);
        record.steps.push_back({endpoint.module_id, c, root_mean_square(e)});
        ++it;
      }
    }

    if (chains == 1) {
      record.residual = residual[0];
    } else {
      record.residual = Vector::Zero(y_fit.size());
      for (const Vector& e : residual) record.residual += e;
      record.residual /= static_cast<double>(chains);
    }
    record.train_rmse = root_mean_square(record.residual);
    record.wall_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - started)
                         .count();
    task.rounds.push_back(std::move(record));

    if (holdout_used) {
      val_pred += predict_round(task, alice, assistants, task.validation_ids, k);
      task.rounds.back().validation_rmse = rmse(y_val, val_pred);
    } else {
      task.rounds.back().validation_rmse = task.rounds.back().train_rmse;
    }
    task.validation_history.push_back(task.rounds.back().validation_rmse);

    if (task.stop_fired_at == 0 &&
        stop_check(task.validation_history, config.patience, config.tol_rel) ==
            StopDecision::kStop) {
      task.stop_fired_at = k;
      if (!config.run_to_max) break;
    }
  }

  // K: the earliest round whose holdout error is within the stopping tolerance
  // of the best one seen up to the point the rule fired.
  const std::size_t limit = task.stop_fired_at > 0 ? static_cast<std::size_t>(task.stop_fired_at)
                                                   : task.validation_history.size();
  const double best =
      *std::min_element(task.validation_history.begin(),
                        task.validation_history.begin() + static_cast<std::ptrdiff_t>(limit));
  for (std::size_t i = 0; i < limit; ++i) {
    if (task.validation_history[i] <= best + config.tol_rel * std::abs(best)) {
      task.stopping_round = static_cast<int>(i) + 1;
      break;
    }
  }
  return task;
}

Vector predict_round(const TrainedTask& task, const LocalModule& alice,
                     const std::vector<Endpoint>& assistants, std::span<const SampleId> ids,
                     int round) {
  check_round(task, round);
  const auto& record = task.rounds[static_cast<std::size_t>(round - 1)];
  const int rounds[] = {round};
  Vector total = Vector::Zero(static_cast<Eigen::Index>(ids.size()));
  for (int c = 0; c < task.chain_count(); ++c) {
    for (const std::string& id : record.contributors[static_cast<std::size_t>(c)]) {
      if (id == task.alice_id) {
        total += assist_predict(alice, task.chain_task_id(c), ids, rounds);
      } else {
        total += remote_predict(endpoint_for(assistants, id), task.chain_task_id(c), alice.id(),
                                ids, {round});
      }
    }
  }
  if (task.chain_count() > 1) total /= static_cast<double>(task.chain_count());
  return total;
}

Vector predict_stage(const TrainedTask& task, const LocalModule& alice,
                     const std::vector<Endpoint>& assistants, std::span<const SampleId> ids,
                     std::optional<int> up_to_round) {
  const int up_to = up_to_round.value_or(task.stopping_round);
  check_round(task, up_to);
  Vector total = Vector::Zero(static_cast<Eigen::Index>(ids.size()));
  for (int c = 0; c < task.chain_count(); ++c) {
    // Rounds each module contributed to, in first-appearance order.
    std::vector<std::pair<std::string, std::vector<int>>> plan;
    for (int k = 1; k <= up_to; ++k) {
      for (const std::string& id : task.rounds[static_cast<std::size_t>(k - 1)]
                                       .contributors[static_cast<std::size_t>(c)]) {
        auto it = std::find_if(plan.begin(), plan.end(),
                               [&](const auto& entry) { return entry.first == id; });
        if (it == plan.end()) {
          plan.push_back({id, {k}});
        } else {
          it->second.push_back(k);
        }
      }
    }
    for (const auto& [id, rounds] : plan) {
      if (id == task.alice_id) {
        total += assist_predict(alice, task.chain_task_id(c), ids, rounds);
      } else {
        total += remote_predict(endpoint_for(assistants, id), task.chain_task_id(c), alice.id(),
                                ids, rounds);
      }
    }
  }
  if (task.chain_count() > 1) total /= static_cast<double>(task.chain_count());
  return total;
}

Vector predict_solo(const TrainedTask& task, const LocalModule& alice,
                    std::span<const SampleId> ids) {
  check_round(task, 1);
  const int rounds[] = {1};
  return assist_predict(alice, task.chain_task_id(0), ids, rounds);
}

}  // namespace assist
