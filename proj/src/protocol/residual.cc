#include <algorithm>
#include <cmath>

#include "assist/protocol.h"

namespace assist {

Envelope ResidualMessage::to_envelope(MessageKind kind) const {
  if (static_cast<Eigen::Index>(ids.size()) != values.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "residual ids and values differ in length");
  }
  Envelope e;
  e.kind = kind;
  e.task_id = task_id;
  e.round = round;
  e.sender = sender;
  e.receiver = receiver;
  e.payload = {{"ids", ids_to_json(ids)}, {"values", vector_to_json(values)}};
  return e;
}

ResidualMessage ResidualMessage::from_envelope(const Envelope& envelope) {
  const Json& p = envelope.payload;
  if (!p.contains("ids") || !p.contains("values")) {
    throw Error(ErrorCode::kMalformedMessage, "residual payload needs ids and values");
  }
  ResidualMessage msg;
  msg.task_id = envelope.task_id;
  msg.round = envelope.round;
  msg.sender = envelope.sender;
  msg.receiver = envelope.receiver;
  msg.ids = ids_from_json(p["ids"]);
  msg.values = vector_from_json(p["values"]);
  if (static_cast<Eigen::Index>(msg.ids.size()) != msg.values.size()) {
    throw Error(ErrorCode::kMalformedMessage, "residual ids and values differ in length");
  }
  if (!msg.values.allFinite()) throw Error(ErrorCode::kNonFinitePayload, "non-finite residual");
  return msg;
}

ResidualMessage assist_fit(LocalModule& module, const ResidualMessage& msg) {
  if (msg.round < 1) throw Error(ErrorCode::kInvalidArgument, "rounds start at 1");
  if (module.find(msg.task_id, msg.round) != nullptr) {
    throw Error(ErrorCode::kStorageConflict, "model for task '" + msg.task_id + "' round " +
                                                 std::to_string(msg.round) + " already stored");
  }
  const Matrix x = module.partition().rows_for(msg.ids);
  FittedModel model = fit(module.learner(), x, msg.values);
  const Vector fitted = predict(model, x);
  module.store(msg.task_id, msg.round, std::move(model));

  ResidualMessage reply;
  reply.task_id = msg.task_id;
  reply.round = msg.round;
  reply.sender = module.id();
  reply.receiver = msg.sender;
  reply.ids = msg.ids;
  reply.values = msg.values - fitted;
  return reply;
}

Vector assist_predict(const LocalModule& module, const std::string& task_id,
                      std::span<const SampleId> ids, std::span<const int> rounds) {
  std::vector<const FittedModel*> models;
  models.reserve(rounds.size());
  for (int r : rounds) {
    const FittedModel* m = module.find(task_id, r);
    if (m == nullptr) {
      throw Error(ErrorCode::kUnknownRound, "module '" + module.id() + "' has no model for task '" +
                                                task_id + "' round " + std::to_string(r));
    }
    models.push_back(m);
  }
  for (const SampleId& id : ids) {
    if (!module.partition().contains(id)) {
      throw Error(ErrorCode::kMissingTestRows,
                  "module '" + module.id() + "' holds no row for id '" + id.value() + "'");
    }
  }
  const Matrix x = module.partition().rows_for(ids);
  Vector out = Vector::Zero(static_cast<Eigen::Index>(ids.size()));
  for (const FittedModel* m : models) out += predict(*m, x);
  return out;
}

StopDecision stop_check(std::span<const double> history, int patience, double tol_rel) {
  if (patience < 1) throw Error(ErrorCode::kInvalidArgument, "patience must be >= 1");
  if (history.size() <= static_cast<std::size_t>(patience)) return StopDecision::kContinue;
  const std::size_t tail = history.size() - static_cast<std::size_t>(patience);
  double best = *std::min_element(history.begin(), history.begin() + static_cast<std::ptrdiff_t>(tail));
  for (std::size_t i = tail; i < history.size(); ++i) {
    if (history[i] < best - tol_rel * std::abs(best)) return StopDecision::kContinue;
    best = std::min(best, history[i]);
  }
  return StopDecision::kStop;
}

}  // namespace assist
