#include "assist/nn_protocol.h"

#include "assist/errors.h"

namespace assist {

Party updater_for_round(int round, bool partner_present) {
  if (!partner_present) return Party::kAlice;
  return round % 2 == 1 ? Party::kAlice : Party::kBob;
}

SplitNetworkState init_split_state(std::uint64_t seed, Eigen::Index p_a, Eigen::Index p_b,
                                   Eigen::Index hidden) {
  if (hidden < 1) throw Error(ErrorCode::kInvalidArgument, "hidden must be >= 1");
  if (p_a < 0 || p_b < 0) throw Error(ErrorCode::kInvalidArgument, "negative feature count");
  const Eigen::Index fan_in = p_a + p_b;
  SplitNetworkState state;
  state.w_a = nn::init_input_block(seed, nn::kOwnerInputStream, p_a, hidden, fan_in);
  state.w_b = nn::init_input_block(seed, nn::kPartnerInputStream, p_b, hidden, fan_in);
  state.shared = nn::init_shared(seed, hidden, fan_in);
  state.partner_present = p_b > 0;
  return state;
}

Envelope PartialPreactivation::to_envelope(MessageKind kind, std::string sender,
                                           std::string receiver) const {
  if (static_cast<Eigen::Index>(ids.size()) != values.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "partial rows != id count");
  }
  Envelope e;
  e.kind = kind;
  e.task_id = task_id;
  e.round = round;
  e.sender = std::move(sender);
  e.receiver = std::move(receiver);
  e.payload = {{"ids", ids_to_json(ids)}, {"matrix", matrix_to_json(values)}};
  return e;
}

PartialPreactivation PartialPreactivation::from_envelope(const Envelope& envelope) {
  const Json& p = envelope.payload;
  if (!p.contains("ids") || !p.contains("matrix")) {
    throw Error(ErrorCode::kMalformedMessage, "partial payload needs ids and matrix");
  }
  PartialPreactivation out;
  out.task_id = envelope.task_id;
  out.round = envelope.round;
  out.ids = ids_from_json(p["ids"]);
  out.values = matrix_from_json(p["matrix"]);
  if (out.values.rows() != static_cast<Eigen::Index>(out.ids.size())) {
    throw Error(ErrorCode::kShapeMismatch, "partial rows != id count");
  }
  return out;
}

Matrix partial_preactivation(const Matrix& x, const Matrix& w) {
  if (x.cols() != w.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "features have " + std::to_string(x.cols()) +
                                               " columns, weights " + std::to_string(w.rows()) +
                                               " rows");
  }
  if (w.rows() == 0) return Matrix::Zero(x.rows(), w.cols());
  return x * w;
}

Vector split_forward(const nn::SharedWeights& shared, const Matrix& own_partial,
                     const Matrix& other_partial) {
  const Eigen::Index h = shared.hidden();
  if (shared.output_weights.size() != h || own_partial.cols() != h ||
      other_partial.cols() != h || own_partial.rows() != other_partial.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "partials disagree with each other or with w~");
  }
  Matrix z = own_partial + other_partial;
  z.rowwise() += shared.hidden_bias.transpose();
  return nn::output_from_preact(shared, z);
}

namespace {

nn::Schedule schedule_of(const NnOptConfig& opt) {
  if (opt.epochs_per_round < 0) {
    throw Error(ErrorCode::kInvalidArgument, "epochs_per_round must be >= 0");
  }
  return {opt.epochs_per_round, opt.batch, opt.rate, opt.seed};
}

}  // namespace

SplitNetworkState alice_update_round(const SplitNetworkState& state, const Matrix& x_a,
                                     const Matrix& bob_partial, const Vector& labels,
                                     const NnOptConfig& opt) {
  if (updater_for_round(state.round, state.partner_present) != Party::kAlice) {
    throw Error(ErrorCode::kInvalidArgument,
                "round " + std::to_string(state.round) + " belongs to Bob");
  }
  if (x_a.cols() != state.w_a.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "Alice's features do not match w_a");
  }
  const Matrix* other = nullptr;
  if (state.partner_present) {
    if (bob_partial.rows() != x_a.rows() || bob_partial.cols() != state.hidden()) {
      throw Error(ErrorCode::kShapeMismatch, "Bob's partial has the wrong shape");
    }
    other = &bob_partial;
  }
  SplitNetworkState next = state;
  nn::train(next.w_a, next.shared, x_a, other, labels, schedule_of(opt), state.alice_epochs);
  next.alice_epochs += opt.epochs_per_round;
  next.round += 1;
  return next;
}

BobUpdate bob_update_round(const Matrix& w_b, const Matrix& x_b, const Matrix& alice_partial,
                           const Vector& labels, const nn::SharedWeights& w_tilde,
                           const NnOptConfig& opt, int round, std::int64_t bob_epochs) {
  if (updater_for_round(round, true) != Party::kBob) {
    throw Error(ErrorCode::kInvalidArgument, "round " + std::to_string(round) + " belongs to Alice");
  }
  if (x_b.cols() != w_b.rows()) throw Error(ErrorCode::kShapeMismatch, "Bob's features do not match w_b");
  if (alice_partial.rows() != x_b.rows() || alice_partial.cols() != w_tilde.hidden()) {
    throw Error(ErrorCode::kShapeMismatch, "Alice's partial has the wrong shape");
  }
  BobUpdate out{w_b, w_tilde, bob_epochs};
  nn::train(out.w_b, out.shared, x_b, &alice_partial, labels, schedule_of(opt), bob_epochs);
  out.bob_epochs += opt.epochs_per_round;
  return out;
}

}  // namespace assist
