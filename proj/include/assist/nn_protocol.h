#ifndef ASSIST_NN_PROTOCOL_H_
#define ASSIST_NN_PROTOCOL_H_

#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "assist/core.h"
#include "assist/nn_math.h"
#include "assist/transport.h"

// Two-party split network. Alice owns the input weights over her columns,
// Bob owns those over his, and the shared block (hidden bias, output layer)
// moves to whichever party updates in the current round.
namespace assist {

enum class Party { kAlice, kBob };

// Odd rounds belong to Alice, even rounds to Bob. Without a partner every
// round is Alice's.
Party updater_for_round(int round, bool partner_present = true);

struct SplitNetworkState {
  Matrix w_a;  // p_a x h
  Matrix w_b;  // p_b x h; empty in Alice's view of a remote run
  nn::SharedWeights shared;
  int round = 1;  // next round to run; round - 1 rounds are complete
  std::int64_t alice_epochs = 0;
  std::int64_t bob_epochs = 0;
  bool partner_present = true;

  Eigen::Index hidden() const { return shared.hidden(); }
};

// Deterministic initialisation from the task seed. Each block comes from its
// own stream, so every party can draw its part locally.
SplitNetworkState init_split_state(std::uint64_t seed, Eigen::Index p_a,
                                   Eigen::Index p_b, Eigen::Index hidden);

// One party's contribution X W to the hidden pre-activations.
struct PartialPreactivation {
  std::string task_id;
  int round = 0;
  IdList ids;
  Matrix values;  // n x h

  Envelope to_envelope(MessageKind kind, std::string sender,
                       std::string receiver) const;
  static PartialPreactivation from_envelope(const Envelope& envelope);
};

Matrix partial_preactivation(const Matrix& x, const Matrix& w);

// tanh(own + other + bias) then the linear readout. Throws ShapeMismatch.
Vector split_forward(const nn::SharedWeights& shared, const Matrix& own_partial,
                     const Matrix& other_partial);

struct NnOptConfig {
  double rate = 0.01;
  int batch = 32;
  int epochs_per_round = 1;
  std::uint64_t seed = 0;
};

// Alice's round: w_a and the shared block take epochs_per_round epochs of
// mini-batch descent with bob_partial held fixed; w_b is untouched.
// Throws InvalidArgument on a Bob-parity round, NonFiniteLoss on divergence.
SplitNetworkState alice_update_round(const SplitNetworkState& state,
                                     const Matrix& x_a, const Matrix& bob_partial,
                                     const Vector& labels, const NnOptConfig& opt);

struct BobUpdate {
  Matrix w_b;
  nn::SharedWeights shared;
  std::int64_t bob_epochs = 0;
};

// Mirror image of Alice's round, computed from what Bob receives: Alice's
// partial, the public labels and the shared block.
BobUpdate bob_update_round(const Matrix& w_b, const Matrix& x_b,
                           const Matrix& alice_partial, const Vector& labels,
                           const nn::SharedWeights& w_tilde,
                           const NnOptConfig& opt, int round,
                           std::int64_t bob_epochs);

// Bob's side of the wire: one session per task, holding his input weights
// for every round in which they changed.
class SplitNetworkAssistant {
 public:
  explicit SplitNetworkAssistant(const FeaturePartition& partition);

  // LABELS_TRANSFER, PARTIAL_PREACT, WTILDE_TRANSFER, NN_PREDICT_REQUEST.
  Envelope handle(const Envelope& request, const std::string& self_id);

  // Bob's input weights as of the end of `round` (0 = initial).
  Matrix weights_at(const std::string& task_id, int round) const;
  std::vector<int> weight_versions(const std::string& task_id) const;

 private:
  struct Session {
    Eigen::Index hidden = 0;
    NnOptConfig opt;
    IdList label_ids;
    Vector labels;
    std::map<int, Matrix> versions;
    std::int64_t epochs = 0;
    int partial_round = -1;
    IdList partial_ids;
    Matrix alice_partial;
  };

  Matrix partial_for(const Session& session, std::span<const SampleId> ids,
                     int version) const;

  const FeaturePartition& partition_;
  mutable std::mutex mu_;
  std::map<std::string, Session> sessions_;
};

struct NnConfig {
  std::string task_id = "nn-task";
  Eigen::Index hidden = 16;
  NnOptConfig opt;
  int max_rounds = 20;
  int patience = 3;
  double tol_rel = 1e-4;
  double validation_fraction = 0.2;
  bool run_to_max = false;
};

struct NnResult {
  SplitNetworkState state;        // Alice's view at the chosen round K
  SplitNetworkState final_state;  // Alice's view after the last round run
  std::vector<SplitNetworkState> states;  // Alice's view after each round
  std::vector<double> train_history;
  std::vector<double> validation_history;
  int stopping_round = 0;
  int stop_fired_at = 0;
  IdList fit_ids;
  IdList validation_ids;
};

// Alternates Alice / Bob rounds by parity, scoring the holdout after each.
NnResult run_nn_learning(const FeaturePartition& alice, const Endpoint& bob,
                         const TaskLabels& labels, const NnConfig& config);

// Alice's partial plus Bob's partial at the state's round, fed forward.
// Throws MissingTestRows, or the transport error when Bob is unreachable.
Vector nn_predict(const SplitNetworkState& state, const FeaturePartition& alice,
                  const Endpoint& bob, const std::string& task_id,
                  std::span<const SampleId> ids);

}  // namespace assist

#endif  // ASSIST_NN_PROTOCOL_H_
