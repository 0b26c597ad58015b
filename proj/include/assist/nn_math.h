#ifndef ASSIST_NN_MATH_H_
#define ASSIST_NN_MATH_H_

#include <cstdint>

#include "assist/core.h"

// Shared arithmetic for the one-hidden-layer network, used both by the plain
// dense learner and by each party of the split network. A party owns an input
// weight block W (p_own x h); the hidden pre-activation is
//   X W + other_partial + hidden_bias
// where other_partial is the partner's fixed contribution (or absent).
namespace assist::nn {

// Everything above the input layer: the block that shuttles between parties.
struct SharedWeights {
  Vector hidden_bias;     // h
  Vector output_weights;  // h
  double output_bias = 0.0;

  Eigen::Index hidden() const { return hidden_bias.size(); }
  bool all_finite() const;
  friend bool operator==(const SharedWeights& a, const SharedWeights& b);
};

// Stream names for initialisation. Each party draws only its own block.
inline constexpr char kOwnerInputStream[] = "nn-input-owner";
inline constexpr char kPartnerInputStream[] = "nn-input-partner";
inline constexpr char kSharedStream[] = "nn-shared";
inline constexpr char kShuffleStream[] = "nn-shuffle";

// uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) entries, row-major draw order.
Matrix init_input_block(std::uint64_t seed, const char* stream, Eigen::Index rows,
                        Eigen::Index hidden, Eigen::Index fan_in);
SharedWeights init_shared(std::uint64_t seed, Eigen::Index hidden,
                          Eigen::Index fan_in);

Vector output_from_preact(const SharedWeights& shared, const Matrix& preact);

// Predictions for rows of x. `other_partial` may be null.
Vector forward(const Matrix& x, const Matrix& w, const Matrix* other_partial,
               const SharedWeights& shared);

struct Gradients {
  double loss = 0.0;  // (1 / 2n) * sum of squared errors
  Matrix input;       // d loss / d W
  SharedWeights shared;
};

// Full-batch loss and gradients.
Gradients gradients(const Matrix& x, const Matrix& w, const Matrix* other_partial,
                    const SharedWeights& shared, const Vector& y);

double loss(const Matrix& x, const Matrix& w, const Matrix* other_partial,
            const SharedWeights& shared, const Vector& y);

struct Schedule {
  int epochs = 1;
  int batch = 32;
  double rate = 0.01;
  std::uint64_t seed = 0;
};

// Mini-batch gradient descent on (W, shared). The shuffle for the party's
// e-th epoch overall is drawn from (seed, first_epoch + e), so two parties
// that have run the same number of epochs see the same batch order.
// Throws NonFiniteLoss on divergence.
void train(Matrix& w, SharedWeights& shared, const Matrix& x,
           const Matrix* other_partial, const Vector& y, const Schedule& schedule,
           std::int64_t first_epoch);

}  // namespace assist::nn

#endif  // ASSIST_NN_MATH_H_
