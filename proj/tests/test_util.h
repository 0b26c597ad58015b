#ifndef ASSIST_TESTS_TEST_UTIL_H_
#define ASSIST_TESTS_TEST_UTIL_H_

#include <memory>
#include <string>
#include <vector>

#include "assist/core.h"
#include "assist/module.h"
#include "assist/random.h"
#include "assist/service.h"

namespace assist::testing {

// Small hand-rolled generators for property tests. Everything is seeded so a
// failing case can be replayed from the printed seed.
inline Matrix random_matrix(Engine& rng, Eigen::Index rows, Eigen::Index cols,
                            double scale = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = scale * standard_normal(rng);
  }
  return m;
}

inline Vector random_vector(Engine& rng, Eigen::Index n, double scale = 1.0) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = scale * standard_normal(rng);
  return v;
}

inline std::vector<std::string> column_names(const std::string& prefix, Eigen::Index cols) {
  std::vector<std::string> names;
  for (Eigen::Index c = 0; c < cols; ++c) names.push_back(prefix + std::to_string(c + 1));
  return names;
}

inline FeaturePartition make_partition(const IdList& ids, Matrix x, const std::string& prefix) {
  const Eigen::Index cols = x.cols();
  return FeaturePartition(ids, std::move(x), column_names(prefix, cols));
}

inline std::shared_ptr<LocalModule> make_module(const std::string& id, const IdList& ids,
                                                Matrix x, const LearnerSpec& learner) {
  return std::make_shared<LocalModule>(id, make_partition(ids, std::move(x), id + "_x"), learner);
}

inline double relative_error(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

}  // namespace assist::testing

#endif  // ASSIST_TESTS_TEST_UTIL_H_
