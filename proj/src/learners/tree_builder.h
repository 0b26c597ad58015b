#ifndef ASSIST_SRC_LEARNERS_TREE_BUILDER_H_
#define ASSIST_SRC_LEARNERS_TREE_BUILDER_H_

#include <vector>

#include "assist/learners.h"

namespace assist::internal {

// Exact greedy CART on a fixed design. Columns are presorted once, so each
// depth level costs one pass over every column regardless of node count;
// boosting reuses one builder for all stages.
class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, TreeParams params);

  TreeModel build(const Vector& target) const;

 private:
  const Matrix& x_;
  TreeParams params_;
  std::vector<std::vector<int>> order_;
  std::vector<std::vector<double>> sorted_;
};

}  // namespace assist::internal

#endif  // ASSIST_SRC_LEARNERS_TREE_BUILDER_H_
