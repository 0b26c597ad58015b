#include "learners/tree_builder.h"

#include <algorithm>
#include <limits>
#include <numeric>

#include "assist/errors.h"

namespace assist {

int TreeModel::depth() const {
  if (nodes.empty()) return 0;
  // Children always have larger indices than their parent.
  std::vector<int> level(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Node& node = nodes[i];
    if (node.feature < 0) continue;
    level[node.left] = level[node.right] = level[i] + 1;
    deepest = std::max(deepest, level[i] + 1);
  }
  return deepest;
}

double TreeModel::predict_row(const double* row, Eigen::Index stride) const {
  int at = 0;
  while (nodes[at].feature >= 0) {
    const Node& node = nodes[at];
    at = row[node.feature * stride] <= node.threshold ? node.left : node.right;
  }
  return nodes[at].value;
}

namespace internal {

TreeBuilder::TreeBuilder(const Matrix& x, TreeParams params)
    : x_(x), params_(params) {
  if (params_.max_depth < 0 || params_.min_leaf < 1) {
    throw Error(ErrorCode::kInvalidArgument, "tree needs max_depth >= 0 and min_leaf >= 1");
  }
  const Eigen::Index n = x.rows();
  order_.resize(static_cast<std::size_t>(x.cols()));
  sorted_.resize(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index f = 0; f < x.cols(); ++f) {
    auto& order = order_[f];
    order.resize(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return x(a, f) < x(b, f); });
    auto& sorted = sorted_[f];
    sorted.resize(order.size());
    for (std::size_t k = 0; k < order.size(); ++k) sorted[k] = x(order[k], f);
  }
}

namespace {

struct NodeStats {
  int count = 0;
  double sum = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double t) {
    ++count;
    sum += t;
    lo = std::min(lo, t);
    hi = std::max(hi, t);
  }
  double mean() const { return count > 0 ? sum / count : 0.0; }
};

struct Candidate {
  double gain = -std::numeric_limits<double>::infinity();
  int feature = -1;
  double threshold = 0.0;
};

struct ScanState {
  int left_count = 0;
  double left_sum = 0.0;  // sum of (t - node mean)
  double last = 0.0;
  bool has_last = false;
};

double midpoint(double a, double b) {
  const double mid = a + (b - a) / 2.0;
  return mid < b ? mid : a;
}

}  // namespace

TreeModel TreeBuilder::build(const Vector& target) const {
  const Eigen::Index n = x_.rows();
  if (target.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "tree target length != rows");
  }
  if (n < 1) throw Error(ErrorCode::kDimensionMismatch, "tree needs at least one row");

  TreeModel tree;
  tree.nodes.emplace_back();
  std::vector<int> node_of(static_cast<std::size_t>(n), 0);
  std::vector<NodeStats> stats(1);
  for (Eigen::Index i = 0; i < n; ++i) stats[0].add(target[i]);

  std::vector<int> frontier{0};
  const int min_leaf = params_.min_leaf;

  for (int depth = 0; depth < params_.max_depth && !frontier.empty(); ++depth) {
    // Position of each splittable frontier node in the scan arrays.
    std::vector<int> slot(tree.nodes.size(), -1);
    std::vector<int> open;
    std::vector<double> means;
    std::vector<double> centered_total;
    for (int node : frontier) {
      const NodeStats& s = stats[node];
      if (s.count < 2 * min_leaf || s.lo == s.hi) continue;
      slot[node] = static_cast<int>(open.size());
      open.push_back(node);
      means.push_back(s.mean());
      centered_total.push_back(0.0);
    }
    if (open.empty()) break;
    for (Eigen::Index i = 0; i < n; ++i) {
      const int k = slot[node_of[i]];
      if (k >= 0) centered_total[k] += target[i] - means[k];
    }

    std::vector<Candidate> best(open.size());
    std::vector<ScanState> scan(open.size());
    for (Eigen::Index f = 0; f < x_.cols(); ++f) {
      std::fill(scan.begin(), scan.end(), ScanState{});
      const auto& order = order_[f];
      const auto& sorted = sorted_[f];
      for (std::size_t pos = 0; pos < order.size(); ++pos) {
        const int i = order[pos];
        const int k = slot[node_of[i]];
        if (k < 0) continue;
        ScanState& st = scan[k];
        const double v = sorted[pos];
        if (st.has_last && v > st.last) {
          const int count = stats[open[k]].count;
          const int right_count = count - st.left_count;
          if (st.left_count >= min_leaf && right_count >= min_leaf) {
            const double right_sum = centered_total[k] - st.left_sum;
            const double gain = st.left_sum * st.left_sum / st.left_count +
                                right_sum * right_sum / right_count -
                                centered_total[k] * centered_total[k] / count;
            // Strict comparison keeps the lowest feature, then the lowest
            // threshold, among equal gains.
            if (gain > best[k].gain) {
              best[k] = {gain, static_cast<int>(f), midpoint(st.last, v)};
            }
          }
        }
        ++st.left_count;
        st.left_sum += target[i] - means[k];
        st.last = v;
        st.has_last = true;
      }
    }

    std::vector<int> next;
    for (std::size_t k = 0; k < open.size(); ++k) {
      if (best[k].feature < 0) continue;  // all rows identical in this node
      const int node = open[k];
      const int left = static_cast<int>(tree.nodes.size());
      tree.nodes[node].feature = best[k].feature;
      tree.nodes[node].threshold = best[k].threshold;
      tree.nodes[node].left = left;
      tree.nodes[node].right = left + 1;
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      stats.emplace_back();
      stats.emplace_back();
      next.push_back(left);
      next.push_back(left + 1);
    }
    if (next.empty()) break;
    for (Eigen::Index i = 0; i < n; ++i) {
      const TreeModel::Node& parent = tree.nodes[node_of[i]];
      if (parent.feature < 0) continue;
      const int child =
          x_(i, parent.feature) <= parent.threshold ? parent.left : parent.right;
      node_of[i] = child;
      stats[child].add(target[i]);
    }
    frontier = std::move(next);
  }

  for (std::size_t k = 0; k < tree.nodes.size(); ++k) tree.nodes[k].value = stats[k].mean();
  return tree;
}

}  // namespace internal

FittedModel fit_regression_tree(const Matrix& x, const Vector& y, TreeParams params) {
  if (x.rows() != y.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "tree: rows(X) != len(y)");
  }
  internal::TreeBuilder builder(x, params);
  FittedModel fitted;
  fitted.params = builder.build(y);
  fitted.meta.n = x.rows();
  fitted.meta.p = x.cols();
  return fitted;
}

}  // namespace assist
