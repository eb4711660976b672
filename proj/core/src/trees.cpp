#include "idid/trees.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "idid/rng.hpp"

namespace idid {

namespace {

struct SplitResult {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double score = 0.0;  // SSE reduction
};

SplitResult best_split(const RowMatrixXd& x, const Eigen::VectorXd& y,
                       std::vector<int>& rows, int min_leaf) {
  SplitResult best;
  const int n = static_cast<int>(rows.size());
  if (n < 2 * min_leaf) return best;

  std::vector<int> order(rows);
  std::vector<double> prefix_y(n + 1), prefix_yy(n + 1);
  for (Eigen::Index f = 0; f < x.cols(); ++f) {
    std::sort(order.begin(), order.end(),
              [&](int i, int j) { return x(i, f) < x(j, f); });
    prefix_y[0] = 0.0;
    prefix_yy[0] = 0.0;
    for (int k = 0; k < n; ++k) {
      prefix_y[k + 1] = prefix_y[k] + y[order[k]];
      prefix_yy[k + 1] = prefix_yy[k] + y[order[k]] * y[order[k]];
    }
    const double total_y = prefix_y[n];
    const double total_yy = prefix_yy[n];
    const double parent_sse = total_yy - total_y * total_y / n;
    for (int k = min_leaf; k <= n - min_leaf; ++k) {
      const double lo = x(order[k - 1], f);
      const double hi = x(order[k], f);
      if (lo == hi) continue;  // cannot separate equal values
      const double left_sse = prefix_yy[k] - prefix_y[k] * prefix_y[k] / k;
      const double right_y = total_y - prefix_y[k];
      const double right_yy = total_yy - prefix_yy[k];
      const double right_sse = right_yy - right_y * right_y / (n - k);
      const double reduction = parent_sse - left_sse - right_sse;
      if (reduction > best.score) {
        best.found = true;
        best.feature = static_cast<int>(f);
        best.threshold = 0.5 * (lo + hi);
        best.score = reduction;
      }
    }
  }
  return best;
}

}  // namespace

BaggedTrees BaggedTrees::fit(const RowMatrixXd& x, const Eigen::VectorXd& y,
                             const TreeConfig& config, std::uint64_t seed) {
  const int n = static_cast<int>(x.rows());
  if (n != y.size()) throw std::invalid_argument("BaggedTrees::fit: shape mismatch");
  if (config.trees < 1 || config.max_depth < 1 || config.min_leaf < 1) {
    throw std::invalid_argument("BaggedTrees::fit: counts must be >= 1");
  }
  if (n < config.min_leaf) {
    throw std::runtime_error("insufficient data for backend config (n=" +
                             std::to_string(n) + " < min_leaf=" +
                             std::to_string(config.min_leaf) + ")");
  }

  BaggedTrees model;
  model.dim_ = x.cols();
  model.trees_.resize(static_cast<std::size_t>(config.trees));
  Rng rng(mix_seed(seed, 0x7265677472656573ULL));

  for (auto& tree : model.trees_) {
    std::vector<int> sample(static_cast<std::size_t>(n));
    for (auto& idx : sample) {
      idx = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(n));
    }

    // Iterative build: stack of (node index, rows, depth).
    struct Work {
      int node;
      std::vector<int> rows;
      int depth;
    };
    tree.nodes.clear();
    tree.nodes.push_back({});
    std::vector<Work> stack;
    stack.push_back({0, std::move(sample), 1});
    while (!stack.empty()) {
      Work w = std::move(stack.back());
      stack.pop_back();
      Node& node = tree.nodes[static_cast<std::size_t>(w.node)];
      double sum = 0.0;
      for (int i : w.rows) sum += y[i];
      node.value = sum / static_cast<double>(w.rows.size());
      if (w.depth >= config.max_depth) continue;
      const SplitResult split = best_split(x, y, w.rows, config.min_leaf);
      if (!split.found || split.score <= 1e-12) continue;

      std::vector<int> left_rows, right_rows;
      left_rows.reserve(w.rows.size());
      right_rows.reserve(w.rows.size());
      for (int i : w.rows) {
        (x(i, split.feature) <= split.threshold ? left_rows : right_rows).push_back(i);
      }
      const int left = static_cast<int>(tree.nodes.size());
      tree.nodes.push_back({});
      const int right = static_cast<int>(tree.nodes.size());
      tree.nodes.push_back({});
      Node& parent = tree.nodes[static_cast<std::size_t>(w.node)];
      parent.feature = split.feature;
      parent.threshold = split.threshold;
      parent.left = left;
      parent.right = right;
      stack.push_back({left, std::move(left_rows), w.depth + 1});
      stack.push_back({right, std::move(right_rows), w.depth + 1});
    }
  }
  return model;
}

double BaggedTrees::predict_tree(const Tree& tree, const VecRef& x) const {
  int node = 0;
  while (tree.nodes[static_cast<std::size_t>(node)].feature >= 0) {
    const Node& cur = tree.nodes[static_cast<std::size_t>(node)];
    node = x[cur.feature] <= cur.threshold ? cur.left : cur.right;
  }
  return tree.nodes[static_cast<std::size_t>(node)].value;
}

double BaggedTrees::predict(const VecRef& x) const {
  if (x.size() != dim_) throw std::invalid_argument("BaggedTrees::predict: dimension mismatch");
  double sum = 0.0;
  for (const auto& tree : trees_) sum += predict_tree(tree, x);
  return sum / static_cast<double>(trees_.size());
}

}  // namespace idid
