#pragma once

#include <cstdint>
#include <vector>

#include "idid/dataset.hpp"

namespace idid {

struct TreeConfig {
  int trees = 200;
  int max_depth = 6;
  int min_leaf = 25;
};

// Bootstrap-aggregated, depth-limited CART regression trees. Deterministic
// given the seed passed to fit().
class BaggedTrees {
 public:
  static BaggedTrees fit(const RowMatrixXd& x, const Eigen::VectorXd& y,
                         const TreeConfig& config, std::uint64_t seed);

  double predict(const VecRef& x) const;

 private:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };
  struct Tree {
    std::vector<Node> nodes;
  };

  double predict_tree(const Tree& tree, const VecRef& x) const;

  std::vector<Tree> trees_;
  Eigen::Index dim_ = 0;
};

}  // namespace idid
