#ifndef GBART_TREE_HPP
#define GBART_TREE_HPP

#include <string>
#include <vector>

#include "gbart/rng.hpp"

namespace gbart {

// Axis-aligned rule; x routes left iff x[feature] <= cutpoint.
struct SplitRule {
  int feature = -1;
  double cutpoint = 0.0;
};

struct TreeNode {
  int parent = -1;
  int left = -1;  // leaf iff left < 0; branches always have both children
  int right = -1;
  int depth = 0;
  SplitRule rule;
  double leaf_value = 0.0;
};

// Per-feature box [lower, upper]; nodes own the sub-box carved out by their
// ancestors' rules inside [0, 1]^P.
struct Region {
  std::vector<double> lower;
  std::vector<double> upper;
};

// Depth-d branching probability gamma * (1 + d)^(-beta).
struct TreePriorParams {
  double gamma = 0.95;
  double beta = 2.0;
};

double branch_prob(const TreePriorParams& params, int depth);

struct SplitDraw {
  SplitRule rule;
  bool degenerate = false;  // sampled interval narrower than 1e-12
};

// Full binary tree with value semantics; node 0 is the root and edits
// produce new trees, so accepted and rejected states never alias.
class DecisionTree {
 public:
  DecisionTree() : nodes_(1) {}

  int root() const { return 0; }
  int size() const { return static_cast<int>(nodes_.size()); }
  const TreeNode& node(int id) const { return nodes_[id]; }
  bool is_leaf(int id) const { return nodes_[id].left < 0; }
  int depth(int id) const { return nodes_[id].depth; }
  double leaf_value(int id) const { return nodes_[id].leaf_value; }
  void set_leaf_value(int id, double value);

  // Canonical node identity: "." for the root, then L/R steps.
  std::string path_of(int id) const;
  int node_at(const std::string& path) const;  // -1 if absent

  std::vector<int> leaves() const;
  std::vector<int> branches() const;
  // Branches whose children are both leaves ("no grandchildren").
  std::vector<int> nog() const;

  int route(const double* x) const;
  double eval(const double* x) const {
    return nodes_[route(x)].leaf_value;
  }

  Region node_region(int id, int num_features) const;

  // Structural edits; the receiver is untouched. Birth requires a leaf,
  // death/change a NOG branch, otherwise StructuralError.
  DecisionTree with_birth(int leaf, const SplitRule& rule, double mu_left,
                          double mu_right) const;
  DecisionTree with_death(int branch, double mu_merged) const;
  DecisionTree with_change(int branch, const SplitRule& rule, double mu_left,
                           double mu_right) const;

  bool same_structure(const DecisionTree& other) const;

 private:
  std::vector<TreeNode> nodes_;
};

struct Forest {
  std::vector<DecisionTree> trees;
  double sigma_mu = 1.0;
  std::vector<double> split_probs;
};

double forest_eval(const Forest& forest, const double* x);

// Feature from Categorical(split_probs), cutpoint uniform on the node's
// interval for that feature.
SplitDraw sample_split_rule(Rng& rng, const Region& region,
                            const std::vector<double>& split_probs);

// Draw from the branching-process prior over [0, 1]^num_features with iid
// Normal(0, sigma_mu^2) leaf values.
DecisionTree sample_tree_prior(Rng& rng, const TreePriorParams& params,
                               const std::vector<double>& split_probs,
                               double sigma_mu, int num_features);

}  // namespace gbart

#endif
