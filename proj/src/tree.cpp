#include "gbart/tree.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "gbart/error.hpp"

namespace gbart {

double branch_prob(const TreePriorParams& params, int depth) {
  return params.gamma * std::pow(1.0 + depth, -params.beta);
}

void DecisionTree::set_leaf_value(int id, double value) {
  if (!is_leaf(id)) throw StructuralError("set_leaf_value on a branch node");
  nodes_[id].leaf_value = value;
}

std::string DecisionTree::path_of(int id) const {
  if (id == 0) return ".";
  std::string path;
  int cur = id;
  while (cur != 0) {
    int parent = nodes_[cur].parent;
    path.push_back(nodes_[parent].left == cur ? 'L' : 'R');
    cur = parent;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

int DecisionTree::node_at(const std::string& path) const {
  if (path == ".") return 0;
  int cur = 0;
  for (char step : path) {
    if (is_leaf(cur)) return -1;
    if (step == 'L')
      cur = nodes_[cur].left;
    else if (step == 'R')
      cur = nodes_[cur].right;
    else
      return -1;
  }
  return cur;
}

std::vector<int> DecisionTree::leaves() const {
  std::vector<int> out;
  for (int id = 0; id < size(); ++id)
    if (is_leaf(id)) out.push_back(id);
  return out;
}

std::vector<int> DecisionTree::branches() const {
  std::vector<int> out;
  for (int id = 0; id < size(); ++id)
    if (!is_leaf(id)) out.push_back(id);
  return out;
}

std::vector<int> DecisionTree::nog() const {
  std::vector<int> out;
  for (int id = 0; id < size(); ++id)
    if (!is_leaf(id) && is_leaf(nodes_[id].left) && is_leaf(nodes_[id].right))
      out.push_back(id);
  return out;
}

int DecisionTree::route(const double* x) const {
  int cur = 0;
  while (!is_leaf(cur)) {
    const SplitRule& rule = nodes_[cur].rule;
    cur = x[rule.feature] <= rule.cutpoint ? nodes_[cur].left
                                           : nodes_[cur].right;
  }
  return cur;
}

Region DecisionTree::node_region(int id, int num_features) const {
  Region region;
  region.lower.assign(num_features, 0.0);
  region.upper.assign(num_features, 1.0);
  // Collect the root-to-node steps, then tighten one side per step.
  std::vector<int> chain;
  for (int cur = id; cur != 0; cur = nodes_[cur].parent) chain.push_back(cur);
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    int parent = nodes_[*it].parent;
    const SplitRule& rule = nodes_[parent].rule;
    if (nodes_[parent].left == *it)
      region.upper[rule.feature] =
          std::min(region.upper[rule.feature], rule.cutpoint);
    else
      region.lower[rule.feature] =
          std::max(region.lower[rule.feature], rule.cutpoint);
  }
  return region;
}

DecisionTree DecisionTree::with_birth(int leaf, const SplitRule& rule,
                                      double mu_left, double mu_right) const {
  if (!is_leaf(leaf)) throw StructuralError("birth requires a leaf node");
  DecisionTree out = *this;
  int l = out.size();
  int r = l + 1;
  out.nodes_.push_back(TreeNode{leaf, -1, -1, nodes_[leaf].depth + 1, {},
                                mu_left});
  out.nodes_.push_back(TreeNode{leaf, -1, -1, nodes_[leaf].depth + 1, {},
                                mu_right});
  out.nodes_[leaf].left = l;
  out.nodes_[leaf].right = r;
  out.nodes_[leaf].rule = rule;
  out.nodes_[leaf].leaf_value = 0.0;
  return out;
}

DecisionTree DecisionTree::with_death(int branch, double mu_merged) const {
  if (is_leaf(branch) || !is_leaf(nodes_[branch].left) ||
      !is_leaf(nodes_[branch].right))
    throw StructuralError("death requires a branch with two leaf children");
  // Rebuild compactly so node ids never point at dead slots.
  DecisionTree out;
  out.nodes_.clear();
  std::function<int(int, int)> copy_from = [&](int src, int parent) {
    int id = static_cast<int>(out.nodes_.size());
    out.nodes_.push_back(nodes_[src]);
    out.nodes_[id].parent = parent;
    if (src == branch) {
      out.nodes_[id].left = -1;
      out.nodes_[id].right = -1;
      out.nodes_[id].rule = SplitRule{};
      out.nodes_[id].leaf_value = mu_merged;
    } else if (!is_leaf(src)) {
      int l = copy_from(nodes_[src].left, id);
      out.nodes_[id].left = l;
      int r = copy_from(nodes_[src].right, id);
      out.nodes_[id].right = r;
    }
    return id;
  };
  copy_from(0, -1);
  return out;
}

DecisionTree DecisionTree::with_change(int branch, const SplitRule& rule,
                                       double mu_left, double mu_right) const {
  if (is_leaf(branch) || !is_leaf(nodes_[branch].left) ||
      !is_leaf(nodes_[branch].right))
    throw StructuralError("change requires a branch with two leaf children");
  DecisionTree out = *this;
  out.nodes_[branch].rule = rule;
  out.nodes_[out.nodes_[branch].left].leaf_value = mu_left;
  out.nodes_[out.nodes_[branch].right].leaf_value = mu_right;
  return out;
}

bool DecisionTree::same_structure(const DecisionTree& other) const {
  std::function<bool(int, int)> eq = [&](int a, int b) {
    if (is_leaf(a) != other.is_leaf(b)) return false;
    if (is_leaf(a)) return leaf_value(a) == other.leaf_value(b);
    if (nodes_[a].rule.feature != other.nodes_[b].rule.feature ||
        nodes_[a].rule.cutpoint != other.nodes_[b].rule.cutpoint)
      return false;
    return eq(nodes_[a].left, other.nodes_[b].left) &&
           eq(nodes_[a].right, other.nodes_[b].right);
  };
  return eq(0, 0);
}

double forest_eval(const Forest& forest, const double* x) {
  double total = 0.0;
  for (const DecisionTree& tree : forest.trees) total += tree.eval(x);
  return total;
}

SplitDraw sample_split_rule(Rng& rng, const Region& region,
                            const std::vector<double>& split_probs) {
  SplitDraw draw;
  int j = rng.categorical(split_probs);
  double lo = region.lower[j];
  double hi = region.upper[j];
  draw.rule.feature = j;
  if (hi - lo < 1e-12) {
    draw.rule.cutpoint = lo;
    draw.degenerate = true;
  } else {
    draw.rule.cutpoint = rng.uniform(lo, hi);
  }
  return draw;
}

namespace {

void grow_from(DecisionTree& tree, int id, Region region, Rng& rng,
               const TreePriorParams& params,
               const std::vector<double>& split_probs, double sigma_mu) {
  if (rng.uniform() < branch_prob(params, tree.depth(id))) {
    SplitDraw draw = sample_split_rule(rng, region, split_probs);
    DecisionTree grown = tree.with_birth(id, draw.rule, 0.0, 0.0);
    tree = grown;
    int left = tree.node(id).left;
    int right = tree.node(id).right;
    Region left_region = region;
    left_region.upper[draw.rule.feature] = draw.rule.cutpoint;
    Region right_region = region;
    right_region.lower[draw.rule.feature] = draw.rule.cutpoint;
    grow_from(tree, left, left_region, rng, params, split_probs, sigma_mu);
    grow_from(tree, right, right_region, rng, params, split_probs, sigma_mu);
  } else {
    tree.set_leaf_value(id, rng.normal(0.0, sigma_mu));
  }
}

}  // namespace

DecisionTree sample_tree_prior(Rng& rng, const TreePriorParams& params,
                               const std::vector<double>& split_probs,
                               double sigma_mu, int num_features) {
  DecisionTree tree;
  Region region;
  region.lower.assign(num_features, 0.0);
  region.upper.assign(num_features, 1.0);
  grow_from(tree, 0, region, rng, params, split_probs, sigma_mu);
  return tree;
}

}  // namespace gbart
