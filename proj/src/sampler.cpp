#include "gbart/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gbart/error.hpp"
#include "gbart/slice.hpp"
#include "gbart/special_functions.hpp"

namespace gbart {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

int observed_flag(const Dataset& data, std::size_t i) {
  return data.has_delta() ? static_cast<int>(data.delta[i]) : 1;
}

double p_birth_of(const DecisionTree& tree, const MoveProbs& probs) {
  return tree.size() == 1 ? 1.0 : probs.birth;
}

// Observation lists per leaf for one tree; lists are in ascending row order.
void route_observations(const DecisionTree& tree, const Dataset& data,
                        std::vector<std::vector<int>>& leaf_obs) {
  leaf_obs.resize(tree.size());
  for (auto& list : leaf_obs) list.clear();
  for (std::size_t i = 0; i < data.n; ++i)
    leaf_obs[tree.route(data.row(i))].push_back(static_cast<int>(i));
}

void split_by_rule(const Dataset& data, const std::vector<int>& idx,
                   const SplitRule& rule, std::vector<int>& left,
                   std::vector<int>& right) {
  left.clear();
  right.clear();
  for (int i : idx) {
    if (data.row(i)[rule.feature] <= rule.cutpoint)
      left.push_back(i);
    else
      right.push_back(i);
  }
}

double log_proposal_density(double x, const LeafProposal& proposal) {
  return log_normal_pdf(x, proposal.mean, proposal.sd);
}

}  // namespace

SamplerState make_sampler_state(Forest forest, const Dataset& data) {
  SamplerState state;
  state.forest = std::move(forest);
  std::size_t num_trees = state.forest.trees.size();
  state.tree_fit.assign(num_trees, std::vector<double>(data.n, 0.0));
  state.total_fit.assign(data.n, 0.0);
  for (std::size_t t = 0; t < num_trees; ++t) {
    const DecisionTree& tree = state.forest.trees[t];
    for (std::size_t i = 0; i < data.n; ++i) {
      state.tree_fit[t][i] = tree.eval(data.row(i));
      state.total_fit[i] += state.tree_fit[t][i];
    }
  }
  state.lambda.assign(data.n, 0.0);
  return state;
}

double fit_cache_error(const SamplerState& state, const Dataset& data) {
  double worst = 0.0;
  for (std::size_t i = 0; i < data.n; ++i) {
    double direct = forest_eval(state.forest, data.row(i));
    worst = std::max(worst, std::fabs(direct - state.total_fit[i]));
  }
  return worst;
}

double log_node_score(const LikelihoodFamily& family, const Dataset& data,
                      const std::vector<double>& lambda,
                      const std::vector<int>& idx, double mu,
                      double sigma_mu) {
  double total = log_normal_pdf(mu, 0.0, sigma_mu);
  for (int i : idx)
    total += family.log_density(data.y[i], observed_flag(data, i),
                                lambda[i] + mu);
  return total;
}

LeafProposal laplace_leaf_proposal(const LikelihoodFamily& family,
                                   const Dataset& data,
                                   const std::vector<double>& lambda,
                                   const std::vector<int>& idx,
                                   double sigma_mu, double init,
                                   int max_iter) {
  LeafProposal proposal;
  proposal.mean = 0.0;
  proposal.sd = sigma_mu;
  if (idx.empty()) return proposal;  // prior is the exact conditional

  double prior_precision = 1.0 / (sigma_mu * sigma_mu);
  bool use_fisher = family.has_fisher_info();
  double m = init;
  double info = prior_precision;
  try {
    for (int iter = 0;; ++iter) {
      double score = 0.0;
      double data_info = 0.0;
      for (int i : idx) {
        double eta = lambda[i] + m;
        if (use_fisher) {
          score += family.score(data.y[i], observed_flag(data, i), eta);
          data_info += family.fisher_info(eta);
        } else {
          double s, j;
          family.score_and_obs_info(data.y[i], observed_flag(data, i), eta,
                                    &s, &j);
          score += s;
          data_info += j;
        }
      }
      if (data_info <= 0.0) data_info = 1e-8;
      score -= m * prior_precision;
      info = data_info + prior_precision;
      if (!std::isfinite(score) || !std::isfinite(info))
        throw NumericalError("non-finite Fisher scoring step");
      proposal.iterations = iter;
      // Converged once the score is small against the curvature scale; the
      // first pass always steps so a quadratic target lands on its mode.
      if (iter > 0 && std::fabs(score) <= std::sqrt(info) / 10.0) break;
      if (iter >= max_iter) {
        proposal.hit_cap = true;
        break;
      }
      m += score / info;
    }
  } catch (const NumericalError&) {
    proposal.mean = m;
    proposal.sd = sigma_mu;
    proposal.hit_cap = true;
    return proposal;
  }
  proposal.mean = m;
  proposal.sd = info > 0.0 ? 1.0 / std::sqrt(info) : sigma_mu;
  return proposal;
}

double birth_log_ratio(const BirthTerms& t, const TreePriorParams& prior) {
  double rho_d = branch_prob(prior, t.depth);
  double rho_child = branch_prob(prior, t.depth + 1);
  double ratio = std::log(rho_d) + 2.0 * std::log1p(-rho_child) -
                 std::log1p(-rho_d);
  ratio += t.log_f_new_left + t.log_f_new_right - t.log_f_old;
  ratio += std::log(t.p_death_new) - std::log(t.n_nog_new) -
           std::log(t.p_birth_old) + std::log(t.n_leaves_old);
  ratio += log_proposal_density(t.mu_old, t.rev_merged) -
           log_proposal_density(t.mu_new_left, t.fwd_left) -
           log_proposal_density(t.mu_new_right, t.fwd_right);
  return ratio;
}

double death_log_ratio(const DeathTerms& t, const TreePriorParams& prior) {
  double rho_d = branch_prob(prior, t.depth);
  double rho_child = branch_prob(prior, t.depth + 1);
  double ratio = -std::log(rho_d) - 2.0 * std::log1p(-rho_child) +
                 std::log1p(-rho_d);
  ratio += t.log_f_new - t.log_f_old_left - t.log_f_old_right;
  ratio += std::log(t.p_birth_new) - std::log(t.n_leaves_new) -
           std::log(t.p_death_old) + std::log(t.n_nog_old);
  ratio += log_proposal_density(t.mu_old_left, t.rev_left) +
           log_proposal_density(t.mu_old_right, t.rev_right) -
           log_proposal_density(t.mu_new, t.fwd_merged);
  return ratio;
}

double change_log_ratio(const ChangeTerms& t) {
  // Differenced per node so shared magnitudes cancel before the terms are
  // summed; an identity change is exactly zero.
  return (t.log_f_new_left - t.log_f_old_left) +
         (t.log_f_new_right - t.log_f_old_right) +
         (log_proposal_density(t.mu_old_left, t.rev_left) -
          log_proposal_density(t.mu_new_left, t.fwd_left)) +
         (log_proposal_density(t.mu_old_right, t.rev_right) -
          log_proposal_density(t.mu_new_right, t.fwd_right));
}

namespace {

// Slice-refresh every leaf conditional on the tree structure; initial width
// is the leaf's Laplace sd at its current value.
void slice_refresh_leaves(DecisionTree& tree,
                          const std::vector<std::vector<int>>& leaf_obs,
                          const SamplerState& state, const Dataset& data,
                          const LikelihoodFamily& family,
                          const SamplerOptions& options, Rng& rng) {
  double sigma_mu = state.forest.sigma_mu;
  double prior_precision = 1.0 / (sigma_mu * sigma_mu);
  bool use_fisher = family.has_fisher_info();
  for (int leaf : tree.leaves()) {
    const std::vector<int>& idx = leaf_obs[leaf];
    double mu = tree.leaf_value(leaf);
    double width = sigma_mu;
    if (!idx.empty()) {
      double info = prior_precision;
      try {
        for (int i : idx) {
          double eta = state.lambda[i] + mu;
          info += use_fisher
                      ? family.fisher_info(eta)
                      : family.observed_info(data.y[i],
                                             observed_flag(data, i), eta);
        }
        if (std::isfinite(info) && info > 0.0)
          width = 1.0 / std::sqrt(info);
      } catch (const NumericalError&) {
      }
    }
    auto target = [&](double value) {
      return log_node_score(family, data, state.lambda, idx, value, sigma_mu);
    };
    tree.set_leaf_value(
        leaf, slice_sample(mu, target, width, options.slice_max_steps, rng));
  }
}

void restore_tree_fit(SamplerState& state, int t, const Dataset& data) {
  const DecisionTree& tree = state.forest.trees[t];
  std::vector<double>& fit = state.tree_fit[t];
  for (std::size_t i = 0; i < data.n; ++i) {
    fit[i] = tree.eval(data.row(i));
    state.total_fit[i] = state.lambda[i] + fit[i];
  }
}

}  // namespace

void rj_update_tree(SamplerState& state, int t, const Dataset& data,
                    const LikelihoodFamily& family,
                    const SamplerOptions& options, Rng& rng) {
  DecisionTree& tree = state.forest.trees[t];
  double sigma_mu = state.forest.sigma_mu;
  for (std::size_t i = 0; i < data.n; ++i)
    state.lambda[i] = state.total_fit[i] - state.tree_fit[t][i];
  route_observations(tree, data, state.leaf_obs);

  auto laplace = [&](const std::vector<int>& idx, double init) {
    LeafProposal p =
        laplace_leaf_proposal(family, data, state.lambda, idx, sigma_mu, init,
                              options.laplace_max_iter);
    if (p.hit_cap) ++state.counters.laplace_cap_hits;
    return p;
  };
  auto node_score = [&](const std::vector<int>& idx, double mu) {
    return log_node_score(family, data, state.lambda, idx, mu, sigma_mu);
  };

  MoveKind kind = kBirth;
  if (tree.size() > 1) {
    double u = rng.uniform();
    kind = u < options.move_probs.birth ? kBirth
           : u < options.move_probs.birth + options.move_probs.death
               ? kDeath
               : kChange;
  }
  ++state.counters.attempts[kind];

  std::vector<int> left_idx, right_idx, merged_idx;
  if (kind == kBirth) {
    std::vector<int> leaves = tree.leaves();
    int leaf = leaves[rng.integer(leaves.size())];
    SplitDraw draw = sample_split_rule(
        rng, tree.node_region(leaf, static_cast<int>(data.p)),
        state.forest.split_probs);
    if (!draw.degenerate) {
      split_by_rule(data, state.leaf_obs[leaf], draw.rule, left_idx,
                    right_idx);
      BirthTerms terms;
      terms.depth = tree.depth(leaf);
      terms.mu_old = tree.leaf_value(leaf);
      terms.fwd_left = laplace(left_idx, terms.mu_old);
      terms.fwd_right = laplace(right_idx, terms.mu_old);
      terms.mu_new_left = rng.normal(terms.fwd_left.mean, terms.fwd_left.sd);
      terms.mu_new_right =
          rng.normal(terms.fwd_right.mean, terms.fwd_right.sd);
      terms.rev_merged =
          laplace(state.leaf_obs[leaf],
                  0.5 * (terms.mu_new_left + terms.mu_new_right));
      terms.log_f_old = node_score(state.leaf_obs[leaf], terms.mu_old);
      terms.log_f_new_left = node_score(left_idx, terms.mu_new_left);
      terms.log_f_new_right = node_score(right_idx, terms.mu_new_right);
      DecisionTree proposed = tree.with_birth(
          leaf, draw.rule, terms.mu_new_left, terms.mu_new_right);
      terms.n_leaves_old = static_cast<int>(leaves.size());
      terms.n_nog_new = static_cast<int>(proposed.nog().size());
      terms.p_birth_old = p_birth_of(tree, options.move_probs);
      terms.p_death_new = options.move_probs.death;
      if (std::log(rng.uniform()) <
          birth_log_ratio(terms, options.tree_prior)) {
        tree = proposed;
        ++state.counters.accepts[kBirth];
      }
    }
  } else if (kind == kDeath) {
    std::vector<int> nogs = tree.nog();
    int branch = nogs[rng.integer(nogs.size())];
    int left = tree.node(branch).left;
    int right = tree.node(branch).right;
    merged_idx = state.leaf_obs[left];
    merged_idx.insert(merged_idx.end(), state.leaf_obs[right].begin(),
                      state.leaf_obs[right].end());
    DeathTerms terms;
    terms.depth = tree.depth(branch);
    terms.mu_old_left = tree.leaf_value(left);
    terms.mu_old_right = tree.leaf_value(right);
    terms.fwd_merged = laplace(
        merged_idx, 0.5 * (terms.mu_old_left + terms.mu_old_right));
    terms.mu_new = rng.normal(terms.fwd_merged.mean, terms.fwd_merged.sd);
    // Reverse birth from T' starts both children at the merged value.
    terms.rev_left = laplace(state.leaf_obs[left], terms.mu_new);
    terms.rev_right = laplace(state.leaf_obs[right], terms.mu_new);
    terms.log_f_old_left = node_score(state.leaf_obs[left], terms.mu_old_left);
    terms.log_f_old_right =
        node_score(state.leaf_obs[right], terms.mu_old_right);
    terms.log_f_new = node_score(merged_idx, terms.mu_new);
    DecisionTree proposed = tree.with_death(branch, terms.mu_new);
    terms.n_nog_old = static_cast<int>(nogs.size());
    terms.n_leaves_new = static_cast<int>(proposed.leaves().size());
    terms.p_death_old = options.move_probs.death;
    terms.p_birth_new = p_birth_of(proposed, options.move_probs);
    if (std::log(rng.uniform()) < death_log_ratio(terms, options.tree_prior)) {
      tree = proposed;
      ++state.counters.accepts[kDeath];
    }
  } else {
    std::vector<int> nogs = tree.nog();
    int branch = nogs[rng.integer(nogs.size())];
    SplitDraw draw = sample_split_rule(
        rng, tree.node_region(branch, static_cast<int>(data.p)),
        state.forest.split_probs);
    if (!draw.degenerate) {
      int left = tree.node(branch).left;
      int right = tree.node(branch).right;
      const std::vector<int>& old_left = state.leaf_obs[left];
      const std::vector<int>& old_right = state.leaf_obs[right];
      merged_idx = old_left;
      merged_idx.insert(merged_idx.end(), old_right.begin(), old_right.end());
      split_by_rule(data, merged_idx, draw.rule, left_idx, right_idx);
      ChangeTerms terms;
      terms.mu_old_left = tree.leaf_value(left);
      terms.mu_old_right = tree.leaf_value(right);
      terms.fwd_left = laplace(left_idx, terms.mu_old_left);
      terms.fwd_right = laplace(right_idx, terms.mu_old_right);
      terms.mu_new_left = rng.normal(terms.fwd_left.mean, terms.fwd_left.sd);
      terms.mu_new_right =
          rng.normal(terms.fwd_right.mean, terms.fwd_right.sd);
      terms.rev_left = laplace(old_left, terms.mu_new_left);
      terms.rev_right = laplace(old_right, terms.mu_new_right);
      terms.log_f_old_left = node_score(old_left, terms.mu_old_left);
      terms.log_f_old_right = node_score(old_right, terms.mu_old_right);
      terms.log_f_new_left = node_score(left_idx, terms.mu_new_left);
      terms.log_f_new_right = node_score(right_idx, terms.mu_new_right);
      if (std::log(rng.uniform()) < change_log_ratio(terms)) {
        tree = tree.with_change(branch, draw.rule, terms.mu_new_left,
                                terms.mu_new_right);
        ++state.counters.accepts[kChange];
      }
    }
  }

  route_observations(tree, data, state.leaf_obs);
  slice_refresh_leaves(tree, state.leaf_obs, state, data, family, options,
                       rng);
  restore_tree_fit(state, t, data);
}

namespace {

struct LeafStats {
  double n = 0.0;
  double sum = 0.0;
  double sum_sq = 0.0;
};

LeafStats stats_of(const std::vector<int>& idx,
                   const std::vector<double>& residual) {
  LeafStats s;
  for (int i : idx) {
    s.n += 1.0;
    s.sum += residual[i];
    s.sum_sq += residual[i] * residual[i];
  }
  return s;
}

// log integral pi_mu(mu) prod_i Normal(r_i | mu, sigma^2) dmu.
double log_marginal_leaf(const LeafStats& s, double sigma, double sigma_mu) {
  double s2 = sigma * sigma;
  double sm2 = sigma_mu * sigma_mu;
  return -0.5 * s.n * std::log(2.0 * M_PI * s2) -
         0.5 * std::log1p(s.n * sm2 / s2) - 0.5 * s.sum_sq / s2 +
         0.5 * s.sum * s.sum * sm2 / (s2 * (s2 + s.n * sm2));
}

double structure_prior_log_ratio_birth(int depth,
                                       const TreePriorParams& prior) {
  double rho_d = branch_prob(prior, depth);
  double rho_child = branch_prob(prior, depth + 1);
  return std::log(rho_d) + 2.0 * std::log1p(-rho_child) -
         std::log1p(-rho_d);
}

}  // namespace

double gaussian_leaf_log_marginal(double n, double sum, double sum_sq,
                                  double sigma, double sigma_mu) {
  LeafStats s;
  s.n = n;
  s.sum = sum;
  s.sum_sq = sum_sq;
  return log_marginal_leaf(s, sigma, sigma_mu);
}

void conjugate_gaussian_tree_update(SamplerState& state, int t,
                                    const Dataset& data,
                                    const LikelihoodFamily& family,
                                    const SamplerOptions& options, Rng& rng) {
  if (family.name() != "gaussian")
    throw InputError(
        "conjugate_gaussian_tree_update: unsupported model \"" +
        family.name() + "\"; the conjugate sampler requires gaussian");
  double sigma = family.nuisance()[0];
  double sigma_mu = state.forest.sigma_mu;

  DecisionTree& tree = state.forest.trees[t];
  std::vector<double>& residual = state.lambda;  // reuse scratch for r_i
  for (std::size_t i = 0; i < data.n; ++i)
    residual[i] =
        data.y[i] - (state.total_fit[i] - state.tree_fit[t][i]);
  route_observations(tree, data, state.leaf_obs);

  MoveKind kind = kBirth;
  if (tree.size() > 1) {
    double u = rng.uniform();
    kind = u < options.move_probs.birth ? kBirth
           : u < options.move_probs.birth + options.move_probs.death
               ? kDeath
               : kChange;
  }
  ++state.counters.attempts[kind];

  std::vector<int> left_idx, right_idx, merged_idx;
  if (kind == kBirth) {
    std::vector<int> leaves = tree.leaves();
    int leaf = leaves[rng.integer(leaves.size())];
    SplitDraw draw = sample_split_rule(
        rng, tree.node_region(leaf, static_cast<int>(data.p)),
        state.forest.split_probs);
    if (!draw.degenerate) {
      split_by_rule(data, state.leaf_obs[leaf], draw.rule, left_idx,
                    right_idx);
      double log_ratio =
          structure_prior_log_ratio_birth(tree.depth(leaf),
                                          options.tree_prior) +
          log_marginal_leaf(stats_of(left_idx, residual), sigma, sigma_mu) +
          log_marginal_leaf(stats_of(right_idx, residual), sigma, sigma_mu) -
          log_marginal_leaf(stats_of(state.leaf_obs[leaf], residual), sigma,
                            sigma_mu);
      DecisionTree proposed = tree.with_birth(leaf, draw.rule, 0.0, 0.0);
      log_ratio += std::log(options.move_probs.death) -
                   std::log(proposed.nog().size()) -
                   std::log(p_birth_of(tree, options.move_probs)) +
                   std::log(leaves.size());
      if (std::log(rng.uniform()) < log_ratio) {
        tree = proposed;
        ++state.counters.accepts[kBirth];
      }
    }
  } else if (kind == kDeath) {
    std::vector<int> nogs = tree.nog();
    int branch = nogs[rng.integer(nogs.size())];
    int left = tree.node(branch).left;
    int right = tree.node(branch).right;
    merged_idx = state.leaf_obs[left];
    merged_idx.insert(merged_idx.end(), state.leaf_obs[right].begin(),
                      state.leaf_obs[right].end());
    double log_ratio =
        -structure_prior_log_ratio_birth(tree.depth(branch),
                                         options.tree_prior) +
        log_marginal_leaf(stats_of(merged_idx, residual), sigma, sigma_mu) -
        log_marginal_leaf(stats_of(state.leaf_obs[left], residual), sigma,
                          sigma_mu) -
        log_marginal_leaf(stats_of(state.leaf_obs[right], residual), sigma,
                          sigma_mu);
    DecisionTree proposed = tree.with_death(branch, 0.0);
    log_ratio += std::log(p_birth_of(proposed, options.move_probs)) -
                 std::log(proposed.leaves().size()) -
                 std::log(options.move_probs.death) + std::log(nogs.size());
    if (std::log(rng.uniform()) < log_ratio) {
      tree = proposed;
      ++state.counters.accepts[kDeath];
    }
  } else {
    std::vector<int> nogs = tree.nog();
    int branch = nogs[rng.integer(nogs.size())];
    SplitDraw draw = sample_split_rule(
        rng, tree.node_region(branch, static_cast<int>(data.p)),
        state.forest.split_probs);
    if (!draw.degenerate) {
      int left = tree.node(branch).left;
      int right = tree.node(branch).right;
      merged_idx = state.leaf_obs[left];
      merged_idx.insert(merged_idx.end(), state.leaf_obs[right].begin(),
                        state.leaf_obs[right].end());
      split_by_rule(data, merged_idx, draw.rule, left_idx, right_idx);
      double log_ratio =
          log_marginal_leaf(stats_of(left_idx, residual), sigma, sigma_mu) +
          log_marginal_leaf(stats_of(right_idx, residual), sigma, sigma_mu) -
          log_marginal_leaf(stats_of(state.leaf_obs[left], residual), sigma,
                            sigma_mu) -
          log_marginal_leaf(stats_of(state.leaf_obs[right], residual), sigma,
                            sigma_mu);
      if (std::log(rng.uniform()) < log_ratio) {
        tree = tree.with_change(branch, draw.rule, 0.0, 0.0);
        ++state.counters.accepts[kChange];
      }
    }
  }

  // Exact Normal conditional draw for every leaf.
  route_observations(tree, data, state.leaf_obs);
  double sm2 = sigma_mu * sigma_mu;
  double s2 = sigma * sigma;
  for (int leaf : tree.leaves()) {
    LeafStats s = stats_of(state.leaf_obs[leaf], residual);
    double precision = s.n / s2 + 1.0 / sm2;
    double mean = (s.sum / s2) / precision;
    tree.set_leaf_value(leaf, rng.normal(mean, 1.0 / std::sqrt(precision)));
  }

  std::vector<double>& fit = state.tree_fit[t];
  for (std::size_t i = 0; i < data.n; ++i) {
    double lambda_i = data.y[i] - residual[i];
    fit[i] = tree.eval(data.row(i));
    state.total_fit[i] = lambda_i + fit[i];
  }
}

void update_sigma_mu(SamplerState& state, const SamplerOptions& options,
                     Rng& rng) {
  double sum_sq = 0.0;
  double count = 0.0;
  for (const DecisionTree& tree : state.forest.trees)
    for (int leaf : tree.leaves()) {
      double mu = tree.leaf_value(leaf);
      sum_sq += mu * mu;
      count += 1.0;
    }
  auto log_target = [&](double u) {
    double sm2 = std::exp(2.0 * u);
    return -0.5 * count * std::log(2.0 * M_PI * sm2) - 0.5 * sum_sq / sm2 +
           log_half_cauchy_pdf(std::exp(u), options.half_cauchy_scale) + u;
  };
  state.forest.sigma_mu =
      std::exp(slice_sample(std::log(state.forest.sigma_mu), log_target, 1.0,
                            options.slice_max_steps, rng));
}

void update_split_probs(SamplerState& state, const SamplerOptions& options,
                        Rng& rng) {
  std::size_t p = state.forest.split_probs.size();
  std::vector<double> alpha(p, options.xi / static_cast<double>(p));
  for (const DecisionTree& tree : state.forest.trees)
    for (int branch : tree.branches())
      alpha[tree.node(branch).rule.feature] += 1.0;
  state.forest.split_probs = rng.dirichlet(alpha);
}

void gibbs_iteration(SamplerState& state, const Dataset& data,
                     LikelihoodFamily& family, const SamplerOptions& options,
                     Rng& rng, bool use_conjugate) {
  int num_trees = static_cast<int>(state.forest.trees.size());
  for (int t = 0; t < num_trees; ++t) {
    if (use_conjugate)
      conjugate_gaussian_tree_update(state, t, data, family, options, rng);
    else
      rj_update_tree(state, t, data, family, options, rng);
  }
  update_sigma_mu(state, options, rng);
  update_split_probs(state, options, rng);
  family.update_nuisance(data, state.total_fit, rng);

  // Rebuild the cache once per sweep so per-update rounding cannot drift.
  std::fill(state.total_fit.begin(), state.total_fit.end(), 0.0);
  for (int t = 0; t < num_trees; ++t)
    for (std::size_t i = 0; i < data.n; ++i)
      state.total_fit[i] += state.tree_fit[t][i];
}

double log_posterior(const SamplerState& state, const Dataset& data,
                     const LikelihoodFamily& family,
                     const SamplerOptions& options) {
  double total = 0.0;
  for (std::size_t i = 0; i < data.n; ++i)
    total += family.log_density(data.y[i], observed_flag(data, i),
                                state.total_fit[i]);

  const Forest& forest = state.forest;
  int p = static_cast<int>(forest.split_probs.size());
  for (const DecisionTree& tree : forest.trees) {
    for (int id = 0; id < tree.size(); ++id) {
      double rho = branch_prob(options.tree_prior, tree.depth(id));
      if (tree.is_leaf(id)) {
        total += std::log1p(-rho);
        total += log_normal_pdf(tree.leaf_value(id), 0.0, forest.sigma_mu);
      } else {
        total += std::log(rho);
        const SplitRule& rule = tree.node(id).rule;
        Region region = tree.node_region(id, p);
        double width = region.upper[rule.feature] - region.lower[rule.feature];
        total += std::log(forest.split_probs[rule.feature]);
        total += width > 0.0 ? -std::log(width) : kNegInf;
      }
    }
  }

  total += log_half_cauchy_pdf(forest.sigma_mu, options.half_cauchy_scale);
  double alpha = options.xi / static_cast<double>(p);
  total += std::lgamma(options.xi) - p * std::lgamma(alpha);
  for (double s : forest.split_probs) total += (alpha - 1.0) * std::log(s);
  total += family.log_nuisance_prior();
  return total;
}

}  // namespace gbart
