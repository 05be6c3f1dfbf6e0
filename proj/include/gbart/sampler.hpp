#ifndef GBART_SAMPLER_HPP
#define GBART_SAMPLER_HPP

#include <vector>

#include "gbart/data.hpp"
#include "gbart/likelihood.hpp"
#include "gbart/rng.hpp"
#include "gbart/tree.hpp"

namespace gbart {

enum MoveKind { kBirth = 0, kDeath = 1, kChange = 2 };

// Renormalized per-tree move mix; a root-only tree can only birth.
struct MoveProbs {
  double birth = 0.25;
  double death = 0.25;
  double change = 0.5;
};

struct SamplerOptions {
  TreePriorParams tree_prior;
  MoveProbs move_probs;
  double half_cauchy_scale = 1.0;  // c in the sigma_mu prior, k / sqrt(T)
  double xi = 1.0;                 // Dirichlet concentration on split_probs
  int laplace_max_iter = 50;
  int slice_max_steps = 50;
};

// Gaussian approximation to a leaf's conditional, from Fisher scoring of
// mu -> sum_i log f(y_i | lambda_i + mu) + log pi_mu(mu).
struct LeafProposal {
  double mean = 0.0;
  double sd = 1.0;
  int iterations = 0;
  bool hit_cap = false;  // iteration cap or numerical fallback
};

struct MoveCounters {
  long attempts[3] = {0, 0, 0};
  long accepts[3] = {0, 0, 0};
  long laplace_cap_hits = 0;
};

struct SamplerState {
  Forest forest;
  std::vector<std::vector<double>> tree_fit;  // [tree][obs]
  std::vector<double> total_fit;              // elementwise sum of tree_fit
  MoveCounters counters;

  // Scratch reused across tree updates.
  std::vector<double> lambda;
  std::vector<std::vector<int>> leaf_obs;
};

SamplerState make_sampler_state(Forest forest, const Dataset& data);

// Largest |total_fit - forest_eval| over observations; cache health check.
double fit_cache_error(const SamplerState& state, const Dataset& data);

// log pi_mu(mu; sigma_mu) + sum_{i in idx} log f(y_i | lambda_i + mu).
double log_node_score(const LikelihoodFamily& family, const Dataset& data,
                      const std::vector<double>& lambda,
                      const std::vector<int>& idx, double mu, double sigma_mu);

// Fisher scoring from `init`; uses fisher_info when the family has it,
// otherwise summed observed_info with nonpositive totals floored at 1e-8
// before adding the prior curvature. Empty nodes return (0, sigma_mu)
// untouched. Never throws; numerical failure falls back to the prior scale
// and reports hit_cap.
LeafProposal laplace_leaf_proposal(const LikelihoodFamily& family,
                                   const Dataset& data,
                                   const std::vector<double>& lambda,
                                   const std::vector<int>& idx,
                                   double sigma_mu, double init,
                                   int max_iter = 50);

// Acceptance log-ratios assembled from precomputed terms, so matched
// birth/death pairs can be checked to negate exactly.
struct BirthTerms {
  int depth = 0;              // depth of the leaf being split
  double log_f_old = 0.0;     // F(leaf | T, mu_old)
  double log_f_new_left = 0.0;
  double log_f_new_right = 0.0;
  int n_leaves_old = 1;       // |L(T)|
  int n_nog_new = 1;          // |NOG(T')|
  double p_birth_old = 1.0;   // p_BIRTH(T)
  double p_death_new = 0.25;  // p_DEATH(T')
  double mu_old = 0.0;
  double mu_new_left = 0.0;
  double mu_new_right = 0.0;
  LeafProposal fwd_left, fwd_right;  // birth kernels for the children
  LeafProposal rev_merged;           // death kernel from T' for mu_old
};

struct DeathTerms {
  int depth = 0;              // depth of the dying branch
  double log_f_old_left = 0.0;
  double log_f_old_right = 0.0;
  double log_f_new = 0.0;     // merged leaf in T'
  int n_nog_old = 1;          // |NOG(T)|
  int n_leaves_new = 1;       // |L(T')|
  double p_death_old = 0.25;  // p_DEATH(T)
  double p_birth_new = 1.0;   // p_BIRTH(T')
  double mu_old_left = 0.0;
  double mu_old_right = 0.0;
  double mu_new = 0.0;
  LeafProposal fwd_merged;           // death kernel from T
  LeafProposal rev_left, rev_right;  // birth kernels from T' at old values
};

struct ChangeTerms {
  double log_f_old_left = 0.0;
  double log_f_old_right = 0.0;
  double log_f_new_left = 0.0;
  double log_f_new_right = 0.0;
  double mu_old_left = 0.0;
  double mu_old_right = 0.0;
  double mu_new_left = 0.0;
  double mu_new_right = 0.0;
  LeafProposal fwd_left, fwd_right;  // kernels under the new rule
  LeafProposal rev_left, rev_right;  // kernels under the old rule, from T'
};

double birth_log_ratio(const BirthTerms& t, const TreePriorParams& prior);
double death_log_ratio(const DeathTerms& t, const TreePriorParams& prior);
double change_log_ratio(const ChangeTerms& t);

// One reversible-jump update of tree t: subtract it from the fit cache,
// propose birth/death/change, accept by the ratios above, then slice-refresh
// every leaf and restore the cache.
void rj_update_tree(SamplerState& state, int t, const Dataset& data,
                    const LikelihoodFamily& family,
                    const SamplerOptions& options, Rng& rng);

// log integral pi_mu(mu) prod Normal(r_i | mu, sigma^2) dmu for a leaf with
// the given residual count, sum, and sum of squares.
double gaussian_leaf_log_marginal(double n, double sum, double sum_sq,
                                  double sigma, double sigma_mu);

// Conjugate structure move + exact Normal leaf draws; Gaussian outcomes
// only. Reference sampler for validating the reversible-jump path.
void conjugate_gaussian_tree_update(SamplerState& state, int t,
                                    const Dataset& data,
                                    const LikelihoodFamily& family,
                                    const SamplerOptions& options, Rng& rng);

void update_sigma_mu(SamplerState& state, const SamplerOptions& options,
                     Rng& rng);
void update_split_probs(SamplerState& state, const SamplerOptions& options,
                        Rng& rng);

// Full sweep: every tree, then sigma_mu, split_probs, and the family's
// nuisance refresh.
void gibbs_iteration(SamplerState& state, const Dataset& data,
                     LikelihoodFamily& family, const SamplerOptions& options,
                     Rng& rng, bool use_conjugate = false);

// Joint density diagnostic for the trace: data log-likelihood plus tree,
// leaf, sigma_mu, split-prob, and nuisance priors.
double log_posterior(const SamplerState& state, const Dataset& data,
                     const LikelihoodFamily& family,
                     const SamplerOptions& options);

}  // namespace gbart

#endif
