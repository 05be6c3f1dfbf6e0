#include "gbart/engine.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "gbart/error.hpp"
#include "gbart/models.hpp"
#include "gbart/special_functions.hpp"

namespace gbart {

void SamplerConfig::validate() const {
  if (num_trees < 1) throw InputError("config: num_trees must be >= 1");
  if (!(gamma > 0.0) || !(gamma < 1.0))
    throw InputError("config: gamma must lie in (0, 1)");
  if (!(beta >= 0.0)) throw InputError("config: beta must be >= 0");
  if (!(k > 0.0)) throw InputError("config: k must be > 0");
  if (!(xi > 0.0)) throw InputError("config: xi must be > 0");
  if (!(p_birth > 0.0) || !(p_death > 0.0) || !(p_change >= 0.0))
    throw InputError("config: move probabilities must be positive");
  if (iterations < 1) throw InputError("config: iterations must be >= 1");
  if (burn_in < 0 || burn_in >= iterations)
    throw InputError("config: need 0 <= burn_in < iterations");
  if (thin < 1) throw InputError("config: thin must be >= 1");
  if (chains < 1) throw InputError("config: chains must be >= 1");
  if (!(fd_delta > 0.0)) throw InputError("config: fd_delta must be > 0");
  if (sampler != "rj" && sampler != "conjugate")
    throw InputError("config: sampler must be rj or conjugate");
  if (sampler == "conjugate" && model != "gaussian")
    throw InputError(
        "config: the conjugate sampler supports only the gaussian model");
}

void config_set(SamplerConfig& config, const std::string& key,
                const std::string& value) {
  auto as_int = [&](const std::string& v) {
    try {
      return std::stoi(v);
    } catch (const std::exception&) {
      throw InputError("config: key " + key + ": bad integer \"" + v + "\"");
    }
  };
  auto as_double = [&](const std::string& v) {
    try {
      return std::stod(v);
    } catch (const std::exception&) {
      throw InputError("config: key " + key + ": bad number \"" + v + "\"");
    }
  };
  if (key == "model")
    config.model = value;
  else if (key == "sampler")
    config.sampler = value;
  else if (key == "trees" || key == "num_trees")
    config.num_trees = as_int(value);
  else if (key == "gamma")
    config.gamma = as_double(value);
  else if (key == "beta")
    config.beta = as_double(value);
  else if (key == "k")
    config.k = as_double(value);
  else if (key == "xi")
    config.xi = as_double(value);
  else if (key == "p_birth")
    config.p_birth = as_double(value);
  else if (key == "p_death")
    config.p_death = as_double(value);
  else if (key == "p_change")
    config.p_change = as_double(value);
  else if (key == "iterations")
    config.iterations = as_int(value);
  else if (key == "burn_in")
    config.burn_in = as_int(value);
  else if (key == "thin")
    config.thin = as_int(value);
  else if (key == "chains")
    config.chains = as_int(value);
  else if (key == "seed")
    config.seed = static_cast<std::uint64_t>(std::stoull(value));
  else if (key == "fd_delta")
    config.fd_delta = as_double(value);
  else if (key == "hetvar_link")
    config.hetvar_link = value;
  else if (key == "hetvar_variance")
    config.hetvar_variance = value;
  else
    throw InputError("config: unknown key \"" + key + "\"");
}

SamplerConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file: " + path);
  SamplerConfig config;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::size_t begin = line.find_first_not_of(" \t");
    if (begin == std::string::npos) continue;
    std::size_t end = line.find_last_not_of(" \t");
    line = line.substr(begin, end - begin + 1);
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(path + ": line " + std::to_string(lineno) +
                       ": expected key=value");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    auto trim = [](std::string s) {
      std::size_t b = s.find_first_not_of(" \t");
      if (b == std::string::npos) return std::string();
      std::size_t e = s.find_last_not_of(" \t");
      return s.substr(b, e - b + 1);
    };
    config_set(config, trim(key), trim(value));
  }
  return config;
}

std::unique_ptr<LikelihoodFamily> make_family_for_data(
    const SamplerConfig& config, const Dataset& data) {
  if (config.model == "gaussian") {
    double mean = 0.0;
    for (double y : data.y) mean += y;
    mean /= static_cast<double>(data.n);
    double var = 0.0;
    for (double y : data.y) var += (y - mean) * (y - mean);
    var = data.n > 1 ? var / static_cast<double>(data.n - 1) : 1.0;
    double sd = std::sqrt(std::max(var, 1e-12));
    auto family = make_gaussian_family(sd, sd);
    family->set_fd_delta(config.fd_delta);
    return family;
  }
  FamilyOptions options;
  options.fd_delta = config.fd_delta;
  options.hetvar.link = mean_link_from_name(config.hetvar_link);
  options.hetvar.variance = variance_fn_from_name(config.hetvar_variance);
  return make_family(config.model, options);
}

namespace {

SamplerOptions sampler_options_from(const SamplerConfig& config) {
  SamplerOptions options;
  options.tree_prior.gamma = config.gamma;
  options.tree_prior.beta = config.beta;
  double total = config.p_birth + config.p_death + config.p_change;
  options.move_probs.birth = config.p_birth / total;
  options.move_probs.death = config.p_death / total;
  options.move_probs.change = config.p_change / total;
  options.half_cauchy_scale =
      config.k / std::sqrt(static_cast<double>(config.num_trees));
  options.xi = config.xi;
  return options;
}

int total_leaves(const Forest& forest) {
  int total = 0;
  for (const DecisionTree& tree : forest.trees)
    total += static_cast<int>(tree.leaves().size());
  return total;
}

double quantile(std::vector<double> values, double prob) {
  std::sort(values.begin(), values.end());
  double pos = prob * static_cast<double>(values.size() - 1);
  std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= values.size()) return values.back();
  double frac = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[lo + 1] * frac;
}

}  // namespace

ChainTrace run_chain(const SamplerConfig& config, const Dataset& data,
                     const RunOptions& options) {
  config.validate();
  if (data.n == 0) throw InputError("run_chain: empty dataset");

  ChainTrace trace;
  trace.model = config.model;
  SamplerOptions sampler_options = sampler_options_from(config);
  bool use_conjugate = config.sampler == "conjugate";

  std::unique_ptr<LikelihoodFamily> proto = make_family_for_data(config, data);
  proto->validate(data);
  trace.nuisance_names = proto->nuisance_names();

  for (int chain = 0; chain < config.chains; ++chain) {
    Rng rng(mix_seed(config.seed, static_cast<std::uint64_t>(chain)));
    std::unique_ptr<LikelihoodFamily> family = proto->clone();

    Forest forest;
    forest.trees.assign(config.num_trees, DecisionTree());
    forest.sigma_mu = sampler_options.half_cauchy_scale;
    forest.split_probs.assign(data.p, 1.0 / static_cast<double>(data.p));
    SamplerState state = make_sampler_state(std::move(forest), data);

    MoveCounters previous = state.counters;
    for (int iter = 0; iter < config.iterations; ++iter) {
      gibbs_iteration(state, data, *family, sampler_options, rng,
                      use_conjugate);

      IterationRecord record;
      record.chain = chain;
      record.iteration = iter;
      record.log_posterior =
          log_posterior(state, data, *family, sampler_options);
      record.log_likelihood = 0.0;
      for (std::size_t i = 0; i < data.n; ++i)
        record.log_likelihood += family->log_density(
            data.y[i], data.has_delta() ? static_cast<int>(data.delta[i]) : 1,
            state.total_fit[i]);
      record.sigma_mu = state.forest.sigma_mu;
      record.nuisance = family->nuisance();
      record.birth_attempts =
          state.counters.attempts[kBirth] - previous.attempts[kBirth];
      record.birth_accepts =
          state.counters.accepts[kBirth] - previous.accepts[kBirth];
      record.death_attempts =
          state.counters.attempts[kDeath] - previous.attempts[kDeath];
      record.death_accepts =
          state.counters.accepts[kDeath] - previous.accepts[kDeath];
      record.change_attempts =
          state.counters.attempts[kChange] - previous.attempts[kChange];
      record.change_accepts =
          state.counters.accepts[kChange] - previous.accepts[kChange];
      record.leaves = total_leaves(state.forest);
      previous = state.counters;
      trace.iterations.push_back(std::move(record));

      if (iter >= config.burn_in &&
          (iter - config.burn_in) % config.thin == 0) {
        trace.kept_sigma_mu.push_back(state.forest.sigma_mu);
        trace.kept_nuisance.push_back(family->nuisance());
        trace.kept_split_probs.push_back(state.forest.split_probs);

        std::vector<double> loglik(data.n);
        for (std::size_t i = 0; i < data.n; ++i)
          loglik[i] = family->log_density(
              data.y[i],
              data.has_delta() ? static_cast<int>(data.delta[i]) : 1,
              state.total_fit[i]);
        trace.pointwise_loglik.push_back(std::move(loglik));

        if (options.eval_data) {
          const Dataset& eval = *options.eval_data;
          std::vector<double> fit(eval.n);
          for (std::size_t i = 0; i < eval.n; ++i)
            fit[i] = forest_eval(state.forest, eval.row(i));
          trace.eval_fit.push_back(std::move(fit));
        }
        if (options.keep_forests) trace.forests.push_back(state.forest);
        if (options.forest_sink)
          options.forest_sink(state.forest, *family, chain,
                              trace.num_kept() - 1);
      }
    }
  }
  return trace;
}

namespace {

// draws x points fit matrix from stored forests.
std::vector<std::vector<double>> fits_from_forests(const ChainTrace& trace,
                                                   const Dataset& query) {
  if (trace.forests.empty())
    throw InputError("trace holds no forest snapshots; rerun with them kept");
  std::vector<std::vector<double>> fits(trace.forests.size());
  for (std::size_t d = 0; d < trace.forests.size(); ++d) {
    fits[d].resize(query.n);
    for (std::size_t i = 0; i < query.n; ++i)
      fits[d][i] = forest_eval(trace.forests[d], query.row(i));
  }
  return fits;
}

PosteriorSummary summarize(const ChainTrace& trace,
                           const LikelihoodFamily& family,
                           const std::vector<std::vector<double>>& fits,
                           std::size_t num_points) {
  std::size_t draws = fits.size();
  if (draws == 0) throw InputError("no kept draws to summarize");
  PosteriorSummary out;
  out.mean.assign(num_points, 0.0);
  out.lower.assign(num_points, 0.0);
  out.upper.assign(num_points, 0.0);
  out.transform_mean.assign(num_points, 0.0);
  out.transform_lower.assign(num_points, 0.0);
  out.transform_upper.assign(num_points, 0.0);

  // Transforms may read the per-draw nuisance, so apply them draw-major.
  std::vector<std::vector<double>> transformed(
      draws, std::vector<double>(num_points));
  std::unique_ptr<LikelihoodFamily> worker = family.clone();
  for (std::size_t d = 0; d < draws; ++d) {
    if (!trace.kept_nuisance.empty())
      worker->set_nuisance(trace.kept_nuisance[d]);
    for (std::size_t i = 0; i < num_points; ++i)
      transformed[d][i] = worker->predict_transform(fits[d][i]);
  }

  std::vector<double> column(draws);
  for (std::size_t i = 0; i < num_points; ++i) {
    for (std::size_t d = 0; d < draws; ++d) column[d] = fits[d][i];
    out.mean[i] = 0.0;
    for (double v : column) out.mean[i] += v;
    out.mean[i] /= static_cast<double>(draws);
    out.lower[i] = quantile(column, 0.025);
    out.upper[i] = quantile(column, 0.975);
    for (std::size_t d = 0; d < draws; ++d) column[d] = transformed[d][i];
    out.transform_mean[i] = 0.0;
    for (double v : column) out.transform_mean[i] += v;
    out.transform_mean[i] /= static_cast<double>(draws);
    out.transform_lower[i] = quantile(column, 0.025);
    out.transform_upper[i] = quantile(column, 0.975);
  }
  return out;
}

}  // namespace

PosteriorSummary predict(const ChainTrace& trace,
                         const LikelihoodFamily& family,
                         const Dataset& query) {
  return summarize(trace, family, fits_from_forests(trace, query), query.n);
}

PosteriorSummary predict_at_evals(const ChainTrace& trace,
                                  const LikelihoodFamily& family) {
  if (trace.eval_fit.empty())
    throw InputError("trace holds no eval-point fits");
  return summarize(trace, family, trace.eval_fit,
                   trace.eval_fit.front().size());
}

namespace {

SurvivalCurve survival_from_fits(const ChainTrace& trace,
                                 const LikelihoodFamily& family,
                                 const std::vector<double>& fit_draws,
                                 const std::vector<double>& times) {
  if (!family.has_survival())
    throw InputError(family.name() + " does not define survival curves");
  std::size_t draws = fit_draws.size();
  if (draws == 0) throw InputError("no kept draws to summarize");
  SurvivalCurve curve;
  curve.times = times;
  curve.mean.assign(times.size(), 0.0);
  curve.lower.assign(times.size(), 0.0);
  curve.upper.assign(times.size(), 0.0);
  std::unique_ptr<LikelihoodFamily> worker = family.clone();
  std::vector<std::vector<double>> values(
      times.size(), std::vector<double>(draws));
  for (std::size_t d = 0; d < draws; ++d) {
    if (!trace.kept_nuisance.empty())
      worker->set_nuisance(trace.kept_nuisance[d]);
    for (std::size_t k = 0; k < times.size(); ++k)
      values[k][d] = worker->survival(times[k], fit_draws[d]);
  }
  for (std::size_t k = 0; k < times.size(); ++k) {
    for (double v : values[k]) curve.mean[k] += v;
    curve.mean[k] /= static_cast<double>(draws);
    curve.lower[k] = quantile(values[k], 0.025);
    curve.upper[k] = quantile(values[k], 0.975);
  }
  return curve;
}

}  // namespace

SurvivalCurve survival_curve(const ChainTrace& trace,
                             const LikelihoodFamily& family, const double* x,
                             const std::vector<double>& times) {
  if (trace.forests.empty())
    throw InputError("trace holds no forest snapshots; rerun with them kept");
  std::vector<double> fit_draws(trace.forests.size());
  for (std::size_t d = 0; d < trace.forests.size(); ++d)
    fit_draws[d] = forest_eval(trace.forests[d], x);
  return survival_from_fits(trace, family, fit_draws, times);
}

SurvivalCurve survival_curve_at(const ChainTrace& trace,
                                const LikelihoodFamily& family, int index,
                                const std::vector<double>& times) {
  if (trace.eval_fit.empty())
    throw InputError("trace holds no eval-point fits");
  std::vector<double> fit_draws(trace.eval_fit.size());
  for (std::size_t d = 0; d < trace.eval_fit.size(); ++d)
    fit_draws[d] = trace.eval_fit[d][index];
  return survival_from_fits(trace, family, fit_draws, times);
}

LpmlResult lpml(const std::vector<std::vector<double>>& pointwise_loglik) {
  if (pointwise_loglik.empty())
    throw InputError("lpml: empty draw set");
  std::size_t draws = pointwise_loglik.size();
  std::size_t n = pointwise_loglik.front().size();
  if (n == 0) throw InputError("lpml: no observations");
  for (const auto& row : pointwise_loglik) {
    if (row.size() != n)
      throw InputError("lpml: ragged log-likelihood matrix");
    for (double v : row)
      if (!std::isfinite(v))
        throw InputError("lpml: non-finite log-likelihood value");
  }
  LpmlResult result;
  result.log_cpo.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double max_neg = -std::numeric_limits<double>::infinity();
    for (std::size_t d = 0; d < draws; ++d)
      max_neg = std::max(max_neg, -pointwise_loglik[d][i]);
    double sum = 0.0;
    for (std::size_t d = 0; d < draws; ++d)
      sum += std::exp(-pointwise_loglik[d][i] - max_neg);
    // log CPO_i = log M - logsumexp_d(-ll_di)
    result.log_cpo[i] =
        std::log(static_cast<double>(draws)) - (max_neg + std::log(sum));
    result.lpml += result.log_cpo[i];
  }
  return result;
}

TruthRecord load_truth(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open truth file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty truth file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::stringstream header(line);
  std::string name;
  int r0_col = -1, mean_col = -1, col = 0;
  std::vector<std::string> names;
  while (std::getline(header, name, ',')) {
    if (name == "r0") r0_col = col;
    if (name == "mean") mean_col = col;
    names.push_back(name);
    ++col;
  }
  if (r0_col < 0 && mean_col < 0)
    throw ParseError(path + ": need an r0 or mean column");
  TruthRecord truth;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string field;
    int c = 0;
    while (std::getline(row, field, ',')) {
      try {
        if (c == r0_col) truth.r0.push_back(std::stod(field));
        if (c == mean_col) truth.mean.push_back(std::stod(field));
      } catch (const std::exception&) {
        throw ParseError(path + ": line " + std::to_string(lineno) +
                         ": bad number \"" + field + "\"");
      }
      ++c;
    }
  }
  return truth;
}

void save_truth(const TruthRecord& truth, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open file for writing: " + path);
  bool has_r0 = !truth.r0.empty();
  bool has_mean = !truth.mean.empty();
  out << (has_r0 && has_mean ? "r0,mean" : has_r0 ? "r0" : "mean") << "\n";
  std::size_t n = has_r0 ? truth.r0.size() : truth.mean.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (has_r0) out << format_double(truth.r0[i]);
    if (has_r0 && has_mean) out << ",";
    if (has_mean) out << format_double(truth.mean[i]);
    out << "\n";
  }
}

HeldoutMetrics heldout_metrics(const ChainTrace& trace,
                               const LikelihoodFamily& family,
                               const Dataset& heldout,
                               const TruthRecord& truth) {
  std::vector<std::vector<double>> fits;
  const std::vector<std::vector<double>>* fit_rows = nullptr;
  if (!trace.eval_fit.empty() &&
      trace.eval_fit.front().size() == heldout.n) {
    fit_rows = &trace.eval_fit;
  } else {
    fits = fits_from_forests(trace, heldout);
    fit_rows = &fits;
  }
  if (!truth.r0.empty() && truth.r0.size() != heldout.n)
    throw InputError("truth r0 length does not match held-out rows");
  if (!truth.mean.empty() && truth.mean.size() != heldout.n)
    throw InputError("truth mean length does not match held-out rows");

  std::size_t draws = fit_rows->size();
  HeldoutMetrics metrics;
  metrics.mse.resize(draws);
  metrics.loglik.resize(draws);
  if (!truth.r0.empty()) metrics.rmse_r.resize(draws);
  if (!truth.mean.empty()) metrics.rmse_mean.resize(draws);

  std::unique_ptr<LikelihoodFamily> worker = family.clone();
  double n = static_cast<double>(heldout.n);
  for (std::size_t d = 0; d < draws; ++d) {
    if (!trace.kept_nuisance.empty())
      worker->set_nuisance(trace.kept_nuisance[d]);
    const std::vector<double>& fit = (*fit_rows)[d];
    double sse = 0.0, loglik = 0.0, sse_r = 0.0, sse_mean = 0.0;
    for (std::size_t i = 0; i < heldout.n; ++i) {
      double r = heldout.y[i] - fit[i];
      sse += r * r;
      loglik += worker->log_density(
          heldout.y[i],
          heldout.has_delta() ? static_cast<int>(heldout.delta[i]) : 1,
          fit[i]);
      if (!truth.r0.empty()) {
        double e = truth.r0[i] - fit[i];
        sse_r += e * e;
      }
      if (!truth.mean.empty()) {
        double e = truth.mean[i] - worker->predict_transform(fit[i]);
        sse_mean += e * e;
      }
    }
    metrics.mse[d] = sse / n;
    metrics.loglik[d] = loglik;
    if (!truth.r0.empty()) metrics.rmse_r[d] = std::sqrt(sse_r / n);
    if (!truth.mean.empty()) metrics.rmse_mean[d] = std::sqrt(sse_mean / n);
  }
  return metrics;
}

double gengamma_variance(double sigma, double alpha) {
  return sigma * sigma * trigamma(alpha);
}

void write_trace_csv(const ChainTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open file for writing: " + path);
  out << "chain,iteration,log_posterior,log_likelihood,sigma_mu";
  for (const std::string& name : trace.nuisance_names) out << "," << name;
  out << ",birth_attempts,birth_accepts,death_attempts,death_accepts,"
         "change_attempts,change_accepts,leaves\n";
  for (const IterationRecord& r : trace.iterations) {
    out << r.chain << "," << r.iteration << ","
        << format_double(r.log_posterior) << ","
        << format_double(r.log_likelihood) << ","
        << format_double(r.sigma_mu);
    for (double v : r.nuisance) out << "," << format_double(v);
    out << "," << r.birth_attempts << "," << r.birth_accepts << ","
        << r.death_attempts << "," << r.death_accepts << ","
        << r.change_attempts << "," << r.change_accepts << "," << r.leaves
        << "\n";
  }
}

void write_pointwise_csv(const ChainTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open file for writing: " + path);
  if (trace.pointwise_loglik.empty())
    throw InputError("no kept draws; nothing to write");
  std::size_t n = trace.pointwise_loglik.front().size();
  out << "draw";
  for (std::size_t i = 0; i < n; ++i) out << ",ll_" << (i + 1);
  out << "\n";
  for (std::size_t d = 0; d < trace.pointwise_loglik.size(); ++d) {
    out << d;
    for (double v : trace.pointwise_loglik[d]) out << "," << format_double(v);
    out << "\n";
  }
}

std::vector<std::vector<double>> load_pointwise_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open pointwise log-likelihood file: " +
                            path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file");
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<double> row;
    bool first = true;
    while (std::getline(ss, field, ',')) {
      if (first) {  // draw index column
        first = false;
        continue;
      }
      try {
        row.push_back(std::stod(field));
      } catch (const std::exception&) {
        throw ParseError(path + ": line " + std::to_string(lineno) +
                         ": bad number \"" + field + "\"");
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace gbart
