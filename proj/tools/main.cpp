#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gbart/data.hpp"
#include "gbart/engine.hpp"
#include "gbart/error.hpp"
#include "gbart/models.hpp"
#include "gbart/serialize.hpp"
#include "gbart/simulate.hpp"

namespace fs = std::filesystem;

namespace {

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string field;
  while (std::getline(ss, field, ',')) {
    try {
      out.push_back(std::stod(field));
    } catch (const std::exception&) {
      throw gbart::InputError("bad grid value \"" + field + "\"");
    }
  }
  if (out.empty()) throw gbart::InputError("empty time grid");
  return out;
}

// Accepts both the short scenario names and the friedman_-prefixed ones,
// with the AFT error family either suffixed or given via --aft-error.
std::string resolve_scenario(std::string name, gbart::ScenarioOptions& opts) {
  if (name.rfind("friedman_", 0) == 0) name = name.substr(9);
  if (name == "aft_loglogistic") {
    opts.aft = "loglogistic";
    name = "aft";
  } else if (name == "aft_gengamma") {
    opts.aft = "gengamma";
    name = "aft";
  }
  return name;
}

struct TraceDir {
  std::vector<gbart::ForestSnapshot> snapshots;
  gbart::ChainTrace trace;
  std::string model;
};

TraceDir load_trace_dir(const std::string& dir, bool with_pointwise) {
  TraceDir loaded;
  loaded.snapshots = gbart::load_forests(dir + "/forests.txt");
  if (loaded.snapshots.empty())
    throw gbart::InputError(dir + "/forests.txt holds no forest snapshots");
  loaded.model = loaded.snapshots.front().model;
  for (const gbart::ForestSnapshot& snap : loaded.snapshots) {
    if (snap.model != loaded.model)
      throw gbart::InputError("forest file mixes models " + loaded.model +
                              " and " + snap.model);
    loaded.trace.forests.push_back(snap.forest);
    loaded.trace.kept_nuisance.push_back(snap.nuisance);
  }
  loaded.trace.model = loaded.model;
  if (with_pointwise)
    loaded.trace.pointwise_loglik =
        gbart::load_pointwise_csv(dir + "/pointwise_loglik.csv");
  return loaded;
}

std::unique_ptr<gbart::LikelihoodFamily> family_for(
    const std::string& model, const std::string& hetvar_link,
    const std::string& hetvar_variance) {
  gbart::FamilyOptions options;
  options.hetvar.link = gbart::mean_link_from_name(hetvar_link);
  options.hetvar.variance = gbart::variance_fn_from_name(hetvar_variance);
  return gbart::make_family(model, options);
}

void add_simulate(CLI::App& app) {
  auto* cmd = app.add_subcommand("simulate", "Generate a benchmark dataset");
  auto scenario = std::make_shared<std::string>();
  auto opts = std::make_shared<gbart::ScenarioOptions>();
  auto out = std::make_shared<std::string>("data.csv");
  auto truth_out = std::make_shared<std::string>();
  auto heldout_out = std::make_shared<std::string>();
  auto heldout_truth_out = std::make_shared<std::string>();
  cmd->add_option("--scenario", *scenario,
                  "gaussian | logistic | hetpoisson | aft_loglogistic | "
                  "aft_gengamma | gammashape (friedman_ prefix accepted)")
      ->required();
  cmd->add_option("--n", opts->n, "Training rows (0 = scenario default)");
  cmd->add_option("--p", opts->p, "Features (0 = scenario default)");
  cmd->add_option("--seed", opts->seed, "RNG seed");
  cmd->add_option("--heldout-n", opts->heldout, "Held-out rows");
  cmd->add_option("--aft-error", opts->aft,
                  "AFT error family: loglogistic | gengamma");
  cmd->add_option("--out", *out, "Training CSV path");
  cmd->add_option("--truth", *truth_out, "Training truth CSV path");
  cmd->add_option("--heldout-out", *heldout_out, "Held-out CSV path");
  cmd->add_option("--heldout-truth", *heldout_truth_out,
                  "Held-out truth CSV path");
  cmd->callback([=]() {
    std::string name = resolve_scenario(*scenario, *opts);
    gbart::SimulatedScenario sim = gbart::simulate_scenario(name, *opts);
    gbart::save_dataset(sim.train, *out);
    if (!truth_out->empty()) gbart::save_truth(sim.train_truth, *truth_out);
    if (!heldout_out->empty()) gbart::save_dataset(sim.heldout, *heldout_out);
    if (!heldout_truth_out->empty())
      gbart::save_truth(sim.heldout_truth, *heldout_truth_out);
    std::cout << "scenario " << name << ": wrote " << sim.train.n << " rows ("
              << sim.train.p << " features) to " << *out
              << "; suggested model: " << sim.model << "\n";
  });
}

struct FitFlags {
  std::string model;
  std::string data_path;
  std::string config_path;
  std::string out_dir = "fit";
  std::string sampler;
  std::string hetvar_link;
  std::string hetvar_variance;
  int trees = 0;
  int iterations = 0;
  int burn_in = -1;
  int thin = 0;
  int chains = 0;
  std::uint64_t seed = 0;
  double gamma = 0.0, beta = 0.0, k = 0.0, xi = 0.0, fd_delta = 0.0;
  double p_birth = 0.0, p_death = 0.0, p_change = 0.0;
};

void add_fit(CLI::App& app) {
  auto* cmd = app.add_subcommand("fit", "Run the posterior sampler");
  auto f = std::make_shared<FitFlags>();
  cmd->add_option("--data", f->data_path, "Training CSV")->required();
  cmd->add_option("--model", f->model,
                  "gaussian | logistic | poisson | hetvar | aft_loglogistic "
                  "| aft_gengamma | weibull | gamma_shape");
  cmd->add_option("--config", f->config_path, "key=value config file");
  cmd->add_option("--out-dir", f->out_dir, "Output directory");
  cmd->add_option("--sampler", f->sampler, "rj | conjugate");
  cmd->add_option("--trees", f->trees, "Ensemble size");
  cmd->add_option("--iterations", f->iterations, "Total sweeps");
  cmd->add_option("--burn-in", f->burn_in, "Discarded sweeps");
  cmd->add_option("--thin", f->thin, "Keep every thin-th draw");
  cmd->add_option("--chains", f->chains, "Independent chains");
  cmd->add_option("--seed", f->seed, "RNG seed");
  cmd->add_option("--gamma", f->gamma, "Branching prior gamma");
  cmd->add_option("--beta", f->beta, "Branching prior beta");
  cmd->add_option("--k", f->k, "Leaf-scale prior multiplier");
  cmd->add_option("--xi", f->xi, "Dirichlet concentration");
  cmd->add_option("--fd-delta", f->fd_delta, "Finite-difference step");
  cmd->add_option("--p-birth", f->p_birth, "Birth move weight");
  cmd->add_option("--p-death", f->p_death, "Death move weight");
  cmd->add_option("--p-change", f->p_change, "Change move weight");
  cmd->add_option("--hetvar-link", f->hetvar_link,
                  "hetvar mean link: identity | exp");
  cmd->add_option("--hetvar-variance", f->hetvar_variance,
                  "hetvar variance function: constant | linear | quadratic");
  cmd->callback([cmd, f]() {
    gbart::SamplerConfig config;
    if (!f->config_path.empty()) config = gbart::load_config(f->config_path);
    if (cmd->count("--model")) config.model = f->model;
    if (cmd->count("--sampler")) config.sampler = f->sampler;
    if (cmd->count("--trees")) config.num_trees = f->trees;
    if (cmd->count("--iterations")) config.iterations = f->iterations;
    if (cmd->count("--burn-in")) config.burn_in = f->burn_in;
    if (cmd->count("--thin")) config.thin = f->thin;
    if (cmd->count("--chains")) config.chains = f->chains;
    if (cmd->count("--seed")) config.seed = f->seed;
    if (cmd->count("--gamma")) config.gamma = f->gamma;
    if (cmd->count("--beta")) config.beta = f->beta;
    if (cmd->count("--k")) config.k = f->k;
    if (cmd->count("--xi")) config.xi = f->xi;
    if (cmd->count("--fd-delta")) config.fd_delta = f->fd_delta;
    if (cmd->count("--p-birth")) config.p_birth = f->p_birth;
    if (cmd->count("--p-death")) config.p_death = f->p_death;
    if (cmd->count("--p-change")) config.p_change = f->p_change;
    if (cmd->count("--hetvar-link")) config.hetvar_link = f->hetvar_link;
    if (cmd->count("--hetvar-variance"))
      config.hetvar_variance = f->hetvar_variance;
    config.validate();

    gbart::Dataset data = gbart::load_dataset(f->data_path);
    fs::create_directories(f->out_dir);
    gbart::save_scaling(data.scaling, f->out_dir + "/train_scaling.csv");

    std::ofstream forests(f->out_dir + "/forests.txt");
    if (!forests)
      throw gbart::InputError("cannot open file for writing: " + f->out_dir +
                              "/forests.txt");
    gbart::RunOptions options;
    options.forest_sink = [&](const gbart::Forest& forest,
                              const gbart::LikelihoodFamily& family,
                              int chain, int kept) {
      gbart::ForestSnapshot snapshot;
      snapshot.draw = kept;
      snapshot.chain = chain;
      snapshot.model = config.model;
      snapshot.forest = forest;
      snapshot.nuisance = family.nuisance();
      gbart::write_forest_snapshot(forests, snapshot);
    };
    gbart::ChainTrace trace = gbart::run_chain(config, data, options);
    gbart::write_trace_csv(trace, f->out_dir + "/trace.csv");
    gbart::write_pointwise_csv(trace, f->out_dir + "/pointwise_loglik.csv");

    long attempts[3] = {0, 0, 0};
    long accepts[3] = {0, 0, 0};
    for (const gbart::IterationRecord& r : trace.iterations) {
      attempts[0] += r.birth_attempts;
      accepts[0] += r.birth_accepts;
      attempts[1] += r.death_attempts;
      accepts[1] += r.death_accepts;
      attempts[2] += r.change_attempts;
      accepts[2] += r.change_accepts;
    }
    auto rate = [](long acc, long att) {
      return att == 0 ? 0.0 : static_cast<double>(acc) /
                                  static_cast<double>(att);
    };
    std::cout << "fit " << config.model << ": " << config.chains
              << " chain(s) x " << config.iterations << " sweeps, "
              << trace.num_kept() << " kept draws\n"
              << "acceptance rates: birth " << rate(accepts[0], attempts[0])
              << ", death " << rate(accepts[1], attempts[1]) << ", change "
              << rate(accepts[2], attempts[2]) << "\n"
              << "outputs in " << f->out_dir << "\n";
  });
}

void add_predict(CLI::App& app) {
  auto* cmd = app.add_subcommand(
      "predict", "Evaluate stored posterior draws at new points");
  auto forest_dir = std::make_shared<std::string>();
  auto data_path = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>("predictions.csv");
  auto model = std::make_shared<std::string>();
  auto grid_text = std::make_shared<std::string>();
  auto survival_out = std::make_shared<std::string>("survival.csv");
  auto hetvar_link = std::make_shared<std::string>("exp");
  auto hetvar_variance = std::make_shared<std::string>("linear");
  cmd->add_option("--forest-dir", *forest_dir, "Directory written by fit")
      ->required();
  cmd->add_option("--data", *data_path, "Query CSV (y column required)")
      ->required();
  cmd->add_option("--out", *out, "Predictions CSV path");
  cmd->add_option("--model", *model, "Expected model name (checked)");
  cmd->add_option("--survival-grid", *grid_text,
                  "Comma-separated times for survival curves");
  cmd->add_option("--survival-out", *survival_out, "Survival CSV path");
  cmd->add_option("--hetvar-link", *hetvar_link,
                  "hetvar mean link used at fit time");
  cmd->add_option("--hetvar-variance", *hetvar_variance,
                  "hetvar variance function used at fit time");
  cmd->callback([=]() {
    TraceDir loaded = load_trace_dir(*forest_dir, false);
    if (!model->empty() && *model != loaded.model)
      throw gbart::InputError("forest file stores model " + loaded.model +
                              ", not " + *model);
    std::vector<gbart::ColumnScale> scaling =
        gbart::load_scaling(*forest_dir + "/train_scaling.csv");
    gbart::Dataset query = gbart::load_dataset(*data_path, scaling);
    std::unique_ptr<gbart::LikelihoodFamily> family =
        family_for(loaded.model, *hetvar_link, *hetvar_variance);

    gbart::PosteriorSummary summary =
        gbart::predict(loaded.trace, *family, query);
    std::ofstream ofs(*out);
    if (!ofs)
      throw gbart::InputError("cannot open file for writing: " + *out);
    ofs << "row,fit_mean,fit_lower,fit_upper,transform_mean,"
           "transform_lower,transform_upper\n";
    for (std::size_t i = 0; i < query.n; ++i)
      ofs << (i + 1) << "," << gbart::format_double(summary.mean[i]) << ","
          << gbart::format_double(summary.lower[i]) << ","
          << gbart::format_double(summary.upper[i]) << ","
          << gbart::format_double(summary.transform_mean[i]) << ","
          << gbart::format_double(summary.transform_lower[i]) << ","
          << gbart::format_double(summary.transform_upper[i]) << "\n";
    std::cout << "wrote " << query.n << " predictions to " << *out << "\n";

    if (!grid_text->empty()) {
      std::vector<double> times = parse_grid(*grid_text);
      std::ofstream sfs(*survival_out);
      if (!sfs)
        throw gbart::InputError("cannot open file for writing: " +
                                *survival_out);
      sfs << "row,time,mean,lower,upper\n";
      for (std::size_t i = 0; i < query.n; ++i) {
        gbart::SurvivalCurve curve = gbart::survival_curve(
            loaded.trace, *family, query.row(i), times);
        for (std::size_t t = 0; t < times.size(); ++t)
          sfs << (i + 1) << "," << gbart::format_double(curve.times[t]) << ","
              << gbart::format_double(curve.mean[t]) << ","
              << gbart::format_double(curve.lower[t]) << ","
              << gbart::format_double(curve.upper[t]) << "\n";
      }
      std::cout << "wrote survival curves to " << *survival_out << "\n";
    }
  });
}

void add_diagnose(CLI::App& app) {
  auto* cmd = app.add_subcommand(
      "diagnose", "Held-out metric series and LPML from a fit directory");
  auto trace_dir = std::make_shared<std::string>();
  auto heldout_path = std::make_shared<std::string>();
  auto truth_path = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>("metrics.csv");
  auto hetvar_link = std::make_shared<std::string>("exp");
  auto hetvar_variance = std::make_shared<std::string>("linear");
  cmd->add_option("--trace-dir", *trace_dir, "Directory written by fit")
      ->required();
  cmd->add_option("--heldout", *heldout_path, "Held-out CSV")->required();
  cmd->add_option("--truth", *truth_path,
                  "Held-out truth CSV with r0 and/or mean columns");
  cmd->add_option("--out", *out, "Metrics CSV path");
  cmd->add_option("--hetvar-link", *hetvar_link,
                  "hetvar mean link used at fit time");
  cmd->add_option("--hetvar-variance", *hetvar_variance,
                  "hetvar variance function used at fit time");
  cmd->callback([=]() {
    TraceDir loaded = load_trace_dir(*trace_dir, true);
    std::vector<gbart::ColumnScale> scaling =
        gbart::load_scaling(*trace_dir + "/train_scaling.csv");
    gbart::Dataset heldout = gbart::load_dataset(*heldout_path, scaling);
    std::unique_ptr<gbart::LikelihoodFamily> family =
        family_for(loaded.model, *hetvar_link, *hetvar_variance);
    family->validate(heldout);
    gbart::TruthRecord truth;
    if (!truth_path->empty()) truth = gbart::load_truth(*truth_path);

    gbart::HeldoutMetrics metrics =
        gbart::heldout_metrics(loaded.trace, *family, heldout, truth);
    std::ofstream ofs(*out);
    if (!ofs)
      throw gbart::InputError("cannot open file for writing: " + *out);
    ofs << "draw,mse,loglik";
    if (!metrics.rmse_r.empty()) ofs << ",rmse_r";
    if (!metrics.rmse_mean.empty()) ofs << ",rmse_mean";
    ofs << "\n";
    for (std::size_t d = 0; d < metrics.mse.size(); ++d) {
      ofs << d << "," << gbart::format_double(metrics.mse[d]) << ","
          << gbart::format_double(metrics.loglik[d]);
      if (!metrics.rmse_r.empty())
        ofs << "," << gbart::format_double(metrics.rmse_r[d]);
      if (!metrics.rmse_mean.empty())
        ofs << "," << gbart::format_double(metrics.rmse_mean[d]);
      ofs << "\n";
    }

    gbart::LpmlResult cpo = gbart::lpml(loaded.trace.pointwise_loglik);
    fs::path lpml_path = fs::path(*out).parent_path() / "lpml.csv";
    std::ofstream lfs(lpml_path);
    if (!lfs)
      throw gbart::InputError("cannot open file for writing: " +
                              lpml_path.string());
    lfs << "row,log_cpo\n";
    for (std::size_t i = 0; i < cpo.log_cpo.size(); ++i)
      lfs << (i + 1) << "," << gbart::format_double(cpo.log_cpo[i]) << "\n";
    lfs << "total," << gbart::format_double(cpo.lpml) << "\n";

    double mean_mse = 0.0;
    for (double v : metrics.mse) mean_mse += v;
    mean_mse /= static_cast<double>(metrics.mse.size());
    std::cout << "held-out draws: " << metrics.mse.size()
              << ", mean MSE: " << mean_mse << ", LPML: " << cpo.lpml << "\n"
              << "metrics in " << *out << ", per-observation CPO in "
              << lpml_path.string() << "\n";
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Additive regression tree sampler for pluggable outcome models"};
  app.require_subcommand(1);
  add_simulate(app);
  add_fit(app);
  add_predict(app);
  add_diagnose(app);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
