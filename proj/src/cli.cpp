#include "gpetas/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gpetas/baseline.hpp"
#include "gpetas/catalog.hpp"
#include "gpetas/evaluation.hpp"
#include "gpetas/gibbs.hpp"
#include "gpetas/serialization.hpp"
#include "gpetas/simulator.hpp"

namespace fs = std::filesystem;

namespace gpetas {
namespace {

constexpr const char* kVersion = "gpetas 0.1.0";

struct CommonOpts {
  std::string config_path;
  std::string output_dir = ".";
  std::uint64_t seed = 0;
  bool seed_set = false;
};

const Json& require_field(const Json& j, const char* key,
                          const std::string& path) {
  if (!j.is_object() || !j.contains(key))
    throw ConfigError("missing config field: " +
                      (path.empty() ? std::string(key) : path + "." + key));
  return j.at(key);
}

std::uint64_t resolve_seed(const Json& cfg, const CommonOpts& opts,
                           const char* command) {
  if (opts.seed_set) return opts.seed;
  if (cfg.contains("seed")) return cfg.at("seed").get<std::uint64_t>();
  throw ConfigError(std::string(command) +
                    ": a seed is required (config field `seed` or --seed)");
}

std::string fmt_rate(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

void write_manifest(const fs::path& dir, const std::string& command,
                    const Json& seed, const Json& effective_cfg,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs) {
  Json m{{"type", "gpetas-manifest"},
         {"version", kVersion},
         {"command", command},
         {"seed", seed},
         {"config_hash", fnv1a_hex(effective_cfg.dump())},
         {"inputs", inputs},
         {"outputs", outputs}};
  write_text_file((dir / "manifest.json").string(), m.dump(2) + "\n");
}

// Background section of a simulate/evaluate config:
//   {"source":"constant","value":v} | {"source":"piecewise","cells":[...]}
//   | {"source":"gp","nu":[nu0,nu1,nu2]} (simulate only).
std::vector<PiecewiseCell> cells_from_json(const Json& j,
                                           const std::string& path) {
  std::vector<PiecewiseCell> cells;
  for (const auto& cj : j) {
    PiecewiseCell c;
    c.x0 = require_field(cj, "x0", path).get<double>();
    c.x1 = require_field(cj, "x1", path).get<double>();
    c.y0 = require_field(cj, "y0", path).get<double>();
    c.y1 = require_field(cj, "y1", path).get<double>();
    c.value = require_field(cj, "value", path).get<double>();
    if (c.x1 <= c.x0 || c.y1 <= c.y0 || c.value < 0.0)
      throw ConfigError(path + ": cells need x0<x1, y0<y1, value>=0");
    cells.push_back(c);
  }
  if (cells.empty()) throw ConfigError(path + ": needs at least one cell");
  return cells;
}

Catalog load_or_warn(const std::string& path, const DomainWindow& window) {
  LoadResult lr = load_catalog(path, window);
  if (lr.n_dropped_window > 0 || lr.n_dropped_magnitude > 0)
    std::cerr << "note: " << path << ": dropped " << lr.n_dropped_window
              << " events outside the window, " << lr.n_dropped_magnitude
              << " below m0\n";
  if (lr.extra_columns)
    std::cerr << "note: " << path << ": extra columns beyond t,x,y,m ignored\n";
  return std::move(lr.catalog);
}

// ---- simulate ----

int cmd_simulate(const CommonOpts& opts) {
  Json cfg = parse_json_file(opts.config_path);
  DomainWindow window = window_from_json(require_field(cfg, "window", ""));
  const Json& sj = require_field(cfg, "simulate", "");

  SimConfig sc;
  sc.window = window;
  sc.lambda_bar = require_field(sj, "lambda_bar", "simulate").get<double>();
  const Json& bj = require_field(sj, "background", "simulate");
  const std::string source =
      require_field(bj, "source", "simulate.background").get<std::string>();
  if (source == "gp") {
    sc.source = SimConfig::Source::gp;
    sc.nu = nu_from_json(require_field(bj, "nu", "simulate.background"));
    sc.nu.validate();
  } else if (source == "constant") {
    sc.source = SimConfig::Source::explicit_field;
    const double v =
        require_field(bj, "value", "simulate.background").get<double>();
    if (v < 0.0 || v > sc.lambda_bar)
      throw ConfigError(
          "simulate.background.value must lie in [0, lambda_bar]");
    sc.field = make_constant_field(v);
  } else if (source == "piecewise") {
    sc.source = SimConfig::Source::explicit_field;
    auto cells = cells_from_json(
        require_field(bj, "cells", "simulate.background"),
        "simulate.background.cells");
    for (const auto& c : cells)
      if (c.value > sc.lambda_bar)
        throw ConfigError(
            "simulate.background: cell value exceeds lambda_bar (the "
            "thinning bound must dominate the field)");
    sc.field = make_piecewise_field(std::move(cells));
  } else {
    throw ConfigError("simulate.background.source must be one of "
                      "gp|constant|piecewise, got `" + source + "`");
  }
  sc.theta = theta_from_json(require_field(sj, "theta", "simulate"));
  sc.theta.validate();
  sc.beta = sj.value("beta", std::log(10.0));
  if (!(sc.beta > 0.0)) throw ConfigError("simulate.beta must be > 0");
  sc.seed = resolve_seed(cfg, opts, "simulate");
  sc.validate();

  BranchedCatalog bc = simulate_catalog(sc);
  std::size_t n_bg = 0;
  for (int z : bc.z) n_bg += (z == 0);

  fs::create_directories(opts.output_dir);
  const fs::path dir(opts.output_dir);
  write_catalog(bc.catalog, (dir / "catalog.csv").string());

  Json truth{{"type", "gpetas-truth"},
             {"version", 1},
             {"seed", sc.seed},
             {"window", window_to_json(window)},
             {"lambda_bar", sc.lambda_bar},
             {"background", bj},
             {"theta", theta_to_json(sc.theta)},
             {"beta", sc.beta},
             {"n_events", bc.catalog.size()},
             {"n_background", n_bg},
             {"z", bc.z}};
  write_text_file((dir / "truth.json").string(), truth.dump(2) + "\n");

  Json eff{{"window", window_to_json(window)},
           {"seed", sc.seed},
           {"simulate",
            Json{{"lambda_bar", sc.lambda_bar},
                 {"background", bj},
                 {"theta", theta_to_json(sc.theta)},
                 {"beta", sc.beta}}}};
  write_manifest(dir, "simulate", sc.seed, eff, {},
                 {"catalog.csv", "truth.json"});

  std::cout << "simulate: " << bc.catalog.size() << " events (" << n_bg
            << " background, " << bc.catalog.size() - n_bg
            << " triggered) -> " << opts.output_dir << "\n";
  return 0;
}

// ---- fit-gp ----

struct FitGpOpts {
  CommonOpts common;
  std::vector<std::uint64_t> samples_flag, burn_in_flag, thin_flag,
      checkpoint_every_flag;
  std::vector<int> probe_grid_flag;
  std::string priors_path;
  std::string resume_path;
};

int cmd_fit_gp(const FitGpOpts& o) {
  Json cfg = parse_json_file(o.common.config_path);
  DomainWindow window = window_from_json(require_field(cfg, "window", ""));
  const Json& fj = require_field(cfg, "fit_gp", "");
  const std::string catalog_path =
      require_field(fj, "catalog", "fit_gp").get<std::string>();
  Catalog cat = load_or_warn(catalog_path, window);
  if (cat.empty()) throw DataError(catalog_path + ": no events in the window");

  GibbsConfig gc;
  gc.n_samples = fj.value("samples", std::uint64_t{5000});
  gc.burn_in = fj.value("burn_in", std::uint64_t{2000});
  gc.thin = fj.value("thin", std::uint64_t{1});
  if (fj.contains("probe_grid")) {
    gc.probe_nx = fj.at("probe_grid").at(0).get<int>();
    gc.probe_ny = fj.at("probe_grid").at(1).get<int>();
  }
  gc.proposal_sd_nu = fj.value("proposal_sd_nu", 0.05);
  gc.proposal_sd_theta = fj.value("proposal_sd_theta", 0.01);
  gc.theta_steps = fj.value("theta_steps", 10);
  gc.jitter = fj.value("jitter", kDefaultJitter);
  std::uint64_t checkpoint_every = fj.value("checkpoint_every",
                                            std::uint64_t{0});
  if (!o.samples_flag.empty()) gc.n_samples = o.samples_flag.back();
  if (!o.burn_in_flag.empty()) gc.burn_in = o.burn_in_flag.back();
  if (!o.thin_flag.empty()) gc.thin = o.thin_flag.back();
  if (!o.probe_grid_flag.empty()) {
    gc.probe_nx = o.probe_grid_flag[0];
    gc.probe_ny = o.probe_grid_flag[1];
  }
  if (!o.checkpoint_every_flag.empty())
    checkpoint_every = o.checkpoint_every_flag.back();
  gc.seed = resolve_seed(cfg, o.common, "fit-gp");
  gc.validate();

  Priors priors;
  bool priors_given = false;
  if (!o.priors_path.empty()) {
    priors = priors_from_json(parse_json_file(o.priors_path));
    priors_given = true;
  } else if (fj.contains("priors")) {
    priors = priors_from_json(fj.at("priors"));
    priors_given = true;
  } else {
    priors = default_priors(cat.size(), window);
  }
  if (fj.contains("lambda_mean")) {
    const double mean = fj.at("lambda_mean").get<double>();
    const double cs = fj.value("c_s", 1.0);
    if (!(mean > 0.0) || !(cs > 0.0))
      throw ConfigError("fit_gp.lambda_mean and fit_gp.c_s must be > 0");
    priors.lambda_alpha0 = 1.0 / (cs * cs);
    priors.lambda_beta0 = 1.0 / (cs * cs * mean);
  }
  priors.validate();
  (void)priors_given;

  fs::create_directories(o.common.output_dir);
  const fs::path dir(o.common.output_dir);
  const fs::path chain_path = dir / "chain.jsonl";
  const fs::path ckpt_path = dir / "checkpoint.json";

  GibbsSampler sampler(cat, priors, gc);
  const Json header = chain_header_json(gc, window, cat.size());

  std::ofstream chain_out;
  std::size_t kept = 0;
  if (!o.resume_path.empty()) {
    restore_from_checkpoint(sampler, parse_json_file(o.resume_path));
    if (sampler.iteration() > gc.burn_in + gc.n_samples)
      throw ConfigError(
          "resume: checkpoint is at sweep " +
          std::to_string(sampler.iteration()) +
          ", beyond the requested total of " +
          std::to_string(gc.burn_in + gc.n_samples) +
          "; shrinking a chain is not supported");
    ChainFile existing = read_chain_file(chain_path.string());
    // Everything except the sweep target must match the original run; a
    // larger --samples extends the chain on the same rng stream.
    Json a = existing.header, b = header;
    a.erase("n_samples");
    b.erase("n_samples");
    if (a.dump() != b.dump())
      throw DataError(
          "resume: chain header in " + chain_path.string() +
          " does not match the current configuration; resume requires the "
          "original seed and sampler settings");
    chain_out.open(chain_path, std::ios::trunc);
    if (!chain_out)
      throw DataError("cannot write chain file: " + chain_path.string());
    chain_out << header.dump() << "\n";
    for (const auto& s : existing.samples)
      if (s.iteration <= sampler.iteration()) {
        chain_out << chain_sample_json(s).dump() << "\n";
        ++kept;
      }
  } else {
    chain_out.open(chain_path, std::ios::trunc);
    if (!chain_out)
      throw DataError("cannot write chain file: " + chain_path.string());
    chain_out << header.dump() << "\n";
  }
  chain_out.flush();

  GibbsCallbacks callbacks;
  callbacks.checkpoint_every = checkpoint_every;
  callbacks.on_sample = [&](const ChainSample& s) {
    chain_out << chain_sample_json(s).dump() << "\n";
    chain_out.flush();
  };
  callbacks.on_checkpoint = [&](const GibbsSampler& smp) {
    write_text_file(ckpt_path.string(), checkpoint_to_json(smp).dump() + "\n");
  };

  PosteriorChain chain = run_gibbs(sampler, callbacks);
  chain_out.flush();

  const std::size_t stored = kept + chain.samples.size();
  write_text_file((dir / "summary.json").string(),
                  chain_summary_json(chain, cat.size(), stored).dump(2) + "\n");

  Json eff{{"window", window_to_json(window)},
           {"seed", gc.seed},
           {"fit_gp",
            Json{{"catalog", catalog_path},
                 {"samples", gc.n_samples},
                 {"burn_in", gc.burn_in},
                 {"thin", gc.thin},
                 {"probe_grid", {gc.probe_nx, gc.probe_ny}},
                 {"proposal_sd_nu", gc.proposal_sd_nu},
                 {"proposal_sd_theta", gc.proposal_sd_theta},
                 {"theta_steps", gc.theta_steps},
                 {"jitter", gc.jitter},
                 {"checkpoint_every", checkpoint_every},
                 {"priors", priors_to_json(priors)}}}};
  write_manifest(dir, "fit-gp", gc.seed, eff, {catalog_path},
                 {"chain.jsonl", "checkpoint.json", "summary.json"});

  std::cout << "fit-gp: " << cat.size() << " events, "
            << gc.burn_in + gc.n_samples << " sweeps, stored " << stored
            << " samples, acceptance nu=" << fmt_rate(chain.accept_rate_nu)
            << " theta=" << fmt_rate(chain.accept_rate_theta) << " -> "
            << o.common.output_dir << "\n";
  return 0;
}

// ---- fit-mle ----

int cmd_fit_mle(const CommonOpts& opts, const std::string& variant_flag) {
  Json cfg = parse_json_file(opts.config_path);
  DomainWindow window = window_from_json(require_field(cfg, "window", ""));
  const Json& fj = require_field(cfg, "fit_mle", "");
  const std::string catalog_path =
      require_field(fj, "catalog", "fit_mle").get<std::string>();
  Catalog cat = load_or_warn(catalog_path, window);

  EmConfig emc;
  emc.kde.n_p = fj.value("n_p", 15);
  emc.kde.d_min = fj.value("d_min", 0.05);
  std::string variant = fj.value("variant", std::string("classical"));
  if (!variant_flag.empty()) variant = variant_flag;
  if (variant == "classical") {
    emc.kde.variant = KdeConfig::Variant::classical;
  } else if (variant == "silverman") {
    emc.kde.variant = KdeConfig::Variant::silverman;
  } else {
    throw ConfigError("fit_mle.variant must be classical|silverman, got `" +
                      variant + "`");
  }
  emc.tol = fj.value("tol", 1e-6);
  emc.max_iter = fj.value("max_iter", 200);
  if (fj.contains("grid")) {
    emc.grid_nx = fj.at("grid").at(0).get<int>();
    emc.grid_ny = fj.at("grid").at(1).get<int>();
  }
  const std::uint64_t seed = resolve_seed(cfg, opts, "fit-mle");

  MleFit fit = fj.contains("init_theta")
                   ? em_fit(cat, emc, theta_from_json(fj.at("init_theta")))
                   : em_fit(cat, emc);

  fs::create_directories(opts.output_dir);
  const fs::path dir(opts.output_dir);

  Json fit_json = mle_fit_to_json(fit, cat);
  fit_json["variant"] = variant;
  write_text_file((dir / "fit.json").string(), fit_json.dump(2) + "\n");

  EvalGrid grid(emc.grid_nx, emc.grid_ny, window);
  const auto centers = grid.centers();
  std::string csv = "x,y,mu\n";
  for (Eigen::Index i = 0; i < centers.rows(); ++i) {
    csv += format_double(centers(i, 0));
    csv += ',';
    csv += format_double(centers(i, 1));
    csv += ',';
    csv += format_double(fit.mu_kde(centers(i, 0), centers(i, 1)));
    csv += '\n';
  }
  write_text_file((dir / "mu_grid.csv").string(), csv);

  Json eff{{"window", window_to_json(window)},
           {"seed", seed},
           {"fit_mle",
            Json{{"catalog", catalog_path},
                 {"variant", variant},
                 {"n_p", emc.kde.n_p},
                 {"d_min", emc.kde.d_min},
                 {"tol", emc.tol},
                 {"max_iter", emc.max_iter},
                 {"grid", {emc.grid_nx, emc.grid_ny}}}}};
  write_manifest(dir, "fit-mle", seed, eff, {catalog_path},
                 {"fit.json", "mu_grid.csv"});

  const double final_ll = fit.log_likelihood_trace.empty()
                              ? 0.0
                              : fit.log_likelihood_trace.back();
  std::cout << "fit-mle(" << variant << "): " << cat.size() << " events, "
            << fit.n_iter << " iterations, "
            << (fit.converged ? "converged" : "max_iter reached")
            << ", log-likelihood " << format_double(final_ll) << " -> "
            << opts.output_dir << "\n";
  return 0;
}

// ---- evaluate ----

bool is_chain_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file: " + path);
  std::string first;
  std::getline(in, first);
  Json j = Json::parse(first, nullptr, false);
  return j.is_object() && j.value("type", "") == "gpetas-chain";
}

int cmd_evaluate(const CommonOpts& opts) {
  Json cfg = parse_json_file(opts.config_path);
  DomainWindow window = window_from_json(require_field(cfg, "window", ""));
  const Json& ej = require_field(cfg, "evaluate", "");
  const std::string model_path =
      require_field(ej, "model", "evaluate").get<std::string>();
  const std::string test_path =
      require_field(ej, "test", "evaluate").get<std::string>();
  const Json& trj = require_field(ej, "test_t_range", "evaluate");
  const double t0 = trj.at(0).get<double>(), t1 = trj.at(1).get<double>();
  if (!(t0 < t1) || t0 < window.t_range[0] || t1 > window.t_range[1])
    throw ConfigError(
        "evaluate.test_t_range must be an increasing interval inside the "
        "window's t_range");

  DomainWindow test_window = window;
  test_window.t_range = {t0, t1};
  Catalog test = load_or_warn(test_path, test_window);

  DomainWindow hist_window = window;
  hist_window.t_range = {window.t_range[0], t0};
  Catalog history;
  history.window = hist_window;
  std::vector<std::string> inputs{model_path, test_path};
  if (ej.contains("history")) {
    const std::string hist_path = ej.at("history").get<std::string>();
    history = load_or_warn(hist_path, hist_window);
    inputs.push_back(hist_path);
  }

  std::vector<ModelSample> samples;
  EvalGrid grid;
  std::string model_type;
  if (is_chain_file(model_path)) {
    model_type = "gp-chain";
    ChainFile cf = read_chain_file(model_path);
    DomainWindow chain_window = window_from_json(cf.header.at("window"));
    if (window_to_json(chain_window).dump() != window_to_json(window).dump())
      throw ConfigError("evaluate: config window differs from the window the "
                        "chain was fitted on");
    grid = EvalGrid(cf.header.at("probe_grid").at(0).get<int>(),
                    cf.header.at("probe_grid").at(1).get<int>(), window);
    if (ej.contains("grid") && (ej.at("grid").at(0).get<int>() != grid.nx ||
                                ej.at("grid").at(1).get<int>() != grid.ny))
      throw ConfigError(
          "evaluate.grid must match the chain's probe grid (" +
          std::to_string(grid.nx) + "x" + std::to_string(grid.ny) + ")");
    if (cf.samples.empty())
      throw DataError(model_path + ": chain has no stored samples");
    samples = chain_to_model_samples(cf, grid);
  } else {
    model_type = "mle";
    MleArtifact art = mle_artifact_from_json(parse_json_file(model_path));
    if (window_to_json(art.window).dump() != window_to_json(window).dump())
      throw ConfigError("evaluate: config window differs from the window the "
                        "model was fitted on");
    int nx = 50, ny = 50;
    if (ej.contains("grid")) {
      nx = ej.at("grid").at(0).get<int>();
      ny = ej.at("grid").at(1).get<int>();
    }
    grid = EvalGrid(nx, ny, window);
    const auto centers = grid.centers();
    Eigen::VectorXd mu(grid.n_cells());
    for (Eigen::Index i = 0; i < centers.rows(); ++i)
      mu[i] = art.mu_kde(centers(i, 0), centers(i, 1));
    samples.push_back(ModelSample{std::move(mu), art.theta});
  }

  // Per-period rows: each requested horizon truncates the test window to
  // [t0, min(t0 + days, t1)]; a final row covers the full window.
  std::vector<double> periods{30.0, 365.0, 1826.0};
  if (ej.contains("periods_days"))
    periods = ej.at("periods_days").get<std::vector<double>>();
  Json period_rows = Json::array();
  auto eval_window = [&](double t_end, const std::string& label) {
    Catalog sub;
    sub.window = test_window;
    sub.window.t_range = {t0, t_end};
    for (const auto& e : test.events)
      if (e.t <= t_end) sub.events.push_back(e);
    const double l =
        test_log_likelihood_posterior(samples, sub, history, grid);
    period_rows.push_back(Json{{"period", label},
                               {"t_range", {t0, t_end}},
                               {"n_test", sub.events.size()},
                               {"l_test", l}});
    return l;
  };
  for (double days : periods) {
    if (!(days > 0.0))
      throw ConfigError("evaluate.periods_days entries must be > 0");
    eval_window(std::min(t0 + days, t1), format_double(days) + "d");
  }
  const double l_total = eval_window(t1, "total");

  Json report{{"type", "gpetas-eval"},
              {"version", 1},
              {"model", model_path},
              {"model_type", model_type},
              {"n_samples", samples.size()},
              {"n_history", history.size()},
              {"n_test", test.size()},
              {"test_t_range", {t0, t1}},
              {"l_test", l_total},
              {"periods", period_rows}};

  if (ej.contains("true_background")) {
    const Json& tb = ej.at("true_background");
    BackgroundField truth;
    if (tb.contains("cells")) {
      truth = make_piecewise_field(
          cells_from_json(tb.at("cells"), "evaluate.true_background.cells"));
    } else if (tb.contains("constant")) {
      truth = make_constant_field(tb.at("constant").get<double>());
    } else {
      throw ConfigError(
          "evaluate.true_background needs `cells` or `constant`");
    }
    const auto centers = grid.centers();
    Eigen::VectorXd truth_vec(grid.n_cells());
    for (Eigen::Index i = 0; i < centers.rows(); ++i)
      truth_vec[i] = truth(centers(i, 0), centers(i, 1));
    Eigen::VectorXd mu_hat = Eigen::VectorXd::Zero(grid.n_cells());
    for (const auto& s : samples) mu_hat += s.mu_grid;
    mu_hat /= static_cast<double>(samples.size());
    report["l2"] = l2_background(truth_vec, mu_hat, grid);
  }

  fs::create_directories(opts.output_dir);
  const fs::path dir(opts.output_dir);
  write_text_file((dir / "report.json").string(), report.dump(2) + "\n");

  Json eff{{"window", window_to_json(window)},
           {"evaluate", ej}};
  write_manifest(dir, "evaluate",
                 cfg.contains("seed") ? cfg.at("seed") : Json(nullptr), eff,
                 inputs, {"report.json"});

  std::cout << "evaluate(" << model_type << "): l_test="
            << format_double(l_total) << " n_test=" << test.size() << " -> "
            << opts.output_dir << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"GP-ETAS: simulation, Bayesian GP fitting, KDE/EM baseline, "
               "and evaluation for spatio-temporal earthquake catalogs"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  CommonOpts sim_opts;
  auto* sim = app.add_subcommand(
      "simulate", "Draw a synthetic catalog from the generative model");
  sim->add_option("--config", sim_opts.config_path, "Run configuration (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  sim->add_option("--output-dir", sim_opts.output_dir, "Output directory");
  auto* sim_seed = sim->add_option("--seed", sim_opts.seed, "Override seed");

  FitGpOpts gp_opts;
  auto* fgp = app.add_subcommand(
      "fit-gp", "Posterior sampling of background and triggering parameters");
  fgp->add_option("--config", gp_opts.common.config_path,
                  "Run configuration (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  fgp->add_option("--output-dir", gp_opts.common.output_dir,
                  "Output directory");
  auto* gp_seed =
      fgp->add_option("--seed", gp_opts.common.seed, "Override seed");
  fgp->add_option("--samples", gp_opts.samples_flag,
                  "Stored posterior sweeps after burn-in");
  fgp->add_option("--burn-in", gp_opts.burn_in_flag, "Burn-in sweeps");
  fgp->add_option("--thin", gp_opts.thin_flag, "Keep every thin-th sweep");
  fgp->add_option("--probe-grid", gp_opts.probe_grid_flag,
                  "Background probe grid NX NY")
      ->expected(2);
  fgp->add_option("--priors", gp_opts.priors_path,
                  "Priors file (JSON), overrides the config section")
      ->check(CLI::ExistingFile);
  fgp->add_option("--resume", gp_opts.resume_path,
                  "Resume from a checkpoint file")
      ->check(CLI::ExistingFile);
  fgp->add_option("--checkpoint-every", gp_opts.checkpoint_every_flag,
                  "Write a checkpoint every N sweeps (0: only at the end)");

  CommonOpts mle_opts;
  std::string variant_flag;
  auto* fml = app.add_subcommand(
      "fit-mle", "KDE background + EM-style maximum likelihood triggering");
  fml->add_option("--config", mle_opts.config_path, "Run configuration (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  fml->add_option("--output-dir", mle_opts.output_dir, "Output directory");
  auto* mle_seed =
      fml->add_option("--seed", mle_opts.seed, "Override seed");
  fml->add_option("--variant", variant_flag,
                  "Bandwidth floor rule: classical|silverman")
      ->check(CLI::IsMember({"classical", "silverman"}));

  CommonOpts ev_opts;
  auto* ev = app.add_subcommand(
      "evaluate", "Held-out log likelihood of a fitted model");
  ev->add_option("--config", ev_opts.config_path, "Run configuration (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  ev->add_option("--output-dir", ev_opts.output_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  sim_opts.seed_set = sim_seed->count() > 0;
  gp_opts.common.seed_set = gp_seed->count() > 0;
  mle_opts.seed_set = mle_seed->count() > 0;

  try {
    if (sim->parsed()) return cmd_simulate(sim_opts);
    if (fgp->parsed()) return cmd_fit_gp(gp_opts);
    if (fml->parsed()) return cmd_fit_mle(mle_opts, variant_flag);
    if (ev->parsed()) return cmd_evaluate(ev_opts);
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Json::exception& e) {
    std::cerr << "error: invalid configuration: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}

}  // namespace gpetas
