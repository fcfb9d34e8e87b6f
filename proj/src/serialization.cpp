#include "gpetas/serialization.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace gpetas {

namespace {

Json vector_to_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vector_from_json(const Json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  Eigen::Index i = 0;
  for (const auto& e : j) v[i++] = e.get<double>();
  return v;
}

Json points_to_json(const Eigen::Matrix<double, Eigen::Dynamic, 2>& pts) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < pts.rows(); ++i)
    a.push_back(Json::array({pts(i, 0), pts(i, 1)}));
  return a;
}

Eigen::Matrix<double, Eigen::Dynamic, 2> points_from_json(const Json& j) {
  Eigen::Matrix<double, Eigen::Dynamic, 2> pts(
      static_cast<Eigen::Index>(j.size()), 2);
  Eigen::Index i = 0;
  for (const auto& e : j) {
    pts(i, 0) = e.at(0).get<double>();
    pts(i, 1) = e.at(1).get<double>();
    ++i;
  }
  return pts;
}

constexpr const char* kThetaKeys[7] = {"K0", "c", "p", "alpha", "d", "gamma", "q"};

}  // namespace

Json window_to_json(const DomainWindow& w) {
  return Json{{"x_range", {w.x_range[0], w.x_range[1]}},
              {"y_range", {w.y_range[0], w.y_range[1]}},
              {"t_range", {w.t_range[0], w.t_range[1]}},
              {"m0", w.m0}};
}

DomainWindow window_from_json(const Json& j) {
  DomainWindow w;
  try {
    w.x_range = {j.at("x_range").at(0).get<double>(),
                 j.at("x_range").at(1).get<double>()};
    w.y_range = {j.at("y_range").at(0).get<double>(),
                 j.at("y_range").at(1).get<double>()};
    w.t_range = {j.at("t_range").at(0).get<double>(),
                 j.at("t_range").at(1).get<double>()};
    w.m0 = j.at("m0").get<double>();
  } catch (const Json::exception& e) {
    throw DataError(std::string("window: ") + e.what());
  }
  w.validate();
  return w;
}

Json theta_to_json(const TriggeringParams& th) {
  return Json{{"K0", th.K0}, {"c", th.c},         {"p", th.p},
              {"alpha", th.alpha}, {"d", th.d},   {"gamma", th.gamma},
              {"q", th.q}};
}

TriggeringParams theta_from_json(const Json& j) {
  TriggeringParams th;
  try {
    th.K0 = j.at("K0").get<double>();
    th.c = j.at("c").get<double>();
    th.p = j.at("p").get<double>();
    th.alpha = j.at("alpha").get<double>();
    th.d = j.at("d").get<double>();
    th.gamma = j.at("gamma").get<double>();
    th.q = j.at("q").get<double>();
  } catch (const Json::exception& e) {
    throw DataError(std::string("theta: ") + e.what());
  }
  return th;
}

Json nu_to_json(const GpHyperParams& nu) {
  return Json::array({nu.nu0, nu.nu1, nu.nu2});
}

GpHyperParams nu_from_json(const Json& j) {
  GpHyperParams nu;
  try {
    nu.nu0 = j.at(0).get<double>();
    nu.nu1 = j.at(1).get<double>();
    nu.nu2 = j.at(2).get<double>();
  } catch (const Json::exception& e) {
    throw DataError(std::string("nu: ") + e.what());
  }
  return nu;
}

Json priors_to_json(const Priors& p) {
  Json bounds;
  for (int k = 0; k < 7; ++k)
    bounds[kThetaKeys[k]] = {p.theta_bounds[k][0], p.theta_bounds[k][1]};
  return Json{{"lambda_alpha0", p.lambda_alpha0},
              {"lambda_beta0", p.lambda_beta0},
              {"nu_rates", {p.nu_rates[0], p.nu_rates[1], p.nu_rates[2]}},
              {"theta_bounds", bounds}};
}

Priors priors_from_json(const Json& j) {
  Priors p;
  try {
    if (j.contains("lambda_alpha0"))
      p.lambda_alpha0 = j.at("lambda_alpha0").get<double>();
    if (j.contains("lambda_beta0"))
      p.lambda_beta0 = j.at("lambda_beta0").get<double>();
    if (j.contains("nu_rates"))
      for (int k = 0; k < 3; ++k)
        p.nu_rates[k] = j.at("nu_rates").at(k).get<double>();
    if (j.contains("theta_bounds"))
      for (int k = 0; k < 7; ++k)
        if (j.at("theta_bounds").contains(kThetaKeys[k])) {
          p.theta_bounds[k][0] =
              j.at("theta_bounds").at(kThetaKeys[k]).at(0).get<double>();
          p.theta_bounds[k][1] =
              j.at("theta_bounds").at(kThetaKeys[k]).at(1).get<double>();
        }
  } catch (const Json::exception& e) {
    throw DataError(std::string("priors: ") + e.what());
  }
  p.validate();
  return p;
}

Json chain_header_json(const GibbsConfig& config, const DomainWindow& window,
                       std::size_t n_events) {
  return Json{{"type", "gpetas-chain"},
              {"version", 1},
              {"window", window_to_json(window)},
              {"probe_grid", {config.probe_nx, config.probe_ny}},
              {"n_samples", config.n_samples},
              {"burn_in", config.burn_in},
              {"thin", config.thin},
              {"seed", config.seed},
              {"n_events", n_events}};
}

Json chain_sample_json(const ChainSample& s) {
  return Json{{"iter", s.iteration},
              {"lambda_bar", s.lambda_bar},
              {"nu", nu_to_json(s.nu)},
              {"theta", theta_to_json(s.theta)},
              {"n_pi", s.n_pi},
              {"z", s.z},
              {"f_events", vector_to_json(s.f_events)},
              {"mu_probe", vector_to_json(s.mu_probe)}};
}

ChainSample chain_sample_from_json(const Json& j) {
  ChainSample s;
  try {
    s.iteration = j.at("iter").get<std::uint64_t>();
    s.lambda_bar = j.at("lambda_bar").get<double>();
    s.nu = nu_from_json(j.at("nu"));
    s.theta = theta_from_json(j.at("theta"));
    s.n_pi = j.at("n_pi").get<std::size_t>();
    s.z = j.at("z").get<std::vector<int>>();
    s.f_events = vector_from_json(j.at("f_events"));
    s.mu_probe = vector_from_json(j.at("mu_probe"));
  } catch (const Json::exception& e) {
    throw DataError(std::string("chain sample: ") + e.what());
  }
  return s;
}

ChainFile read_chain_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open chain file: " + path);
  ChainFile cf;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::exception& e) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": invalid JSON: " + e.what());
    }
    if (line_no == 1) {
      if (!j.is_object() || j.value("type", "") != "gpetas-chain")
        throw DataError(path + ": first line is not a gpetas-chain header");
      cf.header = std::move(j);
    } else {
      cf.samples.push_back(chain_sample_from_json(j));
    }
  }
  if (cf.header.is_null())
    throw DataError(path + ": empty chain file");
  return cf;
}

std::vector<ModelSample> chain_to_model_samples(const ChainFile& chain,
                                                const EvalGrid& grid) {
  int nx = 0, ny = 0;
  try {
    nx = chain.header.at("probe_grid").at(0).get<int>();
    ny = chain.header.at("probe_grid").at(1).get<int>();
  } catch (const Json::exception& e) {
    throw DataError(std::string("chain header: ") + e.what());
  }
  if (nx != grid.nx || ny != grid.ny)
    throw ConfigError("chain probe grid " + std::to_string(nx) + "x" +
                      std::to_string(ny) + " does not match evaluation grid " +
                      std::to_string(grid.nx) + "x" + std::to_string(grid.ny));
  std::vector<ModelSample> out;
  out.reserve(chain.samples.size());
  for (const auto& s : chain.samples) {
    if (s.mu_probe.size() != grid.n_cells())
      throw ConfigError("chain sample probe length " +
                        std::to_string(s.mu_probe.size()) +
                        " != grid cells " + std::to_string(grid.n_cells()));
    out.push_back(ModelSample{s.mu_probe, s.theta});
  }
  return out;
}

Json checkpoint_to_json(const GibbsSampler& sampler) {
  const GibbsState& st = sampler.state();
  Json state{{"z", st.z},
             {"pi_points", points_to_json(st.pi_points)},
             {"omega", vector_to_json(st.omega)},
             {"lambda_bar", st.lambda_bar},
             {"f_values", vector_to_json(st.f.values)},
             {"nu", nu_to_json(st.nu)},
             {"theta", theta_to_json(st.theta)}};
  Json trace = Json::array();
  for (const auto& s : sampler.scalar_trace())
    trace.push_back(Json::array({s.lambda_bar, s.nu.nu0, s.nu.nu1, s.nu.nu2,
                                 s.theta.K0, s.theta.c, s.theta.p,
                                 s.theta.alpha, s.theta.d, s.theta.gamma,
                                 s.theta.q}));
  return Json{{"type", "gpetas-checkpoint"},
              {"version", 1},
              {"iteration", sampler.iteration()},
              {"rng_state", sampler.rng().serialize_state()},
              {"accepted_nu", sampler.accepted_nu()},
              {"proposed_nu", sampler.proposed_nu()},
              {"accepted_theta", sampler.accepted_theta()},
              {"proposed_theta", sampler.proposed_theta()},
              {"state", state},
              {"scalar_trace", trace}};
}

void restore_from_checkpoint(GibbsSampler& sampler, const Json& j) {
  if (!j.is_object() || j.value("type", "") != "gpetas-checkpoint")
    throw DataError("not a gpetas-checkpoint document");
  try {
    const Json& sj = j.at("state");
    GibbsState st;
    st.z = sj.at("z").get<std::vector<int>>();
    const std::size_t n = st.z.size();
    if (n != sampler.state().n_events())
      throw DataError("checkpoint event count " + std::to_string(n) +
                      " does not match the catalog (" +
                      std::to_string(sampler.state().n_events()) + ")");
    st.pi_points = points_from_json(sj.at("pi_points"));
    st.omega = vector_from_json(sj.at("omega"));
    st.lambda_bar = sj.at("lambda_bar").get<double>();
    st.nu = nu_from_json(sj.at("nu"));
    st.theta = theta_from_json(sj.at("theta"));
    const Eigen::Index k = st.pi_points.rows();
    st.f.values = vector_from_json(sj.at("f_values"));
    if (st.f.values.size() != static_cast<Eigen::Index>(n) + k)
      throw DataError("checkpoint f length mismatch");
    st.f.points.resize(static_cast<Eigen::Index>(n) + k, 2);
    st.f.points.topRows(static_cast<Eigen::Index>(n)) =
        sampler.state().f.points.topRows(static_cast<Eigen::Index>(n));
    st.f.points.bottomRows(k) = st.pi_points;

    sampler.restore(st, j.at("iteration").get<std::uint64_t>(),
                    j.at("rng_state").get<std::string>(),
                    j.at("accepted_nu").get<std::uint64_t>(),
                    j.at("proposed_nu").get<std::uint64_t>(),
                    j.at("accepted_theta").get<std::uint64_t>(),
                    j.at("proposed_theta").get<std::uint64_t>());

    std::vector<ScalarSample> trace;
    for (const auto& row : j.at("scalar_trace")) {
      ScalarSample s;
      s.lambda_bar = row.at(0).get<double>();
      s.nu.nu0 = row.at(1).get<double>();
      s.nu.nu1 = row.at(2).get<double>();
      s.nu.nu2 = row.at(3).get<double>();
      s.theta.K0 = row.at(4).get<double>();
      s.theta.c = row.at(5).get<double>();
      s.theta.p = row.at(6).get<double>();
      s.theta.alpha = row.at(7).get<double>();
      s.theta.d = row.at(8).get<double>();
      s.theta.gamma = row.at(9).get<double>();
      s.theta.q = row.at(10).get<double>();
      trace.push_back(s);
    }
    sampler.set_scalar_trace(std::move(trace));
  } catch (const Json::exception& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  }
}

Json mle_fit_to_json(const MleFit& fit, const Catalog& cat) {
  Json xs = Json::array(), ys = Json::array();
  for (const auto& e : cat.events) {
    xs.push_back(e.x);
    ys.push_back(e.y);
  }
  return Json{{"type", "gpetas-mle"},
              {"version", 1},
              {"window", window_to_json(cat.window)},
              {"theta", theta_to_json(fit.theta)},
              {"converged", fit.converged},
              {"n_iter", fit.n_iter},
              {"log_likelihood_trace", fit.log_likelihood_trace},
              {"kde",
               Json{{"t_window_length", cat.window.duration()},
                    {"x", xs},
                    {"y", ys},
                    {"p_background", fit.p_background},
                    {"bandwidths", fit.bandwidths}}}};
}

MleArtifact mle_artifact_from_json(const Json& j) {
  if (!j.is_object() || j.value("type", "") != "gpetas-mle")
    throw DataError("not a gpetas-mle document");
  MleArtifact art;
  try {
    art.window = window_from_json(j.at("window"));
    art.theta = theta_from_json(j.at("theta"));
    art.log_likelihood_trace =
        j.at("log_likelihood_trace").get<std::vector<double>>();
    const Json& kj = j.at("kde");
    const auto xs = kj.at("x").get<std::vector<double>>();
    const auto ys = kj.at("y").get<std::vector<double>>();
    art.p_background = kj.at("p_background").get<std::vector<double>>();
    art.bandwidths = kj.at("bandwidths").get<std::vector<double>>();
    if (xs.size() != ys.size() || xs.size() != art.p_background.size() ||
        xs.size() != art.bandwidths.size())
      throw DataError("mle artifact: KDE array lengths differ");
    Catalog support;
    support.window = art.window;
    support.events.reserve(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i)
      support.events.push_back(
          Event{0.0, xs[i], ys[i], art.window.m0});
    art.mu_kde = kde_background(support, art.p_background, art.bandwidths,
                                kj.at("t_window_length").get<double>());
  } catch (const Json::exception& e) {
    throw DataError(std::string("mle artifact: ") + e.what());
  }
  return art;
}

QuantileSummary summarize(std::vector<double> values) {
  if (values.empty()) throw ConfigError("summarize: empty sample");
  std::sort(values.begin(), values.end());
  auto quantile = [&](double prob) {
    const double h = prob * (static_cast<double>(values.size()) - 1.0);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = h - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
  };
  return QuantileSummary{quantile(0.5), quantile(0.05), quantile(0.95)};
}

Json chain_summary_json(const PosteriorChain& chain, std::size_t n_events,
                        std::size_t n_stored) {
  Json out{{"type", "gpetas-summary"},
           {"version", 1},
           {"n_events", n_events},
           {"burn_in", chain.burn_in},
           {"thin", chain.thin},
           {"seed", chain.seed},
           {"n_trace", chain.scalar_trace.size()},
           {"n_stored_samples", n_stored},
           {"acceptance",
            Json{{"nu", chain.accept_rate_nu},
                 {"theta", chain.accept_rate_theta}}}};
  if (chain.scalar_trace.empty()) {
    out["posterior"] = nullptr;
    return out;
  }
  auto extract = [&](auto getter) {
    std::vector<double> v;
    v.reserve(chain.scalar_trace.size());
    for (const auto& s : chain.scalar_trace) v.push_back(getter(s));
    return v;
  };
  auto to_json = [](const QuantileSummary& q) {
    return Json{{"median", q.median}, {"q05", q.q05}, {"q95", q.q95}};
  };
  Json post;
  post["lambda_bar"] = to_json(
      summarize(extract([](const ScalarSample& s) { return s.lambda_bar; })));
  post["nu0"] = to_json(
      summarize(extract([](const ScalarSample& s) { return s.nu.nu0; })));
  post["nu1"] = to_json(
      summarize(extract([](const ScalarSample& s) { return s.nu.nu1; })));
  post["nu2"] = to_json(
      summarize(extract([](const ScalarSample& s) { return s.nu.nu2; })));
  post["K0"] = to_json(
      summarize(extract([](const ScalarSample& s) { return s.theta.K0; })));
  post["c"] = to_json(
      summarize(extract([](const ScalarSample& s) { return s.theta.c; })));
  post["p"] = to_json(
      summarize(extract([](const ScalarSample& s) { return s.theta.p; })));
  post["alpha"] = to_json(
      summarize(extract([](const ScalarSample& s) { return s.theta.alpha; })));
  post["d"] = to_json(
      summarize(extract([](const ScalarSample& s) { return s.theta.d; })));
  post["gamma"] = to_json(
      summarize(extract([](const ScalarSample& s) { return s.theta.gamma; })));
  post["q"] = to_json(
      summarize(extract([](const ScalarSample& s) { return s.theta.q; })));
  out["posterior"] = post;
  return out;
}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : data) {
    h ^= static_cast<std::uint64_t>(c);
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(buf);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path);
  out << content;
  if (!out) throw DataError("write failed: " + path);
}

Json parse_json_file(const std::string& path) {
  try {
    return Json::parse(read_text_file(path));
  } catch (const Json::exception& e) {
    throw DataError(path + ": invalid JSON: " + e.what());
  }
}

}  // namespace gpetas
