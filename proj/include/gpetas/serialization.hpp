#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpetas/baseline.hpp"
#include "gpetas/catalog.hpp"
#include "gpetas/evaluation.hpp"
#include "gpetas/gibbs.hpp"

namespace gpetas {

using Json = nlohmann::ordered_json;

// ---- Basic structs <-> JSON ----
Json window_to_json(const DomainWindow& w);
DomainWindow window_from_json(const Json& j);

Json theta_to_json(const TriggeringParams& th);
TriggeringParams theta_from_json(const Json& j);

Json nu_to_json(const GpHyperParams& nu);
GpHyperParams nu_from_json(const Json& j);

Json priors_to_json(const Priors& p);
Priors priors_from_json(const Json& j);

// ---- Chain files (JSON lines: one header line, then one line per sample) ----
Json chain_header_json(const GibbsConfig& config, const DomainWindow& window,
                       std::size_t n_events);
Json chain_sample_json(const ChainSample& s);
ChainSample chain_sample_from_json(const Json& j);

struct ChainFile {
  Json header;
  std::vector<ChainSample> samples;
};
// Throws DataError on malformed files.
ChainFile read_chain_file(const std::string& path);

// Per-sample evaluation inputs from a chain file; validates the probe grid
// against `grid` (ConfigError on mismatch).
std::vector<ModelSample> chain_to_model_samples(const ChainFile& chain,
                                                const EvalGrid& grid);

// ---- Checkpoints ----
Json checkpoint_to_json(const GibbsSampler& sampler);
// Restores state, iteration, rng, MH counters, and the scalar trace.  The
// sampler must have been constructed on the same catalog/config.
void restore_from_checkpoint(GibbsSampler& sampler, const Json& j);

// ---- MLE fit artifact (self-contained: includes the KDE ingredients) ----
Json mle_fit_to_json(const MleFit& fit, const Catalog& cat);
struct MleArtifact {
  TriggeringParams theta;
  BackgroundField mu_kde;
  std::vector<double> p_background;
  std::vector<double> bandwidths;
  std::vector<double> log_likelihood_trace;
  DomainWindow window;
};
MleArtifact mle_artifact_from_json(const Json& j);

// ---- Posterior summaries ----
struct QuantileSummary {
  double median = 0.0, q05 = 0.0, q95 = 0.0;
};
// Type-7 (linear interpolation) quantiles of an unsorted sample.
QuantileSummary summarize(std::vector<double> values);
// n_stored is the total number of snapshots in the chain file (with resume
// this can exceed chain.samples.size(), which only holds the new ones).
Json chain_summary_json(const PosteriorChain& chain, std::size_t n_events,
                        std::size_t n_stored);

// ---- Misc ----
// FNV-1a 64-bit over a string, hex-formatted; used for config hashes.
std::string fnv1a_hex(const std::string& data);

// Reads/writes whole files; throws DataError on I/O failure.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
Json parse_json_file(const std::string& path);

}  // namespace gpetas
