#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "gpetas/catalog.hpp"
#include "gpetas/gaussian_process.hpp"
#include "gpetas/triggering.hpp"

namespace gpetas {

// Generative configuration: background either as a sigmoid-transformed GP
// (intensity lambda_bar * sigmoid(f)) or as an explicit field bounded by
// lambda_bar.
struct SimConfig {
  enum class Source { gp, explicit_field };

  DomainWindow window;  // includes m0
  double lambda_bar = 1.0;
  Source source = Source::gp;
  GpHyperParams nu;         // used when source == gp
  BackgroundField field;    // used when source == explicit_field
  TriggeringParams theta;
  double beta = std::log(10.0);  // magnitude rate; ln 10 = b-value 1
  std::uint64_t seed = 0;

  void validate() const;
};

// Catalog with the generative branching labels (0 background, j >= 1 parent
// is event j-1 in the final time-sorted order).
struct BranchedCatalog {
  Catalog catalog;
  std::vector<int> z;
};

// Total-event guard against supercritical cascades.
inline constexpr std::size_t kMaxSimEvents = 1000000;
// Per-parent candidate guard (protects against pathological Omori bounds).
inline constexpr std::size_t kMaxOffspringCandidates = 50000000;

// Background events by thinning: Poisson(lambda_bar |X||T|) candidates
// uniform on X, kept where a uniform r in [0, lambda_bar) falls below the
// source intensity (lambda_bar sigmoid(f) with f drawn jointly, or the
// explicit field); kept events get t ~ U(T) and m - m0 ~ Exp(beta).
Catalog simulate_background(const SimConfig& cfg, RngStream& rng);

// Multi-generation offspring around an existing background catalog: each
// event spawns Poisson(kappa(m_j) c^{-p} (t_max - t_j)) candidate times
// uniform on (t_j, t_max], thinned by the Omori ratio ((dt+c)/c)^{-p};
// accepted offspring get a location from the spatial Pareto kernel (discarded
// if outside X) and a fresh mark.  Throws NumericalError if the total event
// count exceeds the supercriticality guard.
BranchedCatalog simulate_offspring(const Catalog& background,
                                   const SimConfig& cfg, RngStream& rng);

// Background + offspring with an rng seeded from cfg.seed.
BranchedCatalog simulate_catalog(const SimConfig& cfg);

}  // namespace gpetas
