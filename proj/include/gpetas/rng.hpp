#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace gpetas {

// Deterministic random stream used everywhere in the library.
//
// A single mt19937_64 engine is threaded through every stochastic routine so
// that a run is fully reproducible from its seed, and so that the engine state
// can be serialized into checkpoints (stream round-trips exactly through the
// standard textual representation).
class RngStream {
 public:
  RngStream() : engine_(0) {}
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  std::mt19937_64& engine() { return engine_; }

  // U(0,1)
  double uniform() {
    return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
  }
  // U(a,b)
  double uniform(double a, double b) {
    return std::uniform_real_distribution<double>(a, b)(engine_);
  }
  // N(0,1)
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  // N(mean, sd^2)
  double normal(double mean, double sd) {
    return std::normal_distribution<double>(mean, sd)(engine_);
  }
  // Gamma with given shape and *rate* (mean = shape/rate).
  double gamma(double shape, double rate) {
    return std::gamma_distribution<double>(shape, 1.0 / rate)(engine_);
  }
  // Exponential with given rate (mean 1/rate).
  double exponential(double rate) {
    return std::exponential_distribution<double>(rate)(engine_);
  }
  long poisson(double mean) {
    return std::poisson_distribution<long>(mean)(engine_);
  }
  // Inverse Gaussian IG(mu, lambda) via the Michael-Schucany-Haas transform.
  double inverse_gaussian(double mu, double lambda) {
    const double v = normal();
    const double y = v * v;
    const double x = mu + mu * mu * y / (2.0 * lambda) -
                     (mu / (2.0 * lambda)) *
                         std::sqrt(4.0 * mu * lambda * y + mu * mu * y * y);
    if (uniform() > mu / (mu + x)) return mu * mu / x;
    return x;
  }

  // Engine state as text; round-trips exactly.
  std::string serialize_state() const;
  void restore_state(const std::string& state);

 private:
  std::mt19937_64 engine_;
};

}  // namespace gpetas
