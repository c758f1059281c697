#pragma once

#include <cstdint>

namespace qct {

// Inverse of the standard normal CDF (Wichura, AS241 PPND16), |rel err| ~ 1e-16.
// Requires 0 < u < 1.
double normal_quantile(double u);

// Stateless counter-based generator: every draw is a pure function of
// (domain, seed, stream, counter), so results never depend on scheduling.
class CounterRng {
 public:
  enum class Domain : std::uint64_t {
    QuantumNoise = 1,
    ClassicalSampling = 2,
    ClassicalNoise = 3,
    Orbits = 4,
  };

  CounterRng(Domain domain, std::uint64_t seed);

  std::uint64_t bits(std::uint64_t stream, std::uint64_t counter) const noexcept;
  // Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform(std::uint64_t stream, std::uint64_t counter) const noexcept;
  double normal(std::uint64_t stream, std::uint64_t counter) const noexcept;

 private:
  std::uint64_t key_;
};

// Wiener increments for one quantum trajectory: dW(step) ~ N(0, dt), clipped
// at +-clip_sigmas * sqrt(dt).
class NoisePath {
 public:
  NoisePath(std::uint64_t seed, std::uint64_t trajectory_index, double dt,
            double clip_sigmas = 6.0);

  double increment(std::uint64_t step_index) const noexcept;
  // True when the raw draw for this step exceeded the clip bound.
  bool clipped(std::uint64_t step_index) const noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t trajectory_index() const noexcept { return index_; }
  double dt() const noexcept { return dt_; }

 private:
  CounterRng rng_;
  std::uint64_t seed_;
  std::uint64_t index_;
  double dt_;
  double sqrt_dt_;
  double clip_;
};

}  // namespace qct
