#include "qct/rng.hpp"

#include <algorithm>
#include <cmath>

namespace qct {

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

double normal_quantile(double p) {
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
               1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
             1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
               5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
             4.2313330701600911252e1) * r + 1.0);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
              3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
            4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
              6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
            2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
              2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
            5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
              1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
            5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

CounterRng::CounterRng(Domain domain, std::uint64_t seed)
    : key_(mix64(mix64(seed + kGamma) ^ (static_cast<std::uint64_t>(domain) * 0xD1B54A32D192ED03ull))) {}

std::uint64_t CounterRng::bits(std::uint64_t stream, std::uint64_t counter) const noexcept {
  std::uint64_t z = mix64(key_ + (stream + 1) * kGamma);
  return mix64(z ^ mix64(counter * 0xD6E8FEB86659FD93ull + kGamma));
}

double CounterRng::uniform(std::uint64_t stream, std::uint64_t counter) const noexcept {
  return (static_cast<double>(bits(stream, counter) >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t stream, std::uint64_t counter) const noexcept {
  return normal_quantile(uniform(stream, counter));
}

NoisePath::NoisePath(std::uint64_t seed, std::uint64_t trajectory_index, double dt,
                     double clip_sigmas)
    : rng_(CounterRng::Domain::QuantumNoise, seed),
      seed_(seed),
      index_(trajectory_index),
      dt_(dt),
      sqrt_dt_(std::sqrt(dt)),
      clip_(clip_sigmas) {}

double NoisePath::increment(std::uint64_t step_index) const noexcept {
  const double z = rng_.normal(index_, step_index);
  return sqrt_dt_ * std::clamp(z, -clip_, clip_);
}

bool NoisePath::clipped(std::uint64_t step_index) const noexcept {
  return std::fabs(rng_.normal(index_, step_index)) > clip_;
}

}  // namespace qct
