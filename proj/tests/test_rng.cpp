#include <doctest.h>

#include <boost/math/distributions/normal.hpp>
#include <cmath>

#include "qct/rng.hpp"

using namespace qct;

TEST_CASE("normal quantile matches Boost") {
  const boost::math::normal_distribution<double> nd;
  double worst = 0.0;
  for (double u : {1e-300, 1e-30, 1e-10, 1e-5, 0.001, 0.02425, 0.1, 0.3, 0.5, 0.7, 0.9, 0.97575, 0.999, 1.0 - 1e-10}) {
    const double ref = boost::math::quantile(nd, u);
    worst = std::max(worst, std::fabs(normal_quantile(u) - ref) / std::max(1.0, std::fabs(ref)));
  }
  CHECK(worst < 1e-14);
}

TEST_CASE("counter generator is a pure function of its key") {
  const CounterRng a(CounterRng::Domain::QuantumNoise, 7), b(CounterRng::Domain::QuantumNoise, 7);
  const CounterRng c(CounterRng::Domain::ClassicalNoise, 7), d(CounterRng::Domain::QuantumNoise, 8);
  CHECK(a.bits(3, 11) == b.bits(3, 11));
  CHECK(a.bits(3, 11) != c.bits(3, 11));
  CHECK(a.bits(3, 11) != d.bits(3, 11));
  CHECK(a.bits(3, 11) != a.bits(3, 12));
  CHECK(a.bits(3, 11) != a.bits(4, 11));
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const double u = a.uniform(0, i);
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("Wiener increments have mean 0 and variance dt") {
  const double dt = 1e-4;
  const NoisePath path(42, 3, dt);
  const std::size_t n = 200000;
  double s = 0.0, s2 = 0.0, s4 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = path.increment(i);
    s += w;
    s2 += w * w;
    s4 += w * w * w * w;
  }
  const double mean = s / n, var = s2 / n;
  CHECK(std::fabs(mean) < 4.0 * std::sqrt(dt / n));
  // Var(dW^2) = 2 dt^2
  CHECK(std::fabs(var - dt) < 4.0 * std::sqrt(2.0 / n) * dt);
  CHECK(s4 / n == doctest::Approx(3.0 * dt * dt).epsilon(0.05));
}

TEST_CASE("noise paths are reproducible and clipped") {
  const NoisePath a(1, 0, 1e-3), b(1, 0, 1e-3), c(1, 1, 1e-3);
  CHECK(a.increment(17) == b.increment(17));
  CHECK(a.increment(17) != c.increment(17));
  const NoisePath tight(1, 0, 1.0, 0.5);
  std::size_t clipped = 0;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    CHECK(std::fabs(tight.increment(i)) <= 0.5);
    clipped += tight.clipped(i);
  }
  // P(|Z| > 0.5) = 0.617
  CHECK(clipped > 550);
  CHECK(clipped < 690);
}
