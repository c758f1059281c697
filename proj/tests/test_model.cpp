#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qct/error.hpp"
#include "qct/model.hpp"
#include "qct/rng.hpp"

using namespace qct;

TEST_CASE("potential at reference points") {
  const auto s = HamiltonianSpec::duffing();
  CHECK(potential(s, 0.0, 0.0) == doctest::Approx(0.0));
  CHECK(potential(s, 1.0, 0.0) == doctest::Approx(0.5));
  CHECK(potential(s, 2.0, std::numbers::pi / (2.0 * s.drive_freq)) == doctest::Approx(-32.0));
}

TEST_CASE("force and derivatives at reference points") {
  const auto s = HamiltonianSpec::duffing();
  CHECK(force(s, 1.0, 0.0) == doctest::Approx(8.0));
  CHECK(force(s, -3.0, 0.0) == doctest::Approx(-16.0));
  CHECK(force_dx(s, -3.0) == doctest::Approx(-34.0));
  CHECK(force_dxx(s, -3.0) == doctest::Approx(36.0));
}

TEST_CASE("force is minus the gradient of the potential") {
  CounterRng rng(CounterRng::Domain::Orbits, 99);
  for (auto coupling : {DriveCoupling::LinearInX, DriveCoupling::Additive}) {
    auto s = HamiltonianSpec::duffing();
    s.drive_coupling = coupling;
    const double h = 1e-4;
    for (std::uint64_t i = 0; i < 100; ++i) {
      const double x = -6.0 + 12.0 * rng.uniform(i, 0);
      const double t = 10.0 * rng.uniform(i, 1);
      const double fd = -(potential(s, x + h, t) - potential(s, x - h, t)) / (2.0 * h);
      CHECK(std::fabs(force(s, x, t) - fd) <= 1e-6 * std::max(1.0, std::fabs(fd)));
      const double fdx = (force(s, x + h, t) - force(s, x - h, t)) / (2.0 * h);
      CHECK(std::fabs(force_dx(s, x) - fdx) <= 1e-6 * std::max(1.0, std::fabs(fdx)));
      const double fdxx = (force_dx(s, x + h) - force_dx(s, x - h)) / (2.0 * h);
      CHECK(std::fabs(force_dxx(s, x) - fdxx) <= 1e-6 * std::max(1.0, std::fabs(fdxx)));
    }
  }
}

TEST_CASE("additive drive leaves the force untouched") {
  auto a = HamiltonianSpec::duffing();
  a.drive_coupling = DriveCoupling::Additive;
  auto b = a;
  b.drive_amp = 0.0;
  for (double x : {-2.5, 0.3, 4.0}) {
    CHECK(force(a, x, 0.0) == force(b, x, 0.0));
    CHECK(force(a, x, 0.0) == force(a, x, 1.234));
  }
}

TEST_CASE("harmonic and free factories") {
  const auto h = HamiltonianSpec::harmonic(2.0, 3.0);
  CHECK(force_dx(h, 0.7) == doctest::Approx(-2.0 * 9.0));
  CHECK(force(h, 0.5, 1.0) == doctest::Approx(-2.0 * 9.0 * 0.5));
  const auto f = HamiltonianSpec::free_particle();
  CHECK(force(f, 3.0, 2.0) == 0.0);
}

TEST_CASE("spec validation") {
  auto s = HamiltonianSpec::duffing();
  s.mass = 0.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = HamiltonianSpec::duffing();
  s.beta = -1.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = HamiltonianSpec::duffing();
  s.drive_freq = 0.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  CHECK(drive_coupling_from_string(to_string(DriveCoupling::Additive)) == DriveCoupling::Additive);
  CHECK_THROWS_AS(drive_coupling_from_string("quadratic"), ConfigError);
}
