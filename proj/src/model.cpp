#include "qct/model.hpp"

#include <cmath>

#include "qct/error.hpp"

namespace qct {

std::string_view to_string(DriveCoupling c) {
  return c == DriveCoupling::LinearInX ? "linear_in_x" : "additive";
}

DriveCoupling drive_coupling_from_string(std::string_view s) {
  if (s == "linear_in_x" || s == "LinearInX") return DriveCoupling::LinearInX;
  if (s == "additive" || s == "Additive") return DriveCoupling::Additive;
  throw ConfigError("unknown drive coupling '" + std::string(s) + "'");
}

HamiltonianSpec HamiltonianSpec::harmonic(double mass, double omega0) {
  HamiltonianSpec s;
  s.mass = mass;
  s.alpha = -0.5 * mass * omega0 * omega0;
  s.beta = 0.0;
  s.drive_amp = 0.0;
  return s;
}

HamiltonianSpec HamiltonianSpec::free_particle(double mass) {
  HamiltonianSpec s;
  s.mass = mass;
  s.alpha = 0.0;
  s.beta = 0.0;
  s.drive_amp = 0.0;
  return s;
}

void HamiltonianSpec::validate() const {
  if (!(mass > 0.0)) throw ConfigError("model.m must be positive");
  if (!(beta >= 0.0)) throw ConfigError("model.beta must be non-negative");
  if (!(drive_freq > 0.0)) throw ConfigError("model.drive_freq must be positive");
  if (!std::isfinite(alpha) || !std::isfinite(drive_amp))
    throw ConfigError("model coefficients must be finite");
}

double static_potential(const HamiltonianSpec& spec, double x) {
  const double x2 = x * x;
  return -spec.alpha * x2 + spec.beta * x2 * x2;
}

double potential(const HamiltonianSpec& spec, double x, double t) {
  const double drive = spec.drive_amp * std::cos(spec.drive_freq * t);
  const double coupling = spec.drive_coupling == DriveCoupling::LinearInX ? x : 1.0;
  return static_potential(spec, x) + drive * coupling;
}

double force(const HamiltonianSpec& spec, double x, double t) {
  double f = 2.0 * spec.alpha * x - 4.0 * spec.beta * x * x * x;
  if (spec.drive_coupling == DriveCoupling::LinearInX)
    f -= spec.drive_amp * std::cos(spec.drive_freq * t);
  return f;
}

double force_dx(const HamiltonianSpec& spec, double x) {
  return 2.0 * spec.alpha - 12.0 * spec.beta * x * x;
}

double force_dxx(const HamiltonianSpec& spec, double x) { return -24.0 * spec.beta * x; }

double energy(const HamiltonianSpec& spec, double x, double p, double t) {
  return 0.5 * p * p / spec.mass + potential(spec, x, t);
}

}  // namespace qct
