#pragma once

#include <string>
#include <string_view>

namespace qct {

enum class DriveCoupling {
  LinearInX,  // V += drive_amp * x * cos(drive_freq * t)
  Additive,   // V += drive_amp * cos(drive_freq * t); dynamically inert
};

std::string_view to_string(DriveCoupling c);
DriveCoupling drive_coupling_from_string(std::string_view s);

// Driven quartic oscillator H = p^2/(2m) - alpha x^2 + beta x^4 + drive.
// alpha < 0 with beta = 0 is a harmonic oscillator of frequency sqrt(-2 alpha / m).
struct HamiltonianSpec {
  double mass = 1.0;
  double alpha = 10.0;
  double beta = 0.5;
  double drive_amp = 10.0;
  double drive_freq = 6.07;
  DriveCoupling drive_coupling = DriveCoupling::LinearInX;

  // The chaotic Duffing run: (m, alpha, beta, Lambda, omega) = (1, 10, 0.5, 10, 6.07).
  static HamiltonianSpec duffing() { return {}; }
  static HamiltonianSpec harmonic(double mass, double omega0);
  static HamiltonianSpec free_particle(double mass = 1.0);

  // Throws ConfigError when mass <= 0, beta < 0 or drive_freq <= 0.
  void validate() const;
};

double potential(const HamiltonianSpec& spec, double x, double t);
// Time-independent part of the potential, -alpha x^2 + beta x^4.
double static_potential(const HamiltonianSpec& spec, double x);
double force(const HamiltonianSpec& spec, double x, double t);
double force_dx(const HamiltonianSpec& spec, double x);
double force_dxx(const HamiltonianSpec& spec, double x);

// Classical energy p^2/(2m) + V(x, t).
double energy(const HamiltonianSpec& spec, double x, double p, double t);

}  // namespace qct
