#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "qct/fft.hpp"
#include "qct/model.hpp"
#include "qct/qstate.hpp"

namespace qct::test {

// Normalized superposition of coherent states at (+a, 0) and (-a, 0).
inline WaveFunction even_cat(const PositionGrid& grid, double a, double hbar) {
  auto left = coherent_state(grid, -a, 0.0, hbar);
  const auto right = coherent_state(grid, a, 0.0, hbar);
  for (std::size_t i = 0; i < grid.size(); ++i) left.amplitudes[i] += right.amplitudes[i];
  left.normalize();
  return left;
}

// <p^2>/(2m) + <V(x, t)> with the kinetic term from the spectral representation.
inline double mean_energy(const WaveFunction& psi, const HamiltonianSpec& spec, double t) {
  const auto n = psi.grid.size();
  CVector phi(psi.amplitudes.begin(), psi.amplitudes.end());
  Fft(n).forward(phi);
  double kin = 0.0, norm_p = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double p = psi.grid.momentum(j, psi.hbar);
    kin += std::norm(phi[j]) * p * p;
    norm_p += std::norm(phi[j]);
  }
  double pot = 0.0;
  for (std::size_t i = 0; i < n; ++i) pot += std::norm(psi.amplitudes[i]) * potential(spec, psi.grid.x(i), t);
  return kin / norm_p / (2.0 * spec.mass) + pot * psi.grid.dx();
}

struct Gaussian {
  double vx, vp, c;
};

// RK4 for dVx = 2C/m - 8k Vx^2, dVp = -8k C^2 + 2 hbar^2 k, dC = Vp/m - 8k Vx C.
inline Gaussian riccati(Gaussian g, double m, double k, double hbar, double t, int steps) {
  auto f = [&](const Gaussian& s) {
    return Gaussian{2.0 * s.c / m - 8.0 * k * s.vx * s.vx, -8.0 * k * s.c * s.c + 2.0 * hbar * hbar * k,
                    s.vp / m - 8.0 * k * s.vx * s.c};
  };
  const double h = t / steps;
  for (int i = 0; i < steps; ++i) {
    const auto k1 = f(g);
    const auto k2 = f({g.vx + 0.5 * h * k1.vx, g.vp + 0.5 * h * k1.vp, g.c + 0.5 * h * k1.c});
    const auto k3 = f({g.vx + 0.5 * h * k2.vx, g.vp + 0.5 * h * k2.vp, g.c + 0.5 * h * k2.c});
    const auto k4 = f({g.vx + h * k3.vx, g.vp + h * k3.vp, g.c + h * k3.c});
    g.vx += h / 6.0 * (k1.vx + 2 * k2.vx + 2 * k3.vx + k4.vx);
    g.vp += h / 6.0 * (k1.vp + 2 * k2.vp + 2 * k3.vp + k4.vp);
    g.c += h / 6.0 * (k1.c + 2 * k2.c + 2 * k3.c + k4.c);
  }
  return g;
}

// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace qct::test
