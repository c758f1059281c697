#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "qct/model.hpp"
#include "qct/qstate.hpp"

namespace qct {

struct PhasePoint {
  double x = 0.0;
  double p = 0.0;
};

struct ClassicalEnsemble {
  std::vector<PhasePoint> samples;  // uniform weights
};

// Symplectic Euler plus momentum kick: p' = p + F(x,t) dt + sqrt(2D) dW, x' = x + p'/m dt.
// dW ~ N(0, dt), so the noise contributes <(dp)^2> = 2 D dt.
PhasePoint langevin_step(PhasePoint s, const HamiltonianSpec& spec, double D, double t, double dt, double dW);

// Gaussian cloud matching a coherent state: means (x0, p0), variances hbar/2, no covariance.
ClassicalEnsemble sample_coherent_matched(double x0, double p0, double hbar, std::size_t n, std::uint64_t seed);

struct ClassicalRunOptions {
  double t_final = 12.0;
  double dt = 1e-3;
  double D = 0.01;
  std::uint64_t seed = 1;
  std::vector<double> snapshot_times;  // rounded to the nearest step
  unsigned threads = 1;
};

// Evolves every sample independently; noise for sample i at step s is keyed by (seed, i, s).
// Returns one ensemble per snapshot time.
std::vector<ClassicalEnsemble> evolve_ensemble(const ClassicalEnsemble& initial, const HamiltonianSpec& spec,
                                               const ClassicalRunOptions& opts);

Moments ensemble_moments(const ClassicalEnsemble& ens);

// Normalized 2-D histogram on the axes of `axes` (cell (i,j) centred on (x_i, p_j)).
// Throws DomainError("OutOfRange") naming the escaping fraction if any sample lies outside.
WignerGrid density_histogram(const ClassicalEnsemble& ens, const WignerGrid& axes);

// Classical RK4 for (x, p) together with the tangent flow (dx, dp).
struct TangentState {
  double x, p, dx, dp;
};
TangentState rk4_tangent_step(const TangentState& s, const HamiltonianSpec& spec, double t, double dt);

// Noiseless RK4 orbit; calls visit(t, x, p) at every step including t0.
void integrate_orbit(const HamiltonianSpec& spec, PhasePoint start, double t0, double t_span, double dt,
                     const std::function<void(double, double, double)>& visit);

struct LyapunovOptions {
  double t_span = 2000.0;
  double dt = 0.005;
  std::size_t renorm_every = 10;
  std::size_t blocks_per_orbit = 20;
  double D = 0.0;  // momentum noise along the reference orbit; the tangent flow ignores it
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

struct LyapunovEstimate {
  double lambda_bar = 0.0;  // mean exponent over all orbits
  double std_err = 0.0;     // from block averaging; one block per orbit when n_orbits > 1
  double t_span = 0.0;      // per orbit
  std::size_t n_orbits = 0;
  std::vector<double> orbit_lambda;
  std::vector<double> block_rates;  // orbit-major
  bool non_convergence = false;     // half-span means disagree beyond 3 sigma
  double mass = 1.0;
  HamiltonianSpec spec;

  // Local rate sqrt(|dF/dx| / m).
  double local_lambda(double x) const;
};

// Benettin estimate along a single orbit started at (x0, p0).
LyapunovEstimate lyapunov_benettin(const HamiltonianSpec& spec, double x0, double p0, const LyapunovOptions& opts);

// Phase-space average: Benettin over orbits started from the Gaussian cloud matched to a
// coherent state at (x0, p0) with the given hbar.
LyapunovEstimate lyapunov_ensemble(const HamiltonianSpec& spec, double x0, double p0, double hbar,
                                   std::size_t n_orbits, const LyapunovOptions& opts);

}  // namespace qct
