#include <algorithm>
#include <cmath>
#include <string>

#include "qct/error.hpp"
#include "qct/qdyn.hpp"

namespace qct {

MeasurementSpec MeasurementSpec::from_diffusion(double D, double hbar) {
  if (!(hbar > 0.0)) throw ConfigError("hbar must be positive");
  return MeasurementSpec{D / (hbar * hbar), hbar, 1.0};
}

void MeasurementSpec::validate() const {
  if (!(k >= 0.0) || !std::isfinite(k)) throw ConfigError("measurement strength k must be >= 0");
  if (!(hbar > 0.0)) throw ConfigError("hbar must be positive");
  if (eta != 1.0) throw ConfigError("only unit measurement efficiency (eta = 1) is supported");
}

Propagator::Propagator(const PositionGrid& grid, const HamiltonianSpec& spec, const MeasurementSpec& meas, double dt)
    : grid_(grid), spec_(spec), meas_(meas), dt_(dt), fft_(grid.size()) {
  spec.validate();
  meas.validate();
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  const std::size_t n = grid.size();
  x_.resize(n);
  v_static_.resize(n);
  p2_.resize(n);
  half_kick_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    x_[i] = grid.x(i);
    v_static_[i] = static_potential(spec, x_[i]);
    const double p = grid.momentum(i, meas.hbar);
    p2_[i] = 0.5 * p * p / spec.mass;
    half_kick_[i] = std::polar(1.0 / static_cast<double>(n), -p2_[i] * 0.5 * dt / meas.hbar);
  }
}

void Propagator::potential_phase(WaveFunction& psi, double t, double tau) const {
  const double drive = spec_.drive_amp * std::cos(spec_.drive_freq * t);
  const bool linear = spec_.drive_coupling == DriveCoupling::LinearInX;
  const double a = -tau / meas_.hbar;
  for (std::size_t i = 0; i < x_.size(); ++i) {
    const double v = v_static_[i] + drive * (linear ? x_[i] : 1.0);
    psi.amplitudes[i] *= std::polar(1.0, a * v);
  }
}

void Propagator::kinetic(WaveFunction& psi, double tau) const {
  fft_.forward(psi.amplitudes);
  if (tau == 0.5 * dt_) {
    for (std::size_t j = 0; j < p2_.size(); ++j) psi.amplitudes[j] *= half_kick_[j];
  } else {
    const double inv_n = 1.0 / static_cast<double>(p2_.size());
    for (std::size_t j = 0; j < p2_.size(); ++j)
      psi.amplitudes[j] *= std::polar(inv_n, -p2_[j] * tau / meas_.hbar);
  }
  fft_.inverse(psi.amplitudes);
}

void Propagator::apply_hamiltonian(WaveFunction& psi, double t_mid, double tau) const {
  potential_phase(psi, t_mid, 0.5 * tau);
  kinetic(psi, tau);
  potential_phase(psi, t_mid, 0.5 * tau);
}

void Propagator::check_boundary(const WaveFunction& psi) const {
  const double leak = psi.boundary_mass(boundary_window(grid_));
  if (!(leak <= boundary_threshold))
    throw InvariantError("BoundaryLeak", "probability mass " + std::to_string(leak) +
                                             " reached the grid boundary (threshold " +
                                             std::to_string(boundary_threshold) + ")");
}

void Propagator::step(WaveFunction& psi, double t, double dW) const {
  const double t1 = t + 0.25 * dt_;
  const double t2 = t + 0.75 * dt_;
  const double quarter = 0.25 * dt_;

  potential_phase(psi, t1, quarter);
  kinetic(psi, 0.5 * dt_);

  // <x> is unaffected by the diagonal phases, so it can be taken before the fused update.
  double w = 0.0, sx = 0.0;
  for (std::size_t i = 0; i < x_.size(); ++i) {
    const double a = std::norm(psi.amplitudes[i]);
    w += a;
    sx += a * x_[i];
  }
  const double mean_x = sx / w;

  const double k = meas_.k;
  const double amp = std::sqrt(2.0 * k) * dW;
  const double d1 = spec_.drive_amp * std::cos(spec_.drive_freq * t1);
  const double d2 = spec_.drive_amp * std::cos(spec_.drive_freq * t2);
  const bool linear = spec_.drive_coupling == DriveCoupling::LinearInX;
  const double a = -quarter / meas_.hbar;
  double norm2 = 0.0;
  for (std::size_t i = 0; i < x_.size(); ++i) {
    const double coupling = linear ? x_[i] : 1.0;
    const double phase = a * (2.0 * v_static_[i] + (d1 + d2) * coupling);
    const double u = x_[i] - mean_x;
    const double gain = std::exp(-2.0 * k * u * u * dt_ + amp * u);
    psi.amplitudes[i] *= std::polar(gain, phase);
    norm2 += std::norm(psi.amplitudes[i]);
  }
  norm2 *= grid_.dx();
  if (!(std::sqrt(norm2) >= 1e-3) || !std::isfinite(norm2))
    throw InvariantError("NormCollapse", "state norm collapsed to " + std::to_string(std::sqrt(norm2)) +
                                             " at t = " + std::to_string(t) + "; reduce dt");
  const double scale = 1.0 / std::sqrt(norm2);
  for (auto& v : psi.amplitudes) v *= scale;

  kinetic(psi, 0.5 * dt_);
  potential_phase(psi, t2, quarter);
  check_boundary(psi);
}

WaveFunction step_conditioned(WaveFunction psi, const HamiltonianSpec& spec, const MeasurementSpec& meas, double t,
                              double dt, double dW) {
  const double bound = 6.0 * std::sqrt(dt);
  dW = std::clamp(dW, -bound, bound);
  Propagator(psi.grid, spec, meas, dt).step(psi, t, dW);
  return psi;
}

}  // namespace qct
