#pragma once

#include <cstdint>
#include <vector>

#include "qct/model.hpp"
#include "qct/qstate.hpp"
#include "qct/rng.hpp"

namespace qct {

// Continuous position measurement of strength k; momentum diffusion D = hbar^2 k.
struct MeasurementSpec {
  double k = 1.0;
  double hbar = 0.1;
  double eta = 1.0;  // only unit efficiency is supported

  static MeasurementSpec from_diffusion(double D, double hbar);
  double diffusion() const noexcept { return hbar * hbar * k; }
  // ConfigError unless k >= 0, hbar > 0 and eta == 1.
  void validate() const;
};

// Conditioned pure-state propagator for
//   d psi = [-(i/hbar) H dt - k X^2 dt + sqrt(2k) X dW] psi,  X = x - <x>,
// the unit-efficiency unraveling of d rho = -(i/hbar)[H,rho]dt - k[x,[x,rho]]dt + ...
// One step: Hamiltonian half-step (Strang, V at its sub-interval midpoint),
// multiply by exp[-2k X^2 dt + sqrt(2k) X dW], renormalize, second Hamiltonian half-step.
class Propagator {
 public:
  Propagator(const PositionGrid& grid, const HamiltonianSpec& spec, const MeasurementSpec& meas, double dt);

  double dt() const noexcept { return dt_; }

  // Full conditioned step from t to t + dt. Throws InvariantError NormCollapse when the
  // pre-normalization norm drops below 1e-3 and BoundaryLeak when the edge mass
  // exceeds boundary_threshold.
  void step(WaveFunction& psi, double t, double dW) const;

  // exp(-i V(t_mid) tau/2hbar) exp(-i T tau/hbar) exp(-i V(t_mid) tau/2hbar); unitary, no renormalization.
  void apply_hamiltonian(WaveFunction& psi, double t_mid, double tau) const;

  double boundary_threshold = 1e-6;

 private:
  void potential_phase(WaveFunction& psi, double t, double tau) const;
  void kinetic(WaveFunction& psi, double tau) const;
  void check_boundary(const WaveFunction& psi) const;

  PositionGrid grid_;
  HamiltonianSpec spec_;
  MeasurementSpec meas_;
  double dt_;
  Fft fft_;
  std::vector<double> x_;
  std::vector<double> v_static_;
  std::vector<double> p2_;  // p_j^2 / (2m)
  CVector half_kick_;       // exp(-i p^2 dt / (4 m hbar)) / n
};

// One conditioned step built from scratch; prefer Propagator for loops.
WaveFunction step_conditioned(WaveFunction psi, const HamiltonianSpec& spec, const MeasurementSpec& meas,
                              double t, double dt, double dW);

struct TrajectoryOptions {
  double t_final = 12.0;
  double dt = 1e-4;
  std::size_t record_every = 100;
  std::vector<double> snapshot_times;  // rounded to the nearest step
  double boundary_threshold = 1e-6;
};

struct TrajectoryRecord {
  std::vector<double> t;
  std::vector<Moments> moments;
  std::vector<double> norm_leak;
  std::vector<double> snapshot_times;
  std::vector<WaveFunction> snapshots;
  std::size_t clip_events = 0;
  std::uint64_t seed = 0;
  std::uint64_t trajectory_index = 0;
};

std::size_t step_count(double t_final, double dt);

// Deterministic function of (psi0, noise path): same inputs give bitwise-identical records.
TrajectoryRecord run_trajectory(const WaveFunction& psi0, const HamiltonianSpec& spec, const MeasurementSpec& meas,
                                const TrajectoryOptions& opts, const NoisePath& noise);

// Independent trajectories with indices [first_index, first_index + n_traj).
std::vector<TrajectoryRecord> run_ensemble(const WaveFunction& psi0, const HamiltonianSpec& spec,
                                           const MeasurementSpec& meas, const TrajectoryOptions& opts,
                                           std::uint64_t seed, std::size_t n_traj, unsigned threads,
                                           std::uint64_t first_index = 0);

// Moments of the trajectory-averaged (unconditioned) state at every record time.
std::vector<Moments> unconditioned_moments(const std::vector<TrajectoryRecord>& records);

struct EnsembleOptions {
  double t_final = 12.0;
  double dt = 1e-4;
  std::size_t n_traj = 100;
  std::uint64_t seed = 1;
  std::vector<double> wigner_times;
  std::size_t n_p = 0;
  std::size_t record_every = 100;
  bool keep_states = false;
  unsigned threads = 1;
};

struct AveragedDensity {
  std::vector<double> times;
  std::vector<WignerGrid> wigner;  // one per time: mean of per-trajectory Wigner functions
  std::vector<std::vector<WaveFunction>> states;  // [time][trajectory], only with keep_states
  std::vector<Moments> unconditioned;              // at the record cadence
  std::vector<double> record_times;
  std::size_t clip_events = 0;
};

AveragedDensity average_ensemble(const WaveFunction& psi0, const HamiltonianSpec& spec, const MeasurementSpec& meas,
                                 const EnsembleOptions& opts);

struct LindbladResult {
  std::vector<double> times;
  std::vector<DensityMatrix> states;
  std::vector<double> min_eigenvalue;
};

// Direct integration of d rho = -(i/hbar)[H,rho]dt - k[x,[x,rho]]dt on a reduced grid (n <= 256):
// exp(L_D dt/2) exp(L_H dt) exp(L_D dt/2), with the Hamiltonian part Strang-split in V and T.
// Each factor is completely positive and trace-preserving. Throws InvariantError PositivityLoss
// if the minimum eigenvalue at a record time is below -1e-6.
LindbladResult lindblad_evolve(const DensityMatrix& rho0, const HamiltonianSpec& spec, const MeasurementSpec& meas,
                               double t_final, double dt, const std::vector<double>& record_times);

}  // namespace qct
