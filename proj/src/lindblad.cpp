#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

#include "qct/error.hpp"
#include "qct/qdyn.hpp"

namespace qct {

namespace {

void transpose(CVector& m, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) std::swap(m[i * n + j], m[j * n + i]);
}

double min_eigenvalue(const DensityMatrix& rho) {
  const auto n = static_cast<Eigen::Index>(rho.size());
  Eigen::MatrixXcd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = rho(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

LindbladResult lindblad_evolve(const DensityMatrix& rho0, const HamiltonianSpec& spec, const MeasurementSpec& meas,
                               double t_final, double dt, const std::vector<double>& record_times) {
  spec.validate();
  meas.validate();
  const std::size_t n = rho0.size();
  if (n > 256) throw ConfigError("lindblad_evolve is limited to grids of at most 256 points");
  if (std::abs(rho0.trace() - 1.0) > 1e-10) throw ConfigError("initial density matrix must have unit trace");

  const auto& grid = rho0.grid;
  const double hbar = meas.hbar;
  const std::size_t n_steps = step_count(t_final, dt);
  Fft fft(n);

  std::vector<double> x(n), v_static(n);
  CVector kick(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = grid.x(i);
    v_static[i] = static_potential(spec, x[i]);
    const double p = grid.momentum(i, hbar);
    kick[i] = std::polar(1.0 / static_cast<double>(n), -0.5 * p * p / spec.mass * dt / hbar);
  }
  // Half-step dephasing factors exp(-k (x_i - x_j)^2 dt/2): a positive semidefinite Schur multiplier.
  std::vector<double> dephase(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double d = x[i] - x[j];
      dephase[i * n + j] = std::exp(-meas.k * d * d * 0.5 * dt);
    }

  CVector vphase(n);
  auto apply_u_rows = [&](CVector& m) {
    CVector row(n);
    for (std::size_t r = 0; r < n; ++r) {
      cplx* base = m.data() + r * n;
      for (std::size_t i = 0; i < n; ++i) row[i] = base[i] * vphase[i];
      fft.forward(row);
      for (std::size_t j = 0; j < n; ++j) row[j] *= kick[j];
      fft.inverse(row);
      for (std::size_t i = 0; i < n; ++i) base[i] = row[i] * vphase[i];
    }
  };

  std::vector<std::size_t> rec_steps;
  for (double tr : record_times) rec_steps.push_back(static_cast<std::size_t>(std::llround(tr / dt)));

  LindbladResult out;
  DensityMatrix rho = rho0;
  auto observe = [&](std::size_t step) {
    for (std::size_t s : rec_steps)
      if (s == step) {
        const double lam = min_eigenvalue(rho);
        if (lam < -1e-6)
          throw InvariantError("PositivityLoss", "density matrix eigenvalue " + std::to_string(lam) +
                                                     " below -1e-6; reduce dt");
        out.times.push_back(static_cast<double>(step) * dt);
        out.states.push_back(rho);
        out.min_eigenvalue.push_back(lam);
      }
  };

  observe(0);
  CVector& m = rho.values;
  for (std::size_t step = 0; step < n_steps; ++step) {
    const double t_mid = (static_cast<double>(step) + 0.5) * dt;
    const double drive = spec.drive_amp * std::cos(spec.drive_freq * t_mid);
    const bool linear = spec.drive_coupling == DriveCoupling::LinearInX;
    for (std::size_t i = 0; i < n; ++i)
      vphase[i] = std::polar(1.0, -0.5 * dt / hbar * (v_static[i] + drive * (linear ? x[i] : 1.0)));

    for (std::size_t i = 0; i < n * n; ++i) m[i] *= dephase[i];
    // U rho U^dagger = U (U rho)^dagger for Hermitian rho; column transforms via transposes.
    transpose(m, n);
    apply_u_rows(m);  // (U rho)^T
    for (auto& v : m) v = std::conj(v);  // (U rho)^dagger
    transpose(m, n);
    apply_u_rows(m);
    transpose(m, n);
    for (std::size_t i = 0; i < n * n; ++i) m[i] *= dephase[i];
    rho.hermitize();
    observe(step + 1);
  }
  return out;
}

}  // namespace qct
