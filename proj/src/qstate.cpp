#include "qct/qstate.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "qct/error.hpp"

namespace qct {

PositionGrid::PositionGrid(std::size_t n_points, double x_min, double x_max)
    : n_(n_points), x_min_(x_min), x_max_(x_max), dx_((x_max - x_min) / static_cast<double>(n_points)) {
  if (n_points < 2 || (n_points & (n_points - 1)) != 0)
    throw ConfigError("quantum.n_points must be a power of two >= 2, got " + std::to_string(n_points));
  if (!(x_max > x_min)) throw ConfigError("quantum.x_max must exceed quantum.x_min");
}

double PositionGrid::p_max(double hbar) const noexcept { return std::numbers::pi * hbar / dx_; }

double PositionGrid::momentum(std::size_t j, double hbar) const noexcept {
  const auto n = static_cast<std::ptrdiff_t>(n_);
  auto k = static_cast<std::ptrdiff_t>(j);
  if (k >= n / 2) k -= n;
  return 2.0 * std::numbers::pi * hbar * static_cast<double>(k) / (static_cast<double>(n_) * dx_);
}

void PositionGrid::require_momentum_extent(double hbar, double p_extent) const {
  if (!(p_max(hbar) > p_extent))
    throw ConfigError("momentum Nyquist bound pi*hbar/dx = " + std::to_string(p_max(hbar)) +
                      " does not exceed the required momentum extent " + std::to_string(p_extent));
}

double WaveFunction::norm_squared() const {
  double s = 0.0;
  for (const auto& a : amplitudes) s += std::norm(a);
  return s * grid.dx();
}

void WaveFunction::normalize() {
  const double n2 = norm_squared();
  if (!(n2 > 0.0) || !std::isfinite(n2)) throw InvariantError("NormCollapse", "cannot normalize a null state");
  const double scale = 1.0 / std::sqrt(n2);
  for (auto& a : amplitudes) a *= scale;
}

double WaveFunction::boundary_mass(std::size_t edge_points) const {
  const std::size_t n = amplitudes.size();
  edge_points = std::min(edge_points, n / 2);
  double s = 0.0;
  for (std::size_t i = 0; i < edge_points; ++i) s += std::norm(amplitudes[i]) + std::norm(amplitudes[n - 1 - i]);
  return s * grid.dx();
}

std::vector<double> WaveFunction::position_density() const {
  std::vector<double> out(amplitudes.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::norm(amplitudes[i]);
  return out;
}

std::size_t boundary_window(const PositionGrid& grid) { return std::max<std::size_t>(1, grid.size() / 32); }

WaveFunction coherent_state(const PositionGrid& grid, double x0, double p0, double hbar) {
  if (!(hbar > 0.0)) throw ConfigError("hbar must be positive");
  const double sigma = std::sqrt(0.5 * hbar);  // both V_x and V_p equal hbar/2
  auto tail = [&](double lo, double hi, double centre) {
    // Gaussian mass outside [lo, hi] for standard deviation sigma.
    return 0.5 * std::erfc((centre - lo) / (sigma * std::numbers::sqrt2)) +
           0.5 * std::erfc((hi - centre) / (sigma * std::numbers::sqrt2));
  };
  const double x_out = tail(grid.x_min(), grid.x_max() - grid.dx(), x0);
  const double p_out = tail(-grid.p_max(hbar), grid.p_max(hbar), p0);
  if (!(x_out <= 1e-10) || !(p_out <= 1e-10))
    throw InvariantError("TruncationError",
                         "coherent state at (" + std::to_string(x0) + ", " + std::to_string(p0) +
                             ") is truncated by the grid (position tail " + std::to_string(x_out) +
                             ", momentum tail " + std::to_string(p_out) + ")");

  WaveFunction psi{grid, CVector(grid.size()), hbar};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.x(i);
    const double u = x - x0;
    // Phase p0 (x - x0)/hbar keeps the global phase fixed at the centre.
    psi.amplitudes[i] = std::polar(std::exp(-u * u / (4.0 * sigma * sigma)), p0 * u / hbar);
  }
  psi.normalize();
  return psi;
}

namespace {

// Momentum moments from the spectral representation; also returns P psi in position space.
struct SpectralMoments {
  double mean_p;
  double var_p;
  CVector p_psi;
};

SpectralMoments spectral_moments(const WaveFunction& psi) {
  const std::size_t n = psi.grid.size();
  Fft fft(n);
  CVector phi(psi.amplitudes.begin(), psi.amplitudes.end());
  fft.forward(phi);
  double w = 0.0, s1 = 0.0, s2 = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double p = psi.grid.momentum(j, psi.hbar);
    const double a = std::norm(phi[j]);
    w += a;
    s1 += a * p;
    s2 += a * p * p;
  }
  const double mean_p = s1 / w;
  const double var_p = std::max(0.0, s2 / w - mean_p * mean_p);
  for (std::size_t j = 0; j < n; ++j) phi[j] *= psi.grid.momentum(j, psi.hbar) / static_cast<double>(n);
  fft.inverse(phi);
  return {mean_p, var_p, std::move(phi)};
}

}  // namespace

Moments moments(const WaveFunction& psi) {
  const auto& g = psi.grid;
  double w = 0.0, s1 = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double a = std::norm(psi.amplitudes[i]);
    w += a;
    s1 += a * g.x(i);
  }
  Moments m;
  m.mean_x = s1 / w;
  double s2 = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double u = g.x(i) - m.mean_x;
    s2 += std::norm(psi.amplitudes[i]) * u * u;
  }
  m.var_x = s2 / w;

  const auto sp = spectral_moments(psi);
  m.mean_p = sp.mean_p;
  m.var_p = sp.var_p;
  // Re <(x - <x>) P>; the symmetrized covariance equals this real part.
  double c = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    c += (std::conj(psi.amplitudes[i]) * sp.p_psi[i]).real() * (g.x(i) - m.mean_x);
  m.cov_xp = c / w;
  return m;
}

DensityMatrix DensityMatrix::pure(const WaveFunction& psi) {
  const std::size_t n = psi.grid.size();
  DensityMatrix rho{psi.grid, CVector(n * n), psi.hbar};
  const double dx = psi.grid.dx();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) rho(i, j) = psi.amplitudes[i] * std::conj(psi.amplitudes[j]) * dx;
  return rho;
}

cplx DensityMatrix::trace() const {
  cplx t = 0.0;
  for (std::size_t i = 0; i < size(); ++i) t += (*this)(i, i);
  return t;
}

double DensityMatrix::purity() const {
  // Tr(rho^2) = sum_ij |rho_ij|^2 for Hermitian rho.
  double s = 0.0;
  for (const auto& v : values) s += std::norm(v);
  return s;
}

void DensityMatrix::hermitize() {
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i) {
    (*this)(i, i) = (*this)(i, i).real();
    for (std::size_t j = i + 1; j < n; ++j) {
      const cplx a = 0.5 * ((*this)(i, j) + std::conj((*this)(j, i)));
      (*this)(i, j) = a;
      (*this)(j, i) = std::conj(a);
    }
  }
}

Moments DensityMatrix::moments() const {
  const std::size_t n = size();
  Moments m;
  double w = 0.0, s1 = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = (*this)(i, i).real();
    w += a;
    s1 += a * grid.x(i);
  }
  m.mean_x = s1 / w;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = grid.x(i) - m.mean_x;
    s2 += (*this)(i, i).real() * u * u;
  }
  m.var_x = s2 / w;

  // Column transforms: A = F rho (FFT along the row index of every column).
  Fft fft(n);
  CVector col(n);
  CVector a(n * n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) col[i] = (*this)(i, j);
    fft.forward(col);
    for (std::size_t k = 0; k < n; ++k) a[k * n + j] = col[k];
  }
  // <p^r> = (1/n) sum_k p_k^r (F rho F^dagger)_kk, (F rho F^dagger)_kk = sum_j A_kj e^{+2 pi i kj/n}.
  double pw = 0.0, p1 = 0.0, p2 = 0.0;
  CVector row(n);
  for (std::size_t k = 0; k < n; ++k) {
    cplx d = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      d += a[k * n + j] * std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(k * j % n) / static_cast<double>(n));
    const double pk = grid.momentum(k, hbar);
    pw += d.real();
    p1 += d.real() * pk;
    p2 += d.real() * pk * pk;
  }
  m.mean_p = p1 / pw;
  m.var_p = std::max(0.0, p2 / pw - m.mean_p * m.mean_p);
  // cov = Re sum_i (P rho)_ii (x_i - <x>), P rho = F^-1 diag(p) F rho.
  double c = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) col[k] = a[k * n + j] * grid.momentum(k, hbar) / static_cast<double>(n);
    fft.inverse(col);
    c += col[j].real() * (grid.x(j) - m.mean_x);
  }
  m.cov_xp = c / w;
  return m;
}

WignerGrid::WignerGrid(std::size_t nx, double x0, double dx_, std::size_t np, double p0, double dp_)
    : n_x(nx), n_p(np), x_min(x0), dx(dx_), p_min(p0), dp(dp_), values(nx * np, 0.0) {}

bool WignerGrid::same_axes(const WignerGrid& o) const noexcept {
  return n_x == o.n_x && n_p == o.n_p && x_min == o.x_min && dx == o.dx && p_min == o.p_min && dp == o.dp;
}

double WignerGrid::integral() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s * dx * dp;
}

std::vector<double> WignerGrid::position_marginal() const {
  std::vector<double> out(n_x, 0.0);
  for (std::size_t i = 0; i < n_x; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n_p; ++j) s += (*this)(i, j);
    out[i] = s * dp;
  }
  return out;
}

Moments WignerGrid::moments() const {
  double w = 0.0, sx = 0.0, sp = 0.0;
  for (std::size_t i = 0; i < n_x; ++i)
    for (std::size_t j = 0; j < n_p; ++j) {
      const double v = (*this)(i, j);
      w += v;
      sx += v * x(i);
      sp += v * p(j);
    }
  Moments m;
  m.mean_x = sx / w;
  m.mean_p = sp / w;
  double vxx = 0.0, vpp = 0.0, vxp = 0.0;
  for (std::size_t i = 0; i < n_x; ++i)
    for (std::size_t j = 0; j < n_p; ++j) {
      const double v = (*this)(i, j);
      const double u = x(i) - m.mean_x, q = p(j) - m.mean_p;
      vxx += v * u * u;
      vpp += v * q * q;
      vxp += v * u * q;
    }
  m.var_x = vxx / w;
  m.var_p = vpp / w;
  m.cov_xp = vxp / w;
  return m;
}

}  // namespace qct
