#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "qct/fft.hpp"

namespace qct {

// Uniform periodic position grid x_i = x_min + i*dx, dx = (x_max - x_min)/n.
class PositionGrid {
 public:
  // n_points must be a power of two >= 2 and x_max > x_min (ConfigError otherwise).
  PositionGrid(std::size_t n_points, double x_min, double x_max);

  std::size_t size() const noexcept { return n_; }
  double x_min() const noexcept { return x_min_; }
  double x_max() const noexcept { return x_max_; }
  double dx() const noexcept { return dx_; }
  double x(std::size_t i) const noexcept { return x_min_ + static_cast<double>(i) * dx_; }

  // Nyquist momentum pi*hbar/dx.
  double p_max(double hbar) const noexcept;
  // Momentum of FFT bin j (standard FFT ordering; bin n/2 is -p_max).
  double momentum(std::size_t j, double hbar) const noexcept;
  // ConfigError unless p_max(hbar) exceeds the momentum extent the dynamics needs.
  void require_momentum_extent(double hbar, double p_extent) const;

  bool operator==(const PositionGrid&) const = default;

 private:
  std::size_t n_;
  double x_min_;
  double x_max_;
  double dx_;
};

struct WaveFunction {
  PositionGrid grid;
  CVector amplitudes;
  double hbar;

  double norm_squared() const;  // dx * sum |psi_i|^2
  void normalize();
  // Probability mass in the outer `edge_points` cells on each side.
  double boundary_mass(std::size_t edge_points) const;
  std::vector<double> position_density() const;
};

struct Moments {
  double mean_x = 0.0;
  double mean_p = 0.0;
  double var_x = 0.0;
  double var_p = 0.0;
  double cov_xp = 0.0;
};

// Default width of the boundary-leak window: n/32 cells on each side.
std::size_t boundary_window(const PositionGrid& grid);

// Minimum-uncertainty state with V_x = V_p = hbar/2 centred at (x0, p0).
// Throws InvariantError("TruncationError") when more than 1e-10 of the
// Gaussian mass falls outside the position or momentum window of the grid.
WaveFunction coherent_state(const PositionGrid& grid, double x0, double p0, double hbar);

Moments moments(const WaveFunction& psi);

// Hermitian density matrix on a position grid, row-major rho(i, j) = <x_i|rho|x_j> * dx.
// The dx factor makes trace() = sum_i rho(i,i).
struct DensityMatrix {
  PositionGrid grid;
  CVector values;
  double hbar;

  static DensityMatrix pure(const WaveFunction& psi);
  std::size_t size() const noexcept { return grid.size(); }
  cplx& operator()(std::size_t i, std::size_t j) { return values[i * grid.size() + j]; }
  const cplx& operator()(std::size_t i, std::size_t j) const { return values[i * grid.size() + j]; }
  cplx trace() const;
  double purity() const;
  void hermitize();
  Moments moments() const;
};

// Real phase-space grid, row-major in x: value(i, j) at (x_min + i*dx, p_min + j*dp).
// Hosts Wigner functions and classical densities alike.
struct WignerGrid {
  std::size_t n_x = 0;
  std::size_t n_p = 0;
  double x_min = 0.0;
  double dx = 0.0;
  double p_min = 0.0;
  double dp = 0.0;
  std::vector<double> values;

  WignerGrid() = default;
  WignerGrid(std::size_t nx, double x0, double dx_, std::size_t np, double p0, double dp_);

  double x(std::size_t i) const noexcept { return x_min + static_cast<double>(i) * dx; }
  double p(std::size_t j) const noexcept { return p_min + static_cast<double>(j) * dp; }
  double& operator()(std::size_t i, std::size_t j) { return values[i * n_p + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values[i * n_p + j]; }

  bool same_axes(const WignerGrid& other) const noexcept;
  double integral() const;                       // sum W dx dp
  std::vector<double> position_marginal() const;  // sum_j W dp
  Moments moments() const;                        // phase-space quadrature
};

// Wigner axes for a wave function on `grid`: x axis = grid, p in [-p_max, p_max) with n_p points.
WignerGrid wigner_axes(const PositionGrid& grid, double hbar, std::size_t n_p);

// W(x,p) = (1/pi hbar) int psi*(x+y) psi(x-y) exp(2ipy/hbar) dy, one FFT along y per grid x.
// Half-grid samples of psi come from exact spectral (band-limited) interpolation.
// n_p = 0 selects n_p = grid size.
WignerGrid wigner(const WaveFunction& psi, std::size_t n_p = 0, unsigned threads = 1);
WignerGrid wigner(const DensityMatrix& rho, std::size_t n_p = 0, unsigned threads = 1);

// Accumulates the trajectory-averaged Wigner function of several pure states.
// Linearity lets every row be formed from the summed correlation sequence with
// a single FFT; summation runs in index order, so the result is deterministic.
WignerGrid mean_wigner(std::span<const WaveFunction* const> states, std::size_t n_p = 0,
                       unsigned threads = 1);

// Exact band-limited 2x interpolation: out[2i] = in[i].
CVector upsample2(std::span<const cplx> in);

// QCTW binary dump: "QCTW", u32 version = 1, u32 n_x, u32 n_p, f64 x_min, dx, p_min, dp,
// then n_x*n_p f64 values row-major in x. All little-endian.
void write_qctw(std::ostream& out, const WignerGrid& w);
WignerGrid read_qctw(std::istream& in);
void write_qctw(const std::filesystem::path& path, const WignerGrid& w);
WignerGrid read_qctw(const std::filesystem::path& path);
// CSV with header "x,p,w".
void write_wigner_csv(std::ostream& out, const WignerGrid& w);

}  // namespace qct
