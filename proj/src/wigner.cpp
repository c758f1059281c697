#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qct/parallel.hpp"
#include "qct/qstate.hpp"

namespace qct {

CVector upsample2(std::span<const cplx> in) {
  const std::size_t n = in.size();
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("upsample2 needs an even length");
  CVector spec(in.begin(), in.end());
  Fft(n).forward(spec);
  CVector out(2 * n, cplx{0.0, 0.0});
  const std::size_t h = n / 2;
  for (std::size_t k = 0; k < h; ++k) out[k] = spec[k];
  for (std::size_t k = h + 1; k < n; ++k) out[n + k] = spec[k];
  // Split the Nyquist bin symmetrically so real inputs stay real.
  out[h] = 0.5 * spec[h];
  out[2 * n - h] = 0.5 * spec[h];
  Fft(2 * n).inverse(out);
  const double scale = 1.0 / static_cast<double>(n);
  for (auto& v : out) v *= scale;
  return out;
}

WignerGrid wigner_axes(const PositionGrid& grid, double hbar, std::size_t n_p) {
  if (n_p == 0) n_p = grid.size();
  if (n_p < 2 || n_p % 2 != 0) throw std::invalid_argument("n_p must be even and >= 2");
  const double dp = 2.0 * std::numbers::pi * hbar / (static_cast<double>(n_p) * grid.dx());
  return WignerGrid(grid.size(), grid.x_min(), grid.dx(), n_p, -static_cast<double>(n_p / 2) * dp, dp);
}

namespace {

// Fills row i of w from the correlation sequence c(s), s in [-n_p/2, n_p/2), where
// corr(a, b) returns the (weighted) value of psi(b) psi*(a) on fine indices a = 2i+s, b = 2i-s.
template <class Corr>
void fill_row(WignerGrid& w, std::size_t i, std::size_t n_fine, double weight, const Fft& fft, Corr&& corr) {
  const std::size_t n_p = w.n_p;
  const auto half = static_cast<std::ptrdiff_t>(n_p / 2);
  const auto fine = static_cast<std::ptrdiff_t>(n_fine);
  const auto centre = static_cast<std::ptrdiff_t>(2 * i);
  CVector g(n_p, cplx{0.0, 0.0});
  for (std::ptrdiff_t s = -half; s < half; ++s) {
    const std::ptrdiff_t a = centre + s;
    const std::ptrdiff_t b = centre - s;
    if (a < 0 || b < 0 || a >= fine || b >= fine) continue;
    cplx v = corr(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
    // The s = -n_p/2 term has no +n_p/2 partner; keep the Hermitian part only.
    if (s == -half) v = v.real();
    g[static_cast<std::size_t>((s + static_cast<std::ptrdiff_t>(n_p)) % static_cast<std::ptrdiff_t>(n_p))] = v;
  }
  fft.inverse(g);
  for (std::size_t j = 0; j < n_p; ++j) w(i, j) = weight * g[(j + n_p / 2) % n_p].real();
}

}  // namespace

WignerGrid mean_wigner(std::span<const WaveFunction* const> states, std::size_t n_p, unsigned threads) {
  if (states.empty()) throw std::invalid_argument("mean_wigner needs at least one state");
  const auto& grid = states.front()->grid;
  const double hbar = states.front()->hbar;
  for (const auto* s : states)
    if (!(s->grid == grid) || s->hbar != hbar) throw std::invalid_argument("mean_wigner: states on different grids");

  WignerGrid w = wigner_axes(grid, hbar, n_p);
  std::vector<CVector> fine;
  fine.reserve(states.size());
  for (const auto* s : states) fine.push_back(upsample2(s->amplitudes));

  const std::size_t n_fine = 2 * grid.size();
  const double weight = grid.dx() / (2.0 * std::numbers::pi * hbar) / static_cast<double>(states.size());
  const Fft fft(w.n_p);
  parallel_for(grid.size(), threads, [&](std::size_t i) {
    fill_row(w, i, n_fine, weight, fft, [&](std::size_t a, std::size_t b) {
      cplx acc = 0.0;
      for (const auto& f : fine) acc += std::conj(f[a]) * f[b];
      return acc;
    });
  });
  return w;
}

WignerGrid wigner(const WaveFunction& psi, std::size_t n_p, unsigned threads) {
  const WaveFunction* one[] = {&psi};
  return mean_wigner(one, n_p, threads);
}

WignerGrid wigner(const DensityMatrix& rho, std::size_t n_p, unsigned threads) {
  const std::size_t n = rho.size();
  const std::size_t nf = 2 * n;
  // rho_fine = U rho U^T with U the real interpolation operator: rows first, then columns.
  CVector rows(n * nf);
  for (std::size_t i = 0; i < n; ++i) {
    const auto up = upsample2(std::span<const cplx>(rho.values.data() + i * n, n));
    std::copy(up.begin(), up.end(), rows.begin() + static_cast<std::ptrdiff_t>(i * nf));
  }
  CVector fine(nf * nf);
  CVector col(n);
  for (std::size_t j = 0; j < nf; ++j) {
    for (std::size_t i = 0; i < n; ++i) col[i] = rows[i * nf + j];
    const auto up = upsample2(col);
    for (std::size_t i = 0; i < nf; ++i) fine[i * nf + j] = up[i];
  }

  WignerGrid w = wigner_axes(rho.grid, rho.hbar, n_p);
  // rho(b, a) already carries one factor dx.
  const double weight = 1.0 / (2.0 * std::numbers::pi * rho.hbar);
  const Fft fft(w.n_p);
  parallel_for(n, threads, [&](std::size_t i) {
    fill_row(w, i, nf, weight, fft, [&](std::size_t a, std::size_t b) { return fine[b * nf + a]; });
  });
  return w;
}

}  // namespace qct
