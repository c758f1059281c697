#include "qct/compare.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "qct/error.hpp"

namespace qct {

namespace {

std::vector<double> coarse_masses(const WignerGrid& w, std::size_t nc) {
  std::vector<double> mass(nc * nc, 0.0);
  const double cell = w.dx * w.dp;
  for (std::size_t i = 0; i < w.n_x; ++i) {
    const std::size_t ci = i * nc / w.n_x;
    for (std::size_t j = 0; j < w.n_p; ++j) {
      const std::size_t cj = j * nc / w.n_p;
      mass[ci * nc + cj] += w(i, j) * cell;
    }
  }
  return mass;
}

}  // namespace

double density_distance(const WignerGrid& w, const WignerGrid& p, std::size_t coarse_cells) {
  if (!w.same_axes(p)) throw InvariantError("AxisMismatch", "density_distance needs identical axes");
  if (coarse_cells == 0) {
    double sum = 0.0;
    for (std::size_t i = 0; i < w.values.size(); ++i) sum += std::fabs(w.values[i] - p.values[i]);
    return 0.5 * sum * w.dx * w.dp;
  }
  if (coarse_cells > w.n_x || coarse_cells > w.n_p)
    throw ConfigError("coarse_cells exceeds the grid resolution");
  const auto a = coarse_masses(w, coarse_cells);
  const auto b = coarse_masses(p, coarse_cells);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::fabs(a[i] - b[i]);
  return 0.5 * sum;
}

std::size_t coarse_cells_for_length(const WignerGrid& w, double l) {
  if (!(l > 0.0)) throw ConfigError("coarse-graining length must be positive");
  const double area = static_cast<double>(w.n_x) * w.dx * static_cast<double>(w.n_p) * w.dp;
  const auto n = static_cast<std::size_t>(std::lround(std::sqrt(area) / l));
  return std::clamp<std::size_t>(n, 1, std::min(w.n_x, w.n_p));
}

double negativity(const WignerGrid& w) {
  double sum = 0.0;
  for (double v : w.values)
    if (v < 0.0) sum -= v;
  return sum * w.dx * w.dp;
}

NoiseMetric trajectory_noise_metric(const TrajectoryRecord& record, const HamiltonianSpec& spec, double window) {
  const auto& t = record.t;
  if (t.size() < 2) throw DomainError("InsufficientSamples", "trajectory record has fewer than two points");
  const double dt = t[1] - t[0];
  // The final record may fall off the cadence when t_final is not a multiple of it; drop it.
  std::size_t n = t.size();
  if (n > 2 && std::fabs((t[n - 1] - t[n - 2]) - dt) > 1e-6 * dt) --n;
  for (std::size_t i = 1; i < n; ++i)
    if (std::fabs((t[i] - t[i - 1]) - dt) > 1e-6 * dt) throw ConfigError("trajectory record cadence is not uniform");
  if (!(window > 0.0)) throw ConfigError("noise-metric window must be positive");

  // A record shorter than the window forms a single window.
  const auto per_window = std::min(static_cast<std::size_t>(std::lround(window / dt)), n - 1);
  if (per_window < 10) {
    std::ostringstream msg;
    msg << "noise-metric window holds " << per_window << " increments, need at least 10";
    throw DomainError("InsufficientSamples", msg.str());
  }

  NoiseMetric out;
  double res_all = 0.0, pred_all = 0.0;
  double res_w = 0.0, pred_w = 0.0;
  std::size_t in_window = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const auto& a = record.moments[i];
    const auto& b = record.moments[i + 1];
    const double pred = 0.5 * (a.mean_p + b.mean_p) / spec.mass * dt;
    const double r = (b.mean_x - a.mean_x) - pred;
    res_w += r * r;
    pred_w += pred * pred;
    ++in_window;
    if (in_window == per_window) {
      out.window_start.push_back(t[i + 1 - per_window]);
      out.values.push_back(pred_w > 0.0 ? std::sqrt(res_w / pred_w) : 0.0);
      res_all += res_w;
      pred_all += pred_w;
      res_w = pred_w = 0.0;
      in_window = 0;
    }
  }
  // A short tail joins the overall figure but does not form its own window.
  res_all += res_w;
  pred_all += pred_w;
  out.overall = pred_all > 0.0 ? std::sqrt(res_all / pred_all) : 0.0;
  return out;
}

void write_comparison_csv(std::ostream& out, const ComparisonSeries& s) {
  out << "t,l1_distance,negativity,noise_metric\n";
  out.precision(17);
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    auto at = [&](const std::vector<double>& v) { return i < v.size() ? v[i] : std::nan(""); };
    out << s.times[i] << ',' << at(s.l1_distance) << ',' << at(s.negativity) << ',' << at(s.noise_metric) << '\n';
  }
}

}  // namespace qct
