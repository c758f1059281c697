#include <cmath>
#include <numeric>

#include "qct/cdyn.hpp"
#include "qct/error.hpp"
#include "qct/parallel.hpp"
#include "qct/rng.hpp"

namespace qct {

TangentState rk4_tangent_step(const TangentState& s, const HamiltonianSpec& spec, double t, double dt) {
  const double inv_m = 1.0 / spec.mass;
  auto rhs = [&](const TangentState& y, double tt) {
    return TangentState{y.p * inv_m, force(spec, y.x, tt), y.dp * inv_m, force_dx(spec, y.x) * y.dx};
  };
  auto axpy = [](const TangentState& y, const TangentState& k, double h) {
    return TangentState{y.x + h * k.x, y.p + h * k.p, y.dx + h * k.dx, y.dp + h * k.dp};
  };
  const TangentState k1 = rhs(s, t);
  const TangentState k2 = rhs(axpy(s, k1, 0.5 * dt), t + 0.5 * dt);
  const TangentState k3 = rhs(axpy(s, k2, 0.5 * dt), t + 0.5 * dt);
  const TangentState k4 = rhs(axpy(s, k3, dt), t + dt);
  const double w = dt / 6.0;
  return {s.x + w * (k1.x + 2 * k2.x + 2 * k3.x + k4.x), s.p + w * (k1.p + 2 * k2.p + 2 * k3.p + k4.p),
          s.dx + w * (k1.dx + 2 * k2.dx + 2 * k3.dx + k4.dx), s.dp + w * (k1.dp + 2 * k2.dp + 2 * k3.dp + k4.dp)};
}

void integrate_orbit(const HamiltonianSpec& spec, PhasePoint start, double t0, double t_span, double dt,
                     const std::function<void(double, double, double)>& visit) {
  const auto n_steps = static_cast<std::size_t>(std::llround(t_span / dt));
  TangentState s{start.x, start.p, 0.0, 0.0};
  visit(t0, s.x, s.p);
  for (std::size_t k = 0; k < n_steps; ++k) {
    const double t = t0 + static_cast<double>(k) * dt;
    s = rk4_tangent_step(s, spec, t, dt);
    visit(t + dt, s.x, s.p);
  }
}

double LyapunovEstimate::local_lambda(double x) const { return std::sqrt(std::fabs(force_dx(spec, x)) / mass); }

namespace {

struct OrbitResult {
  std::vector<double> block_rates;
};

OrbitResult benettin_orbit(const HamiltonianSpec& spec, PhasePoint start, const LyapunovOptions& opts,
                           std::uint64_t orbit_index) {
  const auto n_steps = static_cast<std::size_t>(std::llround(opts.t_span / opts.dt));
  const std::size_t n_blocks = std::max<std::size_t>(1, opts.blocks_per_orbit);
  const std::size_t block_steps = n_steps / n_blocks;
  if (block_steps == 0) throw ConfigError("Lyapunov t_span too short for the requested blocks");
  const CounterRng rng(CounterRng::Domain::Orbits, opts.seed);
  const double kick = std::sqrt(2.0 * opts.D * opts.dt);

  TangentState s{start.x, start.p, 1.0, 0.0};
  OrbitResult out;
  std::size_t step = 0;
  for (std::size_t b = 0; b < n_blocks; ++b) {
    double log_stretch = 0.0;
    for (std::size_t k = 0; k < block_steps; ++k, ++step) {
      s = rk4_tangent_step(s, spec, static_cast<double>(step) * opts.dt, opts.dt);
      if (opts.D > 0.0) s.p += kick * rng.normal(orbit_index, step);
      if ((k + 1) % opts.renorm_every == 0 || k + 1 == block_steps) {
        const double norm = std::hypot(s.dx, s.dp);
        log_stretch += std::log(norm);
        s.dx /= norm;
        s.dp /= norm;
      }
    }
    if (!std::isfinite(s.x) || !std::isfinite(log_stretch))
      throw InvariantError("NonFinite", "orbit diverged during Lyapunov estimation");
    out.block_rates.push_back(log_stretch / (static_cast<double>(block_steps) * opts.dt));
  }
  return out;
}

LyapunovEstimate summarize(const HamiltonianSpec& spec, const std::vector<OrbitResult>& orbits, const LyapunovOptions& opts) {
  LyapunovEstimate est;
  est.spec = spec;
  est.mass = spec.mass;
  est.t_span = opts.t_span;
  est.n_orbits = orbits.size();
  std::vector<double> first, second;
  for (const auto& o : orbits) {
    est.orbit_lambda.push_back(std::accumulate(o.block_rates.begin(), o.block_rates.end(), 0.0) /
                               static_cast<double>(o.block_rates.size()));
    const std::size_t half = o.block_rates.size() / 2;
    for (std::size_t b = 0; b < o.block_rates.size(); ++b) {
      est.block_rates.push_back(o.block_rates[b]);
      (b < half ? first : second).push_back(o.block_rates[b]);
    }
  }
  auto mean_se = [](const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double r : v) ss += (r - mean) * (r - mean);
    const double se = v.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    return std::pair{mean, se};
  };
  const auto [mean, se] = mean_se(est.block_rates);
  est.lambda_bar = mean;
  // With several orbits each orbit counts as one block.
  est.std_err = orbits.size() > 1 ? mean_se(est.orbit_lambda).second : se;
  if (!first.empty() && !second.empty()) {
    const auto [m1, s1] = mean_se(first);
    const auto [m2, s2] = mean_se(second);
    est.non_convergence = std::fabs(m1 - m2) > 3.0 * std::hypot(s1, s2);
  }
  return est;
}

}  // namespace

LyapunovEstimate lyapunov_benettin(const HamiltonianSpec& spec, double x0, double p0, const LyapunovOptions& opts) {
  spec.validate();
  if (opts.renorm_every == 0) throw ConfigError("renorm_every must be >= 1");
  std::vector<OrbitResult> orbits{benettin_orbit(spec, {x0, p0}, opts, 0)};
  return summarize(spec, orbits, opts);
}

LyapunovEstimate lyapunov_ensemble(const HamiltonianSpec& spec, double x0, double p0, double hbar,
                                   std::size_t n_orbits, const LyapunovOptions& opts) {
  spec.validate();
  if (opts.renorm_every == 0) throw ConfigError("renorm_every must be >= 1");
  const auto starts = sample_coherent_matched(x0, p0, hbar, n_orbits, opts.seed);
  std::vector<OrbitResult> orbits(n_orbits);
  parallel_for(n_orbits, opts.threads,
               [&](std::size_t i) { orbits[i] = benettin_orbit(spec, starts.samples[i], opts, i); });
  return summarize(spec, orbits, opts);
}

}  // namespace qct
