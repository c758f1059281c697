#include <cmath>
#include <sstream>

#include "qct/cdyn.hpp"
#include "qct/error.hpp"
#include "qct/parallel.hpp"
#include "qct/rng.hpp"

namespace qct {

PhasePoint langevin_step(PhasePoint s, const HamiltonianSpec& spec, double D, double t, double dt, double dW) {
  s.p += force(spec, s.x, t) * dt + std::sqrt(2.0 * D) * dW;
  s.x += s.p / spec.mass * dt;
  return s;
}

ClassicalEnsemble sample_coherent_matched(double x0, double p0, double hbar, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw ConfigError("classical ensemble needs at least one sample");
  if (!(hbar > 0.0)) throw ConfigError("hbar must be positive");
  const CounterRng rng(CounterRng::Domain::ClassicalSampling, seed);
  const double sigma = std::sqrt(0.5 * hbar);
  ClassicalEnsemble ens;
  ens.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    ens.samples[i] = {x0 + sigma * rng.normal(i, 0), p0 + sigma * rng.normal(i, 1)};
  return ens;
}

std::vector<ClassicalEnsemble> evolve_ensemble(const ClassicalEnsemble& initial, const HamiltonianSpec& spec,
                                               const ClassicalRunOptions& opts) {
  spec.validate();
  if (!(opts.dt > 0.0)) throw ConfigError("classical.dt must be positive");
  if (!(opts.D >= 0.0)) throw ConfigError("momentum diffusion D must be >= 0");
  const auto n_steps = static_cast<std::size_t>(std::llround(opts.t_final / opts.dt));
  std::vector<std::size_t> snap_steps;
  for (double ts : opts.snapshot_times) snap_steps.push_back(static_cast<std::size_t>(std::llround(ts / opts.dt)));

  const std::size_t n = initial.samples.size();
  std::vector<ClassicalEnsemble> out(snap_steps.size());
  for (auto& e : out) e.samples.resize(n);

  const CounterRng rng(CounterRng::Domain::ClassicalNoise, opts.seed);
  const double sqrt_dt = std::sqrt(opts.dt);
  // Fixed-size chunks keep the work partition independent of the thread count.
  constexpr std::size_t chunk = 256;
  const std::size_t n_chunks = (n + chunk - 1) / chunk;
  parallel_for(n_chunks, opts.threads, [&](std::size_t c) {
    const std::size_t lo = c * chunk, hi = std::min(n, lo + chunk);
    for (std::size_t i = lo; i < hi; ++i) {
      PhasePoint s = initial.samples[i];
      auto record = [&](std::size_t step) {
        for (std::size_t k = 0; k < snap_steps.size(); ++k)
          if (snap_steps[k] == step) out[k].samples[i] = s;
      };
      record(0);
      for (std::size_t step = 0; step < n_steps; ++step) {
        const double dW = opts.D > 0.0 ? sqrt_dt * rng.normal(i, step) : 0.0;
        s = langevin_step(s, spec, opts.D, static_cast<double>(step) * opts.dt, opts.dt, dW);
        record(step + 1);
      }
    }
  });
  return out;
}

Moments ensemble_moments(const ClassicalEnsemble& ens) {
  const double inv = 1.0 / static_cast<double>(ens.samples.size());
  Moments m;
  for (const auto& s : ens.samples) {
    m.mean_x += s.x;
    m.mean_p += s.p;
  }
  m.mean_x *= inv;
  m.mean_p *= inv;
  for (const auto& s : ens.samples) {
    const double u = s.x - m.mean_x, q = s.p - m.mean_p;
    m.var_x += u * u;
    m.var_p += q * q;
    m.cov_xp += u * q;
  }
  m.var_x *= inv;
  m.var_p *= inv;
  m.cov_xp *= inv;
  return m;
}

WignerGrid density_histogram(const ClassicalEnsemble& ens, const WignerGrid& axes) {
  WignerGrid h(axes.n_x, axes.x_min, axes.dx, axes.n_p, axes.p_min, axes.dp);
  std::vector<std::size_t> counts(h.values.size(), 0);
  std::size_t outside = 0;
  for (const auto& s : ens.samples) {
    const double fi = std::floor((s.x - h.x_min) / h.dx + 0.5);
    const double fj = std::floor((s.p - h.p_min) / h.dp + 0.5);
    if (!(fi >= 0.0 && fi < static_cast<double>(h.n_x) && fj >= 0.0 && fj < static_cast<double>(h.n_p))) {
      ++outside;
      continue;
    }
    ++counts[static_cast<std::size_t>(fi) * h.n_p + static_cast<std::size_t>(fj)];
  }
  if (outside > 0) {
    std::ostringstream msg;
    msg << "density_histogram: fraction " << static_cast<double>(outside) / static_cast<double>(ens.samples.size())
        << " of the samples lies outside the phase-space axes";
    throw DomainError("OutOfRange", msg.str());
  }
  const double scale = 1.0 / (static_cast<double>(ens.samples.size()) * h.dx * h.dp);
  for (std::size_t k = 0; k < counts.size(); ++k) h.values[k] = static_cast<double>(counts[k]) * scale;
  return h;
}

}  // namespace qct
