#include <cmath>
#include <stdexcept>

#include "qct/error.hpp"
#include "qct/parallel.hpp"
#include "qct/qdyn.hpp"

namespace qct {

std::size_t step_count(double t_final, double dt) {
  if (!(dt > 0.0) || !(t_final >= 0.0)) throw ConfigError("need dt > 0 and t_final >= 0");
  return static_cast<std::size_t>(std::llround(t_final / dt));
}

TrajectoryRecord run_trajectory(const WaveFunction& psi0, const HamiltonianSpec& spec, const MeasurementSpec& meas,
                                const TrajectoryOptions& opts, const NoisePath& noise) {
  if (opts.record_every == 0) throw ConfigError("record_every must be >= 1");
  if (noise.dt() != opts.dt) throw std::invalid_argument("noise path and trajectory use different dt");
  Propagator prop(psi0.grid, spec, meas, opts.dt);
  prop.boundary_threshold = opts.boundary_threshold;
  const std::size_t n_steps = step_count(opts.t_final, opts.dt);
  const std::size_t window = boundary_window(psi0.grid);

  std::vector<std::size_t> snap_steps;
  for (double ts : opts.snapshot_times) {
    if (ts < 0.0 || ts > opts.t_final + 0.5 * opts.dt)
      throw ConfigError("snapshot time " + std::to_string(ts) + " outside [0, t_final]");
    snap_steps.push_back(static_cast<std::size_t>(std::llround(ts / opts.dt)));
  }

  TrajectoryRecord rec;
  rec.seed = noise.seed();
  rec.trajectory_index = noise.trajectory_index();
  rec.snapshots.reserve(snap_steps.size());
  rec.snapshot_times.resize(snap_steps.size());

  WaveFunction psi = psi0;
  auto observe = [&](std::size_t step) {
    const double t = static_cast<double>(step) * opts.dt;
    if (step % opts.record_every == 0 || step == n_steps) {
      rec.t.push_back(t);
      rec.moments.push_back(moments(psi));
      rec.norm_leak.push_back(psi.boundary_mass(window));
    }
    for (std::size_t s = 0; s < snap_steps.size(); ++s)
      if (snap_steps[s] == step) {
        rec.snapshot_times[s] = t;
        rec.snapshots.push_back(psi);
      }
  };

  observe(0);
  for (std::size_t step = 0; step < n_steps; ++step) {
    const double t = static_cast<double>(step) * opts.dt;
    if (noise.clipped(step)) ++rec.clip_events;
    prop.step(psi, t, meas.k > 0.0 ? noise.increment(step) : 0.0);
    observe(step + 1);
  }
  if (rec.snapshots.size() != snap_steps.size()) throw std::logic_error("snapshot bookkeeping");
  return rec;
}

std::vector<TrajectoryRecord> run_ensemble(const WaveFunction& psi0, const HamiltonianSpec& spec,
                                           const MeasurementSpec& meas, const TrajectoryOptions& opts,
                                           std::uint64_t seed, std::size_t n_traj, unsigned threads,
                                           std::uint64_t first_index) {
  std::vector<TrajectoryRecord> out(n_traj);
  parallel_for(n_traj, threads, [&](std::size_t i) {
    out[i] = run_trajectory(psi0, spec, meas, opts, NoisePath(seed, first_index + i, opts.dt));
  });
  return out;
}

std::vector<Moments> unconditioned_moments(const std::vector<TrajectoryRecord>& records) {
  if (records.empty()) throw std::invalid_argument("no trajectories");
  const std::size_t n_t = records.front().t.size();
  const double inv = 1.0 / static_cast<double>(records.size());
  std::vector<Moments> out(n_t);
  for (std::size_t k = 0; k < n_t; ++k) {
    double mx = 0, mp = 0, xx = 0, pp = 0, xp = 0;
    for (const auto& r : records) {
      const Moments& m = r.moments.at(k);
      mx += m.mean_x;
      mp += m.mean_p;
      xx += m.var_x + m.mean_x * m.mean_x;
      pp += m.var_p + m.mean_p * m.mean_p;
      xp += m.cov_xp + m.mean_x * m.mean_p;
    }
    mx *= inv;
    mp *= inv;
    out[k] = {mx, mp, xx * inv - mx * mx, pp * inv - mp * mp, xp * inv - mx * mp};
  }
  return out;
}

AveragedDensity average_ensemble(const WaveFunction& psi0, const HamiltonianSpec& spec, const MeasurementSpec& meas,
                                 const EnsembleOptions& opts) {
  if (opts.n_traj < 1) throw ConfigError("n_traj must be >= 1");
  TrajectoryOptions topt;
  topt.t_final = opts.t_final;
  topt.dt = opts.dt;
  topt.record_every = opts.record_every;
  topt.snapshot_times = opts.wigner_times;
  auto records = run_ensemble(psi0, spec, meas, topt, opts.seed, opts.n_traj, opts.threads);

  AveragedDensity out;
  out.record_times = records.front().t;
  out.unconditioned = unconditioned_moments(records);
  for (const auto& r : records) out.clip_events += r.clip_events;
  const std::size_t n_times = opts.wigner_times.size();
  out.times = records.front().snapshot_times;
  out.wigner.reserve(n_times);
  for (std::size_t s = 0; s < n_times; ++s) {
    std::vector<const WaveFunction*> states;
    states.reserve(records.size());
    for (const auto& r : records) states.push_back(&r.snapshots[s]);
    out.wigner.push_back(mean_wigner(states, opts.n_p, opts.threads));
  }
  if (opts.keep_states) {
    out.states.resize(n_times);
    for (std::size_t s = 0; s < n_times; ++s)
      for (auto& r : records) out.states[s].push_back(std::move(r.snapshots[s]));
  }
  return out;
}

}  // namespace qct
