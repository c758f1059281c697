#include "qct/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <sstream>

#include "qct/error.hpp"

namespace qct {

namespace fs = std::filesystem;
using nlohmann::json;

void write_atomic(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  try {
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw InvariantError("IoError", "cannot open " + tmp.string() + " for writing");
      body(out);
      out.flush();
      if (!out) throw InvariantError("IoError", "write to " + tmp.string() + " failed");
    }
    fs::rename(tmp, path);
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw;
  }
}

namespace {

json base_metadata(const ExperimentContext& ctx, const std::string& command, const MeasurementSpec& meas, double dt,
                   std::size_t n_traj) {
  const auto& c = ctx.config;
  const auto grid = c.grid();
  return json{{"command", command},
              {"config", emit_config(c)},
              {"seed", c.run.seed},
              {"n_traj", n_traj},
              {"dt", dt},
              {"hbar", c.quantum.hbar},
              {"k", meas.k},
              {"D", meas.diffusion()},
              {"grid",
               {{"n_points", grid.size()},
                {"x_min", grid.x_min()},
                {"x_max", grid.x_max()},
                {"dx", grid.dx()},
                {"n_p", c.quantum.n_p == 0 ? grid.size() : c.quantum.n_p}}}};
}

void write_json(const fs::path& path, const json& j) {
  write_atomic(path, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

void write_moment_row(std::ostream& out, double t, const Moments& m) {
  out << t << ',' << m.mean_x << ',' << m.mean_p << ',' << m.var_x << ',' << m.var_p << ',' << m.cov_xp;
}

std::size_t resolved_n_p(const RunConfig& c) { return c.quantum.n_p == 0 ? c.quantum.n_points : c.quantum.n_p; }

json noise_json(const NoiseMetric& n) {
  return json{{"overall", n.overall}, {"window_start", n.window_start}, {"window_values", n.values}};
}

}  // namespace

ReferenceRun run_reference(const ExperimentContext& ctx) {
  const auto& c = ctx.config;
  c.validate();
  const auto meas = c.measurement_spec();
  const auto grid = c.grid();
  const auto psi0 = coherent_state(grid, c.initial.x0, c.initial.p0, c.quantum.hbar);
  TrajectoryOptions opts;
  opts.t_final = c.run.t_final;
  opts.dt = c.quantum.dt;
  opts.record_every = c.run.record_every;
  opts.snapshot_times = {c.run.t_final};
  ReferenceRun out;
  out.record = run_trajectory(psi0, c.model, meas, opts, NoisePath(c.run.seed, 0, c.quantum.dt));
  out.wigner = wigner(out.final_state(), resolved_n_p(c), ctx.threads);
  out.noise = trajectory_noise_metric(out.record, c.model, c.compare.noise_window);
  return out;
}

void write_fig1(const ExperimentContext& ctx, const ReferenceRun& run) {
  const auto& c = ctx.config;
  const auto dir = ctx.out_dir();
  if (c.wants("qctw")) write_atomic(dir / "fig1_wigner.qctw", [&](std::ostream& os) { write_qctw(os, run.wigner); });
  if (c.wants("csv")) {
    write_atomic(dir / "fig1_density.csv", [&](std::ostream& out) {
      out.precision(17);
      out << "x,density\n";
      const auto rho = run.final_state().position_density();
      for (std::size_t i = 0; i < rho.size(); ++i) out << run.final_state().grid.x(i) << ',' << rho[i] << '\n';
    });
  }
  if (c.wants("json")) {
    auto meta = base_metadata(ctx, "reproduce-fig1", c.measurement_spec(), c.quantum.dt, 1);
    const auto m = moments(run.final_state());
    meta["t_final"] = c.run.t_final;
    meta["clip_events"] = run.record.clip_events;
    meta["final_moments"] = {{"mean_x", m.mean_x}, {"mean_p", m.mean_p}, {"var_x", m.var_x},
                             {"var_p", m.var_p},   {"cov_xp", m.cov_xp}};
    meta["var_x_over_coherent"] = m.var_x / (0.5 * c.quantum.hbar);
    meta["wigner_integral"] = run.wigner.integral();
    meta["negativity"] = negativity(run.wigner);
    write_json(dir / "fig1_metadata.json", meta);
  }
}

void write_fig2(const ExperimentContext& ctx, const ReferenceRun& run) {
  const auto& c = ctx.config;
  const auto dir = ctx.out_dir();
  if (c.wants("csv")) {
    write_atomic(dir / "fig2_trajectory.csv", [&](std::ostream& out) {
      out.precision(17);
      out << "t,mean_x,mean_p,var_x,var_p,cov_xp,norm_leak\n";
      for (std::size_t i = 0; i < run.record.t.size(); ++i) {
        write_moment_row(out, run.record.t[i], run.record.moments[i]);
        out << ',' << run.record.norm_leak[i] << '\n';
      }
    });
  }
  if (c.wants("json")) {
    auto meta = base_metadata(ctx, "reproduce-fig2", c.measurement_spec(), c.quantum.dt, 1);
    double max_abs_x = 0.0;
    for (const auto& m : run.record.moments) max_abs_x = std::max(max_abs_x, std::fabs(m.mean_x));
    meta["t_final"] = c.run.t_final;
    meta["record_cadence"] = c.quantum.dt * static_cast<double>(c.run.record_every);
    meta["clip_events"] = run.record.clip_events;
    meta["max_abs_mean_x"] = max_abs_x;
    meta["noise_metric"] = noise_json(run.noise);
    write_json(dir / "fig2_metadata.json", meta);
  }
}

ReferenceRun cmd_reproduce_fig1(const ExperimentContext& ctx) {
  auto run = run_reference(ctx);
  if (ctx.write_files) write_fig1(ctx, run);
  return run;
}

ReferenceRun cmd_reproduce_fig2(const ExperimentContext& ctx) {
  auto run = run_reference(ctx);
  if (ctx.write_files) write_fig2(ctx, run);
  return run;
}

LyapunovEstimate measure_lyapunov(const ExperimentContext& ctx) {
  const auto& c = ctx.config;
  c.validate();
  LyapunovOptions opts;
  opts.t_span = c.lyapunov.t_span;
  opts.dt = c.lyapunov.dt;
  opts.seed = c.run.seed;
  opts.threads = ctx.threads;
  return lyapunov_ensemble(c.model, c.initial.x0, c.initial.p0, c.quantum.hbar, c.lyapunov.n_orbits, opts);
}

namespace {

json lyapunov_json(const LyapunovEstimate& e) {
  return json{{"lambda_bar", e.lambda_bar},   {"std_err", e.std_err},          {"t_span", e.t_span},
              {"n_orbits", e.n_orbits},       {"orbit_lambda", e.orbit_lambda}, {"non_convergence", e.non_convergence}};
}

}  // namespace

LyapunovEstimate cmd_lyapunov(const ExperimentContext& ctx) {
  auto est = measure_lyapunov(ctx);
  if (ctx.write_files && ctx.config.wants("json")) {
    auto meta = base_metadata(ctx, "lyapunov", ctx.config.measurement_spec(), ctx.config.lyapunov.dt,
                              ctx.config.lyapunov.n_orbits);
    meta["lyapunov"] = lyapunov_json(est);
    write_json(ctx.out_dir() / "lyapunov.json", meta);
  }
  return est;
}

ClassifyResult classify_config(const ExperimentContext& ctx) {
  const auto& c = ctx.config;
  ClassifyResult out;
  out.lyapunov = measure_lyapunov(ctx);
  const auto cloud = sample_coherent_matched(c.initial.x0, c.initial.p0, c.quantum.hbar, c.lyapunov.n_orbits,
                                             c.run.seed);
  const auto avg = phase_space_averages(c.model, cloud.samples, c.criteria.averaging_span, c.lyapunov.dt);
  const auto scales = action_scales(avg, avg.abs_p, c.accessible_area(), c.quantum.hbar, out.lyapunov.lambda_bar);
  out.report = classify(c.model, c.measurement_spec(), avg, scales, out.lyapunov.lambda_bar, c.criteria.margin_factor);
  return out;
}

ClassifyResult cmd_classify(const ExperimentContext& ctx) {
  auto out = classify_config(ctx);
  if (ctx.write_files && ctx.config.wants("json")) {
    write_atomic(ctx.out_dir() / "classify_report.json",
                 [&](std::ostream& os) { os << report_to_json(out.report) << '\n'; });
    auto meta = base_metadata(ctx, "classify", ctx.config.measurement_spec(), ctx.config.lyapunov.dt,
                              ctx.config.lyapunov.n_orbits);
    meta["lyapunov"] = lyapunov_json(out.lyapunov);
    write_json(ctx.out_dir() / "classify_metadata.json", meta);
  }
  return out;
}

WeakDemoResult cmd_weak_demo(const ExperimentContext& ctx, std::optional<double> lambda_override) {
  const auto& c = ctx.config;
  c.validate();
  const auto meas = c.measurement_spec();
  const double D = meas.diffusion();
  if (!(D > 0.0)) throw DomainError("DomainError", "weak-demo needs a positive momentum diffusion");

  WeakDemoResult res;
  res.lambda_bar = lambda_override ? *lambda_override : measure_lyapunov(ctx).lambda_bar;
  if (!(res.lambda_bar > 0.0)) throw DomainError("DomainError", "weak-demo needs a positive Lyapunov exponent");
  res.t_qc = c.model.mass * c.quantum.hbar * res.lambda_bar / D;
  res.t_final = c.weak.t_final > 0.0 ? c.weak.t_final : 3.5 * res.t_qc;

  std::vector<double> times;
  const std::size_t n = c.weak.n_snapshots;
  for (std::size_t i = 0; i < n; ++i) times.push_back(res.t_final * static_cast<double>(i) / static_cast<double>(n - 1));
  for (double t : {res.t_qc, 3.0 * res.t_qc, c.run.t_final})
    if (t <= res.t_final) times.push_back(t);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end(),
                          [&](double a, double b) { return std::fabs(a - b) < 0.5 * c.weak.dt; }),
              times.end());

  EnsembleOptions eo;
  eo.t_final = res.t_final;
  eo.dt = c.weak.dt;
  eo.n_traj = c.run.n_traj;
  eo.seed = c.run.seed;
  eo.wigner_times = times;
  eo.n_p = resolved_n_p(c);
  eo.record_every = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(0.01 / c.weak.dt)));
  eo.threads = ctx.threads;
  const auto psi0 = coherent_state(c.grid(), c.initial.x0, c.initial.p0, c.quantum.hbar);
  const auto quantum = average_ensemble(psi0, c.model, meas, eo);
  res.clip_events = quantum.clip_events;

  ClassicalRunOptions co;
  co.t_final = res.t_final;
  co.dt = c.classical.dt;
  co.D = D;
  co.seed = c.run.seed;
  co.snapshot_times = times;
  co.threads = ctx.threads;
  const auto cloud = sample_coherent_matched(c.initial.x0, c.initial.p0, c.quantum.hbar, c.classical.n_samples,
                                             c.run.seed);
  const auto classical = evolve_ensemble(cloud, c.model, co);

  res.l = solve_l(D, c.model.mass, res.lambda_bar, c.xi(), c.accessible_area());
  res.coarse_cells =
      c.compare.coarse_cells ? c.compare.coarse_cells : coarse_cells_for_length(quantum.wigner.front(), res.l);

  for (std::size_t s = 0; s < quantum.times.size(); ++s) {
    const auto& w = quantum.wigner[s];
    const auto hist = density_histogram(classical[s], w);
    const double t = quantum.times[s];
    const double neg = negativity(w);
    res.series.times.push_back(t);
    res.series.l1_distance.push_back(density_distance(w, hist, res.coarse_cells));
    res.series.negativity.push_back(neg);
    res.series.noise_metric.push_back(std::numeric_limits<double>::quiet_NaN());
    if (t <= res.t_qc * (1.0 + 1e-9)) res.early_max_negativity = std::max(res.early_max_negativity, neg);
    if (t >= 3.0 * res.t_qc * (1.0 - 1e-9)) res.late_max_negativity = std::max(res.late_max_negativity, neg);
  }

  if (ctx.write_files) {
    const auto dir = ctx.out_dir();
    if (c.wants("csv"))
      write_atomic(dir / "weak_demo.csv", [&](std::ostream& out) { write_comparison_csv(out, res.series); });
    if (c.wants("json")) {
      auto meta = base_metadata(ctx, "weak-demo", meas, c.weak.dt, c.run.n_traj);
      meta["lambda_bar"] = res.lambda_bar;
      meta["lambda_measured"] = !lambda_override.has_value();
      meta["t_qc"] = res.t_qc;
      meta["t_final"] = res.t_final;
      meta["l"] = res.l;
      meta["coarse_cells"] = res.coarse_cells;
      meta["clip_events"] = res.clip_events;
      meta["classical_samples"] = c.classical.n_samples;
      meta["classical_dt"] = c.classical.dt;
      meta["early_max_negativity"] = res.early_max_negativity;
      meta["late_max_negativity"] = res.late_max_negativity;
      write_json(dir / "weak_demo_metadata.json", meta);
    }
  }
  return res;
}

QuantumSimResult cmd_simulate_quantum(const ExperimentContext& ctx) {
  const auto& c = ctx.config;
  c.validate();
  const auto meas = c.measurement_spec();
  EnsembleOptions eo;
  eo.t_final = c.run.t_final;
  eo.dt = c.quantum.dt;
  eo.n_traj = c.run.n_traj;
  eo.seed = c.run.seed;
  eo.wigner_times = c.run.wigner_times;
  eo.n_p = resolved_n_p(c);
  eo.record_every = c.run.record_every;
  eo.threads = ctx.threads;
  const auto psi0 = coherent_state(c.grid(), c.initial.x0, c.initial.p0, c.quantum.hbar);
  QuantumSimResult out{average_ensemble(psi0, c.model, meas, eo)};
  if (ctx.write_files) {
    const auto dir = ctx.out_dir();
    const auto& d = out.density;
    if (c.wants("csv")) {
      write_atomic(dir / "quantum_moments.csv", [&](std::ostream& os) {
        os.precision(17);
        os << "t,mean_x,mean_p,var_x,var_p,cov_xp\n";
        for (std::size_t i = 0; i < d.record_times.size(); ++i) {
          write_moment_row(os, d.record_times[i], d.unconditioned[i]);
          os << '\n';
        }
      });
    }
    if (c.wants("qctw"))
      for (std::size_t s = 0; s < d.times.size(); ++s)
        write_atomic(dir / ("quantum_wigner_" + std::to_string(s) + ".qctw"),
                     [&](std::ostream& os) { write_qctw(os, d.wigner[s]); });
    if (c.wants("json")) {
      auto meta = base_metadata(ctx, "simulate-quantum", meas, c.quantum.dt, c.run.n_traj);
      meta["t_final"] = c.run.t_final;
      meta["wigner_times"] = d.times;
      meta["clip_events"] = d.clip_events;
      write_json(dir / "quantum_metadata.json", meta);
    }
  }
  return out;
}

ClassicalSimResult cmd_simulate_classical(const ExperimentContext& ctx) {
  const auto& c = ctx.config;
  c.validate();
  const auto meas = c.measurement_spec();
  ClassicalSimResult out;
  out.times = c.run.wigner_times;
  out.times.push_back(c.run.t_final);
  std::sort(out.times.begin(), out.times.end());
  out.times.erase(std::unique(out.times.begin(), out.times.end()), out.times.end());
  ClassicalRunOptions co;
  co.t_final = c.run.t_final;
  co.dt = c.classical.dt;
  co.D = meas.diffusion();
  co.seed = c.run.seed;
  co.snapshot_times = out.times;
  co.threads = ctx.threads;
  const auto cloud = sample_coherent_matched(c.initial.x0, c.initial.p0, c.quantum.hbar, c.classical.n_samples,
                                             c.run.seed);
  out.ensembles = evolve_ensemble(cloud, c.model, co);
  if (ctx.write_files) {
    const auto dir = ctx.out_dir();
    if (c.wants("csv")) {
      write_atomic(dir / "classical_moments.csv", [&](std::ostream& os) {
        os.precision(17);
        os << "t,mean_x,mean_p,var_x,var_p,cov_xp\n";
        for (std::size_t s = 0; s < out.times.size(); ++s) {
          write_moment_row(os, out.times[s], ensemble_moments(out.ensembles[s]));
          os << '\n';
        }
      });
    }
    if (c.wants("qctw")) {
      const auto axes = wigner_axes(c.grid(), c.quantum.hbar, resolved_n_p(c));
      for (std::size_t s = 0; s < out.times.size(); ++s)
        write_atomic(dir / ("classical_density_" + std::to_string(s) + ".qctw"),
                     [&](std::ostream& os) { write_qctw(os, density_histogram(out.ensembles[s], axes)); });
    }
    if (c.wants("json")) {
      auto meta = base_metadata(ctx, "simulate-classical", meas, c.classical.dt, c.classical.n_samples);
      meta["t_final"] = c.run.t_final;
      meta["snapshot_times"] = out.times;
      write_json(dir / "classical_metadata.json", meta);
    }
  }
  return out;
}

}  // namespace qct
