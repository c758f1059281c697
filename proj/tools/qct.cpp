#include <CLI11.hpp>
#include <iostream>
#include <json.hpp>
#include <optional>

#include "qct/config.hpp"
#include "qct/error.hpp"
#include "qct/experiments.hpp"
#include "qct/parallel.hpp"

namespace {

void report_error(const std::string& kind, const std::string& message) {
  std::cerr << nlohmann::json{{"error", kind}, {"message", message}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum-classical transition experiments for continuously observed oscillators"};
  app.require_subcommand(0, 1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<double> margin;
  unsigned threads = 1;
  bool print_config = false;
  app.add_option("--config", config_path, "TOML-style configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Override run.seed");
  app.add_option("--out", out_dir, "Override output.directory");
  app.add_option("--margin-factor", margin, "Override criteria.margin_factor");
  app.add_option("--threads", threads, "Worker threads (0: all cores; QCT_THREADS overrides)");
  app.add_flag("--print-config", print_config, "Print the resolved configuration and exit");

  auto* fig1 = app.add_subcommand("reproduce-fig1", "Wigner function of one observed trajectory at t_final");
  auto* fig2 = app.add_subcommand("reproduce-fig2", "Mean position of one observed trajectory");
  auto* cls = app.add_subcommand("classify", "Evaluate the transition inequalities and label the regime");
  auto* weak = app.add_subcommand("weak-demo", "Averaged Wigner function against the classical density");
  auto* lyap = app.add_subcommand("lyapunov", "Phase-space averaged Lyapunov exponent");
  auto* simq = app.add_subcommand("simulate-quantum", "Trajectory ensemble with averaged Wigner dumps");
  auto* simc = app.add_subcommand("simulate-classical", "Langevin ensemble with density dumps");
  for (auto* sub : {fig1, fig2, cls, weak, lyap, simq, simc}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (app.get_subcommands().empty() && !print_config) {
    std::cerr << "A subcommand is required\n" << app.help();
    return 2;
  }

  try {
    qct::ExperimentContext ctx;
    if (!config_path.empty()) ctx.config = qct::load_config(config_path);
    if (seed) ctx.config.run.seed = *seed;
    if (out_dir) ctx.config.output.directory = *out_dir;
    if (margin) ctx.config.criteria.margin_factor = *margin;
    ctx.config.validate();
    ctx.threads = qct::resolve_threads(threads);
    if (print_config) {
      std::cout << qct::emit_config(ctx.config);
      return 0;
    }

    if (fig1->parsed()) {
      const auto run = qct::cmd_reproduce_fig1(ctx);
      std::cout << "wrote Wigner dump to " << (ctx.out_dir() / "fig1_wigner.qctw").string() << '\n';
      std::cout << "final var_x / (hbar/2) = " << qct::moments(run.final_state()).var_x / (0.5 * ctx.config.quantum.hbar)
                << '\n';
    } else if (fig2->parsed()) {
      const auto run = qct::cmd_reproduce_fig2(ctx);
      std::cout << "wrote trajectory to " << (ctx.out_dir() / "fig2_trajectory.csv").string() << '\n';
      std::cout << "noise metric = " << run.noise.overall << '\n';
    } else if (cls->parsed()) {
      const auto res = qct::cmd_classify(ctx);
      std::cout << "lambda_bar = " << res.lyapunov.lambda_bar << " +- " << res.lyapunov.std_err << '\n';
      std::cout << qct::report_table(res.report);
    } else if (weak->parsed()) {
      const auto res = qct::cmd_weak_demo(ctx);
      std::cout << "lambda_bar = " << res.lambda_bar << ", t_qc = " << res.t_qc << ", l = " << res.l << '\n';
      std::cout << "negativity: early max " << res.early_max_negativity << ", late max " << res.late_max_negativity
                << '\n';
    } else if (lyap->parsed()) {
      const auto est = qct::cmd_lyapunov(ctx);
      std::cout << "lambda_bar = " << est.lambda_bar << " +- " << est.std_err << " over " << est.n_orbits
                << " orbits" << (est.non_convergence ? " (not converged)" : "") << '\n';
    } else if (simq->parsed()) {
      const auto res = qct::cmd_simulate_quantum(ctx);
      std::cout << "simulated " << ctx.config.run.n_traj << " trajectories; " << res.density.wigner.size()
                << " Wigner dumps\n";
    } else if (simc->parsed()) {
      const auto res = qct::cmd_simulate_classical(ctx);
      std::cout << "simulated " << ctx.config.classical.n_samples << " samples; " << res.times.size()
                << " snapshots\n";
    }
  } catch (const qct::Error& e) {
    report_error(e.kind(), e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    report_error("RuntimeError", e.what());
    return static_cast<int>(qct::ErrorClass::Invariant);
  }
  return 0;
}
