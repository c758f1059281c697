#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "qct/error.hpp"
#include "qct/experiments.hpp"

using namespace qct;
namespace fs = std::filesystem;

namespace {

// Small harmonic setup that runs in well under a second.
const char* kSmall = R"(
[model]
alpha = -0.5
beta = 0.0
drive_amp = 0.0
[quantum]
n_points = 256
dt = 0.001
[initial]
x0 = 1.0
p0 = 0.0
[run]
t_final = 1.0
record_every = 10
n_traj = 4
wigner_times = [0.5, 1.0]
[classical]
n_samples = 2000
[lyapunov]
t_span = 50.0
n_orbits = 2
[criteria]
averaging_span = 50.0
[compare]
noise_window = 0.5
[weak]
t_final = 1.0
n_snapshots = 3
)";

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("qct_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ExperimentContext small(const std::string& dir, unsigned threads, const std::string& extra = "") {
  ExperimentContext ctx;
  ctx.config = parse_config(std::string(kSmall) + extra);
  ctx.config.output.directory = scratch(dir).string();
  ctx.threads = threads;
  return ctx;
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(QCT_CLI_PATH) + " " + args + " > /dev/null 2>&1").c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("outputs are byte-identical across thread counts") {
  const auto a = small("det_a", 1), b = small("det_b", 3);
  write_fig1(a, cmd_reproduce_fig2(a));
  write_fig1(b, cmd_reproduce_fig2(b));
  cmd_simulate_quantum(a);
  cmd_simulate_quantum(b);
  cmd_simulate_classical(a);
  cmd_simulate_classical(b);
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(a.out_dir())) {
    // Metadata names the output directory.
    if (entry.path().extension() == ".json") continue;
    const auto other = b.out_dir() / entry.path().filename();
    REQUIRE(fs::exists(other));
    CHECK(slurp(entry.path()) == slurp(other));
    ++compared;
  }
  CHECK(compared >= 8);
}

TEST_CASE("reference run outputs") {
  const auto ctx = small("fig", 1);
  const auto run = cmd_reproduce_fig1(ctx);
  write_fig2(ctx, run);
  const auto dump = read_qctw(ctx.out_dir() / "fig1_wigner.qctw");
  CHECK(dump.values == run.wigner.values);
  const auto meta = nlohmann::json::parse(slurp(ctx.out_dir() / "fig2_metadata.json"));
  CHECK(meta["seed"] == 1);
  CHECK(meta["n_traj"] == 1);
  CHECK(meta.contains("clip_events"));
  CHECK(meta["grid"]["n_points"] == 256);
  CHECK(parse_config(meta["config"].get<std::string>()).quantum.n_points == 256);
  const auto csv = slurp(ctx.out_dir() / "fig2_trajectory.csv");
  CHECK(csv.rfind("t,mean_x,mean_p,var_x,var_p,cov_xp,norm_leak\n", 0) == 0);
  CHECK(run.record.t.front() == 0.0);
  CHECK(run.record.t.back() == doctest::Approx(1.0));
  CHECK(run.record.t[1] == doctest::Approx(0.01));
  for (const auto& entry : fs::directory_iterator(ctx.out_dir()))
    CHECK(entry.path().extension() != ".tmp");
}

TEST_CASE("metadata reproduces the run") {
  const auto ctx = small("replay_a", 1);
  cmd_reproduce_fig2(ctx);
  const auto meta = nlohmann::json::parse(slurp(ctx.out_dir() / "fig2_metadata.json"));
  ExperimentContext replay;
  replay.config = parse_config(meta["config"].get<std::string>());
  replay.config.output.directory = scratch("replay_b").string();
  cmd_reproduce_fig2(replay);
  CHECK(slurp(ctx.out_dir() / "fig2_trajectory.csv") == slurp(replay.out_dir() / "fig2_trajectory.csv"));
}

TEST_CASE("diffusion and strength inputs give identical runs") {
  const auto by_k = small("by_k", 1, "[measurement]\nk = 1.0\n");
  const auto by_d = small("by_d", 1, "[measurement]\nD = 0.01\n");
  cmd_reproduce_fig2(by_k);
  cmd_reproduce_fig2(by_d);
  // D / hbar^2 recovers k only to the last bit, so the runs agree to rounding.
  std::istringstream ka(slurp(by_k.out_dir() / "fig2_trajectory.csv")), da(slurp(by_d.out_dir() / "fig2_trajectory.csv"));
  std::string kl, dl;
  std::size_t rows = 0;
  while (std::getline(ka, kl) && std::getline(da, dl)) {
    if (rows++ == 0) continue;
    std::istringstream kr(kl), dr(dl);
    std::string kv, dv;
    while (std::getline(kr, kv, ',') && std::getline(dr, dv, ','))
      CHECK(std::stod(kv) == doctest::Approx(std::stod(dv)).epsilon(1e-9).scale(1e-9));
  }
  CHECK(rows == 102);
}

TEST_CASE("weak demo series") {
  const auto ctx = small("weak", 1);
  const auto res = cmd_weak_demo(ctx, 0.5);
  CHECK(res.t_qc == doctest::Approx(0.1 * 0.5 / 0.01));
  REQUIRE(res.series.times.size() >= 3);
  for (std::size_t i = 0; i < res.series.times.size(); ++i) {
    CHECK(res.series.l1_distance[i] >= 0.0);
    CHECK(res.series.l1_distance[i] <= 1.0 + res.series.negativity[i]);
    CHECK(res.series.negativity[i] >= 0.0);
  }
  CHECK(slurp(ctx.out_dir() / "weak_demo.csv").rfind("t,l1_distance,negativity,noise_metric\n", 0) == 0);
}

TEST_CASE("command-line exit codes") {
  const auto dir = scratch("cli");
  fs::create_directories(dir);
  const auto small_cfg = dir / "small.toml";
  std::ofstream(small_cfg) << kSmall;
  CHECK(run_cli("--config " + small_cfg.string() + " --out " + (dir / "ok").string() + " reproduce-fig2") == 0);
  CHECK(fs::exists(dir / "ok" / "fig2_trajectory.csv"));

  const auto bad = dir / "bad.toml";
  std::ofstream(bad) << "[model]\nunknown = 3\n";
  CHECK(run_cli("--config " + bad.string() + " reproduce-fig2") == 2);
  CHECK(run_cli("no-such-command") == 2);

  // Harmonic force has no curvature, so the action scale s_dbar is undefined.
  CHECK(run_cli("--config " + small_cfg.string() + " --out " + (dir / "cls").string() + " classify") == 3);

  const auto edge = dir / "edge.toml";
  std::ofstream(edge) << kSmall << "[initial]\n";
  std::ofstream(edge, std::ios::trunc) << std::string(kSmall).replace(std::string(kSmall).find("x0 = 1.0"), 8,
                                                                      "x0 = 7.9");
  CHECK(run_cli("--config " + edge.string() + " --out " + (dir / "edge").string() + " reproduce-fig1") == 4);
  CHECK_FALSE(fs::exists(dir / "edge" / "fig1_wigner.qctw"));
}

TEST_CASE("ensemble averaging brings the quantum density closer to the classical one") {
  // Reduced reference run: hbar = 0.4 on a 256-point grid.
  const std::string reduced = R"(
[quantum]
hbar = 0.4
n_points = 256
[measurement]
D = 0.01
[classical]
n_samples = 10000
[weak]
t_final = 8.0
n_snapshots = 3
)";
  auto distance = [&](std::size_t n_traj, std::uint64_t seed) {
    ExperimentContext ctx;
    ctx.config = parse_config(reduced);
    ctx.config.run.n_traj = n_traj;
    ctx.config.run.seed = seed;
    ctx.write_files = false;
    return cmd_weak_demo(ctx, 0.5).series.l1_distance.back();
  };
  std::vector<double> single;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) single.push_back(distance(1, seed));
  double mean = 0.0, var = 0.0;
  for (double d : single) mean += d / 5.0;
  for (double d : single) var += (d - mean) * (d - mean) / 4.0;
  const double averaged = distance(50, 1);
  MESSAGE("single-trajectory distance ", mean, " +- ", std::sqrt(var), ", 50 trajectories ", averaged);
  CHECK(averaged < mean - 3.0 * std::sqrt(var));
}
