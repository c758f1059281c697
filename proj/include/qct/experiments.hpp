#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

#include "qct/cdyn.hpp"
#include "qct/compare.hpp"
#include "qct/config.hpp"
#include "qct/criteria.hpp"
#include "qct/qdyn.hpp"

namespace qct {

// Writes to a temporary sibling and renames it into place, so `path` is either absent or complete.
void write_atomic(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body);

struct ExperimentContext {
  RunConfig config;
  unsigned threads = 1;
  bool write_files = true;  // false: compute only

  std::filesystem::path out_dir() const { return config.output.directory; }
};

// One conditioned trajectory from the configured coherent state to run.t_final,
// with a snapshot of the final state.
struct ReferenceRun {
  TrajectoryRecord record;
  WignerGrid wigner;  // of the final state
  NoiseMetric noise;

  const WaveFunction& final_state() const { return record.snapshots.back(); }
};

ReferenceRun run_reference(const ExperimentContext& ctx);

// Wigner dump (fig1_wigner.qctw), |psi(x)|^2 (fig1_density.csv) and metadata.
ReferenceRun cmd_reproduce_fig1(const ExperimentContext& ctx);
// <x>(t) and the other moments (fig2_trajectory.csv) plus metadata with the noise metric.
ReferenceRun cmd_reproduce_fig2(const ExperimentContext& ctx);
// Writes both figures' outputs from a single run.
void write_fig1(const ExperimentContext& ctx, const ReferenceRun& run);
void write_fig2(const ExperimentContext& ctx, const ReferenceRun& run);

// Lyapunov exponent averaged over orbits from the cloud matched to the initial coherent state.
LyapunovEstimate measure_lyapunov(const ExperimentContext& ctx);
LyapunovEstimate cmd_lyapunov(const ExperimentContext& ctx);

struct ClassifyResult {
  LyapunovEstimate lyapunov;
  RegimeReport report;
};
ClassifyResult classify_config(const ExperimentContext& ctx);
ClassifyResult cmd_classify(const ExperimentContext& ctx);

struct WeakDemoResult {
  ComparisonSeries series;
  double lambda_bar = 0.0;
  double t_qc = 0.0;
  double t_final = 0.0;
  double l = 0.0;  // cell scale used for the distance
  std::size_t coarse_cells = 0;
  std::size_t clip_events = 0;
  double early_max_negativity = 0.0;  // over t <= t_qc
  double late_max_negativity = 0.0;   // over t >= 3 t_qc
};

// Optional override of the measured Lyapunov exponent (skips the estimation).
WeakDemoResult cmd_weak_demo(const ExperimentContext& ctx, std::optional<double> lambda_bar = std::nullopt);

struct QuantumSimResult {
  AveragedDensity density;
};
QuantumSimResult cmd_simulate_quantum(const ExperimentContext& ctx);

struct ClassicalSimResult {
  std::vector<double> times;
  std::vector<ClassicalEnsemble> ensembles;
};
ClassicalSimResult cmd_simulate_classical(const ExperimentContext& ctx);

}  // namespace qct
