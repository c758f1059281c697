#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qct/model.hpp"
#include "qct/qdyn.hpp"
#include "qct/qstate.hpp"

namespace qct {

struct RunConfig {
  HamiltonianSpec model;

  struct Quantum {
    double hbar = 0.1;
    std::size_t n_points = 1024;
    double x_min = -8.0;
    double x_max = 8.0;
    double dt = 1e-4;
    std::size_t n_p = 0;  // 0: same as n_points
  } quantum;

  // Exactly one of k and D may be set; neither means k = 1.
  struct Measurement {
    std::optional<double> k;
    std::optional<double> D;
  } measurement;

  struct Initial {
    double x0 = -3.0;
    double p0 = 8.0;
  } initial;

  struct Classical {
    std::size_t n_samples = 100000;
    double dt = 1e-3;
  } classical;

  struct Run {
    double t_final = 12.0;
    std::uint64_t seed = 1;
    std::size_t n_traj = 100;
    std::size_t record_every = 100;
    std::vector<double> wigner_times;
  } run;

  struct Lyapunov {
    double t_span = 20000.0;
    std::size_t n_orbits = 8;
    double dt = 0.005;
  } lyapunov;

  struct Criteria {
    double margin_factor = 10.0;
    std::string xi_mode = "unity";  // "unity" or "fixed" (uses xi)
    double xi = 1.0;
    double a_x_min = -5.0;
    double a_x_max = 5.0;
    double a_p_min = -20.0;
    double a_p_max = 20.0;
    double averaging_span = 20000.0;
  } criteria;

  struct Compare {
    double noise_window = 1.0;
    std::size_t coarse_cells = 0;  // 0: cells of area l^2
  } compare;

  struct Weak {
    double t_final = 0.0;  // 0: 3.5 t_qc from the measured Lyapunov exponent
    double dt = 1e-3;
    std::size_t n_snapshots = 40;
  } weak;

  struct Output {
    std::string directory = "out";
    std::vector<std::string> formats{"csv", "qctw", "json"};
  } output;

  MeasurementSpec measurement_spec() const;
  PositionGrid grid() const;
  double accessible_area() const;
  double xi() const;
  bool wants(const std::string& format) const;

  // ConfigError on any out-of-range value or on both k and D given.
  void validate() const;
};

// Parses a TOML-style document: [section] headers, `key = value` lines (dotted keys allowed),
// numbers, booleans, "strings", [lists] and # comments. Unknown keys are a ConfigError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

// Complete document that parses back to the same configuration.
std::string emit_config(const RunConfig& cfg);

}  // namespace qct
