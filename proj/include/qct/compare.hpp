#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "qct/model.hpp"
#include "qct/qdyn.hpp"
#include "qct/qstate.hpp"

namespace qct {

// Half-L1 distance after box-averaging both densities onto coarse_cells x coarse_cells cells.
// coarse_cells = 0 compares cell by cell on the original grid. Throws InvariantError("AxisMismatch").
// At most 1 for two probability densities; a Wigner argument adds its coarse-grained negativity.
double density_distance(const WignerGrid& w, const WignerGrid& p, std::size_t coarse_cells);

// Number of coarse cells per axis giving cells of area close to l^2 on the axes of w.
std::size_t coarse_cells_for_length(const WignerGrid& w, double l);

// sum (|W| - W)/2 dx dp
double negativity(const WignerGrid& w);

struct NoiseMetric {
  std::vector<double> window_start;
  std::vector<double> values;  // one per window
  double overall = 0.0;        // over the whole record
};

// in RMS, divided by the RMS predicted increment. Windows hold `window` time units, or the
// whole record when it is shorter.
// in RMS, divided by the RMS predicted increment. Windows hold `window` time units.
// Throws DomainError("InsufficientSamples") if a window has fewer than 10 points, and
// ConfigError if the record cadence is not uniform.
NoiseMetric trajectory_noise_metric(const TrajectoryRecord& record, const HamiltonianSpec& spec, double window = 1.0);

struct ComparisonSeries {
  std::vector<double> times;
  std::vector<double> l1_distance;
  std::vector<double> negativity;
  std::vector<double> noise_metric;  // NaN where not applicable
};

// Columns t,l1_distance,negativity,noise_metric
void write_comparison_csv(std::ostream& out, const ComparisonSeries& series);

}  // namespace qct
