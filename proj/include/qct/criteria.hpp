#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qct/cdyn.hpp"
#include "qct/model.hpp"
#include "qct/qdyn.hpp"

namespace qct {

// Time averages of |F|, |dF/dx|, |d2F/dx2| and |p| along noiseless orbits.
struct PhaseSpaceAverages {
  double abs_force = 0.0;
  double abs_force_dx = 0.0;
  double abs_force_dxx = 0.0;
  double abs_p = 0.0;
  double mass = 1.0;
  double t_span = 0.0;
  std::size_t n_orbits = 0;
};

// Averages over RK4 orbits started at `starts`, each run for t_span (>= 20 drive periods).
// Throws DomainError("NonConvergence") if the two half-span averages of any quantity differ by > 10%.
PhaseSpaceAverages phase_space_averages(const HamiltonianSpec& spec, std::span<const PhasePoint> starts,
                                        double t_span, double dt = 0.005);
// Pointwise values at (x, p, t), for diagnostics.
PhaseSpaceAverages pointwise_averages(const HamiltonianSpec& spec, double x, double p, double t);

struct ActionScales {
  double S = 0.0;        // |p|^3 / (8 m |F|)
  double S_prime = 0.0;  // m |F|^3 / (|p| (dF/dx)^2)
  double s_bar = 0.0;    // min(S, S') / hbar
  double s_tilde = 0.0;  // A / hbar
  double s_dbar = 0.0;   // m lambda |F| / (hbar |d2F/dx2|)
  double s_nominal = 0.0;
  double A = 0.0;
};

// Throws DomainError("DivisionDomain") when a denominator vanishes.
ActionScales action_scales(const PhaseSpaceAverages& avg, double p_ref, double A, double hbar, double lambda_bar);

// Accessible area of the rectangle [x_lo, x_hi] x [p_lo, p_hi].
double rectangle_area(double x_lo, double x_hi, double p_lo, double p_hi);
// Convex-hull area of a point cloud (e.g. a long orbit).
double convex_hull_area(std::vector<PhasePoint> points);

enum class Relation {
  MuchLess,     // lhs << rhs
  MuchGreater,  // lhs >> rhs
  LessSim,      // lhs <~ rhs
  GreaterSim,   // lhs >~ rhs
};

enum class Verdict { Satisfied, Marginal, Violated };
std::string to_string(Verdict v);

// One inequality. ratio is oriented so that larger means "more satisfied":
// rhs/lhs for the "less" relations, lhs/rhs for the "greater" ones.
// Satisfied iff ratio >= threshold, where threshold is margin_factor for <<, >> and 1 for <~, >~.
struct InequalityEntry {
  std::string name;
  std::string formula;
  double lhs = 0.0;
  double rhs = 0.0;
  Relation relation = Relation::MuchLess;
  double ratio = 0.0;
  double threshold = 1.0;
  bool satisfied = false;
  Verdict verdict = Verdict::Violated;
};

InequalityEntry make_entry(std::string name, std::string formula, double lhs, Relation rel, double rhs,
                           double margin_factor);

struct LocalizationResult {
  std::vector<InequalityEntry> entries;  // branch test, then the binding localization condition
  bool weak_nonlinearity_branch = false;
};

LocalizationResult strong_localization(const PhaseSpaceAverages& avg, double k, double hbar, double margin_factor);

struct LowNoiseResult {
  std::vector<InequalityEntry> entries;
  bool window_feasible = false;  // lower bound below upper bound, i.e. s_bar > sqrt(8)
  double k_lower = 0.0;          // admissible k range of the force form
  double k_upper = 0.0;
};

LowNoiseResult strong_low_noise(const PhaseSpaceAverages& avg, double s_bar, double k, double hbar,
                                double lambda_bar, double margin_factor);

// 2 m lambda^2 / (hbar ln(xi * s_tilde)); DomainError unless xi * s_tilde > 1.
double k_crit(double m, double lambda_bar, double hbar, double s_tilde, double xi = 1.0);
// Upper end of the weak window, (2 m lambda^2/hbar) s_tilde / ln(s_tilde).
double weak_upper_bound(double m, double lambda_bar, double hbar, double s_tilde);
std::vector<InequalityEntry> weak_window(double m, double lambda_bar, double hbar, double s_tilde, double k,
                                         double margin_factor);

// D(l) = 2 m lambda^2 l^2 / ln(xi A / l^2).
double diffusion_of_length(double l, double m, double lambda_bar, double xi, double A);
// Inverts D(l) by bisection on l^2 in (0, xi A / e). DomainError("Infeasible") when
// D exceeds D at the domain edge (outside the weak-theory domain).
double solve_l(double D, double m, double lambda_bar, double xi, double A);

struct WeakScales {
  double D = 0.0;
  double m = 1.0;
  double lambda_bar = 0.0;
  double hbar = 0.0;
  double xi = 1.0;
  double A = 0.0;
  double l = 0.0;  // steady-state smearing length; NaN when infeasible
  bool l_feasible = false;
  double t_star = 0.0;
  double t_qc = 0.0;
  double k_crit = 0.0;

  double l_cl(double t) const;   // sqrt(D t / (m lambda))
  double l_qu(double t) const;   // hbar / l_cl(t)
  double delta(double t) const;  // sqrt(xi A) exp(-lambda t)
};

WeakScales weak_times(double D, double m, double lambda_bar, double hbar, double xi, double A);
// l_cl(t_qc)^2 >~ hbar
InequalityEntry fringe_washout_check(const WeakScales& w, double margin_factor);

struct ImplicationContext {
  double k;
  double m;
  double lambda_bar;
  double hbar;
};

// Conditions under which the weak regime implies the strong transition.
std::vector<InequalityEntry> weak_implies_strong(double s, double margin_factor,
                                                 const std::optional<ImplicationContext>& ctx = std::nullopt);

struct RegimeReport {
  std::vector<InequalityEntry> entries;
  std::string branch_taken;
  std::map<std::string, Verdict> verdicts;
  std::string label;
  double margin_factor = 10.0;
  double k = 0.0;
  double hbar = 0.0;
  double lambda_bar = 0.0;
  ActionScales scales;
  PhaseSpaceAverages averages;
  std::optional<WeakScales> weak;

  const InequalityEntry* find(const std::string& name) const;
};

// Regime labels, a deterministic function of the recorded margins.
inline constexpr const char* kLabelStrongWeak = "strong+weak";
inline constexpr const char* kLabelWeakForming = "weak-while-structures-form";
inline constexpr const char* kLabelWeakSteady = "weak-after-steady-state";
inline constexpr const char* kLabelNoiseDominated = "noise-dominated";
inline constexpr const char* kLabelNoTransition = "no-transition";
inline constexpr const char* kLabelOutside = "outside-theory-domain";

RegimeReport classify(const HamiltonianSpec& spec, const MeasurementSpec& meas, const PhaseSpaceAverages& avg,
                      const ActionScales& scales, double lambda_bar, double margin_factor);

// Recomputes each entry's verdict from its lhs, rhs and relation.
bool report_consistent(const RegimeReport& r);

std::string report_to_json(const RegimeReport& r);
std::string report_table(const RegimeReport& r);

}  // namespace qct
