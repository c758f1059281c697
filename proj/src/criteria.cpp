#include "qct/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <json.hpp>
#include <limits>
#include <numbers>
#include <sstream>

#include "qct/error.hpp"

namespace qct {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// big / small, with 0 denominators mapping to +inf (or 0 when the numerator is 0 too).
double oriented_ratio(double big, double small) {
  if (small == 0.0) return big > 0.0 ? kInf : 0.0;
  return big / small;
}

Verdict worst(std::initializer_list<Verdict> vs) {
  Verdict w = Verdict::Satisfied;
  for (Verdict v : vs)
    if (static_cast<int>(v) > static_cast<int>(w)) w = v;
  return w;
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw DomainError("DivisionDomain", std::string(what) + " must be positive and finite");
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Satisfied: return "satisfied";
    case Verdict::Marginal: return "marginal";
    case Verdict::Violated: return "violated";
  }
  return "violated";
}

InequalityEntry make_entry(std::string name, std::string formula, double lhs, Relation rel, double rhs,
                           double margin_factor) {
  InequalityEntry e;
  e.name = std::move(name);
  e.formula = std::move(formula);
  e.lhs = lhs;
  e.rhs = rhs;
  e.relation = rel;
  const bool less = rel == Relation::MuchLess || rel == Relation::LessSim;
  e.ratio = less ? oriented_ratio(rhs, lhs) : oriented_ratio(lhs, rhs);
  e.threshold = (rel == Relation::MuchLess || rel == Relation::MuchGreater) ? margin_factor : 1.0;
  e.satisfied = e.ratio >= e.threshold;
  e.verdict = e.satisfied ? Verdict::Satisfied : (e.ratio >= 1.0 ? Verdict::Marginal : Verdict::Violated);
  return e;
}

PhaseSpaceAverages phase_space_averages(const HamiltonianSpec& spec, std::span<const PhasePoint> starts,
                                        double t_span, double dt) {
  spec.validate();
  if (starts.empty()) throw ConfigError("phase_space_averages needs at least one orbit");
  const double period = 2.0 * std::numbers::pi / spec.drive_freq;
  if (t_span < 20.0 * period) throw ConfigError("averaging span must cover at least 20 drive periods");

  // [half][quantity]
  double sums[2][4] = {};
  std::size_t counts[2] = {0, 0};
  for (const auto& start : starts) {
    integrate_orbit(spec, start, 0.0, t_span, dt, [&](double t, double x, double p) {
      const int h = t < 0.5 * t_span ? 0 : 1;
      sums[h][0] += std::fabs(force(spec, x, t));
      sums[h][1] += std::fabs(force_dx(spec, x));
      sums[h][2] += std::fabs(force_dxx(spec, x));
      sums[h][3] += std::fabs(p);
      ++counts[h];
    });
  }
  double avg[4];
  static const char* names[4] = {"|F|", "|dF/dx|", "|d2F/dx2|", "|p|"};
  for (int q = 0; q < 4; ++q) {
    const double a = sums[0][q] / static_cast<double>(counts[0]);
    const double b = sums[1][q] / static_cast<double>(counts[1]);
    avg[q] = (sums[0][q] + sums[1][q]) / static_cast<double>(counts[0] + counts[1]);
    if (avg[q] > 0.0 && std::fabs(a - b) > 0.1 * avg[q]) {
      std::ostringstream msg;
      msg << "half-span averages of " << names[q] << " differ by more than 10% (" << a << " vs " << b << ")";
      throw DomainError("NonConvergence", msg.str());
    }
  }
  return {avg[0], avg[1], avg[2], avg[3], spec.mass, t_span, starts.size()};
}

PhaseSpaceAverages pointwise_averages(const HamiltonianSpec& spec, double x, double p, double t) {
  return {std::fabs(force(spec, x, t)), std::fabs(force_dx(spec, x)), std::fabs(force_dxx(spec, x)), std::fabs(p),
          spec.mass, 0.0, 0};
}

ActionScales action_scales(const PhaseSpaceAverages& avg, double p_ref, double A, double hbar, double lambda_bar) {
  require_positive(avg.abs_force, "|F|");
  require_positive(avg.abs_force_dx, "|dF/dx|");
  require_positive(avg.abs_force_dxx, "|d2F/dx2|");
  require_positive(p_ref, "|p|");
  require_positive(A, "accessible area A");
  require_positive(hbar, "hbar");
  require_positive(lambda_bar, "lambda_bar");
  const double m = avg.mass;
  ActionScales s;
  s.A = A;
  s.S = p_ref * p_ref * p_ref / (8.0 * m * avg.abs_force);
  s.S_prime = m * std::pow(avg.abs_force, 3) / (p_ref * avg.abs_force_dx * avg.abs_force_dx);
  s.s_bar = std::min(s.S, s.S_prime) / hbar;
  s.s_tilde = A / hbar;
  s.s_dbar = m * lambda_bar * avg.abs_force / (hbar * avg.abs_force_dxx);
  s.s_nominal = s.s_tilde;
  return s;
}

double rectangle_area(double x_lo, double x_hi, double p_lo, double p_hi) {
  return std::fabs(x_hi - x_lo) * std::fabs(p_hi - p_lo);
}

double convex_hull_area(std::vector<PhasePoint> pts) {
  if (pts.size() < 3) return 0.0;
  std::sort(pts.begin(), pts.end(), [](const PhasePoint& a, const PhasePoint& b) {
    return a.x < b.x || (a.x == b.x && a.p < b.p);
  });
  auto cross = [](const PhasePoint& o, const PhasePoint& a, const PhasePoint& b) {
    return (a.x - o.x) * (b.p - o.p) - (a.p - o.p) * (b.x - o.x);
  };
  std::vector<PhasePoint> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& pt : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pt) <= 0) --k;
    hull[k++] = pt;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  double area = 0.0;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const auto& a = hull[i];
    const auto& b = hull[(i + 1) % hull.size()];
    area += a.x * b.p - b.x * a.p;
  }
  return 0.5 * std::fabs(area);
}

LocalizationResult strong_localization(const PhaseSpaceAverages& avg, double k, double hbar, double margin_factor) {
  const double F = avg.abs_force, F1 = avg.abs_force_dx, F2 = avg.abs_force_dxx, m = avg.mass;
  LocalizationResult out;
  const double branch_rhs = 4.0 * F * std::sqrt(m * F1) / hbar;
  out.entries.push_back(make_entry("nonlinearity_branch", "|F''| << 4|F| sqrt(m|F'|)/hbar", F2, Relation::MuchLess,
                                   branch_rhs, margin_factor));
  out.weak_nonlinearity_branch = out.entries.back().satisfied;
  const double ratio = F > 0.0 ? F2 / (8.0 * F) : kInf;
  if (out.weak_nonlinearity_branch) {
    out.entries.push_back(make_entry("localization", "k >> |F''/(8F)| sqrt(|F'|/(2m))", k, Relation::MuchGreater,
                                     ratio * std::sqrt(F1 / (2.0 * m)), margin_factor));
  } else {
    out.entries.push_back(make_entry("localization", "k >> (F''/(8F))^2 (2 hbar/m)", k, Relation::MuchGreater,
                                     ratio * ratio * 2.0 * hbar / m, margin_factor));
  }
  return out;
}

LowNoiseResult strong_low_noise(const PhaseSpaceAverages& avg, double s_bar, double k, double hbar,
                                double lambda_bar, double margin_factor) {
  const double F1 = avg.abs_force_dx, m = avg.mass;
  LowNoiseResult out;
  const double lower = 2.0 * F1 / s_bar;
  const double upper = F1 * s_bar / 4.0;
  out.k_lower = lower / hbar;
  out.k_upper = upper / hbar;
  out.entries.push_back(
      make_entry("low_noise_lower", "2|F'|/s_bar << hbar k", lower, Relation::MuchLess, hbar * k, margin_factor));
  out.entries.push_back(
      make_entry("low_noise_upper", "hbar k << |F'| s_bar/4", hbar * k, Relation::MuchLess, upper, margin_factor));
  out.entries.push_back(make_entry("low_noise_window", "2|F'|/s_bar <~ |F'| s_bar/4", lower, Relation::LessSim,
                                   upper, margin_factor));
  out.window_feasible = out.entries.back().satisfied;
  const double scale = 2.0 * m * lambda_bar * lambda_bar / hbar;
  out.entries.push_back(make_entry("low_noise_lower_lyapunov", "(2 m lambda^2/hbar)(1/s_bar) << k", scale / s_bar,
                                   Relation::MuchLess, k, margin_factor));
  out.entries.push_back(make_entry("low_noise_upper_lyapunov", "k << (2 m lambda^2/hbar)(s_bar/8)", k,
                                   Relation::MuchLess, scale * s_bar / 8.0, margin_factor));
  return out;
}

double k_crit(double m, double lambda_bar, double hbar, double s_tilde, double xi) {
  if (!(xi * s_tilde > 1.0))
    throw DomainError("DomainError", "k_crit requires xi * s_tilde > 1 (logarithm must be positive)");
  return 2.0 * m * lambda_bar * lambda_bar / (hbar * std::log(xi * s_tilde));
}

double weak_upper_bound(double m, double lambda_bar, double hbar, double s_tilde) {
  if (!(s_tilde > 1.0)) throw DomainError("DomainError", "weak window requires s_tilde > 1");
  return 2.0 * m * lambda_bar * lambda_bar / hbar * s_tilde / std::log(s_tilde);
}

std::vector<InequalityEntry> weak_window(double m, double lambda_bar, double hbar, double s_tilde, double k,
                                         double margin_factor) {
  return {make_entry("weak_lower", "2 m lambda^2/(hbar ln s_tilde) <~ k", k_crit(m, lambda_bar, hbar, s_tilde),
                     Relation::LessSim, k, margin_factor),
          make_entry("weak_upper", "k << (2 m lambda^2/hbar) s_tilde/ln(s_tilde)", k, Relation::MuchLess,
                     weak_upper_bound(m, lambda_bar, hbar, s_tilde), margin_factor)};
}

double diffusion_of_length(double l, double m, double lambda_bar, double xi, double A) {
  const double u = l * l;
  return 2.0 * m * lambda_bar * lambda_bar * u / std::log(xi * A / u);
}

double solve_l(double D, double m, double lambda_bar, double xi, double A) {
  if (!(D > 0.0)) throw DomainError("Infeasible", "solve_l requires D > 0");
  if (!(m > 0.0) || !(lambda_bar > 0.0) || !(xi > 0.0) || !(A > 0.0))
    throw DomainError("Infeasible", "solve_l requires positive m, lambda_bar, xi and A");
  const double c = 2.0 * m * lambda_bar * lambda_bar;
  const double u_max = xi * A / std::numbers::e;
  auto d_of_u = [&](double u) { return c * u / std::log(xi * A / u); };
  if (D >= d_of_u(u_max))
    throw DomainError("Infeasible", "momentum diffusion too large: l^2 would exceed xi*A/e (outside weak-theory domain)");
  double lo = 0.0, hi = u_max;
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (d_of_u(mid) < D ? lo : hi) = mid;
  }
  // Pick the bracket end with the smaller residual.
  const double u = std::fabs(d_of_u(lo) - D) <= std::fabs(d_of_u(hi) - D) && lo > 0.0 ? lo : hi;
  return std::sqrt(u);
}

double WeakScales::l_cl(double t) const { return std::sqrt(D * t / (m * lambda_bar)); }
double WeakScales::l_qu(double t) const { return hbar / l_cl(t); }
double WeakScales::delta(double t) const { return std::sqrt(xi * A) * std::exp(-lambda_bar * t); }

WeakScales weak_times(double D, double m, double lambda_bar, double hbar, double xi, double A) {
  if (!(D > 0.0) || !(m > 0.0) || !(lambda_bar > 0.0) || !(hbar > 0.0) || !(xi > 0.0) || !(A > 0.0))
    throw DomainError("DomainError", "weak_times requires positive D, m, lambda_bar, hbar, xi and A");
  WeakScales w;
  w.D = D;
  w.m = m;
  w.lambda_bar = lambda_bar;
  w.hbar = hbar;
  w.xi = xi;
  w.A = A;
  w.t_qc = m * hbar * lambda_bar / D;
  w.k_crit = A / hbar > 1.0 ? k_crit(m, lambda_bar, hbar, A / hbar) : std::numeric_limits<double>::quiet_NaN();
  try {
    w.l = solve_l(D, m, lambda_bar, xi, A);
    w.l_feasible = true;
  } catch (const DomainError&) {
    w.l = std::numeric_limits<double>::quiet_NaN();
  }
  // g(t) = ln l_cl - ln delta is strictly increasing; bracket then bisect.
  auto g = [&](double t) {
    return 0.5 * std::log(D * t / (m * lambda_bar)) - 0.5 * std::log(xi * A) + lambda_bar * t;
  };
  double lo = 1e-300, hi = 1.0;
  while (g(hi) < 0.0) hi *= 2.0;
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  w.t_star = 0.5 * (lo + hi);
  return w;
}

InequalityEntry fringe_washout_check(const WeakScales& w, double margin_factor) {
  const double l2 = w.l_cl(w.t_qc) * w.l_cl(w.t_qc);
  return make_entry("fringe_washout", "l_cl(t_qc)^2 >~ hbar", l2, Relation::GreaterSim, w.hbar, margin_factor);
}

std::vector<InequalityEntry> weak_implies_strong(double s, double margin_factor,
                                                 const std::optional<ImplicationContext>& ctx) {
  if (!(s > 2.0)) throw DomainError("DomainError", "weak-implies-strong conditions need s > 2");
  const double ln_s = std::log(s);
  const double e8 = std::exp(8.0);
  const double five7 = 78125.0;
  const double alt_core = std::pow(s, 1.0 / 7.0) / std::log(32.0 * std::pow(s, 5.0) * std::pow(ln_s, -1.5));
  std::vector<InequalityEntry> out{
      make_entry("semiclassical_threshold", "s >> e^8", s, Relation::MuchGreater, e8, margin_factor),
      make_entry("variance_route_threshold", "s >> 5^7", s, Relation::MuchGreater, five7, margin_factor),
      make_entry("variance_route_combined", "1/ln s << s^(1/7)/ln(32 s^5 (ln s)^(-3/2))", 1.0 / ln_s,
                 Relation::MuchLess, alt_core, margin_factor),
      make_entry("localization_redundancy_linear", "s >> ln(s)/(16 sqrt 2)", s, Relation::MuchGreater,
                 ln_s / (16.0 * std::numbers::sqrt2), margin_factor),
      make_entry("localization_redundancy_sqrt", "s >> sqrt(ln s)/8", s, Relation::MuchGreater, std::sqrt(ln_s) / 8.0,
                 margin_factor),
  };
  if (ctx) {
    const double m = ctx->m, lam = ctx->lambda_bar, hbar = ctx->hbar, k = ctx->k;
    out.push_back(make_entry("variance_route_localization", "k << (4 m lambda^2/hbar) s/ln(s/2)", k,
                             Relation::MuchLess, 4.0 * m * lam * lam / hbar * s / std::log(s / 2.0), margin_factor));
    out.push_back(make_entry("variance_route_noise_lower",
                             "k << (2 m lambda/hbar) 2^(2/3) s^(1/3)/ln(2 s^4/ln s)", k, Relation::MuchLess,
                             2.0 * m * lam / hbar * std::pow(2.0, 2.0 / 3.0) * std::cbrt(s) /
                                 std::log(2.0 * std::pow(s, 4.0) / ln_s),
                             margin_factor));
    out.push_back(make_entry("variance_route_noise_upper",
                             "k << (2 m lambda/hbar) 8^(-1/7) s^(1/7)/ln(32 s^5 (ln s)^(-3/2))", k, Relation::MuchLess,
                             2.0 * m * lam / hbar * std::pow(8.0, -1.0 / 7.0) * alt_core, margin_factor));
  }
  return out;
}

const InequalityEntry* RegimeReport::find(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return &e;
  return nullptr;
}

RegimeReport classify(const HamiltonianSpec& spec, const MeasurementSpec& meas, const PhaseSpaceAverages& avg,
                      const ActionScales& scales, double lambda_bar, double margin_factor) {
  meas.validate();
  RegimeReport r;
  r.margin_factor = margin_factor;
  r.k = meas.k;
  r.hbar = meas.hbar;
  r.lambda_bar = lambda_bar;
  r.scales = scales;
  r.averages = avg;
  const double k = meas.k, hbar = meas.hbar, m = spec.mass;
  auto add = [&](const std::vector<InequalityEntry>& es) { r.entries.insert(r.entries.end(), es.begin(), es.end()); };

  const auto loc = strong_localization(avg, k, hbar, margin_factor);
  add(loc.entries);
  r.branch_taken = loc.weak_nonlinearity_branch ? "weak-nonlinearity" : "strong-nonlinearity";
  r.verdicts["strong_localized"] = loc.entries.back().verdict;

  const auto noise = strong_low_noise(avg, scales.s_bar, k, hbar, lambda_bar, margin_factor);
  add(noise.entries);
  r.verdicts["strong_low_noise"] = worst({noise.entries[0].verdict, noise.entries[1].verdict});

  const bool semiclassical = scales.s_tilde > std::numbers::e && scales.s_nominal > std::numbers::e;
  bool in_domain = semiclassical;
  if (semiclassical) {
    const auto weak = weak_window(m, lambda_bar, hbar, scales.s_tilde, k, margin_factor);
    add(weak);
    r.verdicts["weak_window"] = worst({weak[0].verdict, weak[1].verdict});
    const auto imp = weak_implies_strong(scales.s_nominal, margin_factor, ImplicationContext{k, m, lambda_bar, hbar});
    add(imp);
    r.verdicts["weak_implies_strong_semiclassical"] = imp[0].verdict;
    r.verdicts["weak_implies_strong_variance"] = worst({imp[1].verdict, imp[5].verdict, imp[6].verdict, imp[7].verdict});
    if (meas.diffusion() > 0.0) {
      r.weak = weak_times(meas.diffusion(), m, lambda_bar, hbar, 1.0, scales.A);
      r.entries.push_back(fringe_washout_check(*r.weak, margin_factor));
      in_domain = r.weak->l_feasible;
    }
  }

  if (!in_domain) {
    r.label = kLabelOutside;
  } else if (k == 0.0) {
    r.label = kLabelNoTransition;
  } else if (!r.find("weak_upper")->satisfied) {
    r.label = kLabelNoiseDominated;
  } else if (r.verdicts["strong_localized"] == Verdict::Satisfied &&
             r.verdicts["strong_low_noise"] == Verdict::Satisfied) {
    r.label = kLabelStrongWeak;
  } else if (r.find("weak_lower")->satisfied) {
    r.label = kLabelWeakForming;
  } else {
    r.label = kLabelWeakSteady;
  }
  return r;
}

bool report_consistent(const RegimeReport& r) {
  for (const auto& e : r.entries) {
    const auto again = make_entry(e.name, e.formula, e.lhs, e.relation, e.rhs, r.margin_factor);
    if (again.satisfied != e.satisfied || again.verdict != e.verdict) return false;
  }
  return true;
}

std::string report_to_json(const RegimeReport& r) {
  using nlohmann::json;
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json entries = json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"name", e.name},
                       {"paper_eq", e.formula},
                       {"lhs", num(e.lhs)},
                       {"rhs", num(e.rhs)},
                       {"ratio", num(e.ratio)},
                       {"threshold", e.threshold},
                       {"satisfied", e.satisfied},
                       {"verdict", to_string(e.verdict)}});
  }
  json verdicts = json::object();
  for (const auto& [k, v] : r.verdicts) verdicts[k] = to_string(v);
  json j{{"label", r.label},
         {"branch_taken", r.branch_taken},
         {"margin_factor", r.margin_factor},
         {"k", r.k},
         {"hbar", r.hbar},
         {"lambda_bar", r.lambda_bar},
         {"scales",
          {{"S", r.scales.S},
           {"S_prime", r.scales.S_prime},
           {"s_bar", r.scales.s_bar},
           {"s_tilde", r.scales.s_tilde},
           {"s_dbar", r.scales.s_dbar},
           {"s_nominal", r.scales.s_nominal},
           {"A", r.scales.A}}},
         {"averages",
          {{"abs_force", r.averages.abs_force},
           {"abs_force_dx", r.averages.abs_force_dx},
           {"abs_force_dxx", r.averages.abs_force_dxx},
           {"abs_p", r.averages.abs_p}}},
         {"verdicts", verdicts},
         {"inequalities", entries}};
  if (r.weak) {
    j["weak_scales"] = {{"D", r.weak->D},         {"l", num(r.weak->l)},    {"l_feasible", r.weak->l_feasible},
                        {"t_star", r.weak->t_star}, {"t_qc", r.weak->t_qc}, {"k_crit", num(r.weak->k_crit)}};
  }
  return j.dump(2);
}

std::string report_table(const RegimeReport& r) {
  std::ostringstream out;
  out << "regime: " << r.label << "   (margin factor " << r.margin_factor << ", branch " << r.branch_taken << ")\n";
  out << std::left << std::setw(32) << "inequality" << std::right << std::setw(14) << "lhs" << std::setw(14) << "rhs"
      << std::setw(14) << "ratio" << "  verdict\n";
  for (const auto& e : r.entries) {
    out << std::left << std::setw(32) << e.name << std::right << std::setprecision(5) << std::setw(14) << e.lhs
        << std::setw(14) << e.rhs << std::setw(14) << e.ratio << "  " << to_string(e.verdict) << '\n';
  }
  return out.str();
}

}  // namespace qct
