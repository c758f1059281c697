#include <doctest.h>

#include <cmath>
#include <json.hpp>
#include <numbers>

#include "qct/criteria.hpp"
#include "qct/error.hpp"
#include "qct/rng.hpp"

using namespace qct;

namespace {

PhaseSpaceAverages reference_point() { return pointwise_averages(HamiltonianSpec::duffing(), -3.0, 8.0, 0.0); }

MeasurementSpec strength(double k, double hbar) {
  MeasurementSpec m;
  m.k = k;
  m.hbar = hbar;
  return m;
}

}  // namespace

TEST_CASE("inequality entries") {
  const auto much_less = make_entry("a", "", 1.0, Relation::MuchLess, 20.0, 10.0);
  CHECK(much_less.ratio == 20.0);
  CHECK(much_less.satisfied);
  CHECK(much_less.verdict == Verdict::Satisfied);
  const auto marginal = make_entry("b", "", 4.0, Relation::MuchGreater, 1.0, 10.0);
  CHECK(marginal.ratio == 4.0);
  CHECK_FALSE(marginal.satisfied);
  CHECK(marginal.verdict == Verdict::Marginal);
  const auto violated = make_entry("c", "", 2.0, Relation::MuchLess, 1.0, 10.0);
  CHECK(violated.verdict == Verdict::Violated);
  const auto sim = make_entry("d", "", 2.0, Relation::GreaterSim, 1.5, 10.0);
  CHECK(sim.threshold == 1.0);
  CHECK(sim.satisfied);
  const auto zero = make_entry("e", "", 0.0, Relation::MuchLess, 1.0, 10.0);
  CHECK(std::isinf(zero.ratio));
  CHECK(zero.satisfied);
}

TEST_CASE("action scales at the reference point") {
  const auto avg = reference_point();
  CHECK(avg.abs_force == doctest::Approx(16.0));
  const auto s = action_scales(avg, 8.0, rectangle_area(-5, 5, -20, 20), 0.1, 2.0);
  CHECK(s.S == doctest::Approx(4.0));
  CHECK(s.S_prime == doctest::Approx(0.4429).epsilon(1e-3));
  CHECK(s.s_bar == doctest::Approx(4.43).epsilon(1e-3));
  CHECK(s.s_tilde == doctest::Approx(4000.0));
  CHECK(s.s_nominal == s.s_tilde);
  CHECK(s.s_dbar == doctest::Approx(1.0 * 2.0 * 16.0 / (0.1 * 36.0)));
  CHECK(s.s_bar <= s.S / 0.1);
  CHECK(s.s_bar <= s.S_prime / 0.1);

  auto flat = avg;
  flat.abs_force_dxx = 0.0;
  try {
    action_scales(flat, 8.0, 400.0, 0.1, 2.0);
    FAIL("expected DivisionDomain");
  } catch (const DomainError& e) {
    CHECK(e.kind() == "DivisionDomain");
  }
}

TEST_CASE("accessible area estimates") {
  CHECK(rectangle_area(-5, 5, -20, 20) == 400.0);
  std::vector<PhasePoint> pts{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}, {0.2, 0.9}};
  CHECK(convex_hull_area(pts) == doctest::Approx(1.0));
}

TEST_CASE("strong localization") {
  const auto loc = strong_localization(reference_point(), 1.0, 0.1, 10.0);
  REQUIRE(loc.entries.size() == 2);
  CHECK(loc.weak_nonlinearity_branch);
  CHECK(loc.entries[1].rhs == doctest::Approx(1.1596).epsilon(1e-3));
  CHECK(loc.entries[1].ratio == doctest::Approx(0.862).epsilon(1e-3));
  CHECK_FALSE(loc.entries[1].satisfied);

  auto linear = reference_point();
  linear.abs_force_dxx = 0.0;
  const auto lin = strong_localization(linear, 1e-6, 0.1, 10.0);
  CHECK(lin.entries[1].rhs == 0.0);
  CHECK(lin.entries[1].satisfied);

  const auto tiny = strong_localization(reference_point(), 1.0, 1e-8, 10.0);
  CHECK(tiny.weak_nonlinearity_branch);

  const auto big = strong_localization(reference_point(), 1.0, 10.0, 10.0);
  CHECK_FALSE(big.weak_nonlinearity_branch);
  CHECK(big.entries[1].formula.find("hbar") != std::string::npos);
}

TEST_CASE("strong low-noise window") {
  const auto avg = reference_point();
  const auto res = strong_low_noise(avg, 4.43, 1.0, 0.1, 2.0, 10.0);
  CHECK(res.k_lower == doctest::Approx(153.5).epsilon(2e-3));
  CHECK(res.k_upper == doctest::Approx(376.6).epsilon(2e-3));
  CHECK(res.window_feasible);
  CHECK_FALSE(res.entries[0].satisfied);

  const auto narrow = strong_low_noise(avg, 2.5, 1.0, 0.1, 2.0, 10.0);
  CHECK_FALSE(narrow.window_feasible);

  const auto doubled = strong_low_noise(avg, 4.43, 1.0, 0.2, 2.0, 10.0);
  CHECK(doubled.k_lower == doctest::Approx(res.k_lower / 2.0));
  CHECK(doubled.k_upper == doctest::Approx(res.k_upper / 2.0));
}

TEST_CASE("critical measurement strength") {
  CHECK(k_crit(1.0, 2.0, 0.1, 4000.0) == doctest::Approx(9.645).epsilon(1e-3));
  CHECK(std::fabs(k_crit(1.0, 2.0, 0.1, 4000.0) - 9.65) < 0.01);
  CHECK(weak_upper_bound(1.0, 2.0, 0.1, 4000.0) == doctest::Approx(9.645 * 4000.0).epsilon(1e-3));
  CHECK(k_crit(1.0, 2.0, 0.1, std::numbers::e) == doctest::Approx(80.0));
  double prev = k_crit(1.0, 2.0, 0.1, 3.0);
  for (double s = 4.0; s < 1e6; s *= 1.7) {
    const double k = k_crit(1.0, 2.0, 0.1, s);
    CHECK(k < prev);
    prev = k;
  }
  CHECK_THROWS_AS(k_crit(1.0, 2.0, 0.1, 1.0), DomainError);
  for (double s : {std::exp(2.0), 100.0, 4000.0, 1e8})
    CHECK(k_crit(1.0, 2.0, 0.1, s, 1.0) / k_crit(1.0, 2.0, 0.1, s, s) <= 2.0 + 1e-12);
  const auto window = weak_window(1.0, 2.0, 0.1, 4000.0, 100.0, 10.0);
  CHECK(window[0].satisfied);
  CHECK(window[1].satisfied);
}

TEST_CASE("smearing length") {
  const double l = solve_l(0.01, 1.0, 2.0, 1.0, 400.0);
  CHECK(std::fabs(l * l - 0.0129) < 0.0002);
  CHECK(l == doctest::Approx(0.114).epsilon(0.01));
  CHECK(std::fabs(diffusion_of_length(l, 1.0, 2.0, 1.0, 400.0) - 0.01) / 0.01 < 1e-10);
  // fixed-point iteration l^2 <- D ln(xi A / l^2) / (2 m lambda^2)
  double u = 0.01;
  for (int i = 0; i < 200; ++i) u = 0.01 * std::log(400.0 / u) / 8.0;
  CHECK(l * l == doctest::Approx(u).epsilon(1e-9));

  CHECK(solve_l(1e-12, 1.0, 2.0, 1.0, 400.0) < 1e-5);

  const CounterRng rng(CounterRng::Domain::Orbits, 17);
  for (std::uint64_t i = 0; i < 100; ++i) {
    const double m = 0.5 + 2.0 * rng.uniform(i, 0);
    const double lam = 0.1 + 3.0 * rng.uniform(i, 1);
    const double A = 10.0 + 1000.0 * rng.uniform(i, 2);
    const double xi = 1.0 + 10.0 * rng.uniform(i, 3);
    const double d_max = diffusion_of_length(std::sqrt(xi * A / std::numbers::e), m, lam, xi, A);
    const double D = d_max * std::pow(10.0, -6.0 * rng.uniform(i, 4)) * 0.999;
    const double li = solve_l(D, m, lam, xi, A);
    CHECK(std::fabs(diffusion_of_length(li, m, lam, xi, A) - D) / D < 1e-10);
    CHECK(li * li < xi * A / std::numbers::e);
  }
  try {
    solve_l(1e6, 1.0, 2.0, 1.0, 400.0);
    FAIL("expected Infeasible");
  } catch (const DomainError& e) {
    CHECK(e.kind() == "Infeasible");
  }
}

TEST_CASE("weak transition times") {
  const auto w = weak_times(0.01, 1.0, 2.0, 0.1, 1.0, 400.0);
  CHECK(w.t_qc == doctest::Approx(20.0));
  CHECK(w.l_cl(w.t_qc) * w.l_cl(w.t_qc) == doctest::Approx(0.1).epsilon(1e-12));
  for (double t : {0.1, 1.0, 7.0, 50.0}) CHECK(w.l_qu(t) * w.l_cl(t) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(w.l_cl(w.t_star) == doctest::Approx(w.delta(w.t_star)).epsilon(1e-9));
  CHECK(w.l_feasible);
  CHECK(weak_times(0.01, 1.0, 2.0, 0.1, 1.0, 4000.0).t_star > w.t_star);
  CHECK(weak_times(0.01, 1.0, 2.0, 0.1, 10.0, 400.0).t_star > w.t_star);
  CHECK(weak_times(0.1, 1.0, 2.0, 0.1, 1.0, 400.0).t_star < w.t_star);
  CHECK(fringe_washout_check(w, 10.0).satisfied);
}

TEST_CASE("weak-implies-strong thresholds") {
  const auto r = weak_implies_strong(4000.0, 10.0);
  CHECK(r[0].rhs == doctest::Approx(2980.96).epsilon(1e-6));
  CHECK(std::fabs(r[0].rhs - 2980.96) < 0.01);
  CHECK(r[0].ratio == doctest::Approx(1.342).epsilon(1e-3));
  CHECK(r[0].verdict == Verdict::Marginal);
  CHECK(r[1].rhs == 78125.0);
  CHECK_FALSE(r[1].satisfied);
  // The combined variance route grows like s^(1/7) ln s / ln s^5, so it is only marginal near 10^7.
  CHECK(weak_implies_strong(1e7, 10.0)[2].verdict == Verdict::Marginal);
  const auto big = weak_implies_strong(1e30, 10.0);
  for (const auto& e : big) {
    INFO(e.name, " ratio ", e.ratio);
    CHECK(e.satisfied);
  }
  const auto ctx = weak_implies_strong(1e30, 10.0, ImplicationContext{1.0, 1.0, 0.5, 0.1});
  CHECK(ctx.size() == big.size() + 3);
}

TEST_CASE("phase-space averages") {
  SUBCASE("harmonic curvature is constant") {
    const auto spec = HamiltonianSpec::harmonic(1.0, 2.0);
    const PhasePoint start{1.0, 0.0};
    const auto avg = phase_space_averages(spec, std::span(&start, 1), 100.0);
    CHECK(avg.abs_force_dx == doctest::Approx(4.0).epsilon(1e-12));
  }
  SUBCASE("single well matches the orbit-measure quadrature") {
    HamiltonianSpec spec;
    spec.alpha = -2.0;
    spec.beta = 0.5;
    spec.drive_amp = 0.0;
    const double X = 1.5, a = 2.0, beta = 0.5;
    const PhasePoint start{X, 0.0};
    const auto avg = phase_space_averages(spec, std::span(&start, 1), 500.0, 0.001);
    // x = X sin(theta) makes dt = dtheta / sqrt(2 (a + beta X^2 (1 + sin^2)))
    double num = 0.0, den = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
      const double th = -std::numbers::pi / 2 + std::numbers::pi * (i + 0.5) / n;
      const double s = std::sin(th);
      const double w = 1.0 / std::sqrt(2.0 * (a + beta * X * X * (1.0 + s * s)));
      num += w * 24.0 * beta * std::fabs(X * s);
      den += w;
    }
    CHECK(avg.abs_force_dxx == doctest::Approx(num / den).epsilon(0.01));
  }
  SUBCASE("reference Duffing averages are seed-stable") {
    const auto spec = HamiltonianSpec::duffing();
    const auto a = sample_coherent_matched(-3.0, 8.0, 0.1, 8, 1);
    const auto b = sample_coherent_matched(-3.0, 8.0, 0.1, 8, 2);
    const auto pa = phase_space_averages(spec, a.samples, 20000.0);
    const auto pb = phase_space_averages(spec, b.samples, 20000.0);
    CHECK(std::isfinite(pa.abs_force));
    CHECK(pa.abs_force == doctest::Approx(pb.abs_force).epsilon(0.1));
    CHECK(pa.abs_force_dx == doctest::Approx(pb.abs_force_dx).epsilon(0.1));
    CHECK(pa.abs_force_dxx == doctest::Approx(pb.abs_force_dxx).epsilon(0.1));
    CHECK(pa.abs_p == doctest::Approx(pb.abs_p).epsilon(0.1));
  }
  SUBCASE("span must cover 20 drive periods") {
    const PhasePoint start{1.0, 0.0};
    CHECK_THROWS_AS(phase_space_averages(HamiltonianSpec::duffing(), std::span(&start, 1), 5.0), ConfigError);
  }
}

TEST_CASE("regime classification") {
  const auto spec = HamiltonianSpec::duffing();
  const auto avg = reference_point();
  const double lambda = 0.5;
  const auto scales = action_scales(avg, avg.abs_p, 400.0, 0.1, lambda);

  SUBCASE("unobserved system has no transition") {
    const auto r = classify(spec, strength(0.0, 0.1), avg, scales, lambda, 10.0);
    CHECK(r.label == std::string(kLabelNoTransition));
    CHECK_FALSE(r.find("weak_lower")->satisfied);
    CHECK(report_consistent(r));
  }
  SUBCASE("reference parameters") {
    const auto r = classify(spec, strength(1.0, 0.1), avg, scales, lambda, 10.0);
    CHECK(r.verdicts.at("strong_localized") != Verdict::Satisfied);
    CHECK(r.verdicts.at("strong_low_noise") != Verdict::Satisfied);
    CHECK(r.branch_taken == "weak-nonlinearity");
    CHECK(report_consistent(r));
    const auto j = nlohmann::json::parse(report_to_json(r));
    CHECK(j["label"] == r.label);
    REQUIRE(j["inequalities"].size() == r.entries.size());
    for (const auto& e : j["inequalities"]) {
      CHECK(e.contains("name"));
      CHECK(e.contains("paper_eq"));
      CHECK(e.contains("lhs"));
      CHECK(e.contains("rhs"));
      CHECK(e.contains("ratio"));
      CHECK(e.contains("satisfied"));
    }
    CHECK(report_table(r).find("localization") != std::string::npos);
  }
  SUBCASE("deep semiclassical limit gives strong and weak transitions") {
    const double hbar = 1e-3;
    const auto s = action_scales(avg, avg.abs_p, 400.0, hbar, lambda);
    const auto noise = strong_low_noise(avg, s.s_bar, 1.0, hbar, lambda, 10.0);
    const double k = std::sqrt(noise.k_lower * noise.k_upper);
    const auto r = classify(spec, strength(k, hbar), avg, s, lambda, 10.0);
    CHECK(r.label == std::string(kLabelStrongWeak));
    CHECK(report_consistent(r));
  }
  SUBCASE("excess noise leaves the weak-theory domain") {
    const auto r = classify(spec, strength(1e9, 0.1), avg, scales, lambda, 10.0);
    CHECK(r.label == std::string(kLabelOutside));
  }
  SUBCASE("tampered verdicts are detected") {
    auto r = classify(spec, strength(1.0, 0.1), avg, scales, lambda, 10.0);
    r.entries[1].satisfied = !r.entries[1].satisfied;
    CHECK_FALSE(report_consistent(r));
  }
}
