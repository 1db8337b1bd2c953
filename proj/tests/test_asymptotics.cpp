#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "hjflow/asymptotics.hpp"
#include "hjflow/operators.hpp"
#include "hjflow/spectral.hpp"
#include "hjflow/stepper.hpp"

using namespace hjflow;
using std::numbers::pi;

namespace {

template <class Fn>
Field sample(const GridPtr& g, Fn fn) {
  Field f(g);
  for (std::size_t k = 0; k < g->size(); ++k) {
    const auto x = g->position(k);
    f[k] = fn(x[0], x[1]);
  }
  return f;
}

RunConfig interval_config(int n, double t_end, double dt_max) {
  RunConfig c;
  c.grid.kind = GridKind::interval;
  c.grid.n = n;
  c.t_end = t_end;
  c.dt_max = dt_max;
  return c;
}

TimeSeries synthetic(std::vector<double> t, std::vector<double> M, std::vector<double> m, std::vector<double> Lut,
                     std::vector<double> sup_h) {
  TimeSeries s;
  for (std::size_t k = 0; k < t.size(); ++k) {
    Record r;
    r.t = t[k];
    r.M = M[k];
    r.m = m[k];
    r.Lut = Lut[k];
    r.sup_h = sup_h[k];
    r.dt = k == 0 ? 0.0 : t[k] - t[k - 1];
    s.records.push_back(r);
  }
  return s;
}

}  // namespace

TEST_CASE("monitors of a constant field") {
  const auto g = Grid::rectangle(1, 1, 11, 11);
  const Field u(g, 5.0);
  const auto psi = solve_robin_aux(g, 1.0);
  const auto r = monitors(u, u, 0.3, 0.01, NonlinearitySpec::power(2), &psi);
  CHECK(r.M == 5.0);
  CHECK(r.m == 5.0);
  CHECK(r.Lut == 0.0);
  CHECK(r.grad_sup == 0.0);
  CHECK(r.xnorm_dev <= 1e-14);
  CHECK(r.meanF == 0.0);
  CHECK(r.sup_h == 0.0);
  CHECK(r.mean == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(decay_deviation(r, 5.0) == 0.0);
}

TEST_CASE("monitors of a cosine") {
  const auto g = Grid::interval(1.0, 1001);
  const auto u = sample(g, [](double x, double) { return std::cos(pi * x); });
  const auto r = monitors(u, u, 0.0, 0.0, NonlinearitySpec::zero(), nullptr);
  CHECK(r.M == doctest::Approx(1.0));
  CHECK(r.m == doctest::Approx(-1.0));
  CHECK(std::abs(r.grad_sup - pi) <= 1e-4);
  // Initial-level Lut is the residual |Lap u| for F = 0.
  CHECK(std::abs(r.Lut - pi * pi) <= 1e-3);
  CHECK(r.sup_h == 0.0);
}

TEST_CASE("log-linear fit of a synthetic exponential") {
  std::vector<double> t, dev;
  for (int k = 0; k <= 40; ++k) {
    t.push_back(0.1 * k);
    dev.push_back(3.0 * std::exp(-2.0 * t.back()));
  }
  const auto f = fit_log_linear(t, dev);
  CHECK(std::abs(f.rate - 2.0) <= 1e-10);
  CHECK(std::abs(f.prefactor - 3.0) <= 1e-10);
  CHECK(f.residual <= 1e-12);
  CHECK(f.n_points == 41);

  const std::vector<double> bad{1.0, 0.0};
  CHECK_THROWS_AS(fit_log_linear(std::vector<double>{0, 1}, bad), AnalysisError);
}

TEST_CASE("band selection in the decay fit") {
  TimeSeries s;
  for (int k = 0; k <= 200; ++k) {
    Record r;
    r.t = 0.05 * k;
    const double d = std::exp(-1.5 * r.t);
    r.M = 1.0 + 0.5 * d;
    r.m = 1.0 - 0.25 * d;
    r.grad_sup = 0.5 * d;
    s.records.push_back(r);
  }
  FitBand band;
  band.eps_hi = 1e-1;
  band.eps_lo = 1e-4;
  const auto f = fit_decay(s, 1.0, band);
  CHECK(f.rate == doctest::Approx(1.5).epsilon(1e-10));
  CHECK(f.prefactor == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(f.t1 >= std::log(10.0) / 1.5 - 0.05);
  CHECK(f.t2 <= std::log(1e4) / 1.5 + 0.05);

  band.eps_hi = 1e-1;
  band.eps_lo = 9e-2;
  CHECK_THROWS_AS(fit_decay(s, 1.0, band), AnalysisError);
}

TEST_CASE("estimate_c") {
  SUBCASE("constant datum") {
    auto c = interval_config(41, 0.5, 1e-3);
    c.F = NonlinearitySpec::power(2);
    c.initial.kind = InitialKind::constant;
    c.initial.amplitude = 0.7;
    const auto r = run(c);
    const auto est = estimate_c(r.series, r.u0_mean, pi * pi, CMethod::tail_extrapolate);
    CHECK(est.c == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(std::abs(est.integral) <= 1e-20);
  }
  SUBCASE("shift invariance") {
    auto c = interval_config(81, 1.0, 1e-3);
    c.F = NonlinearitySpec::power(2);
    c.initial.amplitude = 0.4;
    const auto g = c.grid.build();
    const auto u0 = c.initial.sample(g);
    const double lam = discrete_lambda(g);
    const auto a = run(c, u0);
    const auto b = run(c, u0 + Field(g, 1.0));
    const auto ca = estimate_c(a.series, a.u0_mean, lam, CMethod::tail_extrapolate);
    const auto cb = estimate_c(b.series, b.u0_mean, lam, CMethod::tail_extrapolate);
    CHECK(std::abs(cb.c - ca.c - 1.0) <= 1e-10);
  }
  SUBCASE("heat flow keeps the mean") {
    auto c = interval_config(81, 0.5, 1e-3);
    c.F = NonlinearitySpec::zero();
    c.initial.offset = 0.25;
    const auto r = run(c);
    const auto est = estimate_c(r.series, r.u0_mean, pi * pi, CMethod::tail_extrapolate);
    CHECK(est.c == doctest::Approx(r.u0_mean).epsilon(1e-14));
    CHECK(std::abs(est.c - 0.25) <= 1e-12);
    CHECK(std::abs(r.final_state.u.mean() - est.c) <= 1e-10);
  }
  SUBCASE("tail correction moves the truncated estimate toward the terminal mean") {
    auto c = interval_config(81, 0.3, 1e-3);
    c.F = NonlinearitySpec::power(2);
    c.initial.amplitude = 0.5;
    const auto r = run(c);
    const double lam = discrete_lambda(r.grid);
    const auto cut = estimate_c(r.series, r.u0_mean, lam, CMethod::truncate);
    const auto ext = estimate_c(r.series, r.u0_mean, lam, CMethod::tail_extrapolate);
    CHECK(cut.tail == 0.0);
    CHECK(ext.tail > 0.0);
    CHECK(ext.c > cut.c);
  }
}

TEST_CASE("comparison principle") {
  auto c = interval_config(81, 0.3, 1e-3);
  c.F = NonlinearitySpec::power(2);
  c.keep_snapshots = true;
  const auto g = c.grid.build();
  const auto u0 = sample(g, [](double x, double) { return 0.5 * std::cos(pi * x) + 0.2 * std::cos(2 * pi * x); });

  SUBCASE("shifted datum") {
    const auto a = run(c, u0);
    const auto b = run(c, u0 + Field(g, 0.1));
    const auto res = comparison_check(a.series, b.series, a.snapshots, b.snapshots, 1e-8);
    CHECK(res.pass);
    CHECK(std::abs(res.min_gap - 0.1) <= 1e-8);
  }
  SUBCASE("truncated datum") {
    Field low = u0;
    for (auto& v : low.data()) v = std::min(v, 0.0);
    const auto a = run(c, low);
    const auto b = run(c, u0);
    const auto res = comparison_check(a.series, b.series, a.snapshots, b.snapshots, 1e-8);
    CHECK(res.pass);
    CHECK(res.min_gap >= -1e-8);
    // The reversed order is violated.
    CHECK_FALSE(comparison_check(b.series, a.series, b.snapshots, a.snapshots, 1e-8).pass);
  }
}

TEST_CASE("Bernstein quantity on a linear profile") {
  const auto g = Grid::interval(1.0, 201);
  const auto psi = solve_robin_aux(g, 1.0);
  const auto u = sample(g, [](double x, double) { return 2.0 * x; });
  // Interior gradient 2, closed at the ends; psi peaks at 5/8 in the middle.
  CHECK(std::abs(bernstein_h(u, psi) - 4.0 * 0.625) <= 4e-3);
}

TEST_CASE("Bernstein check on synthetic series") {
  const auto ok = synthetic({0, 0.05, 0.1, 0.2}, {1, 1, 1, 1}, {0, 0, 0, 0}, {0, 0, 0, 0}, {5, 2, 2.05, 1});
  const auto v = bernstein_check(ok, 0.05);
  CHECK(v.pass);
  CHECK(v.measured == doctest::Approx(1.025));
  const auto bad = synthetic({0, 0.05, 0.1}, {1, 1, 1}, {0, 0, 0}, {0, 0, 0}, {5, 2, 2.2});
  CHECK_FALSE(bernstein_check(bad, 0.05).pass);
  CHECK(bernstein_check(bad, 0.05, 2.2).pass);
}

TEST_CASE("deviation bound from the centred norm") {
  auto c = interval_config(81, 0.5, 1e-3);
  c.F = NonlinearitySpec::power(2);
  c.initial.amplitude = 0.6;
  c.initial.modes = {2, 1};
  const auto r = run(c);
  const double lam = discrete_lambda(r.grid);
  const double cc = estimate_c(r.series, r.u0_mean, lam, CMethod::tail_extrapolate).c;
  for (const auto& rec : r.series.records) {
    const double lhs = rec.xnorm_dev + std::abs(rec.mean - cc);
    CHECK(lhs >= decay_deviation(rec, cc) - 1e-14);
  }
  // Symmetric about its mean: the bound is an identity for every c.
  Record sym;
  sym.M = 1.3;
  sym.m = 0.7;
  sym.mean = 1.0;
  sym.grad_sup = 0.2;
  sym.xnorm_dev = 0.3 + 0.2;
  for (double cs : {0.0, 0.9, 1.0, 1.2, 5.0})
    CHECK(sym.xnorm_dev + std::abs(sym.mean - cs) == doctest::Approx(decay_deviation(sym, cs)).epsilon(1e-14));
}

TEST_CASE("Liapunov checks") {
  auto c = interval_config(81, 0.5, 1e-3);
  c.F = NonlinearitySpec::power(2);
  c.initial.amplitude = 0.6;
  const auto r = run(c);
  for (const auto& v : liapunov_checks(r.series, r.u0_sup, c.dt_max, c.solver_tol)) {
    CAPTURE(v.name);
    CAPTURE(v.measured);
    CHECK(v.pass);
  }

  const auto up = synthetic({0, 0.1, 0.2}, {1, 1.01, 1.0}, {0, 0, 0}, {0, 1, 1}, {0, 0, 0});
  const auto vs = liapunov_checks(up, 1.0, 1e-3);
  REQUIRE(vs.size() == 4);
  CHECK(vs[0].name == "M_nonincreasing");
  CHECK_FALSE(vs[0].pass);
  CHECK_FALSE(vs[2].pass);
  CHECK(vs[1].pass);

  const auto lut_up = synthetic({0, 0.1, 0.2, 0.3}, {1, 1, 1, 1}, {0, 0, 0, 0}, {0, 1.0, 0.5, 0.6}, {0, 0, 0, 0});
  CHECK_FALSE(liapunov_checks(lut_up, 1.0, 1e-3)[3].pass);
}

TEST_CASE("decay prefactor ignores roundoff records") {
  TimeSeries s;
  for (int k = 0; k <= 10; ++k) {
    Record r;
    r.t = k;
    r.M = 1.0 + (k < 8 ? 0.5 * std::exp(-2.0 * k) : 1e-16);
    r.m = 1.0;
    s.records.push_back(r);
  }
  CHECK(decay_prefactor(s, 1.0, 2.0, 1e-12) == doctest::Approx(0.5));
}
