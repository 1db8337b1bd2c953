// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "hjflow/config.hpp"
#include "hjflow/experiment.hpp"
#include "hjflow/operators.hpp"
#include "hjflow/spectral.hpp"

using namespace hjflow;
using std::numbers::pi;

namespace {

struct Line {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

ExperimentReport load_and_run(const char* name) {
  const auto m = load_config(std::filesystem::path(HJFLOW_CONFIG_DIR) / name);
  return run_experiment(m, false);
}

const Verdict* find(const std::vector<Verdict>& vs, const std::string& name) {
  for (const auto& v : vs)
    if (v.name == name) return &v;
  return nullptr;
}

bool liapunov_ok(const RunOutcome& o, std::string& why) {
  if (!o.error.empty()) {
    why += " " + o.config.id + ":error";
    return false;
  }
  const double tol = o.result.grid->dim() == 1 ? 0.0 : o.config.solver_tol;
  bool ok = true;
  for (const auto& v : liapunov_checks(o.result.series, o.result.u0_sup, o.config.dt_max, tol)) {
    if (!v.pass) {
      ok = false;
      why += fmt(" %s:%s=%.3g", o.config.id.c_str(), v.name.c_str(), v.measured);
    }
  }
  return ok;
}

// Cached runs shared by several criteria.
struct Runs {
  ExperimentReport heat, colehopf, p3, lshape;
};

Line heat_rate(const Runs& r) {
  const auto& o = r.heat.runs.front();
  if (!o.error.empty() || !o.fit) return {false, "no fit: " + o.error + o.fit_error};
  const double lam = o.lambda;
  const double lam_err = std::abs(lam - pi * pi) / (pi * pi);
  const double rate_err = std::abs(o.fit->rate - lam) / lam;
  return {rate_err <= 5e-3 && lam_err <= 1e-3,
          fmt("rate %.6f lambda_h %.6f rel_err %.2e (<= 5e-3), |lambda_h - pi^2|/pi^2 %.2e (<= 1e-3)", o.fit->rate,
              lam, rate_err, lam_err)};
}

Line colehopf(const Runs& r) {
  const auto& o = r.colehopf.runs.front();
  if (!o.error.empty()) return {false, o.error};
  // w = e^u solves the heat equation, so its mean is conserved and u -> log mean(e^{u0}).
  const Field u0 = o.config.initial.sample(o.result.grid);
  Field w(o.result.grid);
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = std::exp(u0[k]);
  const double c_exact = std::log(w.mean());
  const double c_err = std::abs(o.c.c - c_exact);
  double dev = 0;
  for (double v : o.result.final_state.u.values()) dev = std::max(dev, std::abs(v - c_exact));
  const bool done = o.result.status == RunStatus::completed;
  return {done && c_err <= 1e-3 && dev <= 2e-3,
          fmt("c %.8f exact %.8f err %.2e (<= 1e-3), sup|u(T) - c| %.2e (<= 2e-3)", o.c.c, c_exact, c_err, dev)};
}

Line p3_rate(const Runs& r) {
  const auto& o = r.p3.runs.front();
  if (!o.error.empty()) return {false, o.error};
  const bool done = o.result.status == RunStatus::completed;
  if (!o.fit) return {false, "no fit: " + o.fit_error};
  const double e = o.rate_rel_err();
  return {done && e <= 0.10, fmt("status %s rate %.5f lambda_h %.5f rel_err %.2e (<= 0.10)",
                                 to_string(o.result.status).c_str(), o.fit->rate, o.lambda, e)};
}

Line liapunov(const Runs& r) {
  std::string why;
  bool ok = true;
  for (const ExperimentReport* rep : {&r.heat, &r.colehopf, &r.p3, &r.lshape})
    for (const auto& o : rep->runs) ok = liapunov_ok(o, why) && ok;
  return {ok, ok ? "M, m, sup bound and Lut monotone on heat, Cole-Hopf, p=3 and L-shape runs" : why};
}

Line comparison() {
  RunConfig c;
  c.grid.kind = GridKind::interval;
  c.grid.n = 201;
  c.F = NonlinearitySpec::power(3.0);
  c.dt_max = 1e-4;
  c.t_end = 0.5;
  c.save_stride = 50;
  c.keep_snapshots = true;
  const auto g = c.grid.build();
  Field u0(g);
  for (std::size_t k = 0; k < u0.size(); ++k) {
    const double x = g->position(k)[0];
    u0[k] = 0.3 * std::cos(pi * x) + 0.1 * std::cos(3 * pi * x);
  }
  Field shifted = u0 + Field(g, 0.1);
  Field clipped = u0;
  for (auto& v : clipped.data()) v = std::min(v, 0.0);
  const auto base = run(c, u0);
  const auto above = run(c, shifted);
  const auto below = run(c, clipped);
  const auto a = comparison_check(base.series, above.series, base.snapshots, above.snapshots, 1e-8);
  const auto b = comparison_check(below.series, base.series, below.snapshots, base.snapshots, 1e-8);
  return {a.pass && b.pass, fmt("max(u - (u+0.1 run)) %.2e, max(min(u0,0) run - u) %.2e (<= 1e-8)",
                                a.max_violation, b.max_violation)};
}

Line lshape(const Runs& r) {
  const auto& o = r.lshape.runs.front();
  if (!o.error.empty()) return {false, o.error};
  const bool done = o.result.status == RunStatus::completed;
  const Verdict bern = bernstein_check(o.result.series, 0.05);
  if (!o.fit) return {false, "no fit: " + o.fit_error};
  const double e = o.rate_rel_err();
  return {done && bern.pass && e <= 0.15,
          fmt("status %s bernstein ratio %.4f (<= 1.05) rate %.5f lambda_h %.5f rel_err %.2e (<= 0.15)",
              to_string(o.result.status).c_str(), bern.measured, o.fit->rate, o.lambda, e)};
}

Line semigroup() {
  const auto rep = load_and_run("semigroup.ini");
  const Verdict* sup = find(rep.verdicts, "sup_contraction");
  const Verdict* eig = find(rep.verdicts, "eigenfunction_c2");
  const Verdict* r1 = find(rep.verdicts, "refinement_c1");
  const Verdict* r2 = find(rep.verdicts, "refinement_c2");
  if (!sup || !eig || !r1 || !r2 || !rep.semigroup_fine) return {false, "semigroup report incomplete"};
  const double max_sup = std::max(rep.semigroup->max_sup_ratio, rep.semigroup_fine->max_sup_ratio);

  // Rough data: nodal +-1 noise at t = 1e-4 on the same pair of grids.
  const double t_noise[] = {1e-4};
  auto noise_report = [&](int n) {
    const auto g = Grid::interval(1.0, n);
    std::mt19937_64 rng(2024);
    std::bernoulli_distribution coin(0.5);
    std::vector<Field> fs;
    for (int i = 0; i < 20; ++i) {
      Field f(g);
      for (auto& v : f.data()) v = coin(rng) ? 1.0 : -1.0;
      fs.push_back(f);
    }
    return semigroup_estimate_report(g, fs, t_noise);
  };
  const auto nc = noise_report(201), nf = noise_report(401);
  const auto nr = semigroup_refinement_check(nc, nf);

  const bool ok = max_sup <= 1 + 1e-10 && eig->pass && r1->pass && r2->pass && nc.pass && nf.pass &&
                  nr.c1_ratio < 2.0;
  return {ok, fmt("sup ratio %.15f (<= 1+1e-10), C1 %.4f/%.4f ratio %.4f, C2 ratio %.4f (< 2), "
                  "eigen C2 %.12f (1 +- 1e-6), noise C1 ratio %.4f (< 2)",
                  max_sup, rep.semigroup->c1_hat, rep.semigroup_fine->c1_hat, r1->measured, r2->measured,
                  eig->measured, nr.c1_ratio)};
}

Line picard() {
  const auto rep = load_and_run("picard.ini");
  const Verdict* agree = find(rep.verdicts, "picard_agreement");
  if (!rep.picard || !agree) return {false, "Picard iteration failed to contract"};
  const auto& o = rep.runs.front();
  const double d = sup_distance(rep.picard->u_end, o.result.final_state.u);
  const bool ok = d <= 5e-3 && rep.picard->contracted && rep.picard->iterations <= 20;
  return {ok, fmt("sup|u_mild - u_imex| %.2e (<= 5e-3), %d iterations (<= 20)", d, rep.picard->iterations)};
}

Line sweep() {
  const auto rep = load_and_run("sweep.ini");
  double top = 0, bottom = INFINITY;
  bool done = true;
  for (const auto& o : rep.runs) {
    done = done && o.error.empty() && o.result.status == RunStatus::completed;
    top = std::max(top, o.prefactor);
    bottom = std::min(bottom, o.prefactor);
  }
  const double spread = bottom > 0 ? top / bottom : INFINITY;
  return {done && spread <= 100.0,
          fmt("%zu runs, prefactor range [%.4g, %.4g], spread %.2f (<= 100)", rep.runs.size(), bottom, top, spread)};
}

Line operator_algebra() {
  const Rect ls[] = {{0, 0, 1, 1}, {1, 0, 2, 0.5}};
  const GridPtr grids[] = {Grid::interval(1.0, 101), Grid::rectangle(2, 1, 41, 21), Grid::union_of_rectangles(ls, 0.05)};
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> d(-1, 1);
  double worst_sym = 0, worst_cons = 0, worst_const = 0, max_form = -INFINITY;
  for (const auto& g : grids) {
    for (int trial = 0; trial < 5; ++trial) {
      Field u(g), v(g);
      for (auto& x : u.data()) x = d(rng);
      for (auto& x : v.data()) x = d(rng);
      const auto lu = laplacian_apply(*g, u);
      const auto lv = laplacian_apply(*g, v);
      const double scale = lu.sup_norm() * v.sup_norm() * g->measure();
      worst_sym = std::max(worst_sym, std::abs(inner(lu, v) - inner(u, lv)) / scale);
      worst_cons = std::max(worst_cons, std::abs(inner(Field(g, 1.0), lu)) / (lu.sup_norm() * g->measure()));
      max_form = std::max(max_form, inner(lu, u));
    }
    worst_const = std::max(worst_const, laplacian_apply(*g, Field(g, 1.0)).sup_norm());
  }
  const bool ok = worst_sym <= 1e-12 && worst_cons <= 1e-12 && worst_const <= 1e-12 && max_form <= 0;
  return {ok, fmt("symmetry %.1e, conservation %.1e, constants %.1e (<= 1e-12), max <Lap u, u> %.3g (<= 0)",
                  worst_sym, worst_cons, worst_const, max_form)};
}

}  // namespace

int main() {
  Runs runs;
  std::vector<std::function<void()>> jobs = {
      [&] { runs.heat = load_and_run("heat_oracle.ini"); },
      [&] { runs.colehopf = load_and_run("colehopf.ini"); },
      [&] { runs.p3 = load_and_run("p3_rate.ini"); },
      [&] { runs.lshape = load_and_run("lshape.ini"); },
  };
  parallel_for(jobs.size(), [&](std::size_t i) { jobs[i](); });

  const std::pair<const char*, std::function<Line()>> criteria[] = {
      {"heat_decay_rate", [&] { return heat_rate(runs); }},
      {"colehopf_limit", [&] { return colehopf(runs); }},
      {"power3_decay_rate", [&] { return p3_rate(runs); }},
      {"liapunov_monotonicity", [&] { return liapunov(runs); }},
      {"comparison_principle", comparison},
      {"lshape_bernstein_and_rate", [&] { return lshape(runs); }},
      {"semigroup_estimates", semigroup},
      {"picard_crosscheck", picard},
      {"uniform_prefactor", sweep},
      {"operator_algebra", operator_algebra},
  };
  int failures = 0;
  int index = 1;
  for (const auto& [name, fn] : criteria) {
    Line l;
    try {
      l = fn();
    } catch (const std::exception& e) {
      l = {false, std::string("exception: ") + e.what()};
    }
    if (!l.pass) ++failures;
    std::printf("%s  %2d %-26s %s\n", l.pass ? "PASS" : "FAIL", index++, name, l.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", index - 1 - failures, index - 1);
  return failures == 0 ? 0 : 1;
}
