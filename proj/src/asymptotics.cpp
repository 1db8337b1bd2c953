#include "hjflow/asymptotics.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>

#include "hjflow/operators.hpp"

namespace hjflow {

Record monitors(const Field& u_prev, const Field& u, double t, double dt, const NonlinearitySpec& spec,
                const Field* psi) {
  const Grid& grid = u.grid();
  Record r;
  r.t = t;
  r.dt = dt;
  r.M = u.max();
  r.m = u.min();
  r.mean = u.mean();
  const VectorField g = gradient(grid, u);
  r.grad_sup = g.sup_norm();
  r.xnorm_dev = std::max(std::abs(r.M - r.mean), std::abs(r.m - r.mean)) + r.grad_sup;
  const Field f = eval_F(spec, g);
  r.meanF = f.mean();
  if (dt > 0) {
    r.Lut = sup_distance(u, u_prev) / dt;
  } else {
    const Field lap = laplacian_apply(grid, u);
    double s = 0;
    for (std::size_t k = 0; k < u.size(); ++k) s = std::max(s, std::abs(lap[k] + f[k]));
    r.Lut = s;
  }
  if (psi) {
    require_same_grid(grid, psi->grid());
    double s = 0;
    for (std::size_t k = 0; k < u.size(); ++k) {
      const double gn = g.norm_at(k);
      s = std::max(s, (*psi)[k] * gn * gn);
    }
    r.sup_h = s;
  }
  return r;
}

double bernstein_h(const Field& u, const Field& psi) {
  require_same_grid(u.grid(), psi.grid());
  const VectorField g = gradient(u.grid(), u);
  double s = 0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double gn = g.norm_at(k);
    s = std::max(s, psi[k] * gn * gn);
  }
  return s;
}

DecayFit fit_log_linear(std::span<const double> t, std::span<const double> dev) {
  if (t.size() != dev.size()) throw std::invalid_argument("fit: sample lengths differ");
  const std::size_t n = t.size();
  if (n < 2) throw AnalysisError("fit: too few points");
  double st = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(dev[i] > 0)) throw AnalysisError("fit: deviation must be positive");
    st += t[i];
    sy += std::log(dev[i]);
  }
  const double tm = st / n, ym = sy / n;
  double stt = 0, sty = 0;
  for (std::size_t i = 0; i < n; ++i) {
    stt += (t[i] - tm) * (t[i] - tm);
    sty += (t[i] - tm) * (std::log(dev[i]) - ym);
  }
  if (!(stt > 0)) throw AnalysisError("fit: degenerate time window");
  const double slope = sty / stt;
  const double icpt = ym - slope * tm;
  double rss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = std::log(dev[i]) - (icpt + slope * t[i]);
    rss += e * e;
  }
  DecayFit fit;
  fit.rate = -slope;
  fit.prefactor = std::exp(icpt);
  fit.t1 = t.front();
  fit.t2 = t.back();
  fit.residual = std::sqrt(rss / n);
  fit.n_points = static_cast<int>(n);
  return fit;
}

namespace {

double trapezoid_meanF(const std::vector<Record>& rs) {
  double s = 0;
  for (std::size_t k = 1; k < rs.size(); ++k) s += 0.5 * (rs[k].t - rs[k - 1].t) * (rs[k].meanF + rs[k - 1].meanF);
  return s;
}

// Remainder int_T^inf meanF ~ meanF(T) / rate.
void tail_of(const std::vector<Record>& rs, double lambda, double p_default, double& tail, double& rate) {
  rate = p_default * lambda;
  tail = 0;
  if (rs.empty()) return;
  const double fend = rs.back().meanF;
  if (fend == 0) return;
  const double a = std::abs(fend);
  std::vector<double> ts, vs;
  for (std::size_t k = rs.size(); k-- > 0;) {
    const double v = std::abs(rs[k].meanF);
    if (!(v > 0) || v > 10.0 * a) break;
    ts.push_back(rs[k].t);
    vs.push_back(v);
  }
  if (ts.size() >= 8 && ts.front() > ts.back()) {
    std::reverse(ts.begin(), ts.end());
    std::reverse(vs.begin(), vs.end());
    try {
      const DecayFit f = fit_log_linear(ts, vs);
      if (std::isfinite(f.rate) && f.rate > 0) rate = f.rate;
    } catch (const AnalysisError&) {
    }
  }
  if (rate > 0) tail = fend / rate;
}

}  // namespace

CEstimate estimate_c(const TimeSeries& series, double u0_mean, double lambda, CMethod method, double p_default) {
  CEstimate est;
  est.integral = trapezoid_meanF(series.records);
  if (method == CMethod::tail_extrapolate) tail_of(series.records, lambda, p_default, est.tail, est.tail_rate);
  est.c = u0_mean + est.integral + est.tail;
  return est;
}

double terminal_c(const TimeSeries& series, double lambda, double p_default) {
  if (series.records.empty()) throw AnalysisError("empty series");
  double tail = 0, rate = 0;
  tail_of(series.records, lambda, p_default, tail, rate);
  return series.records.back().mean + tail;
}

double decay_deviation(const Record& r, double c) {
  return std::max(std::abs(r.M - c), std::abs(r.m - c)) + r.grad_sup;
}

double noise_floor(const TimeSeries& series, double c) {
  double s = std::max(1.0, std::abs(c));
  for (const auto& r : series.records) s = std::max({s, std::abs(r.M), std::abs(r.m)});
  return DBL_EPSILON * s;
}

DecayFit fit_decay(const TimeSeries& series, double c, const FitBand& band) {
  const auto& rs = series.records;
  if (rs.empty()) throw AnalysisError("fit: empty series");
  const double floor = noise_floor(series, c);
  const double hi = band.eps_hi.value_or(1e-2 * decay_deviation(rs.front(), c));
  const double lo = band.eps_lo.value_or(1e3 * floor);
  double dmax = 0;
  for (const auto& r : rs) dmax = std::max(dmax, decay_deviation(r, c));
  if (dmax < lo) throw AnalysisError("fit: deviation below noise floor everywhere");

  // First contiguous stretch inside [lo, hi].
  std::vector<double> ts, ds;
  bool entered = false;
  for (const auto& r : rs) {
    const double d = decay_deviation(r, c);
    if (!entered) {
      if (d <= hi && d >= lo && r.t > 0) entered = true;
      else continue;
    }
    if (d < lo) break;
    if (d <= hi) {
      ts.push_back(r.t);
      ds.push_back(d);
    }
  }
  if (ts.size() < 8) throw AnalysisError("fit: too few points in band");
  DecayFit fit = fit_log_linear(ts, ds);
  fit.c_limit = c;
  return fit;
}

double decay_prefactor(const TimeSeries& series, double c, double lambda, double floor) {
  double s = 0;
  for (const auto& r : series.records) {
    const double d = decay_deviation(r, c);
    if (d >= floor && d > 0) s = std::max(s, std::exp(lambda * r.t) * d);
  }
  return s;
}

Verdict bernstein_check(const TimeSeries& series, double t0, double plateau) {
  Verdict v{"bernstein", false, 0, 1.05};
  const auto& rs = series.records;
  const auto first = std::find_if(rs.begin(), rs.end(), [&](const Record& r) { return r.t >= t0 - 1e-12; });
  if (first == rs.end()) {
    v.measured = std::numeric_limits<double>::quiet_NaN();
    return v;
  }
  const double ref = std::max(first->sup_h, plateau);
  double top = 0;
  for (auto it = first; it != rs.end(); ++it) top = std::max(top, it->sup_h);
  if (ref > 0) v.measured = top / ref;
  else v.measured = top > 0 ? INFINITY : 0.0;
  v.pass = v.measured <= v.threshold;
  return v;
}

std::vector<Verdict> liapunov_checks(const TimeSeries& series, double u0_sup, double dt_max, double solver_tol) {
  const auto& rs = series.records;
  const double tol = 1e-8 * (1.0 + u0_sup);
  Verdict vM{"M_nonincreasing", true, 0, tol};
  Verdict vm{"m_nondecreasing", true, 0, tol};
  Verdict vb{"sup_bound", true, 0, tol};
  for (std::size_t k = 0; k < rs.size(); ++k) {
    vb.measured = std::max(vb.measured, std::max(std::abs(rs[k].M), std::abs(rs[k].m)) - u0_sup);
    if (k == 0) continue;
    vM.measured = std::max(vM.measured, rs[k].M - rs[k - 1].M);
    vm.measured = std::max(vm.measured, rs[k - 1].m - rs[k].m);
  }
  vM.pass = vM.measured <= tol;
  vm.pass = vm.measured <= tol;
  vb.pass = vb.measured <= tol;

  // The difference quotient cannot resolve changes below roundoff of u and
  // the solver residual, divided by dt.
  Verdict vL{"Lut_nonincreasing", true, 0, 1.05};
  double run_min = INFINITY;
  for (const auto& r : rs) {
    if (r.t < 10.0 * dt_max || !(r.dt > 0)) continue;
    const double usup = std::max(std::abs(r.M), std::abs(r.m));
    const double resolution = (4.0 * DBL_EPSILON * usup + 2.0 * solver_tol * (1.0 + usup)) / r.dt;
    if (std::isfinite(run_min)) {
      const double excess = std::max(0.0, r.Lut - resolution);
      const double ratio = run_min > 0 ? excess / run_min : (excess > 0 ? INFINITY : 0.0);
      vL.measured = std::max(vL.measured, ratio);
    }
    run_min = std::min(run_min, r.Lut);
  }
  vL.pass = vL.measured <= vL.threshold;
  return {vM, vm, vb, vL};
}

ComparisonResult comparison_check(const TimeSeries& a, const TimeSeries& b, std::span<const Field> snaps_a,
                                  std::span<const Field> snaps_b, double tol) {
  if (snaps_a.size() != a.records.size() || snaps_b.size() != b.records.size())
    throw std::invalid_argument("comparison: one snapshot per record required");
  ComparisonResult res;
  res.max_violation = -INFINITY;
  res.min_gap = INFINITY;
  std::size_t j = 0, matched = 0;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const double t = a.records[i].t;
    while (j < b.records.size() && b.records[j].t < t - 1e-12 * (1.0 + t)) ++j;
    if (j == b.records.size()) break;
    if (std::abs(b.records[j].t - t) > 1e-12 * (1.0 + t)) continue;
    const Field& ua = snaps_a[i];
    const Field& ub = snaps_b[j];
    require_same_grid(ua.grid(), ub.grid());
    for (std::size_t k = 0; k < ua.size(); ++k) {
      res.max_violation = std::max(res.max_violation, ua[k] - ub[k]);
      res.min_gap = std::min(res.min_gap, ub[k] - ua[k]);
    }
    ++matched;
  }
  if (matched == 0) throw std::invalid_argument("comparison: runs share no saved time");
  res.pass = res.max_violation <= tol;
  return res;
}

}  // namespace hjflow
