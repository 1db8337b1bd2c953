#include "hjflow/nonlinearity.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace hjflow {

std::string to_string(NonlinearityKind kind) {
  switch (kind) {
    case NonlinearityKind::zero: return "zero";
    case NonlinearityKind::power: return "power";
    case NonlinearityKind::exponential: return "exponential";
    case NonlinearityKind::table: return "table";
  }
  return "?";
}

NonlinearityKind nonlinearity_kind_from_string(const std::string& name) {
  if (name == "zero" || name == "none" || name == "heat") return NonlinearityKind::zero;
  if (name == "power") return NonlinearityKind::power;
  if (name == "exponential" || name == "exp") return NonlinearityKind::exponential;
  if (name == "table" || name == "custom-table") return NonlinearityKind::table;
  throw std::invalid_argument("unknown nonlinearity kind '" + name + "'");
}

NonlinearitySpec NonlinearitySpec::zero() {
  NonlinearitySpec s;
  s.kind = NonlinearityKind::zero;
  return s;
}

NonlinearitySpec NonlinearitySpec::power(double p) {
  NonlinearitySpec s;
  s.kind = NonlinearityKind::power;
  s.p = p;
  return s;
}

NonlinearitySpec NonlinearitySpec::exponential(double q) {
  NonlinearitySpec s;
  s.kind = NonlinearityKind::exponential;
  s.q = q;
  // exp(r^q) - 1 <= r^p near 0 requires p < q.
  s.p = 0.5 * (1.0 + q);
  s.delta = 0.1;
  return s;
}

void NonlinearitySpec::validate() const {
  if (!(p > 1)) throw std::invalid_argument("F.p: p must exceed 1");
  if (kind == NonlinearityKind::exponential && !(q > 1)) throw std::invalid_argument("F.q: q must exceed 1");
  if (!(delta > 0)) throw std::invalid_argument("F.delta: delta must be positive");
  if (c0 && !(*c0 > 0)) throw std::invalid_argument("F.c0: c0 must be positive");
  if (c0 && !(q > 1)) throw std::invalid_argument("F.q: q must exceed 1");
  if (sign != 1 && sign != -1) throw std::invalid_argument("F.sign: sign must be +1 or -1");
  if (kind == NonlinearityKind::table) {
    if (table_radii.empty() || table_radii.size() != table_values.size())
      throw std::invalid_argument("F.table: needs matching, nonempty radius/value lists");
    double prev = 0;
    for (std::size_t i = 0; i < table_radii.size(); ++i) {
      if (!(table_radii[i] > prev)) throw std::invalid_argument("F.table: radii must be positive and increasing");
      if (!std::isfinite(table_values[i])) throw std::invalid_argument("F.table: values must be finite");
      prev = table_radii[i];
    }
  }
}

namespace {

// Segment of the table containing r; segment 0 starts at the origin.
std::size_t table_segment(const std::vector<double>& radii, double r) {
  const auto it = std::lower_bound(radii.begin(), radii.end(), r);
  const auto k = static_cast<std::size_t>(it - radii.begin());
  return std::min(k, radii.size() - 1);
}

}  // namespace

double NonlinearitySpec::profile(double r) const {
  switch (kind) {
    case NonlinearityKind::zero: return 0.0;
    case NonlinearityKind::power: return r == 0 ? 0.0 : std::pow(r, p);
    case NonlinearityKind::exponential: return r == 0 ? 0.0 : std::expm1(std::pow(r, q));
    case NonlinearityKind::table: {
      if (r == 0) return 0.0;
      const auto k = table_segment(table_radii, r);
      const double r0 = k == 0 ? 0.0 : table_radii[k - 1];
      const double f0 = k == 0 ? 0.0 : table_values[k - 1];
      return f0 + profile_slope(r) * (r - r0);
    }
  }
  return 0.0;
}

double NonlinearitySpec::profile_slope(double r) const {
  switch (kind) {
    case NonlinearityKind::zero: return 0.0;
    case NonlinearityKind::power: return r == 0 ? 0.0 : p * std::pow(r, p - 1);
    case NonlinearityKind::exponential: {
      if (r == 0) return 0.0;
      const double rq = std::pow(r, q);
      return std::exp(rq) * q * rq / r;
    }
    case NonlinearityKind::table: {
      const auto k = table_segment(table_radii, r);
      const double r0 = k == 0 ? 0.0 : table_radii[k - 1];
      const double f0 = k == 0 ? 0.0 : table_values[k - 1];
      return (table_values[k] - f0) / (table_radii[k] - r0);
    }
  }
  return 0.0;
}

double NonlinearitySpec::value(std::span<const double> z) const {
  double r2 = 0;
  for (double c : z) r2 += c * c;
  return sign * profile(std::sqrt(r2));
}

void NonlinearitySpec::gradient(std::span<const double> z, std::span<double> out) const {
  double r2 = 0;
  for (double c : z) r2 += c * c;
  const double r = std::sqrt(r2);
  if (r == 0 || kind == NonlinearityKind::zero) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  const double scale = sign * profile_slope(r) / r;
  for (std::size_t a = 0; a < z.size(); ++a) out[a] = scale * z[a];
}

Field eval_F(const NonlinearitySpec& spec, const VectorField& g) {
  Field out(g.grid_ptr());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const auto z = g.at(k);
    for (double c : z)
      if (!std::isfinite(c)) throw OverflowError("non-finite gradient at node " + std::to_string(k), k);
    const double v = spec.value(z);
    if (!std::isfinite(v)) throw OverflowError("F overflows at node " + std::to_string(k), k);
    out[k] = v;
  }
  return out;
}

VectorField eval_gradF(const NonlinearitySpec& spec, const VectorField& g) {
  VectorField out(g.grid_ptr());
  for (std::size_t k = 0; k < g.size(); ++k) {
    spec.gradient(g.at(k), out.at(k));
    for (double c : out.at(k))
      if (!std::isfinite(c)) throw OverflowError("grad F overflows at node " + std::to_string(k), k);
  }
  return out;
}

double sup_gradF(const NonlinearitySpec& spec, const VectorField& g) {
  double m = 0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double s = std::abs(spec.profile_slope(g.norm_at(k)));
    if (!std::isfinite(s)) throw OverflowError("grad F overflows at node " + std::to_string(k), k);
    m = std::max(m, s);
  }
  return m;
}

std::vector<double> default_shell_radii(const NonlinearitySpec& spec, double r_max, int count) {
  const double r_min = spec.delta / 10.0;
  std::vector<double> radii(count);
  const double ratio = std::pow(r_max / r_min, 1.0 / (count - 1));
  for (int i = 0; i < count; ++i) radii[i] = r_min * std::pow(ratio, i);
  radii.back() = r_max;
  return radii;
}

AssumptionReport validate_assumptions(const NonlinearitySpec& spec, std::span<const double> shell_radii,
                                      int directions) {
  AssumptionReport rep;
  std::vector<std::array<double, 2>> dirs(directions);
  for (int k = 0; k < directions; ++k) {
    const double th = 2.0 * std::numbers::pi * k / directions;
    dirs[k] = {std::cos(th), std::sin(th)};
  }

  // Small-gradient bound on the radii inside the delta ball, plus a few
  // extra radii below the smallest shell.
  std::vector<double> inner;
  for (double r : shell_radii)
    if (r <= spec.delta) inner.push_back(r);
  for (int i = 1; i <= 8; ++i) inner.push_back(spec.delta * std::pow(0.5, i));
  inner.push_back(spec.delta);
  rep.small_gradient_ratio = 0;
  for (double r : inner) {
    for (const auto& d : dirs) {
      const double z[2] = {r * d[0], r * d[1]};
      rep.small_gradient_ratio = std::max(rep.small_gradient_ratio, std::abs(spec.value(z)) / std::pow(r, spec.p));
    }
  }
  rep.small_gradient_bound = rep.small_gradient_ratio <= 1.0 + 1e-12;

  for (double r : shell_radii) {
    double smin = INFINITY;
    for (const auto& d : dirs) {
      const double z[2] = {r * d[0], r * d[1]};
      double gz[2];
      spec.gradient(z, gz);
      const double gnorm = std::hypot(gz[0], gz[1]);
      smin = std::min(smin, std::abs(spec.value(z)) / (r * std::sqrt(1.0 + gnorm)));
    }
    rep.growth_values.push_back(smin);
  }
  const auto& s = rep.growth_values;
  bool ok = s.size() >= 2 && std::all_of(s.begin(), s.end(), [](double v) { return std::isfinite(v); });
  if (ok) {
    for (std::size_t i = std::max<std::size_t>(1, s.size() / 2); i < s.size(); ++i) ok = ok && s[i] > s[i - 1];
    ok = ok && s.back() > 10.0 * s.front();
  }
  rep.growth_surrogate = ok;

  rep.lower_bound_claimed = spec.c0.has_value();
  if (rep.lower_bound_claimed) {
    double margin = INFINITY;
    std::vector<double> radii(shell_radii.begin(), shell_radii.end());
    radii.insert(radii.end(), inner.begin(), inner.end());
    for (double r : radii) {
      for (const auto& d : dirs) {
        const double z[2] = {r * d[0], r * d[1]};
        margin = std::min(margin, spec.sign * spec.value(z) - *spec.c0 * std::pow(std::hypot(z[0], z[1]), spec.q));
      }
    }
    rep.lower_bound_margin = margin;
    rep.lower_bound = margin >= -1e-12;
  }
  return rep;
}

}  // namespace hjflow
