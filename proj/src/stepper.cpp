#include "hjflow/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "hjflow/operators.hpp"

namespace hjflow {

GridPtr GridSpec::build() const {
  switch (kind) {
    case GridKind::interval: {
      int nn = n;
      if (h > 0) nn = static_cast<int>(std::lround(length / h)) + 1;
      return Grid::interval(length, nn);
    }
    case GridKind::rectangle: {
      int mx = nx, my = ny;
      if (h > 0) {
        mx = static_cast<int>(std::lround(lx / h)) + 1;
        my = static_cast<int>(std::lround(ly / h)) + 1;
      }
      return Grid::rectangle(lx, ly, mx, my);
    }
    case GridKind::masked:
      if (!(h > 0)) throw std::invalid_argument("grid.h: masked grids need a positive spacing");
      return Grid::union_of_rectangles(rects, h);
  }
  throw std::invalid_argument("grid.kind: unsupported");
}

std::string to_string(InitialKind kind) {
  switch (kind) {
    case InitialKind::zero: return "zero";
    case InitialKind::constant: return "constant";
    case InitialKind::cosine: return "cosine";
    case InitialKind::bump: return "bump";
    case InitialKind::random_smooth: return "random-smooth";
  }
  return "?";
}

InitialKind initial_kind_from_string(const std::string& name) {
  if (name == "zero") return InitialKind::zero;
  if (name == "constant") return InitialKind::constant;
  if (name == "cosine") return InitialKind::cosine;
  if (name == "bump") return InitialKind::bump;
  if (name == "random-smooth" || name == "random_smooth") return InitialKind::random_smooth;
  throw std::invalid_argument("unknown initial kind '" + name + "'");
}

Field InitialDatum::sample(const GridPtr& grid) const {
  Field u(grid);
  const Grid& g = *grid;
  const double ox = g.origin_x(), oy = g.origin_y();
  const double Lx = g.extent_x(), Ly = g.dim() == 2 ? g.extent_y() : 1.0;
  const double pi = std::numbers::pi;
  switch (kind) {
    case InitialKind::zero: break;
    case InitialKind::constant:
      for (double& v : u.data()) v = amplitude;
      break;
    case InitialKind::cosine:
      for (std::size_t k = 0; k < u.size(); ++k) {
        const auto x = g.position(k);
        double v = amplitude * std::cos(modes[0] * pi * (x[0] - ox) / Lx);
        if (g.dim() == 2) v *= std::cos(modes[1] * pi * (x[1] - oy) / Ly);
        u[k] = v;
      }
      break;
    case InitialKind::bump: {
      const std::array<double, 2> c = center.value_or(std::array<double, 2>{ox + 0.5 * Lx, oy + 0.5 * Ly});
      const double R = radius > 0 ? radius : 0.25 * (g.dim() == 2 ? std::min(Lx, Ly) : Lx);
      for (std::size_t k = 0; k < u.size(); ++k) {
        const auto x = g.position(k);
        double r2 = (x[0] - c[0]) * (x[0] - c[0]);
        if (g.dim() == 2) r2 += (x[1] - c[1]) * (x[1] - c[1]);
        const double s = r2 / (R * R);
        u[k] = s < 1 ? amplitude * std::exp(1.0 - 1.0 / (1.0 - s)) : 0.0;
      }
      break;
    }
    case InitialKind::random_smooth: {
      if (n_modes < 1) throw std::invalid_argument("initial.modes: need at least one mode");
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> normal(0.0, 1.0);
      std::uniform_real_distribution<double> phase(0.0, 2.0 * pi);
      struct Term {
        int jx, jy;
        double a, px, py;
      };
      std::vector<Term> terms;
      const int jy_max = g.dim() == 2 ? n_modes : 0;
      double total = 0;
      for (int jy = 0; jy <= jy_max; ++jy) {
        for (int jx = 0; jx <= n_modes; ++jx) {
          if (jx == 0 && jy == 0) continue;
          Term t{jx, jy, normal(rng) / (1.0 + jx * jx + jy * jy), phase(rng), phase(rng)};
          total += std::abs(t.a);
          terms.push_back(t);
        }
      }
      for (std::size_t k = 0; k < u.size(); ++k) {
        const auto x = g.position(k);
        double v = 0;
        for (const auto& t : terms) {
          double s = std::cos(t.jx * pi * (x[0] - ox) / Lx + t.px);
          if (g.dim() == 2) s *= std::cos(t.jy * pi * (x[1] - oy) / Ly + t.py);
          v += t.a * s;
        }
        u[k] = amplitude * v / total;
      }
      break;
    }
  }
  for (double& v : u.data()) {
    v += offset;
    if (clip_above) v = std::min(v, *clip_above);
  }
  return u;
}

void RunConfig::validate() const {
  F.validate();
  if (!(dt_max > 0)) throw std::invalid_argument("time.dt_max: must be positive");
  if (!(t_end > 0)) throw std::invalid_argument("time.t_end: must be positive");
  if (!(cfl > 0)) throw std::invalid_argument("time.cfl: must be positive");
  if (save_stride < 1) throw std::invalid_argument("time.save_stride: must be at least 1");
  if (!(blowup_guard > 0)) throw std::invalid_argument("time.blowup_guard: must be positive");
  if (!(robin_K > 0)) throw std::invalid_argument("diagnostics.K: must be positive");
  if (!(solver_tol > 0)) throw std::invalid_argument("solver tolerance must be positive");
}

namespace {

double dt_from_gradient(const VectorField& g, const NonlinearitySpec& spec, const RunConfig& config, double t) {
  const double s = sup_gradF(spec, g);
  double dt = std::min(config.dt_max, config.cfl * g.grid().h() / std::max(1e-8, s));
  return std::min(dt, config.t_end - t);
}

RunState advance(const RunState& state, const VectorField& g, double dt, const NonlinearitySpec& spec,
                 double solver_tol) {
  const Field f = eval_F(spec, g);
  Field rhs = state.u;
  for (std::size_t k = 0; k < rhs.size(); ++k) rhs[k] += dt * f[k];
  RunState next;
  next.u = solve_helmholtz(state.u.grid(), dt, rhs, nullptr, solver_tol, &state.u);
  next.u_prev = state.u;
  next.t = state.t + dt;
  next.dt_last = dt;
  next.step_index = state.step_index + 1;
  return next;
}

}  // namespace

double adapt_dt(const RunState& state, const RunConfig& config) {
  return dt_from_gradient(gradient(state.u.grid(), state.u), config.F, config, state.t);
}

RunState step_imex(const RunState& state, double dt, const NonlinearitySpec& spec, double solver_tol) {
  if (!(dt > 0)) throw std::invalid_argument("step: dt must be positive");
  return advance(state, gradient(state.u.grid(), state.u), dt, spec, solver_tol);
}

std::string to_string(RunStatus status) {
  switch (status) {
    case RunStatus::completed: return "completed";
    case RunStatus::gradient_guard: return "gradient-guard";
    case RunStatus::solver_failure: return "solver-failure";
  }
  return "?";
}

RunResult run(const RunConfig& config) {
  const GridPtr grid = config.grid.build();
  return run(config, config.initial.sample(grid));
}

RunResult run(const RunConfig& config, const Field& u0) {
  config.validate();
  RunResult out;
  out.grid = u0.grid_ptr();
  const Grid& grid = *out.grid;
  out.psi = solve_robin_aux(out.grid, config.robin_K);
  out.u0_sup = u0.sup_norm();
  out.u0_mean = u0.mean();
  out.series.config_hash = config_hash(config);
  out.series.grid_id = grid.id();

  // F(z) = -f(|z|) is evolved as v = -u with +f, which keeps the scheme's
  // positive-source form; monitors are taken on u.
  const double flip = config.F.sign < 0 ? -1.0 : 1.0;
  NonlinearitySpec evolved = config.F;
  evolved.sign = 1;
  auto as_u = [&](const Field& v) { return flip > 0 ? v : -1.0 * v; };

  RunState state;
  state.u = as_u(u0);
  state.u_prev = state.u;

  auto save = [&](const RunState& s, double dt) {
    const Field u = as_u(s.u);
    const Field up = as_u(s.u_prev);
    out.series.records.push_back(monitors(up, u, s.t, dt, config.F, &out.psi));
    if (config.keep_snapshots) out.snapshots.push_back(u);
  };
  try {
    save(state, 0.0);
  } catch (const OverflowError& e) {
    // F(grad u0) is already out of range: keep the F-free monitors.
    Record r = monitors(u0, u0, 0.0, 0.0, NonlinearitySpec::zero(), &out.psi);
    r.Lut = r.meanF = std::numeric_limits<double>::quiet_NaN();
    out.series.records.push_back(r);
    if (config.keep_snapshots) out.snapshots.push_back(u0);
    out.status = RunStatus::gradient_guard;
    out.message = e.what();
  }

  const double t_tol = 1e-12 * config.t_end;
  while (out.status == RunStatus::completed && config.t_end - state.t > t_tol) {
    try {
      const VectorField g = gradient(grid, state.u);
      if (g.sup_norm() > config.blowup_guard) {
        out.status = RunStatus::gradient_guard;
        out.message = "gradient exceeded guard at t = " + std::to_string(state.t);
        break;
      }
      double dt = dt_from_gradient(g, evolved, config, state.t);
      const bool last = config.t_end - (state.t + dt) <= t_tol;
      state = advance(state, g, dt, evolved, config.solver_tol);
      if (last) state.t = config.t_end;
      if (!state.u.all_finite()) {
        out.status = RunStatus::gradient_guard;
        out.message = "non-finite solution at t = " + std::to_string(state.t);
        break;
      }
      if (state.step_index % config.save_stride == 0 || last) save(state, dt);
    } catch (const OverflowError& e) {
      out.status = RunStatus::gradient_guard;
      out.message = e.what();
      break;
    } catch (const SolverError& e) {
      out.status = RunStatus::solver_failure;
      out.message = e.what();
      break;
    }
  }
  if (out.status != RunStatus::completed && out.series.records.back().t < state.t && state.u.all_finite() &&
      state.step_index > 0) {
    try {
      save(state, state.dt_last);
    } catch (const OverflowError&) {
    }
  }
  state.u = as_u(state.u);
  state.u_prev = as_u(state.u_prev);
  out.final_state = std::move(state);
  return out;
}

std::string config_hash(const RunConfig& c) {
  std::ostringstream s;
  s.precision(17);
  s << to_string(c.grid.kind) << ' ' << c.grid.length << ' ' << c.grid.n << ' ' << c.grid.lx << ' ' << c.grid.ly
    << ' ' << c.grid.nx << ' ' << c.grid.ny << ' ' << c.grid.h;
  for (const auto& r : c.grid.rects) s << ' ' << r.x0 << ',' << r.y0 << ',' << r.x1 << ',' << r.y1;
  s << '|' << to_string(c.F.kind) << ' ' << c.F.p << ' ' << c.F.q << ' ' << c.F.delta << ' ' << c.F.sign << ' '
    << c.F.c0.value_or(0.0);
  for (std::size_t i = 0; i < c.F.table_radii.size(); ++i) s << ' ' << c.F.table_radii[i] << ':' << c.F.table_values[i];
  s << '|' << to_string(c.initial.kind) << ' ' << c.initial.amplitude << ' ' << c.initial.offset << ' '
    << c.initial.modes[0] << ' ' << c.initial.modes[1] << ' ' << c.initial.radius << ' ' << c.initial.n_modes << ' '
    << c.initial.seed << ' ' << c.initial.clip_above.value_or(0.0);
  if (c.initial.center) s << ' ' << (*c.initial.center)[0] << ' ' << (*c.initial.center)[1];
  s << '|' << c.dt_max << ' ' << c.cfl << ' ' << c.t_end << ' ' << c.save_stride << ' ' << c.blowup_guard << ' '
    << c.robin_K << ' ' << c.solver_tol;
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s.str()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace hjflow
