#include "hjflow/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "hjflow/operators.hpp"

namespace hjflow {

namespace {

double weighted_norm(const Field& v) { return std::sqrt(inner(v, v)); }

void remove_mean(Field& v) {
  const double m = v.mean();
  for (double& x : v.data()) x -= m;
}

// x^k series coefficients keep these accurate for small arguments.
// phi0(x) = (1 - e^{-x}) / x,  phi1(x) = (1 - e^{-x}(1 + x)) / x^2.
double phi0(double x) {
  if (x < 0.1) {
    double term = 1.0, sum = 0.0;
    for (int k = 0; k < 12; ++k) {
      sum += term / (k + 1);
      term *= -x / (k + 1);
    }
    return sum;
  }
  return -std::expm1(-x) / x;
}

double phi1(double x) {
  if (x < 0.1) {
    // sum_k (-1)^k x^k (k+1) / (k+2)!
    double sum = 0.0, pw = 1.0, fact = 2.0;
    for (int k = 0; k < 14; ++k) {
      sum += pw * (k + 1) / fact;
      pw *= -x;
      fact *= (k + 3);
    }
    return sum;
  }
  return (-std::expm1(-x) - x * std::exp(-x)) / (x * x);
}

}  // namespace

std::optional<double> discrete_lambda_closed_form(const Grid& grid) {
  if (!grid.is_tensor()) return std::nullopt;
  const double h = grid.h();
  auto mode1 = [h](int n) { return 2.0 * (1.0 - std::cos(std::numbers::pi / (n - 1))) / (h * h); };
  double lam = mode1(grid.nx());
  if (grid.dim() == 2) lam = std::min(lam, mode1(grid.ny()));
  return lam;
}

std::optional<double> continuum_lambda(const Grid& grid) {
  if (!grid.is_tensor()) return std::nullopt;
  const double L = std::max(grid.extent_x(), grid.extent_y());
  return (std::numbers::pi / L) * (std::numbers::pi / L);
}

EigenResult second_neumann_eigenvalue(const GridPtr& grid, int max_iters) {
  Field v(grid);
  for (std::size_t k = 0; k < grid->size(); ++k) {
    const auto [x, y] = grid->position(k);
    v[k] = x + 0.37 * y + 0.01 * std::sin(1.3 * static_cast<double>(k));
  }
  remove_mean(v);
  v = (1.0 / weighted_norm(v)) * v;

  EigenResult res;
  for (int it = 1; it <= max_iters; ++it) {
    Field next = solve_neumann_poisson(grid, v);
    remove_mean(next);
    const double nrm = weighted_norm(next);
    if (!(nrm > 0)) throw SolverError("inverse iteration collapsed to zero");
    v = (1.0 / nrm) * next;

    const Field lap = laplacian_apply(*grid, v);
    const double lambda = -inner(lap, v);
    Field r = lap + lambda * v;
    res.lambda = lambda;
    res.residual_norm = weighted_norm(r);
    res.iterations = it;
    if (res.residual_norm <= 1e-10 * std::max(1.0, lambda)) {
      res.eigenvector = std::move(v);
      return res;
    }
  }
  throw SolverError("inverse iteration for the second Neumann eigenvalue exceeded its iteration cap");
}

double discrete_lambda(const GridPtr& grid) {
  if (auto lam = discrete_lambda_closed_form(*grid)) return *lam;
  return second_neumann_eigenvalue(grid).lambda;
}

CosineBasis::Axis CosineBasis::make_axis(int n, double h) {
  Axis a;
  a.n = n;
  a.table.resize(static_cast<std::size_t>(n) * n);
  const long period = 2L * (n - 1);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i) {
      const long r = (static_cast<long>(k) * i) % period;
      a.table[static_cast<std::size_t>(k) * n + i] = std::cos(std::numbers::pi * static_cast<double>(r) / (n - 1));
    }
  a.weight.assign(n, h);
  a.weight.front() = a.weight.back() = 0.5 * h;
  a.norm.assign(n, 0.0);
  a.mu.resize(n);
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      const double c = a.table[static_cast<std::size_t>(k) * n + i];
      a.norm[k] += a.weight[i] * c * c;
    }
    a.mu[k] = 2.0 * (1.0 - std::cos(std::numbers::pi * k / (n - 1))) / (h * h);
  }
  return a;
}

CosineBasis::CosineBasis(GridPtr grid) : grid_(std::move(grid)) {
  if (!grid_->is_tensor()) throw std::invalid_argument("cosine basis needs a tensor grid");
  ax_ = make_axis(grid_->nx(), grid_->h());
  if (grid_->dim() == 2) {
    ay_ = make_axis(grid_->ny(), grid_->h());
  } else {
    ay_.n = 1;
    ay_.table = {1.0};
    ay_.weight = {1.0};
    ay_.norm = {1.0};
    ay_.mu = {0.0};
  }
  mu_.resize(static_cast<std::size_t>(ax_.n) * ay_.n);
  for (int ky = 0; ky < ay_.n; ++ky)
    for (int kx = 0; kx < ax_.n; ++kx) mu_[static_cast<std::size_t>(ky) * ax_.n + kx] = ax_.mu[kx] + ay_.mu[ky];
}

std::vector<double> CosineBasis::forward(const Field& v) const {
  require_same_grid(*grid_, v.grid());
  const int nx = ax_.n, ny = ay_.n;
  std::vector<double> tmp(static_cast<std::size_t>(nx) * ny, 0.0);
  for (int j = 0; j < ny; ++j) {
    const double* row = v.data().data() + static_cast<std::size_t>(j) * nx;
    for (int k = 0; k < nx; ++k) {
      const double* phi = ax_.table.data() + static_cast<std::size_t>(k) * nx;
      double acc = 0;
      for (int i = 0; i < nx; ++i) acc += ax_.weight[i] * row[i] * phi[i];
      tmp[static_cast<std::size_t>(j) * nx + k] = acc / ax_.norm[k];
    }
  }
  if (ny == 1) return tmp;
  std::vector<double> out(tmp.size(), 0.0);
  for (int ky = 0; ky < ny; ++ky) {
    const double* phi = ay_.table.data() + static_cast<std::size_t>(ky) * ny;
    for (int j = 0; j < ny; ++j) {
      const double wj = ay_.weight[j] * phi[j] / ay_.norm[ky];
      const double* src = tmp.data() + static_cast<std::size_t>(j) * nx;
      double* dst = out.data() + static_cast<std::size_t>(ky) * nx;
      for (int kx = 0; kx < nx; ++kx) dst[kx] += wj * src[kx];
    }
  }
  return out;
}

Field CosineBasis::inverse(std::span<const double> coeffs) const {
  const int nx = ax_.n, ny = ay_.n;
  std::vector<double> tmp;
  if (ny == 1) {
    tmp.assign(coeffs.begin(), coeffs.end());
  } else {
    tmp.assign(static_cast<std::size_t>(nx) * ny, 0.0);
    for (int ky = 0; ky < ny; ++ky) {
      const double* phi = ay_.table.data() + static_cast<std::size_t>(ky) * ny;
      const double* src = coeffs.data() + static_cast<std::size_t>(ky) * nx;
      for (int j = 0; j < ny; ++j) {
        double* dst = tmp.data() + static_cast<std::size_t>(j) * nx;
        for (int kx = 0; kx < nx; ++kx) dst[kx] += phi[j] * src[kx];
      }
    }
  }
  Field out(grid_);
  for (int j = 0; j < ny; ++j) {
    const double* src = tmp.data() + static_cast<std::size_t>(j) * nx;
    double* dst = out.data().data() + static_cast<std::size_t>(j) * nx;
    for (int k = 0; k < nx; ++k) {
      const double c = src[k];
      if (c == 0) continue;
      const double* phi = ax_.table.data() + static_cast<std::size_t>(k) * nx;
      for (int i = 0; i < nx; ++i) dst[i] += c * phi[i];
    }
  }
  return out;
}

Field heat_semigroup_apply(const GridPtr& grid, const Field& v, double t, int accuracy) {
  require_same_grid(*grid, v.grid());
  if (t < 0) throw std::invalid_argument("semigroup time must be nonnegative");
  if (t == 0) return v;
  if (grid->is_tensor()) {
    const CosineBasis basis(grid);
    auto c = basis.forward(v);
    const auto mu = basis.eigenvalues();
    for (std::size_t m = 0; m < c.size(); ++m) c[m] *= std::exp(-mu[m] * t);
    return basis.inverse(c);
  }
  const int steps = 32 * std::max(1, accuracy);
  const double dt = t / steps;
  Field w = v;
  for (int s = 0; s < steps; ++s) w = solve_helmholtz(*grid, dt, w, nullptr, 1e-12, &w);
  return w;
}

SemigroupReport semigroup_estimate_report(const GridPtr& grid, std::span<const Field> fields,
                                          std::span<const double> times) {
  if (fields.empty() || times.empty()) throw std::invalid_argument("semigroup report needs samples and times");
  for (double t : times)
    if (!(t > 0)) throw std::invalid_argument("semigroup report times must be positive");

  SemigroupReport rep;
  rep.lambda = discrete_lambda(grid);
  std::optional<CosineBasis> basis;
  if (grid->is_tensor()) basis.emplace(grid);

  for (std::size_t f = 0; f < fields.size(); ++f) {
    const Field& v = fields[f];
    const double vsup = v.sup_norm();
    const double gsup = gradient(*grid, v).sup_norm();
    std::vector<double> coeffs;
    if (basis) coeffs = basis->forward(v);
    for (double t : times) {
      Field st;
      if (basis) {
        auto c = coeffs;
        const auto mu = basis->eigenvalues();
        for (std::size_t m = 0; m < c.size(); ++m) c[m] *= std::exp(-mu[m] * t);
        st = basis->inverse(c);
      } else {
        st = heat_semigroup_apply(grid, v, t);
      }
      const double grad_st = gradient(*grid, st).sup_norm();
      SemigroupSample s;
      s.field = f;
      s.t = t;
      s.sup_ratio = vsup > 0 ? st.sup_norm() / vsup : 0.0;
      const double growth = std::exp(rep.lambda * t);
      s.c1 = vsup > 0 ? grad_st * growth / ((1.0 + 1.0 / std::sqrt(t)) * vsup) : 0.0;
      s.c2 = gsup > 0 ? grad_st * growth / gsup : 0.0;
      rep.max_sup_ratio = std::max(rep.max_sup_ratio, s.sup_ratio);
      rep.c1_hat = std::max(rep.c1_hat, s.c1);
      rep.c2_hat = std::max(rep.c2_hat, s.c2);
      rep.samples.push_back(s);
    }
  }
  rep.pass = rep.max_sup_ratio <= 1.0 + 1e-10 && std::isfinite(rep.c1_hat) && std::isfinite(rep.c2_hat);
  return rep;
}

RefinementCheck semigroup_refinement_check(const SemigroupReport& coarse, const SemigroupReport& fine) {
  auto spread = [](double a, double b) {
    const double lo = std::min(a, b), hi = std::max(a, b);
    return lo > 0 ? hi / lo : INFINITY;
  };
  RefinementCheck rc;
  rc.c1_ratio = spread(coarse.c1_hat, fine.c1_hat);
  rc.c2_ratio = spread(coarse.c2_hat, fine.c2_hat);
  rc.pass = coarse.pass && fine.pass && rc.c1_ratio < 2.0 && rc.c2_ratio < 2.0;
  return rc;
}

std::vector<double> graded_time_nodes(double t_end, int n_nodes) {
  if (n_nodes < 8) throw std::invalid_argument("picard needs at least 8 time nodes");
  if (!(t_end > 0)) throw std::invalid_argument("picard t_end must be positive");
  const int uniform = n_nodes - 5;
  const double tau = t_end / (uniform + 15.0 / 16.0);
  std::vector<double> nodes(n_nodes, 0.0);
  for (int i = 1; i <= uniform; ++i) nodes[i] = i * tau;
  double step = tau;
  for (int i = uniform + 1; i < n_nodes; ++i) {
    step *= 0.5;
    nodes[i] = nodes[i - 1] + step;
  }
  nodes.back() = t_end;
  return nodes;
}

PicardResult picard_mild_solve(const GridPtr& grid, const NonlinearitySpec& spec, const Field& u0, double t_end,
                               int n_time_nodes, int max_iters, double tol) {
  require_same_grid(*grid, u0.grid());
  if (max_iters < 1) throw std::invalid_argument("picard needs at least one iteration");
  PicardResult res;
  res.time_nodes = graded_time_nodes(t_end, n_time_nodes);
  const auto& ts = res.time_nodes;
  const std::size_t nt = ts.size();

  auto source = [&](const Field& u) { return eval_F(spec, gradient(*grid, u)); };

  std::vector<Field> u(nt);
  std::optional<CosineBasis> basis;
  std::vector<double> c0;
  if (grid->is_tensor()) {
    basis.emplace(grid);
    c0 = basis->forward(u0);
  }
  const std::size_t modes = basis ? basis->modes() : 0;

  // Free evolution S(t_i) u0.
  std::vector<Field> free(nt);
  for (std::size_t i = 0; i < nt; ++i) {
    if (basis) {
      auto c = c0;
      const auto mu = basis->eigenvalues();
      for (std::size_t m = 0; m < modes; ++m) c[m] *= std::exp(-mu[m] * ts[i]);
      free[i] = basis->inverse(c);
    } else {
      free[i] = heat_semigroup_apply(grid, u0, ts[i]);
    }
  }
  u = free;

  for (int it = 1; it <= max_iters; ++it) {
    std::vector<Field> next(nt);
    next[0] = u0;
    if (basis) {
      const auto mu = basis->eigenvalues();
      std::vector<std::vector<double>> g(nt);
      for (std::size_t j = 0; j < nt; ++j) g[j] = basis->forward(source(u[j]));
      for (std::size_t i = 1; i < nt; ++i) {
        std::vector<double> c(modes);
        for (std::size_t m = 0; m < modes; ++m) {
          double acc = c0[m] * std::exp(-mu[m] * ts[i]);
          for (std::size_t j = 0; j < i; ++j) {
            const double tau = ts[j + 1] - ts[j];
            const double x = mu[m] * tau;
            const double i0 = tau * phi0(x);
            const double i1_over_tau = tau * phi1(x);
            const double decay = std::exp(-mu[m] * (ts[i] - ts[j + 1]));
            acc += decay * (g[j + 1][m] * (i0 - i1_over_tau) + g[j][m] * i1_over_tau);
          }
          c[m] = acc;
        }
        next[i] = basis->inverse(c);
      }
    } else {
      std::vector<Field> g(nt);
      for (std::size_t j = 0; j < nt; ++j) g[j] = source(u[j]);
      for (std::size_t i = 1; i < nt; ++i) {
        Field acc = free[i];
        for (std::size_t j = 0; j < i; ++j) {
          const double half = 0.5 * (ts[j + 1] - ts[j]);
          acc = acc + half * heat_semigroup_apply(grid, g[j], ts[i] - ts[j]);
          acc = acc + half * heat_semigroup_apply(grid, g[j + 1], ts[i] - ts[j + 1]);
        }
        next[i] = std::move(acc);
      }
    }

    double inc = 0;
    for (std::size_t i = 0; i < nt; ++i) inc = std::max(inc, sup_distance(next[i], u[i]));
    if (!std::isfinite(inc)) throw SolverError("picard iteration diverged (non-finite iterate)");
    if (!res.increments.empty() && inc < res.increments.back()) res.contracted = true;
    res.increments.push_back(inc);
    res.iterations = it;
    u = std::move(next);
    if (inc <= tol) {
      res.contracted = true;
      res.u_end = u.back();
      return res;
    }
  }
  throw SolverError("picard iteration did not contract within " + std::to_string(max_iters) +
                    " iterations; reduce t_end");
}

}  // namespace hjflow
