#include "hjflow/operators.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace hjflow {

namespace {

// Symmetric system  (diag(D) + s * K) x = b  where K is the graph stiffness
// (K x)_i = sum_j coef_ij (x_i - x_j). Row i of the unweighted equation is
// row i of this system divided by w_i.
struct WeightedSystem {
  const Grid& grid;
  std::vector<double> diag;
  double s;

  void apply(const std::vector<double>& x, std::vector<double>& y) const {
    const std::size_t n = grid.size();
    for (std::size_t i = 0; i < n; ++i) {
      double k = 0;
      for (const auto& c : grid.couplings(i)) k += c.coef * (x[i] - x[c.node]);
      y[i] = diag[i] * x[i] + s * k;
    }
  }

  // Unweighted max-norm of a weighted residual.
  double scaled_norm(const std::vector<double>& r) const {
    const auto w = grid.weights();
    double m = 0;
    for (std::size_t i = 0; i < r.size(); ++i) m = std::max(m, std::abs(r[i]) / w[i]);
    return m;
  }
};

void project_mean_zero(const Grid& grid, std::vector<double>& x) {
  const auto w = grid.weights();
  double acc = 0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += w[i] * x[i];
  const double mean = acc / grid.measure();
  for (double& v : x) v -= mean;
}

SolveStats conjugate_gradient(const WeightedSystem& sys, const std::vector<double>& b, std::vector<double>& x,
                              double abs_tol, bool singular) {
  const std::size_t n = b.size();
  std::vector<double> r(n), p(n), ap(n);
  sys.apply(x, ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
  SolveStats stats;
  stats.residual = sys.scaled_norm(r);
  if (stats.residual <= abs_tol) return stats;

  p = r;
  double rr = 0;
  for (double v : r) rr += v * v;
  const int cap = static_cast<int>(10 * n);
  for (int it = 1; it <= cap; ++it) {
    sys.apply(p, ap);
    double pap = 0;
    for (std::size_t i = 0; i < n; ++i) pap += p[i] * ap[i];
    if (!(pap > 0)) {
      if (singular && rr == 0) break;
      throw SolverError("conjugate gradients broke down (operator not positive definite)");
    }
    const double alpha = rr / pap;
    double rr_new = 0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
      rr_new += r[i] * r[i];
    }
    stats.iterations = it;
    stats.residual = sys.scaled_norm(r);
    if (stats.residual <= abs_tol) return stats;
    const double beta = rr_new / rr;
    rr = rr_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
  }
  throw SolverError("conjugate gradients did not converge within " + std::to_string(cap) +
                    " iterations (residual " + std::to_string(stats.residual) + ")");
}

// Direct solve of the 1D weighted system, which is tridiagonal. `first`
// skips leading rows/columns (used to pin a node in the singular case).
void tridiagonal_solve(const WeightedSystem& sys, const std::vector<double>& b, std::vector<double>& x,
                       std::size_t first = 0) {
  const std::size_t n = b.size();
  std::vector<double> lower(n, 0), diag(n, 0), upper(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    diag[i] = sys.diag[i];
    for (const auto& c : sys.grid.couplings(i)) {
      diag[i] += sys.s * c.coef;
      if (c.node + 1 == i) lower[i] = -sys.s * c.coef;
      if (c.node == i + 1) upper[i] = -sys.s * c.coef;
    }
  }
  std::vector<double> cprime(n, 0), dprime(n, 0);
  for (std::size_t i = first; i < n; ++i) {
    const double lo = i > first ? lower[i] : 0.0;
    const double denom = diag[i] - (i > first ? lo * cprime[i - 1] : 0.0);
    if (denom == 0) throw SolverError("singular tridiagonal system");
    cprime[i] = upper[i] / denom;
    dprime[i] = (b[i] - (i > first ? lo * dprime[i - 1] : 0.0)) / denom;
  }
  for (std::size_t i = n; i-- > first;) x[i] = dprime[i] - (i + 1 < n ? cprime[i] * x[i + 1] : 0.0);
}

}  // namespace

Field laplacian_apply(const Grid& grid, const Field& f) {
  require_same_grid(grid, f.grid());
  Field out(f.grid_ptr());
  const auto w = grid.weights();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double acc = 0;
    for (const auto& c : grid.couplings(i)) acc += c.coef * (f[c.node] - f[i]);
    out[i] = acc / w[i];
  }
  return out;
}

VectorField gradient(const Grid& grid, const Field& f) {
  require_same_grid(grid, f.grid());
  VectorField g(f.grid_ptr());
  const double inv2h = 0.5 / grid.h();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    auto comp = g.at(k);
    for (int a = 0; a < grid.dim(); ++a) {
      const auto lo = grid.axis_neighbor(k, 2 * a);
      const auto hi = grid.axis_neighbor(k, 2 * a + 1);
      comp[a] = (lo >= 0 && hi >= 0) ? (f[hi] - f[lo]) * inv2h : 0.0;
    }
  }
  return g;
}

Field solve_helmholtz(const Grid& grid, double alpha, const Field& rhs, SolveStats* stats, double tol,
                      const Field* initial_guess) {
  require_same_grid(grid, rhs.grid());
  if (!(alpha > 0)) throw std::invalid_argument("helmholtz alpha must be positive");
  const auto w = grid.weights();
  WeightedSystem sys{grid, std::vector<double>(w.begin(), w.end()), alpha};
  std::vector<double> b(grid.size());
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = w[i] * rhs[i];

  Field out(rhs.grid_ptr());
  SolveStats local;
  if (grid.dim() == 1) {
    tridiagonal_solve(sys, b, out.data());
    std::vector<double> r(b.size());
    sys.apply(out.data(), r);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
    local.residual = sys.scaled_norm(r);
  } else {
    out.data() = initial_guess ? initial_guess->data() : rhs.data();
    local = conjugate_gradient(sys, b, out.data(), tol * (1.0 + rhs.sup_norm()), false);
  }
  if (stats) *stats = local;
  return out;
}

Field solve_robin_aux(const GridPtr& grid, double K) {
  if (!(K > 0))
    throw std::invalid_argument("Robin constant K must be positive (K = 0 is an incompatible Neumann problem)");
  const std::size_t n = grid->size();
  std::vector<double> diag(n);
  for (std::size_t i = 0; i < n; ++i) diag[i] = K * grid->boundary_measure(i);
  WeightedSystem sys{*grid, std::move(diag), 1.0};
  const auto w = grid->weights();
  std::vector<double> b(w.begin(), w.end());

  Field psi(grid, 0.0);
  if (grid->dim() == 1) {
    tridiagonal_solve(sys, b, psi.data());
  } else {
    psi.data().assign(n, 1.0 / K);
    conjugate_gradient(sys, b, psi.data(), 1e-12, false);
  }
  if (!(psi.min() > 0)) throw SolverError("Robin auxiliary solution has a nonpositive minimum");
  return psi;
}

Field solve_neumann_poisson(const GridPtr& grid, const Field& rhs, double tol) {
  require_same_grid(*grid, rhs.grid());
  const std::size_t n = grid->size();
  WeightedSystem sys{*grid, std::vector<double>(n, 0.0), 1.0};
  const auto w = grid->weights();
  std::vector<double> b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = w[i] * rhs[i];
  // Make the right-hand side exactly compatible.
  double total = 0;
  for (double v : b) total += v;
  for (std::size_t i = 0; i < n; ++i) b[i] -= total * w[i] / grid->measure();

  Field v(grid, 0.0);
  if (grid->dim() == 1) {
    tridiagonal_solve(sys, b, v.data(), 1);
  } else {
    conjugate_gradient(sys, b, v.data(), tol * (1.0 + rhs.sup_norm()), true);
  }
  project_mean_zero(*grid, v.data());
  return v;
}

}  // namespace hjflow
