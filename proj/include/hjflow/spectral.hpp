#pragma once

#include <optional>
#include <span>
#include <vector>

#include "hjflow/field.hpp"
#include "hjflow/nonlinearity.hpp"

namespace hjflow {

struct EigenResult {
  double lambda = 0;
  Field eigenvector;  // unit weighted norm, weighted mean zero
  double residual_norm = 0;
  int iterations = 0;
};

/// Smallest nonzero eigenvalue of -Lap_h by inverse iteration on the
/// mean-zero subspace (constants are projected out after every solve).
EigenResult second_neumann_eigenvalue(const GridPtr& grid, int max_iters = 500);

/// Exact second eigenvalue of the discrete operator on tensor grids.
std::optional<double> discrete_lambda_closed_form(const Grid& grid);
/// Continuum value (pi / longest side)^2 on tensor grids.
std::optional<double> continuum_lambda(const Grid& grid);
/// Closed form on tensor grids, inverse iteration otherwise.
double discrete_lambda(const GridPtr& grid);

/// Eigenbasis of Lap_h on tensor grids: products of DCT-I vectors
/// cos(pi k i / (n-1)) along each axis. Mode index m = kx + nx * ky.
class CosineBasis {
 public:
  explicit CosineBasis(GridPtr grid);

  std::size_t modes() const { return mu_.size(); }
  /// Eigenvalues of -Lap_h, one per mode.
  std::span<const double> eigenvalues() const { return mu_; }
  std::vector<double> forward(const Field& v) const;
  Field inverse(std::span<const double> coeffs) const;

 private:
  struct Axis {
    int n = 0;
    std::vector<double> table;  // table[k * n + i]
    std::vector<double> weight;
    std::vector<double> norm;
    std::vector<double> mu;
  };
  static Axis make_axis(int n, double h);

  GridPtr grid_;
  Axis ax_, ay_;
  std::vector<double> mu_;
};

/// Neumann heat semigroup S(t)v of the discrete operator. Tensor grids use
/// the exact cosine expansion. Masked grids fall back to 32 * accuracy
/// implicit Euler sub-steps (first order in the sub-step).
Field heat_semigroup_apply(const GridPtr& grid, const Field& v, double t, int accuracy = 1);

struct SemigroupSample {
  std::size_t field = 0;
  double t = 0;
  double sup_ratio = 0;  // |S(t)v|_inf / |v|_inf
  double c1 = 0;         // |grad S(t)v| e^{lambda t} / ((1 + t^{-1/2}) |v|_inf)
  double c2 = 0;         // |grad S(t)v| e^{lambda t} / |grad v|_inf, 0 when grad v = 0
};

struct SemigroupReport {
  double lambda = 0;
  double max_sup_ratio = 0;
  double c1_hat = 0;
  double c2_hat = 0;
  std::vector<SemigroupSample> samples;
  /// sup contraction holds to 1e-10 and both constants are finite.
  bool pass = false;
};

SemigroupReport semigroup_estimate_report(const GridPtr& grid, std::span<const Field> fields,
                                          std::span<const double> times);

struct RefinementCheck {
  double c1_ratio = 0;  // max/min of the two C1 estimates
  double c2_ratio = 0;
  bool pass = false;    // both ratios < 2 and both reports pass
};

RefinementCheck semigroup_refinement_check(const SemigroupReport& coarse, const SemigroupReport& fine);

struct PicardResult {
  Field u_end;
  int iterations = 0;
  std::vector<double> increments;  // sup over time nodes of successive differences
  bool contracted = false;
  std::vector<double> time_nodes;
};

/// Time nodes on [0, t_end]: uniform, with the last four intervals halved
/// successively towards t_end.
std::vector<double> graded_time_nodes(double t_end, int n_nodes);

/// Fixed-point iteration of the Duhamel formula
///   u(t) = S(t) u0 + int_0^t S(t - s) F(grad u(s)) ds
/// on graded time nodes. The source is interpolated linearly in s; on tensor
/// grids the kernel is integrated exactly per mode, on masked grids a plain
/// trapezoid rule is used. Stops once successive iterates differ by <= tol.
PicardResult picard_mild_solve(const GridPtr& grid, const NonlinearitySpec& spec, const Field& u0, double t_end,
                               int n_time_nodes, int max_iters, double tol = 1e-8);

}  // namespace hjflow
