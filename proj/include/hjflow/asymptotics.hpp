#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hjflow/field.hpp"
#include "hjflow/nonlinearity.hpp"

namespace hjflow {

/// One saved time level. `mean` is kept in memory only; the CSV schema is
/// fixed to the nine columns below.
struct Record {
  double t = 0;
  double M = 0;          // max u
  double m = 0;          // min u
  double Lut = 0;        // |u - u_prev|_inf / dt
  double grad_sup = 0;   // max node |grad_h u|
  double xnorm_dev = 0;  // |u - mean u|_inf + grad_sup
  double meanF = 0;      // weighted mean of F(grad_h u)
  double sup_h = 0;      // max node psi |grad_h u|^2
  double dt = 0;
  double mean = 0;
};

inline constexpr const char* kSeriesColumns = "t,M,m,Lut,grad_sup,xnorm_dev,meanF,sup_h,dt";

struct TimeSeries {
  std::vector<Record> records;
  std::string config_hash;
  std::string grid_id;
};

/// Monitors for u at time t. With dt > 0, Lut is the backward difference
/// against u_prev; with dt == 0 (initial level) it is |Lap_h u + F(grad_h u)|_inf.
/// sup_h is left at zero when psi is null.
Record monitors(const Field& u_prev, const Field& u, double t, double dt, const NonlinearitySpec& spec,
                const Field* psi);

/// sup over nodes of psi * |grad_h u|^2.
double bernstein_h(const Field& u, const Field& psi);

class AnalysisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class CMethod { truncate, tail_extrapolate };

struct CEstimate {
  double c = 0;
  double integral = 0;   // trapezoid of meanF over the series
  double tail = 0;       // extrapolated remainder (0 for truncate)
  double tail_rate = 0;  // decay rate used for the tail
};

/// c = mean(u0) + int_0^T meanF dt (+ meanF(T)/rate). The tail rate is the
/// fitted decay of |meanF| over its last decade, falling back to p * lambda.
CEstimate estimate_c(const TimeSeries& series, double u0_mean, double lambda, CMethod method,
                     double p_default = 2.0);

/// Limit anchored on the final discrete mean: mean(u(T)) + tail.
double terminal_c(const TimeSeries& series, double lambda, double p_default = 2.0);

/// |M - c| max |m - c| + grad_sup.
double decay_deviation(const Record& r, double c);
/// Roundoff level of the deviation: eps * max(1, |c|, max |u|).
double noise_floor(const TimeSeries& series, double c);

struct FitBand {
  std::optional<double> eps_hi;  // default 1e-2 * dev(0)
  std::optional<double> eps_lo;  // default 1e3 * noise floor
};

struct DecayFit {
  double c_limit = 0;
  double rate = 0;
  double prefactor = 0;
  double t1 = 0, t2 = 0;
  double residual = 0;  // RMS of log residuals
  int n_points = 0;
};

/// Least-squares line through (t, log dev(t)) over the records whose
/// deviation lies inside the band.
DecayFit fit_decay(const TimeSeries& series, double c, const FitBand& band = {});
/// Same regression over explicit samples (used for synthetic checks).
DecayFit fit_log_linear(std::span<const double> t, std::span<const double> dev);

/// max over records with dev >= floor of e^{lambda t} dev(t).
double decay_prefactor(const TimeSeries& series, double c, double lambda, double floor);

struct Verdict {
  std::string name;
  bool pass = false;
  double measured = 0;
  double threshold = 0;
};

/// Maximum-principle echo for h = psi |grad u|^2: for t >= t0 every sup_h stays
/// below 1.05 * max(sup_h(t0), plateau). Measured value is the ratio.
Verdict bernstein_check(const TimeSeries& series, double t0 = 0.05, double plateau = 0.0);

/// Monotonicity of M, m, the L-infinity bound, and the discrete |u_t| after
/// t >= 10 dt_max (5% slack above the resolution of the difference quotient).
/// solver_tol is the relative residual of the implicit solve (0 for direct).
std::vector<Verdict> liapunov_checks(const TimeSeries& series, double u0_sup, double dt_max,
                                     double solver_tol = 0.0);

struct ComparisonResult {
  bool pass = false;
  double max_violation = 0;  // max over snapshots/nodes of u_a - u_b
  double min_gap = 0;        // min over snapshots/nodes of u_b - u_a
};

/// Order preservation u_a <= u_b + tol at every saved snapshot.
ComparisonResult comparison_check(const TimeSeries& a, const TimeSeries& b, std::span<const Field> snaps_a,
                                  std::span<const Field> snaps_b, double tol);

}  // namespace hjflow
