#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hjflow/field.hpp"

namespace hjflow {

enum class NonlinearityKind { zero, power, exponential, table };

std::string to_string(NonlinearityKind kind);
NonlinearityKind nonlinearity_kind_from_string(const std::string& name);

/// Raised when F or its gradient leaves double range at some node.
class OverflowError : public std::runtime_error {
 public:
  OverflowError(const std::string& what, std::size_t node) : std::runtime_error(what), node_(node) {}
  std::size_t node() const { return node_; }

 private:
  std::size_t node_;
};

/// Radial gradient nonlinearity F(z) = sign * f(|z|).
///
///   zero:        f = 0 (pure heat flow)
///   power:       f(r) = r^p
///   exponential: f(r) = exp(r^q) - 1
///   table:       f piecewise linear through (radii[i], values[i]), f(0) = 0
struct NonlinearitySpec {
  NonlinearityKind kind = NonlinearityKind::power;
  double p = 2.0;
  double q = 2.0;
  double delta = 1.0;
  /// Lower-bound constant; a value means the growth condition F >= c0 |z|^q is claimed.
  std::optional<double> c0;
  int sign = 1;
  std::vector<double> table_radii;
  std::vector<double> table_values;

  static NonlinearitySpec zero();
  static NonlinearitySpec power(double p);
  static NonlinearitySpec exponential(double q);

  /// Throws std::invalid_argument naming the offending parameter.
  void validate() const;

  /// Radial profile f(r) and its derivative f'(r), without sign.
  double profile(double r) const;
  double profile_slope(double r) const;

  double value(std::span<const double> z) const;
  /// Writes grad F(z) into out (same length as z).
  void gradient(std::span<const double> z, std::span<double> out) const;
};

Field eval_F(const NonlinearitySpec& spec, const VectorField& g);
VectorField eval_gradF(const NonlinearitySpec& spec, const VectorField& g);
/// max over nodes of |grad F(g)|.
double sup_gradF(const NonlinearitySpec& spec, const VectorField& g);

struct AssumptionReport {
  bool small_gradient_bound = false;  // |F(z)| <= |z|^p for |z| <= delta
  double small_gradient_ratio = 0;    // max |F|/|z|^p over sampled |z| <= delta
  bool growth_surrogate = false;      // monotone growth proxy for the superlinear limit
  std::vector<double> growth_values;  // per shell radius
  bool lower_bound_claimed = false;
  bool lower_bound = true;            // F(z) >= c0 |z|^q on samples (when claimed)
  double lower_bound_margin = 0;      // min of F - c0|z|^q
  bool all_pass() const { return small_gradient_bound && growth_surrogate && lower_bound; }
};

/// Geometric radii covering [delta/10, r_max].
std::vector<double> default_shell_radii(const NonlinearitySpec& spec, double r_max = 10.0, int count = 24);

/// Finite-sample checks of the structural conditions on F. The superlinear
/// limit at infinity is replaced by a proxy: the per-shell minimum of
/// |F|/(|z| sqrt(1+|grad F|)) must increase over the upper half of the radii
/// and end at least 10x above its first value.
AssumptionReport validate_assumptions(const NonlinearitySpec& spec, std::span<const double> shell_radii,
                                      int directions = 64);

}  // namespace hjflow
