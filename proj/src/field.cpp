#include "hjflow/field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hjflow {

Field::Field(GridPtr grid, double fill) : grid_(std::move(grid)) {
  if (!grid_) throw std::invalid_argument("field needs a grid");
  values_.assign(grid_->size(), fill);
}

Field::Field(GridPtr grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw std::invalid_argument("field needs a grid");
  if (values_.size() != grid_->size())
    throw std::invalid_argument("field value count does not match active node count");
}

double Field::max() const { return *std::max_element(values_.begin(), values_.end()); }
double Field::min() const { return *std::min_element(values_.begin(), values_.end()); }

double Field::sup_norm() const {
  double s = 0;
  for (double v : values_) s = std::max(s, std::abs(v));
  return s;
}

double Field::mean() const {
  const auto w = grid_->weights();
  double acc = 0;
  for (std::size_t i = 0; i < values_.size(); ++i) acc += w[i] * values_[i];
  return acc / grid_->measure();
}

bool Field::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

VectorField::VectorField(GridPtr grid) : grid_(std::move(grid)) {
  if (!grid_) throw std::invalid_argument("vector field needs a grid");
  dim_ = grid_->dim();
  values_.assign(grid_->size() * static_cast<std::size_t>(dim_), 0.0);
}

double VectorField::norm_at(std::size_t node) const {
  double s = 0;
  for (double c : at(node)) s += c * c;
  return std::sqrt(s);
}

double VectorField::sup_norm() const {
  double s = 0;
  for (std::size_t k = 0; k < size(); ++k) s = std::max(s, norm_at(k));
  return s;
}

double inner(const Field& f, const Field& g) {
  require_same_grid(f.grid(), g.grid());
  const auto w = f.grid().weights();
  double acc = 0;
  for (std::size_t i = 0; i < f.size(); ++i) acc += w[i] * f[i] * g[i];
  return acc;
}

Field operator+(const Field& a, const Field& b) {
  require_same_grid(a.grid(), b.grid());
  Field r = a;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += b[i];
  return r;
}

Field operator-(const Field& a, const Field& b) {
  require_same_grid(a.grid(), b.grid());
  Field r = a;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  return r;
}

Field operator*(double s, const Field& a) {
  Field r = a;
  for (double& v : r.data()) v *= s;
  return r;
}

double sup_distance(const Field& a, const Field& b) {
  require_same_grid(a.grid(), b.grid());
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace hjflow
