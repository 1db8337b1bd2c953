#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "hjflow/grid.hpp"

namespace hjflow {

/// Scalar nodal values on the active nodes of a grid.
class Field {
 public:
  Field() = default;
  explicit Field(GridPtr grid, double fill = 0.0);
  Field(GridPtr grid, std::vector<double> values);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::size_t size() const { return values_.size(); }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::vector<double>& data() { return values_; }
  const std::vector<double>& data() const { return values_; }

  double max() const;
  double min() const;
  double sup_norm() const;
  /// Weighted mean under the grid's volume weights.
  double mean() const;
  bool all_finite() const;

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

/// Per-node d-vectors stored interleaved (node-major).
class VectorField {
 public:
  VectorField() = default;
  explicit VectorField(GridPtr grid);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  int dim() const { return dim_; }
  std::size_t size() const { return values_.size() / static_cast<std::size_t>(dim_); }

  std::span<double> at(std::size_t node) { return {values_.data() + dim_ * node, static_cast<std::size_t>(dim_)}; }
  std::span<const double> at(std::size_t node) const {
    return {values_.data() + dim_ * node, static_cast<std::size_t>(dim_)};
  }
  double norm_at(std::size_t node) const;
  /// Max over nodes of the Euclidean norm.
  double sup_norm() const;
  std::vector<double>& data() { return values_; }
  const std::vector<double>& data() const { return values_; }

 private:
  GridPtr grid_;
  int dim_ = 1;
  std::vector<double> values_;
};

/// Weighted inner product <f, g>_w.
double inner(const Field& f, const Field& g);

Field operator+(const Field& a, const Field& b);
Field operator-(const Field& a, const Field& b);
Field operator*(double s, const Field& a);
double sup_distance(const Field& a, const Field& b);

}  // namespace hjflow
