#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace hjflow {

enum class GridKind { interval, rectangle, masked };

std::string to_string(GridKind kind);
GridKind grid_kind_from_string(const std::string& name);

/// Axis-aligned rectangle [x0,x1] x [y0,y1].
struct Rect {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};

/// Outward normal directions recorded on boundary nodes (bitmask).
enum Normal : std::uint8_t {
  normal_minus_x = 1,
  normal_plus_x = 2,
  normal_minus_y = 4,
  normal_plus_y = 8,
};

/// One symmetric coupling of the discrete Laplacian:
///   (Lap u)_i = (1/w_i) * sum_j coef_ij (u_j - u_i).
struct Coupling {
  std::uint32_t node;
  double coef;
};

class Grid;
using GridPtr = std::shared_ptr<const Grid>;

/// Uniform node-centred lattice on an interval, a rectangle, or a connected
/// union of lattice cells. Immutable after construction.
///
/// Nodes are the vertices of active cells, enumerated row-major (y outer,
/// x inner). Volume weights follow the trapezoid convention: h^d per interior
/// node, halved on faces, quartered on convex corners, 3/4 on reentrant
/// corners.
class Grid {
 public:
  static GridPtr interval(double length, int n);
  static GridPtr rectangle(double lx, double ly, int nx, int ny);
  static GridPtr union_of_rectangles(std::span<const Rect> rects, double h);
  /// Masked grid from its cell bits ((nx-1)*(ny-1), row-major) and origin.
  static GridPtr from_mask(int nx, int ny, double h, double x0, double y0, std::vector<std::uint8_t> cells);

  GridKind kind() const { return kind_; }
  bool is_tensor() const { return kind_ != GridKind::masked; }
  int dim() const { return dim_; }
  double h() const { return h_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double origin_x() const { return x0_; }
  double origin_y() const { return y0_; }
  /// Bounding-box side lengths.
  double extent_x() const { return (nx_ - 1) * h_; }
  double extent_y() const { return dim_ == 1 ? 0.0 : (ny_ - 1) * h_; }

  std::size_t size() const { return weights_.size(); }
  double measure() const { return measure_; }
  std::span<const double> weights() const { return weights_; }

  std::array<int, 2> lattice_index(std::size_t node) const { return lattice_[node]; }
  /// Node index at lattice position (i, j), or -1 when inactive/out of range.
  std::ptrdiff_t node_at(int i, int j) const;
  std::array<double, 2> position(std::size_t node) const;

  std::span<const Coupling> couplings(std::size_t node) const {
    return {couplings_.data() + offsets_[node], offsets_[node + 1] - offsets_[node]};
  }
  /// Coupled lattice neighbour along +/- axis, or -1 when the axis is closed
  /// by a Neumann face. Index: 2*axis + (0 for minus, 1 for plus).
  std::ptrdiff_t axis_neighbor(std::size_t node, int slot) const { return axis_nbr_[4 * node + slot]; }

  std::uint8_t normals(std::size_t node) const { return normals_[node]; }
  bool is_boundary(std::size_t node) const { return normals_[node] != 0; }
  /// Length (2D) or count (1D) of boundary faces attached to a node; used by
  /// Robin closures.
  double boundary_measure(std::size_t node) const { return boundary_measure_[node]; }

  /// Per-cell activity, (nx-1)*(ny-1) entries row-major; empty unless masked.
  const std::vector<std::uint8_t>& cell_mask() const { return cells_; }
  bool cell_active(int i, int j) const;

  /// Flood-fill check over active cells (edge adjacency).
  bool cells_connected() const;

  std::string id() const;

  bool operator==(const Grid& other) const;

 private:
  Grid() = default;
  void finalize_2d();

  GridKind kind_ = GridKind::interval;
  int dim_ = 1;
  int nx_ = 0, ny_ = 1;
  double h_ = 0;
  double x0_ = 0, y0_ = 0;
  double measure_ = 0;
  std::vector<std::uint8_t> cells_;
  std::vector<std::ptrdiff_t> node_of_lattice_;
  std::vector<std::array<int, 2>> lattice_;
  std::vector<double> weights_;
  std::vector<double> boundary_measure_;
  std::vector<std::uint8_t> normals_;
  std::vector<std::size_t> offsets_;
  std::vector<Coupling> couplings_;
  std::vector<std::ptrdiff_t> axis_nbr_;
};

/// Throws std::invalid_argument unless both grids describe the same lattice.
void require_same_grid(const Grid& a, const Grid& b);

}  // namespace hjflow
