#include "hjflow/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <stdexcept>

namespace hjflow {

std::string to_string(GridKind kind) {
  switch (kind) {
    case GridKind::interval: return "interval";
    case GridKind::rectangle: return "rectangle";
    case GridKind::masked: return "masked";
  }
  return "?";
}

GridKind grid_kind_from_string(const std::string& name) {
  if (name == "interval") return GridKind::interval;
  if (name == "rectangle") return GridKind::rectangle;
  if (name == "masked") return GridKind::masked;
  throw std::invalid_argument("unknown grid kind '" + name + "'");
}

GridPtr Grid::interval(double length, int n) {
  if (!(length > 0) || !std::isfinite(length)) throw std::invalid_argument("interval length must be positive");
  if (n < 3) throw std::invalid_argument("interval needs at least 3 nodes (too few nodes)");

  auto g = std::shared_ptr<Grid>(new Grid());
  g->kind_ = GridKind::interval;
  g->dim_ = 1;
  g->nx_ = n;
  g->ny_ = 1;
  g->h_ = length / (n - 1);
  g->measure_ = length;

  const double h = g->h_;
  g->node_of_lattice_.resize(n);
  g->lattice_.resize(n);
  g->weights_.assign(n, h);
  g->weights_.front() = g->weights_.back() = 0.5 * h;
  g->boundary_measure_.assign(n, 0.0);
  g->boundary_measure_.front() = g->boundary_measure_.back() = 1.0;
  g->normals_.assign(n, 0);
  g->normals_.front() = normal_minus_x;
  g->normals_.back() = normal_plus_x;
  g->axis_nbr_.assign(4 * static_cast<std::size_t>(n), -1);
  g->offsets_.assign(n + 1, 0);
  for (int i = 0; i < n; ++i) {
    g->node_of_lattice_[i] = i;
    g->lattice_[i] = {i, 0};
    g->offsets_[i] = g->couplings_.size();
    if (i > 0) {
      g->couplings_.push_back({static_cast<std::uint32_t>(i - 1), 1.0 / h});
      g->axis_nbr_[4 * i + 0] = i - 1;
    }
    if (i + 1 < n) {
      g->couplings_.push_back({static_cast<std::uint32_t>(i + 1), 1.0 / h});
      g->axis_nbr_[4 * i + 1] = i + 1;
    }
  }
  g->offsets_[n] = g->couplings_.size();
  return g;
}

GridPtr Grid::rectangle(double lx, double ly, int nx, int ny) {
  if (!(lx > 0) || !(ly > 0)) throw std::invalid_argument("rectangle extents must be positive");
  if (nx < 3 || ny < 3) throw std::invalid_argument("rectangle needs at least 3 nodes per axis");
  const double hx = lx / (nx - 1);
  const double hy = ly / (ny - 1);
  if (std::abs(hx - hy) > 1e-12 * std::max(hx, hy))
    throw std::invalid_argument("anisotropic spacing: lx/(nx-1) must equal ly/(ny-1)");

  auto g = std::shared_ptr<Grid>(new Grid());
  g->kind_ = GridKind::rectangle;
  g->dim_ = 2;
  g->nx_ = nx;
  g->ny_ = ny;
  g->h_ = hx;
  g->cells_.assign(static_cast<std::size_t>(nx - 1) * (ny - 1), 1);
  g->finalize_2d();
  g->measure_ = lx * ly;
  return g;
}

namespace {

int lattice_steps(double coord, double origin, double h) {
  const double s = (coord - origin) / h;
  const double r = std::round(s);
  if (std::abs(s - r) > 1e-9 * std::max(1.0, std::abs(s)))
    throw std::invalid_argument("rectangle corner is off the lattice of pitch h");
  return static_cast<int>(r);
}

}  // namespace

GridPtr Grid::union_of_rectangles(std::span<const Rect> rects, double h) {
  if (!(h > 0)) throw std::invalid_argument("lattice pitch h must be positive");
  if (rects.empty()) throw std::invalid_argument("union needs at least one rectangle");
  double xmin = rects[0].x0, ymin = rects[0].y0, xmax = rects[0].x1, ymax = rects[0].y1;
  for (const auto& r : rects) {
    if (!(r.x1 > r.x0) || !(r.y1 > r.y0)) throw std::invalid_argument("degenerate rectangle in union");
    xmin = std::min(xmin, r.x0);
    ymin = std::min(ymin, r.y0);
    xmax = std::max(xmax, r.x1);
    ymax = std::max(ymax, r.y1);
  }

  auto g = std::shared_ptr<Grid>(new Grid());
  g->kind_ = GridKind::masked;
  g->dim_ = 2;
  g->h_ = h;
  g->x0_ = xmin;
  g->y0_ = ymin;
  g->nx_ = lattice_steps(xmax, xmin, h) + 1;
  g->ny_ = lattice_steps(ymax, ymin, h) + 1;
  if (g->nx_ < 2 || g->ny_ < 2) throw std::invalid_argument("union is thinner than one cell");
  const int cx = g->nx_ - 1;
  g->cells_.assign(static_cast<std::size_t>(cx) * (g->ny_ - 1), 0);
  for (const auto& r : rects) {
    const int i0 = lattice_steps(r.x0, xmin, h), i1 = lattice_steps(r.x1, xmin, h);
    const int j0 = lattice_steps(r.y0, ymin, h), j1 = lattice_steps(r.y1, ymin, h);
    for (int j = j0; j < j1; ++j)
      for (int i = i0; i < i1; ++i) g->cells_[static_cast<std::size_t>(j) * cx + i] = 1;
  }
  if (!g->cells_connected()) throw std::invalid_argument("union of rectangles is disconnected");
  g->finalize_2d();
  const auto active = std::count(g->cells_.begin(), g->cells_.end(), std::uint8_t{1});
  g->measure_ = static_cast<double>(active) * h * h;
  return g;
}

GridPtr Grid::from_mask(int nx, int ny, double h, double x0, double y0, std::vector<std::uint8_t> cells) {
  if (!(h > 0)) throw std::invalid_argument("lattice pitch h must be positive");
  if (nx < 2 || ny < 2) throw std::invalid_argument("mask is thinner than one cell");
  if (cells.size() != static_cast<std::size_t>(nx - 1) * (ny - 1)) throw std::invalid_argument("mask size mismatch");
  auto g = std::shared_ptr<Grid>(new Grid());
  g->kind_ = GridKind::masked;
  g->dim_ = 2;
  g->h_ = h;
  g->x0_ = x0;
  g->y0_ = y0;
  g->nx_ = nx;
  g->ny_ = ny;
  for (auto& c : cells) c = c ? 1 : 0;
  g->cells_ = std::move(cells);
  if (!g->cells_connected()) throw std::invalid_argument("mask cells are disconnected");
  g->finalize_2d();
  const auto active = std::count(g->cells_.begin(), g->cells_.end(), std::uint8_t{1});
  g->measure_ = static_cast<double>(active) * h * h;
  return g;
}

bool Grid::cell_active(int i, int j) const {
  if (dim_ != 2 || i < 0 || j < 0 || i >= nx_ - 1 || j >= ny_ - 1) return false;
  return cells_[static_cast<std::size_t>(j) * (nx_ - 1) + i] != 0;
}

bool Grid::cells_connected() const {
  if (dim_ == 1) return true;
  const int cx = nx_ - 1, cy = ny_ - 1;
  std::vector<std::uint8_t> seen(cells_.size(), 0);
  auto first = std::find(cells_.begin(), cells_.end(), std::uint8_t{1});
  if (first == cells_.end()) return false;
  std::deque<int> queue{static_cast<int>(first - cells_.begin())};
  seen[queue.front()] = 1;
  std::size_t reached = 1;
  while (!queue.empty()) {
    const int c = queue.front();
    queue.pop_front();
    const int i = c % cx, j = c / cx;
    const int nbrs[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
    for (const auto& nb : nbrs) {
      if (nb[0] < 0 || nb[1] < 0 || nb[0] >= cx || nb[1] >= cy) continue;
      const int k = nb[1] * cx + nb[0];
      if (cells_[k] && !seen[k]) {
        seen[k] = 1;
        ++reached;
        queue.push_back(k);
      }
    }
  }
  return reached == static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), std::uint8_t{1}));
}

void Grid::finalize_2d() {
  const double h = h_;
  auto cell = [this](int i, int j) -> int { return cell_active(i, j) ? 1 : 0; };

  node_of_lattice_.assign(static_cast<std::size_t>(nx_) * ny_, -1);
  for (int j = 0; j < ny_; ++j) {
    for (int i = 0; i < nx_; ++i) {
      const int count = cell(i - 1, j - 1) + cell(i, j - 1) + cell(i - 1, j) + cell(i, j);
      if (count == 0) continue;
      node_of_lattice_[static_cast<std::size_t>(j) * nx_ + i] = static_cast<std::ptrdiff_t>(lattice_.size());
      lattice_.push_back({i, j});
      weights_.push_back(0.25 * h * h * count);
    }
  }

  const std::size_t n = lattice_.size();
  std::vector<std::vector<Coupling>> adj(n);
  boundary_measure_.assign(n, 0.0);
  normals_.assign(n, 0);
  axis_nbr_.assign(4 * n, -1);

  auto link = [&](std::size_t a, std::size_t b, int count, int slot_ab, int slot_ba) {
    const double coef = 0.5 * count;
    adj[a].push_back({static_cast<std::uint32_t>(b), coef});
    adj[b].push_back({static_cast<std::uint32_t>(a), coef});
    axis_nbr_[4 * a + slot_ab] = static_cast<std::ptrdiff_t>(b);
    axis_nbr_[4 * b + slot_ba] = static_cast<std::ptrdiff_t>(a);
    if (count == 1) {
      boundary_measure_[a] += 0.5 * h;
      boundary_measure_[b] += 0.5 * h;
    }
  };

  for (std::size_t k = 0; k < n; ++k) {
    const auto [i, j] = lattice_[k];
    // +x edge: cells below and above it.
    if (auto r = node_at(i + 1, j); r >= 0) {
      const int count = cell(i, j - 1) + cell(i, j);
      if (count > 0) link(k, static_cast<std::size_t>(r), count, 1, 0);
    }
    // +y edge: cells left and right of it.
    if (auto u = node_at(i, j + 1); u >= 0) {
      const int count = cell(i - 1, j) + cell(i, j);
      if (count > 0) link(k, static_cast<std::size_t>(u), count, 3, 2);
    }
    const bool ne = cell(i, j), nw = cell(i - 1, j), se = cell(i, j - 1), sw = cell(i - 1, j - 1);
    std::uint8_t nm = 0;
    if ((nw && !ne) || (sw && !se)) nm |= normal_plus_x;
    if ((ne && !nw) || (se && !sw)) nm |= normal_minus_x;
    if ((sw && !nw) || (se && !ne)) nm |= normal_plus_y;
    if ((nw && !sw) || (ne && !se)) nm |= normal_minus_y;
    normals_[k] = nm;
  }

  offsets_.assign(n + 1, 0);
  couplings_.clear();
  for (std::size_t k = 0; k < n; ++k) {
    offsets_[k] = couplings_.size();
    couplings_.insert(couplings_.end(), adj[k].begin(), adj[k].end());
  }
  offsets_[n] = couplings_.size();
}

std::ptrdiff_t Grid::node_at(int i, int j) const {
  if (i < 0 || j < 0 || i >= nx_ || j >= ny_) return -1;
  return node_of_lattice_[static_cast<std::size_t>(j) * nx_ + i];
}

std::array<double, 2> Grid::position(std::size_t node) const {
  const auto [i, j] = lattice_[node];
  return {x0_ + i * h_, dim_ == 1 ? 0.0 : y0_ + j * h_};
}

std::string Grid::id() const {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%s-%dx%d-h%.6g", to_string(kind_).c_str(), nx_, ny_, h_);
  std::string s = buf;
  if (kind_ == GridKind::masked) {
    std::uint64_t hash = 1469598103934665603ull;
    for (auto c : cells_) hash = (hash ^ c) * 1099511628211ull;
    std::snprintf(buf, sizeof buf, "-%016llx", static_cast<unsigned long long>(hash));
    s += buf;
  }
  return s;
}

bool Grid::operator==(const Grid& other) const {
  // Spacing and origin compare to roundoff so that grids rebuilt from files match.
  const double tol = 1e-12 * std::max(1.0, h_);
  auto near = [tol](double a, double b) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(a)); };
  return kind_ == other.kind_ && nx_ == other.nx_ && ny_ == other.ny_ && near(h_, other.h_) &&
         near(x0_, other.x0_) && near(y0_, other.y0_) && cells_ == other.cells_;
}

void require_same_grid(const Grid& a, const Grid& b) {
  if (&a == &b) return;
  if (!(a == b)) throw std::invalid_argument("grid mismatch: field lives on " + b.id() + ", expected " + a.id());
}

}  // namespace hjflow
