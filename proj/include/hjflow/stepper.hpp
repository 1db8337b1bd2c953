#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hjflow/asymptotics.hpp"
#include "hjflow/field.hpp"
#include "hjflow/grid.hpp"
#include "hjflow/nonlinearity.hpp"

namespace hjflow {

struct GridSpec {
  GridKind kind = GridKind::interval;
  double length = 1.0;
  int n = 101;
  double lx = 1.0, ly = 1.0;
  int nx = 0, ny = 0;
  double h = 0.0;
  std::vector<Rect> rects;

  GridPtr build() const;
};

enum class InitialKind { zero, constant, cosine, bump, random_smooth };

std::string to_string(InitialKind kind);
InitialKind initial_kind_from_string(const std::string& name);

/// Initial data catalog. Every kind is defined on the continuum and sampled
/// at the nodes, so refinements see the same function.
///
///   cosine:        a * prod_k cos(m_k pi (x_k - origin_k) / extent_k)
///   bump:          a * exp(1 - 1/(1 - (r/R)^2)) inside r < R
///   random_smooth: seeded sum of cos(j pi x/L + phase) products with
///                  amplitudes ~ 1/(1 + |j|^2), normalised so |u0| <= a
/// then offset is added and values are clipped from above if requested.
struct InitialDatum {
  InitialKind kind = InitialKind::cosine;
  double amplitude = 1.0;
  double offset = 0.0;
  std::array<int, 2> modes{1, 1};
  std::optional<std::array<double, 2>> center;
  double radius = 0.0;  // 0: a quarter of the shortest extent
  int n_modes = 6;
  std::uint64_t seed = 0;
  std::optional<double> clip_above;

  Field sample(const GridPtr& grid) const;
};

struct RunConfig {
  std::string id = "run";
  GridSpec grid;
  NonlinearitySpec F;
  InitialDatum initial;
  double dt_max = 1e-3;
  double cfl = 0.25;
  double t_end = 1.0;
  int save_stride = 1;
  double blowup_guard = 1e6;
  double robin_K = 1.0;
  double solver_tol = 1e-10;
  bool keep_snapshots = false;

  void validate() const;
};

struct RunState {
  double t = 0;
  Field u;
  Field u_prev;
  double dt_last = 0;
  long step_index = 0;
};

/// dt = min(dt_max, cfl * h / max(1e-8, sup |grad F(grad_h u)|)), never past t_end.
double adapt_dt(const RunState& state, const RunConfig& config);

/// One IMEX step: (I - dt Lap_h) u_new = u + dt F(grad_h u).
RunState step_imex(const RunState& state, double dt, const NonlinearitySpec& spec, double solver_tol = 1e-10);

enum class RunStatus { completed, gradient_guard, solver_failure };
std::string to_string(RunStatus status);

struct RunResult {
  GridPtr grid;
  TimeSeries series;
  RunState final_state;
  RunStatus status = RunStatus::completed;
  std::string message;
  std::vector<Field> snapshots;  // one per record when keep_snapshots
  Field psi;
  double u0_sup = 0;
  double u0_mean = 0;
};

RunResult run(const RunConfig& config);
RunResult run(const RunConfig& config, const Field& u0);

/// Stable textual digest of the configuration (hex).
std::string config_hash(const RunConfig& config);

}  // namespace hjflow
