#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hjflow/asymptotics.hpp"
#include "hjflow/stepper.hpp"

namespace hjflow {

enum class ExperimentKind { single, sweep_kappa, semigroup, eig, oracle_colehopf, picard_crosscheck };

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

/// Post-processing settings shared by every run of an experiment.
struct AnalysisOptions {
  double bernstein_t0 = 0.05;
  double plateau = 0.0;
  FitBand band;
  std::optional<double> rate_tol;  // default: 0.10 tensor grids, 0.15 masked
  bool check_rate = true;          // off for short horizons
};

struct ExperimentManifest {
  ExperimentKind kind = ExperimentKind::single;
  std::string id = "experiment";
  std::filesystem::path output = "out";
  std::uint64_t seed = 0;
  std::vector<RunConfig> runs;
  std::vector<double> amplitudes;  // sweep axis, one run each
  AnalysisOptions analysis;
  int semigroup_fields = 20;
  std::vector<double> semigroup_times{1e-4, 1e-3, 1e-2, 0.1, 1.0};
  bool semigroup_refine = true;
  int picard_nodes = 41;
  int picard_max_iters = 20;
};

/// Error in the configuration text. line() is 0 for validation errors,
/// which name the offending key instead.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = 0) : std::runtime_error(what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Flat sections of `key = value` lines; `[F]` + `p = 3` and a bare
/// `F.p = 3` are equivalent. '#' and ';' start comment lines.
ExperimentManifest parse_config(const std::string& text);
ExperimentManifest load_config(const std::filesystem::path& path);

}  // namespace hjflow
