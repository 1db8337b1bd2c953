#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hjflow/asymptotics.hpp"
#include "hjflow/config.hpp"
#include "hjflow/spectral.hpp"
#include "hjflow/stepper.hpp"

namespace hjflow {

/// A finished run together with everything derived from it.
struct RunOutcome {
  RunConfig config;
  RunResult result;
  double lambda = 0;
  CEstimate c;         // tail-extrapolated quadrature
  double c_fit = 0;    // terminal mean + tail, used as the fit centre
  std::optional<DecayFit> fit;
  std::string fit_error;
  double prefactor = 0;
  double sup_grad_max = 0;
  std::vector<Verdict> verdicts;
  std::string error;  // set when the run could not be started

  bool pass() const;
  double rate_rel_err() const;
};

/// Computes c, the decay fit, the prefactor and the per-run verdicts.
RunOutcome analyze_run(const RunConfig& config, RunResult result, const AnalysisOptions& options,
                       std::optional<double> lambda = std::nullopt);

struct ExperimentReport {
  ExperimentKind kind = ExperimentKind::single;
  std::vector<RunOutcome> runs;
  std::vector<Verdict> verdicts;  // experiment-level
  std::optional<SemigroupReport> semigroup;
  std::optional<SemigroupReport> semigroup_fine;
  std::size_t semigroup_nodes = 0, semigroup_fine_nodes = 0;
  std::optional<PicardResult> picard;
  std::optional<EigenResult> eigen;
  std::optional<double> eigen_analytic;

  bool pass() const;
};

/// Number of workers: HJFLOW_THREADS if set and positive, else the hardware count.
int worker_count();

/// Runs fn(i) for i in [0, n) on a bounded pool of threads.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, int workers = 0);

/// Executes the manifest. With write_files the per-run and per-experiment
/// artifacts are written below manifest.output.
ExperimentReport run_experiment(const ExperimentManifest& manifest, bool write_files = true);

/// Recomputes the verdicts of a run directory (series.csv + final.snap) and
/// rewrites its verdicts.csv. A directory holding summary.csv is treated as an
/// experiment and each run subdirectory is verified.
std::vector<Verdict> verify_directory(const std::filesystem::path& dir);

}  // namespace hjflow
