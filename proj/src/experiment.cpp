#include "hjflow/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <thread>

#include "hjflow/io.hpp"
#include "hjflow/operators.hpp"

namespace hjflow {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double default_rate_tol(const Grid& g) { return g.is_tensor() ? 0.10 : 0.15; }

double tail_exponent(const NonlinearitySpec& F) {
  switch (F.kind) {
    case NonlinearityKind::power: return F.p;
    case NonlinearityKind::exponential: return F.q;
    default: return 2.0;
  }
}

Verdict rate_verdict(const std::optional<DecayFit>& fit, double lambda, double tol) {
  Verdict v{"decay_rate", false, kNaN, tol};
  if (fit) {
    v.measured = std::abs(fit->rate - lambda) / lambda;
    v.pass = v.measured <= tol;
  }
  return v;
}

std::ofstream open_out(const std::filesystem::path& p) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  return f;
}

}  // namespace

bool RunOutcome::pass() const {
  if (!error.empty()) return false;
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

double RunOutcome::rate_rel_err() const { return fit ? std::abs(fit->rate - lambda) / lambda : kNaN; }

bool ExperimentReport::pass() const {
  return std::all_of(runs.begin(), runs.end(), [](const RunOutcome& r) { return r.pass(); }) &&
         std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

RunOutcome analyze_run(const RunConfig& config, RunResult result, const AnalysisOptions& options,
                       std::optional<double> lambda) {
  RunOutcome out;
  out.config = config;
  out.result = std::move(result);
  const RunResult& r = out.result;
  const Grid& grid = *r.grid;
  out.lambda = lambda ? *lambda : discrete_lambda(r.grid);
  const auto& recs = r.series.records;
  for (const auto& rec : recs) out.sup_grad_max = std::max(out.sup_grad_max, rec.grad_sup);

  const double p = tail_exponent(config.F);
  out.c = estimate_c(r.series, r.u0_mean, out.lambda, CMethod::tail_extrapolate, p);
  out.c_fit = terminal_c(r.series, out.lambda, p);
  const double floor = 1e3 * noise_floor(r.series, out.c_fit);
  const double lo = options.band.eps_lo.value_or(floor);
  const bool at_rest = decay_deviation(recs.front(), out.c_fit) <= lo;
  if (at_rest) {
    out.fit_error = "initial data already at rest";
  } else {
    try {
      out.fit = fit_decay(r.series, out.c_fit, options.band);
    } catch (const AnalysisError& e) {
      out.fit_error = e.what();
    }
  }
  out.prefactor = decay_prefactor(r.series, out.c_fit, out.lambda, lo);

  auto& vs = out.verdicts;
  vs.push_back({"completed", r.status == RunStatus::completed, recs.back().t, config.t_end});
  const double solver_tol = grid.dim() == 1 ? 0.0 : config.solver_tol;
  for (auto& v : liapunov_checks(r.series, r.u0_sup, config.dt_max, solver_tol)) vs.push_back(v);
  vs.push_back(bernstein_check(r.series, options.bernstein_t0, options.plateau));
  vs.push_back({"grad_bounded", std::isfinite(out.sup_grad_max) && out.sup_grad_max <= config.blowup_guard,
                out.sup_grad_max, config.blowup_guard});
  if (!at_rest && options.check_rate) vs.push_back(rate_verdict(out.fit, out.lambda, options.rate_tol.value_or(default_rate_tol(grid))));
  return out;
}

int worker_count() {
  if (const char* env = std::getenv("HJFLOW_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, int workers) {
  if (workers <= 0) workers = worker_count();
  const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t k = 0; k < w; ++k)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) fn(i);
    });
  for (auto& t : pool) t.join();
}

namespace {

void run_all(const ExperimentManifest& m, ExperimentReport& rep) {
  rep.runs.resize(m.runs.size());
  parallel_for(m.runs.size(), [&](std::size_t i) {
    const RunConfig& cfg = m.runs[i];
    try {
      rep.runs[i] = analyze_run(cfg, run(cfg), m.analysis);
    } catch (const std::exception& e) {
      rep.runs[i].config = cfg;
      rep.runs[i].error = e.what();
    }
  });
}

void add_colehopf(RunOutcome& o) {
  if (!o.error.empty()) return;
  const Field u0 = o.config.initial.sample(o.result.grid);
  Field w(o.result.grid);
  for (std::size_t k = 0; k < u0.size(); ++k) w[k] = std::exp(u0[k]);
  const double exact = std::log(w.mean());
  o.verdicts.push_back({"colehopf_c", std::abs(o.c.c - exact) <= 1e-3, std::abs(o.c.c - exact), 1e-3});
  double dev = 0;
  for (double v : o.result.final_state.u.values()) dev = std::max(dev, std::abs(v - o.c.c));
  o.verdicts.push_back({"terminal_state", dev <= 2e-3, dev, 2e-3});
}

void add_picard(const ExperimentManifest& m, ExperimentReport& rep) {
  RunOutcome& o = rep.runs.front();
  if (!o.error.empty()) return;
  const Field u0 = o.config.initial.sample(o.result.grid);
  try {
    rep.picard = picard_mild_solve(o.result.grid, o.config.F, u0, o.config.t_end, m.picard_nodes, m.picard_max_iters);
    const double d = sup_distance(rep.picard->u_end, o.result.final_state.u);
    rep.verdicts.push_back({"picard_agreement", d <= 5e-3, d, 5e-3});
    rep.verdicts.push_back({"picard_contraction",
                            rep.picard->contracted && rep.picard->iterations <= m.picard_max_iters,
                            static_cast<double>(rep.picard->iterations), static_cast<double>(m.picard_max_iters)});
  } catch (const SolverError&) {
    rep.verdicts.push_back({"picard_contraction", false, kNaN, static_cast<double>(m.picard_max_iters)});
  }
}

void add_sweep(ExperimentReport& rep) {
  bool complete = true;
  double top = 0, bottom = INFINITY;
  for (const auto& o : rep.runs) {
    complete = complete && o.error.empty() && o.result.status == RunStatus::completed;
    if (!o.error.empty()) continue;
    top = std::max(top, o.prefactor);
    if (o.prefactor > 0) bottom = std::min(bottom, o.prefactor);
  }
  rep.verdicts.push_back({"sweep_complete", complete && std::isfinite(top), top, INFINITY});
  const double spread = std::isfinite(bottom) ? top / bottom : 1.0;
  rep.verdicts.push_back({"prefactor_envelope", complete && spread <= 100.0, spread, 100.0});
}

std::vector<Field> semigroup_fields(const GridPtr& g, const ExperimentManifest& m) {
  std::vector<Field> fields;
  for (int i = 0; i < m.semigroup_fields; ++i) {
    InitialDatum d;
    d.kind = InitialKind::random_smooth;
    d.amplitude = 1.0;
    d.n_modes = m.runs.front().initial.n_modes;
    d.seed = m.seed + static_cast<std::uint64_t>(i);
    fields.push_back(d.sample(g));
  }
  return fields;
}

GridSpec refined(const GridSpec& s) {
  GridSpec f = s;
  if (f.h > 0) {
    f.h *= 0.5;
  } else {
    f.n = 2 * s.n - 1;
    f.nx = 2 * s.nx - 1;
    f.ny = 2 * s.ny - 1;
  }
  return f;
}

void do_semigroup(const ExperimentManifest& m, ExperimentReport& rep) {
  const RunConfig& cfg = m.runs.front();
  const GridPtr g = cfg.grid.build();
  rep.semigroup = semigroup_estimate_report(g, semigroup_fields(g, m), m.semigroup_times);
  rep.semigroup_nodes = g->size();
  rep.verdicts.push_back({"sup_contraction", rep.semigroup->max_sup_ratio <= 1.0 + 1e-10,
                          rep.semigroup->max_sup_ratio, 1.0 + 1e-10});
  rep.verdicts.push_back({"constants_finite", rep.semigroup->pass, rep.semigroup->c1_hat, INFINITY});

  InitialDatum eig;
  eig.kind = InitialKind::cosine;
  const std::vector<Field> one{eig.sample(g)};
  const auto er = semigroup_estimate_report(g, one, m.semigroup_times);
  rep.verdicts.push_back({"eigenfunction_c2", std::abs(er.c2_hat - 1.0) <= 1e-6, er.c2_hat, 1e-6});

  if (m.semigroup_refine) {
    const GridPtr gf = refined(cfg.grid).build();
    rep.semigroup_fine = semigroup_estimate_report(gf, semigroup_fields(gf, m), m.semigroup_times);
    rep.semigroup_fine_nodes = gf->size();
    const auto rc = semigroup_refinement_check(*rep.semigroup, *rep.semigroup_fine);
    rep.verdicts.push_back({"refinement_c1", rc.pass && rc.c1_ratio < 2.0, rc.c1_ratio, 2.0});
    rep.verdicts.push_back({"refinement_c2", rc.pass && rc.c2_ratio < 2.0, rc.c2_ratio, 2.0});
  }
}

void do_eig(const ExperimentManifest& m, ExperimentReport& rep) {
  const GridPtr g = m.runs.front().grid.build();
  rep.eigen = second_neumann_eigenvalue(g);
  const auto cont = continuum_lambda(*g);
  rep.eigen_analytic = cont ? *cont : kNaN;
  const double scale = std::max(1.0, rep.eigen->lambda);
  rep.verdicts.push_back({"eig_residual", rep.eigen->residual_norm <= 1e-8 * scale, rep.eigen->residual_norm,
                          1e-8 * scale});
  if (const auto exact = discrete_lambda_closed_form(*g)) {
    const double e = std::abs(rep.eigen->lambda - *exact) / *exact;
    rep.verdicts.push_back({"eig_closed_form", e <= 1e-8, e, 1e-8});
  }
}

void write_run(const std::filesystem::path& dir, const RunOutcome& o) {
  std::filesystem::create_directories(dir);
  if (o.error.empty()) {
    write_series_csv(dir / "series.csv", o.result.series);
    write_snapshot(dir / "final.snap", o.result.final_state.u);
  }
  auto vs = o.verdicts;
  if (!o.error.empty()) vs.push_back({"started", false, kNaN, kNaN});
  write_verdicts_csv(dir / "verdicts.csv", vs);
}

std::string status_of(const RunOutcome& o) { return o.error.empty() ? to_string(o.result.status) : "error"; }

void write_summary(const std::filesystem::path& dir, const ExperimentReport& rep) {
  auto f = open_out(dir / "summary.csv");
  f << "run_id,status,lambda,rate,rate_rel_err,c,prefactor,sup_grad_max\n";
  for (const auto& o : rep.runs) {
    f << o.config.id << ',' << status_of(o) << ',' << g17(o.error.empty() ? o.lambda : kNaN) << ','
      << g17(o.fit ? o.fit->rate : kNaN) << ',' << g17(o.rate_rel_err()) << ',' << g17(o.error.empty() ? o.c.c : kNaN)
      << ',' << g17(o.error.empty() ? o.prefactor : kNaN) << ',' << g17(o.error.empty() ? o.sup_grad_max : kNaN)
      << '\n';
  }
}

void write_plots(const std::filesystem::path& dir, const ExperimentReport& rep) {
  auto f = open_out(dir / "plots.gp");
  f << "# gnuplot -c plots.gp  (run from this directory)\n"
       "set datafile separator ','\n"
       "set terminal pngcairo size 900,600\n"
       "set xlabel 't'\n"
       "set logscale y\n"
       "set format y '%.0e'\n";
  const struct {
    const char* file;
    const char* label;
    int col;
  } panels[] = {{"deviation.png", "|u - mean u| + |grad u|", 6},
                {"gradient.png", "max |grad u|", 5},
                {"bernstein.png", "max psi |grad u|^2", 8},
                {"ut.png", "|u_t|", 4}};
  for (const auto& p : panels) {
    f << "\nset output '" << p.file << "'\nset ylabel '" << p.label << "'\nplot";
    bool first = true;
    for (const auto& o : rep.runs) {
      if (!o.error.empty()) continue;
      f << (first ? " " : ", \\\n     ") << "'" << o.config.id << "/series.csv' using 1:($" << p.col
        << " > 0 ? $" << p.col << " : NaN) skip 1 with lines title '" << o.config.id << "'";
      first = false;
    }
    if (first) f << " 1/0 notitle";
    f << '\n';
  }
}

void write_semigroup(const std::filesystem::path& dir, const ExperimentReport& rep) {
  auto f = open_out(dir / "semigroup.csv");
  f << "nodes,field,t,sup_ratio,c1,c2\n";
  auto rows = [&](const SemigroupReport& r, std::size_t nodes) {
    for (const auto& s : r.samples)
      f << nodes << ',' << s.field << ',' << g17(s.t) << ',' << g17(s.sup_ratio) << ',' << g17(s.c1) << ','
        << g17(s.c2) << '\n';
  };
  if (rep.semigroup) rows(*rep.semigroup, rep.semigroup_nodes);
  if (rep.semigroup_fine) rows(*rep.semigroup_fine, rep.semigroup_fine_nodes);
}

}  // namespace

ExperimentReport run_experiment(const ExperimentManifest& m, bool write_files) {
  if (m.runs.empty()) throw std::invalid_argument("manifest has no runs");
  ExperimentReport rep;
  rep.kind = m.kind;
  switch (m.kind) {
    case ExperimentKind::semigroup: do_semigroup(m, rep); break;
    case ExperimentKind::eig: do_eig(m, rep); break;
    default:
      run_all(m, rep);
      if (m.kind == ExperimentKind::oracle_colehopf)
        for (auto& o : rep.runs) add_colehopf(o);
      if (m.kind == ExperimentKind::picard_crosscheck) add_picard(m, rep);
      if (m.kind == ExperimentKind::sweep_kappa) add_sweep(rep);
      break;
  }
  if (!write_files) return rep;

  std::filesystem::create_directories(m.output);
  for (const auto& o : rep.runs) write_run(m.output / o.config.id, o);
  if (!rep.runs.empty()) {
    write_summary(m.output, rep);
    write_plots(m.output, rep);
  }
  if (!rep.verdicts.empty()) write_verdicts_csv(m.output / "verdicts.csv", rep.verdicts);
  if (m.kind == ExperimentKind::sweep_kappa) {
    auto f = open_out(m.output / "uniformity.csv");
    f << "amplitude,run_id,status,prefactor\n";
    for (std::size_t i = 0; i < rep.runs.size(); ++i) {
      const auto& o = rep.runs[i];
      f << g17(m.amplitudes[i]) << ',' << o.config.id << ',' << status_of(o) << ','
        << g17(o.error.empty() ? o.prefactor : kNaN) << '\n';
    }
  }
  if (m.kind == ExperimentKind::semigroup) write_semigroup(m.output, rep);
  return rep;
}

std::vector<Verdict> verify_directory(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (fs::exists(dir / "summary.csv")) {
    std::vector<fs::path> subdirs;
    for (const auto& e : fs::directory_iterator(dir))
      if (e.is_directory() && fs::exists(e.path() / "series.csv")) subdirs.push_back(e.path());
    std::sort(subdirs.begin(), subdirs.end());
    std::vector<Verdict> all;
    for (const auto& d : subdirs)
      for (auto v : verify_directory(d)) {
        v.name = d.filename().string() + "/" + v.name;
        all.push_back(v);
      }
    return all;
  }

  TimeSeries series = read_series_csv(dir / "series.csv");
  if (series.records.empty()) throw FormatError((dir / "series.csv").string() + ": no records");
  const Field snap = read_snapshot(dir / "final.snap");
  const GridPtr grid = snap.grid_ptr();
  auto& recs = series.records;
  recs.back().mean = snap.mean();
  const double lambda = discrete_lambda(grid);
  const double u0_sup = std::max(std::abs(recs.front().M), std::abs(recs.front().m));
  double dt_max = 0;
  for (const auto& r : recs) dt_max = std::max(dt_max, r.dt);

  std::vector<Verdict> vs;
  const double top = std::abs(snap.max() - recs.back().M);
  vs.push_back({"final_state_match", top <= 1e-12 * (1.0 + std::abs(recs.back().M)), top,
                1e-12 * (1.0 + std::abs(recs.back().M))});
  for (auto& v : liapunov_checks(series, u0_sup, dt_max, grid->dim() == 1 ? 0.0 : 1e-10)) vs.push_back(v);
  vs.push_back(bernstein_check(series));
  const double c = terminal_c(series, lambda);
  if (decay_deviation(recs.front(), c) > 1e3 * noise_floor(series, c)) {
    std::optional<DecayFit> fit;
    try {
      fit = fit_decay(series, c);
    } catch (const AnalysisError&) {
    }
    vs.push_back(rate_verdict(fit, lambda, default_rate_tol(*grid)));
  }
  write_verdicts_csv(dir / "verdicts.csv", vs);
  return vs;
}

}  // namespace hjflow
