#include <doctest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "hjflow/config.hpp"
#include "hjflow/experiment.hpp"
#include "hjflow/io.hpp"

using namespace hjflow;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const char* env = std::getenv("HJFLOW_TEST_TMP");
  const fs::path root = env ? fs::path(env) : fs::temp_directory_path() / "hjflow-tests";
  const fs::path p = root / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

const char* kSmallRun = R"(
[experiment]
kind = single
id = small

[grid]
kind = interval
n = 101

[F]
kind = power
p = 2

[initial]
kind = cosine
amplitude = 0.3

[time]
dt_max = 1e-3
t_end = 2
save_stride = 5
)";

}  // namespace

TEST_CASE("empty config falls back to defaults") {
  const auto m = parse_config("");
  CHECK(m.kind == ExperimentKind::single);
  CHECK(m.id == "experiment");
  CHECK(m.output == fs::path("out/experiment"));
  REQUIRE(m.runs.size() == 1);
  const auto& r = m.runs[0];
  CHECK(r.grid.kind == GridKind::interval);
  CHECK(r.grid.n == 101);
  CHECK(r.F.kind == NonlinearityKind::power);
  CHECK(r.F.p == 2.0);
  CHECK(r.initial.kind == InitialKind::cosine);
  CHECK(r.dt_max == 1e-3);
  CHECK(r.cfl == 0.25);
  CHECK(r.t_end == 1.0);
  CHECK(m.analysis.bernstein_t0 == 0.05);
  CHECK(m.analysis.check_rate);
}

TEST_CASE("section and dotted keys are equivalent") {
  const auto a = parse_config("[F]\np = 3\n[grid]\nn = 51\n");
  const auto b = parse_config("F.p = 3\ngrid.n = 51\n");
  CHECK(a.runs[0].F.p == 3.0);
  CHECK(b.runs[0].F.p == 3.0);
  CHECK(config_hash(a.runs[0]) == config_hash(b.runs[0]));
}

TEST_CASE("config errors") {
  SUBCASE("exponent below one") {
    CHECK_THROWS_WITH_AS(parse_config("[F]\np = 0.5\n"), doctest::Contains("F.p"), ConfigError);
  }
  SUBCASE("unknown key") {
    CHECK_THROWS_WITH_AS(parse_config("[grid]\nfoo = 1\n"), doctest::Contains("grid.foo"), ConfigError);
  }
  SUBCASE("malformed line reports its number") {
    try {
      (void)parse_config("[grid]\nn = 11\nkind interval\n");
      FAIL("expected a parse error");
    } catch (const ConfigError& e) {
      CHECK(e.line() == 3);
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
  }
  SUBCASE("bad number") {
    CHECK_THROWS_WITH_AS(parse_config("[time]\nt_end = soon\n"), doctest::Contains("time.t_end"), ConfigError);
  }
  SUBCASE("duplicate key") {
    CHECK_THROWS_WITH_AS(parse_config("F.p = 3\n[F]\nq = 2\np = 4\n"), doctest::Contains("duplicate"), ConfigError);
  }
  SUBCASE("sweep without amplitudes") {
    CHECK_THROWS_AS(parse_config("[experiment]\nkind = sweep-kappa\n"), ConfigError);
  }
  SUBCASE("Cole-Hopf oracle needs the quadratic") {
    CHECK_THROWS_AS(parse_config("[experiment]\nkind = oracle-colehopf\n[F]\np = 3\n"), ConfigError);
  }
  SUBCASE("masked grid without spacing") {
    CHECK_THROWS_WITH_AS(parse_config("[grid]\nkind = masked\nrects = 0 0 1 1\n"), doctest::Contains("grid.h"),
                         ConfigError);
  }
}

TEST_CASE("sweep expands into one run per amplitude") {
  const auto m = parse_config(
      "[experiment]\nkind = sweep-kappa\nid = sw\n[sweep]\namplitudes = 0.05, 0.1, 0.2, 0.4, 0.8\n");
  REQUIRE(m.runs.size() == 5);
  CHECK(m.amplitudes.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(m.runs[i].initial.amplitude == m.amplitudes[i]);
    CHECK(m.runs[i].id == "sw-a" + std::to_string(i));
  }
  CHECK_THROWS_AS(parse_config("[experiment]\nkind = sweep-kappa\n[sweep]\namplitudes = 0.2, 0.1\n"), ConfigError);
}

TEST_CASE("masked grid from rectangles") {
  const auto m = parse_config("[grid]\nkind = masked\nh = 0.1\nrects = 0 0 1 1; 1 0 2 0.5\n");
  const auto g = m.runs[0].grid.build();
  CHECK(g->kind() == GridKind::masked);
  CHECK(g->measure() == doctest::Approx(1.5));
}

TEST_CASE("worker pool") {
  std::vector<std::atomic<int>> hits(37);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; }, 4);
  for (auto& h : hits) CHECK(h.load() == 1);
  CHECK(worker_count() >= 1);
}

TEST_CASE("runs are deterministic byte for byte") {
  auto m = parse_config(kSmallRun);
  m.output = scratch("det-a");
  run_experiment(m, true);
  const fs::path a = m.output;
  m.output = scratch("det-b");
  run_experiment(m, true);
  const fs::path b = m.output;
  for (const char* f : {"small/series.csv", "small/final.snap", "small/verdicts.csv", "summary.csv"}) {
    CAPTURE(f);
    CHECK(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }
}

TEST_CASE("a guarded run does not spoil its sweep") {
  auto m = parse_config(R"(
[experiment]
kind = sweep-kappa
id = guard
[grid]
n = 101
[F]
p = 2
[time]
dt_max = 1e-3
t_end = 0.5
blowup_guard = 2
[sweep]
amplitudes = 0.1, 0.2, 1.0
)");
  m.output = scratch("guard");
  const auto rep = run_experiment(m, true);
  REQUIRE(rep.runs.size() == 3);
  CHECK(rep.runs[0].result.status == RunStatus::completed);
  CHECK(rep.runs[1].result.status == RunStatus::completed);
  CHECK(rep.runs[2].result.status == RunStatus::gradient_guard);
  CHECK(rep.runs[0].pass());
  CHECK_FALSE(rep.runs[2].pass());
  const auto uni = slurp(m.output / "uniformity.csv");
  CHECK(uni.find("gradient-guard") != std::string::npos);
  CHECK(fs::exists(m.output / "guard-a0" / "series.csv"));
}

TEST_CASE("verify reproduces the stored verdicts") {
  auto m = parse_config(kSmallRun);
  m.output = scratch("verify");
  const auto rep = run_experiment(m, true);
  REQUIRE(rep.pass());
  const auto vs = verify_directory(m.output / "small");
  REQUIRE_FALSE(vs.empty());
  for (const auto& v : vs) {
    CAPTURE(v.name);
    CAPTURE(v.measured);
    CHECK(v.pass);
  }
  const auto stored = read_verdicts_csv(m.output / "small" / "verdicts.csv");
  CHECK(stored.size() == vs.size());
  const auto top = verify_directory(m.output);
  CHECK(top.size() == vs.size());
  CHECK(top.front().name.rfind("small/", 0) == 0);
}

TEST_CASE("series and snapshot round trips") {
  const fs::path dir = scratch("io");
  const Rect ls[] = {{0, 0, 1, 1}, {1, 0, 2, 0.5}};
  const auto g = Grid::union_of_rectangles(ls, 0.125);
  Field u(g);
  for (std::size_t k = 0; k < u.size(); ++k) u[k] = std::sin(0.37 * k) / 3.0;
  write_snapshot(dir / "u.snap", u);
  const auto back = read_snapshot(dir / "u.snap");
  CHECK(back.grid() == *g);
  CHECK(back.data() == u.data());

  TimeSeries s;
  for (int k = 0; k < 4; ++k) {
    Record r;
    r.t = 0.1 * k;
    r.M = 1.0 / 3.0 + k;
    r.m = -r.M;
    r.Lut = 1e-300;
    r.grad_sup = 2.5;
    r.xnorm_dev = 1.0 / 7.0;
    r.meanF = -0.0;
    r.sup_h = 3.25;
    r.dt = 1e-3;
    s.records.push_back(r);
  }
  write_series_csv(dir / "series.csv", s);
  const auto t = read_series_csv(dir / "series.csv");
  REQUIRE(t.records.size() == 4);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(t.records[k].t == s.records[k].t);
    CHECK(t.records[k].M == s.records[k].M);
    CHECK(t.records[k].Lut == s.records[k].Lut);
    CHECK(t.records[k].xnorm_dev == s.records[k].xnorm_dev);
  }
  CHECK(slurp(dir / "series.csv").rfind(std::string(kSeriesColumns) + "\n", 0) == 0);

  std::ofstream(dir / "bad.csv") << "t,M\n1,2\n";
  CHECK_THROWS_AS(read_series_csv(dir / "bad.csv"), FormatError);
}

TEST_CASE("eig experiment") {
  auto m = parse_config("[experiment]\nkind = eig\n[grid]\nkind = rectangle\nlx = 2\nly = 1\nnx = 41\nny = 21\n");
  const auto rep = run_experiment(m, false);
  REQUIRE(rep.eigen);
  REQUIRE(rep.eigen_analytic);
  CHECK(rep.eigen->lambda == doctest::Approx(*discrete_lambda_closed_form(*m.runs[0].grid.build())).epsilon(1e-8));
  CHECK(*rep.eigen_analytic == doctest::Approx(2.4674011002723395));
  CHECK(rep.pass());
}
