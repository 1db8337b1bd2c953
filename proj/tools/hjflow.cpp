// hjflow: batch driver for u_t - Lap u = F(grad u) with Neumann walls.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "hjflow/config.hpp"
#include "hjflow/experiment.hpp"
#include "hjflow/io.hpp"

namespace {

void print_verdicts(const std::vector<hjflow::Verdict>& vs, const std::string& prefix = "") {
  for (const auto& v : vs)
    std::printf("%s%-24s %s  measured=%.6g  threshold=%.6g\n", prefix.c_str(), v.name.c_str(),
                v.pass ? "PASS" : "FAIL", v.measured, v.threshold);
}

int report(const hjflow::ExperimentReport& rep) {
  for (const auto& o : rep.runs) {
    if (!o.error.empty()) {
      std::printf("%s: error: %s\n", o.config.id.c_str(), o.error.c_str());
      continue;
    }
    std::printf("%s: status=%s lambda=%.10g rate=%.10g c=%.12g prefactor=%.6g\n", o.config.id.c_str(),
                hjflow::to_string(o.result.status).c_str(), o.lambda, o.fit ? o.fit->rate : NAN, o.c.c, o.prefactor);
    print_verdicts(o.verdicts, "  ");
  }
  print_verdicts(rep.verdicts);
  return rep.pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neumann viscous Hamilton-Jacobi solver and verification harness"};
  app.require_subcommand(1);
  std::string cfg_path, dir;

  auto* run = app.add_subcommand("run", "run the experiment described by a config file");
  run->add_option("config", cfg_path, "config file")->required()->check(CLI::ExistingFile);
  auto* sweep = app.add_subcommand("sweep", "amplitude sweep (experiment.kind = sweep-kappa)");
  sweep->add_option("config", cfg_path, "config file")->required()->check(CLI::ExistingFile);
  auto* eig = app.add_subcommand("eig", "second Neumann eigenvalue of the configured grid");
  eig->add_option("config", cfg_path, "config file")->required()->check(CLI::ExistingFile);
  auto* semi = app.add_subcommand("semigroup", "heat semigroup estimates on seeded random fields");
  semi->add_option("config", cfg_path, "config file")->required()->check(CLI::ExistingFile);
  auto* verify = app.add_subcommand("verify", "recompute verdicts for a run or experiment directory");
  verify->add_option("dir", dir, "run directory")->required()->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  try {
    if (verify->parsed()) {
      const auto vs = hjflow::verify_directory(dir);
      print_verdicts(vs);
      for (const auto& v : vs)
        if (!v.pass) return 1;
      return 0;
    }

    auto manifest = hjflow::load_config(cfg_path);
    if (sweep->parsed() && manifest.kind != hjflow::ExperimentKind::sweep_kappa) {
      std::cerr << "error: sweep needs experiment.kind = sweep-kappa\n";
      return 2;
    }
    if (eig->parsed()) manifest.kind = hjflow::ExperimentKind::eig;
    if (semi->parsed()) manifest.kind = hjflow::ExperimentKind::semigroup;
    if (run->parsed() && (manifest.kind == hjflow::ExperimentKind::eig ||
                          manifest.kind == hjflow::ExperimentKind::semigroup)) {
      std::cerr << "error: use the " << hjflow::to_string(manifest.kind) << " subcommand for this config\n";
      return 2;
    }

    const auto rep = hjflow::run_experiment(manifest, !eig->parsed());
    if (rep.eigen) {
      std::printf("lambda_discrete lambda_analytic residual iterations\n");
      std::printf("%.15g %.15g %.3e %d\n", rep.eigen->lambda, rep.eigen_analytic.value_or(NAN),
                  rep.eigen->residual_norm, rep.eigen->iterations);
    }
    if (rep.semigroup)
      std::printf("C1_hat=%.6g C2_hat=%.6g max_sup_ratio=%.17g\n", rep.semigroup->c1_hat, rep.semigroup->c2_hat,
                  rep.semigroup->max_sup_ratio);
    return report(rep);
  } catch (const hjflow::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
