#include "cli.hpp"

#include "distfuse/concentration.hpp"
#include "distfuse/fusion.hpp"
#include "distfuse/io.hpp"
#include "distfuse/maxent.hpp"
#include "distfuse/model.hpp"
#include "distfuse/sim.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace distfuse::cli {

namespace {

using nlohmann::json;

RadiusVariant kl_variant_from(const std::string& variant) {
  if (variant == "exact") return RadiusVariant::exact_kl;
  if (variant == "conjecture") return RadiusVariant::conjecture_kl;
  throw CLI::ValidationError("--variant", "expected 'exact' or 'conjecture'");
}

struct ManifestWriter {
  std::string subcommand;
  json parameters;
  std::map<std::string, std::string> input_digests;
  std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

  void add_input(const std::string& path) { input_digests[path] = io::file_digest(path); }

  void write(const std::string& out_path) const {
    json j;
    j["schema"] = 1;
    j["tool"] = "distfuse";
    j["version"] = kVersion;
    j["subcommand"] = subcommand;
    j["parameters"] = parameters;
    j["inputs"] = input_digests;
    j["duration_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    io::write_text_atomic(out_path + ".manifest.json", j.dump(2) + "\n");
  }
};

struct MaxentArgs {
  std::string constraints, out, report;
};

void run_maxent(const MaxentArgs& a) {
  ManifestWriter manifest{"maxent",
                          {{"constraints", a.constraints}, {"out", a.out}, {"report", a.report}},
                          {}};
  manifest.add_input(a.constraints);
  const auto [space, constraints] = io::read_constraints_json(a.constraints);
  const MaxentSolution solution = solve_maxent(constraints, space);
  io::write_text_atomic(a.out, io::distribution_csv(solution.distribution));
  if (!a.report.empty()) {
    io::write_text_atomic(a.report, io::maxent_report_json(solution).dump(2) + "\n");
  }
  manifest.write(a.out);
}

struct RadiusArgs {
  std::int64_t n = 0;
  int k = 0;
  double delta = 1e-6;
  std::string divergence = "kl", variant = "conjecture";
};

void run_radius(const RadiusArgs& a) {
  ConcentrationSpec spec;
  spec.delta = a.delta;
  if (a.divergence == "kl") {
    spec.divergence = Divergence::kl;
    spec.variant = kl_variant_from(a.variant);
  } else {
    spec.divergence = Divergence::l1;
    if (a.variant != "conjecture") {
      throw CLI::ValidationError("--variant", "the l1 radius only has a conjecture variant");
    }
    spec.variant = RadiusVariant::conjecture_l1;
  }
  std::cout << io::format_double(radius(spec, a.n, a.k)) << "\n";
}

struct FuseArgs {
  std::string expert, counts, method = "kl", variant = "conjecture";
  double delta = 1e-6;
  std::string out, report;
  std::optional<std::int64_t> declared_n;
};

void run_fuse(const FuseArgs& a) {
  ManifestWriter manifest{"fuse",
                          {{"expert", a.expert},
                           {"counts", a.counts},
                           {"method", a.method},
                           {"variant", a.variant},
                           {"delta", a.delta},
                           {"out", a.out},
                           {"report", a.report}},
                          {}};
  if (a.declared_n) manifest.parameters["n"] = *a.declared_n;
  manifest.add_input(a.expert);
  manifest.add_input(a.counts);

  const Distribution expert = io::read_distribution_csv(a.expert);
  const EmpiricalCounts counts = io::read_counts_csv(a.counts, a.declared_n);
  if (!(counts.space == expert.space())) {
    throw Error("'" + a.counts + "' has " + std::to_string(counts.space.cell_count()) +
                " cells but '" + a.expert + "' has " +
                std::to_string(expert.space().cell_count()));
  }
  const Distribution emp = empirical_distribution(counts);

  ConcentrationSpec spec;
  spec.delta = a.delta;
  if (a.method == "kl") {
    spec.divergence = Divergence::kl;
    spec.variant = kl_variant_from(a.variant);
  } else {
    spec.divergence = Divergence::l1;
    if (a.variant != "conjecture") {
      throw CLI::ValidationError("--variant", "the l1 method only has a conjecture radius");
    }
    spec.variant = RadiusVariant::conjecture_l1;
  }
  const double eps = radius(spec, counts.n, expert.space().cell_count());
  const FusionReport report = a.method == "kl" ? kl_centroid(expert, emp, eps)
                                               : l1_barycenter(expert, emp, eps);
  io::write_text_atomic(a.out, io::distribution_csv(report.estimate));
  if (!a.report.empty()) {
    io::write_text_atomic(a.report,
                          io::fusion_report_json(report, counts.n).dump(2) + "\n");
  }
  manifest.write(a.out);
}

struct SimulateArgs {
  SimulationConfig config;
  std::string variant = "conjecture";
  std::string out;
  bool no_exact_prior = false;
};

void run_simulate(SimulateArgs& a) {
  a.config.kl_variant = kl_variant_from(a.variant);
  a.config.include_exact_prior = !a.no_exact_prior;
  json params{{"symptoms", a.config.symptom_count},
              {"sigma2", a.config.sigma2},
              {"delta", a.config.delta},
              {"n_max", a.config.n_max},
              {"reps", a.config.replications},
              {"seed", a.config.master_seed},
              {"variant", a.variant},
              {"exact_prior", a.config.include_exact_prior},
              {"checkpoints", a.config.effective_checkpoints()},
              {"threads", a.config.threads},
              {"out", a.out}};
  ManifestWriter manifest{"simulate", params, {}};
  const auto records = run_trajectory(a.config);
  io::write_text_atomic(a.out, trajectory_csv(records));
  manifest.write(a.out);
}

struct CoverageArgs {
  CoverageConfig config;
  std::string divergence = "kl", variant = "exact";
  std::string out;
  bool no_exact_prior = false;
};

void run_coverage_cmd(CoverageArgs& a) {
  a.config.include_exact_prior = !a.no_exact_prior;
  if (a.divergence == "kl") {
    a.config.divergence = Divergence::kl;
    a.config.variant = kl_variant_from(a.variant);
  } else {
    a.config.divergence = Divergence::l1;
    if (a.variant != "conjecture") {
      throw CLI::ValidationError("--variant", "the l1 radius only has a conjecture variant");
    }
    a.config.variant = RadiusVariant::conjecture_l1;
  }
  json params{{"symptoms", a.config.symptom_count},
              {"n", a.config.n},
              {"delta", a.config.delta},
              {"reps", a.config.replications},
              {"divergence", a.divergence},
              {"variant", a.variant},
              {"seed", a.config.master_seed},
              {"sigma2", a.config.sigma2},
              {"exact_prior", a.config.include_exact_prior},
              {"out", a.out}};
  ManifestWriter manifest{"coverage", params, {}};
  const CoverageReport report = run_coverage(a.config);
  io::write_text_atomic(a.out, io::coverage_report_json(report).dump(2) + "\n");
  manifest.write(a.out);
}

}  // namespace

int dispatch(int argc, const char* const* argv) {
  CLI::App app{"Expert-prior / empirical-data fusion for discrete distributions"};
  app.set_version_flag("--version", std::string("distfuse ") + kVersion);
  app.require_subcommand(1);

  MaxentArgs maxent_args;
  auto* cmd_maxent = app.add_subcommand("maxent", "Maximum-entropy prior from constraints");
  cmd_maxent->add_option("--constraints", maxent_args.constraints, "Constraint set JSON")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_maxent->add_option("--out", maxent_args.out, "Output distribution CSV")->required();
  cmd_maxent->add_option("--report", maxent_args.report, "Solver report JSON");

  RadiusArgs radius_args;
  auto* cmd_radius = app.add_subcommand("radius", "Concentration radius epsilon_n");
  cmd_radius->add_option("--n", radius_args.n, "Sample count")->required();
  cmd_radius->add_option("--k", radius_args.k, "Cell count K")->required();
  cmd_radius->add_option("--delta", radius_args.delta, "Failure probability delta");
  cmd_radius->add_option("--divergence", radius_args.divergence, "kl or l1")
      ->check(CLI::IsMember({"kl", "l1"}));
  cmd_radius->add_option("--variant", radius_args.variant, "exact or conjecture")
      ->check(CLI::IsMember({"exact", "conjecture"}));

  FuseArgs fuse_args;
  auto* cmd_fuse = app.add_subcommand("fuse", "Fuse an expert prior with counts");
  cmd_fuse->add_option("--expert", fuse_args.expert, "Expert prior CSV")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_fuse->add_option("--counts", fuse_args.counts, "Counts CSV")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_fuse->add_option("--method", fuse_args.method, "kl or l1")
      ->check(CLI::IsMember({"kl", "l1"}));
  cmd_fuse->add_option("--variant", fuse_args.variant, "Radius variant")
      ->check(CLI::IsMember({"exact", "conjecture"}));
  cmd_fuse->add_option("--delta", fuse_args.delta, "Failure probability delta");
  cmd_fuse->add_option("--out", fuse_args.out, "Output estimate CSV")->required();
  cmd_fuse->add_option("--report", fuse_args.report, "Fusion report JSON");
  std::int64_t declared_n = -1;
  auto* n_opt = cmd_fuse->add_option("--n", declared_n, "Declared sample total (validated)");

  SimulateArgs sim_args;
  auto* cmd_sim = app.add_subcommand("simulate", "Error trajectories on synthetic targets");
  cmd_sim->add_option("--symptoms", sim_args.config.symptom_count, "Symptom count J");
  cmd_sim->add_option("--sigma2", sim_args.config.sigma2, "Marginal-noise variances")
      ->delimiter(',');
  cmd_sim->add_option("--delta", sim_args.config.delta, "Failure probability delta");
  cmd_sim->add_option("--n-max", sim_args.config.n_max, "Largest sample size");
  cmd_sim->add_option("--reps", sim_args.config.replications, "Replications");
  cmd_sim->add_option("--seed", sim_args.config.master_seed, "Master seed");
  cmd_sim->add_option("--variant", sim_args.variant, "KL radius variant")
      ->check(CLI::IsMember({"exact", "conjecture"}));
  cmd_sim->add_option("--checkpoints", sim_args.config.checkpoints, "Recording points")
      ->delimiter(',');
  cmd_sim->add_flag("--no-exact-prior", sim_args.no_exact_prior,
                    "Skip the prior equal to the target");
  cmd_sim->add_option("--threads", sim_args.config.threads, "Worker threads");
  cmd_sim->add_option("--out", sim_args.out, "Trajectory CSV")->required();

  CoverageArgs cov_args;
  auto* cmd_cov = app.add_subcommand("coverage", "Monte-Carlo check of the calibration");
  cmd_cov->add_option("--symptoms", cov_args.config.symptom_count, "Symptom count J");
  cmd_cov->add_option("--n", cov_args.config.n, "Sample count per replication");
  cmd_cov->add_option("--delta", cov_args.config.delta, "Failure probability delta");
  cmd_cov->add_option("--reps", cov_args.config.replications, "Replications");
  cmd_cov->add_option("--divergence", cov_args.divergence, "kl or l1")
      ->check(CLI::IsMember({"kl", "l1"}));
  cmd_cov->add_option("--variant", cov_args.variant, "Radius variant")
      ->check(CLI::IsMember({"exact", "conjecture"}));
  cmd_cov->add_option("--seed", cov_args.config.master_seed, "Master seed");
  cmd_cov->add_option("--sigma2", cov_args.config.sigma2, "Marginal-noise variances")
      ->delimiter(',');
  cmd_cov->add_flag("--no-exact-prior", cov_args.no_exact_prior,
                    "Skip the prior equal to the target");
  cmd_cov->add_option("--out", cov_args.out, "Coverage report JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::cerr << app.help() << "\n";
    return 2;
  }

  try {
    if (cmd_maxent->parsed()) {
      run_maxent(maxent_args);
    } else if (cmd_radius->parsed()) {
      run_radius(radius_args);
    } else if (cmd_fuse->parsed()) {
      if (n_opt->count() > 0) fuse_args.declared_n = declared_n;
      run_fuse(fuse_args);
    } else if (cmd_sim->parsed()) {
      run_simulate(sim_args);
    } else if (cmd_cov->parsed()) {
      run_coverage_cmd(cov_args);
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace distfuse::cli
