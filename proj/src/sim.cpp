#include "distfuse/sim.hpp"

#include "distfuse/fusion.hpp"
#include "distfuse/maxent.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

namespace distfuse {

const char* estimator_name(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::kl_centroid: return "kl_centroid";
    case EstimatorKind::l1_barycenter: return "l1_barycenter";
    case EstimatorKind::empirical: return "empirical";
    case EstimatorKind::expert: return "expert";
  }
  return "?";
}

const char* metric_name(MetricKind kind) {
  return kind == MetricKind::kl_to_target ? "kl" : "l1";
}

void SimulationConfig::validate() const {
  if (symptom_count < 1) throw Error("symptom count must be >= 1");
  if (n_max < 1) throw Error("n_max must be >= 1");
  if (replications < 1) throw Error("replications must be >= 1");
  if (threads < 1) throw Error("threads must be >= 1");
  if (!(delta > 0.0 && delta <= 1.0)) throw Error("delta must lie in (0, 1]");
  if (kl_variant == RadiusVariant::conjecture_l1) {
    throw Error("the KL estimator needs a KL radius variant");
  }
  for (double s : sigma2) {
    if (!(s >= 0.0)) throw Error("sigma2 must be non-negative");
  }
  if (sigma2.empty() && !include_exact_prior) throw Error("no priors configured");
  const auto cps = effective_checkpoints();
  for (std::size_t i = 0; i < cps.size(); ++i) {
    if (cps[i] < 1 || cps[i] > n_max) throw Error("checkpoints must lie in [1, n_max]");
    if (i > 0 && cps[i] <= cps[i - 1]) throw Error("checkpoints must be increasing");
  }
}

std::vector<std::int64_t> SimulationConfig::effective_checkpoints() const {
  if (!checkpoints.empty()) return checkpoints;
  static const std::int64_t grid[] = {1, 2, 5, 10, 20, 50, 100, 200, 500, 1000, 2000};
  std::vector<std::int64_t> cps;
  for (std::int64_t c : grid) {
    if (c <= n_max) cps.push_back(c);
  }
  if (cps.empty() || cps.back() != n_max) cps.push_back(n_max);
  return cps;
}

void CoverageConfig::validate() const {
  if (symptom_count < 1) throw Error("symptom count must be >= 1");
  if (n < 1) throw Error("n must be >= 1");
  if (replications < 1) throw Error("replications must be >= 1");
  ConcentrationSpec{divergence, delta, variant}.validate();
  if (sigma2.empty() && !include_exact_prior) throw Error("no priors configured");
}

Distribution sample_target(const OutcomeSpace& space, Rng& rng) {
  Eigen::ArrayXd p(space.cell_count());
  for (Eigen::Index i = 0; i < p.size(); ++i) p[i] = rng.uniform01();
  p /= p.sum();
  return Distribution(space, std::move(p));
}

Distribution noisy_expert_prior(const Distribution& target, double sigma2, Rng& rng) {
  if (!(sigma2 >= 0.0)) throw Error("sigma2 must be non-negative");
  const auto& space = target.space();
  ConstraintSet constraints;
  const double sd = std::sqrt(sigma2);
  for (int j = 0; j < space.symptom_count; ++j) {
    const double noisy = marginal(target, j) + rng.normal(0.0, sd);
    const double clipped = std::clamp(noisy, 0.01, 0.99);
    constraints.marginal_bounds.push_back({j, clipped, clipped});
  }
  return solve_maxent(constraints, space).distribution;
}

namespace {

std::vector<Distribution> build_priors(const Distribution& target,
                                       const std::vector<double>& sigma2,
                                       bool include_exact, Rng& rng) {
  std::vector<Distribution> priors;
  priors.reserve(sigma2.size() + 1);
  for (double s : sigma2) priors.push_back(noisy_expert_prior(target, s, rng));
  if (include_exact) priors.push_back(target);
  return priors;
}

void emit_estimator(std::vector<TrajectoryRecord>& out, int rep, int prior_id,
                    std::int64_t n, EstimatorKind kind, const Distribution& est,
                    const Distribution& target) {
  out.push_back({rep, prior_id, n, kind, MetricKind::kl_to_target,
                 kl_divergence(est, target)});
  out.push_back({rep, prior_id, n, kind, MetricKind::l1_to_target,
                 l1_distance(est, target)});
}

std::vector<TrajectoryRecord> run_replication(const SimulationConfig& config, int rep) {
  const OutcomeSpace space(config.symptom_count);
  const int K = space.cell_count();
  Rng rng = Rng::substream(config.master_seed, static_cast<std::uint64_t>(rep));
  const Distribution target = sample_target(space, rng);
  const auto priors =
      build_priors(target, config.sigma2, config.include_exact_prior, rng);
  const CategoricalSampler sampler(target.probs());
  const auto checkpoints = config.effective_checkpoints();

  std::vector<TrajectoryRecord> out;
  std::vector<std::int64_t> counts(K, 0);
  std::int64_t drawn = 0;
  for (std::int64_t n : checkpoints) {
    for (; drawn < n; ++drawn) ++counts[static_cast<std::size_t>(sampler.sample(rng))];
    const Distribution emp = empirical_distribution(EmpiricalCounts(space, counts));
    const double eps_kl =
        radius({Divergence::kl, config.delta, config.kl_variant}, n, K);
    const double eps_l1 =
        radius({Divergence::l1, config.delta, RadiusVariant::conjecture_l1}, n, K);
    for (std::size_t pi = 0; pi < priors.size(); ++pi) {
      const int prior_id = static_cast<int>(pi) + 1;
      const auto kl_fused = kl_centroid(priors[pi], emp, eps_kl);
      const auto l1_fused = l1_barycenter(priors[pi], emp, eps_l1);
      emit_estimator(out, rep, prior_id, n, EstimatorKind::kl_centroid,
                     kl_fused.estimate, target);
      emit_estimator(out, rep, prior_id, n, EstimatorKind::l1_barycenter,
                     l1_fused.estimate, target);
      emit_estimator(out, rep, prior_id, n, EstimatorKind::empirical, emp, target);
      emit_estimator(out, rep, prior_id, n, EstimatorKind::expert, priors[pi], target);
    }
  }
  return out;
}

}  // namespace

std::vector<TrajectoryRecord> run_trajectory(const SimulationConfig& config) {
  config.validate();
  std::vector<std::vector<TrajectoryRecord>> per_rep(
      static_cast<std::size_t>(config.replications));
  const int threads = std::min(config.threads, config.replications);
  if (threads <= 1) {
    for (int r = 0; r < config.replications; ++r) {
      per_rep[static_cast<std::size_t>(r)] = run_replication(config, r);
    }
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (int r = next.fetch_add(1); r < config.replications; r = next.fetch_add(1)) {
          per_rep[static_cast<std::size_t>(r)] = run_replication(config, r);
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  std::vector<TrajectoryRecord> all;
  for (auto& chunk : per_rep) {
    all.insert(all.end(), chunk.begin(), chunk.end());
  }
  return all;
}

std::string trajectory_csv(const std::vector<TrajectoryRecord>& records) {
  std::ostringstream os;
  os << "rep,prior,n,estimator,metric,value\n";
  char buf[64];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%.17g", r.value);
    os << r.replication << ',' << r.prior_id << ',' << r.n << ','
       << estimator_name(r.estimator) << ',' << metric_name(r.metric) << ',' << buf
       << '\n';
  }
  return os.str();
}

CoverageReport run_coverage(const CoverageConfig& config) {
  config.validate();
  const OutcomeSpace space(config.symptom_count);
  const int K = space.cell_count();
  const ConcentrationSpec spec{config.divergence, config.delta, config.variant};
  const double eps = radius(spec, config.n, K);

  CoverageReport report;
  report.replications = config.replications;
  report.epsilon = eps;
  report.delta = config.delta;
  report.theorem = config.divergence == Divergence::kl ? "theorem2" : "theorem1";
  report.binomial_slack =
      3.0 * std::sqrt(config.delta * (1.0 - config.delta) / config.replications);

  for (int rep = 0; rep < config.replications; ++rep) {
    Rng rng = Rng::substream(config.master_seed, static_cast<std::uint64_t>(rep));
    const Distribution target = sample_target(space, rng);
    const auto priors =
        build_priors(target, config.sigma2, config.include_exact_prior, rng);
    const CategoricalSampler sampler(target.probs());
    std::vector<std::int64_t> counts(K, 0);
    for (std::int64_t i = 0; i < config.n; ++i) {
      ++counts[static_cast<std::size_t>(sampler.sample(rng))];
    }
    const Distribution emp = empirical_distribution(EmpiricalCounts(space, counts));

    const bool event = config.divergence == Divergence::kl
                           ? kl_divergence(emp, target) <= eps
                           : l1_distance(emp, target) <= eps;
    if (!event) {
      ++report.event_failures;
      continue;
    }
    for (const auto& prior : priors) {
      ++report.theorem_checks;
      if (config.divergence == Divergence::kl) {
        const auto fused = kl_centroid(prior, emp, eps);
        const auto diag = theorem2_check(target, prior, emp, eps, fused.estimate);
        const double tol = 1e-9 * std::abs(diag.bound) + 1e-12;
        if (diag.error_kl > diag.bound + tol) ++report.theorem_violations;
        const double expert_err = kl_divergence(prior, target);
        if (diag.error_kl > expert_err + 1e-9 * expert_err + 1e-12) {
          ++report.expert_bound_violations;
        }
      } else {
        const auto fused = l1_barycenter(prior, emp, eps);
        const auto diag = theorem1_check(target, prior, emp, eps, fused.estimate);
        if (diag.error_l1 > diag.bound + 1e-9) ++report.theorem_violations;
      }
    }
  }
  report.event_failure_rate =
      static_cast<double>(report.event_failures) / config.replications;
  return report;
}

}  // namespace distfuse
