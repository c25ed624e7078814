#pragma once

#include "distfuse/concentration.hpp"
#include "distfuse/model.hpp"
#include "distfuse/rng.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace distfuse {

enum class EstimatorKind { kl_centroid, l1_barycenter, empirical, expert };
enum class MetricKind { kl_to_target, l1_to_target };

const char* estimator_name(EstimatorKind kind);
const char* metric_name(MetricKind kind);

struct TrajectoryRecord {
  int replication = 0;
  int prior_id = 0;       // 1..#sigma2 noisy priors, then the exact prior
  std::int64_t n = 0;
  EstimatorKind estimator = EstimatorKind::empirical;
  MetricKind metric = MetricKind::kl_to_target;
  double value = 0.0;
};

struct SimulationConfig {
  int symptom_count = 7;
  std::vector<double> sigma2 = {0.1, 0.2, 0.4};  // marginal-noise variances
  bool include_exact_prior = true;
  double delta = 1e-6;
  /// Radius variant for the KL estimator; the L1 estimator always uses the
  /// conjecture L1 radius (no exact L1 bound exists here).
  RadiusVariant kl_variant = RadiusVariant::conjecture_kl;
  std::int64_t n_max = 2000;
  std::vector<std::int64_t> checkpoints;  // empty -> default geometric grid
  int replications = 1;
  std::uint64_t master_seed = 0;
  int threads = 1;

  void validate() const;
  std::vector<std::int64_t> effective_checkpoints() const;
  int prior_count() const {
    return static_cast<int>(sigma2.size()) + (include_exact_prior ? 1 : 0);
  }
};

struct CoverageConfig {
  int symptom_count = 2;
  std::int64_t n = 50;
  double delta = 0.1;
  int replications = 2000;
  Divergence divergence = Divergence::kl;
  RadiusVariant variant = RadiusVariant::exact_kl;
  std::vector<double> sigma2 = {0.1, 0.2, 0.4};
  bool include_exact_prior = true;
  std::uint64_t master_seed = 0;

  void validate() const;
};

struct CoverageReport {
  std::int64_t replications = 0;
  double epsilon = 0.0;
  double delta = 0.0;
  std::string theorem;                  // "theorem1" (L1) or "theorem2" (KL)
  std::int64_t event_failures = 0;      // concentration event failed
  double event_failure_rate = 0.0;
  double binomial_slack = 0.0;          // 3 sqrt(delta (1-delta) / reps)
  std::int64_t theorem_checks = 0;      // prior instances with the event held
  std::int64_t theorem_violations = 0;  // stated bound exceeded, conditional
  std::int64_t expert_bound_violations = 0;  // KL only: error above KL(expert||target)
};

/// Normalized vector of K i.i.d. uniforms; strictly positive.
Distribution sample_target(const OutcomeSpace& space, Rng& rng);

/// Marginals of the target plus N(0, sigma2) noise, clipped to [0.01, 0.99],
/// fed to the maxent solver as equality constraints (which, marginals-only,
/// is the independent product).
Distribution noisy_expert_prior(const Distribution& target, double sigma2, Rng& rng);

/// One record per (replication, prior, checkpoint, estimator, metric).
/// Deterministic for a fixed config: replication r uses Rng::substream(seed, r)
/// and rows are emitted in replication order regardless of thread count.
std::vector<TrajectoryRecord> run_trajectory(const SimulationConfig& config);

/// Long-format CSV: rep,prior,n,estimator,metric,value.
std::string trajectory_csv(const std::vector<TrajectoryRecord>& records);

CoverageReport run_coverage(const CoverageConfig& config);

}  // namespace distfuse
