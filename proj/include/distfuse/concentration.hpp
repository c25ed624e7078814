#pragma once

#include <cstdint>

namespace distfuse {

enum class Divergence { kl, l1 };

enum class RadiusVariant { exact_kl, conjecture_kl, conjecture_l1 };

/// Calibration of the data-consistency radius: with probability at least
/// 1 - delta the empirical distribution of n samples lies within the radius
/// of the truth, in the chosen divergence.
struct ConcentrationSpec {
  Divergence divergence = Divergence::kl;
  double delta = 1e-6;
  RadiusVariant variant = RadiusVariant::conjecture_kl;

  void validate() const;
};

/// log G_n where G_n = 3 * (1 + sum_{i=1}^{K-2} (e^3 n / (2 pi i))^(i/2)).
/// Evaluated by log-sum-exp over t_i = (i/2)(3 + log n - log(2 pi i)); the raw
/// terms overflow doubles long before K = 512, the log-space sum never does.
/// K = 2 is the empty sum: G_n = 3.
double log_gn(std::int64_t n, int cell_count);

/// (-log delta + log G_n) / n.
double epsilon_kl_exact(std::int64_t n, int cell_count, double delta);

/// (-log delta + (n/2) log(1 + (K-1)/n)) / n.
double epsilon_kl_conjecture(std::int64_t n, int cell_count, double delta);

/// sqrt of epsilon_kl_conjecture.
double epsilon_l1_conjecture(std::int64_t n, int cell_count, double delta);

double radius(const ConcentrationSpec& spec, std::int64_t n, int cell_count);

}  // namespace distfuse
