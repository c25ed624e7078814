#include "distfuse/concentration.hpp"

#include "distfuse/model.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace distfuse {

namespace {

void check_args(std::int64_t n, int cell_count, double delta) {
  if (n < 1) throw Error("sample count must be >= 1, got " + std::to_string(n));
  if (cell_count < 2) {
    throw Error("cell count must be >= 2, got " + std::to_string(cell_count));
  }
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw Error("delta must lie in (0, 1], got " + std::to_string(delta));
  }
}

}  // namespace

void ConcentrationSpec::validate() const {
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw Error("delta must lie in (0, 1], got " + std::to_string(delta));
  }
  const bool kl_variant =
      variant == RadiusVariant::exact_kl || variant == RadiusVariant::conjecture_kl;
  if (kl_variant != (divergence == Divergence::kl)) {
    throw Error("radius variant does not match the divergence");
  }
}

double log_gn(std::int64_t n, int cell_count) {
  const double logn = std::log(static_cast<double>(n));
  const double log2pi = std::log(2.0 * std::numbers::pi);
  // max over the implicit exp(0) term and t_1..t_{K-2}
  double tmax = 0.0;
  for (int i = 1; i <= cell_count - 2; ++i) {
    const double t = 0.5 * i * (3.0 + logn - log2pi - std::log(static_cast<double>(i)));
    if (t > tmax) tmax = t;
  }
  double acc = std::exp(-tmax);  // the leading 1
  for (int i = 1; i <= cell_count - 2; ++i) {
    const double t = 0.5 * i * (3.0 + logn - log2pi - std::log(static_cast<double>(i)));
    acc += std::exp(t - tmax);
  }
  return std::log(3.0) + tmax + std::log(acc);
}

double epsilon_kl_exact(std::int64_t n, int cell_count, double delta) {
  check_args(n, cell_count, delta);
  return (-std::log(delta) + log_gn(n, cell_count)) / static_cast<double>(n);
}

double epsilon_kl_conjecture(std::int64_t n, int cell_count, double delta) {
  check_args(n, cell_count, delta);
  const double nd = static_cast<double>(n);
  return (-std::log(delta) + 0.5 * nd * std::log1p((cell_count - 1) / nd)) / nd;
}

double epsilon_l1_conjecture(std::int64_t n, int cell_count, double delta) {
  return std::sqrt(epsilon_kl_conjecture(n, cell_count, delta));
}

double radius(const ConcentrationSpec& spec, std::int64_t n, int cell_count) {
  spec.validate();
  switch (spec.variant) {
    case RadiusVariant::exact_kl:
      return epsilon_kl_exact(n, cell_count, spec.delta);
    case RadiusVariant::conjecture_kl:
      return epsilon_kl_conjecture(n, cell_count, spec.delta);
    case RadiusVariant::conjecture_l1:
      return epsilon_l1_conjecture(n, cell_count, spec.delta);
  }
  throw Error("unknown radius variant");
}

}  // namespace distfuse
