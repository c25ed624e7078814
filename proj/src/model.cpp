#include "distfuse/model.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

namespace distfuse {

namespace {
constexpr int kMaxSymptoms = 20;  // dense vectors only; K <= 2^20
}

OutcomeSpace::OutcomeSpace(int symptoms, std::vector<std::string> symptom_labels)
    : symptom_count(symptoms), labels(std::move(symptom_labels)) {
  if (symptoms < 1 || symptoms > kMaxSymptoms) {
    throw Error("symptom count must be in [1, " + std::to_string(kMaxSymptoms) +
                "], got " + std::to_string(symptoms));
  }
  if (!labels.empty() && static_cast<int>(labels.size()) != symptoms) {
    throw Error("label list must be empty or have one entry per symptom");
  }
}

int OutcomeSpace::active_symptoms(int cell) const {
  return std::popcount(static_cast<unsigned>(cell));
}

std::string OutcomeSpace::bitmask_string(int cell) const {
  std::string s(symptom_count, '0');
  for (int j = 0; j < symptom_count; ++j) {
    if (symptom_present(cell, j)) s[symptom_count - 1 - j] = '1';
  }
  return s;
}

Distribution::Distribution(OutcomeSpace space, Eigen::ArrayXd probs)
    : space_(std::move(space)), probs_(std::move(probs)) {
  if (probs_.size() != space_.cell_count()) {
    throw Error("distribution has " + std::to_string(probs_.size()) +
                " entries, expected " + std::to_string(space_.cell_count()));
  }
  for (Eigen::Index i = 0; i < probs_.size(); ++i) {
    if (!(probs_[i] >= 0.0)) {  // also rejects NaN
      std::ostringstream os;
      os << "probability at cell " << i << " is " << probs_[i];
      throw Error(os.str());
    }
  }
  const double sum = probs_.sum();
  if (std::abs(sum - 1.0) > kSimplexTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "probabilities sum to " << sum << ", not 1 within " << kSimplexTolerance;
    throw Error(os.str());
  }
}

EmpiricalCounts::EmpiricalCounts(OutcomeSpace s, std::vector<std::int64_t> c)
    : space(std::move(s)), counts(std::move(c)) {
  if (static_cast<int>(counts.size()) != space.cell_count()) {
    throw Error("counts vector has " + std::to_string(counts.size()) +
                " entries, expected " + std::to_string(space.cell_count()));
  }
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] < 0) {
      throw Error("count at cell " + std::to_string(i) + " is negative");
    }
    n += counts[i];
  }
}

EmpiricalCounts::EmpiricalCounts(OutcomeSpace s, std::vector<std::int64_t> c,
                                 std::int64_t declared_n)
    : EmpiricalCounts(std::move(s), std::move(c)) {
  if (n != declared_n) {
    throw Error("counts sum to " + std::to_string(n) + " but n = " +
                std::to_string(declared_n) + " was declared");
  }
}

void ConstraintSet::validate(const OutcomeSpace& space) const {
  std::vector<bool> seen(space.symptom_count, false);
  for (const auto& b : marginal_bounds) {
    if (b.symptom < 0 || b.symptom >= space.symptom_count) {
      throw Error("marginal bound refers to symptom " + std::to_string(b.symptom) +
                  ", space has " + std::to_string(space.symptom_count));
    }
    if (seen[b.symptom]) {
      throw Error("more than one marginal bound for symptom " +
                  std::to_string(b.symptom));
    }
    seen[b.symptom] = true;
    if (!(0.0 <= b.lo && b.lo <= b.hi && b.hi <= 1.0)) {
      std::ostringstream os;
      os << "marginal bound for symptom " << b.symptom << " must satisfy 0 <= lo <= hi <= 1, got ["
         << b.lo << ", " << b.hi << "]";
      throw Error(os.str());
    }
  }
  for (int cell : forbidden_cells) {
    if (cell < 0 || cell >= space.cell_count()) {
      throw Error("forbidden cell " + std::to_string(cell) + " out of range [0, " +
                  std::to_string(space.cell_count() - 1) + "]");
    }
  }
  if (min_present && *min_present < 0) {
    throw Error("min_present must be non-negative");
  }
}

Distribution empirical_distribution(const EmpiricalCounts& counts) {
  if (counts.n == 0) throw Error("no samples");
  Eigen::ArrayXd p(counts.counts.size());
  for (std::size_t i = 0; i < counts.counts.size(); ++i) {
    p[static_cast<Eigen::Index>(i)] =
        static_cast<double>(counts.counts[i]) / static_cast<double>(counts.n);
  }
  return Distribution(counts.space, std::move(p));
}

double marginal(const Distribution& dist, int symptom) {
  if (symptom < 0 || symptom >= dist.space().symptom_count) {
    throw Error("symptom index " + std::to_string(symptom) + " out of range");
  }
  double acc = 0.0;
  for (Eigen::Index i = 0; i < dist.size(); ++i) {
    if ((i >> symptom) & 1) acc += dist[i];
  }
  return acc;
}

namespace {
void require_same_space(const Distribution& p, const Distribution& q) {
  if (!(p.space() == q.space())) {
    throw Error("distributions live on different outcome spaces (K = " +
                std::to_string(p.size()) + " vs " + std::to_string(q.size()) + ")");
  }
}
}  // namespace

double l1_distance(const Distribution& p, const Distribution& q) {
  require_same_space(p, q);
  return l1_distance(p.probs(), q.probs());
}

double kl_divergence(const Distribution& p, const Distribution& q) {
  require_same_space(p, q);
  return kl_divergence(p.probs(), q.probs());
}

double entropy(const Distribution& p) { return entropy(p.probs()); }

double l1_distance(const Eigen::Ref<const Eigen::ArrayXd>& p,
                   const Eigen::Ref<const Eigen::ArrayXd>& q) {
  return (p - q).abs().sum();
}

double kl_divergence(const Eigen::Ref<const Eigen::ArrayXd>& p,
                     const Eigen::Ref<const Eigen::ArrayXd>& q) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double pi = p[i];
    if (pi > 0.0) {
      const double qi = q[i];
      if (qi <= 0.0) return std::numeric_limits<double>::infinity();
      acc += pi * std::log(pi / qi);
    }
  }
  return acc;
}

double entropy(const Eigen::Ref<const Eigen::ArrayXd>& p) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) acc -= p[i] * std::log(p[i]);
  }
  return acc;
}

}  // namespace distfuse
