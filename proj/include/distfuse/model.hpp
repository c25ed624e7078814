#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace distfuse {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Binary outcome space over J symptoms, K = 2^J cells.
///
/// Cell encoding is fixed project-wide: bit j of a cell index is 1 iff
/// symptom j is present, so cell 0 is the all-absent combination and
/// cell K-1 has every symptom present.
struct OutcomeSpace {
  int symptom_count = 0;                // J
  std::vector<std::string> labels;      // empty or exactly J entries

  OutcomeSpace() = default;
  explicit OutcomeSpace(int symptoms, std::vector<std::string> symptom_labels = {});

  int cell_count() const { return 1 << symptom_count; }

  bool symptom_present(int cell, int symptom) const {
    return (cell >> symptom) & 1;
  }
  int active_symptoms(int cell) const;

  /// Binary string of length J, bit J-1 leftmost ("10" = symptom 2 only).
  std::string bitmask_string(int cell) const;

  friend bool operator==(const OutcomeSpace& a, const OutcomeSpace& b) {
    return a.symptom_count == b.symptom_count;
  }
};

/// A point on the K-simplex. Entries must be non-negative and sum to 1
/// within kSimplexTolerance; anything else is rejected, never renormalized.
class Distribution {
public:
  static constexpr double kSimplexTolerance = 1e-9;

  Distribution(OutcomeSpace space, Eigen::ArrayXd probs);

  const OutcomeSpace& space() const { return space_; }
  const Eigen::ArrayXd& probs() const { return probs_; }
  double operator[](Eigen::Index i) const { return probs_[i]; }
  Eigen::Index size() const { return probs_.size(); }

private:
  OutcomeSpace space_;
  Eigen::ArrayXd probs_;
};

/// Observed cell counts from n i.i.d. samples.
struct EmpiricalCounts {
  OutcomeSpace space;
  std::vector<std::int64_t> counts;     // one entry per cell
  std::int64_t n = 0;                   // invariant: n == sum(counts)

  EmpiricalCounts(OutcomeSpace space, std::vector<std::int64_t> counts);
  /// Validates the declared total against the column sum.
  EmpiricalCounts(OutcomeSpace space, std::vector<std::int64_t> counts,
                  std::int64_t declared_n);
};

struct MarginalBound {
  int symptom = 0;
  double lo = 0.0;
  double hi = 1.0;                      // lo == hi expresses equality
};

/// Expert knowledge: interval bounds on symptom marginals, cells declared
/// impossible, and an optional minimum count of present symptoms.
struct ConstraintSet {
  std::vector<MarginalBound> marginal_bounds;   // at most one per symptom
  std::vector<int> forbidden_cells;
  std::optional<int> min_present;

  void validate(const OutcomeSpace& space) const;
  bool empty() const {
    return marginal_bounds.empty() && forbidden_cells.empty() && !min_present;
  }
};

/// counts[i] / n. Throws on n == 0.
Distribution empirical_distribution(const EmpiricalCounts& counts);

/// P[symptom present] = sum of probs over cells with that bit set.
double marginal(const Distribution& dist, int symptom);

double l1_distance(const Distribution& p, const Distribution& q);

/// sum p_i log(p_i/q_i), with 0 log(0/q) = 0 and +infinity as soon as
/// some p_i > 0 has q_i = 0. Natural logs throughout.
double kl_divergence(const Distribution& p, const Distribution& q);

/// Shannon entropy in nats, 0 log 0 = 0.
double entropy(const Distribution& p);

// Low-level forms on raw Eigen arrays; no shape or simplex validation.
double l1_distance(const Eigen::Ref<const Eigen::ArrayXd>& p,
                   const Eigen::Ref<const Eigen::ArrayXd>& q);
double kl_divergence(const Eigen::Ref<const Eigen::ArrayXd>& p,
                     const Eigen::Ref<const Eigen::ArrayXd>& q);
double entropy(const Eigen::Ref<const Eigen::ArrayXd>& p);

}  // namespace distfuse
