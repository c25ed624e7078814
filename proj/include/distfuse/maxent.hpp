#pragma once

#include "distfuse/model.hpp"

#include <optional>
#include <string>

namespace distfuse {

class InfeasibleError : public Error {
public:
  using Error::Error;
};

struct MaxentOptions {
  double feasibility_tol = 1e-8;
  double entropy_tol = 1e-12;     // entropy change per full cycle
  int max_cycles = 10000;
  /// Override of the default start (uniform on the allowed support); must be
  /// strictly positive on the allowed support. Exposed for stability tests.
  std::optional<Eigen::ArrayXd> start;
};

struct MaxentSolution {
  Distribution distribution;
  double entropy = 0.0;           // nats
  int iterations = 0;             // full projection cycles
  bool converged = false;
  double max_constraint_residual = 0.0;
};

struct FeasibilityReport {
  bool feasible = false;
  std::optional<Distribution> witness;
  double max_residual = 0.0;
  std::string detail;
};

/// Maximum-entropy distribution over the constraint set, computed by cyclic
/// KL projections with Dykstra corrections, starting from uniform restricted
/// to the allowed support. Marginal projections are the classical two-block
/// proportional scaling; interval constraints scale to the violated endpoint.
/// Throws InfeasibleError when a pre-check rules the set empty or the
/// residual fails to reach feasibility_tol within max_cycles.
MaxentSolution solve_maxent(const ConstraintSet& constraints, const OutcomeSpace& space,
                            const MaxentOptions& options = {});

/// Product distribution: cell i gets prod_j (m_j if bit j set else 1 - m_j).
Distribution independent_product(const std::vector<double>& marginals,
                                 const OutcomeSpace& space);

/// Phase-1 view of the solver: did the iteration reach a feasible point, and
/// if so which one. Infeasibility is a report outcome here, not an error.
FeasibilityReport check_feasibility(const ConstraintSet& constraints,
                                    const OutcomeSpace& space);

}  // namespace distfuse
