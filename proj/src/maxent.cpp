#include "distfuse/maxent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace distfuse {

namespace {

constexpr double kMassFloor = 1e-300;

struct Workspace {
  int K = 0;
  std::vector<bool> allowed;
  int allowed_count = 0;
  std::vector<MarginalBound> bounds;   // only those that still need iteration
  std::string precheck_failure;        // non-empty -> provably infeasible
};

// Zero out cells ruled impossible by forbidden_cells, min_present and
// degenerate marginal bounds (hi = 0 forces the bit-set half-space to zero,
// lo = 1 the bit-unset one), then pre-check that each remaining marginal
// bound can be met at all on the surviving support.
Workspace prepare(const ConstraintSet& constraints, const OutcomeSpace& space) {
  Workspace ws;
  ws.K = space.cell_count();
  ws.allowed.assign(ws.K, true);
  for (int cell : constraints.forbidden_cells) ws.allowed[cell] = false;
  if (constraints.min_present) {
    for (int i = 0; i < ws.K; ++i) {
      if (space.active_symptoms(i) < *constraints.min_present) ws.allowed[i] = false;
    }
  }
  for (const auto& b : constraints.marginal_bounds) {
    if (b.hi == 0.0) {
      for (int i = 0; i < ws.K; ++i) {
        if (space.symptom_present(i, b.symptom)) ws.allowed[i] = false;
      }
    }
    if (b.lo == 1.0) {
      for (int i = 0; i < ws.K; ++i) {
        if (!space.symptom_present(i, b.symptom)) ws.allowed[i] = false;
      }
    }
  }
  ws.allowed_count = static_cast<int>(std::count(ws.allowed.begin(), ws.allowed.end(), true));
  if (ws.allowed_count == 0) {
    ws.precheck_failure = "no cell may carry probability mass";
    return ws;
  }
  for (const auto& b : constraints.marginal_bounds) {
    bool any_set = false, any_unset = false;
    for (int i = 0; i < ws.K; ++i) {
      if (!ws.allowed[i]) continue;
      (space.symptom_present(i, b.symptom) ? any_set : any_unset) = true;
    }
    if (!any_set && b.lo > 0.0) {
      std::ostringstream os;
      os << "marginal of symptom " << b.symptom << " is forced to 0 but requires >= " << b.lo;
      ws.precheck_failure = os.str();
      return ws;
    }
    if (!any_unset && b.hi < 1.0) {
      std::ostringstream os;
      os << "marginal of symptom " << b.symptom << " is forced to 1 but requires <= " << b.hi;
      ws.precheck_failure = os.str();
      return ws;
    }
    // keep non-degenerate bounds for the iteration
    if (!(b.hi == 0.0 || b.lo == 1.0) && !(b.lo == 0.0 && b.hi == 1.0)) {
      ws.bounds.push_back(b);
    }
  }
  return ws;
}

double bound_residual(const Eigen::ArrayXd& p, const MarginalBound& b, int K) {
  double m = 0.0;
  for (int i = 0; i < K; ++i) {
    if ((i >> b.symptom) & 1) m += p[i];
  }
  return std::max({b.lo - m, m - b.hi, 0.0});
}

double max_residual(const Eigen::ArrayXd& p, const std::vector<MarginalBound>& bounds, int K) {
  double r = std::abs(p.sum() - 1.0);  // a leaked simplex is a residual too
  for (const auto& b : bounds) r = std::max(r, bound_residual(p, b, K));
  return r;
}

struct IterationResult {
  Eigen::ArrayXd p;
  double entropy = 0.0;
  int cycles = 0;
  bool converged = false;
  double residual = 0.0;
};

IterationResult iterate(const Workspace& ws, const MaxentOptions& options) {
  const int K = ws.K;
  Eigen::ArrayXd p(K);
  if (options.start) {
    if (options.start->size() != K) throw Error("start point has wrong size");
    for (int i = 0; i < K; ++i) {
      p[i] = ws.allowed[i] ? std::max((*options.start)[i], kMassFloor) : 0.0;
    }
  } else {
    for (int i = 0; i < K; ++i) {
      p[i] = ws.allowed[i] ? std::max(1.0 / ws.allowed_count, kMassFloor) : 0.0;
    }
  }
  p /= p.sum();

  // Dykstra corrections, one multiplicative factor per constraint and cell.
  std::vector<Eigen::ArrayXd> corr(ws.bounds.size(), Eigen::ArrayXd::Ones(K));

  IterationResult out;
  double last_entropy = entropy(p);
  for (int cycle = 1; cycle <= options.max_cycles; ++cycle) {
    bool stuck = false;
    for (std::size_t c = 0; c < ws.bounds.size(); ++c) {
      const auto& b = ws.bounds[c];
      Eigen::ArrayXd y = p * corr[c];
      const double ysum = y.sum();
      if (!(ysum > 0.0) || !std::isfinite(ysum)) {
        // corrections diverge exactly when the constraint sets do not
        // intersect; report it as a residual instead of propagating NaNs
        stuck = true;
        break;
      }
      y /= ysum;
      // Sum both halves explicitly: 1 - m cancels catastrophically when the
      // set side carries almost all mass, and the scaled halves must keep
      // summing to 1 even then.
      double m = 0.0, unset_mass = 0.0;
      for (int i = 0; i < K; ++i) {
        (((i >> b.symptom) & 1) ? m : unset_mass) += y[i];
      }
      const double target = std::clamp(m, b.lo, b.hi);
      Eigen::ArrayXd z = y;
      if (target != m && m > 0.0 && unset_mass > 0.0) {
        const double f_set = target / m;
        const double f_unset = (1.0 - target) / unset_mass;
        for (int i = 0; i < K; ++i) z[i] = y[i] * (((i >> b.symptom) & 1) ? f_set : f_unset);
      }
      for (int i = 0; i < K; ++i) corr[c][i] = z[i] > 0.0 ? y[i] / z[i] : 1.0;
      p = std::move(z);
    }
    const double h = entropy(p);
    const double res = max_residual(p, ws.bounds, K);
    out.cycles = cycle;
    if (stuck) {
      out.residual = std::numeric_limits<double>::infinity();
      out.entropy = h;
      break;
    }
    if (res <= options.feasibility_tol && std::abs(h - last_entropy) <= options.entropy_tol) {
      out.converged = true;
      out.residual = res;
      out.entropy = h;
      break;
    }
    last_entropy = h;
    if (cycle == options.max_cycles) {
      out.residual = res;
      out.entropy = h;
    }
  }
  if (ws.bounds.empty()) {  // nothing to iterate; the restricted uniform is it
    out.converged = true;
    out.cycles = 0;
    out.residual = 0.0;
    out.entropy = entropy(p);
  }
  p /= p.sum();
  out.p = std::move(p);
  return out;
}

}  // namespace

MaxentSolution solve_maxent(const ConstraintSet& constraints, const OutcomeSpace& space,
                            const MaxentOptions& options) {
  constraints.validate(space);
  const Workspace ws = prepare(constraints, space);
  if (!ws.precheck_failure.empty()) {
    throw InfeasibleError("infeasible constraints: " + ws.precheck_failure);
  }
  IterationResult it = iterate(ws, options);
  if (!it.converged && !(it.residual <= options.feasibility_tol)) {
    std::ostringstream os;
    os.precision(6);
    os << "infeasible constraints: residual " << it.residual << " after " << it.cycles
       << " cycles (tolerance " << options.feasibility_tol << ")";
    throw InfeasibleError(os.str());
  }
  return MaxentSolution{Distribution(space, std::move(it.p)), it.entropy, it.cycles,
                        it.converged, it.residual};
}

Distribution independent_product(const std::vector<double>& marginals,
                                 const OutcomeSpace& space) {
  if (static_cast<int>(marginals.size()) != space.symptom_count) {
    throw Error("expected " + std::to_string(space.symptom_count) + " marginals, got " +
                std::to_string(marginals.size()));
  }
  for (std::size_t j = 0; j < marginals.size(); ++j) {
    if (!(marginals[j] >= 0.0 && marginals[j] <= 1.0)) {
      throw Error("marginal for symptom " + std::to_string(j) + " outside [0, 1]");
    }
  }
  const int K = space.cell_count();
  Eigen::ArrayXd p(K);
  for (int i = 0; i < K; ++i) {
    double v = 1.0;
    for (int j = 0; j < space.symptom_count; ++j) {
      v *= ((i >> j) & 1) ? marginals[j] : 1.0 - marginals[j];
    }
    p[i] = v;
  }
  return Distribution(space, std::move(p));
}

FeasibilityReport check_feasibility(const ConstraintSet& constraints,
                                    const OutcomeSpace& space) {
  constraints.validate(space);
  const Workspace ws = prepare(constraints, space);
  if (!ws.precheck_failure.empty()) {
    return FeasibilityReport{false, std::nullopt,
                             std::numeric_limits<double>::infinity(), ws.precheck_failure};
  }
  MaxentOptions options;
  IterationResult it = iterate(ws, options);
  if (it.converged || it.residual <= options.feasibility_tol) {
    return FeasibilityReport{true, Distribution(space, std::move(it.p)), it.residual,
                             "feasible point found"};
  }
  std::ostringstream os;
  os.precision(6);
  os << "residual " << it.residual << " after " << it.cycles << " cycles";
  return FeasibilityReport{false, std::nullopt, it.residual, os.str()};
}

}  // namespace distfuse
