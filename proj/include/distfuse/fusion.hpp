#pragma once

#include "distfuse/model.hpp"

#include <optional>

namespace distfuse {

enum class FusionMethod { l1, kl };

/// Fused estimate plus the diagnostics needed to audit it.
struct FusionReport {
  Distribution estimate;
  FusionMethod method = FusionMethod::l1;
  double epsilon = 0.0;                  // data-consistency radius used
  double mix_weight = 0.0;               // weight on the expert prior, in [0, 1]
  std::optional<double> lambda_tilde;    // KL only: (1 - w) / w
  double achieved_constraint = 0.0;      // ||est - emp||_1 or KL(emp || est)
  bool expert_feasible = false;          // prior already satisfied the constraint
};

/// Closest point to the expert prior, in L1, among distributions within
/// epsilon of the empirical one: with d = ||emp - expert||_1, returns the
/// expert itself when epsilon >= d, otherwise the segment point
/// alpha * expert + (1 - alpha) * emp with alpha = epsilon / d.
/// The solution set is not a singleton in L1; this barycentric form is
/// always a member and is the one we commit to.
FusionReport l1_barycenter(const Distribution& expert, const Distribution& emp,
                           double epsilon);

/// Minimizer of KL(expert || p) over {p : KL(emp || p) <= epsilon}.
/// The optimum lies on the expert-empirical segment; with
/// g(w) = KL(emp || w*expert + (1-w)*emp) convex, zero at w = 0 and hence
/// non-decreasing, the largest feasible expert weight is found by bisection
/// to |g(w) - epsilon| <= 1e-10 and bracket width <= 1e-12 (at most 200
/// halvings). Returns the expert when KL(emp || expert) <= epsilon.
FusionReport kl_centroid(const Distribution& expert, const Distribution& emp,
                         double epsilon);

/// Numeric projection oracle for the norm-based problems: minimizes
/// ||p - expert||_i over the simplex subject to ||p - emp||_j <= epsilon by
/// switching projected subgradient steps (geometric step decay, 1e5
/// iterations), returning the best feasible iterate. i, j in {1, 2};
/// K <= 16. A testing aid, not a production estimator.
Distribution lp_projection_oracle(const Distribution& expert, const Distribution& emp,
                                  double epsilon, int i, int j);

struct Theorem1Diagnostic {
  double error_l1 = 0.0;      // ||p_star - estimate||_1
  double bound = 0.0;         // 2 min(epsilon, ||p_star - expert||_1)
  bool event_holds = false;   // ||p_star - emp||_1 <= epsilon
};

struct Theorem2Diagnostic {
  double error_kl = 0.0;      // KL(estimate || p_star)
  double bound = 0.0;         // min{KL(expert || p_star), epsilon * (L_n + 1)}
  double l_n = 0.0;
  bool event_holds = false;   // KL(emp || p_star) <= epsilon
  bool trivial_branch = false;  // KL(emp || expert) = 0, L_n undefined
};

Theorem1Diagnostic theorem1_check(const Distribution& p_star, const Distribution& expert,
                                  const Distribution& emp, double epsilon,
                                  const Distribution& estimate);

Theorem2Diagnostic theorem2_check(const Distribution& p_star, const Distribution& expert,
                                  const Distribution& emp, double epsilon,
                                  const Distribution& estimate);

}  // namespace distfuse
