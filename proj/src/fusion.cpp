#include "distfuse/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace distfuse {

namespace {

void require_same_space(const Distribution& a, const Distribution& b) {
  if (!(a.space() == b.space())) {
    throw Error("distributions live on different outcome spaces");
  }
}

void require_nonnegative_epsilon(double epsilon) {
  if (!(epsilon >= 0.0)) {
    throw Error("epsilon must be non-negative, got " + std::to_string(epsilon));
  }
}

Eigen::ArrayXd mix(double w, const Eigen::ArrayXd& expert, const Eigen::ArrayXd& emp) {
  return w * expert + (1.0 - w) * emp;
}

// Euclidean projection onto the simplex [Michelot 1986].
Eigen::ArrayXd project_to_simplex(Eigen::ArrayXd v) {
  const Eigen::Index n = v.size();
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0.0, theta = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    css += u[k];
    const double t = (css - 1.0) / static_cast<double>(k + 1);
    if (u[k] - t > 0.0) theta = t;
  }
  for (Eigen::Index k = 0; k < n; ++k) v[k] = std::max(v[k] - theta, 0.0);
  return v;
}

double norm(const Eigen::ArrayXd& v, int ord) {
  return ord == 1 ? v.abs().sum() : std::sqrt((v * v).sum());
}

Eigen::ArrayXd norm_subgradient(const Eigen::ArrayXd& v, int ord) {
  if (ord == 1) return v.sign();
  const double n2 = norm(v, 2);
  if (n2 == 0.0) return Eigen::ArrayXd::Zero(v.size());
  return v / n2;
}

}  // namespace

FusionReport l1_barycenter(const Distribution& expert, const Distribution& emp,
                           double epsilon) {
  require_same_space(expert, emp);
  require_nonnegative_epsilon(epsilon);
  const double d = l1_distance(expert, emp);
  FusionReport report{expert, FusionMethod::l1, epsilon, 1.0, std::nullopt, 0.0, true};
  if (epsilon >= d || d == 0.0) {
    report.achieved_constraint = d;
    return report;
  }
  const double alpha = epsilon / d;
  report.mix_weight = alpha;
  report.expert_feasible = false;
  report.estimate = Distribution(expert.space(), mix(alpha, expert.probs(), emp.probs()));
  report.achieved_constraint = l1_distance(report.estimate, emp);
  return report;
}

FusionReport kl_centroid(const Distribution& expert, const Distribution& emp,
                         double epsilon) {
  require_same_space(expert, emp);
  require_nonnegative_epsilon(epsilon);
  const double d = kl_divergence(emp, expert);
  FusionReport report{expert, FusionMethod::kl, epsilon, 1.0, 0.0, d, true};
  if (d <= epsilon) return report;

  report.expert_feasible = false;
  if (epsilon == 0.0) {
    // KL(emp || p) <= 0 admits only p = emp; g is below rounding noise for
    // tiny weights, so the bisection cannot see this itself.
    report.estimate = emp;
    report.mix_weight = 0.0;
    report.lambda_tilde = std::numeric_limits<double>::infinity();
    report.achieved_constraint = 0.0;
    return report;
  }
  const auto g = [&](double w) {
    Eigen::ArrayXd p = mix(w, expert.probs(), emp.probs());
    return kl_divergence(emp.probs(), p);  // KL(emp || p(w))
  };
  // Feasible side is kept in lo; hi stays strictly infeasible (g(1) = d > eps,
  // possibly infinite when the expert has zeros on the empirical support).
  // The bracket is also shrunk below 1e-12 so the returned weight does not
  // depend on the initial bracketing.
  double lo = 0.0, hi = 1.0;
  double g_lo = 0.0;
  for (int it = 0;
       it < 200 && (std::abs(g_lo - epsilon) > 1e-10 || hi - lo > 1e-12); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if (gm <= epsilon) {
      lo = mid;
      g_lo = gm;
    } else {
      hi = mid;
    }
  }
  const double w = lo;
  report.mix_weight = w;
  report.lambda_tilde = w > 0.0 ? (1.0 - w) / w : std::numeric_limits<double>::infinity();
  report.estimate = Distribution(expert.space(), mix(w, expert.probs(), emp.probs()));
  report.achieved_constraint = g_lo;
  return report;
}

Distribution lp_projection_oracle(const Distribution& expert, const Distribution& emp,
                                  double epsilon, int i, int j) {
  require_same_space(expert, emp);
  require_nonnegative_epsilon(epsilon);
  if ((i != 1 && i != 2) || (j != 1 && j != 2)) {
    throw Error("norm indices must be 1 or 2");
  }
  if (expert.size() > 16) {
    throw Error("projection oracle supports K <= 16");
  }
  constexpr int kIters = 100000;
  const double decay = std::pow(10.0, -12.0 / kIters);  // final step ~ 1e-12
  double step = 0.25;

  Eigen::ArrayXd p = emp.probs();  // feasible start
  Eigen::ArrayXd best = p;
  double best_obj = norm(p - expert.probs(), i);
  for (int t = 0; t < kIters; ++t) {
    const double slack = norm(p - emp.probs(), j) - epsilon;
    Eigen::ArrayXd dir;
    if (slack > 1e-12) {
      dir = norm_subgradient(p - emp.probs(), j);
    } else {
      const double obj = norm(p - expert.probs(), i);
      if (obj < best_obj) {
        best_obj = obj;
        best = p;
      }
      dir = norm_subgradient(p - expert.probs(), i);
    }
    p = project_to_simplex(p - step * dir);
    step *= decay;
  }
  return Distribution(expert.space(), std::move(best));
}

Theorem1Diagnostic theorem1_check(const Distribution& p_star, const Distribution& expert,
                                  const Distribution& emp, double epsilon,
                                  const Distribution& estimate) {
  Theorem1Diagnostic d;
  d.error_l1 = l1_distance(p_star, estimate);
  d.bound = 2.0 * std::min(epsilon, l1_distance(p_star, expert));
  d.event_holds = l1_distance(p_star, emp) <= epsilon;
  return d;
}

Theorem2Diagnostic theorem2_check(const Distribution& p_star, const Distribution& expert,
                                  const Distribution& emp, double epsilon,
                                  const Distribution& estimate) {
  Theorem2Diagnostic d;
  d.error_kl = kl_divergence(estimate, p_star);
  d.event_holds = kl_divergence(emp, p_star) <= epsilon;
  const double denom = kl_divergence(emp, expert);
  if (denom == 0.0) {
    d.trivial_branch = true;  // expert == emp, estimate = expert
    d.l_n = 0.0;
    d.bound = kl_divergence(expert, p_star);
    return d;
  }
  d.l_n = (kl_divergence(expert, p_star) - kl_divergence(emp, p_star)) / denom;
  d.bound = std::min(kl_divergence(expert, p_star), epsilon * (d.l_n + 1.0));
  return d;
}

}  // namespace distfuse
