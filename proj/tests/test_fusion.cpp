#include "distfuse/fusion.hpp"

#include "distfuse/rng.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace distfuse;

namespace {

Distribution make(const OutcomeSpace& space, std::initializer_list<double> values) {
  Eigen::ArrayXd p(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double v : values) p[i++] = v;
  return Distribution(space, std::move(p));
}

const OutcomeSpace kSpace2(2);
const Distribution kExpertA1 = make(kSpace2, {0.25, 0.25, 0.25, 0.25});
const Distribution kEmpA1 = make(kSpace2, {0.5, 0.0, 0.5, 0.0});

}  // namespace

TEST_CASE("l1 barycenter: worked instance") {
  const auto report = l1_barycenter(kExpertA1, kEmpA1, 0.9);
  CHECK(report.mix_weight == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(report.estimate[0] == doctest::Approx(11.0 / 40.0).epsilon(1e-13));
  CHECK(report.estimate[1] == doctest::Approx(9.0 / 40.0).epsilon(1e-13));
  CHECK(report.estimate[2] == doctest::Approx(11.0 / 40.0).epsilon(1e-13));
  CHECK(report.estimate[3] == doctest::Approx(9.0 / 40.0).epsilon(1e-13));
  CHECK(report.achieved_constraint == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(!report.expert_feasible);
  CHECK(!report.lambda_tilde.has_value());
}

TEST_CASE("l1 barycenter: expert branch and zero-distance branch") {
  const auto same = l1_barycenter(kExpertA1, kExpertA1, 0.5);
  CHECK(same.mix_weight == 1.0);
  CHECK(l1_distance(same.estimate, kExpertA1) == 0.0);

  const auto big_eps = l1_barycenter(kExpertA1, kEmpA1, 2.5);  // eps >= d = 1
  CHECK(big_eps.mix_weight == 1.0);
  CHECK(big_eps.expert_feasible);
  CHECK(l1_distance(big_eps.estimate, kExpertA1) == 0.0);

  CHECK_THROWS_AS(l1_barycenter(kExpertA1, kEmpA1, -0.1), Error);
}

TEST_CASE("l1 barycenter: collinearity and active constraint on random instances") {
  Rng rng(3);
  for (int t = 0; t < 300; ++t) {
    OutcomeSpace space(3);
    const Distribution e = oracles::random_distribution(space, rng);
    const Distribution m = oracles::random_distribution(space, rng);
    const double d = l1_distance(e, m);
    const double eps = d * (0.1 + 2.0 * rng.uniform01());  // both branches
    const auto rep = l1_barycenter(e, m, eps);

    CHECK(rep.estimate.probs().sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(l1_distance(rep.estimate, e) + l1_distance(rep.estimate, m) ==
          doctest::Approx(d).epsilon(1e-9));
    CHECK(l1_distance(rep.estimate, m) ==
          doctest::Approx(std::min(eps, d)).epsilon(1e-9));
    CHECK(rep.mix_weight >= 0.0);
    CHECK(rep.mix_weight <= 1.0);
    CHECK(rep.achieved_constraint <= eps + 1e-9);
  }
}

TEST_CASE("l1 barycenter objective matches the projection oracle, K = 8") {
  Rng rng(17);
  OutcomeSpace space(3);
  for (int t = 0; t < 3; ++t) {
    const Distribution e = oracles::random_distribution(space, rng);
    const Distribution m = oracles::random_distribution(space, rng);
    const double eps = l1_distance(e, m) / 2.0;
    const auto rep = l1_barycenter(e, m, eps);
    const auto oracle = lp_projection_oracle(e, m, eps, 1, 1);
    // solution set may not be a singleton; compare objective values
    CHECK(std::abs(l1_distance(rep.estimate, e) - l1_distance(oracle, e)) <= 1e-6);
  }
}

TEST_CASE("projection oracle: non-uniqueness witness and L2 closed form") {
  // both the barycentric point and the alternative solution are optimal
  const auto oracle = lp_projection_oracle(kExpertA1, kEmpA1, 0.9, 1, 1);
  CHECK(l1_distance(oracle, kExpertA1) == doctest::Approx(0.1).epsilon(1e-6));

  const Distribution alternative = make(kSpace2, {10.0 / 40, 9.0 / 40, 12.0 / 40, 9.0 / 40});
  CHECK(l1_distance(alternative, kEmpA1) <= 0.9 + 1e-15);            // feasible
  CHECK(l1_distance(alternative, kExpertA1) ==
        doctest::Approx(0.1).epsilon(1e-15));                        // same objective

  // i = j = 2: closed form alpha = eps / ||m - e||_2 on the segment
  Rng rng(29);
  OutcomeSpace space(3);
  const Distribution e = oracles::random_distribution(space, rng);
  const Distribution m = oracles::random_distribution(space, rng);
  const double d2 = std::sqrt(((e.probs() - m.probs()) * (e.probs() - m.probs())).sum());
  const double eps = 0.4 * d2;
  const auto oracle2 = lp_projection_oracle(e, m, eps, 2, 2);
  const double obj2 =
      std::sqrt(((oracle2.probs() - e.probs()) * (oracle2.probs() - e.probs())).sum());
  CHECK(obj2 == doctest::Approx(d2 - eps).epsilon(1e-5));

  // eps beyond the distance: unconstrained optimum is the expert itself
  const auto oracle3 = lp_projection_oracle(e, m, 2.0 * d2, 2, 2);
  const double obj3 =
      std::sqrt(((oracle3.probs() - e.probs()) * (oracle3.probs() - e.probs())).sum());
  CHECK(obj3 <= 1e-5);

  CHECK_THROWS_AS(lp_projection_oracle(e, m, 0.1, 3, 1), Error);
  OutcomeSpace big(5);
  Rng rng2(1);
  const Distribution be = oracles::random_distribution(big, rng2);
  CHECK_THROWS_AS(lp_projection_oracle(be, be, 0.1, 1, 1), Error);
}

TEST_CASE("kl centroid: branch behavior") {
  OutcomeSpace space(2);
  const Distribution e = make(space, {0.4, 0.3, 0.2, 0.1});
  const Distribution m = make(space, {0.25, 0.25, 0.25, 0.25});
  const double d = kl_divergence(m, e);

  const auto expert_branch = kl_centroid(e, m, d * 1.01);
  CHECK(expert_branch.mix_weight == 1.0);
  CHECK(expert_branch.lambda_tilde == 0.0);
  CHECK(expert_branch.expert_feasible);
  CHECK(l1_distance(expert_branch.estimate, e) == 0.0);

  const auto zero_eps = kl_centroid(e, m, 0.0);
  CHECK(zero_eps.mix_weight == 0.0);
  CHECK(l1_distance(zero_eps.estimate, m) == 0.0);
  REQUIRE(zero_eps.lambda_tilde.has_value());
  CHECK(std::isinf(*zero_eps.lambda_tilde));

  // eps = 0 with zeros in emp: constraint still forces the empirical itself
  const auto zero_support = kl_centroid(kExpertA1, kEmpA1, 0.0);
  CHECK(l1_distance(zero_support.estimate, kEmpA1) == 0.0);

  CHECK_THROWS_AS(kl_centroid(e, m, -1.0), Error);
}

TEST_CASE("kl centroid: expert zeros on the empirical support") {
  // g(1) is infinite; the bracket [0, 1) handles it without special cases
  OutcomeSpace space(1);
  const Distribution e = make(space, {1.0, 0.0});
  const Distribution m = make(space, {0.5, 0.5});
  CHECK(std::isinf(kl_divergence(m, e)));
  const auto rep = kl_centroid(e, m, 0.1);
  CHECK(rep.mix_weight < 1.0);
  CHECK(rep.estimate[1] > 0.0);
  CHECK(kl_divergence(m, rep.estimate) <= 0.1 + 1e-9);
  CHECK(std::abs(kl_divergence(m, rep.estimate) - 0.1) <= 1e-8);
}

TEST_CASE("kl centroid: feasibility, segment position, report fields") {
  Rng rng(41);
  OutcomeSpace space(3);
  for (int t = 0; t < 200; ++t) {
    const Distribution e = oracles::random_distribution(space, rng);
    const Distribution m = oracles::random_distribution(space, rng);
    const double d = kl_divergence(m, e);
    const double eps = d * (0.05 + 0.9 * rng.uniform01());
    const auto rep = kl_centroid(e, m, eps);

    CHECK(kl_divergence(m, rep.estimate) <= eps + 1e-9);
    CHECK(std::abs(kl_divergence(m, rep.estimate) - eps) <= 1e-8);  // active constraint
    CHECK(rep.mix_weight > 0.0);
    CHECK(rep.mix_weight < 1.0);
    REQUIRE(rep.lambda_tilde.has_value());
    CHECK(*rep.lambda_tilde ==
          doctest::Approx((1.0 - rep.mix_weight) / rep.mix_weight).epsilon(1e-12));
    CHECK(rep.estimate.probs().sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.achieved_constraint <= rep.epsilon + 1e-9);
  }
}

TEST_CASE("kl centroid: bisection from different bracketing initializations") {
  // same optimum from the default bracket and from a bracket started at the
  // log-sum feasible point w0 = eps/d (g(w0) <= eps always)
  Rng rng(53);
  OutcomeSpace space(2);
  for (int t = 0; t < 50; ++t) {
    const Distribution e = oracles::random_distribution(space, rng);
    const Distribution m = oracles::random_distribution(space, rng);
    const double d = kl_divergence(m, e);
    const double eps = d * (0.2 + 0.6 * rng.uniform01());
    const auto rep = kl_centroid(e, m, eps);

    double lo = eps / d, hi = 1.0;
    const auto g = [&](double w) {
      Eigen::ArrayXd p = w * e.probs() + (1.0 - w) * m.probs();
      return kl_divergence(m.probs(), p);
    };
    REQUIRE(g(lo) <= eps);
    double g_lo = g(lo);
    for (int it = 0; it < 200 && (std::abs(g_lo - eps) > 1e-10 || hi - lo > 1e-12); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (g(mid) <= eps) {
        lo = mid;
        g_lo = g(mid);
      } else {
        hi = mid;
      }
    }
    CHECK(std::abs(lo - rep.mix_weight) <= 1e-9);
  }
}

TEST_CASE("kl centroid vs grid search and dual ascent, K = 4") {
  Rng rng(67);
  OutcomeSpace space(2);
  for (int t = 0; t < 10; ++t) {
    const Distribution e = oracles::random_distribution(space, rng);
    const Distribution m = oracles::random_distribution(space, rng);
    const double eps = 0.5 * kl_divergence(m, e);
    const auto rep = kl_centroid(e, m, eps);
    const double obj = kl_divergence(e.probs(), rep.estimate.probs());

    const auto grid = oracles::kl_grid_oracle(e, m, eps, 1000000);
    CHECK(grid.weight >= 0.0);
    CHECK(std::abs(obj - grid.objective) <= 1e-6);
    CHECK(grid.achieved <= eps + 1e-12);

    const double uzawa_obj = oracles::kl_uzawa_oracle(e, m, eps);
    CHECK(std::abs(obj - uzawa_obj) <= 1e-5);
  }
}

TEST_CASE("monotone hand-off at the epsilon extremes") {
  Rng rng(71);
  OutcomeSpace space(3);
  for (int t = 0; t < 20; ++t) {
    const Distribution e = oracles::random_distribution(space, rng);
    const Distribution m = oracles::random_distribution(space, rng);
    const double d1 = l1_distance(e, m);
    CHECK(l1_distance(l1_barycenter(e, m, 0.0).estimate, m) <= 1e-12);
    CHECK(l1_distance(l1_barycenter(e, m, 10.0 * d1).estimate, e) == 0.0);
    CHECK(l1_distance(kl_centroid(e, m, 0.0).estimate, m) <= 1e-12);
    const double dkl = kl_divergence(m, e);
    CHECK(l1_distance(kl_centroid(e, m, 10.0 * dkl).estimate, e) == 0.0);
  }
}

TEST_CASE("theorem 1 diagnostic") {
  // expert equal to the target forces a zero bound under the event
  const auto diag = theorem1_check(kExpertA1, kExpertA1, kEmpA1, 1.5, kExpertA1);
  CHECK(diag.event_holds);
  CHECK(diag.bound == 0.0);
  CHECK(diag.error_l1 == 0.0);

  // worked instance with p_star = emp
  const auto rep = l1_barycenter(kExpertA1, kEmpA1, 0.9);
  const auto diag2 = theorem1_check(kEmpA1, kExpertA1, kEmpA1, 0.9, rep.estimate);
  CHECK(diag2.event_holds);
  CHECK(diag2.error_l1 == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(diag2.bound == doctest::Approx(1.8).epsilon(1e-12));
  CHECK(diag2.error_l1 <= diag2.bound);

  // event violated: diagnostic only reports
  const auto diag3 = theorem1_check(kEmpA1, kExpertA1, kExpertA1, 0.1, kExpertA1);
  CHECK(!diag3.event_holds);
}

TEST_CASE("theorem 1 holds on every event-conditioned random instance") {
  Rng rng(83);
  int conditioned = 0;
  for (int t = 0; t < 3000; ++t) {
    OutcomeSpace space(t % 2 == 0 ? 2 : 3);
    const Distribution p_star = oracles::random_distribution(space, rng);
    const Distribution e = oracles::random_distribution(space, rng);
    const Distribution m = oracles::smoothed_empirical(p_star, 20 + t % 200, rng);
    const double eps = l1_distance(p_star, m) * std::exp(2.0 * rng.uniform01() - 0.7);
    const auto rep = l1_barycenter(e, m, eps);
    const auto diag = theorem1_check(p_star, e, m, eps, rep.estimate);
    if (!diag.event_holds) continue;
    ++conditioned;
    CHECK(diag.error_l1 <= diag.bound + 1e-9);
  }
  CHECK(conditioned > 1000);
}

TEST_CASE("theorem 2 diagnostic branches") {
  OutcomeSpace space(2);
  const Distribution e = make(space, {0.4, 0.3, 0.2, 0.1});
  const Distribution m = make(space, {0.25, 0.25, 0.25, 0.25});
  const Distribution p_star = e;

  // eps above KL(emp||expert): estimate = expert, bound met with equality
  const double d = kl_divergence(m, e);
  const auto rep = kl_centroid(e, m, d * 2.0);
  const auto diag = theorem2_check(p_star, e, m, d * 2.0, rep.estimate);
  CHECK(diag.error_kl == doctest::Approx(kl_divergence(e, p_star)).epsilon(1e-12));
  CHECK(!diag.trivial_branch);

  // expert equal to the target: error forced to zero under the event
  const auto diag2 = theorem2_check(e, e, m, d * 2.0, rep.estimate);
  CHECK(diag2.event_holds);
  CHECK(diag2.error_kl == 0.0);
  CHECK(diag2.bound == 0.0);

  // expert == emp: L_n undefined, trivial branch reported
  const auto diag3 = theorem2_check(p_star, m, m, 0.5, m);
  CHECK(diag3.trivial_branch);
  CHECK(diag3.bound == doctest::Approx(kl_divergence(m, p_star)).epsilon(1e-12));
}

TEST_CASE("kl estimate never exceeds the expert error under the event") {
  // the provable half of the best-of-both bound; exercised across regimes
  Rng rng(97);
  int conditioned = 0;
  for (int t = 0; t < 2000; ++t) {
    OutcomeSpace space(2);
    const Distribution p_star = oracles::random_distribution(space, rng);
    const Distribution e = oracles::random_distribution(space, rng);
    const Distribution m = oracles::smoothed_empirical(p_star, 10 + t % 100, rng);
    const double ref = kl_divergence(m, p_star);
    const double eps = ref * std::exp(1.5 * rng.uniform01() - 0.3);
    const auto rep = kl_centroid(e, m, eps);
    if (kl_divergence(m, p_star) > eps) continue;
    ++conditioned;
    const double err = kl_divergence(rep.estimate, p_star);
    const double expert_err = kl_divergence(e, p_star);
    CHECK(err <= expert_err * (1.0 + 1e-9) + 1e-12);
  }
  CHECK(conditioned > 500);
}
