#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "ageamp/capacity.hpp"
#include "support.hpp"

using namespace ageamp;
using testing_support::Gen;
using testing_support::hb;

namespace {
AgeConstraints cons(double cp, double ca) { return {Budget::of(cp), Budget::of(ca)}; }
}  // namespace

TEST(Feasibility, Examples) {
  EXPECT_EQ(feasibility(0.2, cons(5, 2.5)), Feasibility::feasible);
  EXPECT_EQ(feasibility(0.2, cons(4.9, INFINITY)), Feasibility::infeasible_peak);
  EXPECT_EQ(feasibility(0.2, cons(INFINITY, 2.49)), Feasibility::infeasible_avg);
  EXPECT_EQ(feasibility(0.3, cons(INFINITY, 1.7)), Feasibility::feasible);
  EXPECT_STREQ(to_string(Feasibility::infeasible_avg), "infeasible_avg");
}

TEST(CapacityPeakOnly, Examples) {
  EXPECT_NEAR(capacity_peak_only(0.6, Budget::of(10)).value, 1.0, 1e-15);
  EXPECT_NEAR(capacity_peak_only(0.8, Budget::of(1.5)).value, 0.918295834054490, 1e-12);
  EXPECT_NEAR(capacity_peak_only(0.2, Budget::of(10)).value, 0.721928094887362, 1e-12);
  EXPECT_FALSE(capacity_peak_only(0.2, Budget::of(3)).feasible());
  EXPECT_THROW(capacity_peak_only(0.0, Budget::of(3)), std::domain_error);
}

TEST(Capacity, Examples) {
  const auto a = capacity(0.2, AgeConstraints::none());
  ASSERT_TRUE(a.feasible());
  EXPECT_NEAR(a.value, 0.721928094887362, 1e-6);
  EXPECT_NEAR(a.k_star, 5.0, 1e-9);

  const auto b = capacity(0.2, cons(3, INFINITY));
  EXPECT_FALSE(b.feasible());
  EXPECT_EQ(b.reason, Feasibility::infeasible_peak);

  const auto c = capacity(0.2, cons(INFINITY, 2.5));
  ASSERT_TRUE(c.feasible());
  EXPECT_NEAR(c.value, 0.0, 1e-6);
  EXPECT_NEAR((*c.pmf_star)(5), 1.0, 1e-9);

  EXPECT_GT(capacity(0.2, cons(INFINITY, 2.6)).value, 0.0);
  EXPECT_THROW(capacity(1.0, AgeConstraints::none()), std::domain_error);
}

TEST(Capacity, MatchesClosedFormWithoutAverageBudget) {
  for (double q : {0.05, 0.2, 0.45, 0.55, 0.8, 0.95}) {
    for (double cp : {1.0 / q, 1.0 / q + 0.3, 1.5, 1.9, 2.0, 2.5, 4.0, 9.0, 25.0}) {
      if (cp < 1.0 / q) continue;
      const auto num = capacity(q, cons(cp, INFINITY));
      const auto ref = capacity_peak_only(q, Budget::of(cp));
      ASSERT_TRUE(num.feasible());
      EXPECT_NEAR(num.value, ref.value, 1e-4) << q << " " << cp;
      // k_star = clamp(2, 1/q, c_p) and the value is H_b(1/k_star).
      const double k = std::clamp(2.0, 1.0 / q, cp);
      EXPECT_NEAR(num.k_star, k, 2e-3) << q << " " << cp;
      EXPECT_NEAR(num.value, hb(1.0 / k), 1e-6) << q << " " << cp;
    }
  }
}

TEST(Capacity, ResultIsSelfConsistent) {
  Gen gen(77);
  for (int t = 0; t < 15; ++t) {
    const double q = gen.uniform(0.08, 0.9);
    const auto mins = min_ages_infinite(q);
    const double cp = mins.peak_min + gen.uniform(0.0, 8.0);
    const double ca = mins.avg_min + gen.uniform(0.0, 4.0);
    const auto r = capacity(q, cons(cp, ca));
    ASSERT_TRUE(r.feasible());
    const auto m = pmf_moments(*r.pmf_star);
    EXPECT_NEAR(m.mean, r.k_star, 1e-8 * r.k_star);
    EXPECT_GE(m.mean, 1.0 / q - 1e-8);
    EXPECT_LE(m.mean, cp + 1e-8);
    EXPECT_LE(m.second_moment, 2 * ca * m.mean + 1e-8 * m.second_moment);
    EXPECT_NEAR(r.value, pmf_entropy(*r.pmf_star) / r.k_star, 1e-9);
    EXPECT_LT(r.diagnostics.tail_mass, 1e-10);
  }
}

TEST(Capacity, MonotoneInBudgets) {
  const double q = 0.2;
  const double cps[] = {5.0, 5.5, 6.5, 8.0, 12.0, INFINITY};
  const double cas[] = {2.5, 2.55, 2.7, 3.0, 4.0, 6.0, INFINITY};
  std::vector<std::vector<double>> v(std::size(cps), std::vector<double>(std::size(cas)));
  for (std::size_t i = 0; i < std::size(cps); ++i)
    for (std::size_t j = 0; j < std::size(cas); ++j) v[i][j] = capacity(q, cons(cps[i], cas[j])).value;
  for (std::size_t i = 0; i < std::size(cps); ++i)
    for (std::size_t j = 0; j < std::size(cas); ++j) {
      if (i > 0) {
        EXPECT_GE(v[i][j], v[i - 1][j] - 1e-9) << i << "," << j;
      }
      if (j > 0) {
        EXPECT_GE(v[i][j], v[i][j - 1] - 1e-9) << i << "," << j;
      }
    }
}

TEST(Capacity, DominatesRandomFeasibleLaws) {
  // Any interval law meeting the budgets it defines has rate at most capacity.
  Gen gen(5150);
  int checked = 0;
  for (int t = 0; t < 60; ++t) {
    const double q = gen.uniform(0.1, 0.9);
    const InterUpdatePmf p(gen.simplex(gen.integer(2, 25)));
    const auto m = pmf_moments(p);
    if (m.mean < 1.0 / q) continue;
    const double cp = m.mean + gen.uniform(0.0, 2.0);
    const double ca = avg_age(p);
    const auto r = capacity(q, cons(cp, ca));
    ASSERT_TRUE(r.feasible());
    EXPECT_GE(r.value, pmf_entropy(p) / m.mean - 1e-7);
    ++checked;
  }
  EXPECT_GT(checked, 10);
}

TEST(Capacity, DeterministicAcrossThreadCounts) {
  CapacityOptions one, four;
  four.threads = 4;
  const auto a = capacity(0.3, cons(9, 2.2), one);
  const auto b = capacity(0.3, cons(9, 2.2), four);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.k_star, b.k_star);
  EXPECT_EQ(a.pmf_star->masses(), b.pmf_star->masses());
}
