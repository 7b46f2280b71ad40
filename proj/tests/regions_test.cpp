#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "ageamp/regions.hpp"
#include "support.hpp"

using namespace ageamp;
using testing_support::Gen;
using testing_support::hb;

namespace {

AgeConstraints cons(double cp, double ca) { return {Budget::of(cp), Budget::of(ca)}; }

// Root of H_b(0.2 p) - p H_b(0.2) = 0.05, evaluated to 30 digits offline.
constexpr double kPStar = 0.827150737932025768;

// Dense p grid for the zero-battery amplification optimum.
double zero_battery_oracle(double q, double cp, double ca, double r_min) {
  double best = -1.0;
  const int n = 1'000'000;
  for (int i = 1; i <= n; ++i) {
    const double p = double(i) / n;
    const double pq = p * q;
    if (1.0 / pq > cp || (2.0 - pq) / (2.0 * pq) > ca) continue;
    if (hb(pq) - p * hb(q) < r_min) continue;
    best = std::max(best, std::min(hb(q), hb(pq) - r_min));
  }
  return best;
}

}  // namespace

TEST(ZeroBattery, AmpExamples) {
  const auto a = zero_battery_amp(1.0, 0.5);
  EXPECT_NEAR(a.r_max, 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(a.sum_cap, 1.0);
  const auto b = zero_battery_amp(0.0, 0.3);
  EXPECT_EQ(b.r_max, 0.0);
  EXPECT_DOUBLE_EQ(b.delta_cap, hb(0.3));
  EXPECT_EQ(b.sum_cap, 0.0);
  const auto c = zero_battery_amp(0.827, 0.2);
  EXPECT_NEAR(c.r_max, 0.0500384282938422, 1e-12);
  EXPECT_NEAR(c.sum_cap, 0.647072962765691, 1e-12);
}

TEST(ZeroBattery, MaskExamples) {
  const auto a = zero_battery_mask(0.0, 0.4);
  EXPECT_EQ(a.r_max, 0.0);
  EXPECT_EQ(a.delta_m_lower, 0.0);
  const auto b = zero_battery_mask(1.0, 0.5);
  EXPECT_NEAR(b.r_max, 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(b.delta_m_lower, 1.0);
  const auto c = zero_battery_mask(2.0 / 3.0, 0.5);
  EXPECT_NEAR(c.r_max, 0.251629167387823, 1e-12);
  EXPECT_NEAR(c.delta_m_lower, 2.0 / 3.0, 1e-15);
}

TEST(ZeroBattery, AgeExamples) {
  const auto a = zero_battery_age(1.0, 0.2);
  EXPECT_NEAR(a.peak, 5.0, 1e-12);
  EXPECT_NEAR(a.avg, 4.5, 1e-12);
  const auto b = zero_battery_age(0.827, 0.2);
  EXPECT_NEAR(b.peak, 6.046, 1e-3);
  EXPECT_NEAR(b.avg, 5.546, 1e-3);
  const auto c = zero_battery_age(1.0, 1.0);
  EXPECT_EQ(c.peak, 1.0);
  EXPECT_EQ(c.avg, 0.5);
  EXPECT_TRUE(std::isinf(zero_battery_age(0.0, 0.3).peak));
  EXPECT_THROW(zero_battery_age(1.1, 0.3), std::domain_error);
  EXPECT_THROW(zero_battery_amp(0.5, 1.0), std::domain_error);
}

TEST(ZeroBattery, RateRootAnchor) {
  const auto p = zero_battery_rate_root(0.2, 0.05);
  ASSERT_TRUE(p);
  EXPECT_NEAR(*p, kPStar, 1e-12);
  const auto ages = zero_battery_age(*p, 0.2);
  EXPECT_NEAR(ages.peak, 6.04, 0.02);
  EXPECT_NEAR(ages.avg, 5.54, 0.02);
  EXPECT_FALSE(zero_battery_rate_root(0.2, 0.5));
}

TEST(ZeroBattery, Invariants) {
  Gen gen(21);
  for (int t = 0; t < 50; ++t) {
    const double q = gen.uniform(0.01, 0.99);
    double prev_mask = -1.0;
    for (int i = 0; i <= 1000; ++i) {
      const double p = i / 1000.0;
      const auto amp = zero_battery_amp(p, q);
      const auto mask = zero_battery_mask(p, q);
      EXPECT_GE(amp.r_max, -1e-15);
      EXPECT_GT(mask.delta_m_lower, prev_mask);
      prev_mask = mask.delta_m_lower;
      EXPECT_NEAR(amp.sum_cap - amp.r_max, mask.delta_m_lower, 1e-12);
      if (p > 0) {
        const auto a = zero_battery_age(p, q);
        EXPECT_NEAR(a.avg, a.peak - 0.5, 1e-9 * a.peak);
      }
    }
    EXPECT_EQ(zero_battery_rate(0.0, q), 0.0);
  }
}

TEST(ZeroBattery, BestAmpMatchesDenseGrid) {
  struct Case {
    double q, cp, ca, r;
  };
  for (const Case& c : {Case{0.2, 6.05, INFINITY, 0.05}, Case{0.2, INFINITY, INFINITY, 0.05},
                        Case{0.4, 4.0, INFINITY, 0.1}, Case{0.7, INFINITY, 1.3, 0.02},
                        Case{0.5, 2.5, 2.2, 0.0}}) {
    const auto pt = zero_battery_best_amp(c.q, cons(c.cp, c.ca), c.r);
    const double o = zero_battery_oracle(c.q, c.cp, c.ca, c.r);
    ASSERT_GE(o, 0) << c.q;
    ASSERT_EQ(pt.status, PointStatus::ok);
    EXPECT_GE(pt.delta, o - 1e-12) << c.q;
    EXPECT_LE(pt.delta, o + 1e-5) << c.q;
    const double p = std::get<ZeroBatteryPolicy>(*pt.policy_params).p;
    EXPECT_GE(zero_battery_rate(p, c.q), c.r);
  }
}

TEST(MaskBound, InfiniteIsZero) {
  EXPECT_EQ(mask_bound_infinite(), 0.0);
  static_assert(mask_bound_infinite() == 0.0);
}

TEST(AmpRegionInfinite, Unconstrained) {
  const auto pts = amp_region_infinite(0.2, AgeConstraints::none(), 11);
  ASSERT_EQ(pts.size(), 11u);
  for (const auto& p : pts) EXPECT_NEAR(p.rate + p.delta, hb(0.2), 1e-6);
  EXPECT_NEAR(pts.back().delta, hb(0.2), 1e-6);
  EXPECT_NEAR(pts.back().rate, 0.0, 1e-6);
}

TEST(AmpRegionInfinite, MinimumAverageAgeCollapses) {
  const auto pts = amp_region_infinite(0.2, cons(INFINITY, 2.5), 11);
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_NEAR(pts[0].rate, 0.0, 1e-6);
  EXPECT_EQ(pts[0].delta, 0.0);
}

TEST(AmpRegionInfinite, StateEntropyCapBinds) {
  const auto pts = amp_region_infinite(0.8, AgeConstraints::none(), 21);
  const double hq = hb(0.8);
  double max_delta = 0.0;
  for (const auto& p : pts) {
    EXPECT_LE(p.delta, hq + 1e-12);
    EXPECT_LE(p.rate + p.delta, 1.0 + 1e-6);
    max_delta = std::max(max_delta, p.delta);
  }
  EXPECT_NEAR(max_delta, hq, 1e-12);
  EXPECT_NEAR(pts.back().rate, 0.0, 1e-12);
  EXPECT_NEAR(pts[pts.size() - 2].rate, 1.0 - hq, 1e-6);
  EXPECT_THROW(amp_region_infinite(0.2, cons(3, INFINITY), 5), InfeasibleConstraints);
}

TEST(MaxAmp, Examples) {
  EXPECT_NEAR(max_amp_given_rate(0.2, AgeConstraints::none(), 0.05, Source::best_achievable),
              hb(0.2) - 0.05, 1e-6);
  EXPECT_EQ(max_amp_given_rate(0.2, cons(INFINITY, 2.51), 0.05, Source::wait_and_transmit), 0.0);
  EXPECT_EQ(amp_point(0.2, cons(INFINITY, 2.51), 0.05, Source::wait_and_transmit).status,
            PointStatus::rate_unattainable);
  for (double q : {0.2, 0.8}) {
    const double c = capacity(q, AgeConstraints::none()).value;
    EXPECT_NEAR(max_amp_given_rate(q, AgeConstraints::none(), 0.0, Source::best_achievable),
                std::min(c, hb(q)), 1e-9);
  }
  EXPECT_THROW(amp_point(0.2, AgeConstraints::none(), -0.1, Source::zero_wait), std::domain_error);
  EXPECT_EQ(amp_point(0.2, cons(4, INFINITY), 0.05, Source::best_achievable).status,
            PointStatus::infeasible_budget);
}

TEST(TradeoffSweep, Examples) {
  const std::vector<double> grid{5.9, 6.05};
  const auto pts = tradeoff_sweep(0.2, 0.05, Budget::unbounded(), grid, {Source::zero_battery});
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_EQ(pts[0].delta, 0.0);
  EXPECT_EQ(pts[0].status, PointStatus::rate_unattainable);
  EXPECT_NEAR(pts[1].delta, 0.59, 0.01);
  EXPECT_NEAR(pts[1].delta, 0.597143356419943, 1e-9);

  const std::vector<double> cps{4.5, 5, 6, 8, 12};
  const auto zw = tradeoff_sweep(0.2, 0.05, Budget::of(50), cps,
                                 {Source::zero_wait, Source::best_achievable});
  for (std::size_t i = 0; i < cps.size(); ++i) {
    EXPECT_NEAR(zw[2 * i].delta, zw[2 * i + 1].delta, 1e-6) << cps[i];
  }
}

TEST(TradeoffSweep, DominanceAndMonotonicity) {
  const std::vector<double> cps{5, 5.5, 6, 6.5, 7, 8, 10, 13};
  const std::vector<Source> src(std::begin(kAllSources), std::end(kAllSources));
  for (double ca : {2.6, 3.0, 4.5, 6.0, double(INFINITY)}) {
    const auto pts = tradeoff_sweep(0.2, 0.05, Budget::of(ca), cps, src);
    ASSERT_EQ(pts.size(), cps.size() * src.size());
    for (std::size_t i = 0; i < cps.size(); ++i) {
      const auto* row = &pts[i * src.size()];
      EXPECT_EQ(row[0].source, Source::best_achievable);
      EXPECT_GE(row[0].delta, row[1].delta - 1e-6) << ca << " " << cps[i];
      EXPECT_GE(row[1].delta, row[2].delta - 1e-9) << ca << " " << cps[i];
      if (row[2].status == PointStatus::ok && row[3].status == PointStatus::ok) {
        EXPECT_GE(row[2].delta, row[3].delta - 1e-9) << ca << " " << cps[i];
      }
      if (i > 0) {
        for (std::size_t s = 0; s < src.size(); ++s) {
          EXPECT_GE(row[s].delta, pts[(i - 1) * src.size() + s].delta - 1e-6)
              << ca << " " << cps[i] << " " << to_string(src[s]);
        }
      }
    }
  }
}

TEST(TradeoffSweep, MonotoneInAverageBudget) {
  for (Source s : kAllSources) {
    double prev = -1.0;
    for (double ca : {2.5, 2.55, 2.7, 3.0, 4.0, 4.5, 5.0, 6.0, 9.0}) {
      const double d = max_amp_given_rate(0.2, cons(8.0, ca), 0.05, s);
      EXPECT_GE(d, prev - 1e-6) << to_string(s) << " " << ca;
      prev = d;
    }
  }
}

TEST(TradeoffSweep, ThreadCountDoesNotChangeOutput) {
  const std::vector<double> cps{5, 6, 7, 9};
  const std::vector<Source> src(std::begin(kAllSources), std::end(kAllSources));
  const auto a = tradeoff_sweep(0.2, 0.05, Budget::of(3.0), cps, src, {}, 1);
  const auto b = tradeoff_sweep(0.2, 0.05, Budget::of(3.0), cps, src, {}, 4);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].delta, b[i].delta);
    EXPECT_EQ(a[i].source, b[i].source);
    EXPECT_EQ(a[i].status, b[i].status);
  }
}

TEST(MaskSweep, Examples) {
  const auto a = mask_region_sweep(0.5, Budget::of(3), Battery::zero, 50);
  EXPECT_FALSE(a.empty_budget);
  EXPECT_NEAR(a.p_min, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(std::get<ZeroBatteryPolicy>(*a.points.front().policy_params).p, 2.0 / 3.0, 1e-12);
  EXPECT_EQ(std::get<ZeroBatteryPolicy>(*a.points.back().policy_params).p, 1.0);
  EXPECT_NEAR(a.points.back().rate, 0.0, 1e-12);
  EXPECT_NEAR(a.points.back().delta, 1.0, 1e-12);

  const auto b = mask_region_sweep(0.5, Budget::unbounded(), Battery::zero, 100);
  EXPECT_EQ(b.p_min, 0.0);
  EXPECT_GT(std::get<ZeroBatteryPolicy>(*b.points.front().policy_params).p, 0.0);
  EXPECT_EQ(b.points.size(), 100u);

  const auto c = mask_region_sweep(0.5, Budget::of(1.9), Battery::zero, 50);
  EXPECT_TRUE(c.empty_budget);
  EXPECT_TRUE(c.points.empty());
}

TEST(MaskSweep, InfiniteBatteryIsZeroLine) {
  const auto s = mask_region_sweep(0.5, Budget::unbounded(), Battery::infinite, 11);
  ASSERT_EQ(s.points.size(), 11u);
  for (const auto& p : s.points) EXPECT_EQ(p.delta, 0.0);
  EXPECT_NEAR(s.points.back().rate, 1.0, 1e-6);
  EXPECT_TRUE(mask_region_sweep(0.5, Budget::of(1.5), Battery::infinite, 11).empty_budget);
}
