#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "ageamp/core.hpp"
#include "support.hpp"

using namespace ageamp;
using testing_support::Gen;

TEST(BinaryEntropy, Examples) {
  EXPECT_DOUBLE_EQ(binary_entropy(0.5), 1.0);
  EXPECT_DOUBLE_EQ(binary_entropy(0.0), 0.0);
  EXPECT_DOUBLE_EQ(binary_entropy(1.0), 0.0);
  EXPECT_NEAR(binary_entropy(0.2), 0.721928094887362, 1e-12);
}

TEST(BinaryEntropy, RejectsOutOfRange) {
  EXPECT_THROW(binary_entropy(-0.01), std::domain_error);
  EXPECT_THROW(binary_entropy(1.01), std::domain_error);
  EXPECT_THROW(binary_entropy(std::nan("")), std::domain_error);
}

TEST(BinaryEntropy, SymmetricAndMatchesNaturalLogForm) {
  Gen gen(11);
  for (int i = 0; i < 2000; ++i) {
    const double x = gen.unit();
    EXPECT_NEAR(binary_entropy(x), binary_entropy(1.0 - x), 1e-12);
    EXPECT_NEAR(binary_entropy(x), testing_support::hb(x), 1e-12);
  }
}

TEST(Probability, Validates) {
  EXPECT_DOUBLE_EQ(Probability(0.3).value(), 0.3);
  EXPECT_THROW(Probability(-1e-9), std::domain_error);
  EXPECT_THROW(Probability(1.5), std::domain_error);
}

TEST(InterUpdatePmf, ConstructionRules) {
  EXPECT_THROW(InterUpdatePmf({}), std::invalid_argument);
  EXPECT_THROW(InterUpdatePmf({0.5, -0.1, 0.6}), std::invalid_argument);
  EXPECT_THROW(InterUpdatePmf({0.5, 0.4}), std::invalid_argument);
  // Small deviations are renormalized.
  InterUpdatePmf p({0.5, 0.5 + 5e-10});
  EXPECT_NEAR(p(1) + p(2), 1.0, 1e-15);
  EXPECT_EQ(p.support_max(), 2u);
  EXPECT_EQ(p(0), 0.0);
  EXPECT_EQ(p(3), 0.0);
}

TEST(InterUpdatePmf, GeometricReportsTail) {
  const auto g = InterUpdatePmf::geometric(0.5, 40);
  EXPECT_NEAR(g.tail_mass(), std::pow(0.5, 40), 1e-25);
  EXPECT_THROW(InterUpdatePmf::geometric(0.5, 10), std::length_error);
  const std::size_t n = InterUpdatePmf::geometric_support_for(0.2);
  EXPECT_LT(std::pow(0.8, double(n)), 1e-10);
  EXPECT_GE(std::pow(0.8, double(n - 1)), 1e-10);
}

TEST(PmfEntropy, Examples) {
  EXPECT_DOUBLE_EQ(pmf_entropy(InterUpdatePmf::point_mass(3)), 0.0);
  EXPECT_DOUBLE_EQ(pmf_entropy(InterUpdatePmf({0.5, 0.5})), 1.0);
  EXPECT_NEAR(pmf_entropy(InterUpdatePmf::geometric(0.5, 30)), 2.0, 1e-7);
}

TEST(PmfEntropy, GeometricMatchesClosedForm) {
  for (double g : {0.05, 0.2, 0.37, 0.5, 0.81}) {
    const auto p = InterUpdatePmf::geometric(g, InterUpdatePmf::geometric_support_for(g, 1e-14));
    EXPECT_NEAR(pmf_entropy(p), testing_support::hb(g) / g, 1e-9) << g;
  }
}

TEST(PmfMoments, Examples) {
  const auto a = pmf_moments(InterUpdatePmf::point_mass(4));
  EXPECT_DOUBLE_EQ(a.mean, 4.0);
  EXPECT_DOUBLE_EQ(a.second_moment, 16.0);
  const auto b = pmf_moments(InterUpdatePmf({0.5, 0.0, 0.5}));
  EXPECT_DOUBLE_EQ(b.mean, 2.0);
  EXPECT_DOUBLE_EQ(b.second_moment, 5.0);
  const auto c = pmf_moments(InterUpdatePmf::geometric(0.2, 200));
  EXPECT_NEAR(c.mean, 5.0, 1e-6);
  EXPECT_NEAR(c.second_moment, 45.0, 1e-6);
}

TEST(PmfProperties, EntropyBoundAndJensen) {
  Gen gen(2024);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = gen.integer(1, 40);
    const auto w = gen.simplex(n);
    const InterUpdatePmf p(w);
    EXPECT_LE(pmf_entropy(p), std::log2(double(n)) + 1e-12);
    EXPECT_NEAR(pmf_entropy(p), testing_support::entropy_bits(w), 1e-10);
    const auto m = pmf_moments(p);
    EXPECT_GE(m.second_moment, m.mean * m.mean - 1e-9 * m.second_moment);
    int support = 0;
    for (double x : w) support += x > 0;
    if (support > 1) {
      EXPECT_GT(m.second_moment - m.mean * m.mean, 1e-12);
    }
  }
}

TEST(TotalVariation, Basics) {
  const auto a = InterUpdatePmf::point_mass(2);
  const auto b = InterUpdatePmf({0.5, 0.5});
  EXPECT_DOUBLE_EQ(total_variation(a, a), 0.0);
  EXPECT_DOUBLE_EQ(total_variation(a, b), 0.5);
  EXPECT_DOUBLE_EQ(total_variation(a, InterUpdatePmf::point_mass(5)), 1.0);
}
