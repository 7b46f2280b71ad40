#ifndef AGEAMP_CORE_HPP
#define AGEAMP_CORE_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ageamp {

/// A probability value, checked to lie in [0, 1] on construction.
class Probability {
public:
  constexpr Probability() = default;

  explicit Probability(double value) : value_(value) {
    if (!(value >= 0.0 && value <= 1.0)) {
      throw std::domain_error("probability outside [0, 1]: " + std::to_string(value));
    }
  }

  constexpr double value() const noexcept { return value_; }
  constexpr operator double() const noexcept { return value_; }

private:
  double value_ = 0.0;
};

/// -x log2 x with the 0 log 0 = 0 convention.
inline double plogp(double x) noexcept {
  return x > 0.0 ? -x * std::log2(x) : 0.0;
}

/// Binary entropy in bits.
inline double binary_entropy(double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::domain_error("binary_entropy: argument outside [0, 1]");
  }
  return plogp(x) + plogp(1.0 - x);
}

struct Moments {
  double mean = 0.0;
  double second_moment = 0.0;
};

/// Distribution of the inter-update interval V on {1, ..., support_max}.
///
/// Construction validates the masses. A total within 1e-9 of one is
/// renormalized; anything further off is rejected. `tail_mass` records
/// probability that was truncated away beyond support_max when the PMF was
/// materialized from an infinite-support law (zero for explicit PMFs).
class InterUpdatePmf {
public:
  static constexpr double kNormTolerance = 1e-12;
  static constexpr double kRenormLimit = 1e-9;

  explicit InterUpdatePmf(std::vector<double> mass, double tail_mass = 0.0)
      : mass_(std::move(mass)), tail_mass_(tail_mass) {
    if (mass_.empty()) {
      throw std::invalid_argument("InterUpdatePmf: empty support");
    }
    double total = 0.0;
    for (double m : mass_) {
      if (!(m >= 0.0) || !std::isfinite(m)) {
        throw std::invalid_argument("InterUpdatePmf: negative or non-finite mass");
      }
      total += m;
    }
    const double dev = std::abs(total - 1.0);
    if (dev >= kRenormLimit) {
      throw std::invalid_argument("InterUpdatePmf: masses sum to " + std::to_string(total));
    }
    if (dev > 0.0) {
      for (double& m : mass_) m /= total;
    }
  }

  static InterUpdatePmf point_mass(std::size_t v) {
    if (v < 1) throw std::invalid_argument("point_mass: v must be >= 1");
    std::vector<double> m(v, 0.0);
    m[v - 1] = 1.0;
    return InterUpdatePmf(std::move(m));
  }

  /// Geometric law P[V = v] = g (1-g)^(v-1) truncated at v_max. The truncated
  /// tail is renormalized into the support and reported via tail_mass().
  static InterUpdatePmf geometric(double g, std::size_t v_max) {
    if (!(g > 0.0 && g <= 1.0)) throw std::domain_error("geometric: g outside (0, 1]");
    if (v_max < 1) throw std::invalid_argument("geometric: v_max must be >= 1");
    std::vector<double> m(v_max);
    double survive = 1.0;
    for (std::size_t i = 0; i < v_max; ++i) {
      m[i] = g * survive;
      survive *= 1.0 - g;
    }
    // survive == (1-g)^v_max, the mass beyond the support.
    if (survive >= kRenormLimit) {
      throw std::length_error("geometric: tail mass " + std::to_string(survive) +
                              " too large at v_max=" + std::to_string(v_max));
    }
    return InterUpdatePmf(std::move(m), survive);
  }

  /// Smallest v_max at which a geometric(g) law leaves less than `tail` mass.
  static std::size_t geometric_support_for(double g, double tail = 1e-10) {
    if (g >= 1.0) return 1;
    const double n = std::ceil(std::log(tail) / std::log1p(-g));
    return static_cast<std::size_t>(std::max(1.0, n));
  }

  std::size_t support_max() const noexcept { return mass_.size(); }
  double tail_mass() const noexcept { return tail_mass_; }

  /// Mass at interval length v (1-based); zero outside the support.
  double operator()(std::size_t v) const noexcept {
    return (v >= 1 && v <= mass_.size()) ? mass_[v - 1] : 0.0;
  }

  const std::vector<double>& masses() const noexcept { return mass_; }

private:
  std::vector<double> mass_;
  double tail_mass_ = 0.0;
};

/// Shannon entropy of the interval law in bits.
inline double pmf_entropy(const InterUpdatePmf& pmf) {
  double h = 0.0;
  for (double m : pmf.masses()) h += plogp(m);
  return h;
}

inline Moments pmf_moments(const InterUpdatePmf& pmf) {
  Moments r;
  const auto& m = pmf.masses();
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double v = static_cast<double>(i + 1);
    r.mean += v * m[i];
    r.second_moment += v * v * m[i];
  }
  return r;
}

/// Total variation distance between two interval laws.
inline double total_variation(const InterUpdatePmf& a, const InterUpdatePmf& b) {
  const std::size_t n = std::max(a.support_max(), b.support_max());
  double s = 0.0;
  for (std::size_t v = 1; v <= n; ++v) s += std::abs(a(v) - b(v));
  return 0.5 * s;
}

}  // namespace ageamp

#endif  // AGEAMP_CORE_HPP
