#ifndef AGEAMP_AGE_METRICS_HPP
#define AGEAMP_AGE_METRICS_HPP

#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "core.hpp"

namespace ageamp {

/// An age budget in slots that may be unbounded. Unbounded is a distinct
/// state, not a large number.
class Budget {
public:
  static Budget unbounded() noexcept { return Budget(); }
  static Budget of(double slots) {
    if (!std::isfinite(slots)) {
      if (slots > 0) return unbounded();
      throw std::invalid_argument("Budget: non-finite bound");
    }
    return Budget(slots);
  }

  bool bounded() const noexcept { return limit_.has_value(); }
  double value() const {
    if (!limit_) throw std::logic_error("Budget: value() on unbounded budget");
    return *limit_;
  }
  /// The bound, or +inf when unbounded. Only for arithmetic such as min().
  double or_infinity() const noexcept {
    return limit_.value_or(std::numeric_limits<double>::infinity());
  }
  bool admits(double x, double slack = 0.0) const noexcept {
    return !limit_ || x <= *limit_ + slack;
  }

  std::string to_string() const {
    if (!limit_) return "inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", *limit_);
    return buf;
  }

  friend bool operator==(const Budget&, const Budget&) = default;

private:
  Budget() = default;
  explicit Budget(double v) : limit_(v) {}
  std::optional<double> limit_;
};

/// Peak-age budget c_p and average-age budget c_a.
struct AgeConstraints {
  Budget peak = Budget::unbounded();
  Budget average = Budget::unbounded();

  static AgeConstraints none() { return {}; }
  static AgeConstraints make(Budget peak, Budget average) {
    if (peak.bounded() && peak.value() < 1.0) {
      throw std::domain_error("AgeConstraints: c_p must be >= 1");
    }
    if (average.bounded() && average.value() < 0.5) {
      throw std::domain_error("AgeConstraints: c_a must be >= 1/2");
    }
    return {peak, average};
  }
};

struct MinAgeReport {
  double peak_min = 0.0;
  double avg_min = 0.0;
  std::optional<double> g_f;  // infinite battery only
};

/// Peak age of a stationary policy: E[V].
inline double peak_age(const InterUpdatePmf& pmf) { return pmf_moments(pmf).mean; }

/// Average age of a stationary policy: E[V^2] / (2 E[V]).
inline double avg_age(const InterUpdatePmf& pmf) {
  const Moments m = pmf_moments(pmf);
  return m.second_moment / (2.0 * m.mean);
}

namespace detail {

inline void require_positive_q(double q) {
  if (!(q > 0.0 && q <= 1.0)) {
    throw std::domain_error("energy arrival probability must lie in (0, 1]");
  }
}

/// floor(1/q), snapping to the nearest integer when 1/q is within a relative
/// 1e-12 of it.
inline double period_floor(double q) {
  const double inv = 1.0 / q;
  const double r = std::round(inv);
  if (std::abs(inv - r) <= 1e-12 * inv) return r;
  return std::floor(inv);
}

inline bool period_is_integral(double q) {
  const double inv = 1.0 / q;
  return std::abs(inv - std::round(inv)) <= 1e-12 * inv;
}

}  // namespace detail

/// Minimum peak and average age with an infinite battery. The average-age
/// minimizer randomizes between periods floor(1/q) and ceil(1/q); g_f is the
/// probability of the shorter period.
inline MinAgeReport min_ages_infinite(double q) {
  detail::require_positive_q(q);
  MinAgeReport r;
  r.peak_min = 1.0 / q;
  if (detail::period_is_integral(q)) {
    r.g_f = 1.0;
    r.avg_min = 1.0 / (2.0 * q);
  } else {
    const double gf = detail::period_floor(q) + 1.0 - 1.0 / q;
    r.g_f = gf;
    r.avg_min = 1.0 / (2.0 * q) + q * gf * (1.0 - gf) / 2.0;
  }
  return r;
}

/// Minimum ages with zero battery: transmit on every energy arrival.
inline MinAgeReport min_ages_zero(double q) {
  detail::require_positive_q(q);
  return {1.0 / q, (2.0 - q) / (2.0 * q), std::nullopt};
}

}  // namespace ageamp

#endif  // AGEAMP_AGE_METRICS_HPP
