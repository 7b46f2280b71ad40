#ifndef AGEAMP_POLICIES_HPP
#define AGEAMP_POLICIES_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "age_metrics.hpp"
#include "core.hpp"
#include "parallel.hpp"
#include "scalar_search.hpp"

namespace ageamp {

/// Zero battery: on an energy arrival, transmit with probability p.
struct ZeroBatteryPolicy {
  double p = 1.0;
};

/// Transmit with probability g in every slot after an update.
struct ZeroWaitPolicy {
  double g = 1.0;
};

/// Stay silent for omega - 1 slots after an update, then transmit with
/// probability g per slot.
struct WaitAndTransmitPolicy {
  int omega = 1;
  double g = 1.0;
};

/// Period period_low with probability g_f, otherwise period_low + 1.
struct ProbPeriodicPolicy {
  int period_low = 1;
  double g_f = 1.0;
};

/// Interval lengths drawn i.i.d. from an explicit law (save-and-transmit).
struct ExplicitPmfPolicy {
  InterUpdatePmf pmf;
};

using PolicySpec = std::variant<ZeroBatteryPolicy, ZeroWaitPolicy, WaitAndTransmitPolicy,
                                ProbPeriodicPolicy, ExplicitPmfPolicy>;

inline const char* policy_name(const PolicySpec& p) {
  constexpr const char* names[] = {"zero-battery", "zero-wait", "wait-and-transmit",
                                   "prob-periodic", "explicit-pmf"};
  return names[p.index()];
}

struct PolicyMetrics {
  double rate = 0.0;  // bits per slot
  double peak_age = 0.0;
  double avg_age = 0.0;
  double mean_interval = 0.0;
  double second_moment = 0.0;
};

struct PolicyChoice {
  PolicySpec spec;
  PolicyMetrics metrics;
};

class TruncationError : public std::length_error {
public:
  using std::length_error::length_error;
};

inline constexpr double kPolicyTailLimit = 1e-10;

/// Rate and ages of a wait-and-transmit policy in closed form.
inline PolicyMetrics wat_metrics(int omega, double g) {
  if (omega < 1) throw std::domain_error("wat_metrics: omega must be >= 1");
  if (!(g > 0.0 && g <= 1.0)) throw std::domain_error("wat_metrics: g must lie in (0, 1]");
  const double m = omega - 1.0;
  PolicyMetrics r;
  r.mean_interval = m + 1.0 / g;
  r.second_moment = m * m + 2.0 * m / g + (2.0 - g) / (g * g);
  r.peak_age = r.mean_interval;
  r.avg_age = r.second_moment / (2.0 * r.mean_interval);
  r.rate = (binary_entropy(g) / g) / r.mean_interval;
  return r;
}

inline PolicyMetrics metrics_from_pmf(const InterUpdatePmf& pmf) {
  const Moments m = pmf_moments(pmf);
  return {pmf_entropy(pmf) / m.mean, m.mean, m.second_moment / (2.0 * m.mean), m.mean,
          m.second_moment};
}

/// The average-age minimizing policy with an infinite battery.
inline ProbPeriodicPolicy prob_periodic_policy(double q) {
  const MinAgeReport m = min_ages_infinite(q);
  return {static_cast<int>(detail::period_floor(q)), *m.g_f};
}

/// Support needed to materialize the policy's interval law with less than
/// kPolicyTailLimit truncated.
inline std::size_t policy_support(const PolicySpec& policy, std::optional<double> q = {}) {
  return std::visit(
      [&](const auto& p) -> std::size_t {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ZeroBatteryPolicy>) {
          if (!q) throw std::invalid_argument("zero-battery policy needs q");
          return std::max<std::size_t>(
              1, InterUpdatePmf::geometric_support_for(p.p * *q, kPolicyTailLimit / 2));
        } else if constexpr (std::is_same_v<T, ZeroWaitPolicy>) {
          return InterUpdatePmf::geometric_support_for(p.g, kPolicyTailLimit / 2);
        } else if constexpr (std::is_same_v<T, WaitAndTransmitPolicy>) {
          return p.omega - 1 + InterUpdatePmf::geometric_support_for(p.g, kPolicyTailLimit / 2);
        } else if constexpr (std::is_same_v<T, ProbPeriodicPolicy>) {
          return p.period_low + 1;
        } else {
          return p.pmf.support_max();
        }
      },
      policy);
}

/// Interval law induced by a policy on {1..v_max}. `q` is required for the
/// zero-battery policy, whose intervals are geometric with parameter p q.
inline InterUpdatePmf policy_to_pmf(const PolicySpec& policy, std::size_t v_max,
                                    std::optional<double> q = {}) {
  auto shifted_geometric = [&](double g, int omega) {
    if (!(g > 0.0 && g <= 1.0)) throw std::domain_error("policy_to_pmf: g must lie in (0, 1]");
    if (v_max < static_cast<std::size_t>(omega)) {
      throw TruncationError("policy_to_pmf: v_max below waiting threshold");
    }
    std::vector<double> m(v_max, 0.0);
    double survive = 1.0;
    for (std::size_t v = omega; v <= v_max; ++v) {
      m[v - 1] = g * survive;
      survive *= 1.0 - g;
    }
    if (survive >= kPolicyTailLimit) {
      throw TruncationError("policy_to_pmf: tail mass " + std::to_string(survive) +
                            " at v_max=" + std::to_string(v_max));
    }
    return InterUpdatePmf(std::move(m), survive);
  };

  return std::visit(
      [&](const auto& p) -> InterUpdatePmf {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ZeroBatteryPolicy>) {
          if (!q) throw std::invalid_argument("policy_to_pmf: zero-battery policy needs q");
          return shifted_geometric(p.p * *q, 1);
        } else if constexpr (std::is_same_v<T, ZeroWaitPolicy>) {
          return shifted_geometric(p.g, 1);
        } else if constexpr (std::is_same_v<T, WaitAndTransmitPolicy>) {
          if (p.omega < 1) throw std::domain_error("policy_to_pmf: omega must be >= 1");
          return shifted_geometric(p.g, p.omega);
        } else if constexpr (std::is_same_v<T, ProbPeriodicPolicy>) {
          if (p.period_low < 1) throw std::domain_error("policy_to_pmf: period must be >= 1");
          if (p.g_f >= 1.0) {
            if (v_max < static_cast<std::size_t>(p.period_low)) throw TruncationError("policy_to_pmf: v_max too small");
            std::vector<double> m(v_max, 0.0);
            m[p.period_low - 1] = 1.0;
            return InterUpdatePmf(std::move(m));
          }
          if (v_max < static_cast<std::size_t>(p.period_low) + 1) throw TruncationError("policy_to_pmf: v_max too small");
          std::vector<double> m(v_max, 0.0);
          m[p.period_low - 1] = p.g_f;
          m[p.period_low] = 1.0 - p.g_f;
          return InterUpdatePmf(std::move(m));
        } else {
          return p.pmf;
        }
      },
      policy);
}

namespace detail {

/// Feasible range of x = 1/g for wait-and-transmit at waiting m = omega - 1.
/// Empty optional when no g in (0, 1] satisfies the budgets and energy causality.
inline std::optional<std::pair<double, double>> wat_inverse_g_range(double q, double m,
                                                                    const AgeConstraints& c) {
  double lo = std::max(1.0, 1.0 / q - m);
  double hi = c.peak.bounded() ? c.peak.value() - m : std::numeric_limits<double>::infinity();
  if (c.average.bounded()) {
    // E[V^2] <= 2 c_a E[V]  <=>  2x^2 + (2m - 1 - 2c_a) x + m^2 - 2 c_a m <= 0
    const double ca = c.average.value();
    const double b = 2.0 * m - 1.0 - 2.0 * ca;
    const double cc = m * m - 2.0 * ca * m;
    const double disc = b * b - 8.0 * cc;
    if (disc < 0) return std::nullopt;
    const double sq = std::sqrt(disc);
    // Stable roots.
    const double t = -0.5 * (b + std::copysign(sq, b));
    double r1 = t / 2.0, r2 = cc / t;
    if (t == 0.0) r1 = r2 = 0.0;
    if (r1 > r2) std::swap(r1, r2);
    lo = std::max(lo, r1);
    hi = std::min(hi, r2);
  }
  const double slack = 1e-12 * std::max(1.0, lo);
  if (lo > hi + slack) return std::nullopt;
  if (lo > hi) hi = lo;
  return std::make_pair(lo, hi);
}

inline double wat_rate(double m, double g) {
  return (binary_entropy(g) / g) / (m + 1.0 / g);
}

}  // namespace detail

struct WatOptions {
  double g_tol = 1e-10;
  unsigned threads = 1;
};

inline int wat_omega_max(double q, const AgeConstraints& c) {
  const double span = c.peak.bounded() ? c.peak.value() : 4.0 / q;
  return static_cast<int>(std::ceil(2.0 * std::max(span, 1.0 / q)));
}

/// Best wait-and-transmit policy under the age budgets. Searches every
/// threshold omega up to wat_omega_max() and, per omega, maximizes the rate
/// over the feasible g interval by golden section. Ties go to the smaller omega.
inline std::optional<PolicyChoice> optimize_wat(double q, const AgeConstraints& c,
                                                const WatOptions& opt = {}) {
  if (!(q > 0.0 && q < 1.0)) throw std::domain_error("optimize_wat: q must lie in (0, 1)");
  const int omega_max = wat_omega_max(q, c);

  struct Candidate {
    bool feasible = false;
    double g = 0.0;
    double rate = 0.0;
  };
  auto per_omega = parallel_map(
      static_cast<std::size_t>(omega_max),
      [&](std::size_t i) -> Candidate {
        const double m = static_cast<double>(i);
        const auto range = detail::wat_inverse_g_range(q, m, c);
        if (!range) return {};
        const double g_hi = std::min(1.0, 1.0 / range->first);
        const double g_lo = std::isfinite(range->second) ? std::min(g_hi, 1.0 / range->second) : 1e-12;
        auto best = golden_section_maximize([&](double g) { return detail::wat_rate(m, g); },
                                            g_lo, g_hi, opt.g_tol);
        return {true, best.x, best.value};
      },
      opt.threads);

  std::optional<PolicyChoice> out;
  for (std::size_t i = 0; i < per_omega.size(); ++i) {
    const auto& cand = per_omega[i];
    if (!cand.feasible) continue;
    if (!out || cand.rate > out->metrics.rate) {
      const int omega = static_cast<int>(i) + 1;
      out = PolicyChoice{WaitAndTransmitPolicy{omega, cand.g}, wat_metrics(omega, cand.g)};
    }
  }
  return out;
}

/// Best zero-wait policy: maximize H_b(g) over
/// max(1/c_p, 2/(1 + 2 c_a)) <= g <= q.
inline std::optional<PolicyChoice> zero_wait_optimize(double q, const AgeConstraints& c) {
  if (!(q > 0.0 && q < 1.0)) throw std::domain_error("zero_wait_optimize: q must lie in (0, 1)");
  double g_lo = 0.0;
  if (c.peak.bounded()) g_lo = std::max(g_lo, 1.0 / c.peak.value());
  if (c.average.bounded()) g_lo = std::max(g_lo, 2.0 / (1.0 + 2.0 * c.average.value()));
  const double g_hi = q;
  if (g_lo > g_hi * (1.0 + 1e-12)) return std::nullopt;
  const double g = std::clamp(std::min(q, 0.5), std::min(g_lo, g_hi), g_hi);
  return PolicyChoice{ZeroWaitPolicy{g}, wat_metrics(1, g)};
}

}  // namespace ageamp

#endif  // AGEAMP_POLICIES_HPP
