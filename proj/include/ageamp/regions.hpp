#ifndef AGEAMP_REGIONS_HPP
#define AGEAMP_REGIONS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "age_metrics.hpp"
#include "capacity.hpp"
#include "core.hpp"
#include "parallel.hpp"
#include "policies.hpp"
#include "scalar_search.hpp"

namespace ageamp {

enum class Battery { zero, infinite };

inline const char* to_string(Battery b) { return b == Battery::zero ? "zero" : "infinite"; }

enum class DeltaKind { amplification, masking_lower_bound };

inline const char* to_string(DeltaKind k) {
  return k == DeltaKind::amplification ? "amplification" : "masking_lower_bound";
}

enum class Source { best_achievable, wait_and_transmit, zero_wait, zero_battery };

inline const char* to_string(Source s) {
  switch (s) {
    case Source::best_achievable: return "best_achievable";
    case Source::wait_and_transmit: return "wait_and_transmit";
    case Source::zero_wait: return "zero_wait";
    case Source::zero_battery: return "zero_battery";
  }
  return "?";
}

inline constexpr Source kAllSources[] = {Source::best_achievable, Source::wait_and_transmit,
                                         Source::zero_wait, Source::zero_battery};

enum class PointStatus { ok, infeasible_budget, rate_unattainable };

inline const char* to_string(PointStatus s) {
  switch (s) {
    case PointStatus::ok: return "ok";
    case PointStatus::infeasible_budget: return "infeasible_budget";
    case PointStatus::rate_unattainable: return "rate_unattainable";
  }
  return "?";
}

/// One sample of an achievable (rate, ESU reduction) boundary, with the ages
/// of the operating policy that produced it.
struct RegionPoint {
  double rate = 0.0;
  double delta = 0.0;
  DeltaKind delta_kind = DeltaKind::amplification;
  double peak_age = std::numeric_limits<double>::quiet_NaN();
  double avg_age = std::numeric_limits<double>::quiet_NaN();
  Source source = Source::best_achievable;
  std::optional<PolicySpec> policy_params;
  Budget c_p = Budget::unbounded();
  Budget c_a = Budget::unbounded();
  PointStatus status = PointStatus::ok;
};

class InfeasibleConstraints : public std::domain_error {
public:
  explicit InfeasibleConstraints(Feasibility why)
      : std::domain_error(std::string("age constraints infeasible: ") + to_string(why)) {}
};

// ---------------------------------------------------------------------------
// Zero battery

struct ZeroBatteryAmp {
  double r_max = 0.0;
  double delta_cap = 0.0;
  double sum_cap = 0.0;
};

struct ZeroBatteryMask {
  double r_max = 0.0;
  double delta_m_lower = 0.0;
};

struct AgePair {
  double peak = 0.0;
  double avg = 0.0;
};

namespace detail {
inline void require_strategy(double p, double q) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("zero battery: p outside [0, 1]");
  if (!(q > 0.0 && q < 1.0)) throw std::domain_error("zero battery: q outside (0, 1)");
}
}  // namespace detail

/// Message rate sustainable by the zero-battery strategy P[U=(0,1)] = p.
inline double zero_battery_rate(double p, double q) {
  detail::require_strategy(p, q);
  return binary_entropy(p * q) - p * binary_entropy(q);
}

inline ZeroBatteryAmp zero_battery_amp(double p, double q) {
  detail::require_strategy(p, q);
  return {zero_battery_rate(p, q), binary_entropy(q), binary_entropy(p * q)};
}

inline ZeroBatteryMask zero_battery_mask(double p, double q) {
  detail::require_strategy(p, q);
  return {zero_battery_rate(p, q), p * binary_entropy(q)};
}

inline AgePair zero_battery_age(double p, double q) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("zero battery: p outside [0, 1]");
  if (!(q > 0.0 && q <= 1.0)) throw std::domain_error("zero battery: q outside (0, 1]");
  if (p == 0.0) {
    const double inf = std::numeric_limits<double>::infinity();
    return {inf, inf};
  }
  const double pq = p * q;
  return {1.0 / pq, (2.0 - pq) / (2.0 * pq)};
}

/// Smallest transmission probability meeting both age budgets with zero
/// battery (an average budget c_a acts as a peak budget c_a + 1/2). May
/// exceed 1, meaning no p works.
inline double zero_battery_p_min(double q, const AgeConstraints& c) {
  double p = 0.0;
  if (c.peak.bounded()) p = std::max(p, 1.0 / (q * c.peak.value()));
  if (c.average.bounded()) p = std::max(p, 1.0 / (q * (c.average.value() + 0.5)));
  return p;
}

/// Largest p whose zero-battery rate equals r. The rate is concave in p and
/// vanishes at p = 0 and p = 1, so this root sits right of the maximizer.
inline std::optional<double> zero_battery_rate_root(double q, double r) {
  const auto peak = golden_section_maximize([&](double p) { return zero_battery_rate(p, q); }, 0.0,
                                            1.0, 1e-12);
  if (peak.value < r) return std::nullopt;
  if (r <= 0.0) return 1.0;
  return bisect_root([&](double p) { return zero_battery_rate(p, q) - r; }, peak.x, 1.0, 1e-15);
}

struct ZeroBatteryOptions {
  std::size_t grid = 10'000;
};

/// Best amplification with zero battery at rate >= r_min under the budgets.
/// Uniform p grid on [p_min, 1], then bisection on the rate edge and golden
/// refinement around the best grid point.
inline RegionPoint zero_battery_best_amp(double q, const AgeConstraints& c, double r_min,
                                         const ZeroBatteryOptions& opt = {}) {
  RegionPoint pt;
  pt.source = Source::zero_battery;
  pt.c_p = c.peak;
  pt.c_a = c.average;
  const double hq = binary_entropy(q);
  const double p_min = std::max(zero_battery_p_min(q, c), 0.0);
  if (p_min > 1.0 * (1.0 + 1e-12)) {
    pt.status = PointStatus::infeasible_budget;
    return pt;
  }
  // Budgets are admitted with the same relative slack as feasibility().
  const double lo = std::min(p_min * (1.0 - 1e-12), 1.0);
  auto ok = [&](double p) { return zero_battery_rate(p, q) >= r_min; };
  auto objective = [&](double p) {
    if (p < lo || p > 1.0 || !ok(p)) return -std::numeric_limits<double>::infinity();
    return std::min(hq, binary_entropy(p * q) - r_min);
  };

  const std::size_t n = std::max<std::size_t>(2, opt.grid + 1);
  std::vector<double> ps(n);
  for (std::size_t i = 0; i < n; ++i) {
    ps[i] = (i + 1 == n) ? 1.0 : lo + (1.0 - lo) * double(i) / double(n - 1);
  }
  std::optional<std::size_t> best;
  double best_val = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double v = objective(ps[i]);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  double best_p = best ? ps[*best] : std::numeric_limits<double>::quiet_NaN();

  auto consider = [&](double p) {
    const double v = objective(p);
    if (v > best_val || (v == best_val && p > best_p)) {
      best_val = v;
      best_p = p;
    }
  };
  if (best) {
    const std::size_t i = *best;
    // Rate edge between a feasible grid point and an infeasible neighbour.
    for (std::size_t j : {i + 1, i - 1}) {
      if (j >= n || ok(ps[j])) continue;
      const double a = std::min(ps[i], ps[j]), b = std::max(ps[i], ps[j]);
      double edge = bisect_root([&](double p) { return zero_battery_rate(p, q) - r_min; }, a, b, 1e-15);
      // Step onto the feasible side.
      for (int k = 0; k < 8 && !ok(edge); ++k) edge = (j > i) ? std::nextafter(edge, 0.0) : std::nextafter(edge, 2.0);
      consider(edge);
    }
    const double a = ps[i == 0 ? 0 : i - 1];
    const double b = ps[std::min(i + 1, n - 1)];
    const auto g = golden_section_maximize(objective, a, b, 1e-13);
    consider(g.x);
  } else {
    // Feasible p may exist strictly between grid points only at the rate peak.
    const auto root = zero_battery_rate_root(q, r_min);
    if (root && *root >= lo) consider(*root);
  }

  if (!std::isfinite(best_val)) {
    pt.status = PointStatus::rate_unattainable;
    return pt;
  }
  const AgePair ages = zero_battery_age(best_p, q);
  pt.rate = r_min;
  pt.delta = std::max(0.0, best_val);
  pt.peak_age = ages.peak;
  pt.avg_age = ages.avg;
  pt.policy_params = ZeroBatteryPolicy{best_p};
  return pt;
}

// ---------------------------------------------------------------------------
// Infinite battery

struct RegionOptions {
  CapacityOptions capacity;
  WatOptions wat;
  ZeroBatteryOptions zero_battery;
};

/// Masking lower bound with an infinite battery: perfect masking is possible
/// at every achievable rate.
constexpr double mask_bound_infinite() noexcept { return 0.0; }

/// Boundary of {R + Delta_a <= C(c_p, c_a, q), 0 <= Delta_a <= H_b(q)},
/// sampled at `grid` values of Delta_a from 0 to its maximum. When the
/// state-entropy cap binds, the corner (0, H_b(q)) closes the boundary.
inline std::vector<RegionPoint> amp_region_infinite(double q, const AgeConstraints& c,
                                                    std::size_t grid,
                                                    const CapacityOptions& opt = {}) {
  const CapacityResult cap = capacity(q, c, opt);
  if (!cap.feasible()) throw InfeasibleConstraints(cap.reason);
  const double hq = binary_entropy(q);
  const double d_max = std::min(cap.value, hq);
  const double peak = cap.k_star;
  const double avg = ageamp::avg_age(*cap.pmf_star);

  auto make = [&](double r, double d) {
    RegionPoint p;
    p.rate = std::max(0.0, r);
    p.delta = d;
    p.peak_age = peak;
    p.avg_age = avg;
    p.source = Source::best_achievable;
    p.policy_params = ExplicitPmfPolicy{*cap.pmf_star};
    p.c_p = c.peak;
    p.c_a = c.average;
    return p;
  };
  std::vector<RegionPoint> out;
  if (cap.value <= 0.0 || grid < 2) {
    out.push_back(make(cap.value, 0.0));
    return out;
  }
  for (std::size_t i = 0; i < grid; ++i) {
    const double d = (i + 1 == grid) ? d_max : d_max * double(i) / double(grid - 1);
    out.push_back(make(cap.value - d, d));
  }
  if (cap.value > hq + 1e-9) out.push_back(make(0.0, hq));
  return out;
}

/// Largest Delta_a with R >= r_min for the chosen source, as a full point.
inline RegionPoint amp_point(double q, const AgeConstraints& c, double r_min, Source source,
                             const RegionOptions& opt = {}) {
  if (!(r_min >= 0.0)) throw std::domain_error("r_min must be >= 0");
  if (source == Source::zero_battery) return zero_battery_best_amp(q, c, r_min, opt.zero_battery);

  RegionPoint pt;
  pt.source = source;
  pt.c_p = c.peak;
  pt.c_a = c.average;
  double rate = 0.0;
  switch (source) {
    case Source::best_achievable: {
      const CapacityResult cap = capacity(q, c, opt.capacity);
      if (!cap.feasible()) {
        pt.status = PointStatus::infeasible_budget;
        return pt;
      }
      rate = cap.value;
      pt.peak_age = cap.k_star;
      pt.avg_age = ageamp::avg_age(*cap.pmf_star);
      pt.policy_params = ExplicitPmfPolicy{*cap.pmf_star};
      break;
    }
    case Source::wait_and_transmit:
    case Source::zero_wait: {
      const auto choice = source == Source::zero_wait ? zero_wait_optimize(q, c)
                                                      : optimize_wat(q, c, opt.wat);
      if (!choice) {
        pt.status = PointStatus::infeasible_budget;
        return pt;
      }
      rate = choice->metrics.rate;
      pt.peak_age = choice->metrics.peak_age;
      pt.avg_age = choice->metrics.avg_age;
      pt.policy_params = choice->spec;
      break;
    }
    case Source::zero_battery: break;
  }
  if (rate < r_min) {
    pt.status = PointStatus::rate_unattainable;
    return pt;
  }
  pt.rate = r_min;
  pt.delta = std::min(rate - r_min, binary_entropy(q));
  return pt;
}

/// Largest Delta_a with R >= r_min; zero when the rate floor is unattainable.
inline double max_amp_given_rate(double q, const AgeConstraints& c, double r_min, Source source,
                                 const RegionOptions& opt = {}) {
  return amp_point(q, c, r_min, source, opt).delta;
}

/// Best Delta_a against a grid of peak budgets, for each requested source.
/// Output is ordered by grid index, then by the order of `sources`.
inline std::vector<RegionPoint> tradeoff_sweep(double q, double r_min, Budget c_a,
                                               const std::vector<double>& c_p_grid,
                                               const std::vector<Source>& sources,
                                               const RegionOptions& opt = {}, unsigned threads = 1) {
  const std::size_t ns = sources.size();
  return parallel_map(
      c_p_grid.size() * ns,
      [&](std::size_t idx) {
        const Budget cp = Budget::of(c_p_grid[idx / ns]);
        AgeConstraints c{cp, c_a};
        return amp_point(q, c, r_min, sources[idx % ns], opt);
      },
      threads);
}

struct MaskSweep {
  std::vector<RegionPoint> points;
  bool empty_budget = false;  // c_p unattainable even at p = 1
  double p_min = 0.0;
};

/// (R, Delta_m) boundary. Zero battery sweeps p over [p_min(c_p), 1];
/// infinite battery is the line Delta_m = 0 up to R = C(c_p, c_a, q).
inline MaskSweep mask_region_sweep(double q, Budget c_p, Battery battery, std::size_t grid,
                                   Budget c_a = Budget::unbounded(),
                                   const CapacityOptions& opt = {}) {
  MaskSweep out;
  if (grid < 2) grid = 2;
  const AgeConstraints c{c_p, c_a};
  if (battery == Battery::infinite) {
    const CapacityResult cap = capacity(q, c, opt);
    if (!cap.feasible()) {
      out.empty_budget = true;
      return out;
    }
    const double avg = ageamp::avg_age(*cap.pmf_star);
    for (std::size_t i = 0; i < grid; ++i) {
      RegionPoint p;
      p.rate = (i + 1 == grid) ? cap.value : cap.value * double(i) / double(grid - 1);
      p.delta = mask_bound_infinite();
      p.delta_kind = DeltaKind::masking_lower_bound;
      p.peak_age = cap.k_star;
      p.avg_age = avg;
      p.source = Source::best_achievable;
      p.c_p = c_p;
      p.c_a = c_a;
      out.points.push_back(std::move(p));
    }
    return out;
  }

  const double raw = zero_battery_p_min(q, c);
  out.p_min = std::clamp(raw, 0.0, 1.0);
  if (raw > 1.0 * (1.0 + 1e-12)) {
    out.empty_budget = true;
    return out;
  }
  for (std::size_t i = 0; i < grid; ++i) {
    double p;
    if (out.p_min == 0.0) {
      p = double(i + 1) / double(grid);
    } else {
      p = (i + 1 == grid) ? 1.0 : out.p_min + (1.0 - out.p_min) * double(i) / double(grid - 1);
    }
    const ZeroBatteryMask m = zero_battery_mask(p, q);
    const AgePair a = zero_battery_age(p, q);
    RegionPoint pt;
    pt.rate = m.r_max;
    pt.delta = m.delta_m_lower;
    pt.delta_kind = DeltaKind::masking_lower_bound;
    pt.peak_age = a.peak;
    pt.avg_age = a.avg;
    pt.source = Source::zero_battery;
    pt.policy_params = ZeroBatteryPolicy{p};
    pt.c_p = c_p;
    pt.c_a = c_a;
    out.points.push_back(std::move(pt));
  }
  return out;
}

}  // namespace ageamp

#endif  // AGEAMP_REGIONS_HPP
