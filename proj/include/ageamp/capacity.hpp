#ifndef AGEAMP_CAPACITY_HPP
#define AGEAMP_CAPACITY_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "age_metrics.hpp"
#include "core.hpp"
#include "max_entropy.hpp"
#include "parallel.hpp"
#include "scalar_search.hpp"

namespace ageamp {

enum class Feasibility { feasible, infeasible_peak, infeasible_avg };

inline const char* to_string(Feasibility f) {
  switch (f) {
    case Feasibility::feasible: return "feasible";
    case Feasibility::infeasible_peak: return "infeasible_peak";
    case Feasibility::infeasible_avg: return "infeasible_avg";
  }
  return "?";
}

/// Classifies age budgets against the infinite-battery minimum ages.
/// Budgets equal to a minimum (up to rounding) are feasible.
inline Feasibility feasibility(double q, const AgeConstraints& c) {
  const MinAgeReport m = min_ages_infinite(q);
  const double rel = 1e-12;
  if (!c.peak.admits(m.peak_min * (1.0 - rel))) return Feasibility::infeasible_peak;
  if (!c.average.admits(m.avg_min * (1.0 - rel))) return Feasibility::infeasible_avg;
  return Feasibility::feasible;
}

struct CapacityOptions {
  std::size_t coarse_points = 64;
  double k_tol = 1e-4;
  int decrease_run = 8;           // stop extending after this many falling samples
  double tail_limit = 1e-10;
  std::size_t v_max_cap = 1'000'000;
  MaxEntropyOptions inner;
  unsigned threads = 1;
};

struct SweepSample {
  double k = 0.0;
  double rate = 0.0;
  bool feasible = false;
};

struct CapacityDiagnostics {
  std::vector<SweepSample> sweep;  // coarse samples, in K order
  int inner_iterations = 0;        // at k_star
  int evaluations = 0;
  double tail_mass = 0.0;          // at k_star
  std::size_t v_max = 0;           // at k_star
};

enum class CapacityStatus { feasible, infeasible };

struct CapacityResult {
  CapacityStatus status = CapacityStatus::infeasible;
  Feasibility reason = Feasibility::feasible;
  double value = 0.0;   // bits per slot
  double k_star = 0.0;  // optimal mean interval
  std::optional<InterUpdatePmf> pmf_star;
  CapacityDiagnostics diagnostics;

  bool feasible() const noexcept { return status == CapacityStatus::feasible; }
};

/// Max-entropy law at mean K together with its rate H(V)/K.
struct RateAtK {
  double k = 0.0;
  double rate = -std::numeric_limits<double>::infinity();
  std::optional<MaxEntropySolution> solution;
  std::size_t v_max = 0;
};

inline std::size_t default_v_max(double k) {
  return std::max<std::size_t>(50, static_cast<std::size_t>(std::ceil(40.0 * k)));
}

/// Solves the inner problem at K, doubling the support until the fitted
/// family leaves less than tail_limit beyond it. Infeasible K gives -inf.
inline RateAtK rate_at_k(double k, Budget c_a, const CapacityOptions& opt) {
  RateAtK r;
  r.k = k;
  std::size_t v_max = default_v_max(k);
  try {
    for (;;) {
      auto sol = max_entropy_pmf(k, c_a, v_max, opt.inner);
      if (sol.tail_estimate < opt.tail_limit || v_max >= opt.v_max_cap) {
        r.rate = pmf_entropy(sol.pmf) / k;
        r.solution = std::move(sol);
        r.v_max = v_max;
        return r;
      }
      v_max = std::min(opt.v_max_cap, 2 * v_max);
    }
  } catch (const InfeasibleAtK&) {
    return r;
  }
}

namespace detail {

/// Largest K >= k_lo at which some interval law has mean K and
/// E[V^2] <= 2 c_a K. The minimal second moment is convex in K, so the
/// feasible K form an interval.
inline double max_feasible_mean(double k_lo, double c_a) {
  auto slack = [&](double k) { return 2.0 * c_a * k - min_second_moment(k); };
  double hi = 2.0 * c_a;
  if (slack(hi) >= 0) return hi;
  if (slack(k_lo) < 0) return k_lo;
  return bisect_root(slack, k_lo, hi, 1e-13);
}

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> xs;
  if (n <= 1 || hi <= lo) {
    xs.push_back(lo);
    return xs;
  }
  xs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs.push_back(i + 1 == n ? hi : lo + (hi - lo) * static_cast<double>(i) / double(n - 1));
  }
  return xs;
}

inline bool falling_tail(const std::vector<SweepSample>& s, int run) {
  if (static_cast<int>(s.size()) <= run) return false;
  for (std::size_t i = s.size() - run; i < s.size(); ++i) {
    if (!(s[i].rate < s[i - 1].rate)) return false;
  }
  return true;
}

}  // namespace detail

/// Age-constrained capacity of the infinite-battery timing channel:
///   max H(V)/E[V]  s.t.  E[V^2] <= 2 c_a E[V],  1/q <= E[V] <= c_p.
/// Sweeps the mean K on a coarse grid, then refines around the best sample
/// by golden section (the rate is unimodal in K).
inline CapacityResult capacity(double q, const AgeConstraints& c, const CapacityOptions& opt = {}) {
  if (!(q > 0.0 && q < 1.0)) throw std::domain_error("capacity: q must lie in (0, 1)");
  CapacityResult res;
  res.reason = feasibility(q, c);
  if (res.reason != Feasibility::feasible) return res;

  const double k_lo = 1.0 / q;
  double k_limit = c.peak.or_infinity();
  if (c.average.bounded()) {
    k_limit = std::min(k_limit, detail::max_feasible_mean(k_lo, c.average.value()));
  }
  k_limit = std::max(k_limit, k_lo);

  auto eval_many = [&](const std::vector<double>& ks) {
    auto rs = parallel_map(
        ks.size(), [&](std::size_t i) { return rate_at_k(ks[i], c.average, opt); }, opt.threads);
    res.diagnostics.evaluations += static_cast<int>(ks.size());
    return rs;
  };

  std::vector<RateAtK> samples;
  double hi = std::min(k_limit, 8.0 * std::max(2.0, k_lo));
  for (auto& r : eval_many(detail::linspace(k_lo, hi, opt.coarse_points))) {
    samples.push_back(std::move(r));
  }
  auto to_sweep = [&] {
    std::vector<SweepSample> s;
    for (const auto& r : samples) s.push_back({r.k, r.rate, std::isfinite(r.rate)});
    return s;
  };
  // Extend while the rate has not yet settled into a monotone decrease.
  while (hi < k_limit && !detail::falling_tail(to_sweep(), opt.decrease_run)) {
    const double next = std::min(k_limit, 2.0 * hi);
    auto more = detail::linspace(hi, next, opt.coarse_points);
    more.erase(more.begin());
    for (auto& r : eval_many(more)) samples.push_back(std::move(r));
    hi = next;
  }
  res.diagnostics.sweep = to_sweep();

  std::size_t best = 0;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (samples[i].rate > samples[best].rate) best = i;  // ties keep smaller K
  }
  if (!std::isfinite(samples[best].rate)) {
    throw std::runtime_error("capacity: no feasible mean interval found in sweep");
  }

  RateAtK star = samples[best];
  if (samples.size() > 1) {
    const double a = samples[best == 0 ? 0 : best - 1].k;
    const double b = samples[std::min(best + 1, samples.size() - 1)].k;
    std::optional<RateAtK> refined;
    auto f = [&](double k) {
      auto r = rate_at_k(k, c.average, opt);
      ++res.diagnostics.evaluations;
      const double v = r.rate;
      if (!refined || v > refined->rate || (v == refined->rate && k < refined->k)) {
        refined = std::move(r);
      }
      return v;
    };
    golden_section_maximize(f, a, b, opt.k_tol);
    if (refined && (refined->rate > star.rate || (refined->rate == star.rate && refined->k < star.k))) {
      star = std::move(*refined);
    }
  }

  res.status = CapacityStatus::feasible;
  res.value = std::max(0.0, star.rate);
  res.k_star = star.k;
  const MaxEntropySolution& sol = star.solution.value();
  res.diagnostics.inner_iterations = sol.iterations;
  res.diagnostics.tail_mass = sol.tail_estimate;
  res.diagnostics.v_max = star.v_max;
  res.pmf_star = sol.pmf;
  return res;
}

/// Capacity under a peak-age budget alone, in closed form: H_b(alpha) with
/// alpha = min(q, 1/2) when c_p > 2 and alpha = 1/c_p otherwise.
inline CapacityResult capacity_peak_only(double q, Budget c_p) {
  if (!(q > 0.0 && q < 1.0)) throw std::domain_error("capacity_peak_only: q must lie in (0, 1)");
  CapacityResult res;
  if (!c_p.admits((1.0 / q) * (1.0 - 1e-12))) {
    res.reason = Feasibility::infeasible_peak;
    return res;
  }
  const double alpha = (!c_p.bounded() || c_p.value() > 2.0) ? std::min(q, 0.5) : 1.0 / c_p.value();
  res.status = CapacityStatus::feasible;
  res.value = binary_entropy(alpha);
  res.k_star = 1.0 / alpha;
  const std::size_t n = std::max<std::size_t>(50, InterUpdatePmf::geometric_support_for(alpha));
  res.pmf_star = InterUpdatePmf::geometric(alpha, n);
  res.diagnostics.v_max = n;
  res.diagnostics.tail_mass = res.pmf_star->tail_mass();
  return res;
}

}  // namespace ageamp

#endif  // AGEAMP_CAPACITY_HPP
