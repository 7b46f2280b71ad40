#ifndef AGEAMP_SIMULATOR_HPP
#define AGEAMP_SIMULATOR_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "core.hpp"
#include "policies.hpp"
#include "regions.hpp"

namespace ageamp {

class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class InsufficientData : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Estimators

/// Plug-in entropy rate of a sequence of update intervals, in bits per slot:
/// H(empirical interval law) / empirical mean. Biased low for small samples;
/// `miller_madow` adds the (bins - 1) / (2N) correction.
inline double estimate_interval_entropy(std::span<const std::uint64_t> intervals,
                                        bool miller_madow = false) {
  if (intervals.size() < 2) throw InsufficientData("interval entropy needs at least 2 intervals");
  std::map<std::uint64_t, std::uint64_t> hist;
  double total = 0.0;
  for (auto v : intervals) {
    if (v == 0) throw std::invalid_argument("interval lengths must be positive");
    ++hist[v];
    total += static_cast<double>(v);
  }
  const double n = static_cast<double>(intervals.size());
  double h = 0.0;
  for (const auto& [v, count] : hist) h += plogp(static_cast<double>(count) / n);
  if (miller_madow) h += (static_cast<double>(hist.size()) - 1.0) / (2.0 * n * std::log(2.0));
  return h / (total / n);
}

/// Plug-in mutual information (bits) of a 2x2 joint count table.
inline double mutual_information(const std::array<std::array<std::uint64_t, 2>, 2>& counts,
                                 bool miller_madow = false) {
  double n = 0.0;
  for (const auto& row : counts)
    for (auto c : row) n += static_cast<double>(c);
  if (n == 0.0) return 0.0;
  std::array<double, 2> pe{}, py{};
  for (int e = 0; e < 2; ++e)
    for (int y = 0; y < 2; ++y) {
      pe[e] += counts[e][y] / n;
      py[y] += counts[e][y] / n;
    }
  double mi = 0.0;
  int joint_bins = 0;
  for (int e = 0; e < 2; ++e)
    for (int y = 0; y < 2; ++y) {
      const double pj = counts[e][y] / n;
      if (pj > 0.0) {
        mi += pj * std::log2(pj / (pe[e] * py[y]));
        ++joint_bins;
      }
    }
  if (miller_madow) {
    // H(E) + H(Y) - H(E,Y), each Miller-Madow corrected.
    const int be = (pe[0] > 0) + (pe[1] > 0);
    const int by = (py[0] > 0) + (py[1] > 0);
    mi += ((be - 1) + (by - 1) - (joint_bins - 1)) / (2.0 * n * std::log(2.0));
  }
  return std::max(0.0, mi);
}

/// Per-slot mutual information between energy arrivals and channel outputs.
/// For the memoryless zero-battery strategy this estimates
/// I(E;Y) = H_b(pq) - q H_b(p).
inline double estimate_mi_zero_battery(std::span<const std::uint8_t> e_trace,
                                       std::span<const std::uint8_t> y_trace,
                                       bool miller_madow = false) {
  if (e_trace.size() != y_trace.size()) throw std::invalid_argument("trace length mismatch");
  if (e_trace.size() < 1000) throw InsufficientData("MI estimate needs at least 1000 slots");
  std::array<std::array<std::uint64_t, 2>, 2> counts{};
  for (std::size_t i = 0; i < e_trace.size(); ++i) ++counts[e_trace[i] != 0][y_trace[i] != 0];
  return mutual_information(counts, miller_madow);
}

// ---------------------------------------------------------------------------
// Simulation

struct SimConfig {
  double q = 0.5;
  Battery battery = Battery::zero;
  PolicySpec policy = ZeroBatteryPolicy{1.0};
  std::uint64_t n_slots = 1'000'000;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> save_phase_slots;  // infinite battery only
  bool record_trace = false;
  bool miller_madow = false;
};

/// One record per update.
struct TraceRecord {
  std::uint64_t slot = 0;
  std::uint64_t interval = 0;  // 0 for the first update
  std::uint64_t battery = 0;   // after the transmission
};

struct SimStats {
  std::uint64_t update_count = 0;
  std::optional<double> empirical_peak_age;
  std::optional<double> empirical_avg_age;        // sawtooth time average
  std::optional<double> empirical_avg_age_ratio;  // sum V^2 / (2 sum V)
  std::optional<double> interval_entropy_rate;
  std::optional<double> empirical_mi_per_slot;    // zero battery only
  std::uint64_t battery_violations = 0;
  std::uint64_t final_battery = 0;
  std::uint64_t save_phase_slots = 0;
  bool degenerate = false;
};

struct SimResult {
  SimStats stats;
  std::vector<TraceRecord> trace;
};

/// Save phase long enough for violations to be rare, yet sublinear in n.
inline std::uint64_t default_save_phase(std::uint64_t n_slots, double q) {
  return static_cast<std::uint64_t>(std::ceil(3.0 * std::sqrt(double(n_slots)) / q));
}

namespace detail {

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit draw. Keeps
/// runs reproducible across standard libraries, unlike <random> distributions.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

class IntervalSampler {
public:
  explicit IntervalSampler(const InterUpdatePmf& pmf) : cdf_(pmf.support_max()) {
    double acc = 0.0;
    const auto& m = pmf.masses();
    for (std::size_t i = 0; i < m.size(); ++i) cdf_[i] = (acc += m[i]);
  }
  std::uint64_t operator()(std::mt19937_64& rng) const {
    const double u = unit_uniform(rng) * cdf_.back();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    return static_cast<std::uint64_t>(it - cdf_.begin()) + 1;
  }

private:
  std::vector<double> cdf_;
};

inline void validate(const SimConfig& c) {
  if (!(c.q > 0.0 && c.q <= 1.0)) throw ConfigError("simulate: q must lie in (0, 1]");
  if (c.n_slots == 0) throw ConfigError("simulate: n_slots must be positive");
  const bool zb = std::holds_alternative<ZeroBatteryPolicy>(c.policy);
  if (c.battery == Battery::zero && !zb) {
    throw ConfigError("simulate: zero battery accepts only the zero-battery policy");
  }
  if (c.battery == Battery::infinite && zb) {
    throw ConfigError("simulate: zero-battery policy needs battery=zero");
  }
  if (zb) {
    const double p = std::get<ZeroBatteryPolicy>(c.policy).p;
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("simulate: p outside [0, 1]");
  }
  if (c.battery == Battery::zero && c.save_phase_slots && *c.save_phase_slots != 0) {
    throw ConfigError("simulate: save phase applies to infinite battery only");
  }
}

inline void finish_stats(SimStats& s, const std::vector<std::uint64_t>& update_slots,
                         std::uint64_t n_slots, bool miller_madow) {
  s.update_count = update_slots.size();
  if (update_slots.size() < 2) {
    s.degenerate = true;
    return;
  }
  std::vector<std::uint64_t> intervals(update_slots.size() - 1);
  double sum_v = 0.0, sum_v2 = 0.0;
  for (std::size_t i = 1; i < update_slots.size(); ++i) {
    const auto v = update_slots[i] - update_slots[i - 1];
    intervals[i - 1] = v;
    sum_v += double(v);
    sum_v2 += double(v) * double(v);
  }
  s.empirical_peak_age = sum_v / double(intervals.size());
  s.empirical_avg_age_ratio = sum_v2 / (2.0 * sum_v);
  // Area under A(t) from the first update to the end of the run, including
  // the open sawtooth after the last update.
  const double tail = double(n_slots - update_slots.back());
  const double window = double(n_slots - update_slots.front());
  s.empirical_avg_age = (0.5 * sum_v2 + 0.5 * tail * tail) / window;
  s.interval_entropy_rate = estimate_interval_entropy(intervals, miller_madow);
}

}  // namespace detail

/// Monte Carlo run of the binary energy-harvesting channel.
///
/// Energy arrives i.i.d. Bernoulli(q) and may be spent in the slot it
/// arrives. Zero battery: on arrival, transmit with probability p.
/// Infinite battery: stay silent for the save phase, then transmit at
/// intervals drawn from the policy's law; a due transmission that finds no
/// energy is deferred to the next slot with energy (one violation) and the
/// interval clock restarts there. Deterministic given the seed.
inline SimResult simulate(const SimConfig& config) {
  detail::validate(config);
  std::mt19937_64 rng(config.seed);
  SimResult out;
  SimStats& s = out.stats;
  std::vector<std::uint64_t> updates;
  const std::uint64_t n = config.n_slots;

  if (config.battery == Battery::zero) {
    const double p = std::get<ZeroBatteryPolicy>(config.policy).p;
    std::array<std::array<std::uint64_t, 2>, 2> counts{};
    for (std::uint64_t t = 0; t < n; ++t) {
      const bool e = detail::unit_uniform(rng) < config.q;
      const bool x = e && detail::unit_uniform(rng) < p;
      ++counts[e][x];
      if (x) {
        if (config.record_trace) {
          out.trace.push_back({t, updates.empty() ? 0 : t - updates.back(), 0});
        }
        updates.push_back(t);
      }
    }
    s.empirical_mi_per_slot = mutual_information(counts, config.miller_madow);
  } else {
    const InterUpdatePmf pmf = policy_to_pmf(config.policy, policy_support(config.policy, config.q), config.q);
    const detail::IntervalSampler sample(pmf);
    s.save_phase_slots = config.save_phase_slots.value_or(default_save_phase(n, config.q));
    std::int64_t battery = 0;
    std::uint64_t due = s.save_phase_slots;
    bool deferred = false;
    for (std::uint64_t t = 0; t < n; ++t) {
      const bool e = detail::unit_uniform(rng) < config.q;
      battery += e ? 1 : 0;
      if (t >= due) {
        if (battery >= 1) {
          --battery;
          if (config.record_trace) {
            out.trace.push_back({t, updates.empty() ? 0 : t - updates.back(),
                                 static_cast<std::uint64_t>(battery)});
          }
          updates.push_back(t);
          deferred = false;
          due = t + sample(rng);
        } else if (!deferred) {
          ++s.battery_violations;
          deferred = true;
        }
      }
      if (battery < 0) throw std::logic_error("simulate: battery went negative");
    }
    s.final_battery = static_cast<std::uint64_t>(battery);
  }

  detail::finish_stats(s, updates, n, config.miller_madow);
  return out;
}

}  // namespace ageamp

#endif  // AGEAMP_SIMULATOR_HPP
