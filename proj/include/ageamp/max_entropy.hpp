#ifndef AGEAMP_MAX_ENTROPY_HPP
#define AGEAMP_MAX_ENTROPY_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "age_metrics.hpp"
#include "core.hpp"

namespace ageamp {

/// Raised when no interval law on the positive integers has mean K and a
/// second moment within the average-age budget.
class InfeasibleAtK : public std::domain_error {
public:
  explicit InfeasibleAtK(double k)
      : std::domain_error("max-entropy problem infeasible at K=" + std::to_string(k)), k_(k) {}
  double k() const noexcept { return k_; }

private:
  double k_;
};

/// Raised when the dual iteration fails to meet its residual tolerance.
/// Carries the last primal iterate.
class NonConvergence : public std::runtime_error {
public:
  NonConvergence(double k, double residual, InterUpdatePmf last)
      : std::runtime_error("max-entropy dual did not converge at K=" + std::to_string(k) +
                           " (residual " + std::to_string(residual) + ")"),
        k_(k), residual_(residual), last_(std::move(last)) {}
  double k() const noexcept { return k_; }
  double residual() const noexcept { return residual_; }
  const InterUpdatePmf& last_iterate() const noexcept { return last_; }

private:
  double k_;
  double residual_;
  InterUpdatePmf last_;
};

struct MaxEntropyOptions {
  double tol = 1e-12;  // relative moment residual
  int max_iter = 200;
};

struct MaxEntropySolution {
  InterUpdatePmf pmf;
  // mass[v] is proportional to exp(-lambda_mean (v-K) - lambda_spread (v-K)^2)
  double lambda_mean = 0.0;
  double lambda_spread = 0.0;
  bool spread_active = false;
  int iterations = 0;
  double residual = 0.0;
  // Mass the fitted family would place beyond the support.
  double tail_estimate = 0.0;
  bool used_fallback = false;
};

/// Smallest E[V^2] of an integer-valued V >= 1 with mean K: all mass on
/// floor(K) and ceil(K).
inline double min_second_moment(double k) {
  const double frac = k - std::floor(k);
  return k * k + frac * (1.0 - frac);
}

namespace detail {

/// Exponential-family evaluation on {1..n} with centered features
/// f1 = v - K, f2 = (v - K)^2 - target_var.
class ExpFamily {
public:
  ExpFamily(double k, double target_var, std::size_t n)
      : k_(k), target_var_(target_var), n_(n), w_(n) {}

  struct Eval {
    double log_partition = 0.0;  // of the centered features
    std::array<double, 2> mean{};  // E[f1], E[f2]
    std::array<double, 3> cov{};   // c11, c12, c22
  };

  Eval evaluate(double l1, double l2, int dim) {
    double shift = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n_; ++i) {
      const double d = static_cast<double>(i + 1) - k_;
      const double s = -l1 * d - (dim == 2 ? l2 * (d * d - target_var_) : 0.0);
      w_[i] = s;
      shift = std::max(shift, s);
    }
    double z = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      w_[i] = std::exp(w_[i] - shift);
      z += w_[i];
    }
    Eval e;
    e.log_partition = shift + std::log(z);
    double m1 = 0, m2 = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      w_[i] /= z;
      const double d = static_cast<double>(i + 1) - k_;
      m1 += w_[i] * d;
      m2 += w_[i] * (d * d - target_var_);
    }
    double c11 = 0, c12 = 0, c22 = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double d = static_cast<double>(i + 1) - k_;
      const double a = d - m1;
      const double b = (d * d - target_var_) - m2;
      c11 += w_[i] * a * a;
      c12 += w_[i] * a * b;
      c22 += w_[i] * b * b;
    }
    e.mean = {m1, m2};
    e.cov = {c11, c12, c22};
    return e;
  }

  /// Mass the same family assigns beyond v = n, relative to the support.
  double tail(double l1, double l2, int dim) const {
    auto score = [&](double v) {
      const double d = v - k_;
      return -l1 * d - (dim == 2 ? l2 * (d * d - target_var_) : 0.0);
    };
    double shift = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n_; ++i) shift = std::max(shift, score(double(i + 1)));
    double z = 0.0;
    for (std::size_t i = 0; i < n_; ++i) z += std::exp(score(double(i + 1)) - shift);
    double t = 0.0;
    const std::size_t limit = 4 * n_ + 1000;
    for (std::size_t v = n_ + 1; v <= n_ + limit; ++v) {
      const double term = std::exp(score(double(v)) - shift) / z;
      t += term;
      if (term < 1e-30 && v > n_ + 8) return t;
      if (t > 1.0) return t;
    }
    return t;
  }

  std::vector<double> masses() const { return w_; }

private:
  double k_;
  double target_var_;
  std::size_t n_;
  std::vector<double> w_;
};

inline InterUpdatePmf min_variance_law(double k) {
  const double lo = std::floor(k);
  const double frac = k - lo;
  const auto lo_i = static_cast<std::size_t>(lo);
  if (frac < 1e-12) return InterUpdatePmf::point_mass(lo_i);
  if (1.0 - frac < 1e-12) return InterUpdatePmf::point_mass(lo_i + 1);
  std::vector<double> m(lo_i + 1, 0.0);
  m[lo_i - 1] = 1.0 - frac;
  m[lo_i] = frac;
  return InterUpdatePmf(std::move(m));
}

struct DualState {
  double l1 = 0.0;
  double l2 = 0.0;
  int iterations = 0;
  double residual = std::numeric_limits<double>::infinity();
  bool converged = false;
};

inline double scaled_residual(const ExpFamily::Eval& e, int dim, double mean_scale,
                              double var_scale) {
  double r = std::abs(e.mean[0]) / mean_scale;
  if (dim == 2) r = std::max(r, std::abs(e.mean[1]) / var_scale);
  return r;
}

/// Damped Newton on the dual log Z(lambda) with Armijo backtracking.
inline DualState newton_dual(ExpFamily& fam, int dim, DualState s, double mean_scale,
                             double var_scale, const MaxEntropyOptions& opt) {
  auto e = fam.evaluate(s.l1, s.l2, dim);
  for (; s.iterations < opt.max_iter; ++s.iterations) {
    s.residual = scaled_residual(e, dim, mean_scale, var_scale);
    if (s.residual <= opt.tol) {
      s.converged = true;
      return s;
    }
    double d1, d2 = 0.0;
    if (dim == 1) {
      if (!(e.cov[0] > 0)) return s;
      d1 = e.mean[0] / e.cov[0];
    } else {
      double a = e.cov[0], b = e.cov[1], c = e.cov[2];
      double det = a * c - b * b;
      if (!(det > 1e-14 * a * c)) {
        const double mu = 1e-10 * (a + c);
        a += mu;
        c += mu;
        det = a * c - b * b;
        if (!(det > 0)) return s;
      }
      d1 = (c * e.mean[0] - b * e.mean[1]) / det;
      d2 = (a * e.mean[1] - b * e.mean[0]) / det;
    }
    // Directional derivative of log Z along (d1, d2) is -E[f] . d.
    const double slope = -(e.mean[0] * d1 + e.mean[1] * d2);
    double step = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      const double n1 = s.l1 + step * d1;
      const double n2 = s.l2 + step * d2;
      auto trial = fam.evaluate(n1, n2, dim);
      if (std::isfinite(trial.log_partition) &&
          trial.log_partition <= e.log_partition + 1e-4 * step * slope + 1e-15 * std::abs(e.log_partition)) {
        s.l1 = n1;
        s.l2 = n2;
        e = trial;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) return s;
  }
  s.residual = scaled_residual(e, dim, mean_scale, var_scale);
  s.converged = s.residual <= opt.tol;
  return s;
}

/// Solves E[V - K] = 0 for lambda_mean at fixed lambda_spread by bisection.
inline double bisect_mean(ExpFamily& fam, int dim, double l2, double mean_scale,
                          const MaxEntropyOptions& opt) {
  auto mean_at = [&](double l1) { return fam.evaluate(l1, l2, dim).mean[0]; };
  double lo = -1.0, hi = 1.0;
  for (int i = 0; i < 200 && mean_at(lo) < 0; ++i) lo *= 2;
  for (int i = 0; i < 200 && mean_at(hi) > 0; ++i) hi *= 2;
  // E[f1] decreases in lambda_mean.
  for (int i = 0; i < 300; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double m = mean_at(mid);
    if (std::abs(m) / mean_scale <= opt.tol * 0.1 || hi - lo <= 1e-16 * std::abs(mid)) return mid;
    if (m > 0) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

inline DualState bisection_dual(ExpFamily& fam, int dim, double mean_scale, double var_scale,
                                const MaxEntropyOptions& opt) {
  DualState s;
  if (dim == 1) {
    s.l1 = bisect_mean(fam, 1, 0.0, mean_scale, opt);
  } else {
    // E[f2] at the mean-matched lambda_mean decreases in lambda_spread.
    auto spread_at = [&](double l2, double& l1) {
      l1 = bisect_mean(fam, 2, l2, mean_scale, opt);
      return fam.evaluate(l1, l2, 2).mean[1];
    };
    double l1 = 0.0;
    double lo = 0.0, hi = 1.0 / var_scale;
    for (int i = 0; i < 200 && spread_at(hi, l1) > 0; ++i) hi *= 2;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      const double m = spread_at(mid, l1);
      s.l1 = l1;
      s.l2 = mid;
      if (std::abs(m) / var_scale <= opt.tol || hi - lo <= 1e-16 * mid) break;
      if (m > 0) lo = mid; else hi = mid;
    }
  }
  auto e = fam.evaluate(s.l1, s.l2, dim);
  s.residual = scaled_residual(e, dim, mean_scale, var_scale);
  s.converged = s.residual <= opt.tol * 1e3;
  return s;
}

}  // namespace detail

/// Maximum-entropy interval law on {1..v_max} with E[V] = K and
/// E[V^2] <= 2 c_a K.
///
/// The solution lies in the exponential family
///   mass[v] ~ exp(-lambda_mean (v-K) - lambda_spread (v-K)^2),  lambda_spread >= 0.
/// The mean-only problem is solved first; the spread dual is activated only
/// when that solution violates the second-moment budget. Duals are found by
/// damped Newton, with nested bisection as the fallback.
inline MaxEntropySolution max_entropy_pmf(double k, Budget c_a, std::size_t v_max,
                                          const MaxEntropyOptions& opt = {}) {
  if (!(k >= 1.0 - 1e-12)) throw std::invalid_argument("max_entropy_pmf: K must be >= 1");
  if (static_cast<double>(v_max) < k - 1e-12) {
    throw std::invalid_argument("max_entropy_pmf: v_max below K");
  }
  k = std::max(k, 1.0);

  std::optional<double> target_var;
  if (c_a.bounded()) {
    const double budget = 2.0 * c_a.value() * k;
    const double slack = 1e-12 * std::max(1.0, k * k);
    const double floor_m2 = min_second_moment(k);
    if (budget < floor_m2 - slack) throw InfeasibleAtK(k);
    if (budget <= floor_m2 + slack) {
      return {detail::min_variance_law(k), 0.0, std::numeric_limits<double>::infinity(), true,
              0, 0.0, 0.0, false};
    }
    target_var = budget - k * k;
  }
  if (k - 1.0 < 1e-12) return {InterUpdatePmf::point_mass(1), 0, 0, false, 0, 0, 0, false};
  if (static_cast<double>(v_max) - k < 1e-12) {
    return {InterUpdatePmf::point_mass(v_max), 0, 0, false, 0, 0, 0, false};
  }

  const double mean_scale = std::max(1.0, k);
  const double var_scale = std::max(1.0, target_var.value_or(1.0));

  auto finish = [&](detail::ExpFamily& fam, const detail::DualState& s, int dim,
                    bool fallback) -> MaxEntropySolution {
    fam.evaluate(s.l1, s.l2, dim);
    InterUpdatePmf pmf(fam.masses());
    if (!s.converged) throw NonConvergence(k, s.residual, pmf);
    return {std::move(pmf), s.l1, dim == 2 ? s.l2 : 0.0, dim == 2, s.iterations, s.residual,
            fam.tail(s.l1, s.l2, dim), fallback};
  };

  // Mean constraint only.
  detail::ExpFamily fam1(k, 0.0, v_max);
  auto s1 = detail::newton_dual(fam1, 1, {}, mean_scale, var_scale, opt);
  bool fallback = false;
  if (!s1.converged) {
    s1 = detail::bisection_dual(fam1, 1, mean_scale, var_scale, opt);
    fallback = true;
  }
  if (!s1.converged) {
    fam1.evaluate(s1.l1, 0.0, 1);
    throw NonConvergence(k, s1.residual, InterUpdatePmf(fam1.masses()));
  }
  // With target_var = 0 the second centered feature is the spread about K.
  const double var1 = fam1.evaluate(s1.l1, 0.0, 1).mean[1];
  if (!target_var || var1 <= *target_var * (1.0 + 1e-14)) {
    return finish(fam1, s1, 1, fallback);
  }

  // Both constraints active.
  detail::ExpFamily fam2(k, *target_var, v_max);
  detail::DualState start;
  start.l1 = s1.l1;
  auto s2 = detail::newton_dual(fam2, 2, start, mean_scale, var_scale, opt);
  if (!s2.converged) {
    const int spent = s2.iterations;
    s2 = detail::bisection_dual(fam2, 2, mean_scale, var_scale, opt);
    s2.iterations += spent;
    fallback = true;
  }
  return finish(fam2, s2, 2, fallback);
}

}  // namespace ageamp

#endif  // AGEAMP_MAX_ENTROPY_HPP
