#ifndef AGEAMP_SCALAR_SEARCH_HPP
#define AGEAMP_SCALAR_SEARCH_HPP

#include <cmath>
#include <stdexcept>
#include <utility>

namespace ageamp {

struct ScalarOptimum {
  double x = 0.0;
  double value = 0.0;
  int evaluations = 0;
};

/// Golden-section search for the maximum of a unimodal f on [lo, hi].
/// Both endpoints are also evaluated, so a maximum sitting on the boundary
/// is returned exactly. On ties the smaller abscissa wins.
template <typename F>
ScalarOptimum golden_section_maximize(F&& f, double lo, double hi, double x_tol,
                                      int max_iter = 200) {
  if (hi < lo) std::swap(lo, hi);
  ScalarOptimum best{lo, f(lo), 1};
  auto consider = [&](double x, double v) {
    if (v > best.value || (v == best.value && x < best.x)) best = {x, v, best.evaluations};
  };
  if (hi - lo <= x_tol) {
    if (hi > lo) {
      consider(hi, f(hi));
      ++best.evaluations;
    }
    return best;
  }

  static const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  int evals = 3;
  consider(c, fc);
  consider(d, fd);
  for (int i = 0; i < max_iter && (b - a) > x_tol; ++i) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
      consider(c, fc);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
      consider(d, fd);
    }
    ++evals;
  }
  const double fhi = f(hi);
  ++evals;
  consider(hi, fhi);
  best.evaluations = evals;
  return best;
}

/// Bisection for a sign change of f on [lo, hi]. Requires f(lo) and f(hi) of
/// opposite sign (or one of them zero).
template <typename F>
double bisect_root(F&& f, double lo, double hi, double x_tol = 1e-14, int max_iter = 200) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0)) {
    throw std::domain_error("bisect_root: no sign change on bracket");
  }
  for (int i = 0; i < max_iter && (hi - lo) > x_tol; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace ageamp

#endif  // AGEAMP_SCALAR_SEARCH_HPP
