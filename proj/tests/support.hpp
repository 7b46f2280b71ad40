#ifndef AGEAMP_TESTS_SUPPORT_HPP
#define AGEAMP_TESTS_SUPPORT_HPP

#include <cmath>
#include <cstdint>
#include <vector>

namespace testing_support {

// splitmix64: small, seedable, and independent of the library's generator.
class Gen {
public:
  explicit Gen(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
  int integer(int lo, int hi) { return lo + static_cast<int>(next() % std::uint64_t(hi - lo + 1)); }

  // Random law on {1..n} with some exact zeros.
  std::vector<double> simplex(int n) {
    std::vector<double> w(n);
    double s = 0.0;
    for (auto& x : w) {
      x = unit() < 0.2 ? 0.0 : -std::log(1.0 - unit());
      s += x;
    }
    if (s == 0.0) {
      w[0] = 1.0;
      s = 1.0;
    }
    for (auto& x : w) x /= s;
    return w;
  }

private:
  std::uint64_t state_;
};

// Entropy in bits computed with natural logs, as a cross-check.
inline double entropy_bits(const std::vector<double>& p) {
  double h = 0.0;
  for (double x : p)
    if (x > 0) h -= x * std::log(x);
  return h / std::log(2.0);
}

inline double hb(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return -(x * std::log(x) + (1 - x) * std::log(1 - x)) / std::log(2.0);
}

}  // namespace testing_support

#endif
