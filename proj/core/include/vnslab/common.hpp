#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace vnslab {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Numerical blow-up or nonfinite state detected mid-computation.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration (schema violation, constraint violation).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File format / filesystem failures.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fixed-capacity spatial vector; only the first `d` entries are live.
using Vec = std::array<double, 3>;

inline Vec vec_zero() { return {0.0, 0.0, 0.0}; }

inline double dot(const Vec& a, const Vec& b, int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vec& a, int d) { return std::sqrt(dot(a, a, d)); }

inline Vec add(const Vec& a, const Vec& b, int d) {
  Vec r = vec_zero();
  for (int i = 0; i < d; ++i) r[i] = a[i] + b[i];
  return r;
}

inline Vec sub(const Vec& a, const Vec& b, int d) {
  Vec r = vec_zero();
  for (int i = 0; i < d; ++i) r[i] = a[i] - b[i];
  return r;
}

inline Vec scale(const Vec& a, double s, int d) {
  Vec r = vec_zero();
  for (int i = 0; i < d; ++i) r[i] = a[i] * s;
  return r;
}

/// Wrap a coordinate into [0,1).
inline double wrap01(double x) {
  double y = x - std::floor(x);
  if (y >= 1.0) y -= 1.0;  // guards x = -1e-17 rounding up
  return y;
}

/// Neumaier compensated accumulator. Deterministic for a fixed input order.
class KahanSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Deterministic splitmix64 generator with explicit sampling transforms;
/// identical streams on every platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0,1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in [a,b).
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /// Standard normal via Box-Muller (explicit, platform independent).
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
  }

 private:
  std::uint64_t state_;
};

/// Runs fn(begin,end) over [0,n) split into fixed-size blocks. Block
/// boundaries do not depend on the thread count, so any reduction that
/// combines per-block results in block order is bitwise reproducible
/// for every thread count.
void parallel_blocks(std::size_t n, std::size_t block,
                     int threads,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

}  // namespace vnslab
