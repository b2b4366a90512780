#pragma once

// Shared helpers for the test suites: seeded generators and a few oracles
// that are written independently of the library code they check.

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace testsupport {

using cplx = std::complex<double>;

inline constexpr std::uint64_t kSeed = 20240611;

class Gen {
 public:
  explicit Gen(std::uint64_t seed = kSeed) : rng_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double normal() { return std::normal_distribution<double>()(rng_); }
  cplx complex_normal() { return {normal(), normal()}; }
  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline bool close_rel(double a, double b, double rel, double abs_floor = 0.0) {
  return std::abs(a - b) <= std::max(rel * std::max(std::abs(a), std::abs(b)), abs_floor);
}

// The blow-up quadrics in (v, t, u, w, x) written out by hand, used as an
// oracle against the library's symbolic construction.
struct BlowupOracle {
  double a1, a2, b2, c1, c2;

  template <typename T>
  Eigen::Matrix<T, 4, 1> operator()(T v, T t, T u, T w, T x) const {
    Eigen::Matrix<T, 4, 1> r;
    r[0] = v * (t / 2.0 + a1 * v + c1 * u) + a1 * x * x + a2 * x * w;
    r[1] = x * (t / 2.0 + 2.0 * a1 * v + 2.0 * c1 * u) + w * (b2 * t + 2.0 * a2 * v + 2.0 * c2 * u);
    r[2] = c1 * x * w - u * (b2 * t + a2 * v + c2 * u) + c2 * w * w;
    r[3] = u * u + w * w + x * x - v * v;
    return r;
  }

  // Columns ordered (v, t, u, w, x).
  Eigen::Matrix<double, 4, 5> jacobian(double v, double t, double u, double w, double x) const {
    Eigen::Matrix<double, 4, 5> J;
    J << 2 * a1 * v + t / 2 + c1 * u, v / 2, c1 * v, a2 * x, 2 * a1 * x + a2 * w,
        2 * a1 * x + 2 * a2 * w, x / 2 + b2 * w, 2 * c1 * x + 2 * c2 * w, b2 * t + 2 * a2 * v + 2 * c2 * u,
        t / 2 + 2 * a1 * v + 2 * c1 * u,
        -a2 * u, -b2 * u, -(b2 * t + a2 * v + 2 * c2 * u), c1 * x + 2 * c2 * w, c1 * w,
        -2 * v, 0, 2 * u, 2 * w, 2 * x;
    return J;
  }
};

}  // namespace testsupport
