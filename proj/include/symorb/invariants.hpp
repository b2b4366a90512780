#pragma once

// Coordinates on the resonant subspace C^2, the two involutions R and S, the
// circle action, and the invariant map (z1, z2) -> (N, C, D, delta).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <string_view>

namespace symorb {

/// Point (z1, z2) of the reduced kernel space.
template <typename T>
struct ComplexPair {
  std::complex<T> z1{};
  std::complex<T> z2{};

  friend bool operator==(const ComplexPair&, const ComplexPair&) = default;
};

/// Invariant coordinates of a ComplexPair.  A = |z1|^2, B = |z2|^2 are kept
/// alongside since every other invariant is built from them.
template <typename T>
struct InvariantPoint {
  T N{};
  T C{};
  T D{};
  T delta{};
  T A{};
  T B{};

  /// delta^2 - (N^2 - C^2 - D^2); zero up to rounding for any image point.
  T cone_defect() const { return delta * delta - (N * N - C * C - D * D); }
};

enum class SymmetryKind { SR, AE, Combined };

inline std::string_view to_string(SymmetryKind k) {
  switch (k) {
    case SymmetryKind::SR: return "SR";
    case SymmetryKind::AE: return "AE";
    case SymmetryKind::Combined: return "COMBINED";
  }
  return "?";
}

inline SymmetryKind parse_symmetry_kind(std::string_view s) {
  if (s == "SR") return SymmetryKind::SR;
  if (s == "AE") return SymmetryKind::AE;
  if (s == "COMBINED" || s == "Combined" || s == "combined") return SymmetryKind::Combined;
  throw std::invalid_argument("unknown symmetry kind '" + std::string(s) + "'");
}

template <typename T>
InvariantPoint<T> to_invariants(const ComplexPair<T>& z) {
  InvariantPoint<T> p;
  p.A = std::norm(z.z1);
  p.B = std::norm(z.z2);
  p.N = p.A + p.B;
  p.delta = p.A - p.B;
  const std::complex<T> m = T(2) * z.z1 * z.z2;
  p.C = m.real();
  p.D = m.imag();
  return p;
}

/// A point with the given invariants (one representative of its circle
/// orbit, chosen with z1 real and non-negative).  Requires N >= |delta| and
/// the cone identity to hold within tol * N^2.
template <typename T>
ComplexPair<T> point_from_invariants(T N, T C, T D, T delta, T tol = T(1e-9)) {
  const T A = (N + delta) / T(2), B = (N - delta) / T(2);
  const T scale = std::max(T(1e-300), N * N);
  if (A < -tol * std::max(T(1), N) || B < -tol * std::max(T(1), N))
    throw std::invalid_argument("point_from_invariants: |delta| exceeds N");
  if (std::abs(delta * delta - (N * N - C * C - D * D)) > tol * scale)
    throw std::invalid_argument("point_from_invariants: cone identity violated");
  const T a = std::sqrt(std::max(A, T(0))), b = std::sqrt(std::max(B, T(0)));
  if (a == T(0)) return {std::complex<T>(0), std::complex<T>(b)};
  // 2 z1 z2 = C + i D with z1 = a real.
  std::complex<T> z2 = std::complex<T>(C, D) / (T(2) * a);
  if (std::abs(z2) > T(0)) z2 *= b / std::abs(z2);
  return {std::complex<T>(a), z2};
}

/// R(z1, z2) = (z2, z1).
template <typename T>
ComplexPair<T> apply_R(const ComplexPair<T>& z) {
  return {z.z2, z.z1};
}

/// S(z1, z2) = (conj z2, conj z1).
template <typename T>
ComplexPair<T> apply_S(const ComplexPair<T>& z) {
  return {std::conj(z.z2), std::conj(z.z1)};
}

/// theta . (z1, z2) = (e^{i theta} z1, e^{-i theta} z2).
template <typename T>
ComplexPair<T> apply_circle(T theta, const ComplexPair<T>& z) {
  const std::complex<T> e = std::polar(T(1), theta);
  return {e * z.z1, std::conj(e) * z.z2};
}

/// Named fixed-point subspaces.  SPi is the fixed set of S composed with the
/// circle element theta = pi, i.e. {(z, -conj z)}; RS is Fix(RS) = R^2.
enum class FixedSpace { R, S, SPi, RS };

inline FixedSpace parse_fixed_space(std::string_view s) {
  if (s == "R") return FixedSpace::R;
  if (s == "S") return FixedSpace::S;
  if (s == "S_pi" || s == "SPi") return FixedSpace::SPi;
  if (s == "RS" || s == "SR") return FixedSpace::RS;
  throw std::invalid_argument("unknown fixed-space tag '" + std::string(s) + "'");
}

inline std::string_view to_string(FixedSpace f) {
  switch (f) {
    case FixedSpace::R: return "R";
    case FixedSpace::S: return "S";
    case FixedSpace::SPi: return "S_pi";
    case FixedSpace::RS: return "RS";
  }
  return "?";
}

/// Orthogonal projection onto the named fixed subspace (all four are linear
/// subspaces of R^4, and the involutions are orthogonal, so the projection is
/// (z + g z) / 2 for the defining element g).
template <typename T>
ComplexPair<T> project_to_fixed_space(const ComplexPair<T>& z, FixedSpace which) {
  switch (which) {
    case FixedSpace::R: {
      const auto m = (z.z1 + z.z2) / T(2);
      return {m, m};
    }
    case FixedSpace::S: {
      const auto m = (z.z1 + std::conj(z.z2)) / T(2);
      return {m, std::conj(m)};
    }
    case FixedSpace::SPi: {
      const auto m = (z.z1 - std::conj(z.z2)) / T(2);
      return {m, -std::conj(m)};
    }
    case FixedSpace::RS:
      return {std::complex<T>(z.z1.real(), 0), std::complex<T>(z.z2.real(), 0)};
  }
  throw std::invalid_argument("unknown fixed space");
}

template <typename T>
T distance(const ComplexPair<T>& a, const ComplexPair<T>& b) {
  return std::sqrt(std::norm(a.z1 - b.z1) + std::norm(a.z2 - b.z2));
}

template <typename T>
bool fixed_space_membership(const ComplexPair<T>& z, FixedSpace which, T tol) {
  if (!(tol > T(0))) throw std::invalid_argument("fixed_space_membership: tol must be positive");
  return distance(z, project_to_fixed_space(z, which)) < tol;
}

// Real coordinates (x1, y1, x2, y2) with z_k = x_k + i y_k.

template <typename T>
using Vec4 = Eigen::Matrix<T, 4, 1>;
template <typename T>
using Mat4 = Eigen::Matrix<T, 4, 4>;

template <typename T>
Vec4<T> to_real(const ComplexPair<T>& z) {
  return Vec4<T>(z.z1.real(), z.z1.imag(), z.z2.real(), z.z2.imag());
}

template <typename Derived>
auto to_complex_pair(const Eigen::MatrixBase<Derived>& x) {
  using T = typename Derived::Scalar;
  if (x.size() != 4) throw std::invalid_argument("to_complex_pair: need 4 real components");
  return ComplexPair<T>{{x(0), x(1)}, {x(2), x(3)}};
}

/// R as a real 4x4 matrix: swaps the two complex coordinates.
template <typename T = double>
Mat4<T> R_matrix() {
  Mat4<T> m = Mat4<T>::Zero();
  m(0, 2) = m(1, 3) = m(2, 0) = m(3, 1) = T(1);
  return m;
}

/// S(x1, y1, x2, y2) = (x2, -y2, x1, -y1).
template <typename T = double>
Mat4<T> S_matrix() {
  Mat4<T> m = Mat4<T>::Zero();
  m(0, 2) = m(2, 0) = T(1);
  m(1, 3) = m(3, 1) = T(-1);
  return m;
}

/// Structure matrix diag(J2, J2), J2 = [[0, -1], [1, 0]].
template <typename T = double>
Mat4<T> J_matrix() {
  Mat4<T> m = Mat4<T>::Zero();
  m(0, 1) = m(2, 3) = T(-1);
  m(1, 0) = m(3, 2) = T(1);
  return m;
}

/// Linear part of the flow of H2 = |z1|^2 - |z2|^2: diag(J2, -J2).
template <typename T = double>
Mat4<T> L_matrix() {
  Mat4<T> m = Mat4<T>::Zero();
  m(0, 1) = T(-1);
  m(1, 0) = T(1);
  m(2, 3) = T(1);
  m(3, 2) = T(-1);
  return m;
}

}  // namespace symorb
