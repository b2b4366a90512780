#include "doctest.h"
#include "support.hpp"
#include "symorb/combined_analysis.hpp"

#include <numbers>

using namespace symorb;

namespace {

constexpr double kPi = std::numbers::pi;

ReducedHamiltonian combined(double n, double c) { return reduced_from_leading(SymmetryKind::Combined, n, c); }

ReducedHamiltonian with_extra(double n, double c) {
  auto rh = combined(n, c);
  rh.g.add_term({2, 0, 0, 0}, 0.6);
  rh.g.add_term({0, 1, 2, 0}, -0.3);
  rh.g.add_term({1, 0, 0, 1}, 0.25);
  rh.g.add_term({0, 0, 2, 0}, 0.4);
  return rh;
}

// h = delta g from hand-written invariants; gradient by central differences.
Eigen::Vector4d grad_h(const RPoly& g, const Eigen::Vector4d& p, double tau, double step = 1e-7) {
  auto h = [&](const Eigen::Vector4d& q) {
    const double A = q[0] * q[0] + q[1] * q[1], B = q[2] * q[2] + q[3] * q[3];
    const double C = 2 * (q[0] * q[2] - q[1] * q[3]), D = 2 * (q[0] * q[3] + q[1] * q[2]);
    return (A - B) * evaluate(g, std::vector<double>{A + B, C, D, tau});
  };
  Eigen::Vector4d out;
  for (int i = 0; i < 4; ++i) {
    Eigen::Vector4d a = p, b = p;
    a[i] += step;
    b[i] -= step;
    out[i] = (h(a) - h(b)) / (2 * step);
  }
  return out;
}

double orbit_distance_to(const ComplexPair<double>& z, FixedSpace f) {
  double best = 1e300;
  for (int k = 0; k < 3600; ++k) {
    const auto y = apply_circle(2 * kPi * k / 3600, z);
    best = std::min(best, distance(y, project_to_fixed_space(y, f)));
  }
  return best;
}

}  // namespace

TEST_CASE("cone family: closed form tau and S annotations") {
  const double n = 0.8, c = -0.5;
  const auto fam = cone_family(combined(n, c), {1e-2, 5e-3, 2.5e-3}, 8);
  REQUIRE(fam.size() == 24);
  int s = 0, spi = 0;
  for (const auto& cs : fam) {
    const auto& p = cs.sample;
    CHECK(std::abs(p.tau + 2 * (n * p.N + c * p.C)) <= 1e-15);
    CHECK(std::abs(to_invariants(p.z).delta) <= 1e-18);
    switch (cs.annotation) {
      case ConeAnnotation::S:
        ++s;
        CHECK(fixed_space_membership(p.z, FixedSpace::S, 1e-15));
        break;
      case ConeAnnotation::SPi:
        ++spi;
        CHECK(fixed_space_membership(p.z, FixedSpace::SPi, 1e-15));
        break;
      case ConeAnnotation::None:
        CHECK(orbit_distance_to(p.z, FixedSpace::S) > 1e-3 * p.radius);
        CHECK(orbit_distance_to(p.z, FixedSpace::SPi) > 1e-3 * p.radius);
        break;
    }
  }
  // Angles 0 and pi (one orbit) and pi/2, 3 pi/2 (the other), per radius.
  CHECK(s == 6);
  CHECK(spi == 6);

  const auto tiny = cone_family(with_extra(n, c), {1e-6}, 8);
  for (const auto& cs : tiny) CHECK(std::abs(cs.sample.tau) <= 1e-11);
  const auto [a, b] = s_orbits(combined(n, c), 1e-2);
  CHECK(fixed_space_membership(a.z, FixedSpace::S, 1e-15));
  CHECK(fixed_space_membership(b.z, FixedSpace::SPi, 1e-15));
}

TEST_CASE("RS branches: existence verdicts") {
  auto yes = rs_branches(combined(1, 0));
  REQUIRE(yes.branches.size() == 2);
  for (const auto& p : yes.branches[0].points) {
    CHECK(std::abs(p.C) <= 1e-15);
    CHECK(p.D == 0.0);
    CHECK(std::abs(std::abs(p.delta) - p.N) <= 1e-15);
  }
  CHECK(yes.axis.genuine);
  CHECK(rs_branches(combined(0, 1)).branches.empty());
  CHECK(rs_branches(combined(1, 1)).branches.empty());
  CHECK_THROWS_AS(rs_branches(combined(0, 0)), AnalysisError);
  auto sr = reduced_from_leading(SymmetryKind::SR, 1, 0, 0);
  CHECK_THROWS_AS(rs_branches(sr), AnalysisError);
  auto odd = combined(1, 0);
  odd.g.add_term({1, 0, 1, 0}, 0.1);
  CHECK_THROWS_AS(rs_branches(odd), AnalysisError);
}

TEST_CASE("RS branch points are critical points of h on Fix RS") {
  for (auto [n, c] : {std::pair{1.0, 0.3}, std::pair{-1.2, 0.5}, std::pair{2.0, -1.0}}) {
    const auto rh = with_extra(n, c);
    const auto rs = rs_branches(rh, {0.01, 4});
    REQUIRE(rs.branches.size() == 2);
    for (std::size_t k = 0; k < rs.branches[0].points.size(); ++k) {
      const auto& p = rs.branches[0].points[k];
      const auto& q = rs.branches[1].points[k];
      CHECK(p.N == q.N);
      CHECK(p.C == q.C);
      CHECK(p.tau == q.tau);
      CHECK(p.delta == -q.delta);
      for (const auto* b : {&p, &q}) {
        const auto z = point_from_invariants(b->N, b->C, b->D, b->delta);
        CHECK(fixed_space_membership(z, FixedSpace::RS, 1e-15));
        const Eigen::Vector4d x = to_real(z);
        CHECK(grad_h(rh.g, x, b->tau).norm() <= 1e-8 * x.norm() * b->N);
      }
    }
    // With c != 0 the axis candidate is not a critical point.
    CHECK_FALSE(rs.axis.genuine);
    const auto& a = rs.axis.points.back();
    const Eigen::Vector4d xa = to_real(point_from_invariants(a.N, 0.0, 0.0, a.delta));
    CHECK(grad_h(rh.g, xa, a.tau).norm() > 1e-2 * xa.norm() * a.N);
  }
}

TEST_CASE("property: RS verdict agrees with the SR analysis of the same g") {
  testsupport::Gen gen(77);
  for (int trial = 0; trial < 40; ++trial) {
    const double n = gen.uniform(-2, 2), c = gen.uniform(-2, 2);
    const auto rh = with_extra(n, c);
    const auto rep = analyze_combined(rh);
    CHECK(rep.sr_consistent);
    CHECK((rep.rs.branches.size() == 2) == (n * n - c * c > 1e-12));
    auto as_sr = rh;
    as_sr.kind = SymmetryKind::SR;
    CHECK(analyze_sr(as_sr).geometry == rep.geometry);
  }
}

TEST_CASE("torus fixed sets") {
  const auto t = torus_fixsets(64);
  REQUIRE(t.lines.size() == 3);
  CHECK(t.fix_sr.size() == 2);
  CHECK(t.fix_rs_real.size() == 4);
  const FixedSpace which[] = {FixedSpace::R, FixedSpace::S, FixedSpace::SPi};
  for (int i = 0; i < 3; ++i)
    for (auto [a, b] : t.lines[i].points) {
      const auto z = torus_point(a, b);
      CHECK(fixed_space_membership(z, which[i], 1e-14));
      CHECK(std::abs(to_invariants(z).delta) <= 1e-15);
      CHECK(std::abs(to_invariants(z).N - 1) <= 1e-15);
    }
  for (auto [a, b] : t.fix_sr) {
    const auto z = torus_point(a, b);
    CHECK(fixed_space_membership(z, FixedSpace::R, 1e-15));
    CHECK(fixed_space_membership(z, FixedSpace::S, 1e-15));
  }
  for (auto [a, b] : t.fix_rs_real) CHECK(fixed_space_membership(torus_point(a, b), FixedSpace::RS, 1e-15));

  // Fix R meets Fix S where theta1 = theta2 = -theta1 mod 2 pi: brute-force grid.
  int hits = 0;
  const int M = 720;
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) {
      const auto z = torus_point(2 * kPi * i / M, 2 * kPi * j / M);
      if (fixed_space_membership(z, FixedSpace::R, 1e-12) && fixed_space_membership(z, FixedSpace::S, 1e-12)) ++hits;
    }
  CHECK(hits == 2);

  // Each locus is a set invariant under the shift by (pi, pi) and under R, S.
  auto on = [&](int i, double a, double b) {
    auto w = [](double x) { return std::remainder(x, 2 * kPi); };
    switch (i) {
      case 0: return std::abs(w(b - a)) < 1e-12;
      case 1: return std::abs(w(b + a)) < 1e-12;
      default: return std::abs(w(b + a - kPi)) < 1e-12;
    }
  };
  for (int i = 0; i < 3; ++i)
    for (auto [a, b] : t.lines[i].points) {
      CHECK(on(i, a + kPi, b + kPi));
      CHECK(on(i, b, a));    // R swaps the angles
      CHECK(on(i, -b, -a));  // S conjugates and swaps
    }
}
