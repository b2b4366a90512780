#include "doctest.h"
#include "support.hpp"
#include "symorb/roots.hpp"

#include <chrono>

using namespace symorb;
using testsupport::cplx;

namespace {

CSystem blowup(double a1, double a2, double b2, double c1, double c2) {
  const int n = 5;
  auto V = [&](int i) { return CPoly::variable(n, i); };
  const CPoly v = V(0), t = V(1), u = V(2), w = V(3), x = V(4);
  auto k = [](double c) { return cplx(c); };
  std::vector<CPoly> ps;
  ps.push_back(v * (k(0.5) * t + k(a1) * v + k(c1) * u) + k(a1) * x * x + k(a2) * x * w);
  ps.push_back(x * (k(0.5) * t + k(2 * a1) * v + k(2 * c1) * u) + w * (k(b2) * t + k(2 * a2) * v + k(2 * c2) * u));
  ps.push_back(k(c1) * x * w - u * (k(b2) * t + k(a2) * v + k(c2) * u) + k(c2) * w * w);
  ps.push_back(u * u + w * w + x * x - v * v);
  return CSystem(ps, {"v", "t", "u", "w", "x"});
}

CSystem univariate(std::vector<cplx> coeffs_low_to_high) {
  CPoly p(1);
  for (std::size_t k = 0; k < coeffs_low_to_high.size(); ++k) p.add_term({int(k)}, coeffs_low_to_high[k]);
  return CSystem({p}, {"x"});
}

}  // namespace

TEST_CASE("diagonal system has four simple roots") {
  const CPoly x = CPoly::variable(2, 0), y = CPoly::variable(2, 1);
  const CSystem sys({x * x - CPoly::constant(2, 1.0), y * y - CPoly::constant(2, 4.0)}, {"x", "y"});
  const auto res = solve_all_roots(sys, Chart::none());
  REQUIRE(res.roots.size() == 4);
  CHECK(res.complete());
  CHECK(res.real_count() == 4);
  CHECK(res.paths_at_infinity == 0);
  for (const auto& r : res.roots) {
    CHECK(r.multiplicity == 1);
    CHECK(std::abs(std::abs(r.point[0]) - 1.0) < 1e-12);
    CHECK(std::abs(std::abs(r.point[1]) - 2.0) < 1e-12);
    CHECK(r.jacobian_rank == 2);
  }
}

TEST_CASE("ill-posed and non-square input") {
  const CPoly x = CPoly::variable(2, 0), y = CPoly::variable(2, 1);
  const CSystem dep({x - y, cplx(2) * x - cplx(2) * y}, {"x", "y"});
  CHECK_THROWS_AS(solve_all_roots(dep, Chart::none()), SolverError);
  try {
    solve_all_roots(dep, Chart::none());
  } catch (const SolverError& e) {
    CHECK(e.kind() == SolverError::Kind::IllPosed);
  }
  const CSystem rect({x - y}, {"x", "y"});
  CHECK_THROWS_AS(solve_all_roots(rect, Chart::none()), SolverError);
}

TEST_CASE("blow-up system, first worked example: 12 chart roots, 2 real") {
  const auto t0 = std::chrono::steady_clock::now();
  const CSystem sys = blowup(1, 5, 1, 2, 2);
  const auto res = solve_all_roots(sys, Chart::fix("v", 1.0));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(secs < 5.0);
  CHECK(res.bezout == 16);
  CHECK(res.complete());
  CHECK(res.finite_multiplicity == 12);
  CHECK(res.paths_at_infinity == 4);
  CHECK(res.real_count() == 2);
  for (const auto& r : res.roots) {
    CHECK(r.residual <= 1e-10);
    if (!r.is_real) continue;
    CHECK(std::abs(r.point[1] - cplx(-4)) <= 1e-10);
    CHECK(std::abs(r.point[2]) <= 1e-10);
    CHECK(std::abs(r.point[3]) <= 1e-10);
    CHECK(std::abs(std::abs(r.point[4]) - 1.0) <= 1e-10);
  }
}

TEST_CASE("blow-up system, fourth worked example: 8 real roots") {
  const auto res = solve_all_roots(blowup(1, -4, -1, 1, 2), Chart::fix("v", 1.0));
  CHECK(res.finite_multiplicity == 12);
  CHECK(res.real_count() == 8);
}

TEST_CASE("property: conjugate pairing and re-homogenized residuals") {
  testsupport::Gen g(21);
  for (int trial = 0; trial < 10; ++trial) {
    const CSystem sys = blowup(g.uniform(-5, 5), g.uniform(-5, 5), g.uniform(0.1, 5), g.uniform(-5, 5), g.uniform(-5, 5));
    const auto res = solve_all_roots(sys, Chart::fix("v", 1.0));
    for (const auto& r : res.roots) {
      // Scale to a unit representative and evaluate the homogeneous system.
      const CVector unit = r.point / r.point.norm();
      CHECK(residual(sys, unit) <= 1e-10);
      if (r.is_real) continue;
      bool paired = false;
      for (const auto& q : res.roots)
        if ((q.point - r.point.conjugate()).norm() <= 1e-8 * (1 + r.point.norm())) paired = true;
      CHECK(paired);
    }
  }
}

TEST_CASE("newton_refine") {
  // Third worked example: start from the 4-decimal listing.
  const CSystem sys = Chart::fix("v", 1.0).apply(blowup(1, 5, -2, 2, 2));
  CVector x0(4);
  x0 << 1.5602, -0.9681, 0.0855, 0.2354;
  const auto r = newton_refine(sys, x0);
  CHECK(r.residual <= 1e-12);
  CHECK((r.point - x0).cwiseAbs().maxCoeff() <= 5e-4);
  CHECK(r.is_real);

  const auto again = newton_refine(sys, r.point);
  CHECK((again.point - r.point).norm() <= 1e-12);

  CVector far(4);
  far << 1e6, -3e5, 7e5, 2e6;
  CHECK_THROWS_AS(newton_refine(sys, far, 1e-12, 2), SolverError);
}

TEST_CASE("property: newton_refine converges from within 1e-3 of simple roots") {
  const CSystem full = blowup(1, -4, -1, 1, 2);
  const CSystem sys = Chart::fix("v", 1.0).apply(full);
  const auto res = solve_all_roots(full, Chart::fix("v", 1.0));
  testsupport::Gen g(31);
  for (const auto& r : res.roots) {
    const CVector root = Chart::fix("v", 1.0).restrict_point(full, r.point);
    for (int k = 0; k < 5; ++k) {
      CVector d(4);
      for (auto& c : d) c = g.complex_normal();
      const CVector start = root + 1e-3 * d / d.norm();
      CHECK((newton_refine(sys, start).point - root).norm() <= 1e-9);
    }
  }
}

TEST_CASE("multiplicity probe") {
  CVector one(1);
  one << 1.0;
  CHECK(multiplicity_probe(univariate({-1.0, 0.0, 1.0}), one) == 1);
  CVector zero(1);
  zero << 0.0;
  CHECK(multiplicity_probe(univariate({0.0, 0.0, 1.0}), zero) == 2);
  CHECK(multiplicity_probe(univariate({0.0, 0.0, 0.0, 1.0}), zero) == 3);

  // Blow-up system at infinity: the t-line root seen in the chart t = 1.
  const CSystem tchart = Chart::fix("t", 1.0).apply(blowup(1, 5, 1, 2, 2));
  CHECK(multiplicity_probe(tchart, CVector::Zero(4)) == 2);

  // A point that is not a root is rejected.
  CHECK_THROWS_AS(multiplicity_probe(univariate({-1.0, 0.0, 1.0}), zero), SolverError);
}
