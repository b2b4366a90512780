#include "doctest.h"
#include "support.hpp"
#include "symorb/polynomial.hpp"

using namespace symorb;
using testsupport::cplx;
using P = MultiPoly<double>;

namespace {

// (v, t, u, w, x) blow-up system assembled term by term.
PolySystem<double> blowup(double a1, double a2, double b2, double c1, double c2) {
  const int n = 5;
  auto V = [&](int i) { return P::variable(n, i); };
  const P v = V(0), t = V(1), u = V(2), w = V(3), x = V(4);
  std::vector<P> ps;
  ps.push_back(v * (0.5 * t + a1 * v + c1 * u) + a1 * x * x + a2 * x * w);
  ps.push_back(x * (0.5 * t + 2 * a1 * v + 2 * c1 * u) + w * (b2 * t + 2 * a2 * v + 2 * c2 * u));
  ps.push_back(c1 * x * w - u * (b2 * t + a2 * v + c2 * u) + c2 * w * w);
  ps.push_back(u * u + w * w + x * x - v * v);
  return PolySystem<double>(ps, {"v", "t", "u", "w", "x"});
}

}  // namespace

TEST_CASE("canonical form keeps no zero coefficients") {
  P p = P::variable(2, 0) - P::variable(2, 0);
  CHECK(p.is_zero());
  CHECK(p.degree() == -1);
  p.add_term({1, 1}, 0.0);
  CHECK(p.size() == 0);
  CHECK((P::variable(2, 1) * 0.0).is_zero());
  CHECK_THROWS_AS(p.add_term({1}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(P::variable(2, 0) + P::variable(3, 0), std::invalid_argument);
}

TEST_CASE("evaluation") {
  const auto sys = blowup(1, 5, 1, 2, 2);
  Eigen::VectorXd pt(5);
  pt << 1, 0, 0, 0, 1;
  CHECK(evaluate(sys.polys[3], pt) == 0.0);
  CHECK(evaluate(P(5), pt) == 0.0);
  CHECK_THROWS_AS(evaluate(sys.polys[0], Eigen::VectorXd(3)), std::invalid_argument);

  // 2 z1 z2 as a polynomial over (x1, y1, x2, y2) against direct complex multiplication.
  const P x1 = P::variable(4, 0), y1 = P::variable(4, 1), x2 = P::variable(4, 2), y2 = P::variable(4, 3);
  const P C = 2.0 * (x1 * x2 - y1 * y2), D = 2.0 * (x1 * y2 + y1 * x2);
  testsupport::Gen g(3);
  for (int k = 0; k < 20; ++k) {
    const cplx z1 = g.complex_normal(), z2 = g.complex_normal();
    const std::vector<double> r{z1.real(), z1.imag(), z2.real(), z2.imag()};
    const cplx m = 2.0 * z1 * z2;
    CHECK(std::abs(evaluate(C, r) - m.real()) < 1e-13);
    CHECK(std::abs(evaluate(D, r) - m.imag()) < 1e-13);
  }
  // Complex evaluation of a real polynomial.
  const std::vector<cplx> ci{cplx(0, 1), 0.0, 0.0, 0.0};
  CHECK(std::abs(evaluate(x1 * x1, ci) - cplx(-1, 0)) < 1e-15);
}

TEST_CASE("arithmetic, pow, substitute") {
  const P x = P::variable(2, 0), y = P::variable(2, 1);
  const P s = pow(x + y, 3);
  CHECK(s.coeff({2, 1}) == 3.0);
  CHECK(s.coeff({0, 3}) == 1.0);
  CHECK(s.is_homogeneous());
  CHECK_FALSE((s + x).is_homogeneous());
  // (x + y)(x - y) with x -> a + b, y -> a - b gives 4ab.
  const P a = P::variable(2, 0), b = P::variable(2, 1);
  const P q = substitute((x + y) * (x - y), {a + b, a - b});
  CHECK(q == 4.0 * a * b);
  CHECK(derivative(s, 0) == 3.0 * pow(x + y, 2));
  CHECK(prune(x + 1e-14 * y, 1e-12) == x);
}

TEST_CASE("jacobian") {
  const auto sys = blowup(1, 5, 1, 2, 2);
  const auto J = jacobian(sys);
  const P u = P::variable(5, 2);
  CHECK(J[3][2] == 2.0 * u);

  // Root (v,t,u,w,x) = (1,-4,0,0,1): compare with a hand-written Jacobian.
  Eigen::VectorXd pt(5);
  pt << 1, -4, 0, 0, 1;
  const Eigen::MatrixXd Jv = evaluate(J, pt);
  const testsupport::BlowupOracle o{1, 5, 1, 2, 2};
  CHECK((Jv - Eigen::MatrixXd(o.jacobian(1, -4, 0, 0, 1))).norm() < 1e-14);
  CHECK(Jv(3, 0) == -2.0);
  CHECK(Jv(3, 4) == 2.0);

  // Linear system: Jacobian is the coefficient matrix.
  const P X = P::variable(2, 0), Y = P::variable(2, 1);
  const PolySystem<double> lin({2.0 * X + 3.0 * Y + P::constant(2, 1.0), X - Y}, {"X", "Y"});
  const Eigen::MatrixXd Jl = evaluate(jacobian(lin), std::vector<double>{7.0, -2.0});
  CHECK(Jl(0, 0) == 2.0);
  CHECK(Jl(0, 1) == 3.0);
  CHECK(Jl(1, 0) == 1.0);
  CHECK(Jl(1, 1) == -1.0);
}

TEST_CASE("property: evaluation matches a naive oracle on random polynomials") {
  testsupport::Gen g(5);
  for (int trial = 0; trial < 30; ++trial) {
    P p(3);
    std::vector<std::pair<Exponent, double>> terms;
    for (int k = 0; k < 8; ++k) {
      Exponent e{int(g.uniform(0, 4)), int(g.uniform(0, 4)), int(g.uniform(0, 4))};
      const double c = g.normal();
      terms.push_back({e, c});
      p.add_term(e, c);
    }
    const std::vector<double> x{g.normal(), g.normal(), g.normal()};
    double naive = 0;
    for (const auto& [e, c] : terms) naive += c * std::pow(x[0], e[0]) * std::pow(x[1], e[1]) * std::pow(x[2], e[2]);
    CHECK(std::abs(evaluate(p, x) - naive) <= 1e-12 * (1 + std::abs(naive)));
    // Derivative against a central difference.
    const double h = 1e-6;
    auto xp = x, xm = x;
    xp[1] += h;
    xm[1] -= h;
    const double fd = (evaluate(p, xp) - evaluate(p, xm)) / (2 * h);
    CHECK(std::abs(evaluate(derivative(p, 1), x) - fd) <= 1e-5 * (1 + std::abs(fd)));
  }
}
