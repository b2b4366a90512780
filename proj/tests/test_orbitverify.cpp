#include "doctest.h"
#include "support.hpp"
#include "symorb/ae_analysis.hpp"
#include "symorb/combined_analysis.hpp"
#include "symorb/orbitverify.hpp"

#include <numbers>

using namespace symorb;

namespace {

constexpr double kPi = std::numbers::pi;

VectorFieldSpec field(const ReducedHamiltonian& rh) { return VectorFieldSpec(realize_hamiltonian(rh).spec); }

VectorFieldSpec sr_field(double n, double c, double d = 0) {
  return field(reduced_from_leading(SymmetryKind::SR, n, c, d));
}

// H = H2 - 2 delta N for SR (1, 0, 0), written out by hand.
double oracle_H(const Eigen::Vector4d& q) {
  const double A = q[0] * q[0] + q[1] * q[1], B = q[2] * q[2] + q[3] * q[3];
  return (A - B) - 2 * (A - B) * (A + B);
}

Eigen::Vector4d oracle_field(const Eigen::Vector4d& q, double h = 1e-6) {
  Eigen::Vector4d g;
  for (int i = 0; i < 4; ++i) {
    Eigen::Vector4d a = q, b = q;
    a[i] += h;
    b[i] -= h;
    g[i] = (oracle_H(a) - oracle_H(b)) / (2 * h);
  }
  return 0.5 * Eigen::Vector4d(-g[1], g[0], -g[3], g[2]);
}

Eigen::Vector4d branch_point(const BranchPoint& p) {
  return to_real(point_from_invariants(p.N, p.C, p.D, p.delta));
}

}  // namespace

TEST_CASE("DP8(7) tableau consistency") {
  double s8 = 0, s7 = 0;
  for (int i = 0; i < 13; ++i) {
    double row = 0;
    for (int j = 0; j < i; ++j) row += dp87::a[i][j];
    CHECK(std::abs(row - dp87::c[i]) <= 1e-15);
    s8 += dp87::b8[i];
    s7 += dp87::b7[i];
  }
  CHECK(std::abs(s8 - 1) <= 1e-15);
  CHECK(std::abs(s7 - 1) <= 1e-15);
  // Order conditions sum b c^k = 1/(k+1) up to k = 7 for the 8th-order weights.
  for (int k = 1; k <= 7; ++k) {
    double s = 0;
    for (int i = 0; i < 13; ++i) s += dp87::b8[i] * std::pow(dp87::c[i], k);
    CHECK(std::abs(s - 1.0 / (k + 1)) <= 1e-14);
  }

  // y' = y and a stiff-free nonautonomous check.
  using V1 = Eigen::Matrix<double, 1, 1>;
  const V1 e = integrate_dp87([](double, const V1& y) -> V1 { return y; }, V1(1.0), 0.0, 1.0);
  CHECK(std::abs(e[0] - std::exp(1.0)) <= 1e-13);
  const V1 back = integrate_dp87([](double, const V1& y) -> V1 { return y; }, V1(std::exp(1.0)), 1.0, 0.0);
  CHECK(std::abs(back[0] - 1) <= 1e-13);
  const V1 s = integrate_dp87([](double t, const V1&) -> V1 { return V1(std::cos(t)); }, V1(0.0), 0.0, 3.0);
  CHECK(std::abs(s[0] - std::sin(3.0)) <= 1e-13);

  IntegratorOptions tight;
  tight.max_steps = 3;
  CHECK_THROWS_AS(
      integrate_dp87([](double, const V1& y) -> V1 { return y; }, V1(1.0), 0.0, 100.0, tight), StepFailure);
}

TEST_CASE("linear H2 flow: 100 periods of rigid rotation") {
  HamiltonianSpec spec;
  spec.H = H2_real();
  const VectorFieldSpec vf(spec);
  const Eigen::Vector4d x0(1e-2, -3e-3, 4e-3, 7e-3);
  FlowOptions fo;
  const auto r = flow(vf, x0, 200 * kPi, fo);
  CHECK((r.x - x0).cwiseAbs().maxCoeff() <= 1e-10 * x0.norm());
  CHECK(r.energy_drift <= 1e-10 * x0.squaredNorm());
  // Quarter period against exp(L t).
  const auto q = flow(vf, x0, kPi / 2, fo);
  const Eigen::Vector4d ref(-x0[1], x0[0], x0[3], -x0[2]);
  CHECK((q.x - ref).norm() <= 1e-13);
}

TEST_CASE("vector field and Jacobian against hand-written oracles") {
  const auto vf = sr_field(1, 0);
  testsupport::Gen gen(5);
  for (int k = 0; k < 20; ++k) {
    const Eigen::Vector4d x(gen.normal(), gen.normal(), gen.normal(), gen.normal());
    CHECK(std::abs(vf.energy(x) - oracle_H(x)) <= 1e-12 * (1 + std::abs(oracle_H(x))));
    CHECK((vf(x) - oracle_field(x)).norm() <= 1e-7 * (1 + x.squaredNorm() * x.norm()));
    Eigen::Matrix4d fd;
    for (int i = 0; i < 4; ++i) {
      Eigen::Vector4d a = x, b = x;
      a[i] += 1e-6;
      b[i] -= 1e-6;
      fd.col(i) = (vf(a) - vf(b)) / 2e-6;
    }
    CHECK((vf.jacobian(x) - fd).norm() <= 1e-6 * (1 + x.squaredNorm()));
  }
}

TEST_CASE("reversibility under R, equivariance under S") {
  const Eigen::Matrix4d R = R_matrix<double>(), S = S_matrix<double>();
  const Eigen::Vector4d x(0.05, -0.02, 0.03, 0.04);
  const auto sr = sr_field(1, 0.4, -0.3);
  for (double t : {0.7, 3.0}) {
    const Eigen::Vector4d lhs = flow(sr, R * x, t).x;
    const Eigen::Vector4d rhs = R * flow(sr, x, -t).x;
    CHECK((lhs - rhs).norm() <= 1e-12);
  }
  const auto ae = field(AECoefficients::blowup(1, 5, 0, 2, 2).to_reduced());
  for (double t : {0.7, 3.0}) {
    const Eigen::Vector4d lhs = flow(ae, S * x, t).x;
    const Eigen::Vector4d rhs = S * flow(ae, x, t).x;
    CHECK((lhs - rhs).norm() <= 1e-12);
  }
  // H o R = -H, H o S = -H.
  CHECK(std::abs(sr.energy(R * x) + sr.energy(x)) <= 1e-16);
  CHECK(std::abs(ae.energy(S * x) + ae.energy(x)) <= 1e-16);
}

TEST_CASE("state transition matrix against finite differences") {
  const auto vf = sr_field(1, 0.5, 0.2);
  const Eigen::Vector4d x(0.1, 0.02, -0.05, 0.08);
  const double T = 2.5;
  const auto r = flow_with_stm(vf, x, T);
  CHECK((r.x - flow(vf, x, T).x).norm() <= 1e-12);
  for (int i = 0; i < 4; ++i) {
    Eigen::Vector4d a = x, b = x;
    a[i] += 1e-6;
    b[i] -= 1e-6;
    const Eigen::Vector4d col = (flow(vf, a, T).x - flow(vf, b, T).x) / 2e-6;
    CHECK((r.stm.col(i) - col).norm() <= 1e-7);
  }
  // Symplectic: Phi^T J Phi = J.
  const Eigen::Matrix4d J = J_matrix<double>();
  CHECK((r.stm.transpose() * J * r.stm - J).norm() <= 1e-10);
}

TEST_CASE("R-symmetric orbits: periods follow tau on Fix R") {
  const auto rh = reduced_from_leading(SymmetryKind::SR, 1, 0.3, -0.2);
  const auto vf = field(rh);
  const auto fam = symmetric_family(rh, {1e-2, 7e-3, 5e-3, 3e-3, 2e-3}, 1);
  std::vector<double> amp2, dT;
  for (const auto& s : fam) {
    const auto orb = shoot_R_symmetric(vf, s.z.z1, 2 * kPi);
    CHECK(orb.residual <= 1e-9);
    CHECK(std::abs(orb.period - s.period) <= 1e-6);
    CHECK(std::abs(orb.energy) <= 1e-9);
    CHECK(orb.symmetry == OrbitSymmetry::R_symmetric);
    CHECK_FALSE(orb.partner.has_value());
    amp2.push_back(s.radius * s.radius);
    dT.push_back(orb.period - 2 * kPi);
  }
  CHECK(linear_fit(amp2, dT).r2 >= 0.999);
  // The same orbit from the generic shooter.
  const Eigen::Vector4d x0 = to_real(ComplexPair<double>{fam[0].z.z1, fam[0].z.z1});
  const auto g = shoot_generic(vf, x0, fam[0].period * 1.001);
  CHECK(std::abs(g.period - fam[0].period) <= 1e-6);
  CHECK(g.symmetry == OrbitSymmetry::R_symmetric);
}

TEST_CASE("SR non-symmetric partner orbits") {
  const auto rh = reduced_from_leading(SymmetryKind::SR, 1, 0, 0);
  const auto vf = field(rh);
  const auto br = nonsymmetric_branches(rh, {0.01, 2});
  REQUIRE(br.size() == 2);
  double E[2];
  for (int b = 0; b < 2; ++b) {
    const auto& p = br[b].points.back();
    const auto orb = shoot_generic(vf, branch_point(p), p.period);
    CHECK(orb.residual <= 1e-9);
    CHECK(std::abs(orb.period - p.period) <= 1e-9);
    CHECK(orb.symmetry == OrbitSymmetry::NonSymmetric_paired);
    REQUIRE(orb.partner.has_value());
    CHECK(orb.partner->residual <= 1e-9);
    CHECK(std::abs(orb.partner->energy + orb.energy) <= 1e-15);
    CHECK(std::abs(orb.energy) > 1e-4);
    E[b] = orb.energy;
  }
  CHECK(std::abs(E[0] + E[1]) <= 1e-12);

  // Positive control for the negative control below: the same H2-anchored
  // search from perturbed seeds finds these orbits.
  testsupport::Gen gen(31);
  for (int k = 0; k < 10; ++k) {
    const auto& p = br[k % 2].points.back();
    Eigen::Vector4d x = branch_point(p);
    x += 0.02 * x.norm() * Eigen::Vector4d(gen.normal(), gen.normal(), gen.normal(), gen.normal());
    const auto orb = shoot_generic(vf, x, p.period, Anchor::H2);
    CHECK(orb.residual <= 1e-9);
    CHECK(orb.symmetry == OrbitSymmetry::NonSymmetric_paired);
    CHECK(std::abs(orb.period - p.period) <= 0.05);
  }
}

// Random seeds off the cone, H2-anchored search with the period guessed from
// tau = -2 (n N + c C) at the seed.  Returns how many searches converge.
int seeded_offcone_search(double n, double c, std::uint64_t seed, int count) {
  const auto vf = sr_field(n, c);
  testsupport::Gen gen(seed);
  int found = 0, tried = 0;
  while (tried < count) {
    Eigen::Vector4d x(gen.normal(), gen.normal(), gen.normal(), gen.normal());
    x *= 0.05 / x.norm();
    const auto inv = to_invariants(to_complex_pair(x));
    if (std::abs(inv.delta) < 0.1 * inv.N) continue;
    ++tried;
    const double tau = -2 * (n * inv.N + c * inv.C);
    try {
      const auto orb = shoot_generic(vf, x, 2 * kPi / (1 + tau), Anchor::H2);
      CHECK(orb.symmetry == OrbitSymmetry::NonSymmetric_paired);
      ++found;
    } catch (const NoConvergence&) {
    }
  }
  return found;
}

TEST_CASE("negative control: no off-cone orbits in the hyperbolic case") {
  CHECK(seeded_offcone_search(0, 1, 2024, 50) == 0);
  CHECK(seeded_offcone_search(0.5, 1, 2025, 20) == 0);
  // The same search is not blind: elliptic cases find the branches.
  CHECK(seeded_offcone_search(1, 0, 2024, 20) >= 15);
  CHECK(seeded_offcone_search(1, 0.5, 2025, 20) >= 15);
}

TEST_CASE("AE: Fix S carries no periodic orbits and V is monotone there") {
  const auto k = AECoefficients::blowup(1, 5, 1, 2, 2);
  const auto vf = field(k.to_reduced());
  const auto B = fixed_space_basis(FixedSpace::S);
  testsupport::Gen gen(9);
  ShootOptions so;
  so.max_iter = 15;
  for (int s = 0; s < 10; ++s) {
    const double ang = gen.uniform(0, 2 * kPi), rad = gen.uniform(0.005, 0.02);
    const Eigen::Vector4d x = B * Eigen::Vector2d(rad * std::cos(ang), rad * std::sin(ang));
    CHECK_THROWS_AS(shoot_in_fixed_space(vf, FixedSpace::S, x, 2 * kPi, so), NoConvergence);

    // Along the flow (which stays in Fix S), V = |z1|^2 changes at one sign.
    int pos = 0, neg = 0;
    Eigen::Vector4d y = x;
    for (int i = 0; i < 20; ++i) {
      const Eigen::Vector4d f = vf(y);
      const double vdot = 2 * (y[0] * f[0] + y[1] * f[1]);
      (vdot > 0 ? pos : neg)++;
      CHECK((B * (B.transpose() * y) - y).norm() <= 1e-12);
      y = flow(vf, y, 0.5).x;
    }
    CHECK((pos == 0 || neg == 0));
  }
}

TEST_CASE("AE: continued roots are closed orbits paired by S") {
  // b2 = 0, so the coefficients are realizable by a quartic H.
  const auto k = AECoefficients::blowup(1, -1, 0, -1, -2);
  AEOptions opts;
  opts.continue_families = true;
  opts.continuation.r_max = 0.02;
  opts.continuation.samples = 2;
  const auto rep = solve_blowup(k, opts);
  const auto vf = field(k.to_reduced());
  int checked = 0;
  for (const auto& fam : rep.orbit_families) {
    const auto& s = rep.solutions[fam.solution_index];
    if (s.is_axis) continue;
    const auto& p = fam.points.back();
    const auto orb = shoot_generic(vf, to_real(point_from_invariants(p.N, p.C, p.D, p.delta)), p.period());
    CHECK(orb.residual <= 1e-9);
    CHECK(std::abs(orb.period - p.period()) <= 1e-8);
    CHECK(orb.symmetry == OrbitSymmetry::NonSymmetric_paired);
    REQUIRE(orb.partner.has_value());
    CHECK(orb.partner->image_of == "S");
    CHECK(std::abs(orb.partner->energy + orb.energy) <= 1e-15);
    ++checked;
  }
  CHECK(checked >= 2);
}

TEST_CASE("combined: S-symmetric cone orbits and RS-product branches") {
  const auto rh = reduced_from_leading(SymmetryKind::Combined, 1, 0.3);
  const auto vf = field(rh);
  const auto [a, b] = s_orbits(rh, 1e-2);
  for (const auto* s : {&a, &b}) {
    const auto orb = shoot_R_symmetric(vf, s->z.z1, s->period);
    CHECK(orb.symmetry == OrbitSymmetry::RS_symmetric);
    CHECK(std::abs(orb.period - s->period) <= 1e-8);
  }
  // The fixed-space shooter that finds nothing on Fix S in the AE case finds
  // the S-symmetric orbit here.
  const auto fs = shoot_in_fixed_space(vf, FixedSpace::S, to_real(a.z), 2 * kPi);
  CHECK(fs.symmetry == OrbitSymmetry::RS_symmetric);
  CHECK(std::abs(fs.period - a.period) <= 1e-8);

  // A generic cone orbit is R- but not S-symmetric.
  const auto fam = symmetric_family(rh, {1e-2}, 8);
  const auto g = shoot_R_symmetric(vf, fam[1].z.z1, fam[1].period);
  CHECK(g.symmetry == OrbitSymmetry::R_symmetric);
  REQUIRE(g.partner.has_value());
  CHECK(g.partner->image_of == "S");

  const auto rs = rs_branches(rh, {0.01, 2});
  REQUIRE(rs.branches.size() == 2);
  for (const auto& br : rs.branches) {
    const auto& p = br.points.back();
    const auto orb = shoot_generic(vf, branch_point(p), p.period);
    CHECK(orb.residual <= 1e-9);
    CHECK(orb.symmetry == OrbitSymmetry::RSProduct_symmetric);
    CHECK(orb.flags.dist_R > 1e-3 * orb.x0.norm());
    REQUIRE(orb.partner.has_value());
    CHECK(std::abs(orb.partner->energy + orb.energy) <= 1e-15);
  }
}

TEST_CASE("shooting rejects bad input") {
  const auto vf = sr_field(1, 0);
  CHECK_THROWS_AS(shoot_R_symmetric(vf, {0.0, 0.0}, 2 * kPi), std::invalid_argument);
  CHECK_THROWS_AS(shoot_generic(vf, Eigen::Vector4d::Zero(), 2 * kPi), std::invalid_argument);
  CHECK_THROWS_AS(shoot_generic(vf, Eigen::Vector4d(0.1, 0, 0, 0), -1.0), std::invalid_argument);
  // Far from any orbit of period near 1: the guard keeps T in [T/2, 2T].
  ShootOptions so;
  so.max_iter = 5;
  CHECK_THROWS_AS(shoot_generic(vf, Eigen::Vector4d(0.01, 0, 0.003, 0), 1.0, Anchor::Norm, so), NoConvergence);
}
