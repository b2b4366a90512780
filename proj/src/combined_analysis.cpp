#include "symorb/combined_analysis.hpp"

#include <cmath>
#include <numbers>

namespace symorb {

namespace {

constexpr double kPi = std::numbers::pi;

void require_combined(const ReducedHamiltonian& rh, const char* who) {
  if (rh.kind != SymmetryKind::Combined)
    throw AnalysisError(AnalysisError::Kind::BadInput, std::string(who) + ": needs a COMBINED reduced Hamiltonian");
  for (const auto& [e, c] : rh.g.terms())
    if (e[kD] % 2 != 0)
      throw AnalysisError(AnalysisError::Kind::BadInput, std::string(who) + ": g must depend on D through D^2 only");
}

double wrap(double a) {
  a = std::fmod(a, 2 * kPi);
  if (a < 0) a += 2 * kPi;
  if (a >= 2 * kPi) a = 0;
  return a;
}

ConeAnnotation annotate(double angle) {
  const double s = std::sin(angle), c = std::cos(angle);
  if (std::abs(s) <= 1e-12) return ConeAnnotation::S;
  if (std::abs(c) <= 1e-12) return ConeAnnotation::SPi;
  return ConeAnnotation::None;
}

}  // namespace

std::string to_string(ConeAnnotation a) {
  switch (a) {
    case ConeAnnotation::None: return "none";
    case ConeAnnotation::S: return "S";
    case ConeAnnotation::SPi: return "S_pi";
  }
  return "?";
}

std::vector<ConeSample> cone_family(const ReducedHamiltonian& rh, const std::vector<double>& radii, int angles_per_radius) {
  require_combined(rh, "cone_family");
  std::vector<ConeSample> out;
  for (const auto& s : symmetric_family(rh, radii, angles_per_radius)) out.push_back({s, annotate(s.angle)});
  return out;
}

std::pair<FixRSample, FixRSample> s_orbits(const ReducedHamiltonian& rh, double radius) {
  require_combined(rh, "s_orbits");
  // Four angles per radius put samples at 0 (Fix S) and pi/2 (Fix(S, pi)).
  const auto f = symmetric_family(rh, {radius}, 4);
  return {f[0], f[1]};
}

RSBranches rs_branches(const ReducedHamiltonian& rh, const BranchOptions& opts) {
  require_combined(rh, "rs_branches");
  const double n = rh.n(), c = rh.c();
  if (n == 0.0 && c == 0.0) throw AnalysisError(AnalysisError::Kind::AllLeadingZero, "n = c = 0: outside the generic case");
  RSBranches out;
  // On Fix RS the SR branch equations keep D = 0; the elimination leaves
  // C (N g_C + C g_N) = 0, whose C != 0 factor is the SR curve with d = 0.
  out.branches = nonsymmetric_branches(rh, opts);
  for (auto& b : out.branches)
    for (auto& p : b.points) p.D = 0.0;

  // C = 0 factor: g + N g_N = 0 at C = D = 0, solved for tau along N.
  const RPoly gN = derivative(rh.g, kN), gC = derivative(rh.g, kC);
  const RPoly e = rh.g + RPoly::variable(4, kN) * gN;
  double tau = 0;
  for (int k = 1; k <= opts.samples; ++k) {
    BranchPoint p;
    p.t = opts.t_max * k / opts.samples;
    p.N = p.t;
    p.tau = solve_tau(e, p.N, 0, 0, tau);
    tau = p.tau;
    p.cone = p.N * p.N;
    p.delta = p.N;
    p.period = 2 * kPi / (1 + p.tau);
    out.axis.max_gC = std::max(out.axis.max_gC, std::abs(eval_reduced(gC, p.N, 0, 0, p.tau)));
    out.axis.points.push_back(p);
  }
  out.axis.genuine = out.axis.max_gC <= 1e-12;
  return out;
}

ComplexPair<double> torus_point(double theta1, double theta2) {
  const double r = 1 / std::sqrt(2.0);
  return {std::polar(r, theta1), std::polar(r, theta2)};
}

TorusFixsets torus_fixsets(int samples_per_line) {
  if (samples_per_line < 2) throw AnalysisError(AnalysisError::Kind::BadInput, "torus_fixsets: need at least 2 samples");
  TorusFixsets t;
  TorusLocus R{"Fix R", {}}, S{"Fix S", {}}, SPi{"Fix(S,pi)", {}};
  for (int k = 0; k < samples_per_line; ++k) {
    const double a = 2 * kPi * k / samples_per_line;
    R.points.emplace_back(a, a);
    S.points.emplace_back(a, wrap(-a));
    SPi.points.emplace_back(a, wrap(kPi - a));
  }
  t.lines = {R, S, SPi};
  // theta1 = theta2 = -theta1 (mod 2 pi).
  t.fix_sr = {{0.0, 0.0}, {kPi, kPi}};
  // z1, z2 both real: each angle is 0 or pi.
  t.fix_rs_real = {{0.0, 0.0}, {0.0, kPi}, {kPi, 0.0}, {kPi, kPi}};
  return t;
}

CombinedReport analyze_combined(const ReducedHamiltonian& rh, const CombinedOptions& opts) {
  require_combined(rh, "analyze_combined");
  CombinedReport rep;
  rep.n = rh.n();
  rep.c = rh.c();
  rep.discriminant = rep.n * rep.n - rep.c * rep.c;
  rep.geometry = classify_period_geometry(rep.n, rep.c, 0.0);
  rep.cone_family = cone_family(rh, opts.sample_radii, opts.angles_per_radius);
  for (double r : opts.sample_radii) rep.s_orbits.push_back(s_orbits(rh, r));
  rep.rs = rs_branches(rh, opts.branch);
  rep.torus = torus_fixsets(opts.torus_samples);

  ReducedHamiltonian as_sr = rh;
  as_sr.kind = SymmetryKind::SR;
  const bool sr_has = !nonsymmetric_branches(as_sr, opts.branch).empty();
  rep.sr_consistent = sr_has == !rep.rs.branches.empty() && sr_has == (rep.geometry == PeriodGeometry::Elliptic);
  if (!rep.sr_consistent) rep.warnings.push_back("rs_branches and the SR analysis of the same g disagree");
  if (rep.geometry == PeriodGeometry::Degenerate)
    rep.warnings.push_back("n^2 = c^2: degenerate boundary, existence of RS branches not decided");
  if (!rep.rs.axis.genuine)
    rep.warnings.push_back("C = 0 candidate (z1 z2 = 0) solves the eliminated equations only; g_C != 0 there");
  if (std::abs(rh.tau_coefficient() - 0.5) > 1e-12) rep.warnings.push_back("dg/dtau(0) differs from 1/2");
  return rep;
}

}  // namespace symorb
