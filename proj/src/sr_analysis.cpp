#include "symorb/sr_analysis.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace symorb {

std::string to_string(PeriodGeometry g) {
  switch (g) {
    case PeriodGeometry::Elliptic: return "Elliptic";
    case PeriodGeometry::Hyperbolic: return "Hyperbolic";
    case PeriodGeometry::Degenerate: return "Degenerate";
  }
  return "?";
}

PeriodGeometry classify_period_geometry(double n, double c, double d, double tol) {
  const double disc = n * n - c * c - d * d;
  if (std::abs(disc) <= tol) return PeriodGeometry::Degenerate;
  return disc > 0 ? PeriodGeometry::Elliptic : PeriodGeometry::Hyperbolic;
}

double solve_tau(const RPoly& g, double N, double C, double D, double tau0, double tol, int max_iter) {
  const RPoly gt = derivative(g, kTau);
  double tau = tau0;
  for (int it = 0; it < max_iter; ++it) {
    const double f = eval_reduced(g, N, C, D, tau);
    const double df = eval_reduced(gt, N, C, D, tau);
    if (!std::isfinite(f) || !std::isfinite(df) || df == 0.0) break;
    const double step = f / df;
    tau -= step;
    if (std::abs(step) <= tol * (1.0 + std::abs(tau))) return tau;
  }
  std::ostringstream os;
  os << "solve_tau: Newton failed at (N, C, D) = (" << N << ", " << C << ", " << D << ")";
  throw AnalysisError(AnalysisError::Kind::NewtonFailure, os.str());
}

std::vector<FixRSample> symmetric_family(const ReducedHamiltonian& rh, const std::vector<double>& radii,
                                         int angles_per_radius) {
  if (rh.kind == SymmetryKind::AE) throw AnalysisError(AnalysisError::Kind::BadInput, "symmetric_family: needs SR or COMBINED g");
  if (std::abs(rh.tau_coefficient()) == 0.0)
    throw AnalysisError(AnalysisError::Kind::BadInput, "symmetric_family: dg/dtau(0) = 0, tau cannot be solved for");
  std::vector<FixRSample> out;
  for (double r : radii)
    for (int k = 0; k < angles_per_radius; ++k) {
      FixRSample s;
      s.radius = r;
      s.angle = 2 * std::numbers::pi * k / angles_per_radius;
      const std::complex<double> z = std::polar(r, s.angle);
      s.z = {z, z};
      const auto inv = to_invariants(s.z);
      s.N = inv.N;
      s.C = inv.C;
      s.D = inv.D;
      s.tau = solve_tau(rh.g, s.N, s.C, s.D);
      s.period = 2 * std::numbers::pi / (1 + s.tau);
      out.push_back(s);
    }
  return out;
}

namespace {

// Equations in (N, C, D, tau, t).
PolySystem<double> branch_system(const RPoly& g4, char pivot) {
  auto lift = [](const RPoly& p) {
    RPoly q(5);
    for (const auto& [e, c] : p.terms()) q.add_term({e[0], e[1], e[2], e[3], 0}, c);
    return q;
  };
  const RPoly g = lift(g4), gN = lift(derivative(g4, kN)), gC = lift(derivative(g4, kC)), gD = lift(derivative(g4, kD));
  const RPoly N = RPoly::variable(5, 0), C = RPoly::variable(5, 1), D = RPoly::variable(5, 2), t = RPoly::variable(5, 4);
  const RPoly e10 = g + N * gN + C * gC + D * gD;
  const RPoly e11 = N * gC + C * gN;
  const RPoly e12 = D * gC - C * gD;
  const RPoly e13 = N * gD + D * gN;
  std::vector<RPoly> eqs;
  switch (pivot) {
    case 'n': eqs = {e10, e11, e13, N - gN * t}; break;
    case 'c': eqs = {e10, e11, e12, C + gC * t}; break;
    default: eqs = {e10, e12, e13, D + gD * t}; break;
  }
  return PolySystem<double>(eqs, {"N", "C", "D", "tau", "t"});
}

}  // namespace

BranchRecord solve_branch_curve(const RPoly& g, const BranchOptions& opts) {
  const double n = g.coeff({1, 0, 0, 0}), c = g.coeff({0, 1, 0, 0}), d = g.coeff({0, 0, 1, 0});
  if (n == 0.0 && c == 0.0 && d == 0.0)
    throw AnalysisError(AnalysisError::Kind::AllLeadingZero, "n = c = d = 0: outside the generic case");
  if (opts.samples < 1 || !(opts.t_max > 0)) throw AnalysisError(AnalysisError::Kind::BadInput, "branch options");
  BranchRecord rec;
  rec.pivot = (std::abs(n) >= std::abs(c) && std::abs(n) >= std::abs(d)) ? 'n' : (std::abs(c) >= std::abs(d) ? 'c' : 'd');
  const double disc = n * n - c * c - d * d;
  rec.leading_ray = Eigen::Vector4d(n, -c, -d, -4 * disc);
  const double sign = n < 0 ? -1.0 : 1.0;

  const PolySystem<double> sys = branch_system(g, rec.pivot);
  const auto J = jacobian(sys);
  Eigen::Vector4d y = Eigen::Vector4d::Zero(), prev = y;
  Eigen::Matrix<double, 5, 1> pt;
  for (int k = 1; k <= opts.samples; ++k) {
    const double t = sign * opts.t_max * k / opts.samples;
    Eigen::Vector4d guess = k == 1 ? Eigen::Vector4d(rec.leading_ray * t) : Eigen::Vector4d(2 * y - prev);
    bool ok = false;
    for (int it = 0; it < 50; ++it) {
      pt << guess, t;
      const Eigen::VectorXd F = evaluate(sys, pt);
      const Eigen::MatrixXd JF = evaluate(J, pt).leftCols(4);
      const Eigen::Vector4d dx = JF.fullPivLu().solve(-F);
      if (!dx.allFinite()) break;
      guess += dx;
      if (dx.norm() <= 1e-15 * (1 + guess.norm())) {
        ok = true;
        break;
      }
      if (it >= 3 && F.norm() <= 1e-17) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      pt << guess, t;
      ok = evaluate(sys, pt).norm() <= 1e-14 * (1 + guess.norm());
    }
    if (!ok) {
      std::ostringstream os;
      os << "branch continuation failed at t = " << t;
      throw AnalysisError(AnalysisError::Kind::NewtonFailure, os.str());
    }
    prev = k == 1 ? Eigen::Vector4d::Zero() : y;
    y = guess;
    BranchPoint bp;
    bp.t = t;
    bp.N = y[0];
    bp.C = y[1];
    bp.D = y[2];
    bp.tau = y[3];
    bp.cone = bp.N * bp.N - bp.C * bp.C - bp.D * bp.D;
    bp.delta = bp.cone >= 0 ? std::sqrt(bp.cone) : std::numeric_limits<double>::quiet_NaN();
    bp.period = 2 * std::numbers::pi / (1 + bp.tau);
    rec.points.push_back(bp);
  }
  return rec;
}

std::vector<BranchRecord> nonsymmetric_branches(const ReducedHamiltonian& rh, const BranchOptions& opts) {
  if (rh.kind == SymmetryKind::AE) throw AnalysisError(AnalysisError::Kind::BadInput, "nonsymmetric_branches: needs SR or COMBINED g");
  if (classify_period_geometry(rh.n(), rh.c(), rh.d()) != PeriodGeometry::Elliptic) {
    solve_branch_curve(rh.g, opts);  // still validates the leading coefficients
    return {};
  }
  // Existence is local: keep the prefix inside the image N^2 > C^2 + D^2 and
  // shrink the parameter range if even the first sample leaves it.
  BranchOptions o = opts;
  BranchRecord curve;
  for (int shrink = 0; shrink < 8; ++shrink, o.t_max /= 10) {
    curve = solve_branch_curve(rh.g, o);
    std::size_t k = 0;
    while (k < curve.points.size() && curve.points[k].cone > 0) ++k;
    curve.points.resize(k);
    if (k > 0) break;
  }
  if (curve.points.empty())
    throw AnalysisError(AnalysisError::Kind::NewtonFailure, "nonsymmetric_branches: no sample inside the cone image");
  std::vector<BranchRecord> out;
  for (int s : {1, -1}) {
    BranchRecord b = curve;
    b.delta_sign = s;
    for (auto& p : b.points) p.delta *= s;
    out.push_back(b);
  }
  return out;
}

MorseCheck morse_check(const ReducedHamiltonian& rh, double h) {
  auto tau = [&](double x, double y) {
    const ComplexPair<double> z{{x, y}, {x, y}};
    const auto inv = to_invariants(z);
    return solve_tau(rh.g, inv.N, inv.C, inv.D);
  };
  const double t0 = tau(0, 0);
  MorseCheck m;
  m.hessian(0, 0) = (tau(h, 0) - 2 * t0 + tau(-h, 0)) / (h * h);
  m.hessian(1, 1) = (tau(0, h) - 2 * t0 + tau(0, -h)) / (h * h);
  m.hessian(0, 1) = m.hessian(1, 0) = (tau(h, h) - tau(h, -h) - tau(-h, h) + tau(-h, -h)) / (4 * h * h);
  m.det = m.hessian.determinant();
  const double scale = std::max(1e-300, m.hessian.squaredNorm());
  if (std::abs(m.det) <= 1e-6 * scale)
    m.geometry = PeriodGeometry::Degenerate;
  else
    m.geometry = m.det > 0 ? PeriodGeometry::Elliptic : PeriodGeometry::Hyperbolic;
  return m;
}

SRReport analyze_sr(const ReducedHamiltonian& rh, const SROptions& opts) {
  SRReport rep;
  rep.n = rh.n();
  rep.c = rh.c();
  rep.d = rh.d();
  rep.discriminant = rep.n * rep.n - rep.c * rep.c - rep.d * rep.d;
  rep.geometry = classify_period_geometry(rep.n, rep.c, rep.d);
  rep.symmetric_family = symmetric_family(rh, opts.sample_radii, opts.angles_per_radius);
  rep.nonsymmetric_branches = nonsymmetric_branches(rh, opts.branch);
  rep.morse = morse_check(rh);
  if (rep.geometry == PeriodGeometry::Degenerate)
    rep.warnings.push_back("n^2 = c^2 + d^2: degenerate boundary, no branches emitted");
  else if (rep.morse.geometry != rep.geometry)
    rep.warnings.push_back("finite-difference Morse check disagrees with the sign of n^2 - c^2 - d^2");
  return rep;
}

}  // namespace symorb
