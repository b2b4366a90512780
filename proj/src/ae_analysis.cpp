#include "symorb/ae_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace symorb {

namespace {

constexpr int kV = 0, kT = 1, kU = 2, kW = 3, kX = 4, kR = 5;

int column_of(char c) {
  switch (c) {
    case 'v': return kV;
    case 't': return kT;
    case 'u': return kU;
    case 'w': return kW;
    case 'x': return kX;
  }
  throw AnalysisError(AnalysisError::Kind::BadInput, std::string("unknown blow-up coordinate '") + c + "'");
}

const std::vector<std::string>& blowup_names() {
  static const std::vector<std::string> n{"v", "t", "u", "w", "x"};
  return n;
}

BlowupSolution from_point(const CVector& p) {
  BlowupSolution s;
  s.v = p[kV], s.t = p[kT], s.u = p[kU], s.w = p[kW], s.x = p[kX];
  return s;
}

CMatrix certification_minor(const CSystem& sys, const CVector& point, char deleted_column) {
  const CMatrix J = evaluate_jacobian(sys, point);
  const int drop = column_of(deleted_column);
  CMatrix M(4, 4);
  for (int j = 0, c = 0; j < 5; ++j)
    if (j != drop) M.col(c++) = J.col(j);
  return M;
}

// Nonzero relative to the Hadamard bound of the minor.
bool certified(const CMatrix& M) {
  double bound = 1;
  for (int j = 0; j < M.cols(); ++j) bound *= M.col(j).norm();
  return std::abs(M.determinant()) > 1e-10 * bound;
}

}  // namespace

AECoefficients AECoefficients::from_reduced(const ReducedHamiltonian& rh) {
  if (rh.kind != SymmetryKind::AE) throw AnalysisError(AnalysisError::Kind::BadInput, "AE coefficients need an AE reduced Hamiltonian");
  AECoefficients k;
  k.a1 = rh.a1(), k.c1 = rh.c1(), k.d1 = rh.d1(), k.e1 = rh.e1(), k.f1 = rh.f1(), k.g1 = rh.g1coef();
  k.b2 = rh.b2(), k.a2 = rh.a2(), k.c2 = rh.c2(), k.d2 = rh.d2(), k.e2 = rh.e2(), k.f2 = rh.f2(), k.g2 = rh.g2coef();
  return k;
}

ReducedHamiltonian AECoefficients::to_reduced() const {
  ReducedHamiltonian rh;
  rh.kind = SymmetryKind::AE;
  auto fill = [](RPoly& p, double tau, double a, double c, double d, double e, double f, double g) {
    p.add_term({0, 0, 0, 1}, tau);
    p.add_term({1, 0, 0, 0}, a);
    p.add_term({0, 1, 0, 0}, c);
    p.add_term({0, 0, 2, 0}, d);
    p.add_term({2, 0, 0, 0}, e);
    p.add_term({1, 1, 0, 0}, f);
    p.add_term({1, 0, 0, 1}, g);
  };
  fill(rh.g1, 0.5, a1, c1, d1, e1, f1, g1);
  fill(rh.g2, b2, a2, c2, d2, e2, f2, g2);
  return rh;
}

std::string to_string(SymmetricVerdict v) {
  return v == SymmetricVerdict::NoSymmetricOrbits ? "NoSymmetricOrbits" : "Degenerate";
}

std::string to_string(BlowupChart c) {
  switch (c) {
    case BlowupChart::V1: return "v=1";
    case BlowupChart::V0W1: return "v=0;w=1";
    case BlowupChart::V0T1: return "v=0;t=1";
  }
  return "?";
}

SymmetricNonexistence symmetric_nonexistence(const AECoefficients& k, double tol) {
  SymmetricNonexistence r;
  r.liapunov_coefficient = k.b2 + k.c2;
  r.eigen_real_part = 2 * k.a2;
  r.reduced_fix_s_determinant = (k.a2 + k.c2) / 2 - k.b2 * (k.a1 + k.c1);
  if (std::abs(r.liapunov_coefficient) > tol) {
    r.verdict = SymmetricVerdict::NoSymmetricOrbits;
    r.reason = "V = x^2 + y^2 is strictly monotone on Fix S (b2 + c2 != 0)";
  } else if (std::abs(r.eigen_real_part) > tol) {
    r.verdict = SymmetricVerdict::NoSymmetricOrbits;
    r.reason = "linearization on Fix S has eigenvalues 2(a2 +- a1 i) with nonzero real part";
  } else {
    r.verdict = SymmetricVerdict::Degenerate;
    r.reason = "b2 + c2 = 0 and a2 = 0: higher-order terms decide";
  }
  return r;
}

PolySystem<double> build_blowup_system(const AECoefficients& k) {
  auto V = [](int i) { return RPoly::variable(5, i); };
  const RPoly v = V(kV), t = V(kT), u = V(kU), w = V(kW), x = V(kX);
  std::vector<RPoly> ps;
  ps.push_back(v * (0.5 * t + k.a1 * v + k.c1 * u) + k.a1 * x * x + k.a2 * x * w);
  ps.push_back(x * (0.5 * t + 2 * k.a1 * v + 2 * k.c1 * u) + w * (k.b2 * t + 2 * k.a2 * v + 2 * k.c2 * u));
  ps.push_back(k.c1 * x * w - u * (k.b2 * t + k.a2 * v + k.c2 * u) + k.c2 * w * w);
  ps.push_back(u * u + w * w + x * x - v * v);
  for (auto& p : ps) p = prune(p, 0.0);
  return PolySystem<double>(ps, blowup_names());
}

CVector BlowupSolution::point() const {
  CVector p(5);
  p << v, t, u, w, x;
  return p;
}

cplx certification_determinant(const AECoefficients& k, const CVector& point, char deleted_column) {
  return certification_minor(to_complex(build_blowup_system(k)), point, deleted_column).determinant();
}

double v0_pair_determinant_closed_form(const AECoefficients& k) {
  const double a2 = k.a2, b2 = k.b2, c1 = k.c1, c2 = k.c2;
  return -2 * (a2 * a2 * b2 * b2 + b2 * b2 * c1 * c1 - 2 * b2 * c1 * c2 + c2 * c2) / b2;
}

std::vector<BlowupSolution> v0_solutions(const AECoefficients& k, double b2_tol) {
  if (std::abs(k.b2) <= b2_tol) throw AnalysisError(AnalysisError::Kind::B2Zero, "b2 = 0: the v = 0 closed forms need b2 != 0");
  const CSystem sys = to_complex(build_blowup_system(k));
  std::vector<BlowupSolution> out;

  // The real line {t free, u = w = x = 0}, represented by t = 1.
  {
    CVector p = CVector::Zero(5);
    p[kT] = 1.0;
    BlowupSolution s = from_point(p);
    s.chart = BlowupChart::V0T1;
    s.is_real = true;
    s.deleted_column = 't';
    s.cert_det = certification_determinant(k, p, 't');
    s.nondegenerate = false;
    s.residual = residual(sys, p);
    // In this chart the simple pair sits at distance sqrt(2) |b2 / 2 c2|; keep
    // the probe's counting radius eps^(1/5) well inside that.
    const double sep = k.c2 == 0.0 ? 1.0 : std::sqrt(2.0) * std::abs(k.b2 / (2 * k.c2));
    const double eps0 = std::max(1e-12, std::min(1e-4, std::pow(sep / 4, 5)));
    const Chart ch = Chart::fix("t", 1.0);
    s.multiplicity = multiplicity_probe(ch.apply(sys), ch.restrict_point(sys, p), {eps0, eps0 * 1e-2, eps0 * 1e-4});
    out.push_back(s);
  }
  // The simple pair, normalized by w = 1 and polished in that chart.
  const Chart ch = Chart::fix("w", 1.0);
  const CSystem free = ch.apply(sys);
  for (double sgn : {1.0, -1.0}) {
    CVector p = CVector::Zero(5);
    p[kT] = cplx(0, -sgn * 2 * k.c2 / k.b2);
    p[kU] = cplx(0, sgn);
    p[kW] = 1.0;
    const RootRecord rr = newton_refine(free, ch.restrict_point(sys, p));
    p = ch.lift(sys, rr.point);
    BlowupSolution s = from_point(p);
    s.chart = BlowupChart::V0W1;
    s.deleted_column = 'w';
    s.cert_det = certification_determinant(k, p, 'w');
    s.nondegenerate = certified(certification_minor(sys, p, 'w'));
    s.multiplicity = s.nondegenerate ? 1 : multiplicity_probe(free, rr.point);
    s.residual = residual(sys, p);
    out.push_back(s);
  }
  return out;
}

double ContinuationPoint::period() const { return 2 * std::numbers::pi / (1 + tau); }

PolySystem<double> scaled_system(const ReducedHamiltonian& rh) {
  if (rh.kind != SymmetryKind::AE) throw AnalysisError(AnalysisError::Kind::BadInput, "scaled_system: needs an AE reduced Hamiltonian");
  const int m = 6;
  auto V = [&](int i) { return RPoly::variable(m, i); };
  const RPoly v = V(kV), t = V(kT), u = V(kU), w = V(kW), x = V(kX), r = V(kR);
  const RPoly N = r * v, C = r * u, D = r * w, delta = r * x;
  const std::vector<RPoly> sub{N, C, D, r * t};
  auto at = [&](const RPoly& p) { return substitute(p, sub); };

  const RPoly g1 = at(rh.g1), g1N = at(derivative(rh.g1, kN)), g1C = at(derivative(rh.g1, kC)), g1D = at(derivative(rh.g1, kD));
  const RPoly g2 = at(rh.g2), g2N = at(derivative(rh.g2, kN)), g2C = at(derivative(rh.g2, kC)), g2D = at(derivative(rh.g2, kD));

  // 2 D^2 g_{D^2} = D g_D and 2 C D g_{D^2} = C g_D for g even in D.
  const RPoly e24 = N * g1 + delta * delta * g1N + D * delta * g2N;
  const RPoly e22 = delta * (g1 + N * g1N + C * g1C + D * g1D) + D * g2 + D * (N * g2N + C * g2C + D * g2D);
  const RPoly e23 = delta * (D * g1C - C * g1D) - C * g2 + D * (D * g2C - C * g2D);

  auto divide_r2 = [&](const RPoly& p) {
    RPoly q(m);
    for (const auto& [e, c] : p.terms()) {
      if (e[kR] < 2) throw std::logic_error("scaled_system: term not divisible by r^2");
      Exponent f = e;
      f[kR] -= 2;
      q.add_term(f, c);
    }
    return q;
  };
  std::vector<RPoly> ps{divide_r2(e24), divide_r2(e22), divide_r2(e23), u * u + w * w + x * x - v * v};
  return PolySystem<double>(ps, {"v", "t", "u", "w", "x", "r"});
}

ContinuationCurve continue_to_r(const ReducedHamiltonian& rh, const BlowupSolution& sol, const ContinuationOptions& opts) {
  if (!sol.is_real) throw AnalysisError(AnalysisError::Kind::BadInput, "continue_to_r: only real roots give periodic orbits");
  if (!(opts.r_max > 0) || opts.samples < 1) throw AnalysisError(AnalysisError::Kind::BadInput, "continue_to_r: bad options");
  const PolySystem<double> sys = scaled_system(rh);
  const PolyMatrix<double> J = jacobian(sys);
  const int fixed = column_of(sol.deleted_column);
  std::vector<int> free;
  for (int j = 0; j < 5; ++j)
    if (j != fixed) free.push_back(j);

  Eigen::Matrix<double, 6, 1> z;
  z << sol.v.real(), sol.t.real(), sol.u.real(), sol.w.real(), sol.x.real(), 0.0;

  auto minor = [&](const Eigen::Matrix<double, 6, 1>& p) {
    const Eigen::MatrixXd full = evaluate(J, p);
    Eigen::Matrix4d M;
    for (int c = 0; c < 4; ++c) M.col(c) = full.col(free[c]);
    return M;
  };
  auto rcond = [](const Eigen::Matrix4d& M) {
    const Eigen::Vector4d s = Eigen::JacobiSVD<Eigen::Matrix4d>(M).singularValues();
    return s[0] > 0 ? s[3] / s[0] : 0.0;
  };
  auto fail = [](double r, const std::string& why) {
    std::ostringstream os;
    os << "continuation stopped at r = " << r << ": " << why;
    throw AnalysisError(AnalysisError::Kind::SingularContinuation, os.str());
  };
  auto correct = [&](Eigen::Matrix<double, 6, 1>& p) {
    for (int it = 0; it < 30; ++it) {
      const Eigen::Vector4d F = evaluate(sys, p);
      const Eigen::Matrix4d M = minor(p);
      if (rcond(M) < opts.singular_tol) return false;
      const Eigen::Vector4d dx = M.partialPivLu().solve(-F);
      for (int c = 0; c < 4; ++c) p[free[c]] += dx[c];
      if (dx.norm() <= 1e-14 * (1 + p.head<5>().norm())) return true;
    }
    return evaluate(sys, p).norm() <= 1e-12;
  };

  if (!correct(z)) fail(0.0, "root is degenerate or does not solve the blow-up system");
  ContinuationCurve curve;
  curve.fixed = sol.deleted_column;
  auto record = [&](const Eigen::Matrix<double, 6, 1>& p) {
    ContinuationPoint c;
    c.r = p[kR];
    c.v = p[kV], c.t = p[kT], c.u = p[kU], c.w = p[kW], c.x = p[kX];
    c.N = c.r * c.v, c.C = c.r * c.u, c.D = c.r * c.w, c.delta = c.r * c.x, c.tau = c.r * c.t;
    curve.points.push_back(c);
  };
  record(z);

  // Tangent predictor from the implicit function theorem, step halving on failure.
  const double h = opts.r_max / opts.samples;
  for (int k = 1; k <= opts.samples; ++k) {
    const double target = h * k;
    double step = h;
    while (z[kR] < target - 1e-15 * target) {
      step = std::min(step, target - z[kR]);
      const Eigen::Matrix<double, 6, 1> full = z;
      const Eigen::MatrixXd Jf = evaluate(J, z);
      Eigen::Matrix4d M;
      for (int c = 0; c < 4; ++c) M.col(c) = Jf.col(free[c]);
      const Eigen::Vector4d dy = M.partialPivLu().solve(-Jf.col(kR));
      Eigen::Matrix<double, 6, 1> trial = z;
      for (int c = 0; c < 4; ++c) trial[free[c]] += step * dy[c];
      trial[kR] += step;
      if (correct(trial)) {
        z = trial;
        step *= 2;
      } else {
        step /= 2;
        if (step < 1e-8 * h) fail(full[kR], "Jacobian minor singular (fold)");
      }
    }
    record(z);
  }
  return curve;
}

AEReport solve_blowup(const AECoefficients& k, const AEOptions& opts) { return analyze_ae(k.to_reduced(), opts); }

AEReport analyze_ae(const ReducedHamiltonian& rh, const AEOptions& opts) {
  AEReport rep;
  rep.coefficients = AECoefficients::from_reduced(rh);
  const AECoefficients& k = rep.coefficients;
  rep.symmetric = symmetric_nonexistence(k);

  const CSystem sys = to_complex(build_blowup_system(k));
  const SolveResult res = solve_all_roots(sys, Chart::fix("v", 1.0), opts.solver);
  for (const auto& w : res.warnings) rep.warnings.push_back(w);
  if (!res.complete()) rep.complete = false;

  const bool axis_ok = std::abs(k.c1) <= 1e-12 && std::abs(k.a2 - 4 * k.a1 * k.b2) <= 1e-12;
  for (const auto& rr : res.roots) {
    BlowupSolution s = from_point(rr.point);
    s.chart = BlowupChart::V1;
    s.is_real = rr.is_real;
    s.multiplicity = rr.multiplicity;
    s.residual = rr.residual;
    s.deleted_column = std::abs(s.t) > 1e-8 ? 't' : 'v';
    s.cert_det = certification_determinant(k, rr.point, s.deleted_column);
    s.nondegenerate = certified(certification_minor(sys, rr.point, s.deleted_column));
    s.is_axis = std::abs(s.u) <= 1e-9 && std::abs(s.w) <= 1e-9;
    s.axis_consistent = s.is_axis && axis_ok;
    rep.bezout_account.found_v1 += s.multiplicity;
    if (s.is_real) rep.n_real_v1 += 1;
    rep.solutions.push_back(s);
  }
  rep.bezout_account.paths_at_infinity = res.paths_at_infinity;

  try {
    for (const auto& s : v0_solutions(k)) {
      rep.bezout_account.found_v0 += s.multiplicity;
      rep.solutions.push_back(s);
    }
  } catch (const AnalysisError& e) {
    rep.warnings.push_back(std::string("v = 0 chart: ") + e.what());
  } catch (const SolverError& e) {
    rep.warnings.push_back(std::string("v = 0 chart: ") + e.what());
  }

  const auto& b = rep.bezout_account;
  if (b.found_v1 + b.found_v0 != b.expected) {
    rep.complete = false;
    std::ostringstream os;
    os << "BezoutDeficit: found " << b.found_v1 << " (v = 1) + " << b.found_v0 << " (v = 0) of " << b.expected;
    rep.warnings.push_back(os.str());
  }
  if (b.found_v0 != b.paths_at_infinity && b.found_v0 > 0) {
    std::ostringstream os;
    os << "v = 0 multiplicity " << b.found_v0 << " differs from " << b.paths_at_infinity << " homotopy paths at infinity";
    rep.warnings.push_back(os.str());
  }

  // Real roots pair as (t, u, w, x) <-> (t, u, -w, -x).
  for (const auto& s : rep.solutions) {
    if (s.chart != BlowupChart::V1 || !s.is_real) continue;
    const bool found = std::any_of(rep.solutions.begin(), rep.solutions.end(), [&](const BlowupSolution& o) {
      return o.chart == BlowupChart::V1 && o.is_real && std::abs(o.t - s.t) <= 1e-8 && std::abs(o.u - s.u) <= 1e-8 &&
             std::abs(o.w + s.w) <= 1e-8 && std::abs(o.x + s.x) <= 1e-8;
    });
    if (!found) rep.sign_pairing_ok = false;
  }
  if (!rep.sign_pairing_ok) rep.warnings.push_back("real roots are not sign-paired under (w, x) -> (-w, -x)");
  if (std::abs(k.b2) > 1e-12 && rep.n_real_v1 % 2 != 0) rep.warnings.push_back("odd number of real roots");

  if (opts.continue_families) {
    for (std::size_t i = 0; i < rep.solutions.size(); ++i) {
      const auto& s = rep.solutions[i];
      if (s.chart != BlowupChart::V1 || !s.is_real || !s.nondegenerate) continue;
      try {
        rep.orbit_families.push_back(continue_to_r(rh, s, opts.continuation));
        rep.orbit_families.back().solution_index = static_cast<int>(i);
      } catch (const AnalysisError& e) {
        rep.warnings.push_back(e.what());
      }
    }
  }
  return rep;
}

}  // namespace symorb
