#include "symorb/orbitverify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace symorb {

namespace {

using Vec20 = Eigen::Matrix<double, 20, 1>;

constexpr double kGolden = 0.6180339887498949;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

Eigen::Vector4d grad_H2(const Eigen::Vector4d& x) { return 2 * Eigen::Vector4d(x[0], x[1], -x[2], -x[3]); }

double H2(const Eigen::Vector4d& x) { return x[0] * x[0] + x[1] * x[1] - x[2] * x[2] - x[3] * x[3]; }

double energy_scale(const VectorFieldSpec& vf, const Eigen::Vector4d& x0) {
  return std::max(std::abs(vf.energy(x0)), x0.squaredNorm());
}

void check_drift(double drift, double scale, double tol) {
  if (drift > tol * scale) throw StepFailure("integrate: energy drift " + fmt(drift) + " exceeds tolerance");
}

// Minimum-norm least-squares step for J dx = -F.
template <typename M, typename V>
Eigen::VectorXd svd_step(const M& J, const V& F) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(J), Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-9);
  return -svd.solve(Eigen::VectorXd(F));
}

struct Eval {
  Eigen::VectorXd F;
  Eigen::MatrixXd J;
};

// Gauss-Newton with Armijo backtracking on |F|^2.  eval(p, with_jacobian)
// may throw StepFailure, which counts as a rejected trial point.
template <typename EvalFn, typename Guard>
Eigen::VectorXd gauss_newton(EvalFn&& eval, Eigen::VectorXd p, double stop, int max_iter, Guard&& guard,
                             int& iterations, const char* who) {
  Eval e;
  try {
    e = eval(p, true);
  } catch (const StepFailure& ex) {
    throw NoConvergence(std::string(who) + ": " + ex.what());
  }
  for (iterations = 0; iterations < max_iter; ++iterations) {
    const double f0 = e.F.squaredNorm();
    if (e.F.cwiseAbs().maxCoeff() <= stop) return p;
    const Eigen::VectorXd dp = svd_step(e.J, e.F);
    bool moved = false;
    for (double lam = 1.0; lam > 1e-4; lam *= 0.5) {
      const Eigen::VectorXd q = p + lam * dp;
      if (!guard(q)) continue;
      try {
        Eval trial = eval(q, false);
        if (trial.F.squaredNorm() <= (1 - 1e-4 * lam) * f0) {
          p = q;
          moved = true;
          break;
        }
      } catch (const StepFailure&) {
      }
    }
    if (!moved) {
      // Converged to rounding level, or stuck.
      if (e.F.cwiseAbs().maxCoeff() <= 1e3 * stop) return p;
      throw NoConvergence(std::string(who) + ": line search stalled at residual " + fmt(e.F.cwiseAbs().maxCoeff()));
    }
    try {
      e = eval(p, true);
    } catch (const StepFailure& ex) {
      throw NoConvergence(std::string(who) + ": " + ex.what());
    }
  }
  if (e.F.cwiseAbs().maxCoeff() <= stop) return p;
  throw NoConvergence(std::string(who) + ": no convergence in " + std::to_string(max_iter) +
                      " iterations, residual " + fmt(e.F.cwiseAbs().maxCoeff()));
}

OrbitResult finish(const VectorFieldSpec& vf, const Eigen::Vector4d& x0, double T, int iters,
                   const ShootOptions& opts, const char* who) {
  OrbitResult r;
  r.x0 = x0;
  r.period = T;
  r.iterations = iters;
  const auto fr = flow(vf, x0, T, opts.flow);
  r.residual = (fr.x - x0).cwiseAbs().maxCoeff();
  r.energy = vf.energy(x0);
  r.energy_drift = fr.energy_drift;
  if (r.residual > opts.accept)
    throw NoConvergence(std::string(who) + ": closing residual " + fmt(r.residual) + " above acceptance");
  if (opts.classify) classify_orbit_symmetry(vf, r, opts);
  return r;
}

}  // namespace

CompiledPoly4::CompiledPoly4(const RPoly& p) {
  if (p.nvars() != 4) throw std::invalid_argument("CompiledPoly4: need a polynomial in 4 variables");
  for (const auto& [e, c] : p.terms()) {
    Term t{c, {e[0], e[1], e[2], e[3]}};
    for (int v : t.e) max_degree_ = std::max(max_degree_, v);
    terms_.push_back(t);
  }
}

double CompiledPoly4::operator()(const Eigen::Vector4d& x) const {
  constexpr int kMax = 16;
  if (max_degree_ >= kMax) throw std::invalid_argument("CompiledPoly4: degree too high");
  double pw[4][kMax];
  for (int i = 0; i < 4; ++i) {
    pw[i][0] = 1;
    for (int k = 1; k <= max_degree_; ++k) pw[i][k] = pw[i][k - 1] * x[i];
  }
  double s = 0;
  for (const auto& t : terms_) s += t.c * pw[0][t.e[0]] * pw[1][t.e[1]] * pw[2][t.e[2]] * pw[3][t.e[3]];
  return s;
}

VectorFieldSpec::VectorFieldSpec(const HamiltonianSpec& spec) : spec_(spec), kind_(spec.kind), H_(spec.H) {
  if (spec.H.nvars() != 4) throw std::invalid_argument("VectorFieldSpec: H must be a polynomial in (x1, y1, x2, y2)");
  int k = 0;
  for (int i = 0; i < 4; ++i) {
    const RPoly gi = derivative(spec.H, i);
    grad_[i] = CompiledPoly4(gi);
    for (int j = i; j < 4; ++j) hess_[k++] = CompiledPoly4(derivative(gi, j));
  }
}

Eigen::Vector4d VectorFieldSpec::operator()(const Eigen::Vector4d& x) const {
  const double g0 = grad_[0](x), g1 = grad_[1](x), g2 = grad_[2](x), g3 = grad_[3](x);
  // (1/2) J grad H with J = diag(J2, J2).
  return 0.5 * Eigen::Vector4d(-g1, g0, -g3, g2);
}

Eigen::Matrix4d VectorFieldSpec::jacobian(const Eigen::Vector4d& x) const {
  Eigen::Matrix4d Hs;
  int k = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j) Hs(i, j) = Hs(j, i) = hess_[k++](x);
  return 0.5 * J_matrix<double>() * Hs;
}

FlowResult flow(const VectorFieldSpec& vf, const Eigen::Vector4d& x0, double T, const FlowOptions& opts) {
  const double H0 = vf.energy(x0);
  FlowResult r;
  r.x = integrate_dp87(
      [&](double, const Eigen::Vector4d& x) -> Eigen::Vector4d { return vf(x); }, x0, 0.0, T, opts.integrator,
      [&](double, const Eigen::Vector4d& x) { r.energy_drift = std::max(r.energy_drift, std::abs(vf.energy(x) - H0)); });
  check_drift(r.energy_drift, energy_scale(vf, x0), opts.energy_tol);
  return r;
}

FlowWithSTM flow_with_stm(const VectorFieldSpec& vf, const Eigen::Vector4d& x0, double T, const FlowOptions& opts) {
  // The variational block is carried as eps * Phi with eps = |x0| so that one
  // error scale suits both blocks.
  const double eps = std::max(x0.cwiseAbs().maxCoeff(), 1e-300);
  Vec20 y;
  y.head<4>() = x0;
  Eigen::Map<Eigen::Matrix4d>(y.data() + 4) = eps * Eigen::Matrix4d::Identity();
  const double H0 = vf.energy(x0);
  FlowWithSTM r;
  auto rhs = [&](double, const Vec20& s) -> Vec20 {
    Vec20 out;
    const Eigen::Vector4d x = s.head<4>();
    out.head<4>() = vf(x);
    Eigen::Map<Eigen::Matrix4d>(out.data() + 4) = vf.jacobian(x) * Eigen::Map<const Eigen::Matrix4d>(s.data() + 4);
    return out;
  };
  const Vec20 yT = integrate_dp87(rhs, y, 0.0, T, opts.integrator, [&](double, const Vec20& s) {
    r.energy_drift = std::max(r.energy_drift, std::abs(vf.energy(s.head<4>()) - H0));
  });
  check_drift(r.energy_drift, energy_scale(vf, x0), opts.energy_tol);
  r.x = yT.head<4>();
  r.stm = Eigen::Map<const Eigen::Matrix4d>(yT.data() + 4) / eps;
  return r;
}

std::vector<Eigen::Vector4d> sample_orbit(const VectorFieldSpec& vf, const Eigen::Vector4d& x0, double T,
                                          int samples, const FlowOptions& opts) {
  if (samples < 1) throw std::invalid_argument("sample_orbit: need at least one sample");
  std::vector<Eigen::Vector4d> out{x0};
  for (int k = 1; k < samples; ++k) out.push_back(flow(vf, x0, T * k / samples, opts).x);
  return out;
}

std::string to_string(OrbitSymmetry s) {
  switch (s) {
    case OrbitSymmetry::R_symmetric: return "R_symmetric";
    case OrbitSymmetry::S_symmetric: return "S_symmetric";
    case OrbitSymmetry::RS_symmetric: return "RS_symmetric";
    case OrbitSymmetry::RSProduct_symmetric: return "RS_product_symmetric";
    case OrbitSymmetry::NonSymmetric_paired: return "NonSymmetric_paired";
  }
  return "?";
}

Eigen::Matrix<double, 4, 2> fixed_space_basis(FixedSpace space) {
  Eigen::Matrix<double, 4, 2> B = Eigen::Matrix<double, 4, 2>::Zero();
  const double h = 1 / std::sqrt(2.0);
  switch (space) {
    case FixedSpace::R:  // (z, z)
      B(0, 0) = B(2, 0) = h;
      B(1, 1) = B(3, 1) = h;
      break;
    case FixedSpace::S:  // (z, conj z)
      B(0, 0) = B(2, 0) = h;
      B(1, 1) = h;
      B(3, 1) = -h;
      break;
    case FixedSpace::SPi:  // (z, -conj z)
      B(0, 0) = h;
      B(2, 0) = -h;
      B(1, 1) = B(3, 1) = h;
      break;
    case FixedSpace::RS:  // both real
      B(0, 0) = 1;
      B(2, 1) = 1;
      break;
  }
  return B;
}

OrbitResult shoot_R_symmetric(const VectorFieldSpec& vf, std::complex<double> z, double T_guess,
                              const ShootOptions& opts) {
  if (!(T_guess > 0)) throw std::invalid_argument("shoot_R_symmetric: T_guess must be positive");
  Eigen::Matrix<double, 4, 2> E;
  E << 1, 0, 0, 1, 1, 0, 0, 1;
  Eigen::Matrix<double, 2, 4> P;
  P << 1, 0, -1, 0, 0, 1, 0, -1;
  const double scale = std::abs(z) * std::sqrt(2.0);
  if (!(scale > 0)) throw std::invalid_argument("shoot_R_symmetric: z must be nonzero");

  // Every point of Fix R near the origin lies on such an orbit, so first try
  // with the point held and T alone free; move the point only if that fails.
  bool hold = true;
  const Eigen::Vector2d z0(z.real(), z.imag());
  auto unpack = [&](const Eigen::VectorXd& p) -> Eigen::Vector3d {
    return hold ? Eigen::Vector3d(z0[0], z0[1], p[0]) : Eigen::Vector3d(p[0], p[1], p[2]);
  };
  auto eval = [&](const Eigen::VectorXd& p, bool jac) {
    const Eigen::Vector3d q = unpack(p);
    const Eigen::Vector4d x0 = E * q.head<2>();
    Eval e;
    e.F.resize(2);
    if (jac) {
      const auto fr = flow_with_stm(vf, x0, q[2] / 2, opts.flow);
      e.F = P * fr.x;
      Eigen::Matrix<double, 2, 3> J;
      J.leftCols<2>() = P * fr.stm * E;
      J.col(2) = 0.5 * P * vf(fr.x);
      e.J = hold ? Eigen::MatrixXd(J.col(2)) : Eigen::MatrixXd(J);
    } else {
      e.F = P * flow(vf, x0, q[2] / 2, opts.flow).x;
    }
    return e;
  };
  // T -> 0 also solves the equations; keep away from it.
  auto guard = [&](const Eigen::VectorXd& p) {
    const Eigen::Vector3d q = unpack(p);
    return q[2] > 0.5 * T_guess && q[2] < 2 * T_guess && q.head<2>().norm() > 0.1 * std::abs(z);
  };
  Eigen::VectorXd p(1);
  p << T_guess;
  int iters = 0;
  try {
    p = gauss_newton(eval, p, opts.tol * scale, opts.max_iter, guard, iters, "shoot_R_symmetric");
  } catch (const NoConvergence&) {
    hold = false;
    p.resize(3);
    p << z0, T_guess;
    p = gauss_newton(eval, p, opts.tol * scale, opts.max_iter, guard, iters, "shoot_R_symmetric");
  }
  const Eigen::Vector3d q = unpack(p);
  return finish(vf, E * q.head<2>(), q[2], iters, opts, "shoot_R_symmetric");
}

OrbitResult shoot_generic(const VectorFieldSpec& vf, const Eigen::Vector4d& x_guess, double T_guess, Anchor anchor,
                          const ShootOptions& opts) {
  if (!(T_guess > 0)) throw std::invalid_argument("shoot_generic: T_guess must be positive");
  const double scale = x_guess.norm();
  if (!(scale > 0)) throw std::invalid_argument("shoot_generic: x_guess must be nonzero");
  const Eigen::Vector4d fg = vf(x_guess);
  if (!(fg.norm() > 0)) throw std::invalid_argument("shoot_generic: x_guess is an equilibrium");
  const Eigen::Vector4d nsec = fg.normalized();
  const int rows = anchor == Anchor::None ? 5 : 6;

  auto anchor_value = [&](const Eigen::Vector4d& x) {
    return anchor == Anchor::Norm ? (x.squaredNorm() - x_guess.squaredNorm()) / scale
                                  : (H2(x) - H2(x_guess)) / scale;
  };
  auto anchor_grad = [&](const Eigen::Vector4d& x) -> Eigen::Vector4d {
    return anchor == Anchor::Norm ? Eigen::Vector4d(2 * x / scale) : Eigen::Vector4d(grad_H2(x) / scale);
  };
  auto eval = [&](const Eigen::VectorXd& p, bool jac) {
    const Eigen::Vector4d x0 = p.head<4>();
    const double T = p[4];
    Eval e;
    e.F.resize(rows);
    Eigen::Vector4d xT;
    if (jac) {
      const auto fr = flow_with_stm(vf, x0, T, opts.flow);
      xT = fr.x;
      e.J = Eigen::MatrixXd::Zero(rows, 5);
      e.J.topLeftCorner<4, 4>() = fr.stm - Eigen::Matrix4d::Identity();
      e.J.block<4, 1>(0, 4) = vf(xT);
      e.J.block<1, 4>(4, 0) = nsec.transpose();
      if (rows == 6) e.J.block<1, 4>(5, 0) = anchor_grad(x0).transpose();
    } else {
      xT = flow(vf, x0, T, opts.flow).x;
    }
    e.F.head<4>() = xT - x0;
    e.F[4] = nsec.dot(x0 - x_guess);
    if (rows == 6) e.F[5] = anchor_value(x0);
    return e;
  };
  auto guard = [&](const Eigen::VectorXd& p) {
    const double n = p.head<4>().norm();
    return p[4] > 0.5 * T_guess && p[4] < 2 * T_guess && n > 0.1 * scale && n < 10 * scale;
  };
  Eigen::VectorXd p(5);
  p << x_guess, T_guess;
  int iters = 0;
  p = gauss_newton(eval, p, opts.tol * scale, opts.max_iter, guard, iters, "shoot_generic");
  return finish(vf, p.head<4>(), p[4], iters, opts, "shoot_generic");
}

OrbitResult shoot_in_fixed_space(const VectorFieldSpec& vf, FixedSpace space, const Eigen::Vector4d& x_guess,
                                 double T_guess, const ShootOptions& opts) {
  if (!(T_guess > 0)) throw std::invalid_argument("shoot_in_fixed_space: T_guess must be positive");
  const auto B = fixed_space_basis(space);
  const Eigen::Vector2d q0 = B.transpose() * x_guess;
  const double scale = q0.norm();
  if (!(scale > 0)) throw std::invalid_argument("shoot_in_fixed_space: guess projects to the origin");

  auto eval = [&](const Eigen::VectorXd& p, bool jac) {
    const Eigen::Vector4d x0 = B * p.head<2>();
    Eval e;
    e.F.resize(5);
    Eigen::Vector4d xT;
    if (jac) {
      const auto fr = flow_with_stm(vf, x0, p[2], opts.flow);
      xT = fr.x;
      e.J = Eigen::MatrixXd::Zero(5, 3);
      e.J.topLeftCorner<4, 2>() = (fr.stm - Eigen::Matrix4d::Identity()) * B;
      e.J.block<4, 1>(0, 2) = vf(xT);
      e.J.block<1, 2>(4, 0) = 2 * p.head<2>().transpose() / scale;
    } else {
      xT = flow(vf, x0, p[2], opts.flow).x;
    }
    e.F.head<4>() = xT - x0;
    e.F[4] = (p.head<2>().squaredNorm() - scale * scale) / scale;
    return e;
  };
  auto guard = [&](const Eigen::VectorXd& p) { return p[2] > 0.5 * T_guess && p[2] < 2 * T_guess; };
  Eigen::VectorXd p(3);
  p << q0, T_guess;
  int iters = 0;
  p = gauss_newton(eval, p, opts.tol * scale, opts.max_iter, guard, iters, "shoot_in_fixed_space");
  return finish(vf, B * p.head<2>(), p[2], iters, opts, "shoot_in_fixed_space");
}

namespace {

// min over s in [0, T) of |phi_s(x0) - y|.
double distance_to_orbit(const VectorFieldSpec& vf, const Eigen::Vector4d& x0, double T, const Eigen::Vector4d& y,
                         const FlowOptions& fo) {
  const int M = 128;
  const double ds = T / M;
  std::vector<Eigen::Vector4d> pts{x0};
  for (int k = 1; k < M; ++k) pts.push_back(flow(vf, pts.back(), ds, fo).x);
  int best = 0;
  for (int k = 1; k < M; ++k)
    if ((pts[k] - y).norm() < (pts[best] - y).norm()) best = k;
  // Golden section on [-ds, ds] around the nearest sample.
  const Eigen::Vector4d base = pts[best];
  auto d = [&](double s) { return (flow(vf, base, s, fo).x - y).norm(); };
  double a = -ds, b = ds;
  double c = b - kGolden * (b - a), e = a + kGolden * (b - a);
  double fc = d(c), fe = d(e);
  for (int it = 0; it < 60; ++it) {
    if (fc < fe) {
      b = e;
      e = c;
      fe = fc;
      c = b - kGolden * (b - a);
      fc = d(c);
    } else {
      a = c;
      c = e;
      fc = fe;
      e = a + kGolden * (b - a);
      fe = d(e);
    }
  }
  return std::min({fc, fe, (base - y).norm()});
}

}  // namespace

void classify_orbit_symmetry(const VectorFieldSpec& vf, OrbitResult& orbit, const ShootOptions& opts) {
  const Eigen::Vector4d& x0 = orbit.x0;
  const double tol = opts.sym_tol * x0.norm();
  const bool hasR = vf.kind() != SymmetryKind::AE;
  const bool hasS = vf.kind() != SymmetryKind::SR;
  const bool hasRS = vf.kind() == SymmetryKind::Combined;
  SymmetryFlags& f = orbit.flags;
  f = {};
  const Eigen::Matrix4d R = R_matrix<double>(), S = S_matrix<double>();
  if (hasR) {
    f.dist_R = distance_to_orbit(vf, x0, orbit.period, R * x0, opts.flow);
    f.R = f.dist_R <= tol;
  }
  if (hasS) {
    f.dist_S = distance_to_orbit(vf, x0, orbit.period, S * x0, opts.flow);
    f.S = f.dist_S <= tol;
  }
  if (hasRS) {
    f.dist_RS = distance_to_orbit(vf, x0, orbit.period, R * S * x0, opts.flow);
    f.RS = f.dist_RS <= tol;
  }

  if (f.R && f.S) orbit.symmetry = OrbitSymmetry::RS_symmetric;
  else if (f.R) orbit.symmetry = OrbitSymmetry::R_symmetric;
  else if (f.S) orbit.symmetry = OrbitSymmetry::S_symmetric;
  else if (f.RS) orbit.symmetry = OrbitSymmetry::RSProduct_symmetric;
  else orbit.symmetry = OrbitSymmetry::NonSymmetric_paired;

  orbit.partner.reset();
  // Image under an involution that does not preserve the orbit.
  const Eigen::Matrix4d* g = nullptr;
  std::string name;
  if (hasR && !f.R) g = &R, name = "R";
  else if (hasS && !f.S) g = &S, name = "S";
  if (g) {
    PartnerOrbit p;
    p.x0 = *g * x0;
    p.energy = vf.energy(p.x0);
    p.residual = (flow(vf, p.x0, orbit.period, opts.flow).x - p.x0).cwiseAbs().maxCoeff();
    p.image_of = name;
    orbit.partner = p;
  }
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("linear_fit: need matching samples, at least 2");
  const Eigen::Index n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    A(i, 0) = x[i];
    A(i, 1) = 1;
    b[i] = y[i];
  }
  const Eigen::Vector2d c = A.colPivHouseholderQr().solve(b);
  LinearFit f{c[0], c[1], 1.0};
  const double mean = b.mean();
  const double ss_tot = (b.array() - mean).square().sum();
  const double ss_res = (A * c - b).squaredNorm();
  f.r2 = ss_tot > 0 ? 1 - ss_res / ss_tot : 1.0;
  return f;
}

}  // namespace symorb
