#include "symorb/roots.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numeric>
#include <numbers>
#include <random>
#include <sstream>

namespace symorb {

std::string to_string(SolverError::Kind k) {
  switch (k) {
    case SolverError::Kind::NonConvergent: return "NonConvergent";
    case SolverError::Kind::IllPosed: return "IllPosed";
    case SolverError::Kind::Diverged: return "Diverged";
    case SolverError::Kind::Inconclusive: return "Inconclusive";
    case SolverError::Kind::BadInput: return "BadInput";
  }
  return "Unknown";
}

int SolveResult::real_count() const {
  int k = 0;
  for (const auto& r : roots)
    if (r.is_real) k += r.multiplicity;
  return k;
}

// ---------------------------------------------------------------- charts

CSystem Chart::apply(const CSystem& sys) const {
  std::vector<int> fixed_idx(sys.nvars(), -1);
  for (std::size_t k = 0; k < fixed.size(); ++k) fixed_idx[sys.index_of(fixed[k].first)] = static_cast<int>(k);
  std::vector<std::string> free_names;
  for (int i = 0; i < sys.nvars(); ++i)
    if (fixed_idx[i] < 0) free_names.push_back(sys.names[i]);
  const int m = static_cast<int>(free_names.size());
  std::vector<CPoly> repl;
  int j = 0;
  for (int i = 0; i < sys.nvars(); ++i) {
    if (fixed_idx[i] >= 0)
      repl.push_back(CPoly::constant(m, fixed[fixed_idx[i]].second));
    else
      repl.push_back(CPoly::variable(m, j++));
  }
  std::vector<CPoly> out;
  for (const auto& p : sys.polys) out.push_back(substitute(p, repl));
  return CSystem(std::move(out), std::move(free_names));
}

CVector Chart::lift(const CSystem& sys, const CVector& free) const {
  CVector full(sys.nvars());
  std::vector<bool> is_fixed(sys.nvars(), false);
  for (const auto& [name, val] : fixed) {
    const int i = sys.index_of(name);
    full[i] = val;
    is_fixed[i] = true;
  }
  Eigen::Index j = 0;
  for (int i = 0; i < sys.nvars(); ++i)
    if (!is_fixed[i]) {
      if (j >= free.size()) throw std::invalid_argument("Chart::lift: too few free coordinates");
      full[i] = free[j++];
    }
  if (j != free.size()) throw std::invalid_argument("Chart::lift: too many free coordinates");
  return full;
}

CVector Chart::restrict_point(const CSystem& sys, const CVector& full) const {
  std::vector<bool> is_fixed(sys.nvars(), false);
  for (const auto& f : fixed) is_fixed[sys.index_of(f.first)] = true;
  std::vector<cplx> out;
  for (int i = 0; i < sys.nvars(); ++i)
    if (!is_fixed[i]) out.push_back(full[i]);
  return Eigen::Map<CVector>(out.data(), static_cast<Eigen::Index>(out.size()));
}

std::string Chart::describe() const {
  if (fixed.empty()) return "affine";
  std::ostringstream os;
  for (std::size_t k = 0; k < fixed.size(); ++k) {
    if (k) os << ",";
    os << fixed[k].first << "=";
    if (fixed[k].second.imag() == 0)
      os << fixed[k].second.real();
    else
      os << fixed[k].second;
  }
  return os.str();
}

// ------------------------------------------------------- compiled evaluation

namespace {

// Flat term list; evaluation cost dominates path tracking.
struct Compiled {
  int n = 0;
  std::vector<cplx> coef;
  std::vector<int> exps;

  Compiled() = default;
  explicit Compiled(const CPoly& p) : n(p.nvars()) {
    for (const auto& [e, c] : p.terms()) {
      coef.push_back(c);
      exps.insert(exps.end(), e.begin(), e.end());
    }
  }

  cplx operator()(const cplx* x) const {
    cplx sum(0);
    for (std::size_t k = 0; k < coef.size(); ++k) {
      cplx t = coef[k];
      const int* e = &exps[k * n];
      for (int i = 0; i < n; ++i)
        for (int p = 0; p < e[i]; ++p) t *= x[i];
      sum += t;
    }
    return sum;
  }

  // Sum of |terms|, the natural rounding scale of the value.
  double scale(const cplx* x) const {
    double s = 0;
    for (std::size_t k = 0; k < coef.size(); ++k) {
      double t = std::abs(coef[k]);
      const int* e = &exps[k * n];
      for (int i = 0; i < n; ++i) t *= std::pow(std::abs(x[i]), e[i]);
      s += t;
    }
    return s;
  }
};

struct CompiledSystem {
  int n = 0;
  std::vector<Compiled> f;
  std::vector<std::vector<Compiled>> df;

  explicit CompiledSystem(const CSystem& sys) : n(sys.nvars()) {
    const auto J = jacobian(sys);
    for (std::size_t i = 0; i < sys.polys.size(); ++i) {
      f.emplace_back(sys.polys[i]);
      df.emplace_back();
      for (const auto& q : J[i]) df.back().emplace_back(q);
    }
  }

  int size() const { return static_cast<int>(f.size()); }

  void eval(const CVector& x, CVector& F) const {
    F.resize(size());
    for (int i = 0; i < size(); ++i) F[i] = f[i](x.data());
  }
  void jac(const CVector& x, CMatrix& J) const {
    J.resize(size(), n);
    for (int i = 0; i < size(); ++i)
      for (int j = 0; j < n; ++j) J(i, j) = df[i][j](x.data());
  }
  double scale(const CVector& x) const {
    double s = 1.0;
    for (const auto& p : f) s = std::max(s, p.scale(x.data()));
    return s;
  }
};

struct NewtonOutcome {
  CVector x;
  double residual = 0;
  bool converged = false;
};

NewtonOutcome newton_core(const CompiledSystem& cs, CVector x, double tol, int max_iter) {
  CVector F;
  CMatrix J;
  NewtonOutcome out;
  for (int it = 0; it <= max_iter; ++it) {
    cs.eval(x, F);
    const double res = F.cwiseAbs().maxCoeff();
    if (!std::isfinite(res)) break;
    out.x = x;
    out.residual = res;
    if (res <= tol * cs.scale(x)) {
      out.converged = true;
      return out;
    }
    if (it == max_iter) break;
    cs.jac(x, J);
    const CVector dx = J.colPivHouseholderQr().solve(-F);
    if (!dx.allFinite()) break;
    x += dx;
    if (dx.norm() <= 1e-15 * (1.0 + x.norm())) {
      cs.eval(x, F);
      out.x = x;
      out.residual = F.cwiseAbs().maxCoeff();
      out.converged = out.residual <= std::sqrt(tol) * cs.scale(x);
      return out;
    }
  }
  return out;
}

int rank_of(const CMatrix& J, double rank_tol) {
  if (J.size() == 0) return 0;
  Eigen::JacobiSVD<CMatrix> svd(J);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s[0] == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > rank_tol * s[0]) ++r;
  return r;
}

// ------------------------------------------------------------- homotopy

// H(X, s) = (1-s) gamma G(X) + s F^(X) on the patch a.X = 1, X = (x0, x).
class Homotopy {
 public:
  Homotopy(const CSystem& sys, std::mt19937_64& rng) : n_(sys.nvars()) {
    std::vector<std::string> names{"x0"};
    names.insert(names.end(), sys.names.begin(), sys.names.end());
    std::vector<CPoly> hom;
    for (const auto& p : sys.polys) {
      const int d = p.degree();
      deg_.push_back(std::max(d, 1));
      CPoly h(n_ + 1);
      for (const auto& [e, c] : p.terms()) {
        Exponent he(n_ + 1);
        he[0] = deg_.back() - std::accumulate(e.begin(), e.end(), 0);
        std::copy(e.begin(), e.end(), he.begin() + 1);
        h.add_term(he, c);
      }
      hom.push_back(h);
    }
    target_ = std::make_unique<CompiledSystem>(CSystem(hom, names));
    std::normal_distribution<double> g;
    const double ang = 2 * std::numbers::pi * std::uniform_real_distribution<double>(0, 1)(rng);
    gamma_ = std::polar(1.0, ang);
    patch_.resize(n_ + 1);
    for (int i = 0; i <= n_; ++i) patch_[i] = cplx(g(rng), g(rng));
  }

  int n() const { return n_; }
  const std::vector<int>& degrees() const { return deg_; }
  const CVector& patch() const { return patch_; }

  std::vector<CVector> start_points() const {
    std::vector<CVector> out;
    std::vector<int> k(n_, 0);
    while (true) {
      CVector X(n_ + 1);
      X[0] = 1;
      for (int i = 0; i < n_; ++i) X[i + 1] = std::polar(1.0, 2 * std::numbers::pi * k[i] / deg_[i]);
      const cplx ax = (patch_.transpose() * X)(0);
      X /= ax;
      out.push_back(X);
      int i = 0;
      while (i < n_ && ++k[i] == deg_[i]) k[i++] = 0;
      if (i == n_) break;
    }
    return out;
  }

  void eval(const CVector& X, double s, CVector& H, CMatrix& HX, CVector* Hs) const {
    CVector F;
    CMatrix JF;
    target_->eval(X, F);
    target_->jac(X, JF);
    H.resize(n_ + 1);
    HX.setZero(n_ + 1, n_ + 1);
    if (Hs) Hs->setZero(n_ + 1);
    for (int i = 0; i < n_; ++i) {
      const int d = deg_[i];
      const cplx G = std::pow(X[i + 1], d) - std::pow(X[0], d);
      H[i] = (1 - s) * gamma_ * G + s * F[i];
      HX.row(i) = s * JF.row(i);
      HX(i, i + 1) += (1 - s) * gamma_ * (double(d) * std::pow(X[i + 1], d - 1));
      HX(i, 0) -= (1 - s) * gamma_ * (double(d) * std::pow(X[0], d - 1));
      if (Hs) (*Hs)[i] = F[i] - gamma_ * G;
    }
    H[n_] = (patch_.transpose() * X)(0) - cplx(1);
    HX.row(n_) = patch_.transpose();
  }

  const CompiledSystem& target() const { return *target_; }

 private:
  int n_;
  std::vector<int> deg_;
  std::unique_ptr<CompiledSystem> target_;
  cplx gamma_;
  CVector patch_;
};

struct PathEnd {
  CVector X;
  double s = 0;
  bool reached = false;
};

PathEnd track(const Homotopy& hom, CVector X) {
  CVector H, Hs;
  CMatrix HX;
  auto tangent = [&](const CVector& Y, double s) {
    hom.eval(Y, s, H, HX, &Hs);
    return CVector(HX.partialPivLu().solve(-Hs));
  };
  double s = 0, h = 0.02;
  int streak = 0;
  while (s < 1.0) {
    h = std::min(h, 1.0 - s);
    const CVector k1 = tangent(X, s);
    const CVector k2 = tangent(X + 0.5 * h * k1, s + 0.5 * h);
    const CVector k3 = tangent(X + 0.5 * h * k2, s + 0.5 * h);
    const CVector k4 = tangent(X + h * k3, s + h);
    CVector Y = X + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    bool ok = Y.allFinite();
    if (ok) {
      ok = false;
      const double s1 = s + h;
      for (int it = 0; it < 3; ++it) {
        hom.eval(Y, s1, H, HX, nullptr);
        const CVector dx = HX.partialPivLu().solve(-H);
        if (!dx.allFinite()) break;
        Y += dx;
        if (dx.norm() <= 1e-10 * (1.0 + Y.norm())) {
          ok = true;
          break;
        }
      }
      if (ok && (Y - X).norm() > 0.5 * (1.0 + X.norm())) ok = false;  // likely a path jump
    }
    if (ok) {
      X = Y;
      s += h;
      if (++streak >= 3) {
        h = std::min(2 * h, 0.1);
        streak = 0;
      }
    } else {
      h *= 0.5;
      streak = 0;
      if (h < 1e-14) break;
    }
  }
  PathEnd end;
  end.s = s;
  end.reached = s >= 1.0 - 1e-9;
  // Polish at s = 1; singular endpoints converge slowly, keep the best iterate.
  CVector best = X;
  hom.eval(X, 1.0, H, HX, nullptr);
  double best_res = H.norm();
  for (int it = 0; it < 40; ++it) {
    const CVector dx = HX.colPivHouseholderQr().solve(-H);
    if (!dx.allFinite()) break;
    X += dx;
    hom.eval(X, 1.0, H, HX, nullptr);
    if (H.norm() < best_res) {
      best_res = H.norm();
      best = X;
    }
    if (dx.norm() <= 1e-15 * (1.0 + X.norm())) break;
  }
  end.X = best;
  return end;
}

struct Cluster {
  CVector x;
  int count = 0;
};

void add_to_clusters(std::vector<Cluster>& cl, const CVector& x, double radius) {
  for (auto& c : cl)
    if ((c.x - x).norm() <= radius * (1.0 + c.x.norm())) {
      ++c.count;
      return;
    }
  cl.push_back({x, 1});
}

struct AttemptResult {
  std::vector<Cluster> finite;
  int at_infinity = 0;
  int failed = 0;
};

AttemptResult homotopy_attempt(const CSystem& sys, const CompiledSystem& cs, const SolverOptions& opts,
                               std::mt19937_64& rng) {
  Homotopy hom(sys, rng);
  AttemptResult res;
  for (const auto& start : hom.start_points()) {
    const PathEnd end = track(hom, start);
    const double nrm = end.X.norm();
    const double x0 = nrm > 0 ? std::abs(end.X[0]) / nrm : 0.0;
    if (!end.X.allFinite() || (!end.reached && end.s < 1.0 - 1e-6)) {
      ++res.failed;
      continue;
    }
    if (x0 < 1e-8) {
      ++res.at_infinity;
      continue;
    }
    const CVector x = end.X.tail(hom.n()) / end.X[0];
    const NewtonOutcome nw = newton_core(cs, x, opts.tol, opts.max_newton);
    if (nw.converged && (nw.x - x).norm() <= 1e-3 * (1.0 + x.norm())) {
      add_to_clusters(res.finite, nw.x, opts.cluster_radius);
    } else if (x0 < 1e-2) {
      ++res.at_infinity;
    } else {
      ++res.failed;
    }
  }
  return res;
}

bool is_real_point(const CVector& x, double real_tol) {
  return x.imag().cwiseAbs().maxCoeff() <= real_tol * std::max(1.0, x.norm());
}

}  // namespace

// ------------------------------------------------------------ public API

double residual(const CSystem& sys, const CVector& x) {
  double r = 0;
  for (const auto& p : sys.polys) r = std::max(r, std::abs(evaluate(p, x)));
  return r;
}

CMatrix evaluate_jacobian(const CSystem& sys, const CVector& x) { return evaluate(jacobian(sys), x); }

int jacobian_rank(const CSystem& sys, const CVector& x, double rank_tol) {
  return rank_of(evaluate_jacobian(sys, x), rank_tol);
}

RootRecord newton_refine(const CSystem& sys, const CVector& x0, double tol, int max_iter) {
  if (sys.size() != sys.nvars())
    throw SolverError(SolverError::Kind::BadInput, "newton_refine: system is not square (" +
                                                       std::to_string(sys.size()) + " equations, " +
                                                       std::to_string(sys.nvars()) + " unknowns)");
  if (x0.size() != sys.nvars()) throw SolverError(SolverError::Kind::BadInput, "newton_refine: wrong start dimension");
  const CompiledSystem cs(sys);
  const NewtonOutcome nw = newton_core(cs, x0, tol, max_iter);
  if (!nw.converged) {
    std::ostringstream os;
    os << "newton_refine: no convergence after " << max_iter << " iterations (residual " << nw.residual << ")";
    throw SolverError(SolverError::Kind::Diverged, os.str());
  }
  RootRecord r;
  r.point = nw.x;
  r.residual = residual(sys, nw.x);
  r.is_real = is_real_point(nw.x, 1e-8);
  r.jacobian_rank = jacobian_rank(sys, nw.x);
  return r;
}

SolveResult solve_all_roots(const CSystem& full, const Chart& chart, const SolverOptions& opts) {
  const CSystem sys = chart.apply(full);
  if (sys.size() != sys.nvars())
    throw SolverError(SolverError::Kind::BadInput, "solve_all_roots: charted system has " +
                                                       std::to_string(sys.size()) + " equations in " +
                                                       std::to_string(sys.nvars()) + " unknowns");
  const CompiledSystem cs(sys);
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss;
  auto random_point = [&](double sigma) {
    CVector x(sys.nvars());
    for (auto& c : x) c = sigma * cplx(gauss(rng), gauss(rng));
    return x;
  };

  {
    int deficient = 0;
    const int probes = 8;
    for (int k = 0; k < probes; ++k) {
      CMatrix J;
      cs.jac(random_point(1.0), J);
      if (rank_of(J, 1e-10) < sys.nvars()) ++deficient;
    }
    if (deficient == probes)
      throw SolverError(SolverError::Kind::IllPosed, "solve_all_roots: Jacobian singular at every sampled point");
  }

  SolveResult out;
  out.bezout = sys.bezout_number();

  std::vector<Cluster> roots;  // merged over attempts, count = multiplicity estimate
  int best_inf = 0, best_bad = -1;
  auto merge = [&](const std::vector<Cluster>& cl) {
    for (const auto& c : cl) {
      bool found = false;
      for (auto& r : roots)
        if ((r.x - c.x).norm() <= opts.cluster_radius * (1.0 + r.x.norm())) {
          r.count = std::max(r.count, c.count);
          found = true;
          break;
        }
      if (!found) roots.push_back(c);
    }
  };
  // Simple roots hit by several paths are path jumps, not multiplicity.
  auto finite_total = [&]() {
    int total = 0;
    for (auto& r : roots) {
      CMatrix J;
      cs.jac(r.x, J);
      if (rank_of(J, opts.rank_tol) == sys.nvars()) r.count = 1;
      total += r.count;
    }
    return total;
  };

  if (opts.use_homotopy) {
    for (int a = 0; a < std::max(1, opts.homotopy_attempts); ++a) {
      const AttemptResult at = homotopy_attempt(sys, cs, opts, rng);
      merge(at.finite);
      int paths = 0;
      for (const auto& c : at.finite) paths += c.count;
      const int bad = at.failed;
      if (best_bad < 0 || bad < best_bad) {
        best_bad = bad;
        best_inf = at.at_infinity;
      }
      if (finite_total() + best_inf == out.bezout) break;
      (void)paths;
    }
    out.failed_paths = std::max(best_bad, 0);
    out.paths_at_infinity = best_inf;
  }

  if (finite_total() + out.paths_at_infinity < out.bezout && opts.multistart > 0) {
    double sigma = 1.0;
    for (const auto& r : roots) sigma = std::max(sigma, r.x.norm());
    for (int k = 0; k < opts.multistart; ++k) {
      const NewtonOutcome nw = newton_core(cs, random_point(sigma), opts.tol, opts.max_newton);
      if (nw.converged) merge({Cluster{nw.x, 1}});
      if (finite_total() + out.paths_at_infinity >= out.bezout) break;
    }
  }

  for (const auto& c : roots) {
    RootRecord r;
    CVector x = c.x;
    if (is_real_point(x, opts.real_tol)) {
      const CVector xr = x.real().cast<cplx>();
      const NewtonOutcome nw = newton_core(cs, xr, opts.tol, opts.max_newton);
      if (nw.converged && is_real_point(nw.x, opts.real_tol)) x = nw.x.real().cast<cplx>();
      r.is_real = true;
    }
    r.point = chart.lift(full, x);
    r.multiplicity = c.count;
    r.residual = residual(sys, x);
    CMatrix J;
    cs.jac(x, J);
    r.jacobian_rank = rank_of(J, opts.rank_tol);
    out.roots.push_back(std::move(r));
  }

  std::sort(out.roots.begin(), out.roots.end(), [](const RootRecord& a, const RootRecord& b) {
    if (a.is_real != b.is_real) return a.is_real;
    for (Eigen::Index i = 0; i < a.point.size(); ++i) {
      const double ar = std::round(a.point[i].real() * 1e8), br = std::round(b.point[i].real() * 1e8);
      if (ar != br) return ar < br;
    }
    for (Eigen::Index i = 0; i < a.point.size(); ++i) {
      const double ai = std::round(a.point[i].imag() * 1e8), bi = std::round(b.point[i].imag() * 1e8);
      if (ai != bi) return ai < bi;
    }
    return false;
  });

  out.finite_multiplicity = 0;
  for (const auto& r : out.roots) out.finite_multiplicity += r.multiplicity;
  if (out.finite_multiplicity + out.paths_at_infinity != out.bezout) {
    out.status = SolveResult::Status::NonConvergent;
    std::ostringstream os;
    os << "root count " << out.finite_multiplicity << " + " << out.paths_at_infinity << " at infinity != Bezout "
       << out.bezout;
    out.warnings.push_back(os.str());
  }
  return out;
}

int multiplicity_probe(const CSystem& sys, const CVector& root, const std::vector<double>& epsilons,
                       std::uint64_t seed) {
  if (sys.size() != sys.nvars())
    throw SolverError(SolverError::Kind::BadInput, "multiplicity_probe: system is not square");
  if (epsilons.size() < 2)
    throw SolverError(SolverError::Kind::BadInput, "multiplicity_probe: need at least two epsilon scales");
  const double res = residual(sys, root);
  if (res > 1e-8 * std::max(1.0, CompiledSystem(sys).scale(root)))
    throw SolverError(SolverError::Kind::BadInput, "multiplicity_probe: point is not a root (residual " +
                                                       std::to_string(res) + ")");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  CVector dir(sys.size());
  for (auto& c : dir) c = cplx(gauss(rng), gauss(rng));
  dir.normalize();

  std::vector<int> counts;
  for (double eps : epsilons) {
    std::vector<CPoly> ps = sys.polys;
    for (int i = 0; i < sys.size(); ++i) ps[i] -= CPoly::constant(sys.nvars(), eps * dir[i]);
    SolverOptions o;
    o.seed = seed + 101;
    o.multistart = 200;
    o.cluster_radius = 1e-9;
    const SolveResult sr = solve_all_roots(CSystem(ps, sys.names), Chart::none(), o);
    const double radius = std::pow(eps, 0.2) * (1.0 + root.norm());
    int k = 0;
    for (const auto& r : sr.roots)
      if ((r.point - root).norm() <= radius) k += r.multiplicity;
    counts.push_back(k);
  }
  std::map<int, int> tally;
  for (int c : counts) ++tally[c];
  int best = -1, votes = 0;
  for (const auto& [c, v] : tally)
    if (v > votes) {
      best = c;
      votes = v;
    }
  std::ostringstream os;
  os << "multiplicity_probe: counts";
  for (int c : counts) os << " " << c;
  if (votes < 2) throw SolverError(SolverError::Kind::Inconclusive, os.str() + " disagree across scales");
  const int rank = jacobian_rank(sys, root);
  if (best < 1 || (best >= 2) != (rank < sys.nvars()))
    throw SolverError(SolverError::Kind::Inconclusive,
                      os.str() + " inconsistent with Jacobian rank " + std::to_string(rank));
  return best;
}

}  // namespace symorb
