#pragma once

// From a polynomial Hamiltonian on R^4 to the reduced Hamiltonian
//   h = delta * g(N, C, D, tau)                    (SR, COMBINED)
//   h = delta * g1(N, C, D^2, tau) + D * g2(...)   (AE)
// via circle averaging of the quartic part and anti-invariant decomposition.
//
// Real coordinates are (x1, y1, x2, y2); complex coordinates are
// (z1, conj z1, z2, conj z2); reduced polynomials use (N, C, D, tau).

#include "symorb/invariants.hpp"
#include "symorb/polynomial.hpp"

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace symorb {

using RPoly = MultiPoly<double>;
using ZPoly = MultiPoly<std::complex<double>>;

class NormalFormError : public std::runtime_error {
 public:
  enum class Kind { ResidueNonzero, InvalidHamiltonian, TauAlreadyPresent };
  NormalFormError(Kind k, const std::string& what) : std::runtime_error(what), kind_(k) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

std::string to_string(NormalFormError::Kind k);

const std::vector<std::string>& real_variable_names();     // x1 y1 x2 y2
const std::vector<std::string>& complex_variable_names();  // z1 zb1 z2 zb2
const std::vector<std::string>& reduced_variable_names();  // N C D tau

// Variable indices in the reduced ring.
inline constexpr int kN = 0, kC = 1, kD = 2, kTau = 3;

struct HamiltonianSpec {
  SymmetryKind kind = SymmetryKind::SR;
  RPoly H{4};
};

/// Standard quadratic part |z1|^2 - |z2|^2 in real coordinates.
RPoly H2_real();

/// The invariants N, C, D, delta as quadratic polynomials in (x1, y1, x2, y2).
struct RealInvariants {
  RPoly N, C, D, delta;
};
RealInvariants real_invariants();

/// Structural problems (nonzero constant/linear part, wrong quadratic part,
/// complex or non-finite coefficients).  Empty iff usable.
std::vector<std::string> validate(const HamiltonianSpec& spec, double tol = 1e-12);

struct SymmetryViolation {
  std::string involution;  // "R" or "S"
  Exponent monomial;       // in (x1, y1, x2, y2)
  double defect = 0;       // coefficient of H o g + H at this monomial
};

struct SymmetryReport {
  std::vector<SymmetryViolation> violations;
  bool admissible() const { return violations.empty(); }
};

/// Lists monomials where H o R = -H (SR), H o S = -H (AE), or both, fail.
SymmetryReport check_symmetry(const HamiltonianSpec& spec, double tol = 1e-12);

/// Rewrites a real polynomial in (z1, conj z1, z2, conj z2).
ZPoly to_complex_coordinates(const RPoly& p);
/// Inverse of to_complex_coordinates; throws if the result is not real.
RPoly to_real_coordinates(const ZPoly& p, double tol = 1e-12);

/// Circle charge (a - b) - (c - d) of z1^a zb1^b z2^c zb2^d.
int circle_charge(const Exponent& e);

/// Keeps the monomials of zero circle charge.
ZPoly s1_average(const ZPoly& p);

/// Homogeneous part of total degree d.
template <typename S>
MultiPoly<S> homogeneous_part(const MultiPoly<S>& p, int d) {
  MultiPoly<S> out(p.nvars());
  for (const auto& [e, c] : p.terms()) {
    int k = 0;
    for (int v : e) k += v;
    if (k == d) out.add_term(e, c);
  }
  return out;
}

struct ReducedHamiltonian {
  SymmetryKind kind = SymmetryKind::SR;
  RPoly g{4};   // SR / COMBINED
  RPoly g1{4};  // AE
  RPoly g2{4};  // AE

  // SR / COMBINED leading coefficients.
  double n() const { return g.coeff({1, 0, 0, 0}); }
  double c() const { return g.coeff({0, 1, 0, 0}); }
  double d() const { return g.coeff({0, 0, 1, 0}); }

  // AE coefficients by name: g1 = tau/2 + a1 N + c1 C + d1 D^2 + e1 N^2 + f1 N C + g1 N tau + ...
  double a1() const { return g1.coeff({1, 0, 0, 0}); }
  double c1() const { return g1.coeff({0, 1, 0, 0}); }
  double d1() const { return g1.coeff({0, 0, 2, 0}); }
  double e1() const { return g1.coeff({2, 0, 0, 0}); }
  double f1() const { return g1.coeff({1, 1, 0, 0}); }
  double g1coef() const { return g1.coeff({1, 0, 0, 1}); }
  double b2() const { return g2.coeff({0, 0, 0, 1}); }
  double a2() const { return g2.coeff({1, 0, 0, 0}); }
  double c2() const { return g2.coeff({0, 1, 0, 0}); }
  double d2() const { return g2.coeff({0, 0, 2, 0}); }
  double e2() const { return g2.coeff({2, 0, 0, 0}); }
  double f2() const { return g2.coeff({1, 1, 0, 0}); }
  double g2coef() const { return g2.coeff({1, 0, 0, 1}); }

  /// Coefficient of tau in g (SR/COMBINED) or g1 (AE).
  double tau_coefficient() const { return (kind == SymmetryKind::AE ? g1 : g).coeff({0, 0, 0, 1}); }
  bool has_tau() const;
};

/// SR/COMBINED: g = tau/2 + n N + c C + d D.
ReducedHamiltonian reduced_from_leading(SymmetryKind kind, double n, double c, double d = 0.0);

/// Rewrites an averaged anti-invariant polynomial p (complex coordinates) in
/// the generators: p = delta g (SR/COMBINED) or p = delta g1 + D g2 (AE).
/// Throws NormalFormError(ResidueNonzero) if p has no such form.
ReducedHamiltonian decompose(const ZPoly& p, SymmetryKind kind, double tol = 1e-12);

/// The polynomial delta g (or delta g1 + D g2) back in complex coordinates.
ZPoly expand(const ReducedHamiltonian& rh);

enum class TauMode { Derived, Direct };

/// Adds the structural tau/2 term to g (or g1); in Direct mode g2 also gains
/// b2 tau.  Throws TauAlreadyPresent if rh already depends on tau.
ReducedHamiltonian attach_tau(const ReducedHamiltonian& rh, TauMode mode = TauMode::Derived, double b2 = 0.0);

struct DerivedNormalForm {
  ReducedHamiltonian reduced;
  std::vector<std::string> warnings;
};

/// Full pipeline: validate, check symmetry, average the quartic part, convert
/// to the reduced Hamiltonian h = (tau H2 - H4)/2 and decompose.
DerivedNormalForm derive(const HamiltonianSpec& spec, double tol = 1e-12);

struct RealizedHamiltonian {
  HamiltonianSpec spec;
  std::vector<std::string> warnings;  // dropped non-realizable terms
};

/// A Hamiltonian already in resonant normal form whose reduced Hamiltonian is
/// rh: H = H2 - 2 delta g|tau=0 (or - 2 (delta g1|tau=0 + D g2|tau=0)).  Terms
/// in g with tau other than the structural tau/2 cannot come from an
/// autonomous H and are dropped with a warning.
RealizedHamiltonian realize_hamiltonian(const ReducedHamiltonian& rh);

/// Evaluates a reduced polynomial at (N, C, D, tau).
inline double eval_reduced(const RPoly& p, double N, double C, double D, double tau) {
  const std::vector<double> x{N, C, D, tau};
  return evaluate(p, x);
}

}  // namespace symorb
