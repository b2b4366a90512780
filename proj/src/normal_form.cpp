#include "symorb/normal_form.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace symorb {

using cplx = std::complex<double>;

std::string to_string(NormalFormError::Kind k) {
  switch (k) {
    case NormalFormError::Kind::ResidueNonzero: return "ResidueNonzero";
    case NormalFormError::Kind::InvalidHamiltonian: return "InvalidHamiltonian";
    case NormalFormError::Kind::TauAlreadyPresent: return "TauAlreadyPresent";
  }
  return "Unknown";
}

const std::vector<std::string>& real_variable_names() {
  static const std::vector<std::string> v{"x1", "y1", "x2", "y2"};
  return v;
}
const std::vector<std::string>& complex_variable_names() {
  static const std::vector<std::string> v{"z1", "zb1", "z2", "zb2"};
  return v;
}
const std::vector<std::string>& reduced_variable_names() {
  static const std::vector<std::string> v{"N", "C", "D", "tau"};
  return v;
}

namespace {

RPoly rv(int i) { return RPoly::variable(4, i); }
ZPoly zv(int i) { return ZPoly::variable(4, i); }

double max_abs_coeff(const ZPoly& p) {
  double m = 0;
  for (const auto& [e, c] : p.terms()) m = std::max(m, std::abs(c));
  return m;
}
double max_abs_coeff(const RPoly& p) {
  double m = 0;
  for (const auto& [e, c] : p.terms()) m = std::max(m, std::abs(c));
  return m;
}

// Split by parity of the exponent of one variable.
std::pair<RPoly, RPoly> split_parity(const RPoly& p, int var) {
  RPoly even(p.nvars()), odd(p.nvars());
  for (const auto& [e, c] : p.terms()) (e[var] % 2 == 0 ? even : odd).add_term(e, c);
  return {even, odd};
}

// Divide by a variable; every term must contain it.
RPoly divide_by_variable(const RPoly& p, int var) {
  RPoly out(p.nvars());
  for (const auto& [e, c] : p.terms()) {
    Exponent f = e;
    if (f[var] == 0) throw std::logic_error("divide_by_variable: term without the variable");
    --f[var];
    out.add_term(f, c);
  }
  return out;
}

// (N, C, D, delta) -> (N, C, D, tau) with delta removed; only valid for
// polynomials without delta.
RPoly drop_delta_slot(const RPoly& p) {
  RPoly out(4);
  for (const auto& [e, c] : p.terms()) out.add_term({e[0], e[1], e[2], 0}, c);
  return out;
}

RPoly set_tau_zero(const RPoly& p) {
  RPoly out(4);
  for (const auto& [e, c] : p.terms())
    if (e[kTau] == 0) out.add_term(e, c);
  return out;
}

// Invariants in complex coordinates.
struct ZInvariants {
  ZPoly N, C, D, delta;
};

ZInvariants z_invariants() {
  const ZPoly A = zv(0) * zv(1), B = zv(2) * zv(3);
  const ZPoly M = zv(0) * zv(2), Mb = zv(1) * zv(3);
  return {A + B, M + Mb, cplx(0, -1) * (M - Mb), A - B};
}

std::string describe_residue(const RPoly& r, const std::vector<std::string>& names) {
  std::ostringstream os;
  os << "residue " << format(r, names);
  return os.str();
}

}  // namespace

RPoly H2_real() { return rv(0) * rv(0) + rv(1) * rv(1) - rv(2) * rv(2) - rv(3) * rv(3); }

RealInvariants real_invariants() {
  const RPoly x1 = rv(0), y1 = rv(1), x2 = rv(2), y2 = rv(3);
  const RPoly A = x1 * x1 + y1 * y1, B = x2 * x2 + y2 * y2;
  return {A + B, 2.0 * (x1 * x2 - y1 * y2), 2.0 * (x1 * y2 + y1 * x2), A - B};
}

std::vector<std::string> validate(const HamiltonianSpec& spec, double tol) {
  std::vector<std::string> problems;
  if (spec.H.nvars() != 4) {
    problems.push_back("H must be a polynomial in 4 variables (x1, y1, x2, y2), got " +
                       std::to_string(spec.H.nvars()));
    return problems;
  }
  for (const auto& [e, c] : spec.H.terms())
    if (!std::isfinite(c)) problems.push_back("non-finite coefficient at monomial " + format(RPoly::monomial(e, 1.0), real_variable_names()));
  if (max_abs_coeff(homogeneous_part(spec.H, 0)) > tol) problems.push_back("H(0) != 0");
  if (max_abs_coeff(homogeneous_part(spec.H, 1)) > tol) problems.push_back("grad H(0) != 0 (linear terms present)");
  const RPoly q = homogeneous_part(spec.H, 2) - H2_real();
  if (max_abs_coeff(q) > tol)
    problems.push_back("quadratic part must be x1^2 + y1^2 - x2^2 - y2^2; difference " + format(q, real_variable_names()));
  return problems;
}

SymmetryReport check_symmetry(const HamiltonianSpec& spec, double tol) {
  SymmetryReport rep;
  auto test = [&](const std::string& name, const std::vector<RPoly>& image) {
    const RPoly s = substitute(spec.H, image) + spec.H;
    for (const auto& [e, c] : s.terms())
      if (std::abs(c) > tol) rep.violations.push_back({name, e, c});
  };
  const RPoly x1 = rv(0), y1 = rv(1), x2 = rv(2), y2 = rv(3);
  if (spec.kind == SymmetryKind::SR || spec.kind == SymmetryKind::Combined) test("R", {x2, y2, x1, y1});
  if (spec.kind == SymmetryKind::AE || spec.kind == SymmetryKind::Combined) test("S", {x2, -1.0 * y2, x1, -1.0 * y1});
  return rep;
}

ZPoly to_complex_coordinates(const RPoly& p) {
  if (p.nvars() != 4) throw std::invalid_argument("to_complex_coordinates: need 4 variables");
  const cplx h(0.5, 0), ih(0, -0.5);
  const ZPoly x1 = h * (zv(0) + zv(1)), y1 = ih * (zv(0) - zv(1));
  const ZPoly x2 = h * (zv(2) + zv(3)), y2 = ih * (zv(2) - zv(3));
  return substitute(poly_cast<cplx>(p), {x1, y1, x2, y2});
}

RPoly to_real_coordinates(const ZPoly& p, double tol) {
  if (p.nvars() != 4) throw std::invalid_argument("to_real_coordinates: need 4 variables");
  const cplx i(0, 1);
  auto r = [](int k) { return ZPoly::variable(4, k); };
  const ZPoly z1 = r(0) + i * r(1), zb1 = r(0) - i * r(1), z2 = r(2) + i * r(3), zb2 = r(2) - i * r(3);
  return real_part(prune(substitute(p, {z1, zb1, z2, zb2}), 0.0), tol * std::max(1.0, max_abs_coeff(p)));
}

int circle_charge(const Exponent& e) {
  if (e.size() != 4) throw std::invalid_argument("circle_charge: need a 4-variable exponent");
  return (e[0] - e[1]) - (e[2] - e[3]);
}

ZPoly s1_average(const ZPoly& p) {
  ZPoly out(p.nvars());
  for (const auto& [e, c] : p.terms())
    if (circle_charge(e) == 0) out.add_term(e, c);
  return out;
}

bool ReducedHamiltonian::has_tau() const {
  for (const RPoly* p : {&g, &g1, &g2})
    for (const auto& [e, c] : p->terms())
      if (e[kTau] > 0) return true;
  return false;
}

ReducedHamiltonian reduced_from_leading(SymmetryKind kind, double n, double c, double d) {
  if (kind == SymmetryKind::AE) throw std::invalid_argument("reduced_from_leading: AE uses g1, g2");
  if (kind == SymmetryKind::Combined && d != 0.0)
    throw std::invalid_argument("reduced_from_leading: COMBINED g is even in D, d must be 0");
  ReducedHamiltonian rh;
  rh.kind = kind;
  rh.g.add_term({0, 0, 0, 1}, 0.5);
  rh.g.add_term({1, 0, 0, 0}, n);
  rh.g.add_term({0, 1, 0, 0}, c);
  rh.g.add_term({0, 0, 1, 0}, d);
  return rh;
}

ReducedHamiltonian decompose(const ZPoly& p, SymmetryKind kind, double tol) {
  if (p.nvars() != 4) throw std::invalid_argument("decompose: need a polynomial in (z1, zb1, z2, zb2)");
  const double scale = std::max(1.0, max_abs_coeff(p));
  const double cut = tol * scale;

  // Every charge-zero monomial is A^i B^j M^k or A^i B^j Mb^k, which makes the
  // rewriting unique (no mixed M Mb products survive).
  MultiPoly<cplx> q(4);  // in (A, B, M, Mb)
  for (const auto& [e, c] : p.terms()) {
    if (circle_charge(e) != 0) {
      if (std::abs(c) > cut)
        throw NormalFormError(NormalFormError::Kind::ResidueNonzero,
                              "decompose: monomial " + format(ZPoly::monomial(e, 1.0), complex_variable_names()) +
                                  " is not circle invariant");
      continue;
    }
    const int k = e[0] - e[1];
    if (k >= 0)
      q.add_term({e[1], e[3], k, 0}, c);
    else
      q.add_term({e[0], e[2], 0, -k}, c);
  }
  // (N, C, D, delta) ring.
  auto v = [](int i) { return MultiPoly<cplx>::variable(4, i); };
  const cplx h(0.5, 0), ih(0, 0.5);
  const MultiPoly<cplx> A = h * (v(0) + v(3)), B = h * (v(0) - v(3));
  const MultiPoly<cplx> M = h * v(1) + ih * v(2), Mb = h * v(1) - ih * v(2);
  const MultiPoly<cplx> inv = substitute(q, {A, B, M, Mb});
  for (const auto& [e, c] : inv.terms())
    if (std::abs(c.imag()) > cut)
      throw NormalFormError(NormalFormError::Kind::ResidueNonzero, "decompose: input is not real-valued");
  const RPoly r = real_part(inv, cut);

  // delta^2 -> N^2 - C^2 - D^2, leaving r = P0 + delta P1.
  const RPoly cone = pow(RPoly::variable(4, 0), 2) - pow(RPoly::variable(4, 1), 2) - pow(RPoly::variable(4, 2), 2);
  RPoly P0(4), P1(4);
  for (const auto& [e, c] : r.terms()) {
    const RPoly base = RPoly::monomial({e[0], e[1], e[2], 0}, c) * pow(cone, e[3] / 2);
    (e[3] % 2 == 0 ? P0 : P1) += base;
  }
  P0 = prune(P0, cut);
  P1 = prune(P1, cut);

  ReducedHamiltonian rh;
  rh.kind = kind;
  RPoly residue(4);
  const auto names = std::vector<std::string>{"N", "C", "D", "delta"};
  switch (kind) {
    case SymmetryKind::SR:
      residue = P0;
      rh.g = drop_delta_slot(P1);
      break;
    case SymmetryKind::Combined: {
      auto [even, odd] = split_parity(P1, kD);
      residue = P0 + odd;
      rh.g = drop_delta_slot(even);
      break;
    }
    case SymmetryKind::AE: {
      auto [p1_even, p1_odd] = split_parity(P1, kD);
      auto [p0_even, p0_odd] = split_parity(P0, kD);
      residue = p0_even + p1_odd;
      rh.g1 = drop_delta_slot(p1_even);
      rh.g2 = drop_delta_slot(divide_by_variable(p0_odd, kD));
      break;
    }
  }
  if (max_abs_coeff(residue) > cut)
    throw NormalFormError(NormalFormError::Kind::ResidueNonzero,
                          "decompose: not anti-invariant for " + std::string(to_string(kind)) + ": " +
                              describe_residue(residue, names));
  return rh;
}

ZPoly expand(const ReducedHamiltonian& rh) {
  const ZInvariants zi = z_invariants();
  const std::vector<ZPoly> sub{zi.N, zi.C, zi.D, ZPoly(4)};
  if (rh.kind == SymmetryKind::AE)
    return zi.delta * substitute(poly_cast<cplx>(rh.g1), sub) + zi.D * substitute(poly_cast<cplx>(rh.g2), sub);
  return zi.delta * substitute(poly_cast<cplx>(rh.g), sub);
}

ReducedHamiltonian attach_tau(const ReducedHamiltonian& rh, TauMode mode, double b2) {
  if (rh.has_tau()) throw NormalFormError(NormalFormError::Kind::TauAlreadyPresent, "attach_tau: tau terms already present");
  if (mode == TauMode::Derived && b2 != 0.0)
    throw std::invalid_argument("attach_tau: derived mode fixes b2 = 0; use direct mode to set b2");
  ReducedHamiltonian out = rh;
  const Exponent tau{0, 0, 0, 1};
  if (rh.kind == SymmetryKind::AE) {
    out.g1.add_term(tau, 0.5);
    out.g2.add_term(tau, b2);
  } else {
    out.g.add_term(tau, 0.5);
  }
  return out;
}

DerivedNormalForm derive(const HamiltonianSpec& spec, double tol) {
  const auto problems = validate(spec, tol);
  if (!problems.empty()) {
    std::string msg = "derive: invalid Hamiltonian:";
    for (const auto& s : problems) msg += " " + s + ";";
    throw NormalFormError(NormalFormError::Kind::InvalidHamiltonian, msg);
  }
  const SymmetryReport sym = check_symmetry(spec, tol);
  if (!sym.admissible()) {
    std::ostringstream os;
    os << "derive: H violates the declared " << to_string(spec.kind) << " anti-invariance at "
       << sym.violations.size() << " monomial(s), first "
       << format(RPoly::monomial(sym.violations.front().monomial, 1.0), real_variable_names()) << " under "
       << sym.violations.front().involution;
    throw NormalFormError(NormalFormError::Kind::InvalidHamiltonian, os.str());
  }
  DerivedNormalForm out;
  if (!homogeneous_part(spec.H, 3).is_zero())
    out.warnings.push_back("cubic terms ignored: only the first resonant averaging step is implemented");
  if (spec.H.degree() > 4)
    out.warnings.push_back("terms of degree > 4 ignored: higher coefficients must be given directly");
  const ZPoly h4 = s1_average(to_complex_coordinates(homogeneous_part(spec.H, 4)));
  if (h4.is_zero()) out.warnings.push_back("averaged quartic part vanishes: all leading coefficients are zero");
  // h = (tau H2 - H4)/2 and H2 = delta, so the quartic contributes -H4/2.
  out.reduced = attach_tau(decompose(cplx(-0.5) * h4, spec.kind, tol), TauMode::Derived);
  return out;
}

RealizedHamiltonian realize_hamiltonian(const ReducedHamiltonian& rh) {
  RealizedHamiltonian out;
  out.spec.kind = rh.kind;
  const RealInvariants ri = real_invariants();
  const std::vector<RPoly> sub{ri.N, ri.C, ri.D, RPoly(4)};

  auto tau_check = [&](const RPoly& p, double structural, const std::string& name) {
    for (const auto& [e, c] : p.terms()) {
      if (e[kTau] == 0) continue;
      const bool is_structural = e == Exponent{0, 0, 0, 1};
      if (is_structural && std::abs(c - structural) <= 1e-14) continue;
      std::ostringstream os;
      os << "term " << c << "*" << format(RPoly::monomial(e, 1.0), reduced_variable_names()) << " in " << name
         << " is not realizable by an autonomous H and was dropped";
      out.warnings.push_back(os.str());
    }
  };

  RPoly quartic_and_up(4);
  if (rh.kind == SymmetryKind::AE) {
    tau_check(rh.g1, 0.5, "g1");
    tau_check(rh.g2, 0.0, "g2");
    quartic_and_up = -2.0 * (ri.delta * substitute(set_tau_zero(rh.g1), sub) + ri.D * substitute(set_tau_zero(rh.g2), sub));
  } else {
    tau_check(rh.g, 0.5, "g");
    quartic_and_up = -2.0 * ri.delta * substitute(set_tau_zero(rh.g), sub);
  }
  if (std::abs(rh.tau_coefficient() - 0.5) > 1e-14)
    out.warnings.push_back("structural tau coefficient is not 1/2; the realized H uses 1/2");
  out.spec.H = H2_real() + quartic_and_up;
  return out;
}

}  // namespace symorb
