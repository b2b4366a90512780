#pragma once

// Antisymplectic-equivariant case, h = delta g1(N, C, D^2, tau) + D g2(...):
// no S-symmetric orbits, and the non-symmetric orbits through the blow-up
// N = r v, C = r u, D = r w, tau = r t, delta = r x.  At r = 0 the equations
// become four homogeneous quadrics in (v, t, u, w, x); their roots with v != 0
// continue to families of periodic orbits when nondegenerate.

#include "symorb/errors.hpp"
#include "symorb/normal_form.hpp"
#include "symorb/roots.hpp"

#include <complex>
#include <string>
#include <vector>

namespace symorb {

struct AECoefficients {
  // g1 = tau/2 + a1 N + c1 C + d1 D^2 + e1 N^2 + f1 N C + g1 N tau
  double a1 = 0, c1 = 0, d1 = 0, e1 = 0, f1 = 0, g1 = 0;
  // g2 = b2 tau + a2 N + c2 C + d2 D^2 + e2 N^2 + f2 N C + g2 N tau
  double b2 = 0, a2 = 0, c2 = 0, d2 = 0, e2 = 0, f2 = 0, g2 = 0;

  static AECoefficients blowup(double a1, double a2, double b2, double c1, double c2) {
    AECoefficients k;
    k.a1 = a1, k.a2 = a2, k.b2 = b2, k.c1 = c1, k.c2 = c2;
    return k;
  }
  static AECoefficients from_reduced(const ReducedHamiltonian& rh);
  ReducedHamiltonian to_reduced() const;
};

enum class SymmetricVerdict { NoSymmetricOrbits, Degenerate };
std::string to_string(SymmetricVerdict v);

struct SymmetricNonexistence {
  double liapunov_coefficient = 0;  // b2 + c2
  double eigen_real_part = 0;       // 2 a2: the origin of the Fix S flow is a focus unless zero
  // Linear-in-|z|^2 rate of V = |z1|^2 on Fix S written in g-coefficients;
  // reported alongside because the Liapunov argument is phrased in H's lettering.
  double reduced_fix_s_determinant = 0;
  SymmetricVerdict verdict = SymmetricVerdict::Degenerate;
  std::string reason;
};

SymmetricNonexistence symmetric_nonexistence(const AECoefficients& k, double tol = 1e-12);

/// The four r = 0 quadrics in (v, t, u, w, x).
PolySystem<double> build_blowup_system(const AECoefficients& k);

enum class BlowupChart { V1, V0W1, V0T1 };
std::string to_string(BlowupChart c);

struct BlowupSolution {
  cplx v, t, u, w, x;
  BlowupChart chart = BlowupChart::V1;
  bool is_real = false;
  int multiplicity = 1;
  char deleted_column = 't';  // column dropped to form the certification minor
  cplx cert_det;
  bool nondegenerate = false;
  double residual = 0;
  bool is_axis = false;          // u = w = 0, i.e. z1 z2 = 0 on the orbit
  bool axis_consistent = false;  // axis root also solves the unmultiplied equations

  CVector point() const;  // (v, t, u, w, x)
};

/// Determinant of the 4x4 Jacobian minor with the given column removed.
cplx certification_determinant(const AECoefficients& k, const CVector& point, char deleted_column);

/// The v = 0 roots: the t-line (double) and the simple pair t = -+2i c2/b2,
/// u = +-i, w = 1, x = 0.  Throws B2Zero.
std::vector<BlowupSolution> v0_solutions(const AECoefficients& k, double b2_tol = 1e-12);

/// -2 (a2^2 b2^2 + b2^2 c1^2 - 2 b2 c1 c2 + c2^2) / b2.
double v0_pair_determinant_closed_form(const AECoefficients& k);

struct ContinuationPoint {
  double r = 0;
  double v = 0, t = 0, u = 0, w = 0, x = 0;
  double N = 0, C = 0, D = 0, delta = 0, tau = 0;
  double period() const;
};

struct ContinuationCurve {
  char fixed = 't';        // blow-up coordinate held at its r = 0 value
  int solution_index = -1;  // into AEReport::solutions when produced by analyze_ae
  std::vector<ContinuationPoint> points;
};

struct ContinuationOptions {
  double r_max = 0.05;
  int samples = 10;
  double singular_tol = 1e-10;  // on the minor's reciprocal condition number
};

/// Equations (4 in v, t, u, w, x, r) whose r = 0 restriction is the blow-up
/// system: the reduced critical-point equations divided by r^2 plus the cone.
PolySystem<double> scaled_system(const ReducedHamiltonian& rh);

/// Implicit-function continuation of a real nondegenerate root in r.
/// Throws SingularContinuation with the r reached.
ContinuationCurve continue_to_r(const ReducedHamiltonian& rh, const BlowupSolution& sol,
                                const ContinuationOptions& opts = {});
inline ContinuationCurve continue_to_r(const AECoefficients& k, const BlowupSolution& sol,
                                       const ContinuationOptions& opts = {}) {
  return continue_to_r(k.to_reduced(), sol, opts);
}

struct BezoutAccount {
  int expected = 16;
  int found_v1 = 0;
  int found_v0 = 0;
  int paths_at_infinity = 0;  // from the v = 1 homotopy, should equal found_v0
};

struct AEOptions {
  SolverOptions solver;
  bool continue_families = false;
  ContinuationOptions continuation;
};

struct AEReport {
  AECoefficients coefficients;
  SymmetricNonexistence symmetric;
  std::vector<BlowupSolution> solutions;  // v = 1 roots, then v = 0 roots
  int n_real_v1 = 0;
  BezoutAccount bezout_account;
  bool complete = true;       // false when the Bezout account is short
  bool sign_pairing_ok = true;
  std::vector<ContinuationCurve> orbit_families;
  std::vector<std::string> warnings;
};

/// Full root set over both charts, certification and Bezout accounting.
AEReport solve_blowup(const AECoefficients& k, const AEOptions& opts = {});
/// Same, with continuation using every term of rh.
AEReport analyze_ae(const ReducedHamiltonian& rh, const AEOptions& opts = {});

}  // namespace symorb
