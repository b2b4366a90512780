#pragma once

// Reversing-symplectic case, h = delta g(N, C, D, tau): the symmetric cone
// family on Fix R, the non-symmetric branch dichotomy, and the
// elliptic/hyperbolic period geometry.

#include "symorb/errors.hpp"
#include "symorb/invariants.hpp"
#include "symorb/normal_form.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace symorb {

enum class PeriodGeometry { Elliptic, Hyperbolic, Degenerate };

std::string to_string(PeriodGeometry g);

/// Sign of n^2 - c^2 - d^2, Degenerate within tol.
PeriodGeometry classify_period_geometry(double n, double c, double d, double tol = 1e-12);

/// Scalar Newton for g(N, C, D, tau) = 0 in tau.  Throws NewtonFailure.
double solve_tau(const RPoly& g, double N, double C, double D, double tau0 = 0.0, double tol = 1e-15, int max_iter = 50);

struct FixRSample {
  double radius = 0, angle = 0;
  ComplexPair<double> z;  // the point (z, z) with z = radius e^{i angle}
  double N = 0, C = 0, D = 0;
  double tau = 0;
  double period = 0;  // 2 pi / (1 + tau)
};

/// tau(z) on Fix R at angles_per_radius equally spaced angles per radius.
std::vector<FixRSample> symmetric_family(const ReducedHamiltonian& rh, const std::vector<double>& radii,
                                         int angles_per_radius = 8);

struct BranchPoint {
  double t = 0;
  double N = 0, C = 0, D = 0, tau = 0;
  double delta = 0;  // signed; NaN when N^2 - C^2 - D^2 < 0
  double cone = 0;   // N^2 - C^2 - D^2
  double period = 0;
};

struct BranchRecord {
  int delta_sign = 1;
  char pivot = 'n';              // equation choice: 'n', 'c' or 'd'
  Eigen::Vector4d leading_ray;   // d(N, C, D, tau)/dt at t = 0
  std::vector<BranchPoint> points;
};

struct BranchOptions {
  double t_max = 0.1;
  int samples = 10;
};

/// The unique solution curve of g + N g_N + C g_C + D g_D = 0 and two of
/// N g_C + C g_N = 0, D g_C - C g_D = 0, N g_D + D g_N = 0, parametrized by
/// N = g_N t (or C = -g_C t, D = -g_D t for the other pivots).
BranchRecord solve_branch_curve(const RPoly& g, const BranchOptions& opts = {});

/// Zero or two branches (delta > 0 and delta < 0).  Throws AllLeadingZero.
std::vector<BranchRecord> nonsymmetric_branches(const ReducedHamiltonian& rh, const BranchOptions& opts = {});

struct MorseCheck {
  Eigen::Matrix2d hessian;  // of tau(x, y) on Fix R at the origin
  double det = 0;
  PeriodGeometry geometry = PeriodGeometry::Degenerate;
};

/// Finite-difference Hessian of tau on Fix R with step h.
MorseCheck morse_check(const ReducedHamiltonian& rh, double h = 1e-3);

struct SROptions {
  std::vector<double> sample_radii{1e-2, 5e-3, 2.5e-3};
  int angles_per_radius = 8;
  BranchOptions branch;
};

struct SRReport {
  double n = 0, c = 0, d = 0;
  double discriminant = 0;
  PeriodGeometry geometry = PeriodGeometry::Degenerate;
  std::vector<FixRSample> symmetric_family;
  std::vector<BranchRecord> nonsymmetric_branches;
  MorseCheck morse;
  std::vector<std::string> warnings;
};

SRReport analyze_sr(const ReducedHamiltonian& rh, const SROptions& opts = {});

}  // namespace symorb
