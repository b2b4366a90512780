#pragma once

// Complete root finding for small square polynomial systems.
//
// The primary method is a projective total-degree homotopy with the gamma
// trick; a seeded multistart Newton search fills in roots if some paths fail.
// Everything is deterministic for a fixed seed.

#include "symorb/polynomial.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace symorb {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using CPoly = MultiPoly<cplx>;
using CSystem = PolySystem<cplx>;

class SolverError : public std::runtime_error {
 public:
  enum class Kind { NonConvergent, IllPosed, Diverged, Inconclusive, BadInput };
  SolverError(Kind k, const std::string& what) : std::runtime_error(what), kind_(k) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

std::string to_string(SolverError::Kind k);

struct RootRecord {
  CVector point;  // full coordinates, chart variables included
  int multiplicity = 1;
  double residual = 0.0;  // max |p_i(point)|
  bool is_real = false;
  int jacobian_rank = 0;
};

/// Fixes some variables to constants; the rest are the unknowns.
struct Chart {
  std::vector<std::pair<std::string, cplx>> fixed;

  static Chart none() { return {}; }
  static Chart fix(const std::string& name, cplx value) { return Chart{{{name, value}}}; }

  /// System in the free variables only.
  CSystem apply(const CSystem& sys) const;
  /// Free-variable point -> full point.
  CVector lift(const CSystem& sys, const CVector& free) const;
  /// Full point -> free-variable point.
  CVector restrict_point(const CSystem& sys, const CVector& full) const;
  std::string describe() const;
};

struct SolverOptions {
  double tol = 1e-12;             // Newton acceptance, relative to the evaluation scale
  double cluster_radius = 1e-6;   // merge radius in scaled coordinates
  double real_tol = 1e-8;         // max imaginary part for a real root
  double rank_tol = 1e-7;         // relative singular value cutoff
  int multistart = 2000;          // fill-in Newton starts when paths fail
  int homotopy_attempts = 3;      // fresh gamma/patch per attempt
  bool use_homotopy = true;
  int max_newton = 60;
  std::uint64_t seed = 0x5eed2024ULL;
};

struct SolveResult {
  enum class Status { Complete, NonConvergent };
  std::vector<RootRecord> roots;  // canonically sorted, real roots first
  Status status = Status::Complete;
  long bezout = 0;                // product of degrees of the charted system
  int finite_multiplicity = 0;    // sum of multiplicities of returned roots
  int paths_at_infinity = 0;      // homotopy endpoints outside the chart
  int failed_paths = 0;
  std::vector<std::string> warnings;

  int real_count() const;
  bool complete() const { return status == Status::Complete; }
};

/// All isolated roots of sys in the given chart.
SolveResult solve_all_roots(const CSystem& sys, const Chart& chart, const SolverOptions& opts = {});

/// Newton polish of a square system.  Throws SolverError(Diverged).
RootRecord newton_refine(const CSystem& sys, const CVector& x0, double tol = 1e-12, int max_iter = 50);

/// Local multiplicity of root by splitting under constant perturbations of
/// size eps.  sys must be square.  Throws SolverError(Inconclusive).
int multiplicity_probe(const CSystem& sys, const CVector& root,
                       const std::vector<double>& epsilons = {1e-4, 1e-6, 1e-8}, std::uint64_t seed = 7);

/// max_i |p_i(x)|.
double residual(const CSystem& sys, const CVector& x);

/// Numerical rank of the Jacobian at x (relative cutoff rank_tol).
int jacobian_rank(const CSystem& sys, const CVector& x, double rank_tol = 1e-7);

CMatrix evaluate_jacobian(const CSystem& sys, const CVector& x);

template <typename S>
CSystem to_complex(const PolySystem<S>& sys) {
  std::vector<CPoly> ps;
  ps.reserve(sys.polys.size());
  for (const auto& p : sys.polys) ps.push_back(poly_cast<cplx>(p));
  return CSystem(std::move(ps), sys.names);
}

}  // namespace symorb
