#pragma once

// Numerical check of predicted periodic orbits: integrate x' = (1/2) J grad H
// for the polynomial H, shoot for closed orbits, and classify them by which
// involutions map the orbit onto itself.

#include "symorb/integrator.hpp"
#include "symorb/invariants.hpp"
#include "symorb/normal_form.hpp"

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace symorb {

class NoConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A polynomial on R^4 flattened for fast repeated evaluation.
class CompiledPoly4 {
 public:
  CompiledPoly4() = default;
  explicit CompiledPoly4(const RPoly& p);
  double operator()(const Eigen::Vector4d& x) const;

 private:
  struct Term {
    double c;
    std::array<int, 4> e;
  };
  std::vector<Term> terms_;
  int max_degree_ = 0;
};

/// Vector field f = (1/2) J grad H with its Jacobian (1/2) J Hess H.
class VectorFieldSpec {
 public:
  explicit VectorFieldSpec(const HamiltonianSpec& spec);

  Eigen::Vector4d operator()(const Eigen::Vector4d& x) const;
  Eigen::Matrix4d jacobian(const Eigen::Vector4d& x) const;
  double energy(const Eigen::Vector4d& x) const { return H_(x); }
  SymmetryKind kind() const { return kind_; }
  const HamiltonianSpec& spec() const { return spec_; }

 private:
  HamiltonianSpec spec_;
  SymmetryKind kind_;
  CompiledPoly4 H_;
  std::array<CompiledPoly4, 4> grad_;
  std::array<CompiledPoly4, 10> hess_;  // upper triangle, row major
};

struct FlowOptions {
  IntegratorOptions integrator;
  double energy_tol = 1e-9;  // relative to max(|H(x0)|, |x0|^2); exceeded -> StepFailure
};

struct FlowResult {
  Eigen::Vector4d x;
  double energy_drift = 0;  // max |H(x(t)) - H(x0)| over accepted steps
};

/// phi_T(x0); T may be negative.
FlowResult flow(const VectorFieldSpec& vf, const Eigen::Vector4d& x0, double T, const FlowOptions& opts = {});

struct FlowWithSTM {
  Eigen::Vector4d x;
  Eigen::Matrix4d stm;  // d phi_T / d x0
  double energy_drift = 0;
};
FlowWithSTM flow_with_stm(const VectorFieldSpec& vf, const Eigen::Vector4d& x0, double T,
                          const FlowOptions& opts = {});

/// Points x(k T / samples), k = 0..samples-1.
std::vector<Eigen::Vector4d> sample_orbit(const VectorFieldSpec& vf, const Eigen::Vector4d& x0, double T,
                                          int samples, const FlowOptions& opts = {});

enum class OrbitSymmetry { R_symmetric, S_symmetric, RS_symmetric, RSProduct_symmetric, NonSymmetric_paired };
std::string to_string(OrbitSymmetry s);

struct SymmetryFlags {
  bool R = false, S = false, RS = false;
  double dist_R = -1, dist_S = -1, dist_RS = -1;  // -1: involution not a symmetry of the field
};

struct PartnerOrbit {
  Eigen::Vector4d x0;
  double energy = 0;
  double residual = 0;
  std::string image_of;  // involution that produced it
};

struct OrbitResult {
  Eigen::Vector4d x0;
  double period = 0;
  double residual = 0;  // |phi_T(x0) - x0|_inf
  double energy = 0;
  double energy_drift = 0;
  int iterations = 0;
  OrbitSymmetry symmetry = OrbitSymmetry::NonSymmetric_paired;
  SymmetryFlags flags;
  std::optional<PartnerOrbit> partner;
};

struct ShootOptions {
  FlowOptions flow;
  double tol = 1e-12;     // Newton stop, relative to |x0|
  double accept = 1e-9;   // full-period residual that counts as closed
  int max_iter = 40;
  double sym_tol = 1e-7;  // orbit-to-image distance, relative to |x0|
  bool classify = true;
};

/// R-symmetric orbit through a point (a, b, a, b) of Fix R: unknowns (a, b, T),
/// condition phi_{T/2}(x0) in Fix R.  Minimum-norm Gauss-Newton, since these
/// orbits come in a two-parameter family.  Throws NoConvergence.
OrbitResult shoot_R_symmetric(const VectorFieldSpec& vf, std::complex<double> z, double T_guess,
                              const ShootOptions& opts = {});

enum class Anchor { Norm, H2, None };

/// Closed orbit near x_guess: phi_T(x0) = x0 with the phase fixed by a section
/// through x_guess orthogonal to f(x_guess) and the family parameter fixed by
/// the anchor (|x0|^2 or H2(x0) held at its value at x_guess).
/// Gauss-Newton with SVD steps and Armijo backtracking.  Throws NoConvergence.
OrbitResult shoot_generic(const VectorFieldSpec& vf, const Eigen::Vector4d& x_guess, double T_guess,
                          Anchor anchor = Anchor::Norm, const ShootOptions& opts = {});

/// Closed orbit with x0 restricted to a fixed space (2 parameters, |p| held at
/// its guess value so the search cannot collapse onto the equilibrium).
OrbitResult shoot_in_fixed_space(const VectorFieldSpec& vf, FixedSpace space, const Eigen::Vector4d& x_guess,
                                 double T_guess, const ShootOptions& opts = {});

/// Sets symmetry, flags and partner.  An orbit is g-symmetric when g x0 lies on
/// it, i.e. min_s |phi_s(x0) - g x0| is below sym_tol |x0|.  Only involutions
/// that are symmetries of the field's kind are tested.
void classify_orbit_symmetry(const VectorFieldSpec& vf, OrbitResult& orbit, const ShootOptions& opts = {});

/// Real basis of a fixed space (4 x 2, orthonormal columns).
Eigen::Matrix<double, 4, 2> fixed_space_basis(FixedSpace space);

struct LinearFit {
  double slope = 0, intercept = 0, r2 = 0;
};
/// Least squares y = slope x + intercept.
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace symorb
