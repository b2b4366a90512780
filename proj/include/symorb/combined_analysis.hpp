#pragma once

// Both symmetries at once: h = delta g(N, C, D^2, tau).  The cone delta = 0 is
// filled with R-symmetric orbits, two of which are also S-symmetric; off the
// cone, on Fix RS (z1, z2 real), two SR-symmetric families exist when
// n^2 - c^2 > 0.

#include "symorb/errors.hpp"
#include "symorb/invariants.hpp"
#include "symorb/normal_form.hpp"
#include "symorb/sr_analysis.hpp"

#include <string>
#include <utility>
#include <vector>

namespace symorb {

enum class ConeAnnotation { None, S, SPi };
std::string to_string(ConeAnnotation a);

struct ConeSample {
  FixRSample sample;
  ConeAnnotation annotation = ConeAnnotation::None;
};

/// tau(z) on Fix R (which lies in the cone).  The circle orbit of (z, z) meets
/// Fix S iff z is real and Fix(S, pi) iff z is imaginary.
std::vector<ConeSample> cone_family(const ReducedHamiltonian& rh, const std::vector<double>& radii,
                                    int angles_per_radius = 8);

/// The two S-symmetric cone orbits at one radius: through (r, r) in Fix S and
/// (i r, i r) in Fix(S, pi).
std::pair<FixRSample, FixRSample> s_orbits(const ReducedHamiltonian& rh, double radius);

struct AxisCandidate {
  std::vector<BranchPoint> points;  // C = D = 0, g + N g_N = 0
  double max_gC = 0;                // |g_C| along the candidate
  bool genuine = false;             // critical only when g_C vanishes there
};

struct RSBranches {
  std::vector<BranchRecord> branches;  // 0 or 2, D identically 0
  AxisCandidate axis;
};

/// Throws AllLeadingZero when n = c = 0.
RSBranches rs_branches(const ReducedHamiltonian& rh, const BranchOptions& opts = {});

struct TorusLocus {
  std::string name;
  std::vector<std::pair<double, double>> points;  // (theta1, theta2) in [0, 2 pi)
};

struct TorusFixsets {
  std::vector<TorusLocus> lines;                    // Fix R, Fix S, Fix(S, pi)
  std::vector<std::pair<double, double>> fix_sr;    // Fix R cap Fix S
  std::vector<std::pair<double, double>> fix_rs_real;  // all of Fix(RS) = R^2 on the torus
};

/// Loci on the torus z1 = e^{i theta1}/sqrt 2, z2 = e^{i theta2}/sqrt 2.
TorusFixsets torus_fixsets(int samples_per_line = 64);

ComplexPair<double> torus_point(double theta1, double theta2);

struct CombinedOptions {
  std::vector<double> sample_radii{1e-2, 5e-3, 2.5e-3};
  int angles_per_radius = 8;
  BranchOptions branch;
  int torus_samples = 64;
};

struct CombinedReport {
  double n = 0, c = 0;
  double discriminant = 0;  // n^2 - c^2
  PeriodGeometry geometry = PeriodGeometry::Degenerate;
  std::vector<ConeSample> cone_family;
  std::vector<std::pair<FixRSample, FixRSample>> s_orbits;  // one pair per radius
  RSBranches rs;
  TorusFixsets torus;
  bool sr_consistent = true;  // sr_analysis on the same g gives the same verdict
  std::vector<std::string> warnings;
};

CombinedReport analyze_combined(const ReducedHamiltonian& rh, const CombinedOptions& opts = {});

}  // namespace symorb
