#pragma once

// Command-line front end.  Input is one JSON document; output is a JSON report
// or comma-separated tables.  Exit codes: 0 ok, 2 validation error,
// 3 numerical failure, 4 regression mismatch.

#include "symorb/ae_analysis.hpp"
#include "symorb/combined_analysis.hpp"
#include "symorb/normal_form.hpp"
#include "symorb/orbitverify.hpp"
#include "symorb/sr_analysis.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace symorb::cli {

using json = nlohmann::ordered_json;

enum ExitCode { kOk = 0, kValidation = 2, kNumerical = 3, kRegression = 4 };

/// Bad input; `where` is a field path ("coefficients.a1") or "line L, column C".
class ValidationError : public std::runtime_error {
 public:
  ValidationError(const std::string& where, const std::string& what)
      : std::runtime_error(where.empty() ? what : where + ": " + what), where_(where) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

/// Numerical failure that should end the run with exit code 3.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string mode;
  std::string input;   // file path; empty for reproduce
  std::string output;  // empty: stdout
  std::string format = "report";
  std::string case_name;
  bool all = false;
  std::uint64_t seed = 0x5eed2024ULL;
  std::optional<double> tol;
  std::vector<double> sweep_radii;
};

/// Parses a JSON document, reporting syntax errors by line and column.
json parse_document(const std::string& text);

/// The reduced Hamiltonian described by a document: named coefficients (n, c,
/// d or a1 ... g2), optional extra terms, or a polynomial H to be normalized.
struct ParsedSystem {
  SymmetryKind kind = SymmetryKind::SR;
  ReducedHamiltonian reduced;
  std::optional<HamiltonianSpec> hamiltonian;  // when given as H
  std::vector<std::string> warnings;
};
ParsedSystem parse_system(const json& doc, std::optional<SymmetryKind> default_kind);
HamiltonianSpec parse_hamiltonian(const json& terms, SymmetryKind kind, const std::string& path = "hamiltonian");

/// Mode dispatch on an already parsed document; returns the results block.
json analyze_sr_json(const ParsedSystem& sys, const Options& o);
json analyze_ae_json(const ParsedSystem& sys, const Options& o);
json analyze_combined_json(const ParsedSystem& sys, const Options& o);
json derive_json(const json& doc, const Options& o);
json roots_json(const ParsedSystem& sys, const Options& o);
json verify_json(const json& doc, const Options& o, bool& all_verified);

/// Rows (theta1, theta2, locus) for Fix R, Fix S, Fix(S, pi) and FixSR.
std::string emit_torus_plot_data(const TorusFixsets& t);

struct CaseResult {
  std::string name;
  bool pass = false;
  std::vector<std::string> failures;
  json details;
};

struct CorpusCase {
  std::string name;
  std::string description;
  std::function<CaseResult(const Options&)> run;
};
const std::vector<CorpusCase>& corpus();

/// Formats v with 17 significant digits / 4 decimals.
std::string fmt17(double v);
std::string fmt4(double v);

/// Full program: argument parsing, dispatch, output, exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace symorb::cli
