#include "symorb/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

namespace symorb::cli {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------- input

double number_at(const json& obj, const std::string& key, const std::string& path) {
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ValidationError(path + "." + key, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ValidationError(path + "." + key, "not finite");
  return d;
}

std::vector<int> exponent_at(const json& term, const std::string& path, std::size_t n) {
  if (!term.is_object() || !term.contains("exponent") || !term.contains("coefficient"))
    throw ValidationError(path, "term needs 'exponent' and 'coefficient'");
  const auto& e = term["exponent"];
  if (!e.is_array() || e.size() != n)
    throw ValidationError(path + ".exponent", "expected an array of " + std::to_string(n) + " integers");
  std::vector<int> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (!e[i].is_number_integer() || e[i].get<long>() < 0)
      throw ValidationError(path + ".exponent[" + std::to_string(i) + "]", "expected a non-negative integer");
    out.push_back(e[i].get<int>());
  }
  return out;
}

SymmetryKind kind_from(const json& doc, std::optional<SymmetryKind> fallback) {
  if (doc.contains("kind")) {
    if (!doc["kind"].is_string()) throw ValidationError("kind", "expected one of SR, AE, COMBINED");
    try {
      return parse_symmetry_kind(doc["kind"].get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ValidationError("kind", e.what());
    }
  }
  if (!fallback) throw ValidationError("kind", "missing");
  return *fallback;
}

void add_extra_terms(const json& doc, ReducedHamiltonian& rh) {
  if (!doc.contains("extra_terms")) return;
  const auto& terms = doc["extra_terms"];
  if (!terms.is_array()) throw ValidationError("extra_terms", "expected an array");
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const std::string path = "extra_terms[" + std::to_string(i) + "]";
    const auto e = exponent_at(terms[i], path, 4);
    const double c = number_at(terms[i], "coefficient", path);
    const std::string in = terms[i].value("in", rh.kind == SymmetryKind::AE ? "g1" : "g");
    if (rh.kind == SymmetryKind::AE) {
      if (in == "g1") rh.g1.add_term(e, c);
      else if (in == "g2") rh.g2.add_term(e, c);
      else throw ValidationError(path + ".in", "expected g1 or g2 for AE");
    } else {
      if (in != "g") throw ValidationError(path + ".in", "expected g");
      if (rh.kind == SymmetryKind::Combined && e[kD] % 2 != 0)
        throw ValidationError(path + ".exponent", "COMBINED g depends on D through D^2 only");
      rh.g.add_term(e, c);
    }
  }
}

// ---------------------------------------------------------------- output helpers

json cjson(cplx z) { return json::array({z.real(), z.imag()}); }

json poly_json(const RPoly& p) {
  json a = json::array();
  for (const auto& [e, c] : p.terms()) a.push_back({{"exponent", e}, {"coefficient", c}});
  return a;
}

json sample_json(const FixRSample& s) {
  return {{"radius", s.radius}, {"angle", s.angle}, {"z1", cjson(s.z.z1)}, {"N", s.N},   {"C", s.C},
          {"D", s.D},           {"tau", s.tau},     {"period", s.period}};
}

json branch_point_json(const BranchPoint& p) {
  return {{"t", p.t},         {"N", p.N},         {"C", p.C},     {"D", p.D},
          {"tau", p.tau},     {"delta", p.delta}, {"cone", p.cone}, {"period", p.period}};
}

json branch_json(const BranchRecord& b) {
  json pts = json::array();
  for (const auto& p : b.points) pts.push_back(branch_point_json(p));
  return {{"delta_sign", b.delta_sign},
          {"pivot", std::string(1, b.pivot)},
          {"leading_ray", {b.leading_ray[0], b.leading_ray[1], b.leading_ray[2], b.leading_ray[3]}},
          {"points", pts}};
}

json ae_coeff_json(const AECoefficients& k) {
  return {{"a1", k.a1}, {"c1", k.c1}, {"d1", k.d1}, {"e1", k.e1}, {"f1", k.f1}, {"g1", k.g1}, {"b2", k.b2},
          {"a2", k.a2}, {"c2", k.c2}, {"d2", k.d2}, {"e2", k.e2}, {"f2", k.f2}, {"g2", k.g2}};
}

json solution_json(const BlowupSolution& s) {
  return {{"chart", to_string(s.chart)},
          {"v", cjson(s.v)},
          {"t", cjson(s.t)},
          {"u", cjson(s.u)},
          {"w", cjson(s.w)},
          {"x", cjson(s.x)},
          {"is_real", s.is_real},
          {"multiplicity", s.multiplicity},
          {"deleted_column", std::string(1, s.deleted_column)},
          {"cert_det", cjson(s.cert_det)},
          {"nondegenerate", s.nondegenerate},
          {"residual", s.residual},
          {"is_axis", s.is_axis},
          {"axis_consistent", s.axis_consistent}};
}

json continuation_json(const ContinuationCurve& c, const AEReport& rep) {
  json pts = json::array();
  for (const auto& p : c.points)
    pts.push_back({{"r", p.r},
                   {"v", p.v},
                   {"t", p.t},
                   {"u", p.u},
                   {"w", p.w},
                   {"x", p.x},
                   {"N", p.N},
                   {"C", p.C},
                   {"D", p.D},
                   {"delta", p.delta},
                   {"tau", p.tau},
                   {"period", p.period()}});
  const auto& s = rep.solutions.at(c.solution_index);
  return {{"solution_index", c.solution_index},
          {"fixed", std::string(1, c.fixed)},
          {"is_axis", s.is_axis},
          {"axis_consistent", s.axis_consistent},
          {"points", pts}};
}

json orbit_json(const OrbitResult& r) {
  json j = {{"x0", {r.x0[0], r.x0[1], r.x0[2], r.x0[3]}},
            {"period", r.period},
            {"residual", r.residual},
            {"energy", r.energy},
            {"energy_drift", r.energy_drift},
            {"iterations", r.iterations},
            {"symmetry", to_string(r.symmetry)},
            {"dist_R", r.flags.dist_R},
            {"dist_S", r.flags.dist_S},
            {"dist_RS", r.flags.dist_RS}};
  if (r.partner) {
    const auto& p = *r.partner;
    j["partner"] = {{"image_of", p.image_of},
                    {"x0", {p.x0[0], p.x0[1], p.x0[2], p.x0[3]}},
                    {"energy", p.energy},
                    {"residual", p.residual}};
  }
  return j;
}

// ---------------------------------------------------------------- tables

struct Table {
  std::vector<std::string> text_cols;
  std::vector<std::string> num_cols;
  std::vector<std::pair<std::vector<std::string>, std::vector<double>>> rows;

  void add(std::vector<std::string> t, std::vector<double> v) { rows.emplace_back(std::move(t), std::move(v)); }

  std::string str() const {
    std::ostringstream os;
    bool first = true;
    auto sep = [&]() {
      if (!first) os << ',';
      first = false;
    };
    for (const auto& c : text_cols) sep(), os << c;
    for (const auto& c : num_cols) sep(), os << c;
    for (const auto& c : num_cols) sep(), os << c << "_4dp";
    os << '\n';
    for (const auto& [t, v] : rows) {
      first = true;
      for (const auto& s : t) sep(), os << s;
      for (double d : v) sep(), os << fmt17(d);
      for (double d : v) sep(), os << fmt4(d);
      os << '\n';
    }
    return os.str();
  }
};

std::string roots_table(const json& results) {
  Table t{{"chart", "index", "is_real", "multiplicity", "deleted_column", "nondegenerate"},
          {"v_re", "v_im", "t_re", "t_im", "u_re", "u_im", "w_re", "w_im", "x_re", "x_im", "det_re", "det_im", "residual"},
          {}};
  int i = 0;
  for (const auto& s : results.at("solutions")) {
    std::vector<double> v;
    for (const char* k : {"v", "t", "u", "w", "x", "cert_det"}) {
      v.push_back(s[k][0].get<double>());
      v.push_back(s[k][1].get<double>());
    }
    v.push_back(s["residual"].get<double>());
    t.add({s["chart"].get<std::string>(), std::to_string(i++), s["is_real"].get<bool>() ? "1" : "0",
           std::to_string(s["multiplicity"].get<int>()), s["deleted_column"].get<std::string>(),
           s["nondegenerate"].get<bool>() ? "1" : "0"},
          v);
  }
  return t.str();
}

std::string sr_table(const json& results) {
  Table t{{"record", "branch"}, {"t", "radius", "angle", "N", "C", "D", "delta", "tau", "period"}, {}};
  for (const auto& s : results.at("symmetric_family"))
    t.add({"symmetric", "-"},
          {0.0, s["radius"].get<double>(), s["angle"].get<double>(), s["N"].get<double>(), s["C"].get<double>(),
           s["D"].get<double>(), 0.0, s["tau"].get<double>(), s["period"].get<double>()});
  int b = 0;
  for (const auto& br : results.at("nonsymmetric_branches")) {
    for (const auto& p : br["points"])
      t.add({"branch", std::to_string(b)},
            {p["t"].get<double>(), 0.0, 0.0, p["N"].get<double>(), p["C"].get<double>(), p["D"].get<double>(),
             p["delta"].get<double>(), p["tau"].get<double>(), p["period"].get<double>()});
    ++b;
  }
  return t.str();
}

std::string ae_table(const json& results) {
  std::string out = roots_table(results);
  if (!results.contains("orbit_families") || results["orbit_families"].empty()) return out;
  Table t{{"family", "solution_index"}, {"r", "v", "t", "u", "w", "x", "N", "C", "D", "delta", "tau", "period"}, {}};
  int f = 0;
  for (const auto& fam : results["orbit_families"]) {
    for (const auto& p : fam["points"]) {
      std::vector<double> v;
      for (const char* k : {"r", "v", "t", "u", "w", "x", "N", "C", "D", "delta", "tau", "period"})
        v.push_back(p[k].get<double>());
      t.add({std::to_string(f), std::to_string(fam["solution_index"].get<int>())}, v);
    }
    ++f;
  }
  return out + "\n" + t.str();
}

std::string verify_table(const json& results) {
  Table t{{"seed_kind", "index", "status", "symmetry"}, {"predicted_period", "period", "residual", "energy", "partner_energy"},
          {}};
  int i = 0;
  for (const auto& e : results.at("orbits")) {
    const bool ok = e.contains("orbit");
    const double nan = std::nan("");
    t.add({e["seed_kind"].get<std::string>(), std::to_string(i++), e["status"].get<std::string>(),
           ok ? e["orbit"]["symmetry"].get<std::string>() : "-"},
          {e.value("predicted_period", nan), ok ? e["orbit"]["period"].get<double>() : nan,
           ok ? e["orbit"]["residual"].get<double>() : nan, ok ? e["orbit"]["energy"].get<double>() : nan,
           ok && e["orbit"].contains("partner") ? e["orbit"]["partner"]["energy"].get<double>() : nan});
  }
  return t.str();
}

std::string derive_table(const json& results) {
  Table t{{"polynomial"}, {"e_N", "e_C", "e_D", "e_tau", "coefficient"}, {}};
  for (const char* name : {"g", "g1", "g2"}) {
    if (!results.contains(name)) continue;
    for (const auto& term : results[name]) {
      const auto& e = term["exponent"];
      t.add({name}, {e[0].get<double>(), e[1].get<double>(), e[2].get<double>(), e[3].get<double>(),
                     term["coefficient"].get<double>()});
    }
  }
  return t.str();
}

std::string reproduce_table(const json& results) {
  std::ostringstream os;
  os << "case,status,failures\n";
  for (const auto& c : results.at("cases")) {
    os << c["name"].get<std::string>() << ',' << (c["pass"].get<bool>() ? "PASS" : "FAIL") << ','
       << c["failures"].size() << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------- misc

std::vector<double> radii_or(const Options& o, std::vector<double> fallback) {
  return o.sweep_radii.empty() ? fallback : o.sweep_radii;
}

std::string timestamp_now() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

std::optional<SymmetryKind> kind_for_mode(const std::string& mode) {
  if (mode == "analyze-sr") return SymmetryKind::SR;
  if (mode == "analyze-ae" || mode == "roots") return SymmetryKind::AE;
  if (mode == "analyze-combined") return SymmetryKind::Combined;
  return std::nullopt;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("--input", "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------- verification

struct VerifyTally {
  bool ok = true;
  double max_drift = 0;
};

json orbit_entry(const std::string& kind, double predicted, const std::function<OrbitResult()>& shoot,
                 const std::function<void(const OrbitResult&, std::vector<std::string>&)>& checks, VerifyTally& tally) {
  json e = {{"seed_kind", kind}, {"predicted_period", predicted}};
  try {
    const OrbitResult r = shoot();
    std::vector<std::string> fails;
    checks(r, fails);
    tally.max_drift = std::max(tally.max_drift, r.energy_drift);
    e["orbit"] = orbit_json(r);
    e["status"] = fails.empty() ? "verified" : "mismatch";
    if (!fails.empty()) {
      e["failures"] = fails;
      tally.ok = false;
    }
  } catch (const NoConvergence& ex) {
    e["status"] = "no_convergence";
    e["error"] = ex.what();
    tally.ok = false;
  } catch (const StepFailure& ex) {
    e["status"] = "step_failure";
    e["error"] = ex.what();
    tally.ok = false;
  }
  return e;
}

void check_symmetric(const OrbitResult& r, double predicted, OrbitSymmetry want, std::vector<std::string>& f) {
  if (std::abs(r.period - predicted) > 1e-6) f.push_back("period differs from prediction by " + fmt4(r.period - predicted));
  if (r.symmetry != want) f.push_back("symmetry " + to_string(r.symmetry) + ", expected " + to_string(want));
  if (std::abs(r.energy) > 1e-9) f.push_back("symmetric orbit with |H| = " + fmt17(std::abs(r.energy)));
}

void check_paired(const OrbitResult& r, OrbitSymmetry want, std::vector<std::string>& f) {
  if (r.symmetry != want) f.push_back("symmetry " + to_string(r.symmetry) + ", expected " + to_string(want));
  if (!r.partner) {
    f.push_back("no partner orbit");
    return;
  }
  if (std::abs(r.partner->energy + r.energy) > 1e-9) f.push_back("partner energy is not opposite");
  if (r.partner->residual > 1e-9) f.push_back("partner does not close");
}

// Off-cone search with the H2 anchor; returns the number of converged runs.
int offcone_search(const VectorFieldSpec& vf, double n, double c, double d, std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  int found = 0, tried = 0;
  while (tried < count) {
    Eigen::Vector4d x(nd(rng), nd(rng), nd(rng), nd(rng));
    x *= 0.05 / x.norm();
    const auto inv = to_invariants(to_complex_pair(x));
    if (std::abs(inv.delta) < 0.1 * inv.N) continue;
    ++tried;
    const double tau = -2 * (n * inv.N + c * inv.C + d * inv.D);
    try {
      shoot_generic(vf, x, 2 * kPi / (1 + tau), Anchor::H2);
      ++found;
    } catch (const NoConvergence&) {
    } catch (const StepFailure&) {
    }
  }
  return found;
}

struct FixSControl {
  int attempts = 0, converged = 0, trajectories = 0, monotone = 0;
};

FixSControl fix_s_control(const VectorFieldSpec& vf, std::uint64_t seed, int attempts, int trajectories) {
  FixSControl c;
  const auto B = fixed_space_basis(FixedSpace::S);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ang(0, 2 * kPi), rad(0.005, 0.02);
  ShootOptions so;
  so.max_iter = 15;
  for (int s = 0; s < attempts; ++s) {
    const double a = ang(rng), r = rad(rng);
    const Eigen::Vector4d x = B * Eigen::Vector2d(r * std::cos(a), r * std::sin(a));
    ++c.attempts;
    try {
      shoot_in_fixed_space(vf, FixedSpace::S, x, 2 * kPi, so);
      ++c.converged;
    } catch (const NoConvergence&) {
    } catch (const StepFailure&) {
    }
    if (s < trajectories) {
      ++c.trajectories;
      int pos = 0, neg = 0;
      Eigen::Vector4d y = x;
      for (int i = 0; i < 20; ++i) {
        const Eigen::Vector4d f = vf(y);
        const double vdot = 2 * (y[0] * f[0] + y[1] * f[1]);
        (vdot > 0 ? pos : neg)++;
        y = flow(vf, y, 0.5).x;
      }
      if (pos == 0 || neg == 0) ++c.monotone;
    }
  }
  return c;
}

}  // namespace

// ---------------------------------------------------------------- public helpers

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt4(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

json parse_document(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') ++line, col = 1;
      else ++col;
    }
    throw ValidationError("line " + std::to_string(line) + ", column " + std::to_string(col), "malformed JSON");
  }
}

HamiltonianSpec parse_hamiltonian(const json& terms, SymmetryKind kind, const std::string& path) {
  if (!terms.is_array() || terms.empty()) throw ValidationError(path, "expected a non-empty array of terms");
  HamiltonianSpec spec;
  spec.kind = kind;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    const auto e = exponent_at(terms[i], p, 4);
    spec.H.add_term(e, number_at(terms[i], "coefficient", p));
  }
  return spec;
}

ParsedSystem parse_system(const json& doc, std::optional<SymmetryKind> default_kind) {
  if (!doc.is_object()) throw ValidationError("", "input must be a JSON object");
  ParsedSystem out;
  out.kind = kind_from(doc, default_kind);
  if (doc.contains("hamiltonian")) {
    if (doc.contains("coefficients")) throw ValidationError("", "give either 'coefficients' or 'hamiltonian', not both");
    auto spec = parse_hamiltonian(doc["hamiltonian"], out.kind);
    const auto problems = validate(spec);
    if (!problems.empty()) {
      std::string msg;
      for (const auto& p : problems) msg += (msg.empty() ? "" : "; ") + p;
      throw ValidationError("hamiltonian", msg);
    }
    const auto sym = check_symmetry(spec);
    if (!sym.admissible()) {
      const auto& v = sym.violations.front();
      std::ostringstream os;
      os << "H o " << v.involution << " != -H at monomial x1^" << v.monomial[0] << " y1^" << v.monomial[1] << " x2^"
         << v.monomial[2] << " y2^" << v.monomial[3] << " (defect " << v.defect << ")";
      throw ValidationError("hamiltonian", os.str());
    }
    auto d = derive(spec);
    out.reduced = d.reduced;
    out.warnings = d.warnings;
    out.hamiltonian = spec;
    return out;
  }
  if (!doc.contains("coefficients") || !doc["coefficients"].is_object())
    throw ValidationError("coefficients", "need a 'coefficients' object or a 'hamiltonian' term list");
  const auto& co = doc["coefficients"];
  if (out.kind == SymmetryKind::AE) {
    AECoefficients k;
    const std::map<std::string, double*> slots{{"a1", &k.a1}, {"c1", &k.c1}, {"d1", &k.d1}, {"e1", &k.e1},
                                               {"f1", &k.f1}, {"g1", &k.g1}, {"b2", &k.b2}, {"a2", &k.a2},
                                               {"c2", &k.c2}, {"d2", &k.d2}, {"e2", &k.e2}, {"f2", &k.f2},
                                               {"g2", &k.g2}};
    for (const auto& [key, val] : co.items()) {
      auto it = slots.find(key);
      if (it == slots.end()) throw ValidationError("coefficients." + key, "unknown AE coefficient");
      *it->second = number_at(co, key, "coefficients");
    }
    out.reduced = k.to_reduced();
  } else {
    double n = 0, c = 0, d = 0;
    for (const auto& [key, val] : co.items()) {
      if (key == "n") n = number_at(co, key, "coefficients");
      else if (key == "c") c = number_at(co, key, "coefficients");
      else if (key == "d") d = number_at(co, key, "coefficients");
      else throw ValidationError("coefficients." + key, "unknown coefficient (expected n, c, d)");
    }
    if (out.kind == SymmetryKind::Combined && d != 0.0)
      throw ValidationError("coefficients.d", "COMBINED g has no linear D term");
    out.reduced = reduced_from_leading(out.kind, n, c, d);
  }
  add_extra_terms(doc, out.reduced);
  return out;
}

json analyze_sr_json(const ParsedSystem& sys, const Options& o) {
  if (sys.kind != SymmetryKind::SR) throw ValidationError("kind", "analyze-sr needs kind SR");
  SROptions so;
  so.sample_radii = radii_or(o, so.sample_radii);
  const auto rep = analyze_sr(sys.reduced, so);
  json fam = json::array(), br = json::array();
  for (const auto& s : rep.symmetric_family) fam.push_back(sample_json(s));
  for (const auto& b : rep.nonsymmetric_branches) br.push_back(branch_json(b));
  json w = rep.warnings;
  for (const auto& s : sys.warnings) w.push_back(s);
  return {{"n", rep.n},
          {"c", rep.c},
          {"d", rep.d},
          {"discriminant", rep.discriminant},
          {"geometry", to_string(rep.geometry)},
          {"g", poly_json(sys.reduced.g)},
          {"symmetric_family", fam},
          {"nonsymmetric_branches", br},
          {"morse",
           {{"hessian", {{rep.morse.hessian(0, 0), rep.morse.hessian(0, 1)}, {rep.morse.hessian(1, 0), rep.morse.hessian(1, 1)}}},
            {"det", rep.morse.det},
            {"geometry", to_string(rep.morse.geometry)}}},
          {"warnings", w}};
}

namespace {

json ae_common(const AEReport& rep, bool with_families) {
  json sols = json::array();
  for (const auto& s : rep.solutions) sols.push_back(solution_json(s));
  const auto& b = rep.bezout_account;
  json out = {{"coefficients", ae_coeff_json(rep.coefficients)},
              {"solutions", sols},
              {"n_real_v1", rep.n_real_v1},
              {"bezout",
               {{"expected", b.expected},
                {"found_v1", b.found_v1},
                {"found_v0", b.found_v0},
                {"paths_at_infinity", b.paths_at_infinity}}},
              {"complete", rep.complete},
              {"sign_pairing_ok", rep.sign_pairing_ok}};
  if (with_families) {
    json fams = json::array();
    for (const auto& c : rep.orbit_families) fams.push_back(continuation_json(c, rep));
    out["orbit_families"] = fams;
  }
  out["warnings"] = rep.warnings;
  return out;
}

}  // namespace

json analyze_ae_json(const ParsedSystem& sys, const Options& o) {
  if (sys.kind != SymmetryKind::AE) throw ValidationError("kind", "analyze-ae needs kind AE");
  AEOptions ao;
  ao.solver.seed = o.seed;
  ao.continue_families = true;
  const auto rep = analyze_ae(sys.reduced, ao);
  json out = ae_common(rep, true);
  const auto& s = rep.symmetric;
  out["symmetric"] = {{"verdict", to_string(s.verdict)},
                      {"liapunov_coefficient", s.liapunov_coefficient},
                      {"eigen_real_part", s.eigen_real_part},
                      {"reduced_fix_s_determinant", s.reduced_fix_s_determinant},
                      {"reason", s.reason}};
  for (const auto& w : sys.warnings) out["warnings"].push_back(w);
  return out;
}

json roots_json(const ParsedSystem& sys, const Options& o) {
  if (sys.kind != SymmetryKind::AE) throw ValidationError("kind", "roots needs kind AE");
  AEOptions ao;
  ao.solver.seed = o.seed;
  return ae_common(analyze_ae(sys.reduced, ao), false);
}

json analyze_combined_json(const ParsedSystem& sys, const Options& o) {
  if (sys.kind != SymmetryKind::Combined) throw ValidationError("kind", "analyze-combined needs kind COMBINED");
  CombinedOptions co;
  co.sample_radii = radii_or(o, co.sample_radii);
  const auto rep = analyze_combined(sys.reduced, co);
  json cone = json::array(), sorb = json::array(), br = json::array(), axis = json::array();
  for (const auto& c : rep.cone_family) {
    json j = sample_json(c.sample);
    j["annotation"] = to_string(c.annotation);
    cone.push_back(j);
  }
  for (const auto& [a, b] : rep.s_orbits) sorb.push_back({{"fix_s", sample_json(a)}, {"fix_s_pi", sample_json(b)}});
  for (const auto& b : rep.rs.branches) br.push_back(branch_json(b));
  for (const auto& p : rep.rs.axis.points) axis.push_back(branch_point_json(p));
  json lines = json::array();
  for (const auto& l : rep.torus.lines) lines.push_back({{"name", l.name}, {"points", l.points}});
  json w = rep.warnings;
  for (const auto& s : sys.warnings) w.push_back(s);
  return {{"n", rep.n},
          {"c", rep.c},
          {"discriminant", rep.discriminant},
          {"geometry", to_string(rep.geometry)},
          {"g", poly_json(sys.reduced.g)},
          {"cone_family", cone},
          {"s_orbits", sorb},
          {"rs", {{"branches", br}, {"axis", {{"points", axis}, {"max_gC", rep.rs.axis.max_gC}, {"genuine", rep.rs.axis.genuine}}}}},
          {"torus", {{"lines", lines}, {"fix_sr", rep.torus.fix_sr}, {"fix_rs_real", rep.torus.fix_rs_real}}},
          {"sr_consistent", rep.sr_consistent},
          {"warnings", w}};
}

json derive_json(const json& doc, const Options&) {
  if (!doc.is_object() || !doc.contains("hamiltonian")) throw ValidationError("hamiltonian", "derive needs a 'hamiltonian' term list");
  const auto sys = parse_system(doc, std::nullopt);
  const auto& rh = sys.reduced;
  json out = {{"kind", std::string(to_string(sys.kind))}};
  if (sys.kind == SymmetryKind::AE) {
    out["g1"] = poly_json(rh.g1);
    out["g2"] = poly_json(rh.g2);
    out["coefficients"] = ae_coeff_json(AECoefficients::from_reduced(rh));
  } else {
    out["g"] = poly_json(rh.g);
    out["coefficients"] = {{"n", rh.n()}, {"c", rh.c()}, {"d", rh.d()}};
  }
  out["warnings"] = sys.warnings;
  return out;
}

json verify_json(const json& doc, const Options& o, bool& all_verified) {
  if (!doc.is_object()) throw ValidationError("", "input must be a JSON object");
  const bool is_report = doc.contains("request") && doc.contains("results");
  const json& input = is_report ? doc["request"].at("input") : doc;
  const std::string mode = is_report ? doc["request"].value("mode", "") : "";
  const ParsedSystem sys = parse_system(input, kind_for_mode(mode));
  json out;
  json warnings = json::array();

  // The Hamiltonian to integrate: the given H, or the normal-form realization.
  HamiltonianSpec H;
  ReducedHamiltonian seeds_rh = sys.reduced;
  bool recompute = !is_report;
  if (sys.hamiltonian) {
    H = *sys.hamiltonian;
  } else {
    auto real = realize_hamiltonian(sys.reduced);
    H = real.spec;
    if (!real.warnings.empty()) {
      for (const auto& w : real.warnings) warnings.push_back("realization: " + w);
      warnings.push_back("seeds recomputed from the realized Hamiltonian");
      seeds_rh = derive(H).reduced;
      recompute = true;
    }
  }
  const VectorFieldSpec vf(H);
  ParsedSystem seeds_sys = sys;
  seeds_sys.reduced = seeds_rh;
  seeds_sys.warnings.clear();
  json results;
  if (recompute) {
    switch (sys.kind) {
      case SymmetryKind::SR: results = analyze_sr_json(seeds_sys, o); break;
      case SymmetryKind::AE: results = analyze_ae_json(seeds_sys, o); break;
      case SymmetryKind::Combined: results = analyze_combined_json(seeds_sys, o); break;
    }
  } else {
    results = doc["results"];
  }

  ShootOptions so;
  if (o.tol) so.accept = *o.tol;
  VerifyTally tally;
  json orbits = json::array();
  std::vector<double> amp2, dT;

  auto shoot_sym = [&](const json& s, const std::string& kind, OrbitSymmetry want) {
    const cplx z(s["z1"][0].get<double>(), s["z1"][1].get<double>());
    const double P = s["period"].get<double>();
    json e = orbit_entry(
        kind, P, [&] { return shoot_R_symmetric(vf, z, P, so); },
        [&](const OrbitResult& r, std::vector<std::string>& f) {
          check_symmetric(r, P, want, f);
          amp2.push_back(std::norm(z));
          dT.push_back(r.period - 2 * kPi);
        },
        tally);
    orbits.push_back(e);
  };
  auto shoot_branch = [&](double N, double C, double D, double delta, double P, const std::string& kind,
                          OrbitSymmetry want) {
    if (N <= 1e-12) return;  // r = 0 start of a continuation curve: the equilibrium
    const Eigen::Vector4d x = to_real(point_from_invariants(N, C, D, delta));
    orbits.push_back(orbit_entry(
        kind, P, [&] { return shoot_generic(vf, x, P, Anchor::H2, so); },
        [&](const OrbitResult& r, std::vector<std::string>& f) {
          check_paired(r, want, f);
          if (std::abs(r.period - P) > 1e-6) f.push_back("period differs from prediction by " + fmt4(r.period - P));
        },
        tally));
  };

  if (sys.kind == SymmetryKind::SR) {
    for (const auto& s : results.at("symmetric_family")) shoot_sym(s, "symmetric_family", OrbitSymmetry::R_symmetric);
    const auto& brs = results.at("nonsymmetric_branches");
    for (const auto& b : brs)
      for (const auto& p : b["points"])
        shoot_branch(p["N"], p["C"], p["D"], p["delta"], p["period"], "nonsymmetric_branch",
                     OrbitSymmetry::NonSymmetric_paired);
    if (brs.empty()) {
      const int found = offcone_search(vf, seeds_rh.n(), seeds_rh.c(), seeds_rh.d(), o.seed, 50);
      out["offcone_control"] = {{"attempts", 50}, {"converged", found}};
      if (found != 0) tally.ok = false;
    }
  } else if (sys.kind == SymmetryKind::AE) {
    for (const auto& fam : results.at("orbit_families")) {
      if (fam["is_axis"].get<bool>() && !fam["axis_consistent"].get<bool>()) {
        orbits.push_back({{"seed_kind", "orbit_family"},
                          {"status", "skipped"},
                          {"error", "axis root (z1 z2 = 0) does not solve the unmultiplied equations"}});
        continue;
      }
      for (const auto& p : fam["points"])
        shoot_branch(p["N"], p["C"], p["D"], p["delta"], p["period"], "orbit_family",
                     OrbitSymmetry::NonSymmetric_paired);
    }
    const auto c = fix_s_control(vf, o.seed, 50, 10);
    out["fix_s_control"] = {{"attempts", c.attempts},
                            {"converged", c.converged},
                            {"trajectories", c.trajectories},
                            {"monotone_V", c.monotone}};
    if (c.converged != 0 || c.monotone != c.trajectories) tally.ok = false;
  } else {
    for (const auto& s : results.at("cone_family"))
      shoot_sym(s, "cone_family",
                s["annotation"] == "none" ? OrbitSymmetry::R_symmetric : OrbitSymmetry::RS_symmetric);
    for (const auto& b : results.at("rs").at("branches"))
      for (const auto& p : b["points"])
        shoot_branch(p["N"], p["C"], p["D"], p["delta"], p["period"], "rs_branch",
                     OrbitSymmetry::RSProduct_symmetric);
  }

  out["orbits"] = orbits;
  if (amp2.size() >= 2) {
    const auto fit = linear_fit(amp2, dT);
    out["period_fit"] = {{"slope", fit.slope}, {"intercept", fit.intercept}, {"r2", fit.r2}};
    if (fit.r2 < 0.999) tally.ok = false;
  }
  out["max_energy_drift"] = tally.max_drift;
  out["verified"] = tally.ok;
  out["warnings"] = warnings;
  all_verified = tally.ok;
  return out;
}

std::string emit_torus_plot_data(const TorusFixsets& t) {
  std::ostringstream os;
  os << "theta1,theta2,locus\n";
  auto row = [&](double a, double b, const std::string& tag) { os << fmt17(a) << ',' << fmt17(b) << ',' << tag << '\n'; };
  const char* tags[] = {"FixR", "FixS", "FixSpi"};
  for (std::size_t i = 0; i < t.lines.size(); ++i)
    for (auto [a, b] : t.lines[i].points) row(a, b, tags[std::min<std::size_t>(i, 2)]);
  for (auto [a, b] : t.fix_sr) row(a, b, "FixSR");
  return os.str();
}

// ---------------------------------------------------------------- corpus

namespace {

struct Checker {
  CaseResult res;
  void expect(bool ok, const std::string& what) {
    if (!ok) res.failures.push_back(what);
  }
  CaseResult done() {
    res.pass = res.failures.empty();
    return res;
  }
};

std::vector<const BlowupSolution*> real_roots(const AEReport& rep) {
  std::vector<const BlowupSolution*> out;
  for (const auto& s : rep.solutions)
    if (s.chart == BlowupChart::V1 && s.is_real) out.push_back(&s);
  return out;
}

const BlowupSolution* nearest_root(const std::vector<const BlowupSolution*>& roots, double t, double u, double w,
                                   double x, double tol) {
  for (const auto* s : roots)
    if (std::abs(s->t.real() - t) <= tol && std::abs(s->u.real() - u) <= tol && std::abs(s->w.real() - w) <= tol &&
        std::abs(s->x.real() - x) <= tol)
      return s;
  return nullptr;
}

struct ListedRoot {
  double t, u, w, x, det;
  double root_tol;  // per component; 1e-10 for exact rows, 5e-4 for 4-decimal listings
  double det_tol;   // absolute when det_rel is false
  bool det_rel;
};

ListedRoot exact_row(double t, double u, double w, double x, double det) { return {t, u, w, x, det, 1e-10, 1e-9, false}; }
ListedRoot rounded_row(double t, double u, double w, double x, double det, double rel) {
  return {t, u, w, x, det, 5e-4, rel, true};
}

// The listed roots are for one sign; the other flips (w, x) and the determinant.
CaseResult listed_roots_case(const std::string& name, const AECoefficients& k, int n_real,
                             const std::vector<ListedRoot>& listed, const Options& o) {
  Checker c;
  c.res.name = name;
  AEOptions ao;
  ao.solver.seed = o.seed;
  const auto t0 = std::chrono::steady_clock::now();
  const auto rep = solve_blowup(k, ao);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto roots = real_roots(rep);
  c.expect(static_cast<int>(roots.size()) == n_real,
           "expected " + std::to_string(n_real) + " real roots, found " + std::to_string(roots.size()));
  c.expect(rep.bezout_account.found_v1 == 12, "chart v=1 multiplicity " + std::to_string(rep.bezout_account.found_v1));
  c.expect(secs <= 5.0, "solve took " + fmt4(secs) + " s");
  json found = json::array();
  for (const auto& L : listed)
    for (double s : {1.0, -1.0}) {
      const auto* r = nearest_root(roots, L.t, L.u, s * L.w, s * L.x, L.root_tol);
      std::ostringstream id;
      id << "root (" << L.t << ", " << L.u << ", " << s * L.w << ", " << s * L.x << ")";
      c.expect(r != nullptr, id.str() + " not found");
      if (!r) continue;
      const double want = s * L.det, got = r->cert_det.real();
      const double dtol = L.det_rel ? L.det_tol * std::abs(want) : L.det_tol;
      c.expect(std::abs(got - want) <= dtol, id.str() + " determinant " + fmt17(got) + " vs " + fmt17(want));
      c.expect(r->nondegenerate, id.str() + " not certified nondegenerate");
      found.push_back({{"t", r->t.real()}, {"u", r->u.real()}, {"w", r->w.real()}, {"x", r->x.real()}, {"det", got}});
    }
  c.res.details = {{"n_real", roots.size()}, {"found_v1", rep.bezout_account.found_v1}, {"seconds", secs}, {"roots", found}};
  return c.done();
}

struct Draw {
  double a1, a2, b2, c1, c2;
};

std::vector<Draw> random_draws(std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-5, 5);
  std::vector<Draw> out;
  while (static_cast<int>(out.size()) < count) {
    Draw d{U(rng), U(rng), U(rng), U(rng), U(rng)};
    if (std::abs(d.b2) < 0.1) continue;
    out.push_back(d);
  }
  return out;
}

CaseResult axis_roots_case(const Options& o) {
  Checker c;
  c.res.name = "axis-roots";
  int present = 0, bezout16 = 0, flagged = 0;
  std::map<int, int> real_counts;
  for (const auto& d : random_draws(o.seed, 100)) {
    const auto k = AECoefficients::blowup(d.a1, d.a2, d.b2, d.c1, d.c2);
    AEOptions ao;
    ao.solver.seed = o.seed;
    const auto rep = solve_blowup(k, ao);
    const CSystem sys = to_complex(build_blowup_system(k));
    int hits = 0;
    for (double x : {1.0, -1.0}) {
      CVector p(5);
      p << 1, -4 * d.a1, 0, 0, x;
      const bool listed = nearest_root(real_roots(rep), -4 * d.a1, 0, 0, x, 1e-8) != nullptr;
      if (listed && residual(sys, p) <= 1e-10) ++hits;
    }
    if (hits == 2) ++present;
    const int total = rep.bezout_account.found_v1 + rep.bezout_account.found_v0;
    if (total == 16) ++bezout16;
    else if (!rep.complete) ++flagged;
    real_counts[rep.n_real_v1]++;
  }
  c.expect(present == 100, "axis roots present in " + std::to_string(present) + "/100 draws");
  c.expect(bezout16 >= 95, "Bezout total 16 in " + std::to_string(bezout16) + "/100 draws");
  c.expect(bezout16 + flagged == 100, "short Bezout accounts without a flag");
  for (auto [n, cnt] : real_counts)
    c.expect(n == 2 || n == 4 || n == 6 || n == 8, "real root count " + std::to_string(n) + " observed");
  json rc = json::object();
  for (auto [n, cnt] : real_counts) rc[std::to_string(n)] = cnt;
  c.res.details = {{"draws", 100}, {"axis_present", present}, {"bezout16", bezout16}, {"flagged", flagged}, {"real_counts", rc}};
  return c.done();
}

CaseResult v0_case(const Options& o) {
  Checker c;
  c.res.name = "v0-closed-forms";
  int ok_pair = 0, ok_line = 0;
  for (const auto& d : random_draws(o.seed ^ 0x9e3779b97f4a7c15ULL, 20)) {
    const auto k = AECoefficients::blowup(d.a1, d.a2, d.b2, d.c1, d.c2);
    const double closed = v0_pair_determinant_closed_form(k);
    int pair = 0, line = 0;
    for (const auto& s : v0_solutions(k)) {
      if (s.chart == BlowupChart::V0W1) {
        const double sg = s.u.imag() > 0 ? 1.0 : -1.0;
        const bool t_ok = std::abs(s.t - cplx(0, -2 * sg * d.c2 / d.b2)) <= 1e-10 * (1 + std::abs(d.c2 / d.b2));
        const bool u_ok = std::abs(s.u - cplx(0, sg)) <= 1e-10;
        const bool det_ok = std::abs(s.cert_det - closed) <= 1e-8 * std::abs(closed);
        if (t_ok && u_ok && det_ok) ++pair;
      } else if (s.multiplicity == 2) {
        ++line;
      }
    }
    if (pair == 2) ++ok_pair;
    if (line == 1) ++ok_line;
  }
  c.expect(ok_pair == 20, "v=0 pair matches closed forms in " + std::to_string(ok_pair) + "/20 draws");
  c.expect(ok_line == 20, "t-line root has multiplicity 2 in " + std::to_string(ok_line) + "/20 draws");
  c.res.details = {{"draws", 20}, {"pair_ok", ok_pair}, {"line_ok", ok_line}};
  return c.done();
}

CaseResult continuation_case(const Options& o) {
  Checker c;
  c.res.name = "continuation-curvature";
  auto k = AECoefficients::blowup(1, 5, 1, 2, 2);
  k.e1 = 1;
  AEOptions ao;
  ao.solver.seed = o.seed;
  const auto rep = solve_blowup(k, ao);
  const auto* root = nearest_root(real_roots(rep), -4, 0, 0, 1, 1e-8);
  c.expect(root != nullptr, "root (-4, 0, 0, 1) missing");
  if (!root) return c.done();
  // N(r) sampled at h and 2h, N(0) = 0, N'(0) = 1; Richardson on the
  // one-sided second difference.
  auto N_at = [&](double r) {
    ContinuationOptions co;
    co.r_max = r;
    co.samples = 1;
    return continue_to_r(k, *root, co).points.back().N;
  };
  const double h = 1e-4;
  auto d2 = [&](double s) { return 2 * (N_at(s) - s) / (s * s); };
  const double est = 2 * d2(h) - d2(2 * h);
  c.expect(std::abs(est + 3) <= 1e-4, "N''(0) = " + fmt17(est) + ", expected -3");
  c.res.details = {{"N2_estimate", est}};
  return c.done();
}

VectorFieldSpec realized_field(const ReducedHamiltonian& rh) { return VectorFieldSpec(realize_hamiltonian(rh).spec); }

CaseResult sr_elliptic_case(const Options& o) {
  Checker c;
  c.res.name = "sr-elliptic";
  const auto rh = reduced_from_leading(SymmetryKind::SR, 1, 0, 0);
  const auto rep = analyze_sr(rh);
  c.expect(rep.geometry == PeriodGeometry::Elliptic, "geometry " + to_string(rep.geometry));
  c.expect(rep.morse.geometry == rep.geometry, "Morse check disagrees");
  c.expect(rep.nonsymmetric_branches.size() == 2, "branch count " + std::to_string(rep.nonsymmetric_branches.size()));
  const auto vf = realized_field(rh);
  json orbits = json::array();
  double E[2] = {0, 0};
  for (std::size_t b = 0; b < rep.nonsymmetric_branches.size() && b < 2; ++b) {
    const auto& p = rep.nonsymmetric_branches[b].points.back();
    try {
      const auto r = shoot_generic(vf, to_real(point_from_invariants(p.N, p.C, p.D, p.delta)), p.period, Anchor::H2);
      c.expect(r.residual <= 1e-9, "residual " + fmt17(r.residual));
      c.expect(r.symmetry == OrbitSymmetry::NonSymmetric_paired, "symmetry " + to_string(r.symmetry));
      c.expect(r.partner && std::abs(r.partner->energy + r.energy) <= 1e-9, "partner energy not opposite");
      E[b] = r.energy;
      orbits.push_back(orbit_json(r));
    } catch (const NoConvergence& e) {
      c.expect(false, e.what());
    }
  }
  c.expect(std::abs(E[0] + E[1]) <= 1e-9 && E[0] != 0.0, "branch energies not opposite");
  c.res.details = {{"geometry", to_string(rep.geometry)}, {"morse_det", rep.morse.det}, {"orbits", orbits}};
  (void)o;
  return c.done();
}

CaseResult sr_hyperbolic_case(const Options& o) {
  Checker c;
  c.res.name = "sr-hyperbolic";
  const auto rh = reduced_from_leading(SymmetryKind::SR, 0, 1, 0);
  const auto rep = analyze_sr(rh);
  c.expect(rep.geometry == PeriodGeometry::Hyperbolic, "geometry " + to_string(rep.geometry));
  c.expect(rep.morse.geometry == rep.geometry, "Morse check disagrees");
  c.expect(rep.nonsymmetric_branches.empty(), "unexpected branches");
  const int found = offcone_search(realized_field(rh), 0, 1, 0, o.seed, 50);
  c.expect(found == 0, std::to_string(found) + " off-cone orbits found");
  c.res.details = {{"geometry", to_string(rep.geometry)}, {"morse_det", rep.morse.det}, {"offcone_converged", found}};
  return c.done();
}

CaseResult sr_symmetric_case(const Options& o) {
  Checker c;
  c.res.name = "sr-symmetric-family";
  const auto rh = reduced_from_leading(SymmetryKind::SR, 1, 0, 0);
  const auto vf = realized_field(rh);
  const auto fam = symmetric_family(rh, radii_or(o, {1e-2, 5e-3, 2.5e-3}), 8);
  std::vector<double> a2, dT;
  double worst = 0;
  int converged = 0;
  for (const auto& s : fam) {
    try {
      const auto r = shoot_R_symmetric(vf, s.z.z1, s.period);
      ++converged;
      worst = std::max(worst, std::abs(r.period - s.period));
      c.expect(r.symmetry == OrbitSymmetry::R_symmetric, "symmetry " + to_string(r.symmetry));
      c.expect(std::abs(r.energy) <= 1e-9, "|H| = " + fmt17(std::abs(r.energy)));
      a2.push_back(s.radius * s.radius);
      dT.push_back(r.period - 2 * kPi);
    } catch (const NoConvergence& e) {
      c.expect(false, e.what());
    }
  }
  c.expect(converged == static_cast<int>(fam.size()), "converged " + std::to_string(converged) + "/" + std::to_string(fam.size()));
  c.expect(worst <= 1e-6, "worst period error " + fmt17(worst));
  const auto fit = a2.size() >= 2 ? linear_fit(a2, dT) : LinearFit{};
  c.expect(fit.r2 >= 0.999, "R^2 = " + fmt17(fit.r2));
  c.res.details = {{"samples", fam.size()}, {"worst_period_error", worst}, {"slope", fit.slope}, {"r2", fit.r2}};
  return c.done();
}

CaseResult fix_s_case(const Options& o) {
  Checker c;
  c.res.name = "ae-fix-s-nonexistence";
  const auto k = AECoefficients::blowup(1, 5, 1, 2, 2);
  const auto s = symmetric_nonexistence(k);
  c.expect(std::abs(s.liapunov_coefficient - 3) <= 1e-15, "Liapunov coefficient " + fmt17(s.liapunov_coefficient));
  c.expect(s.verdict == SymmetricVerdict::NoSymmetricOrbits, "verdict " + to_string(s.verdict));
  const auto ctl = fix_s_control(realized_field(k.to_reduced()), o.seed, 50, 10);
  c.expect(ctl.converged == 0, std::to_string(ctl.converged) + " Fix S orbits converged");
  c.expect(ctl.monotone == ctl.trajectories, "V monotone on " + std::to_string(ctl.monotone) + "/" + std::to_string(ctl.trajectories));
  c.res.details = {{"liapunov_coefficient", s.liapunov_coefficient},
                   {"attempts", ctl.attempts},
                   {"converged", ctl.converged},
                   {"monotone_V", ctl.monotone}};
  return c.done();
}

CaseResult combined_case(const Options& o) {
  Checker c;
  c.res.name = "combined";
  const auto yes = reduced_from_leading(SymmetryKind::Combined, 1, 0);
  const auto no = reduced_from_leading(SymmetryKind::Combined, 0, 1);
  const auto vf = realized_field(yes);
  const auto rs = rs_branches(yes, {0.01, 2});
  c.expect(rs.branches.size() == 2, "(1,0): " + std::to_string(rs.branches.size()) + " RS branches");
  c.expect(rs_branches(no).branches.empty(), "(0,1): RS branches reported");
  int rs_ok = 0;
  for (const auto& b : rs.branches) {
    const auto& p = b.points.back();
    try {
      const auto r = shoot_generic(vf, to_real(point_from_invariants(p.N, p.C, p.D, p.delta)), p.period, Anchor::H2);
      if (r.symmetry == OrbitSymmetry::RSProduct_symmetric && r.residual <= 1e-9) ++rs_ok;
    } catch (const NoConvergence&) {
    }
  }
  c.expect(rs_ok == 2, "RS branch orbits verified: " + std::to_string(rs_ok));

  // Cone family: every sample R-symmetric, the Fix S / Fix(S,pi) ones RS.
  int cone_ok = 0, s_sym = 0;
  const auto cone = cone_family(yes, {1e-2, 5e-3, 2.5e-3}, 8);
  std::vector<double> a2, dT;
  for (const auto& cs : cone) {
    try {
      const auto r = shoot_R_symmetric(vf, cs.sample.z.z1, cs.sample.period);
      const auto want = cs.annotation == ConeAnnotation::None ? OrbitSymmetry::R_symmetric : OrbitSymmetry::RS_symmetric;
      if (r.symmetry == want && std::abs(r.period - cs.sample.period) <= 1e-6 && std::abs(r.energy) <= 1e-9) ++cone_ok;
      if (r.symmetry == OrbitSymmetry::RS_symmetric) ++s_sym;
      a2.push_back(cs.sample.radius * cs.sample.radius);
      dT.push_back(r.period - 2 * kPi);
    } catch (const NoConvergence&) {
    }
  }
  c.expect(cone_ok == static_cast<int>(cone.size()), "cone samples verified " + std::to_string(cone_ok) + "/" + std::to_string(cone.size()));
  // Per radius: angles 0, pi on the Fix S orbit and pi/2, 3pi/2 on the Fix(S,pi) orbit.
  c.expect(s_sym == 12, "S-symmetric cone samples " + std::to_string(s_sym));
  const auto fit = a2.size() >= 2 ? linear_fit(a2, dT) : LinearFit{};
  c.expect(fit.r2 >= 0.999, "cone period fit R^2 " + fmt17(fit.r2));
  c.res.details = {{"rs_verified", rs_ok}, {"cone_verified", cone_ok}, {"s_symmetric", s_sym}, {"r2", fit.r2}};
  (void)o;
  return c.done();
}

CaseResult torus_case(const Options&) {
  Checker c;
  c.res.name = "combined-torus";
  const int n = 64;
  const std::string table = emit_torus_plot_data(torus_fixsets(n));
  std::istringstream in(table);
  std::string line;
  std::getline(in, line);
  std::map<std::string, int> counts;
  bool fixr_diag = true;
  while (std::getline(in, line)) {
    const auto p1 = line.find(','), p2 = line.rfind(',');
    const std::string a = line.substr(0, p1), b = line.substr(p1 + 1, p2 - p1 - 1), tag = line.substr(p2 + 1);
    counts[tag]++;
    if (tag == "FixR" && a != b) fixr_diag = false;
  }
  c.expect(counts["FixSR"] == 2, "FixSR rows " + std::to_string(counts["FixSR"]));
  c.expect(fixr_diag, "FixR row with theta2 != theta1");
  for (const char* t : {"FixR", "FixS", "FixSpi"})
    c.expect(counts[t] == n, std::string(t) + " rows " + std::to_string(counts[t]));
  c.res.details = {{"rows", counts}};
  return c.done();
}

}  // namespace

const std::vector<CorpusCase>& corpus() {
  static const std::vector<CorpusCase> cases = {
      {"two-real-roots", "(a1,a2,b2,c1,c2) = (1,5,1,2,2): two real roots, determinants +-20",
       [](const Options& o) {
         return listed_roots_case("two-real-roots", AECoefficients::blowup(1, 5, 1, 2, 2), 2, {exact_row(-4, 0, 0, 1, 20)}, o);
       }},
      {"four-real-roots", "(1,5,-2,2,2): four real roots",
       [](const Options& o) {
         return listed_roots_case("four-real-roots", AECoefficients::blowup(1, 5, -2, 2, 2), 4,
                                  {exact_row(-4, 0, 0, 1, 692), rounded_row(1.5602, -0.9681, 0.0855, 0.2354, 35.6351, 1e-3)}, o);
       }},
      {"six-real-roots", "(-2,-11,-5,1,2): six real roots",
       [](const Options& o) {
         return listed_roots_case("six-real-roots", AECoefficients::blowup(-2, -11, -5, 1, 2), 6,
                                  {ListedRoot{8, 0, 0, 1, -20816, 1e-10, 1e-6, true},
                                   rounded_row(-2.5592, 0.0346, 0.4980, -0.8665, -164.8123, 1e-3),
                                   rounded_row(-3.7663, 0.1529, 0.8984, -0.4118, 1827.2294, 1e-3)},
                                  o);
       }},
      {"eight-real-roots", "(1,-4,-1,1,2): eight real roots",
       [](const Options& o) {
         return listed_roots_case("eight-real-roots", AECoefficients::blowup(1, -4, -1, 1, 2), 8,
                                  {exact_row(-4, 0, 0, 1, 4),
                                   rounded_row(-4.9432, -0.2615, 0.2274, -0.9380, -13.8083, 1e-3),
                                   rounded_row(-2.8537, 0.8527, 0.4155, 0.3165, -43.7450, 1e-3),
                                   rounded_row(-6.4260, 0.2940, 0.8063, -0.5133, 111.6657, 1e-3)},
                                  o);
       }},
      {"axis-roots", "100 random draws: axis roots present, Bezout totals, real counts", axis_roots_case},
      {"v0-closed-forms", "20 random draws: v=0 pair and t-line multiplicity", v0_case},
      {"continuation-curvature", "e1 = 1: N''(0) = -3 along the continued root", continuation_case},
      {"sr-elliptic", "(n,c,d) = (1,0,0): two non-symmetric orbits with opposite energies", sr_elliptic_case},
      {"sr-hyperbolic", "(n,c,d) = (0,1,0): no branches, no off-cone orbits", sr_hyperbolic_case},
      {"sr-symmetric-family", "(1,0,0): R-symmetric orbits at 8 angles x 3 radii", sr_symmetric_case},
      {"ae-fix-s-nonexistence", "(1,5,1,2,2) realized: no orbits in Fix S, V monotone", fix_s_case},
      {"combined", "(n,c) = (1,0) and (0,1): RS branches and cone orbits", combined_case},
      {"combined-torus", "torus loci table: two FixSR points", torus_case},
  };
  return cases;
}

// ---------------------------------------------------------------- driver

namespace {

json run_mode(const Options& o, int& code) {
  code = kOk;
  if (o.mode == "reproduce") {
    json cases = json::array();
    bool all_pass = true;
    // Cases are independent; run them concurrently and report in corpus order.
    std::vector<std::pair<const CorpusCase*, std::future<CaseResult>>> jobs;
    for (const auto& cc : corpus())
      if (o.all || cc.name == o.case_name) jobs.emplace_back(&cc, std::async(std::launch::async, cc.run, o));
    const bool matched = !jobs.empty();
    for (auto& [ccp, fut] : jobs) {
      const auto& cc = *ccp;
      const auto r = fut.get();
      all_pass = all_pass && r.pass;
      cases.push_back({{"name", r.name},
                       {"description", cc.description},
                       {"pass", r.pass},
                       {"status", r.pass ? "PASS" : "FAIL"},
                       {"failures", r.failures},
                       {"details", r.details}});
    }
    if (!matched) {
      std::string names;
      for (const auto& cc : corpus()) names += (names.empty() ? "" : ", ") + cc.name;
      throw ValidationError("--case", "unknown case '" + o.case_name + "' (known: " + names + ")");
    }
    if (!all_pass) code = kRegression;
    return {{"cases", cases}, {"all_pass", all_pass}};
  }

  const json doc = parse_document(read_file(o.input));
  if (o.mode == "derive") return derive_json(doc, o);
  if (o.mode == "verify") {
    bool ok = true;
    json r = verify_json(doc, o, ok);
    if (!ok) code = kNumerical;
    return r;
  }
  const auto sys = parse_system(doc, kind_for_mode(o.mode));
  if (o.mode == "analyze-sr") return analyze_sr_json(sys, o);
  if (o.mode == "analyze-ae") return analyze_ae_json(sys, o);
  if (o.mode == "analyze-combined") return analyze_combined_json(sys, o);
  if (o.mode == "roots") return roots_json(sys, o);
  throw ValidationError("mode", "unknown mode '" + o.mode + "'");
}

std::string render_table(const Options& o, const json& results) {
  if (o.mode == "analyze-sr") return sr_table(results);
  if (o.mode == "analyze-ae") return ae_table(results);
  if (o.mode == "roots") return roots_table(results);
  if (o.mode == "verify") return verify_table(results);
  if (o.mode == "derive") return derive_table(results);
  if (o.mode == "reproduce") return reproduce_table(results);
  // analyze-combined: the torus loci for external plotting.
  TorusFixsets t;
  for (const auto& l : results.at("torus").at("lines")) {
    TorusLocus locus{l["name"].get<std::string>(), l["points"].get<std::vector<std::pair<double, double>>>()};
    t.lines.push_back(locus);
  }
  t.fix_sr = results["torus"]["fix_sr"].get<std::vector<std::pair<double, double>>>();
  return emit_torus_plot_data(t);
}

int classify_exception(std::ostream& err) {
  try {
    throw;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const AnalysisError& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    const bool input = e.kind() == AnalysisError::Kind::BadInput || e.kind() == AnalysisError::Kind::AllLeadingZero;
    return input ? kValidation : kNumerical;
  } catch (const NormalFormError& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return e.kind() == NormalFormError::Kind::InvalidHamiltonian ? kValidation : kNumerical;
  } catch (const SolverError& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return e.kind() == SolverError::Kind::BadInput ? kValidation : kNumerical;
  } catch (const NoConvergence& e) {
    err << "error (NoConvergence): " << e.what() << '\n';
    return kNumerical;
  } catch (const StepFailure& e) {
    err << "error (StepFailure): " << e.what() << '\n';
    return kNumerical;
  } catch (const NumericalFailure& e) {
    err << "error: " << e.what() << '\n';
    return kNumerical;
  } catch (const json::exception& e) {
    err << "error: malformed field: " << e.what() << '\n';
    return kValidation;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumerical;
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Periodic orbits near a 1:-1 resonance with reversing or equivariant involutions"};
  app.require_subcommand(1);
  Options o;
  std::string seed_text;
  auto common = [&](CLI::App* s, bool needs_input) {
    auto* in = s->add_option("--input", o.input, "input JSON document");
    if (needs_input) in->required();
    s->add_option("--output", o.output, "write here instead of stdout");
    s->add_option("--seed", o.seed, "RNG seed for solvers and controls");
    s->add_option("--tol", o.tol, "closing tolerance for verification")->check(CLI::PositiveNumber);
    s->add_option("--sweep-radii", o.sweep_radii, "sample radii, comma separated")->delimiter(',')->check(CLI::PositiveNumber);
    s->add_option("--format", o.format, "report (JSON) or table (CSV)")->check(CLI::IsMember({"report", "table"}));
  };
  const std::vector<std::pair<std::string, std::string>> modes = {
      {"analyze-sr", "reversing-symplectic case: symmetric family and non-symmetric branches"},
      {"analyze-ae", "equivariant-antisymplectic case: blow-up roots, certification, continuation"},
      {"analyze-combined", "both involutions: cone family, RS branches, torus loci"},
      {"derive", "reduced Hamiltonian from a polynomial H"},
      {"roots", "blow-up system roots only"},
      {"verify", "integrate and shoot from the seeds of a report (or an input document)"}};
  for (const auto& [name, help] : modes) common(app.add_subcommand(name, help), true);
  auto* rep = app.add_subcommand("reproduce", "run the built-in regression corpus");
  common(rep, false);
  rep->add_option("--case", o.case_name, "one corpus case");
  rep->add_flag("--all", o.all, "every corpus case");

  std::vector<std::string> args;
  for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  }
  for (const auto* s : app.get_subcommands()) o.mode = s->get_name();
  if (o.mode == "reproduce" && !o.all && o.case_name.empty()) {
    err << "error: reproduce needs --case NAME or --all\n";
    return kValidation;
  }

  int code = kOk;
  json results;
  try {
    results = run_mode(o, code);
  } catch (...) {
    return classify_exception(err);
  }

  std::string body;
  if (o.format == "table") {
    try {
      body = render_table(o, results);
    } catch (...) {
      return classify_exception(err);
    }
  } else {
    json request = {{"mode", o.mode}};
    if (!o.input.empty()) request["input"] = parse_document(read_file(o.input));
    if (o.mode == "reproduce") request["case"] = o.all ? "all" : o.case_name;
    json options = {{"seed", o.seed}, {"format", o.format}};
    if (o.tol) options["tol"] = *o.tol;
    if (!o.sweep_radii.empty()) options["sweep_radii"] = o.sweep_radii;
    request["options"] = options;
    json report = {{"request", request},
                   {"provenance", {{"tool", "symorb"}, {"version", kVersion}, {"seed", o.seed}, {"timestamp", timestamp_now()}}},
                   {"results", results}};
    report["warnings"] = results.contains("warnings") ? results["warnings"] : json::array();
    report["exit_code"] = code;
    body = report.dump(2) + "\n";
  }
  if (o.output.empty()) {
    out << body;
  } else {
    std::ofstream f(o.output, std::ios::binary);
    if (!f) {
      err << "error: cannot write '" << o.output << "'\n";
      return kValidation;
    }
    f << body;
  }
  return code;
}

}  // namespace symorb::cli
