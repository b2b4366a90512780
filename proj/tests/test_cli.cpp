#include <doctest.h>

#include "symorb/cli.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

using namespace symorb;
using cli::json;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "symorb");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string temp_file(const std::string& name, const std::string& body) {
  const std::string path = "cli_test_" + name;
  std::ofstream(path) << body;
  return path;
}

json strip_timestamp(json j) {
  j["provenance"].erase("timestamp");
  return j;
}

}  // namespace

TEST_CASE("malformed JSON is a validation error with line and column") {
  const auto in = temp_file("bad.json", "{\n  \"kind\": \"SR\",\n  \"coefficients\": {\"n\": 1,, }\n}\n");
  const auto r = run_cli({"analyze-sr", "--input", in});
  CHECK(r.code == 2);
  CHECK(r.err.find("line 3, column") != std::string::npos);
}

TEST_CASE("field-level validation errors name the field") {
  SUBCASE("unknown coefficient") {
    const auto r = run_cli({"analyze-sr", "--input", temp_file("u.json", R"({"kind":"SR","coefficients":{"n":1,"q":2}})")});
    CHECK(r.code == 2);
    CHECK(r.err.find("coefficients.q") != std::string::npos);
  }
  SUBCASE("wrong type") {
    const auto r = run_cli({"analyze-ae", "--input", temp_file("t.json", R"({"kind":"AE","coefficients":{"a1":"one"}})")});
    CHECK(r.code == 2);
    CHECK(r.err.find("coefficients.a1") != std::string::npos);
  }
  SUBCASE("combined with a linear D term") {
    const auto r = run_cli({"analyze-combined", "--input", temp_file("d.json", R"({"kind":"COMBINED","coefficients":{"n":1,"d":1}})")});
    CHECK(r.code == 2);
  }
  SUBCASE("Hamiltonian without the required anti-invariance") {
    // x1^4 is not odd under z1 <-> z2.
    const auto r = run_cli({"derive", "--input", temp_file("h.json",
        R"({"kind":"SR","hamiltonian":[{"exponent":[2,0,0,0],"coefficient":1},{"exponent":[0,0,2,0],"coefficient":-1},
            {"exponent":[4,0,0,0],"coefficient":1}]})")});
    CHECK(r.code == 2);
    CHECK(r.err.find("hamiltonian") != std::string::npos);
  }
  SUBCASE("missing input flag") { CHECK(run_cli({"roots"}).code == 2); }
  SUBCASE("unknown corpus case") { CHECK(run_cli({"reproduce", "--case", "nope"}).code == 2); }
}

TEST_CASE("reports are deterministic apart from the timestamp") {
  const auto in = temp_file("ae.json", R"({"kind":"AE","coefficients":{"a1":1,"a2":5,"b2":-2,"c1":2,"c2":2}})");
  const auto a = run_cli({"roots", "--input", in, "--seed", "7"});
  const auto b = run_cli({"roots", "--input", in, "--seed", "7"});
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(strip_timestamp(json::parse(a.out)).dump() == strip_timestamp(json::parse(b.out)).dump());
  // Round trip through the serializer is lossless.
  const json j = json::parse(a.out);
  CHECK(json::parse(j.dump()) == j);
  // Input coefficients are echoed.
  CHECK(j["request"]["input"]["coefficients"]["b2"] == -2);
}

TEST_CASE("analyze-sr, hyperbolic leading coefficients") {
  const auto r = run_cli({"analyze-sr", "--input", temp_file("h.json", R"({"kind":"SR","coefficients":{"n":0,"c":1,"d":0}})")});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["results"]["geometry"] == "Hyperbolic");
  CHECK(j["results"]["nonsymmetric_branches"].empty());
  CHECK(j["results"]["morse"]["geometry"] == "Hyperbolic");
}

TEST_CASE("roots lists the v = 1 chart with four real roots") {
  const auto in = temp_file("r.json", R"({"kind":"AE","coefficients":{"a1":1,"a2":5,"b2":-2,"c1":2,"c2":2}})");
  const auto r = run_cli({"roots", "--input", in});
  REQUIRE(r.code == 0);
  const json res = json::parse(r.out)["results"];
  int mult = 0, real = 0;
  bool listed = false;
  for (const auto& s : res["solutions"]) {
    if (s["chart"] != "v=1") continue;
    mult += s["multiplicity"].get<int>();
    if (s["is_real"].get<bool>()) {
      ++real;
      const double t = s["t"][0], u = s["u"][0], w = s["w"][0], x = s["x"][0];
      if (std::abs(t - 1.5602) <= 5e-4 && std::abs(u + 0.9681) <= 5e-4 && std::abs(std::abs(w) - 0.0855) <= 5e-4 &&
          std::abs(std::abs(x) - 0.2354) <= 5e-4 && w * x > 0)
        listed = true;
    }
  }
  CHECK(mult == 12);
  CHECK(real == 4);
  CHECK(listed);

  const auto t = run_cli({"roots", "--input", in, "--format", "table"});
  REQUIRE(t.code == 0);
  CHECK(t.out.rfind("chart,index,", 0) == 0);
  CHECK(t.out.find("t_re_4dp") != std::string::npos);
}

TEST_CASE("combined table has the torus loci") {
  const auto r = run_cli({"analyze-combined", "--input", temp_file("c.json", R"({"kind":"COMBINED","coefficients":{"n":1,"c":0}})"),
                          "--format", "table"});
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  CHECK(line == "theta1,theta2,locus");
  int fixsr = 0, fixr = 0, diag = 0;
  while (std::getline(in, line)) {
    const auto p1 = line.find(','), p2 = line.rfind(',');
    const std::string tag = line.substr(p2 + 1);
    if (tag == "FixSR") ++fixsr;
    if (tag == "FixR") {
      ++fixr;
      if (line.substr(0, p1) == line.substr(p1 + 1, p2 - p1 - 1)) ++diag;
    }
  }
  CHECK(fixsr == 2);
  CHECK(fixr > 0);
  CHECK(diag == fixr);
}

TEST_CASE("derive recovers n from a hand-written quartic") {
  // A - B - 2 (A - B)(A + B) = A - B - 2 A^2 + 2 B^2 with A = x1^2 + y1^2,
  // B = x2^2 + y2^2; this is H2 - 2 delta N, so n = 1, c = d = 0.
  const std::string doc = R"({"kind":"SR","hamiltonian":[
    {"exponent":[2,0,0,0],"coefficient":1},{"exponent":[0,2,0,0],"coefficient":1},
    {"exponent":[0,0,2,0],"coefficient":-1},{"exponent":[0,0,0,2],"coefficient":-1},
    {"exponent":[4,0,0,0],"coefficient":-2},{"exponent":[2,2,0,0],"coefficient":-4},{"exponent":[0,4,0,0],"coefficient":-2},
    {"exponent":[0,0,4,0],"coefficient":2},{"exponent":[0,0,2,2],"coefficient":4},{"exponent":[0,0,0,4],"coefficient":2}]})";
  const auto r = run_cli({"derive", "--input", temp_file("der.json", doc)});
  REQUIRE(r.code == 0);
  const json c = json::parse(r.out)["results"]["coefficients"];
  CHECK(c["n"].get<double>() == doctest::Approx(1).epsilon(1e-12));
  CHECK(std::abs(c["c"].get<double>()) < 1e-12);
  CHECK(std::abs(c["d"].get<double>()) < 1e-12);
}

TEST_CASE("verify closes the orbits of an analyze-sr report") {
  const auto in = temp_file("sr.json", R"({"kind":"SR","coefficients":{"n":1,"c":0,"d":0}})");
  const auto rep = run_cli({"analyze-sr", "--input", in, "--sweep-radii", "1e-2,5e-3"});
  REQUIRE(rep.code == 0);
  const auto v = run_cli({"verify", "--input", temp_file("sr_report.json", rep.out)});
  CHECK(v.code == 0);
  const json j = json::parse(v.out)["results"];
  CHECK(j["verified"] == true);
  CHECK(j["orbits"].size() == 16 + 20);
  CHECK(j["period_fit"]["r2"].get<double>() >= 0.999);

  // An unattainable closing tolerance is a numerical failure.
  CHECK(run_cli({"verify", "--input", in, "--sweep-radii", "1e-2", "--tol", "1e-30"}).code == 3);
}

TEST_CASE("reproduce runs named cases") {
  const auto r = run_cli({"reproduce", "--case", "two-real-roots"});
  CHECK(r.code == 0);
  const json j = json::parse(r.out)["results"]["cases"][0];
  CHECK(j["status"] == "PASS");
  CHECK(j["details"]["n_real"] == 2);
  CHECK(std::abs(std::abs(j["details"]["roots"][0]["det"].get<double>()) - 20) <= 1e-9);
}

TEST_CASE("verify on an equivariant report: families close, Fix S stays empty") {
  const auto in = temp_file("ae_v.json", R"({"kind":"AE","coefficients":{"a1":1,"a2":-1,"b2":0,"c1":-1,"c2":-2}})");
  const auto rep = run_cli({"analyze-ae", "--input", in});
  REQUIRE(rep.code == 0);
  const auto v = run_cli({"verify", "--input", temp_file("ae_v_report.json", rep.out)});
  CHECK(v.code == 0);
  const json j = json::parse(v.out)["results"];
  int verified = 0;
  for (const auto& o : j["orbits"])
    if (o["status"] == "verified") {
      ++verified;
      CHECK(o["orbit"]["symmetry"] == "NonSymmetric_paired");
    }
  CHECK(verified > 0);
  CHECK(j["fix_s_control"]["converged"] == 0);

  // b2 cannot be realized: it is dropped, with a warning, and seeds recomputed.
  const auto w = run_cli({"verify", "--input", temp_file("ae_b2.json", R"({"kind":"AE","coefficients":{"a1":1,"a2":5,"b2":1,"c1":2,"c2":2}})")});
  CHECK(w.code == 0);
  CHECK(json::parse(w.out)["warnings"].size() == 2);
}
