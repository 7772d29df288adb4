#include <cmath>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

#include "nodeembed/nodeembed.h"

using nlohmann::json;

namespace {

// Owns a string returned by the library.
struct Str {
  char* p = nullptr;
  ~Str() { ne_string_free(p); }
  std::string str() const { return p ? p : ""; }
  json parse() const { return json::parse(p); }
};

ne_funcspec* map1(const char* e, const char* domain = nullptr) {
  ne_funcspec* f = nullptr;
  if (!domain) {
    EXPECT_EQ(ne_funcspec_parse("f", 1, &e, 1, &f), NE_OK) << ne_last_error();
    return f;
  }
  const json j = {{"name", "f"}, {"n_in", 1}, {"components", {e}}, {"domain", json::parse(domain)}};
  EXPECT_EQ(ne_funcspec_from_json(j.dump().c_str(), &f), NE_OK) << ne_last_error();
  return f;
}

}  // namespace

TEST(CApi, MapsParseEvaluateAndReportErrors) {
  ne_funcspec* f = map1("x0^2 + 1");
  double x = 3, y = 0;
  ASSERT_EQ(ne_funcspec_eval(f, &x, &y), NE_OK);
  EXPECT_EQ(y, 10.0);
  EXPECT_EQ(ne_funcspec_n_in(f), 1);
  Str j;
  ASSERT_EQ(ne_funcspec_to_json(f, &j.p), NE_OK);
  EXPECT_EQ(j.parse()["components"][0], "((x0^2) + 1)");
  ne_funcspec_free(f);

  const char* bad = "x0*(";
  ne_funcspec* g = nullptr;
  EXPECT_EQ(ne_funcspec_parse("g", 1, &bad, 1, &g), NE_EINPUT);
  EXPECT_EQ(g, nullptr);
  EXPECT_NE(std::string(ne_last_error()).find("position 4"), std::string::npos) << ne_last_error();

  ne_funcspec* ln = map1("ln(x0)");
  x = -1;
  EXPECT_EQ(ne_funcspec_eval(ln, &x, &y), NE_EINPUT);
  ne_funcspec_free(ln);

  EXPECT_EQ(ne_funcspec_from_json("{not json", &g), NE_EINPUT);
  EXPECT_EQ(ne_funcspec_eval(nullptr, &x, &y), NE_EINPUT);
  ne_funcspec_free(nullptr);
}

TEST(CApi, ConstructEvaluateVerify) {
  ne_arch* a = nullptr;
  Str cite;
  ASSERT_EQ(ne_arch_construct("monomial", R"({"c": 2, "alpha": 3, "T": 1})", &a, &cite.p), NE_OK)
      << ne_last_error();
  EXPECT_FALSE(cite.str().empty());
  double x = 1.5, y = 0;
  ASSERT_EQ(ne_arch_evaluate(a, &x, &y), NE_OK);
  EXPECT_NEAR(y, 2 * 1.5 * 1.5 * 1.5, 1e-6);

  ne_funcspec* target = map1("2*x0^3");
  Str report, table;
  const char* grid = R"({"count": 64, "domain": [{"lo": 0.5, "hi": 2, "lo_open": false, "hi_open": false}]})";
  EXPECT_EQ(ne_verify(a, target, grid, 1e-6, &report.p, &table.p), NE_OK) << ne_last_error();
  EXPECT_TRUE(report.parse()["pass"].get<bool>());
  EXPECT_LE(report.parse()["max_err"].get<double>(), 1e-6);
  EXPECT_EQ(table.str().substr(0, 3), "x1,");

  // JSON round trip through the C surface
  Str text;
  ASSERT_EQ(ne_arch_to_json(a, &text.p), NE_OK);
  ne_arch* b = nullptr;
  ASSERT_EQ(ne_arch_from_json(text.p, &b), NE_OK) << ne_last_error();
  double yb = 0;
  ASSERT_EQ(ne_arch_evaluate(b, &x, &yb), NE_OK);
  EXPECT_EQ(y, yb);
  ne_arch_free(b);
  ne_arch_free(a);
  ne_funcspec_free(target);
}

TEST(CApi, VerifyFailureAndInputErrors) {
  ne_arch* zero = nullptr;  // c = 1 gives the field f = 0
  ASSERT_EQ(ne_arch_construct("linear", R"({"c": 1})", &zero, nullptr), NE_OK);
  ne_funcspec* neg = map1("neg(x0)", R"([{"lo": -1, "hi": 1, "lo_open": false, "hi_open": false}])");
  Str report;
  EXPECT_EQ(ne_verify(zero, neg, nullptr, 1e-6, &report.p, nullptr), NE_FAIL);
  EXPECT_FALSE(report.parse()["pass"].get<bool>());
  EXPECT_NEAR(report.parse()["max_err"].get<double>(), 2.0, 1e-12);

  ne_arch* none = nullptr;
  EXPECT_EQ(ne_arch_construct("linear", R"({"c": -1})", &none, nullptr), NE_EINPUT);
  EXPECT_NE(std::string(ne_last_error()).find("not the time-T map"), std::string::npos);
  EXPECT_EQ(ne_arch_from_json(R"({"variant": "basic"})", &none), NE_EINPUT);
  EXPECT_EQ(ne_arch_set_tolerances(zero, -1, 1e-12), NE_EINPUT);
  ne_arch_free(zero);
  ne_funcspec_free(neg);
}

TEST(CApi, FlowAndBlowUp) {
  ne_funcspec* f = map1("x0");
  double x = 1, out = 0;
  Str csv;
  ASSERT_EQ(ne_flow(f, &x, 1, 1e-10, 1e-12, &out, &csv.p), NE_OK);
  EXPECT_NEAR(out, std::exp(1.0), 1e-8);
  EXPECT_EQ(csv.str().substr(0, 5), "t,h1\n");
  ne_funcspec_free(f);

  ne_funcspec* sq = map1("x0^2");
  EXPECT_EQ(ne_flow(sq, &x, 2, 1e-9, 1e-12, &out, nullptr), NE_ENUMERIC);
  EXPECT_NE(std::string(ne_last_error()).find("blew-up"), std::string::npos) << ne_last_error();
  ne_funcspec_free(sq);
}

TEST(CApi, SeriesJuliaJabotinsky) {
  const double phi[] = {0, 1, 1};
  Str s;
  ASSERT_EQ(ne_series_iterative_logarithm(phi, 3, 4, &s.p), NE_OK) << ne_last_error();
  const auto coeffs = s.parse()["coeffs"].get<std::vector<double>>();
  ASSERT_EQ(coeffs.size(), 5u);
  EXPECT_NEAR(coeffs[2], 1, 1e-12);
  EXPECT_NEAR(coeffs[3], -1, 1e-12);
  EXPECT_NEAR(coeffs[4], 1.5, 1e-12);

  Str m;
  ASSERT_EQ(ne_series_monomial(2, 3, 12, &m.p), NE_OK);
  for (double c : m.parse()["coeffs"]) EXPECT_EQ(c, 0.0);

  ne_funcspec* f = map1("x0");
  double out = 0;
  ne_funcspec* riccati = map1("x0^2 + 1");
  ASSERT_EQ(ne_jabotinsky_flow(riccati, 0, 1, &out), NE_OK) << ne_last_error();
  EXPECT_NEAR(out, std::tan(1.0), 1e-9);
  ne_funcspec_free(riccati);
  EXPECT_EQ(ne_jabotinsky_flow(f, 1, 1, &out), NE_EINPUT);  // f vanishes at 0
  ne_funcspec* ex = map1("2.718281828459045*x0");
  Str rep;
  ASSERT_EQ(ne_julia_residual(f, ex, R"({"count": 16, "domain": [{"lo": -1, "hi": 1}]})", &rep.p, nullptr), NE_OK)
      << ne_last_error();
  EXPECT_LE(rep.parse()["max"].get<double>(), 1e-12);
  ne_funcspec_free(ex);
  ne_funcspec_free(f);
}

TEST(CApi, DiagnoseMorseifyAntipodal) {
  ne_funcspec* sq = map1("x0^2", R"([{"lo": -1, "hi": 1}])");
  Str d;
  ASSERT_EQ(ne_diagnose(sq, nullptr, &d.p), NE_OK) << ne_last_error();
  EXPECT_EQ(d.parse()["verdicts"]["node3"], "NON-EMBEDDABLE");
  Str m;
  ASSERT_EQ(ne_morseify(sq, 0.1, 7, nullptr, &m.p), NE_OK);
  EXPECT_TRUE(m.parse()["morse"].get<bool>());
  ne_funcspec_free(sq);

  ne_funcspec* unbounded = map1("x0^2");
  EXPECT_EQ(ne_diagnose(unbounded, nullptr, &d.p), NE_EINPUT);  // needs a bounded grid
  ne_funcspec_free(unbounded);

  const char* e = "x0";
  ne_funcspec* g = nullptr;
  ASSERT_EQ(ne_funcspec_parse("g", 2, &e, 1, &g), NE_OK);
  double theta = 0, res = 1;
  ASSERT_EQ(ne_antipodal_point(g, 1e-10, &theta, &res), NE_OK);
  EXPECT_NEAR(theta, M_PI / 2, 1e-10);
  EXPECT_LE(res, 1e-10);
  ne_funcspec_free(g);
}

TEST(CApi, Torus) {
  const json t = {{"phi", {{"name", "phi"}, {"n_in", 1}, {"components", {"2*x0"}}}},
                  {"inverse", {{"name", "inv"}, {"n_in", 1}, {"components", {"x0/2"}}}},
                  {"T", 1}};
  ne_torus* m = nullptr;
  ASSERT_EQ(ne_torus_from_json(t.dump().c_str(), &m), NE_OK) << ne_last_error();
  EXPECT_EQ(ne_torus_dim(m), 1);
  double x = 1, xo = 0, ro = -1;
  long long ko = 0;
  ASSERT_EQ(ne_torus_flow(m, &x, 0, 0, 3, &xo, &ro, &ko), NE_OK);
  EXPECT_EQ(xo, 8.0);
  EXPECT_EQ(ro, 0.0);
  EXPECT_EQ(ko, 3);
  Str csv;
  ASSERT_EQ(ne_torus_csv(m, &x, 0, 3, 4, &csv.p), NE_OK);
  EXPECT_EQ(csv.str(), "s,k,r,x1\n0,0,0,1\n1,1,0,2\n2,2,0,4\n3,3,0,8\n");
  ne_torus_free(m);
  EXPECT_EQ(ne_torus_from_json(R"({"T": 1})", &m), NE_EINPUT);
}
