#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "nodeembed/constructions.hpp"
#include "nodeembed/julia.hpp"
#include "nodeembed/odecore.hpp"
#include "oracles.hpp"

using namespace nodeembed;

namespace {

FuncSpec map1(const std::string& e, Domain d = Domain::unbounded(1)) {
  return FuncSpec::parse("g", 1, {e}, d);
}

Domain open_interval(double lo, double hi, bool positive = false) {
  return Domain({Interval{lo, hi, true, true, positive}});
}

Domain positive_axis() { return open_interval(0, kInf, true); }

Grid grid1(double lo, double hi, int n = 41) { return Grid::uniform(open_interval(lo, hi), n); }

}  // namespace

TEST(Series, Examples) {
  const PowerSeries x({0, 1, 0, 0, 0});
  EXPECT_EQ(mul(x, x).coeffs(), (Vec{0, 0, 1, 0, 0}));
  const PowerSeries sq({0, 0, 1, 0, 0});
  const PowerSeries x_x2({0, 1, 1, 0, 0});
  EXPECT_EQ(compose(sq, x_x2).coeffs(), (Vec{0, 0, 1, 2, 1}));
  EXPECT_EQ(derive(PowerSeries({0, 1, 1})).coeffs(), (Vec{1, 2}));
  EXPECT_THROW(compose(sq, PowerSeries({1, 1, 0, 0, 0})), InputError);
}

// Property: series arithmetic agrees with naive polynomial arithmetic.
TEST(Series, MatchesNaivePolynomialArithmetic) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int trial = 0; trial < 50; ++trial) {
    Vec a(7), b(7);
    for (double& v : a) v = u(rng);
    for (double& v : b) v = u(rng);
    b[0] = 0;
    const auto m = mul(PowerSeries(a), PowerSeries(b));
    const auto c = compose(PowerSeries(a), PowerSeries(b));
    const auto pm = oracle::poly_mul(a, b, 6);
    const auto pc = oracle::poly_compose(a, b, 6);
    for (int i = 0; i <= 6; ++i) {
      EXPECT_NEAR(m[i], pm[i], 1e-12);
      EXPECT_NEAR(c[i], pc[i], 1e-11 * (1 + std::fabs(pc[i])));
    }
  }
}

TEST(Series, JsonRoundTrip) {
  const PowerSeries s({0, 0, 1, -1, 1.5});
  const auto j = s.to_json();
  EXPECT_EQ(j["N"], 4);
  EXPECT_EQ(PowerSeries::from_json(j).coeffs(), s.coeffs());
  EXPECT_THROW(PowerSeries::from_json(nlohmann::json{{"N", 3}}), InputError);
}

TEST(JuliaResidual, Examples) {
  const auto moebius = julia_residual(map1("x0^2"), map1("x0/(1 - x0)"), grid1(-0.5, 0.5));
  EXPECT_LE(moebius.max, 1e-12);
  EXPECT_EQ(moebius.failures, 0u);
  const auto mono = julia_residual(map1(format_number(std::log(2.0)) + "*x0*ln(x0)", positive_axis()),
                                   map1("x0^2"), grid1(0.5, 2));
  EXPECT_LE(mono.max, 1e-12);
  const auto trivial = julia_residual(map1("0"), map1("sin(x0)*3 + x0^2"), grid1(-2, 2));
  EXPECT_EQ(trivial.max, 0.0);
}

TEST(JuliaResidual, ScalesWithTheSolution) {
  const Grid g = grid1(-0.5, 0.5);
  const FuncSpec phi = map1("x0/(1 - x0)");
  const FuncSpec wrong = map1("x0^2 + x0");
  const double base = julia_residual(wrong, phi, g).max;
  ASSERT_GT(base, 0.0);
  for (double a : {-3.0, 0.5, 7.0}) {
    const double scaled = julia_residual(map1(format_number(a) + "*(x0^2 + x0)"), phi, g).max;
    EXPECT_NEAR(scaled, std::fabs(a) * base, 1e-12 * (1 + scaled));
    EXPECT_LE(julia_residual(map1(format_number(a) + "*x0^2"), phi, g).max, 1e-12 * std::fabs(a) + 1e-15);
  }
}

TEST(JuliaResidual, DomainEscapeIsPerPoint) {
  // Phi(x) = x - 1 leaves (0, inf) for x <= 1
  const auto rep = julia_residual(map1("x0*ln(x0)", positive_axis()), map1("x0 - 1"), grid1(0, 3, 31));
  EXPECT_GT(rep.failures, 0u);
  EXPECT_LT(rep.failures, rep.points.size());
  EXPECT_NE(rep.per_point_csv().find("leaves the domain"), std::string::npos);
}

TEST(AbelResidual, Examples) {
  const double e = std::exp(1.0);
  EXPECT_LE(abel_residual(map1("ln(x0)", positive_axis()), map1(format_number(e) + "*x0"), 1.0,
                          grid1(0.1, 5))
                .max,
            1e-14);
  EXPECT_EQ(abel_residual(map1("x0"), map1("x0 + 3"), 3.0, grid1(-5, 5)).max, 0.0);
  const auto bad = abel_residual(map1("ln(x0)", positive_axis()), map1("x0^2"), 1.0, grid1(0.1, 5));
  // ln(x^2) - ln(x) - 1 = ln(x) - 1, largest at x = 0.1
  EXPECT_NEAR(bad.max, std::fabs(std::log(0.1 + 4.9 * 1e-3) - 1), 1e-12);
}

TEST(Jabotinsky, Examples) {
  const RFunction exp_r(map1("x0", positive_axis()));
  EXPECT_NEAR(jabotinsky_flow(exp_r, 1.0, 1.0), std::exp(1.0), 1e-8);
  const RFunction id_r(map1("1"));
  EXPECT_NEAR(jabotinsky_flow(id_r, 2.0, 3.0), 5.0, 1e-10);
  const RFunction sq_r(map1("x0^2", open_interval(0, 1, true)));
  EXPECT_NEAR(jabotinsky_flow(sq_r, 0.5, 0.5), 2.0 / 3.0, 1e-7);
}

TEST(Jabotinsky, RFunctionChecks) {
  EXPECT_THROW(RFunction(map1("x0", open_interval(-1, 1))), InputError);  // sign change
  EXPECT_THROW(RFunction(FuncSpec::parse("f", 2, {"x0"})), InputError);
  const RFunction neg(map1("neg(1)"));
  EXPECT_EQ(neg.sign(), -1);
  EXPECT_NEAR(jabotinsky_flow(neg, 2.0, 3.0), -1.0, 1e-10);
  // r = ln on (0, inf) with anchor 1
  const RFunction r(map1("x0", positive_axis()));
  EXPECT_EQ(r.anchor(), 1.0);
  for (double x : {0.01, 0.5, 3.0, 250.0}) EXPECT_NEAR(r(x), std::log(x), 1e-12);
}

TEST(Jabotinsky, FlowLeavingDomainIsAnError) {
  // x' = x^2 on (0, 1) from 0.5 reaches 1 at t = 1
  const RFunction sq_r(map1("x0^2", open_interval(0, 1, true)));
  EXPECT_THROW(jabotinsky_flow(sq_r, 0.5, 1.5), NumericalError);
}

// Property: the r-function flow equals integration of the field (32 triples).
TEST(Jabotinsky, AgreesWithIntegrator) {
  struct Case {
    FuncSpec f;
    double lo, hi, tmax;
  } cases[] = {
      {map1("x0", positive_axis()), 0.2, 3.0, 1.5},
      {map1("x0^2", positive_axis()), 0.1, 0.9, 0.9},
      {map1("1"), -3, 3, 4},
      {map1("exp(neg(x0)) + 0.5"), -1, 2, 2},
  };
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  int count = 0;
  for (const auto& c : cases) {
    const RFunction rf(c.f);
    const VectorField vf(c.f);
    for (int i = 0; i < 8; ++i, ++count) {
      const double x = c.lo + (c.hi - c.lo) * u(rng);
      double t = c.tmax * (0.05 + 0.95 * u(rng));
      if (c.f.component(0).str() == "(x0^2)") t = std::min(t, 0.9 / x - 0.05);  // stay before blow-up
      const double a = jabotinsky_flow(rf, x, t);
      const double b = time_T_map(vf, x, t);
      EXPECT_NEAR(a, b, 1e-6) << c.f.component(0).str() << " x=" << x << " t=" << t;
    }
  }
  EXPECT_EQ(count, 32);
}

TEST(Jabotinsky, TranslationHoldsAndGammaHookBreaksIt) {
  const RFunction rf(map1("2*exp(neg(x0)/2)"));
  for (double x : {-1.0, 0.3, 2.0}) {
    const double s = 0.4, t = 0.7;
    const double direct = jabotinsky_flow(rf, x, s + t);
    const double composed = jabotinsky_flow(rf, jabotinsky_flow(rf, x, s), t);
    EXPECT_LE(std::fabs(direct - composed), 1e-7);
    // gamma(t) = t^3 + t reproduces h = 2 ln(e^(x/2) + t^3 + t)
    auto gamma = [](double u) { return u * u * u + u; };
    const double h = jabotinsky_flow(rf, x, s + t, gamma);
    const double closed = 2 * std::log(std::exp(x / 2) + gamma(s + t));
    EXPECT_NEAR(h, closed, 1e-9);
    const double hs = jabotinsky_flow(rf, x, s, gamma);
    const double comp = jabotinsky_flow(rf, hs, t, gamma);
    EXPECT_GT(std::fabs(h - comp), 1e-3);
  }
}

TEST(IterativeLogarithm, QuadraticNearIdentity) {
  const auto sol = iterative_logarithm(PowerSeries({0, 1, 1}), 4);
  const Vec expected = {0, 0, 1, -1, 1.5};
  ASSERT_EQ(sol.series.order(), 4);
  for (int i = 0; i <= 4; ++i) EXPECT_NEAR(sol.series[i], expected[i], 1e-12);
  // independent oracle: the truncated Julia residual vanishes through x^5
  const auto res = oracle::julia_series_residual({0, 1, 1}, sol.series.coeffs(), 5);
  for (int k = 0; k <= 5; ++k) EXPECT_LE(std::fabs(res[k]), 1e-12) << "order " << k;
}

TEST(IterativeLogarithm, TruncatedMoebiusGivesSquare) {
  const auto sol = iterative_logarithm(PowerSeries({0, 1, 1, 1, 1}), 4);
  EXPECT_NEAR(sol.series[2], 1.0, 1e-12);
  EXPECT_LE(std::fabs(sol.series[3]), 1e-12);
  EXPECT_LE(std::fabs(sol.series[4]), 1e-12);
}

// Property: random near-identity maps give residual coefficients <= 1e-12
// through order N + m - 1.
TEST(IterativeLogarithm, ResidualVanishesForRandomMaps) {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int m : {2, 3}) {
    for (int trial = 0; trial < 10; ++trial) {
      Vec phi(9, 0.0);
      phi[1] = 1;
      for (int i = m; i <= 8; ++i) phi[i] = u(rng);
      if (phi[m] == 0) phi[m] = 0.5;
      const int N = 6;
      const auto sol = iterative_logarithm(PowerSeries(phi), N);
      const auto res = oracle::julia_series_residual(phi, sol.series.coeffs(), N + m - 1);
      for (int k = 0; k <= N + m - 1; ++k) {
        EXPECT_LE(std::fabs(res[k]), 1e-12 * (1 + std::fabs(sol.series[N]))) << "m=" << m << " k=" << k;
      }
      EXPECT_EQ(sol.series[m], phi[m]);
      EXPECT_EQ(static_cast<int>(sol.trace.size()), N - m + 1);
    }
  }
}

TEST(IterativeLogarithm, Preconditions) {
  EXPECT_THROW(iterative_logarithm(PowerSeries({0, 1, 0, 0}), 4), InputError);
  EXPECT_THROW(iterative_logarithm(PowerSeries({0, 2, 1}), 4), InputError);
  EXPECT_THROW(iterative_logarithm(PowerSeries({0.1, 1, 1}), 4), InputError);
  EXPECT_THROW(iterative_logarithm(PowerSeries({0, 1, 1}), 2), InputError);
}

TEST(MonomialCertificate, Examples) {
  const auto a = monomial_series_solution(1, 2, 10);
  EXPECT_EQ(a.trace.size(), 11u);
  for (double v : a.series.coeffs()) EXPECT_EQ(v, 0.0);
  const auto b = monomial_series_solution(-3, 5, 12);
  for (double v : b.series.coeffs()) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(monomial_series_solution(1, 1, 5), InputError);
  EXPECT_THROW(monomial_series_solution(0, 2, 5), InputError);
}

// Each trace step names the power of x it matched; the naive residual of
// c alpha x^(alpha-1) f - f(c x^alpha) at that power must involve gamma_index.
TEST(MonomialCertificate, TraceOrdersMatchTheEquation) {
  for (double c : {1.0, 2.0, -1.5}) {
    for (int alpha : {2, 3, 5}) {
      const int N = 12;
      const auto sol = monomial_series_solution(c, alpha, N);
      const int top = alpha * N + 1;
      oracle::Poly phi(top + 1, 0.0);
      phi[alpha] = c;
      for (const auto& step : sol.trace) {
        oracle::Poly unit(N + 1, 0.0);
        unit[step.index] = 1.0;
        const auto res = oracle::julia_series_residual(phi, unit, top);
        EXPECT_NE(res[step.order], 0.0) << "alpha=" << alpha << " index=" << step.index;
      }
    }
  }
}

TEST(LimitSolution, HalvingMapIsItsOwnLimit) {
  const auto sol = principal_solution_limit(map1("x0/2"), Grid::uniform(Domain::box(1, 0, 1), 11));
  for (std::size_t i = 0; i < sol.xs.size(); ++i) {
    EXPECT_EQ(sol.values[i], sol.xs[i]);
    EXPECT_EQ(sol.iterations[i], 1);
  }
  EXPECT_EQ(sol.slope_at_zero, 0.5);
}

TEST(LimitSolution, QuadraticContractionSolvesJulia) {
  const FuncSpec phi = map1("x0/2 + x0^2/8");
  const auto sol = principal_solution_limit(phi, Grid::uniform(Domain::box(1, 0, 1), 21));
  EXPECT_LE(sol.julia_residual, 1e-8);
  // independent check: the sampled values behave like f(x) = x + O(x^2)
  EXPECT_NEAR(sol.values[1] / sol.xs[1], 1.0, 0.05);
}

TEST(LimitSolution, HypothesisViolations) {
  EXPECT_THROW(principal_solution_limit(map1("x0/(1 + x0)"), Grid::uniform(Domain::box(1, 0, 1), 11)),
               InputError);
  EXPECT_THROW(principal_solution_limit(map1("x0^2"), Grid::uniform(Domain::box(1, 0, 1), 11)),
               InputError);
  EXPECT_THROW(principal_solution_limit(map1("2*x0"), Grid::uniform(Domain::box(1, 0, 1), 11)),
               InputError);
}

// Cross-module: every 1-D construction's field solves Julia's equation with its target.
TEST(Constructions, FieldsSolveJuliaEquation) {
  struct Case {
    Construction c;
    Grid g;
  };
  const Case cases[] = {
      {construct_linear(3, 2), grid1(-2, 2, 64)},
      {construct_linear(0.25, 1), grid1(-2, 2, 64)},
      {construct_monomial(2, 3, 1), grid1(0.5, 2, 64)},
      {construct_monomial(1, 2, 1), grid1(0.5, 2, 64)},
      {construct_monomial(0.7, 0.5, 2), grid1(0.2, 3, 64)},
      {construct_moebius(1, 1), grid1(-0.5, 0.5, 64)},
      {construct_moebius(-2, 3), grid1(-0.3, 2, 64)},
  };
  for (const auto& [c, g] : cases) {
    const auto rep = julia_residual(c.arch.field().spec(), c.target, g);
    EXPECT_EQ(rep.failures, 0u);
    EXPECT_LE(rep.max, 1e-10) << to_string(c.id);
  }
}
