#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "nodeembed/constructions.hpp"

using namespace nodeembed;

namespace {

double out1(const Construction& c, double x) { return c.arch.evaluate(Vec{x}).output[0]; }

Domain positive_box(double lo, double hi) {
  return Domain({Interval{lo, hi, false, false, true}});
}

double horner(const Vec& a, double x) {  // a[k-1] multiplies x^k
  double acc = 0;
  for (std::size_t k = a.size(); k-- > 0;) acc = (acc + a[k]) * x;
  return acc;
}

}  // namespace

TEST(Linear, Examples) {
  EXPECT_NEAR(out1(construct_linear(4, 2), 1.0), 4.0, 1e-7);
  const auto id = construct_linear(1, 1);
  for (double x : {-3.0, 0.0, 2.5}) EXPECT_EQ(out1(id, x), x);
  EXPECT_TRUE(id.arch.field().spec().component(0).is_constant(0.0));
  try {
    construct_linear(-1, 1);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("not the time-T map of any basic neural ODE"),
              std::string::npos);
  }
  EXPECT_THROW(construct_linear(0, 1), InputError);
}

TEST(Monomial, Examples) {
  const auto c = construct_monomial(1, 2, 1);
  EXPECT_NEAR(out1(c, 3.0), 9.0, 1e-6);
  const double x = 3.0;
  const double half = closed_form_solution(c, std::span<const double>(&x, 1), 0.5)[0];
  EXPECT_NEAR(half, std::pow(3.0, std::sqrt(2.0)), 1e-12);
  EXPECT_NEAR(half, 4.72880, 1e-5);
  // cross-check against the integrator at t = T/2
  const auto f = c.arch.field();
  EXPECT_NEAR(time_T_map(f, 3.0, 0.5), half, 1e-6);
  // x = 1 is a fixed point: ln(1) = 0
  const double one = 1.0;
  for (double t : {0.1, 0.7, 1.0}) {
    EXPECT_EQ(closed_form_solution(c, std::span<const double>(&one, 1), t)[0], 1.0);
  }
  EXPECT_EQ(out1(c, 1.0), 1.0);
}

TEST(Monomial, Rejections) {
  EXPECT_THROW(construct_monomial(1, 1, 1), InputError);
  EXPECT_THROW(construct_monomial(1, 0, 1), InputError);
  EXPECT_THROW(construct_monomial(-2, 3, 1), InputError);
  EXPECT_THROW(construct_monomial(0, 3, 1), InputError);
  EXPECT_THROW(out1(construct_monomial(2, 3, 1), -1.0), DomainError);
}

TEST(Monomial, VerifiesAgainstTarget) {
  const auto c = construct_monomial(2, 3, 1);
  const auto rep = verify_embedding(c.arch, c.target, Grid::uniform(positive_box(0.5, 2), 64));
  EXPECT_TRUE(rep.pass) << rep.max_err;
  EXPECT_LE(rep.max_err, 1e-6);
  // closed form at t = 1 equals the target exactly up to rounding
  const double x = 2.0;
  EXPECT_NEAR(closed_form_solution(construct_monomial(1, 3, 1), std::span<const double>(&x, 1), 1)[0],
              8.0, 1e-12);
}

TEST(Moebius, Examples) {
  const auto c = construct_moebius(1, 1);
  EXPECT_NEAR(out1(c, 0.5), 1.0, 1e-7);
  const double x = 0.5;
  EXPECT_NEAR(closed_form_solution(c, std::span<const double>(&x, 1), 0.5)[0], 2.0 / 3.0, 1e-6);
  EXPECT_EQ(out1(c, 0.0), 0.0);
  const double zero = 0.0;
  EXPECT_EQ(closed_form_solution(c, std::span<const double>(&zero, 1), 0.3)[0], 0.0);
  const double x9 = 0.9;
  EXPECT_THROW(closed_form_solution(c, std::span<const double>(&x9, 1), 1.2), DomainError);
  EXPECT_THROW(out1(c, 1.0), DomainError);
  EXPECT_THROW(construct_moebius(0, 1), InputError);
  // negative c flips the admissible side
  const auto neg = construct_moebius(-2, 1);
  EXPECT_NEAR(out1(neg, 0.5), 0.5 / (1 + 1.0), 1e-7);
  EXPECT_THROW(out1(neg, -0.6), DomainError);
}

TEST(Negation, Examples) {
  const auto c = construct_negation(1);
  EXPECT_NEAR(out1(c, 5.0), -5.0, 1e-7);
  EXPECT_EQ(out1(c, 0.0), 0.0);
  const double x = 3.0;
  const Vec half = closed_form_solution(c, std::span<const double>(&x, 1), 0.5);
  EXPECT_NEAR(half[0], 0.0, 1e-15);
  EXPECT_NEAR(half[1], 3.0, 1e-15);
  const Vec h0 = {3.0, 0.0};
  const Vec mid = time_T_map(c.arch.field(), h0, 0.5);
  EXPECT_NEAR(mid[0], 0.0, 1e-8);
  EXPECT_NEAR(mid[1], 3.0, 1e-8);
}

TEST(Polynomial, Examples) {
  EXPECT_NEAR(out1(construct_polynomial({0, 1}, 1), 2.0), 4.0, 1e-6);
  EXPECT_NEAR(out1(construct_polynomial({2, -3}, 1), 1.0), -1.0, 1e-6);
  const auto id = construct_polynomial({1}, 1);
  for (double x : {0.3, 1.0, 7.5}) EXPECT_EQ(out1(id, x), x);
  EXPECT_THROW(out1(construct_polynomial({0, 1}, 1), 0.0), DomainError);
  EXPECT_THROW(out1(construct_polynomial({0, 1}, 1), -1.0), DomainError);
  EXPECT_THROW(construct_polynomial({}, 1), InputError);
}

TEST(Polynomial, MatchesHorner) {
  const Vec coeffs[] = {{1, -2, 0.5}, {0, 0, 0, 1}, {0.25, 1, -1, 0.1, 0.01}};
  for (const Vec& a : coeffs) {
    const auto c = construct_polynomial(a, 1.5);
    for (int i = 0; i <= 40; ++i) {
      const double x = 0.1 + 3.9 * i / 40;
      EXPECT_NEAR(out1(c, x), horner(a, x), 1e-6 * (1 + std::fabs(horner(a, x))));
    }
  }
}

TEST(Universal, Examples) {
  EXPECT_NEAR(out1(construct_universal(FuncSpec::parse("phi", 1, {"sin(x0)"})), std::numbers::pi / 2),
              1.0, 1e-7);
  EXPECT_NEAR(out1(construct_universal(FuncSpec::parse("phi", 1, {"x0^3 - x0"})), 2.0), 6.0, 1e-7);
  EXPECT_NEAR(out1(construct_universal(FuncSpec::parse("phi", 1, {"neg(x0)"})), 1.0), -1.0, 1e-7);
}

TEST(Universal, MultiDimensionalMaps) {
  const auto phi = FuncSpec::parse("phi", 2, {"x0*x1", "x0 - x1", "sin(x0) + x1^2"});
  const auto c = construct_universal(phi, 2.0);
  EXPECT_EQ(c.arch.m(), 5);
  const auto rep = verify_embedding(c.arch, phi, Grid::uniform(Domain::box(2, -1, 1), 8));
  EXPECT_TRUE(rep.pass) << rep.max_err;
}

TEST(Constructions, EachVerifiesOn64PointGrid) {
  struct Case {
    Construction c;
    Domain d;
  };
  const Case cases[] = {
      {construct_linear(3, 1), Domain::box(1, -2, 2)},
      {construct_monomial(2, 3, 1), positive_box(0.5, 2)},
      {construct_moebius(1, 1), Domain({Interval{-0.5, 0.5, true, true, false}})},
      {construct_negation(1), Domain::box(1, -3, 3)},
      {construct_polynomial({1, -2, 0.5}, 1), positive_box(0.1, 4)},
      {construct_universal(FuncSpec::parse("phi", 1, {"x0^3 - x0"}), 1), Domain::box(1, -2, 2)},
  };
  for (const auto& [c, d] : cases) {
    const auto start = std::chrono::steady_clock::now();
    const auto rep = verify_embedding(c.arch, c.target, Grid::uniform(d, 64));
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    EXPECT_TRUE(rep.pass) << to_string(c.id) << " max_err " << rep.max_err;
    EXPECT_LT(secs, 5.0) << to_string(c.id);
  }
}

// Property: integrator and closed form agree at 32 sampled (x, t) per construction.
TEST(Constructions, IntegratorMatchesClosedForm) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  struct Case {
    Construction c;
    double lo, hi;
  };
  const Case cases[] = {
      {construct_linear(0.3, 2), -3, 3},
      {construct_monomial(2, 3, 1), 0.5, 2},
      {construct_monomial(0.5, 0.5, 1.5), 0.2, 3},
      {construct_moebius(1, 1), -2, 0.9},
      {construct_moebius(-0.5, 2), -1.5, 4},
      {construct_negation(2), -4, 4},
      {construct_polynomial({1, 2, 3}, 1), 0.2, 2},
      {construct_universal(FuncSpec::parse("phi", 1, {"cos(x0)*x0"}), 1), -2, 2},
  };
  for (const auto& [c, lo, hi] : cases) {
    for (int i = 0; i < 32; ++i) {
      const double x = lo + (hi - lo) * unit(rng);
      const double t = c.arch.T() * (0.05 + 0.95 * unit(rng));
      const Vec exact = closed_form_solution(c, std::span<const double>(&x, 1), t);
      Vec lifted = exact;  // same dimension as the flow state
      if (c.id == ConstructionId::Polynomial) {
        lifted.assign(lifted.size(), x);
      } else {
        lifted.assign(lifted.size(), 0.0);
        lifted[0] = x;
      }
      const Vec num = time_T_map(c.arch.field(), lifted, t);
      for (std::size_t k = 0; k < exact.size(); ++k) {
        EXPECT_NEAR(num[k], exact[k], 1e-6 * (1 + std::fabs(exact[k])))
            << to_string(c.id) << " x=" << x << " t=" << t;
      }
    }
  }
}

TEST(Construct, DispatchFromJson) {
  using nlohmann::json;
  const auto c = construct("monomial", json{{"c", 2}, {"alpha", 3}, {"T", 1}});
  EXPECT_EQ(c.id, ConstructionId::Monomial);
  EXPECT_NEAR(out1(c, 1.5), 2 * 1.5 * 1.5 * 1.5, 1e-6);
  const auto u = construct("universal", json{{"phi", FuncSpec::parse("p", 1, {"x0^2"}).to_json()}});
  EXPECT_NEAR(out1(u, -1.5), 2.25, 1e-7);
  EXPECT_THROW(construct("spiral", json::object()), InputError);
  EXPECT_THROW(construct("linear", json::object()), InputError);
  EXPECT_THROW(construct("linear", json{{"c", "four"}}), InputError);
  EXPECT_FALSE(c.citation.empty());
}
