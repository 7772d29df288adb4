#pragma once

// Functional equations behind 1-D time-T maps: J_Phi f = f o Phi (Julia),
// r o Phi = r + c (Abel), flows r^-1(r(x) + t), formal power-series solutions
// and the iterate-limit solution for contractions towards 0.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nodeembed/funcspec.hpp"

namespace nodeembed {

/// Truncated power series sum_{i<=N} c_i x^i.
class PowerSeries {
 public:
  PowerSeries() : c_(1, 0.0) {}
  explicit PowerSeries(Vec coeffs);
  static PowerSeries zero(int order) { return PowerSeries(Vec(order + 1, 0.0)); }

  int order() const noexcept { return static_cast<int>(c_.size()) - 1; }
  double operator[](int i) const { return i >= 0 && i <= order() ? c_[i] : 0.0; }
  double& at(int i) { return c_.at(i); }
  const Vec& coeffs() const noexcept { return c_; }

  /// Same coefficients padded with zeros or truncated to the given order.
  PowerSeries truncated(int order) const;
  double eval(double x) const;

  nlohmann::json to_json() const;  // {"N", "coeffs"}
  static PowerSeries from_json(const nlohmann::json& j);

 private:
  Vec c_;
};

/// Product truncated at min of the two orders unless an order is given.
PowerSeries mul(const PowerSeries& a, const PowerSeries& b, int order = -1);
/// outer(inner(x)); inner must have zero constant term.
PowerSeries compose(const PowerSeries& outer, const PowerSeries& inner, int order = -1);
PowerSeries derive(const PowerSeries& a);  // order N-1

struct ResidualPoint {
  Vec x;
  double residual = 0;
  std::string failure;
};

struct ResidualReport {
  double max = 0;
  Vec argmax;
  std::vector<ResidualPoint> points;
  std::size_t failures = 0;

  std::string per_point_csv() const;
  nlohmann::json to_json(const std::string& csv_ref = "residual.csv") const;
};

/// max over the grid of ||J_Phi(x) f(x) - f(Phi(x))||_inf. Points where
/// Phi(x) leaves f's domain are recorded as failures.
ResidualReport julia_residual(const FuncSpec& f, const FuncSpec& phi, const Grid& grid);

/// max over the grid of |r(Phi(x)) - r(x) - c|.
ResidualReport abel_residual(const FuncSpec& r, const FuncSpec& phi, double c, const Grid& grid);

/// r with r' = 1/f for a 1-D field f of constant sign on its domain.
/// Cumulative integrals from the anchor are cached at construction; later
/// lookups only read the cache.
class RFunction {
 public:
  explicit RFunction(FuncSpec f);
  RFunction(FuncSpec f, Domain domain);

  const FuncSpec& field() const noexcept { return f_; }
  const Interval& interval() const noexcept { return iv_; }
  double anchor() const noexcept { return anchor_; }
  int sign() const noexcept { return sign_; }

  double operator()(double x) const;  // integral of 1/f from the anchor
  /// y with r(y) = value. NumericalError when no such y lies in the domain.
  double inverse(double value, double start) const;

 private:
  double integrand(double x) const;
  double integrate(double a, double b) const;

  FuncSpec f_;
  Interval iv_;
  double anchor_ = 0;
  int sign_ = 1;
  std::map<double, double> nodes_;
};

/// h(x, t) = r^-1(r(x) + gamma(t)) with gamma(t) = t by default. Any other
/// gamma generally breaks the translation equation.
double jabotinsky_flow(const RFunction& rf, double x, double t,
                       const std::function<double(double)>& gamma = {});

struct SeriesStep {
  int index = 0;      // coefficient solved for
  int order = 0;      // power of x whose coefficients were matched
  double value = 0;
  std::string note;
};

struct SeriesSolution {
  PowerSeries series;
  std::vector<SeriesStep> trace;
  nlohmann::json to_json() const;
};

/// Formal solution f = b_m x^m + sum_{n>m} c_n x^n of Phi' f = f o Phi for
/// Phi = x + sum_{n>=m} b_n x^n, normalised to leading coefficient b_m. Each
/// c_n is fixed by the coefficient of x^(n+m-1). Phi is read as a polynomial.
SeriesSolution iterative_logarithm(const PowerSeries& phi, int N);

/// Order-by-order elimination for Phi = c x^alpha (integer alpha >= 2): every
/// coefficient of a formal solution is forced to 0.
SeriesSolution monomial_series_solution(double c, int alpha, int N);

struct LimitSolution {
  Vec xs;
  Vec values;
  std::vector<long> iterations;
  double julia_residual = 0;
  double slope_at_zero = 0;
  std::string note;
  nlohmann::json to_json() const;
};

/// f(x) = lim Phi^n(x) / (Phi^n)'(x) on [0, b] for a convex or concave Phi
/// with 0 < Phi(x) < x on (0, b] and 0 < Phi'(0) < 1.
LimitSolution principal_solution_limit(const FuncSpec& phi, const Grid& grid, long n_max = 1'000'000,
                                       double tol = 1e-10);

}  // namespace nodeembed
