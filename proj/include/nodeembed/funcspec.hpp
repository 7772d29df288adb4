#pragma once

// Expression trees for scalar/vector maps with exact symbolic
// differentiation, box domains and sampling grids.

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "nodeembed/error.hpp"

namespace nodeembed {

using Vec = std::vector<double>;

enum class Op : std::uint8_t {
  Const,
  Var,
  Neg,
  Exp,
  Ln,
  Sin,
  Cos,
  Pow,  // real exponent stored as the node value
  Add,
  Sub,
  Mul,
  Div,
};

int arity(Op op) noexcept;

/// Immutable expression node handle. Copies share structure.
///
/// The arithmetic helpers below fold constants and drop additive zeros and
/// multiplicative ones/zeros; nothing else is simplified.
class Expr {
 public:
  Expr();  // the constant 0
  explicit Expr(double value);

  static Expr constant(double value) { return Expr(value); }
  static Expr variable(int index);
  static Expr unary(Op op, const Expr& arg);
  static Expr binary(Op op, const Expr& lhs, const Expr& rhs);
  static Expr power(const Expr& base, double exponent);

  Op op() const noexcept;
  double value() const noexcept;  // constant value or Pow exponent
  int var() const noexcept;
  const Expr& lhs() const;
  const Expr& rhs() const;

  bool is_constant() const noexcept { return op() == Op::Const; }
  bool is_constant(double v) const noexcept {
    return op() == Op::Const && value() == v;
  }

  /// Throws DomainError on ln(<=0), x/0, negative base with non-integer
  /// exponent or a non-finite result.
  double eval(std::span<const double> x) const;

  Expr derivative(int wrt) const;

  /// Canonical, fully parenthesised text that parse_expr accepts.
  std::string str() const;

  /// Largest referenced variable index, -1 when the expression is constant.
  int max_var() const noexcept;
  bool references(int index) const noexcept;

 private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> node);
  std::shared_ptr<const Node> node_;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr operator*(double a, const Expr& b);
Expr operator+(const Expr& a, double b);
Expr exp(const Expr& e);
Expr ln(const Expr& e);
Expr sin(const Expr& e);
Expr cos(const Expr& e);
Expr pow(const Expr& base, double exponent);

/// Grammar:
///   expr   := term (('+'|'-') term)*
///   term   := factor (('*'|'/') factor)*
///   factor := base ('^' number)?
///   base   := number | 'x' index | func '(' expr ')' | '(' expr ')' | '-' base
///   func   := sin | cos | exp | ln | neg
/// The exponent may carry a leading '-'. Errors report 0-based offsets.
Expr parse_expr(std::string_view text, int n_in);

/// Shortest text that reads back to the same double.
std::string format_number(double v);

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Interval {
  double lo = -kInf;
  double hi = kInf;
  bool lo_open = true;
  bool hi_open = true;
  bool positive = false;  // strict positivity; implies lo >= 0

  bool contains(double x) const noexcept;
  bool bounded() const noexcept { return std::isfinite(lo) && std::isfinite(hi); }
  double span() const noexcept { return hi - lo; }
};

class Domain {
 public:
  Domain() = default;
  explicit Domain(std::vector<Interval> dims);

  static Domain unbounded(int n);
  static Domain box(int n, double lo, double hi);  // closed box

  int dim() const noexcept { return static_cast<int>(dims_.size()); }
  const Interval& operator[](int i) const { return dims_.at(i); }
  const std::vector<Interval>& intervals() const noexcept { return dims_; }

  bool contains(std::span<const double> x) const noexcept;
  bool bounded() const noexcept;

  /// Replaces infinite endpoints by the given closed bounds.
  Domain clipped(double lo, double hi) const;

 private:
  std::vector<Interval> dims_;
};

/// A named map R^n_in -> R^n_out, one expression per output component.
class FuncSpec {
 public:
  FuncSpec() = default;
  FuncSpec(std::string name, int n_in, std::vector<Expr> components,
           Domain domain);
  FuncSpec(std::string name, int n_in, std::vector<Expr> components);

  static FuncSpec parse(std::string name, int n_in,
                        const std::vector<std::string>& components);
  static FuncSpec parse(std::string name, int n_in,
                        const std::vector<std::string>& components,
                        Domain domain);

  const std::string& name() const noexcept { return name_; }
  int n_in() const noexcept { return n_in_; }
  int n_out() const noexcept { return static_cast<int>(components_.size()); }
  const Expr& component(int i) const { return components_.at(i); }
  const std::vector<Expr>& components() const noexcept { return components_; }
  const Domain& domain() const noexcept { return domain_; }

  FuncSpec with_domain(Domain domain) const;
  FuncSpec with_name(std::string name) const;

  /// Componentwise evaluation; DomainError carries the component index.
  Vec eval(std::span<const double> x) const;
  /// As eval, but first requires x to lie in the declared domain.
  Vec eval_checked(std::span<const double> x) const;
  double eval_scalar(std::span<const double> x) const;  // n_out == 1
  double eval_scalar(double x) const;                   // n_in == n_out == 1

  FuncSpec diff(int wrt) const;
  std::vector<std::vector<Expr>> jacobian() const;        // [out][in]
  std::vector<std::vector<Expr>> hessian(int component) const;  // symmetric
  Eigen::MatrixXd jacobian_at(std::span<const double> x) const;
  Eigen::MatrixXd hessian_at(int component, std::span<const double> x) const;
  Vec gradient_at(int component, std::span<const double> x) const;

  FuncSpec component_spec(int i) const;

  nlohmann::json to_json() const;
  static FuncSpec from_json(const nlohmann::json& j);

 private:
  std::string name_;
  int n_in_ = 0;
  std::vector<Expr> components_;
  Domain domain_;
};

nlohmann::json domain_to_json(const Domain& d);
Domain domain_from_json(const nlohmann::json& j, int n);

/// Cartesian sampling grid. Closed finite endpoints are sampled exactly,
/// open ones are pulled inside by `inset * span`.
class Grid {
 public:
  Grid(Domain domain, std::vector<int> counts, double inset = 1e-3);
  static Grid uniform(const Domain& domain, int count, double inset = 1e-3);

  const Domain& domain() const noexcept { return domain_; }
  int dim() const noexcept { return domain_.dim(); }
  std::size_t size() const noexcept;
  const Vec& axis(int i) const { return axes_.at(i); }

  /// i-th point, last coordinate varies fastest.
  Vec point(std::size_t i) const;
  std::vector<Vec> points() const;

 private:
  Domain domain_;
  std::vector<Vec> axes_;
};

std::string format_csv_number(double v);  // %.17g

}  // namespace nodeembed
