#include "nodeembed/funcspec.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <utility>

namespace nodeembed {

struct Expr::Node {
  Op op = Op::Const;
  double value = 0.0;
  int var = -1;
  // Null handles for missing children; avoids recursive default construction.
  Expr a{std::shared_ptr<const Node>()};
  Expr b{std::shared_ptr<const Node>()};
};

namespace {

const char* unary_name(Op op) {
  switch (op) {
    case Op::Neg: return "neg";
    case Op::Exp: return "exp";
    case Op::Ln: return "ln";
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    default: return "?";
  }
}

const char* binary_symbol(Op op) {
  switch (op) {
    case Op::Add: return " + ";
    case Op::Sub: return " - ";
    case Op::Mul: return " * ";
    case Op::Div: return " / ";
    default: return " ? ";
  }
}

bool is_small_integer(double p) {
  return p == std::floor(p) && std::fabs(p) <= 64.0;
}

double int_power(double base, double p) {
  long n = static_cast<long>(std::fabs(p));
  double result = 1.0;
  double b = base;
  while (n > 0) {
    if (n & 1) result *= b;
    b *= b;
    n >>= 1;
  }
  return p < 0 ? 1.0 / result : result;
}

// Returns false when the operation leaves the real domain.
bool apply_unary(Op op, double a, double& out) {
  switch (op) {
    case Op::Neg: out = -a; return true;
    case Op::Exp: out = std::exp(a); break;
    case Op::Ln:
      if (!(a > 0.0)) return false;
      out = std::log(a);
      break;
    case Op::Sin: out = std::sin(a); break;
    case Op::Cos: out = std::cos(a); break;
    default: return false;
  }
  return std::isfinite(out);
}

bool apply_pow(double base, double p, double& out) {
  if (base == 0.0 && p < 0.0) return false;
  if (is_small_integer(p)) {
    out = int_power(base, p);
  } else {
    if (base < 0.0) return false;
    out = std::pow(base, p);
  }
  return std::isfinite(out);
}

bool apply_binary(Op op, double a, double b, double& out) {
  switch (op) {
    case Op::Add: out = a + b; break;
    case Op::Sub: out = a - b; break;
    case Op::Mul: out = a * b; break;
    case Op::Div:
      if (b == 0.0) return false;
      out = a / b;
      break;
    default: return false;
  }
  return std::isfinite(out);
}

}  // namespace

int arity(Op op) noexcept {
  switch (op) {
    case Op::Const:
    case Op::Var: return 0;
    case Op::Neg:
    case Op::Exp:
    case Op::Ln:
    case Op::Sin:
    case Op::Cos:
    case Op::Pow: return 1;
    default: return 2;
  }
}

Expr::Expr() : Expr(0.0) {}

Expr::Expr(double value) {
  auto n = std::make_shared<Node>();
  n->op = Op::Const;
  n->value = value == 0.0 ? 0.0 : value;  // no negative zero
  node_ = std::move(n);
}

Expr::Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Expr Expr::variable(int index) {
  if (index < 0) throw InputError("negative variable index");
  auto n = std::make_shared<Node>();
  n->op = Op::Var;
  n->var = index;
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr Expr::unary(Op op, const Expr& arg) {
  if (arity(op) != 1 || op == Op::Pow) throw InputError("not a unary function");
  double folded = 0.0;
  if (arg.is_constant() && apply_unary(op, arg.value(), folded)) {
    return Expr(folded);
  }
  auto n = std::make_shared<Node>();
  n->op = op;
  n->a = arg;
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr Expr::power(const Expr& base, double exponent) {
  if (!std::isfinite(exponent)) throw InputError("non-finite exponent");
  if (exponent == 0.0) return Expr(1.0);
  if (exponent == 1.0) return base;
  double folded = 0.0;
  if (base.is_constant() && apply_pow(base.value(), exponent, folded)) {
    return Expr(folded);
  }
  auto n = std::make_shared<Node>();
  n->op = Op::Pow;
  n->value = exponent;
  n->a = base;
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr Expr::binary(Op op, const Expr& lhs, const Expr& rhs) {
  if (arity(op) != 2) throw InputError("not a binary operator");
  double folded = 0.0;
  if (lhs.is_constant() && rhs.is_constant() &&
      apply_binary(op, lhs.value(), rhs.value(), folded)) {
    return Expr(folded);
  }
  switch (op) {
    case Op::Add:
      if (lhs.is_constant(0.0)) return rhs;
      if (rhs.is_constant(0.0)) return lhs;
      break;
    case Op::Sub:
      if (rhs.is_constant(0.0)) return lhs;
      if (lhs.is_constant(0.0)) return unary(Op::Neg, rhs);
      break;
    case Op::Mul:
      if (lhs.is_constant(0.0) || rhs.is_constant(0.0)) return Expr(0.0);
      if (lhs.is_constant(1.0)) return rhs;
      if (rhs.is_constant(1.0)) return lhs;
      break;
    case Op::Div:
      if (lhs.is_constant(0.0) && !rhs.is_constant(0.0)) return Expr(0.0);
      if (rhs.is_constant(1.0)) return lhs;
      break;
    default: break;
  }
  auto n = std::make_shared<Node>();
  n->op = op;
  n->a = lhs;
  n->b = rhs;
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Op Expr::op() const noexcept { return node_->op; }
double Expr::value() const noexcept { return node_->value; }
int Expr::var() const noexcept { return node_->var; }
const Expr& Expr::lhs() const { return node_->a; }
const Expr& Expr::rhs() const { return node_->b; }

double Expr::eval(std::span<const double> x) const {
  const Node& n = *node_;
  double out = 0.0;
  switch (n.op) {
    case Op::Const: return n.value;
    case Op::Var:
      if (static_cast<std::size_t>(n.var) >= x.size()) {
        throw InputError("variable x" + std::to_string(n.var) +
                         " outside the evaluation point");
      }
      return x[n.var];
    case Op::Pow: {
      const double base = n.a.eval(x);
      if (!apply_pow(base, n.value, out)) {
        throw DomainError("power " + format_number(n.value) +
                          " of base " + format_number(base));
      }
      return out;
    }
    case Op::Neg:
    case Op::Exp:
    case Op::Ln:
    case Op::Sin:
    case Op::Cos: {
      const double a = n.a.eval(x);
      if (!apply_unary(n.op, a, out)) {
        throw DomainError(std::string(unary_name(n.op)) + " of " +
                          format_number(a));
      }
      return out;
    }
    default: {
      const double a = n.a.eval(x);
      const double b = n.b.eval(x);
      if (!apply_binary(n.op, a, b, out)) {
        throw DomainError(n.op == Op::Div && b == 0.0
                              ? std::string("division by zero")
                              : std::string("non-finite arithmetic result"));
      }
      return out;
    }
  }
}

Expr Expr::derivative(int wrt) const {
  const Node& n = *node_;
  switch (n.op) {
    case Op::Const: return Expr(0.0);
    case Op::Var: return Expr(n.var == wrt ? 1.0 : 0.0);
    case Op::Neg: return -n.a.derivative(wrt);
    case Op::Exp: return *this * n.a.derivative(wrt);
    case Op::Ln: return n.a.derivative(wrt) / n.a;
    case Op::Sin: return nodeembed::cos(n.a) * n.a.derivative(wrt);
    case Op::Cos: return -(nodeembed::sin(n.a) * n.a.derivative(wrt));
    case Op::Pow:
      return n.value * (nodeembed::pow(n.a, n.value - 1.0) * n.a.derivative(wrt));
    case Op::Add: return n.a.derivative(wrt) + n.b.derivative(wrt);
    case Op::Sub: return n.a.derivative(wrt) - n.b.derivative(wrt);
    case Op::Mul:
      return n.a.derivative(wrt) * n.b + n.a * n.b.derivative(wrt);
    case Op::Div: {
      const Expr da = n.a.derivative(wrt);
      const Expr db = n.b.derivative(wrt);
      if (db.is_constant(0.0)) return da / n.b;
      return (da * n.b - n.a * db) / nodeembed::pow(n.b, 2.0);
    }
  }
  return Expr(0.0);
}

std::string Expr::str() const {
  const Node& n = *node_;
  switch (n.op) {
    case Op::Const:
      if (n.value < 0.0) return "neg(" + format_number(-n.value) + ")";
      return format_number(n.value);
    case Op::Var: return "x" + std::to_string(n.var);
    case Op::Pow:
      return "(" + n.a.str() + "^" + format_number(n.value) + ")";
    case Op::Neg:
    case Op::Exp:
    case Op::Ln:
    case Op::Sin:
    case Op::Cos:
      return std::string(unary_name(n.op)) + "(" + n.a.str() + ")";
    default:
      return "(" + n.a.str() + binary_symbol(n.op) + n.b.str() + ")";
  }
}

int Expr::max_var() const noexcept {
  const Node& n = *node_;
  switch (arity(n.op)) {
    case 0: return n.op == Op::Var ? n.var : -1;
    case 1: return n.a.max_var();
    default: return std::max(n.a.max_var(), n.b.max_var());
  }
}

bool Expr::references(int index) const noexcept {
  const Node& n = *node_;
  switch (arity(n.op)) {
    case 0: return n.op == Op::Var && n.var == index;
    case 1: return n.a.references(index);
    default: return n.a.references(index) || n.b.references(index);
  }
}

Expr operator+(const Expr& a, const Expr& b) { return Expr::binary(Op::Add, a, b); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::binary(Op::Sub, a, b); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::binary(Op::Mul, a, b); }
Expr operator/(const Expr& a, const Expr& b) { return Expr::binary(Op::Div, a, b); }
Expr operator-(const Expr& a) { return Expr::unary(Op::Neg, a); }
Expr operator*(double a, const Expr& b) { return Expr(a) * b; }
Expr operator+(const Expr& a, double b) { return a + Expr(b); }
Expr exp(const Expr& e) { return Expr::unary(Op::Exp, e); }
Expr ln(const Expr& e) { return Expr::unary(Op::Ln, e); }
Expr sin(const Expr& e) { return Expr::unary(Op::Sin, e); }
Expr cos(const Expr& e) { return Expr::unary(Op::Cos, e); }
Expr pow(const Expr& base, double exponent) { return Expr::power(base, exponent); }

std::string format_number(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_csv_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------- parser

namespace {

class Parser {
 public:
  Parser(std::string_view text, int n_in) : s_(text), n_in_(n_in) {}

  Expr run() {
    Expr e = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw SyntaxError(what, pos_);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) {
      ++pos_;
    }
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    skip();
    if (pos_ >= s_.size()) fail(std::string("expected '") + c + "', got end of input");
    if (s_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  Expr expr() {
    Expr e = term();
    for (;;) {
      if (accept('+')) e = e + term();
      else if (accept('-')) e = e - term();
      else return e;
    }
  }

  Expr term() {
    Expr e = factor();
    for (;;) {
      if (accept('*')) e = e * factor();
      else if (accept('/')) e = e / factor();
      else return e;
    }
  }

  Expr factor() {
    Expr b = base();
    if (accept('^')) {
      skip();
      bool negative = false;
      if (pos_ < s_.size() && s_[pos_] == '-') {
        negative = true;
        ++pos_;
      }
      const double p = number();
      return nodeembed::pow(b, negative ? -p : p);
    }
    return b;
  }

  double number() {
    skip();
    const std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) {
      ++pos_;
    }
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < s_.size() && (s_[p] == '+' || s_[p] == '-')) ++p;
      if (p < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p]))) {
        pos_ = p;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      }
    }
    if (start == pos_) {
      fail(pos_ >= s_.size() ? "expected number, got end of input" : "expected number");
    }
    double v = 0.0;
    auto res = std::from_chars(s_.data() + start, s_.data() + pos_, v);
    if (res.ec != std::errc() || res.ptr != s_.data() + pos_) {
      pos_ = start;
      fail("malformed number");
    }
    return v;
  }

  Expr base() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = expr();
      expect(')');
      return e;
    }
    if (c == '-') {
      ++pos_;
      return -base();
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      return Expr(number());
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      const std::string_view word = s_.substr(start, pos_ - start);
      if (word == "x" && pos_ < s_.size() &&
          std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        const std::size_t dstart = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        int index = 0;
        std::from_chars(s_.data() + dstart, s_.data() + pos_, index);
        if (index >= n_in_) {
          pos_ = start;
          fail("variable index x" + std::to_string(index) + " out of range (n_in=" +
               std::to_string(n_in_) + ")");
        }
        return Expr::variable(index);
      }
      Op op;
      if (word == "sin") op = Op::Sin;
      else if (word == "cos") op = Op::Cos;
      else if (word == "exp") op = Op::Exp;
      else if (word == "ln") op = Op::Ln;
      else if (word == "neg") op = Op::Neg;
      else {
        pos_ = start;
        fail("unknown identifier '" + std::string(word) + "'");
      }
      expect('(');
      Expr arg = expr();
      expect(')');
      return Expr::unary(op, arg);
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::string_view s_;
  int n_in_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expr(std::string_view text, int n_in) {
  if (n_in < 0) throw InputError("negative input dimension");
  return Parser(text, n_in).run();
}

// ---------------------------------------------------------------- domains

bool Interval::contains(double x) const noexcept {
  if (std::isnan(x)) return false;
  if (positive && !(x > 0.0)) return false;
  if (lo_open ? !(x > lo) : !(x >= lo)) return false;
  if (hi_open ? !(x < hi) : !(x <= hi)) return false;
  return true;
}

Domain::Domain(std::vector<Interval> dims) : dims_(std::move(dims)) {
  for (const Interval& iv : dims_) {
    if (std::isnan(iv.lo) || std::isnan(iv.hi) || !(iv.lo < iv.hi)) {
      throw InputError("domain interval requires lo < hi");
    }
    if (iv.positive && iv.lo < 0.0) {
      throw InputError("positive domain dimension requires lo >= 0");
    }
  }
}

Domain Domain::unbounded(int n) { return Domain(std::vector<Interval>(n)); }

Domain Domain::box(int n, double lo, double hi) {
  Interval iv{lo, hi, false, false, false};
  return Domain(std::vector<Interval>(n, iv));
}

bool Domain::contains(std::span<const double> x) const noexcept {
  if (x.size() != dims_.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!dims_[i].contains(x[i])) return false;
  }
  return true;
}

bool Domain::bounded() const noexcept {
  return std::all_of(dims_.begin(), dims_.end(),
                     [](const Interval& iv) { return iv.bounded(); });
}

Domain Domain::clipped(double lo, double hi) const {
  std::vector<Interval> out = dims_;
  for (Interval& iv : out) {
    if (!std::isfinite(iv.lo)) {
      iv.lo = lo;
      iv.lo_open = false;
    }
    if (!std::isfinite(iv.hi)) {
      iv.hi = hi;
      iv.hi_open = false;
    }
  }
  return Domain(std::move(out));
}

// ---------------------------------------------------------------- FuncSpec

FuncSpec::FuncSpec(std::string name, int n_in, std::vector<Expr> components,
                   Domain domain)
    : name_(std::move(name)),
      n_in_(n_in),
      components_(std::move(components)),
      domain_(std::move(domain)) {
  if (n_in_ < 0) throw InputError("negative input dimension");
  if (components_.empty()) throw InputError("FuncSpec needs at least one component");
  if (domain_.dim() != n_in_) {
    throw InputError("domain dimension " + std::to_string(domain_.dim()) +
                     " does not match n_in " + std::to_string(n_in_));
  }
  for (std::size_t i = 0; i < components_.size(); ++i) {
    if (components_[i].max_var() >= n_in_) {
      throw InputError("component " + std::to_string(i) +
                       " references a variable >= n_in");
    }
  }
}

FuncSpec::FuncSpec(std::string name, int n_in, std::vector<Expr> components)
    : FuncSpec(std::move(name), n_in, std::move(components),
               Domain::unbounded(n_in)) {}

FuncSpec FuncSpec::parse(std::string name, int n_in,
                         const std::vector<std::string>& components) {
  return parse(std::move(name), n_in, components, Domain::unbounded(n_in));
}

FuncSpec FuncSpec::parse(std::string name, int n_in,
                         const std::vector<std::string>& components,
                         Domain domain) {
  std::vector<Expr> exprs;
  exprs.reserve(components.size());
  for (const auto& c : components) exprs.push_back(parse_expr(c, n_in));
  return FuncSpec(std::move(name), n_in, std::move(exprs), std::move(domain));
}

FuncSpec FuncSpec::with_domain(Domain domain) const {
  return FuncSpec(name_, n_in_, components_, std::move(domain));
}

FuncSpec FuncSpec::with_name(std::string name) const {
  FuncSpec out = *this;
  out.name_ = std::move(name);
  return out;
}

Vec FuncSpec::eval(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != n_in_) {
    throw InputError(name_ + ": expected a point of dimension " +
                     std::to_string(n_in_) + ", got " + std::to_string(x.size()));
  }
  Vec out(components_.size());
  for (std::size_t i = 0; i < components_.size(); ++i) {
    try {
      out[i] = components_[i].eval(x);
    } catch (const DomainError& e) {
      throw DomainError(name_ + ": " + e.what(), static_cast<int>(i));
    }
  }
  return out;
}

Vec FuncSpec::eval_checked(std::span<const double> x) const {
  if (static_cast<int>(x.size()) == n_in_ && !domain_.contains(x)) {
    throw DomainError(name_ + ": point outside the declared domain");
  }
  return eval(x);
}

double FuncSpec::eval_scalar(std::span<const double> x) const {
  if (n_out() != 1) throw InputError(name_ + ": not a scalar map");
  return eval(x)[0];
}

double FuncSpec::eval_scalar(double x) const {
  return eval_scalar(std::span<const double>(&x, 1));
}

FuncSpec FuncSpec::diff(int wrt) const {
  if (wrt < 0 || wrt >= n_in_) throw InputError("differentiation variable out of range");
  std::vector<Expr> d;
  d.reserve(components_.size());
  for (const Expr& c : components_) d.push_back(c.derivative(wrt));
  return FuncSpec("d(" + name_ + ")/dx" + std::to_string(wrt), n_in_, std::move(d),
                  domain_);
}

std::vector<std::vector<Expr>> FuncSpec::jacobian() const {
  std::vector<std::vector<Expr>> j(components_.size(), std::vector<Expr>(n_in_));
  for (std::size_t i = 0; i < components_.size(); ++i) {
    for (int k = 0; k < n_in_; ++k) j[i][k] = components_[i].derivative(k);
  }
  return j;
}

std::vector<std::vector<Expr>> FuncSpec::hessian(int component) const {
  const Expr& c = components_.at(component);
  std::vector<std::vector<Expr>> h(n_in_, std::vector<Expr>(n_in_));
  for (int i = 0; i < n_in_; ++i) {
    const Expr di = c.derivative(i);
    for (int k = i; k < n_in_; ++k) {
      h[i][k] = di.derivative(k);
      h[k][i] = h[i][k];
    }
  }
  return h;
}

Eigen::MatrixXd FuncSpec::jacobian_at(std::span<const double> x) const {
  const auto j = jacobian();
  Eigen::MatrixXd m(n_out(), n_in_);
  for (int i = 0; i < n_out(); ++i) {
    for (int k = 0; k < n_in_; ++k) {
      try {
        m(i, k) = j[i][k].eval(x);
      } catch (const DomainError& e) {
        throw DomainError(name_ + " jacobian: " + e.what(), i);
      }
    }
  }
  return m;
}

Eigen::MatrixXd FuncSpec::hessian_at(int component, std::span<const double> x) const {
  const auto h = hessian(component);
  Eigen::MatrixXd m(n_in_, n_in_);
  for (int i = 0; i < n_in_; ++i) {
    for (int k = 0; k < n_in_; ++k) m(i, k) = h[i][k].eval(x);
  }
  return m;
}

Vec FuncSpec::gradient_at(int component, std::span<const double> x) const {
  const Expr& c = components_.at(component);
  Vec g(n_in_);
  for (int k = 0; k < n_in_; ++k) g[k] = c.derivative(k).eval(x);
  return g;
}

FuncSpec FuncSpec::component_spec(int i) const {
  return FuncSpec(name_ + "[" + std::to_string(i) + "]", n_in_, {components_.at(i)},
                  domain_);
}

nlohmann::json domain_to_json(const Domain& d) {
  nlohmann::json arr = nlohmann::json::array();
  for (const Interval& iv : d.intervals()) {
    nlohmann::json e;
    e["lo"] = std::isfinite(iv.lo) ? nlohmann::json(iv.lo) : nlohmann::json(nullptr);
    e["hi"] = std::isfinite(iv.hi) ? nlohmann::json(iv.hi) : nlohmann::json(nullptr);
    e["lo_open"] = iv.lo_open;
    e["hi_open"] = iv.hi_open;
    e["positive"] = iv.positive;
    arr.push_back(std::move(e));
  }
  return arr;
}

Domain domain_from_json(const nlohmann::json& j, int n) {
  if (j.is_null()) return Domain::unbounded(n);
  if (!j.is_array() || static_cast<int>(j.size()) != n) {
    throw InputError("domain must be an array with one entry per input dimension");
  }
  std::vector<Interval> dims;
  for (const auto& e : j) {
    Interval iv;
    if (e.contains("lo") && !e["lo"].is_null()) iv.lo = e["lo"].get<double>();
    if (e.contains("hi") && !e["hi"].is_null()) iv.hi = e["hi"].get<double>();
    iv.lo_open = e.value("lo_open", !std::isfinite(iv.lo));
    iv.hi_open = e.value("hi_open", !std::isfinite(iv.hi));
    iv.positive = e.value("positive", false);
    dims.push_back(iv);
  }
  return Domain(std::move(dims));
}

nlohmann::json FuncSpec::to_json() const {
  nlohmann::json j;
  j["name"] = name_;
  j["n_in"] = n_in_;
  j["n_out"] = n_out();
  nlohmann::json comps = nlohmann::json::array();
  for (const Expr& c : components_) comps.push_back(c.str());
  j["components"] = std::move(comps);
  j["domain"] = domain_to_json(domain_);
  return j;
}

FuncSpec FuncSpec::from_json(const nlohmann::json& j) {
  try {
    const int n_in = j.at("n_in").get<int>();
    const auto comps = j.at("components").get<std::vector<std::string>>();
    if (j.contains("n_out") && j["n_out"].get<int>() != static_cast<int>(comps.size())) {
      throw InputError("n_out does not match the number of components");
    }
    return FuncSpec::parse(j.value("name", std::string("phi")), n_in, comps,
                           domain_from_json(j.value("domain", nlohmann::json()), n_in));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed FuncSpec JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------- Grid

Grid::Grid(Domain domain, std::vector<int> counts, double inset)
    : domain_(std::move(domain)) {
  if (static_cast<int>(counts.size()) != domain_.dim()) {
    throw InputError("grid needs one sample count per dimension");
  }
  if (!(inset >= 0.0 && inset < 0.5)) throw InputError("grid inset must be in [0, 0.5)");
  for (int i = 0; i < domain_.dim(); ++i) {
    const Interval& iv = domain_[i];
    if (!iv.bounded()) throw InputError("grid requires a bounded domain");
    if (counts[i] < 2) throw InputError("grid needs at least 2 samples per dimension");
    const double margin = inset * iv.span();
    const bool lo_open = iv.lo_open || (iv.positive && iv.lo == 0.0);
    const double lo = lo_open ? iv.lo + margin : iv.lo;
    const double hi = iv.hi_open ? iv.hi - margin : iv.hi;
    if ((lo_open || iv.hi_open) && !(lo < hi)) {
      throw InputError("grid inset leaves no interior");
    }
    Vec axis(counts[i]);
    for (int k = 0; k < counts[i]; ++k) {
      const double s = static_cast<double>(k) / (counts[i] - 1);
      axis[k] = k == counts[i] - 1 ? hi : lo + s * (hi - lo);
    }
    axes_.push_back(std::move(axis));
  }
}

Grid Grid::uniform(const Domain& domain, int count, double inset) {
  return Grid(domain, std::vector<int>(domain.dim(), count), inset);
}

std::size_t Grid::size() const noexcept {
  std::size_t n = 1;
  for (const Vec& a : axes_) n *= a.size();
  return axes_.empty() ? 0 : n;
}

Vec Grid::point(std::size_t i) const {
  Vec p(axes_.size());
  for (std::size_t d = axes_.size(); d-- > 0;) {
    p[d] = axes_[d][i % axes_[d].size()];
    i /= axes_[d].size();
  }
  return p;
}

std::vector<Vec> Grid::points() const {
  std::vector<Vec> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back(point(i));
  return out;
}

}  // namespace nodeembed
