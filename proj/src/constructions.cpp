#include "nodeembed/constructions.hpp"

#include <cmath>
#include <numbers>

namespace nodeembed {

using nlohmann::json;

std::string to_string(ConstructionId id) {
  switch (id) {
    case ConstructionId::Linear: return "linear";
    case ConstructionId::Monomial: return "monomial";
    case ConstructionId::Moebius: return "moebius";
    case ConstructionId::Negation: return "negation";
    case ConstructionId::Polynomial: return "polynomial";
    case ConstructionId::Universal: return "universal";
  }
  return "unknown";
}

ConstructionId construction_from_string(const std::string& s) {
  for (ConstructionId id : {ConstructionId::Linear, ConstructionId::Monomial,
                            ConstructionId::Moebius, ConstructionId::Negation,
                            ConstructionId::Polynomial, ConstructionId::Universal}) {
    if (to_string(id) == s) return id;
  }
  throw InputError("unknown construction '" + s +
                   "' (expected linear, monomial, moebius, negation, polynomial or universal)");
}

namespace {

void check_horizon(double T) {
  if (!(T > 0) || !std::isfinite(T)) throw InputError("horizon T must be positive and finite");
}

void check_finite(double v, const char* name) {
  if (!std::isfinite(v)) throw InputError(std::string(name) + " must be finite");
}

Interval positive_axis() { return Interval{0.0, kInf, true, true, true}; }

Expr var(int i) { return Expr::variable(i); }

// (ln a / T) h ln(K h): the field whose flow is (K h)^(a^(t/T)) / K
Expr monomial_field(double alpha, double K, double T, int index) {
  const double rate = std::log(alpha) / T;
  if (K == 1.0) return rate * (var(index) * ln(var(index)));
  return rate * (var(index) * ln(K * var(index)));
}

double monomial_flow(double x, double t, double alpha, double K, double T) {
  if (!(x > 0)) throw DomainError("monomial flow is defined for x > 0 only");
  return std::pow(K * x, std::pow(alpha, t / T)) / K;
}

}  // namespace

Construction construct_linear(double c, double T) {
  check_horizon(T);
  check_finite(c, "c");
  if (c <= 0) {
    throw InputError("c = " + format_number(c) +
                     " <= 0: x -> c*x is not the time-T map of any basic neural ODE "
                     "(time-T maps of 1-D flows are strictly increasing)");
  }
  Construction out;
  out.id = ConstructionId::Linear;
  const double rate = std::log(c) / T;
  const Expr f = rate * var(0);
  out.arch = NodeArchitecture::basic(VectorField(FuncSpec("linear_field", 1, {f})), T);
  out.target = FuncSpec("linear_target", 1, {c * var(0)});
  out.closed_form = [c, T](std::span<const double> x, double t) {
    return Vec{x[0] * std::pow(c, t / T)};
  };
  out.citation =
      "basic neural ODE, 1-D: x -> c*x with c > 0 is the time-T map of f(h) = ln(c)/T * h; "
      "for c <= 0 no basic neural ODE has this time-T map";
  return out;
}

Construction construct_monomial(double c, double alpha, double T) {
  check_horizon(T);
  check_finite(c, "c");
  check_finite(alpha, "alpha");
  if (!(c > 0)) throw InputError("monomial construction needs c > 0, got " + format_number(c));
  if (!(alpha > 0)) throw InputError("monomial construction needs alpha > 0, got " + format_number(alpha));
  if (alpha == 1.0) throw InputError("alpha = 1 is linear: use the linear construction");
  Construction out;
  out.id = ConstructionId::Monomial;
  // c^(1/(alpha-1)) as a single constant
  const double K = std::exp(std::log(c) / (alpha - 1));
  const Domain pos({positive_axis()});
  out.arch = NodeArchitecture::basic(
      VectorField(FuncSpec("monomial_field", 1, {monomial_field(alpha, K, T, 0)}, pos)), T, pos);
  out.target = FuncSpec("monomial_target", 1, {c * pow(var(0), alpha)}, pos);
  out.closed_form = [alpha, K, T](std::span<const double> x, double t) {
    return Vec{monomial_flow(x[0], t, alpha, K, T)};
  };
  out.citation =
      "basic neural ODE on x > 0: x -> c*x^alpha (c > 0, alpha > 0, alpha != 1) is the time-T "
      "map of f(h) = ln(alpha)/T * h * ln(c^(1/(alpha-1)) h), with flow "
      "c^(1/(1-alpha)) (c^(1/(alpha-1)) x)^(alpha^(t/T))";
  return out;
}

Construction construct_moebius(double c, double T) {
  check_horizon(T);
  check_finite(c, "c");
  if (c == 0) throw InputError("Moebius construction needs c != 0 (c = 0 is the identity)");
  Construction out;
  out.id = ConstructionId::Moebius;
  // keep c*x*(T + eps)/T < 1 with eps = 1e-9 T so the solver stays off the pole
  const double edge = 1.0 / (c * (1.0 + 1e-9));
  const Domain input(
      {c > 0 ? Interval{-kInf, edge, true, true, false} : Interval{edge, kInf, true, true, false}});
  const Expr f = (c / T) * pow(var(0), 2.0);
  out.arch = NodeArchitecture::basic(VectorField(FuncSpec("moebius_field", 1, {f})), T, input);
  out.target = FuncSpec("moebius_target", 1, {var(0) / (Expr(1.0) - c * var(0))}, input);
  out.closed_form = [c, T](std::span<const double> x, double t) {
    const double denom = 1.0 - c * x[0] * t / T;
    if (!(denom > 0)) {
      throw DomainError("Moebius flow from x=" + format_number(x[0]) + " does not exist up to t=" +
                        format_number(t) + " (1 - c*x*t/T <= 0)");
    }
    return Vec{x[0] / denom};
  };
  out.citation =
      "1-D quadratic field f(h) = c/T * h^2 has flow x/(1 - c*x*t/T) and time-T map "
      "x/(1 - c*x), defined while c*x < 1";
  return out;
}

Construction construct_negation(double T) {
  check_horizon(T);
  Construction out;
  out.id = ConstructionId::Negation;
  const double w = std::numbers::pi / T;
  const Expr f0 = -(w * var(1));
  const Expr f1 = w * var(0);
  out.arch = NodeArchitecture::augmented(VectorField(FuncSpec("rotation_field", 2, {f0, f1})), T, 1);
  out.target = FuncSpec("negation_target", 1, {-var(0)});
  out.closed_form = [w](std::span<const double> x, double t) {
    return Vec{x[0] * std::cos(w * t), x[0] * std::sin(w * t)};
  };
  out.citation =
      "augmented neural ODE, m = 2: rotating (x, 0) by pi with f(h) = pi/T * (-h2, h1) "
      "embeds x -> -x, which no basic neural ODE can";
  return out;
}

Construction construct_polynomial(const Vec& coeffs, double T) {
  check_horizon(T);
  const int n = static_cast<int>(coeffs.size());
  if (n < 1) throw InputError("polynomial construction needs at least one coefficient");
  for (double a : coeffs) check_finite(a, "coefficient");
  Construction out;
  out.id = ConstructionId::Polynomial;
  const Domain pos1({positive_axis()});
  const Domain posn(std::vector<Interval>(n, positive_axis()));
  std::vector<Expr> copies(n, var(0));
  std::vector<Expr> field(n);
  Expr sum;
  Expr target;
  for (int k = 1; k <= n; ++k) {
    field[k - 1] = k == 1 ? Expr(0.0) : monomial_field(static_cast<double>(k), 1.0, T, k - 1);
    sum = sum + coeffs[k - 1] * var(k - 1);
    target = target + coeffs[k - 1] * pow(var(0), static_cast<double>(k));
  }
  out.arch = NodeArchitecture::two_layer(
      FuncSpec("replicate", 1, copies, pos1), VectorField(FuncSpec("power_fields", n, field, posn)),
      FuncSpec("combine", n, {sum}, posn), T, pos1);
  out.target = FuncSpec("polynomial_target", 1, {target}, pos1);
  out.closed_form = [n, T](std::span<const double> x, double t) {
    Vec h(n);
    for (int k = 1; k <= n; ++k) h[k - 1] = k == 1 ? x[0] : monomial_flow(x[0], t, k, 1.0, T);
    return h;
  };
  out.citation =
      "two-layer neural ODE on x > 0: copy x into n coordinates, flow coordinate k with "
      "f_k(h) = ln(k)/T * h ln h to reach x^k, then combine linearly with the coefficients";
  return out;
}

Construction construct_universal(const FuncSpec& phi, double T) {
  check_horizon(T);
  const int n = phi.n_in();
  const int k = phi.n_out();
  if (n < 1) throw InputError("universal construction needs n_in >= 1");
  Construction out;
  out.id = ConstructionId::Universal;
  std::vector<Expr> field(n, Expr(0.0));
  for (int j = 0; j < k; ++j) field.push_back((1.0 / T) * phi.component(j));
  std::vector<Interval> dims = phi.domain().intervals();
  dims.resize(n + k, Interval{});
  LinearLayer L;
  L.A = Eigen::MatrixXd::Zero(k, n + k);
  L.A.rightCols(k).setIdentity();
  L.a = Eigen::VectorXd::Zero(k);
  out.arch = NodeArchitecture::augmented_with_linear(
      VectorField(FuncSpec(phi.name() + "_universal_field", n + k, field, Domain(dims))), T, n,
      std::move(L), phi.domain());
  out.target = phi;
  out.closed_form = [phi, T, n](std::span<const double> x, double t) {
    Vec h(x.begin(), x.begin() + n);
    for (double v : phi.eval(x.first(n))) h.push_back(v * t / T);
    return h;
  };
  out.citation =
      "augmented neural ODE with linear layer, m = n_in + n_out: freeze x, integrate "
      "Phi(x)/T in the extra coordinates and read them out with A = (0 | I); embeds any "
      "evaluable Phi";
  return out;
}

Construction construct(const std::string& id, const json& params) {
  if (!params.is_object()) throw InputError("construction parameters must be a JSON object");
  try {
    const double T = params.value("T", 1.0);
    auto need = [&](const char* key) {
      if (!params.contains(key)) {
        throw InputError("construction '" + id + "' needs parameter \"" + key + "\"");
      }
      return params.at(key);
    };
    switch (construction_from_string(id)) {
      case ConstructionId::Linear: return construct_linear(need("c").get<double>(), T);
      case ConstructionId::Monomial:
        return construct_monomial(need("c").get<double>(), need("alpha").get<double>(), T);
      case ConstructionId::Moebius: return construct_moebius(need("c").get<double>(), T);
      case ConstructionId::Negation: return construct_negation(T);
      case ConstructionId::Polynomial: return construct_polynomial(need("coeffs").get<Vec>(), T);
      case ConstructionId::Universal: return construct_universal(FuncSpec::from_json(need("phi")), T);
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("bad construction parameters: ") + e.what());
  }
  throw InputError("unreachable construction id");
}

Vec closed_form_solution(const Construction& c, std::span<const double> x, double t) {
  if (static_cast<int>(x.size()) != c.arch.n_in()) {
    throw InputError("closed form expects an input of dimension " + std::to_string(c.arch.n_in()));
  }
  if (!std::isfinite(t)) throw InputError("time must be finite");
  if (!c.arch.input_domain().contains(x)) {
    throw DomainError("input outside the construction's domain");
  }
  return c.closed_form(x, t);
}

}  // namespace nodeembed
