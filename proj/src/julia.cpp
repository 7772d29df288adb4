#include "nodeembed/julia.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include <boost/math/tools/toms748_solve.hpp>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

namespace nodeembed {

using nlohmann::json;

// ---------------------------------------------------------------- series

PowerSeries::PowerSeries(Vec coeffs) : c_(std::move(coeffs)) {
  if (c_.empty()) throw InputError("power series needs at least one coefficient");
  for (double v : c_) {
    if (!std::isfinite(v)) throw InputError("power series coefficients must be finite");
  }
}

PowerSeries PowerSeries::truncated(int order) const {
  if (order < 0) throw InputError("series order must be non-negative");
  Vec c(order + 1, 0.0);
  for (int i = 0; i <= std::min(order, this->order()); ++i) c[i] = c_[i];
  return PowerSeries(std::move(c));
}

double PowerSeries::eval(double x) const {
  double acc = 0;
  for (std::size_t i = c_.size(); i-- > 0;) acc = acc * x + c_[i];
  return acc;
}

json PowerSeries::to_json() const { return {{"N", order()}, {"coeffs", c_}}; }

PowerSeries PowerSeries::from_json(const json& j) {
  try {
    Vec c = j.at("coeffs").get<Vec>();
    if (j.contains("N")) {
      const int N = j.at("N").get<int>();
      if (N < 0) throw InputError("series order N must be non-negative");
      c.resize(N + 1, 0.0);
    }
    return PowerSeries(std::move(c));
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed series JSON: ") + e.what());
  }
}

PowerSeries mul(const PowerSeries& a, const PowerSeries& b, int order) {
  if (order < 0) order = std::min(a.order(), b.order());
  Vec out(order + 1, 0.0);
  for (int i = 0; i <= std::min(order, a.order()); ++i) {
    if (a[i] == 0) continue;
    for (int j = 0; j <= std::min(order - i, b.order()); ++j) out[i + j] += a[i] * b[j];
  }
  return PowerSeries(std::move(out));
}

PowerSeries compose(const PowerSeries& outer, const PowerSeries& inner, int order) {
  if (inner[0] != 0) throw InputError("composition needs an inner series with zero constant term");
  if (order < 0) order = std::min(outer.order(), inner.order());
  // Horner in the series ring
  PowerSeries acc = PowerSeries::zero(order);
  for (int k = outer.order(); k >= 0; --k) {
    acc = mul(acc, inner, order);
    acc.at(0) += outer[k];
  }
  return acc;
}

PowerSeries derive(const PowerSeries& a) {
  if (a.order() == 0) return PowerSeries::zero(0);
  Vec out(a.order(), 0.0);
  for (int i = 1; i <= a.order(); ++i) out[i - 1] = i * a[i];
  return PowerSeries(std::move(out));
}

// ---------------------------------------------------------------- residuals

std::string ResidualReport::per_point_csv() const {
  std::ostringstream os;
  const std::size_t n = points.empty() ? 0 : points.front().x.size();
  for (std::size_t i = 1; i <= n; ++i) os << 'x' << i << ',';
  os << "residual,status\n";
  for (const auto& p : points) {
    for (double v : p.x) os << format_csv_number(v) << ',';
    if (p.failure.empty()) {
      os << format_csv_number(p.residual) << ",ok\n";
    } else {
      std::string msg = p.failure;
      for (char& ch : msg) {
        if (ch == ',' || ch == '\n' || ch == '"') ch = ' ';
      }
      os << ',' << msg << '\n';
    }
  }
  return os.str();
}

json ResidualReport::to_json(const std::string& csv_ref) const {
  return {{"max", max}, {"argmax", argmax}, {"per_point_csv", csv_ref}, {"failures", failures}};
}

namespace {

template <class Fn>
ResidualReport scan_residual(const Grid& grid, Fn residual_at) {
  ResidualReport rep;
  bool any = false;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    ResidualPoint p;
    p.x = grid.point(i);
    try {
      p.residual = residual_at(p.x);
      if (!any || p.residual > rep.max) {
        rep.max = p.residual;
        rep.argmax = p.x;
        any = true;
      }
    } catch (const Error& e) {
      p.failure = e.what();
      p.residual = std::numeric_limits<double>::quiet_NaN();
      ++rep.failures;
    }
    rep.points.push_back(std::move(p));
  }
  if (!any) rep.max = std::numeric_limits<double>::quiet_NaN();
  return rep;
}

}  // namespace

ResidualReport julia_residual(const FuncSpec& f, const FuncSpec& phi, const Grid& grid) {
  const int n = phi.n_in();
  if (phi.n_out() != n || f.n_in() != n || f.n_out() != n) {
    throw InputError("Julia residual needs Phi and f mapping R^n to R^n with the same n");
  }
  if (grid.dim() != n) throw InputError("grid dimension must match Phi");
  return scan_residual(grid, [&](const Vec& x) {
    const Vec px = phi.eval(x);
    if (!f.domain().contains(px)) throw DomainError("Phi(x) leaves the domain of f");
    const Eigen::MatrixXd J = phi.jacobian_at(x);
    const Vec fx = f.eval(x);
    const Vec fpx = f.eval(px);
    const Eigen::VectorXd lhs = J * Eigen::Map<const Eigen::VectorXd>(fx.data(), n);
    double r = 0;
    for (int i = 0; i < n; ++i) r = std::max(r, std::fabs(lhs(i) - fpx[i]));
    return r;
  });
}

ResidualReport abel_residual(const FuncSpec& r, const FuncSpec& phi, double c, const Grid& grid) {
  const int n = phi.n_in();
  if (phi.n_out() != n || r.n_in() != n || r.n_out() != 1) {
    throw InputError("Abel residual needs Phi: R^n -> R^n and scalar r on R^n");
  }
  if (grid.dim() != n) throw InputError("grid dimension must match Phi");
  return scan_residual(grid, [&](const Vec& x) {
    const Vec px = phi.eval(x);
    if (!r.domain().contains(px)) throw DomainError("Phi(x) leaves the domain of r");
    return std::fabs(r.eval_scalar(px) - r.eval_scalar(x) - c);
  });
}

// ---------------------------------------------------------------- r-function

RFunction::RFunction(FuncSpec f) : RFunction(f, f.domain()) {}

RFunction::RFunction(FuncSpec f, Domain domain) : f_(std::move(f)) {
  if (f_.n_in() != 1 || f_.n_out() != 1) throw InputError("r-function needs a 1-D field");
  if (domain.dim() != 1) throw InputError("r-function needs a 1-D domain");
  iv_ = domain[0];
  if (iv_.positive && iv_.lo == 0) iv_.lo_open = true;

  // scan range: the domain, with infinite ends replaced 100 units out
  const bool lo_fin = std::isfinite(iv_.lo), hi_fin = std::isfinite(iv_.hi);
  const double a = lo_fin ? iv_.lo : (hi_fin ? iv_.hi - 100 : -100);
  const double b = hi_fin ? iv_.hi : (lo_fin ? iv_.lo + 100 : 100);
  const double inset = 1e-6 * (b - a);
  const double lo_s = (lo_fin && iv_.lo_open) ? a + inset : a;
  const double hi_s = (hi_fin && iv_.hi_open) ? b - inset : b;

  if (lo_fin && hi_fin) {
    anchor_ = 0.5 * (iv_.lo + iv_.hi);
  } else if (lo_fin) {
    anchor_ = iv_.lo + 1;
  } else if (hi_fin) {
    anchor_ = iv_.hi - 1;
  } else {
    anchor_ = 0;
  }

  constexpr int kScan = 257;
  Vec xs(kScan);
  for (int i = 0; i < kScan; ++i) xs[i] = lo_s + (hi_s - lo_s) * i / (kScan - 1);
  int sign = 0;
  for (double x : xs) {
    double v;
    try {
      v = f_.eval_scalar(x);
    } catch (const DomainError& e) {
      throw InputError(std::string("r-function field is not defined on its domain: ") + e.what());
    }
    const int s = v > 0 ? 1 : (v < 0 ? -1 : 0);
    if (s == 0 || (sign != 0 && s != sign)) {
      throw InputError("r-function needs a field of constant sign; f(" + format_number(x) +
                       ") = " + format_number(v));
    }
    sign = s;
  }
  sign_ = sign;

  // cumulative integrals outward from the anchor
  nodes_[anchor_] = 0.0;
  auto upper = std::upper_bound(xs.begin(), xs.end(), anchor_);
  double prev = anchor_, acc = 0;
  for (auto it = upper; it != xs.end(); ++it) {
    acc += integrate(prev, *it);
    nodes_[*it] = acc;
    prev = *it;
  }
  prev = anchor_;
  acc = 0;
  for (auto it = std::make_reverse_iterator(upper); it != xs.rend(); ++it) {
    if (*it == anchor_) continue;
    acc += integrate(prev, *it);
    nodes_[*it] = acc;
    prev = *it;
  }
}

double RFunction::integrand(double x) const { return 1.0 / f_.eval_scalar(x); }

double RFunction::integrate(double a, double b) const {
  if (a == b) return 0.0;
  constexpr std::size_t kLimit = 2000;
  struct Ctx {
    const RFunction* self;
    std::string failure;
  } ctx{this, {}};
  gsl_function g;
  g.params = &ctx;
  g.function = [](double x, void* p) {
    auto* c = static_cast<Ctx*>(p);
    try {
      return c->self->integrand(x);
    } catch (const Error& e) {
      if (c->failure.empty()) c->failure = e.what();
      return std::numeric_limits<double>::quiet_NaN();
    }
  };
  std::unique_ptr<gsl_integration_workspace, decltype(&gsl_integration_workspace_free)> ws(
      gsl_integration_workspace_alloc(kLimit), &gsl_integration_workspace_free);
  double result = 0, abserr = 0;
  static const bool handler_off = (gsl_set_error_handler_off(), true);  // statuses are checked below
  (void)handler_off;
  const int status = gsl_integration_qag(&g, a, b, 1e-12, 0.0, kLimit, GSL_INTEG_GAUSS15, ws.get(),
                                         &result, &abserr);
  if (!ctx.failure.empty()) throw DomainError("1/f is not defined on the integration path: " + ctx.failure);
  // roundoff-limited panels still deliver a usable value
  if (!std::isfinite(result) || (status != GSL_SUCCESS && abserr > 1e-9 * (1 + std::fabs(result)))) {
    throw NumericalError("quadrature of 1/f over [" + format_number(a) + ", " + format_number(b) +
                         "] failed: " + gsl_strerror(status));
  }
  return result;
}

double RFunction::operator()(double x) const {
  if (!iv_.contains(x)) throw DomainError("r-function evaluated outside its domain at " + format_number(x));
  auto it = nodes_.lower_bound(x);
  if (it == nodes_.end()) {
    --it;
  } else if (it != nodes_.begin()) {
    auto below = std::prev(it);
    if (x - below->first < it->first - x) it = below;
  }
  return it->second + integrate(it->first, x);
}

double RFunction::inverse(double value, double start) const {
  if (!std::isfinite(value)) throw InputError("r-function inverse needs a finite value");
  const double r0 = (*this)(start);
  if (r0 == value) return start;
  const bool rising = (value > r0) == (sign_ > 0);
  const double boundary = rising ? iv_.hi : iv_.lo;
  auto g = [&](double y) { return (*this)(y) - value; };
  const double g0 = r0 - value;

  double d = std::fabs(value - r0) * std::fabs(f_.eval_scalar(start));
  d = std::max(d, 1e-12 * (1 + std::fabs(start)));
  double y_prev = start, g_prev = g0;
  for (int iter = 0; iter < 4000; ++iter) {
    double y = rising ? y_prev + d : y_prev - d;
    if (std::isfinite(boundary) && (rising ? y >= boundary : y <= boundary)) {
      y = 0.5 * (y_prev + boundary);
      if (std::fabs(boundary - y) <= 4 * std::numeric_limits<double>::epsilon() * (1 + std::fabs(boundary)) ||
          y == y_prev) {
        break;
      }
    } else {
      d *= 2;
    }
    if (!std::isfinite(y) || std::fabs(y) > 1e300) break;
    const double gy = g(y);
    if ((gy > 0) != (g_prev > 0) || gy == 0) {
      if (gy == 0) return y;
      double lo = std::min(y_prev, y), hi = std::max(y_prev, y);
      double glo = lo == y_prev ? g_prev : gy, ghi = hi == y ? gy : g_prev;
      std::uintmax_t max_iter = 200;
      auto tol = [](double p, double q) {
        return std::fabs(q - p) <= 1e-13 + 4 * std::numeric_limits<double>::epsilon() * std::fabs(p);
      };
      const auto root = boost::math::tools::toms748_solve(g, lo, hi, glo, ghi, tol, max_iter);
      return 0.5 * (root.first + root.second);
    }
    y_prev = y;
    g_prev = gy;
  }
  throw NumericalError("r(y) = " + format_number(value) +
                       " has no solution in the domain: the flow leaves the domain first");
}

double jabotinsky_flow(const RFunction& rf, double x, double t,
                       const std::function<double(double)>& gamma) {
  const double shift = gamma ? gamma(t) : t;
  return rf.inverse(rf(x) + shift, x);
}

// ---------------------------------------------------------------- formal solutions

json SeriesSolution::to_json() const {
  json j = series.to_json();
  json tr = json::array();
  for (const auto& s : trace) {
    tr.push_back({{"index", s.index}, {"order", s.order}, {"value", s.value}, {"note", s.note}});
  }
  j["trace"] = tr;
  return j;
}

namespace {

// coefficient of x^k in phi' f - f o phi
double julia_coefficient(const PowerSeries& phi, const PowerSeries& f, int k) {
  const PowerSeries lhs = mul(derive(phi), f, k);
  const PowerSeries rhs = compose(f, phi, k);
  return lhs[k] - rhs[k];
}

}  // namespace

SeriesSolution iterative_logarithm(const PowerSeries& phi, int N) {
  if (phi[0] != 0 || phi[1] != 1) {
    throw InputError("iterative logarithm needs Phi = x + O(x^2) (got constant " + format_number(phi[0]) +
                     ", linear " + format_number(phi[1]) + ")");
  }
  int m = -1;
  for (int i = 2; i <= phi.order(); ++i) {
    if (phi[i] != 0) {
      m = i;
      break;
    }
  }
  if (m < 0) throw InputError("Phi has no nonlinear term: f is determined only up to the trivial solution");
  if (N < m + 1) {
    throw InputError("order N = " + std::to_string(N) + " determines no coefficient beyond x^" +
                     std::to_string(m) + "; need N >= " + std::to_string(m + 1));
  }
  const int work = N + m - 1;
  const PowerSeries p = phi.truncated(work);
  SeriesSolution sol;
  PowerSeries f = PowerSeries::zero(work);
  f.at(m) = phi[m];
  sol.trace.push_back({m, m, phi[m], "leading coefficient b_m (normalisation a = 1)"});
  for (int n = m + 1; n <= N; ++n) {
    const int k = n + m - 1;
    f.at(n) = 0.0;
    const double r0 = julia_coefficient(p, f, k);
    f.at(n) = 1.0;
    const double r1 = julia_coefficient(p, f, k);
    const double slope = r1 - r0;  // (m - n) b_m
    if (slope == 0) throw NumericalError("coefficient x^" + std::to_string(n) + " is not determined");
    f.at(n) = -r0 / slope;
    std::ostringstream note;
    note << "x^" << n << " matches identically; fixed by x^" << k << " (net factor "
         << format_number(slope) << ")";
    sol.trace.push_back({n, k, f[n], note.str()});
  }
  sol.series = f.truncated(N);
  return sol;
}

SeriesSolution monomial_series_solution(double c, int alpha, int N) {
  if (alpha < 2) throw InputError("monomial series certificate needs integer alpha >= 2");
  if (c == 0 || !std::isfinite(c)) throw InputError("monomial series certificate needs finite c != 0");
  if (N < 0) throw InputError("series order N must be non-negative");
  // c alpha x^(alpha-1) f(x) = f(c x^alpha): the left side carries gamma_i at
  // x^(alpha-1+i), the right side gamma_k at x^(alpha k).
  SeriesSolution sol;
  Vec g(N + 1, 0.0);
  g[0] = 0.0;
  sol.trace.push_back({0, 0, 0.0, "x^0: left side has no term, right side gamma_0 = 0"});
  for (int i = 1; i <= N; ++i) {
    const int p = alpha - 1 + i;
    std::ostringstream note;
    if (p % alpha != 0) {
      g[i] = 0.0;
      note << "x^" << p << ": not a multiple of alpha, c alpha gamma_" << i << " = 0";
    } else if (p / alpha == i) {
      g[i] = 0.0;  // c alpha gamma_i = c gamma_i with alpha != 1
      note << "x^" << p << ": c alpha gamma_" << i << " = c gamma_" << i << ", so gamma_" << i << " = 0";
    } else {
      const int k = p / alpha;
      g[i] = std::pow(c, k - 1) * g[k] / alpha;
      note << "x^" << p << ": alpha gamma_" << i << " = c^" << k - 1 << " gamma_" << k << " = 0";
    }
    sol.trace.push_back({i, p, g[i], note.str()});
  }
  sol.series = PowerSeries(std::move(g));
  return sol;
}

// ---------------------------------------------------------------- iterate limit

json LimitSolution::to_json() const {
  return {{"x", xs},
          {"f", values},
          {"iterations", iterations},
          {"julia_residual", julia_residual},
          {"slope_at_zero", slope_at_zero},
          {"note", note}};
}

LimitSolution principal_solution_limit(const FuncSpec& phi, const Grid& grid, long n_max, double tol) {
  if (phi.n_in() != 1 || phi.n_out() != 1 || grid.dim() != 1) {
    throw InputError("iterate-limit solution is 1-D only");
  }
  if (n_max < 1 || !(tol > 0)) throw InputError("need n_max >= 1 and tol > 0");
  const Interval& iv = grid.domain()[0];
  if (iv.lo != 0 || !std::isfinite(iv.hi) || !(iv.hi > 0)) {
    throw InputError("iterate-limit solution needs the interval [0, b] with b > 0");
  }
  const double b = iv.hi;
  const Expr d1 = phi.component(0).derivative(0);
  const Expr d2 = d1.derivative(0);
  auto ev = [](const Expr& e, double x) { return e.eval(std::span<const double>(&x, 1)); };

  LimitSolution out;
  out.slope_at_zero = ev(d1, 0.0);
  const double s = out.slope_at_zero;
  if (!(s > 0 && s < 1)) {
    throw InputError("hypothesis violated: Phi'(0) = " + format_number(s) +
                     " must lie strictly between 0 and 1");
  }
  if (ev(phi.component(0), 0.0) != 0) throw InputError("hypothesis violated: Phi(0) must be 0");
  constexpr int kScan = 513;
  int curvature = 0;
  for (int i = 1; i < kScan; ++i) {
    const double x = b * i / (kScan - 1);
    const double px = phi.eval_scalar(x);
    if (!(px > 0 && px < x)) {
      throw InputError("hypothesis violated: need 0 < Phi(x) < x, but Phi(" + format_number(x) +
                       ") = " + format_number(px));
    }
    if (ev(d1, x) == 0) throw InputError("hypothesis violated: Phi'(" + format_number(x) + ") = 0");
    const double c2 = ev(d2, x);
    const int sgn = c2 > 1e-14 ? 1 : (c2 < -1e-14 ? -1 : 0);
    if (sgn != 0) {
      if (curvature != 0 && sgn != curvature) {
        throw InputError("hypothesis violated: Phi is neither convex nor concave on [0, b]");
      }
      curvature = sgn;
    }
  }

  auto limit_at = [&](double x, long& used) {
    double y = x, d = 1.0, prev = x;
    for (long n = 1; n <= n_max; ++n) {
      d *= ev(d1, y);
      y = phi.eval_scalar(y);
      const double ratio = y == 0 ? 0.0 : y / d;
      if (!std::isfinite(ratio)) break;
      if (std::fabs(ratio - prev) < tol * std::max(1.0, std::fabs(ratio))) {
        used = n;
        return ratio;
      }
      prev = ratio;
    }
    throw NumericalError("iterate ratio did not converge from x = " + format_number(x) + " within " +
                         std::to_string(n_max) + " iterations");
  };

  for (double x : grid.axis(0)) {
    long used = 0;
    const double fx = limit_at(x, used);
    long used2 = 0;
    const double fpx = limit_at(phi.eval_scalar(x), used2);
    out.julia_residual = std::max(out.julia_residual, std::fabs(ev(d1, x) * fx - fpx));
    out.xs.push_back(x);
    out.values.push_back(fx);
    out.iterations.push_back(used);
  }
  out.note =
      "normalised to a = 1; the limit iterates Phi, i.e. f(x) = lim Phi^n(x) / (Phi^n)'(x), "
      "and is checked through the Julia residual at the grid points";
  return out;
}

}  // namespace nodeembed
