#include "nodeembed/morse.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include <Eigen/Dense>
#include <boost/math/tools/toms748_solve.hpp>

namespace nodeembed {

using nlohmann::json;

namespace {

constexpr int kMaxNewton = 50;
constexpr int kMaxOrder = 12;

double norm2(const Vec& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double max_span(const Domain& d) {
  double s = 0;
  for (const auto& iv : d.intervals()) s = std::max(s, iv.span());
  return s;
}

void require_scalar(const FuncSpec& psi, const char* what) {
  if (psi.n_out() != 1) throw InputError(std::string(what) + " needs a scalar map");
}

void require_1d(const FuncSpec& f, const char* what) {
  if (f.n_in() != 1 || f.n_out() != 1) throw InputError(std::string(what) + " needs a map R -> R");
}

// Root of fn on [a, b] given a sign change; returns the endpoint of the final
// bracket with the smaller |fn|.
double bracket_root(const std::function<double(double)>& fn, double a, double b) {
  boost::math::tools::eps_tolerance<double> tol(52);
  std::uintmax_t iters = 200;
  const auto [l, r] = boost::math::tools::toms748_solve(fn, a, b, tol, iters);
  return std::fabs(fn(l)) <= std::fabs(fn(r)) ? l : r;
}

std::optional<double> newton_1d(const Expr& g, const Expr& g1, const Expr& g2, double x, bool multiple) {
  for (int it = 0; it < kMaxNewton; ++it) {
    const double gv = g.eval(std::span<const double>(&x, 1));
    if (gv == 0) return x;
    const double d1 = g1.eval(std::span<const double>(&x, 1));
    double step;
    if (multiple) {
      const double d2 = g2.eval(std::span<const double>(&x, 1));
      const double den = d1 * d1 - gv * d2;
      if (den == 0) return std::nullopt;
      step = gv * d1 / den;
    } else {
      if (d1 == 0) return std::nullopt;
      step = gv / d1;
    }
    if (!std::isfinite(step)) return std::nullopt;
    x -= step;
    if (std::fabs(step) <= 1e-15 * (1 + std::fabs(x))) return x;
  }
  return x;
}

std::optional<Vec> newton_nd(const FuncSpec& psi, Vec x) {
  const int n = static_cast<int>(x.size());
  for (int it = 0; it < kMaxNewton; ++it) {
    const Vec g = psi.gradient_at(0, x);
    if (norm2(g) == 0) return x;
    const Eigen::MatrixXd H = psi.hessian_at(0, x);
    const Eigen::VectorXd step =
        H.completeOrthogonalDecomposition().solve(Eigen::Map<const Eigen::VectorXd>(g.data(), n));
    if (!step.allFinite()) return std::nullopt;
    for (int i = 0; i < n; ++i) x[i] -= step(i);
    if (step.norm() <= 1e-15 * (1 + norm2(x))) return x;
  }
  return x;
}

int even_order(int k) {
  if (k % 2 != 0) throw InputError("topological chart needs an even order k");
  return k;
}

double factorial(int k) {
  double f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace

json CriticalPoint::to_json() const {
  json j = {{"p", p},
            {"grad_norm", grad_norm},
            {"eigenvalues", eigenvalues},
            {"index", index},
            {"degenerate", degenerate}};
  if (order) j["order"] = *order;
  if (gamma) j["gamma"] = *gamma;
  return j;
}

// ---------------------------------------------------------------- search

CriticalSearch find_critical_points(const FuncSpec& psi, const Grid& grid, double tol) {
  require_scalar(psi, "critical point search");
  if (grid.dim() != psi.n_in()) throw InputError("grid dimension must match the map");
  if (!(tol > 0)) throw InputError("critical tolerance must be positive");
  const int n = psi.n_in();
  const auto inside = [&](const Vec& x) {
    return grid.domain().contains(x) && psi.domain().contains(x);
  };

  Expr g, g1, g2;
  if (n == 1) {
    g = psi.component(0).derivative(0);
    g1 = g.derivative(0);
    g2 = g1.derivative(0);
  }

  CriticalSearch out;
  std::vector<std::pair<Vec, double>> found;
  for (const Vec& seed : grid.points()) {
    ++out.seeds;
    const auto accept = [&](const std::optional<Vec>& x) -> bool {
      if (!x || !inside(*x)) return false;
      const double gn = norm2(psi.gradient_at(0, *x));
      if (!(gn <= tol)) return false;
      found.emplace_back(*x, gn);
      return true;
    };
    try {
      if (n == 1) {
        bool ok = false;
        for (bool multiple : {true, false}) {
          try {
            const auto r = newton_1d(g, g1, g2, seed[0], multiple);
            ok = accept(r ? std::optional<Vec>(Vec{*r}) : std::nullopt);
          } catch (const DomainError&) {
            ok = false;
          }
          if (ok) break;
        }
        if (!ok) ++out.dropped;
      } else if (!accept(newton_nd(psi, seed))) {
        ++out.dropped;
      }
    } catch (const DomainError&) {
      ++out.dropped;
    }
  }

  std::sort(found.begin(), found.end());
  const double radius = 1e-6 * max_span(grid.domain());
  for (auto& [x, gn] : found) {
    bool dup = false;
    for (std::size_t i = 0; i < out.points.size(); ++i) {
      double d = 0;
      for (int k = 0; k < n; ++k) d = std::max(d, std::fabs(out.points[i][k] - x[k]));
      if (d <= radius) {
        dup = true;
        if (gn < norm2(psi.gradient_at(0, out.points[i]))) out.points[i] = x;
        break;
      }
    }
    if (!dup) out.points.push_back(x);
  }
  std::sort(out.points.begin(), out.points.end());
  return out;
}

CriticalPoint classify_critical(const FuncSpec& psi, std::span<const double> p) {
  require_scalar(psi, "classification");
  if (static_cast<int>(p.size()) != psi.n_in()) throw InputError("point dimension must match the map");
  CriticalPoint cp;
  cp.p.assign(p.begin(), p.end());
  cp.grad_norm = norm2(psi.gradient_at(0, p));
  const Eigen::MatrixXd H = psi.hessian_at(0, p);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd ev = es.eigenvalues();
  cp.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  const double hnorm = ev.size() ? ev.cwiseAbs().maxCoeff() : 0.0;
  cp.threshold = 1e-6 * (1 + hnorm);
  for (double e : cp.eigenvalues) {
    if (e < -cp.threshold) ++cp.index;
    if (std::fabs(e) <= cp.threshold) cp.degenerate = true;
  }
  if (psi.n_in() == 1) {
    if (!cp.degenerate) {
      cp.order = 2;
      cp.gamma = cp.eigenvalues[0];
    } else {
      Expr d = psi.component(0).derivative(0).derivative(0);
      for (int k = 3; k <= kMaxOrder; ++k) {
        d = d.derivative(0);
        const double v = d.eval(p);
        if (std::fabs(v) > cp.threshold) {
          cp.order = k;
          cp.gamma = v;
          break;
        }
      }
      if (!cp.order) {
        throw NumericalError("classification inconclusive at " + format_number(p[0]) +
                             ": no derivative up to order 12 is non-zero");
      }
    }
  }
  return cp;
}

// ---------------------------------------------------------------- normal forms

NormalForm1d::NormalForm1d(const FuncSpec& psi, double p, int k) : psi_(psi), p_(p), k_(k) {
  require_1d(psi, "1-D normal form");
  if (k < 2 || k > kMaxOrder) throw InputError("normal form order must be in [2, 12]");
  if (!psi.domain().contains(std::span<const double>(&p, 1))) {
    throw DomainError("critical point outside the domain");
  }
  Vec d(kMaxOrder + 1);
  Expr e = psi.component(0);
  for (int j = 0; j <= kMaxOrder; ++j) {
    d[j] = e.eval(std::span<const double>(&p, 1));
    e = e.derivative(0);
  }
  gamma_ = d[k];
  if (gamma_ == 0) throw InputError("derivative of order " + std::to_string(k) + " vanishes at p");
  for (int j = 1; j < k; ++j) {
    if (std::fabs(d[j]) > 1e-6 * (1 + std::fabs(gamma_))) {
      throw InputError("derivative of order " + std::to_string(j) + " does not vanish at p");
    }
  }
  s_ = gamma_ > 0 ? 1 : -1;
  psi_p_ = d[0];
  for (int j = k; j <= kMaxOrder; ++j) taylor_.push_back(d[j] / factorial(j));
  // below this distance the difference quotient loses more than ~1e-10 relative accuracy
  const double g0 = std::fabs(taylor_[0]);
  taylor_radius_ = std::pow(std::numeric_limits<double>::epsilon() * (1 + std::fabs(psi_p_)) /
                                (1e-10 * g0),
                            1.0 / k);

  // widest bracket around p on which s g > 0 and eta is strictly monotone
  double reach = 1.0;
  const Interval& iv = psi.domain()[0];
  if (std::isfinite(iv.lo)) reach = std::min(reach, 0.999 * (p - iv.lo));
  if (std::isfinite(iv.hi)) reach = std::min(reach, 0.999 * (iv.hi - p));
  if (!(reach > 0)) throw NumericalError("critical point lies on the domain boundary");
  constexpr int kScan = 400;
  const auto walk = [&](int dir) {
    double last = p, prev = 0;
    for (int j = 1; j <= kScan; ++j) {
      const double x = p + dir * reach * j / kScan;
      double v;
      try {
        if (!(s_ * g(x) > 0)) break;
        v = s_ * eta(x);
      } catch (const DomainError&) {
        break;
      }
      if (!std::isfinite(v) || (dir > 0 ? v <= prev : v >= prev)) break;
      prev = v;
      last = x;
    }
    return last;
  };
  x_lo_ = walk(-1);
  x_hi_ = walk(+1);
  if (x_lo_ == p || x_hi_ == p) {
    throw NumericalError("no symmetric neighbourhood of p on which s*g > 0");
  }
  u_radius_ = std::min(std::fabs(eta(x_lo_)), std::fabs(eta(x_hi_)));

  constexpr int kTest = 201;
  for (int i = 0; i < kTest; ++i) {
    const double u = -u_radius_ + 2 * u_radius_ * i / (kTest - 1);
    const double x = mu(u);
    residual_ = std::max(residual_, std::fabs(psi_.eval_scalar(x) - model(u)));
  }
}

double NormalForm1d::g(double x) const {
  const double h = x - p_;
  if (std::fabs(h) <= taylor_radius_) {
    double acc = 0;
    for (std::size_t i = taylor_.size(); i-- > 0;) acc = acc * h + taylor_[i];
    return acc;
  }
  return (psi_.eval_scalar(x) - psi_p_) / std::pow(h, k_);
}

double NormalForm1d::eta(double x) const {
  return s_ * std::pow(s_ * g(x), 1.0 / k_) * (x - p_);
}

double NormalForm1d::mu(double u) const {
  if (!(std::fabs(u) <= u_radius_ * (1 + 1e-12))) {
    throw DomainError("u = " + format_number(u) + " outside the normal-form neighbourhood");
  }
  if (u == 0) return p_;
  const auto fn = [&](double x) { return eta(x) - u; };
  // eta has the sign of s (x - p)
  const bool right = s_ * u > 0;
  double a = right ? p_ : x_lo_, b = right ? x_hi_ : p_;
  if (fn(a) * fn(b) > 0) {  // |u| at the radius edge, rounding
    return std::fabs(fn(a)) < std::fabs(fn(b)) ? a : b;
  }
  return bracket_root(fn, a, b);
}

double NormalForm1d::model(double u) const {
  const double sk = (k_ - 1) % 2 == 0 ? 1.0 : static_cast<double>(s_);
  return psi_p_ + sk * std::pow(u, k_);
}

json NormalForm1d::to_json() const {
  return {{"p", p_},         {"k", k_},
          {"gamma", gamma_}, {"sign", s_},
          {"value_at_p", psi_p_}, {"neighbourhood", {x_lo_, x_hi_}},
          {"u_radius", u_radius_}, {"residual", residual_}};
}

TopologicalChart1d::TopologicalChart1d(const FuncSpec& psi, double p, int k)
    : nf_(psi, p, even_order(k)) {
  v_radius_ = std::pow(nf_.u_radius(), k / 2.0);
  constexpr int kTest = 201;
  for (int i = 0; i < kTest; ++i) {
    const double v = -v_radius_ + 2 * v_radius_ * i / (kTest - 1);
    const double x = (*this)(v);
    const double model = nf_.value_at_p() + nf_.sign() * v * v;
    residual_ = std::max(residual_, std::fabs(psi.eval_scalar(x) - model));
  }
}

double TopologicalChart1d::operator()(double v) const {
  const double u = std::copysign(std::pow(std::fabs(v), 2.0 / nf_.k()), v);
  return nf_.mu(std::clamp(u, -nf_.u_radius(), nf_.u_radius()));
}

json TopologicalChart1d::to_json() const {
  return {{"normal_form", nf_.to_json()},
          {"v_radius", v_radius_},
          {"index", index()},
          {"residual", residual_}};
}

// ---------------------------------------------------------------- perturbation, norms

json MorseifyResult::to_json() const {
  json cps = json::array();
  for (const auto& c : critical) cps.push_back(c.to_json());
  return {{"perturbed", perturbed.to_json()},
          {"a", a},
          {"critical_points", cps},
          {"morse", morse},
          {"attempts", attempts}};
}

MorseifyResult morseify(const FuncSpec& psi, double bound, std::uint64_t seed, const Grid& grid) {
  require_scalar(psi, "perturbation");
  if (!(bound > 0) || !std::isfinite(bound)) throw InputError("perturbation bound must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> draw(-bound, bound);
  const int n = psi.n_in();
  for (int attempt = 1; attempt <= 5; ++attempt) {
    MorseifyResult r;
    r.attempts = attempt;
    r.a.resize(n);
    Expr e = psi.component(0);
    for (int j = 0; j < n; ++j) {
      r.a[j] = draw(rng);
      e = e + r.a[j] * Expr::variable(j);
    }
    r.perturbed = FuncSpec(psi.name() + "_a", n, {e}, psi.domain());
    r.morse = true;
    for (const Vec& p : find_critical_points(r.perturbed, grid).points) {
      try {
        r.critical.push_back(classify_critical(r.perturbed, p));
        if (r.critical.back().degenerate) r.morse = false;
      } catch (const NumericalError&) {
        r.morse = false;
      }
    }
    if (r.morse) return r;
  }
  throw NumericalError("five perturbations in a row left a degenerate critical point");
}

double ck_norm(const FuncSpec& psi, int k, const Grid& grid) {
  require_scalar(psi, "C^k norm");
  if (k < 0) throw InputError("C^k norm needs k >= 0");
  if (grid.dim() != psi.n_in()) throw InputError("grid dimension must match the map");
  const auto pts = grid.points();
  double total = 0;
  // each multi-index once: non-decreasing sequences of variables
  std::function<void(const Expr&, int, int)> visit = [&](const Expr& e, int depth, int first) {
    double sup = 0;
    for (const Vec& x : pts) sup = std::max(sup, std::fabs(e.eval(x)));
    total += sup;
    if (depth == k) return;
    for (int v = first; v < psi.n_in(); ++v) visit(e.derivative(v), depth + 1, v);
  };
  visit(psi.component(0), 0, 0);
  return total;
}

AntipodalResult antipodal_point(const FuncSpec& g, double tol) {
  if (g.n_in() != 2 || g.n_out() != 1) throw InputError("antipodal search needs g: R^2 -> R");
  if (!(tol > 0)) throw InputError("antipodal tolerance must be positive");
  const auto d = [&](double th) {
    const double u[2] = {std::cos(th), std::sin(th)};
    const double w[2] = {-u[0], -u[1]};
    return g.eval_scalar(u) - g.eval_scalar(w);
  };
  const auto result = [&](double th) {
    AntipodalResult r;
    r.theta = th;
    r.u = {std::cos(th), std::sin(th)};
    r.residual = std::fabs(d(th));
    return r;
  };
  constexpr int kScan = 1024;
  double a = 0, da = d(0);
  if (std::fabs(da) <= tol) return result(0);
  for (int i = 1; i <= kScan; ++i) {
    const double b = M_PI * i / kScan;
    const double db = d(b);
    if (std::fabs(db) <= tol) return result(b);
    if ((da < 0) != (db < 0)) {
      const AntipodalResult r = result(bracket_root(d, a, b));
      if (r.residual > tol) {
        throw NumericalError("antipodal residual " + format_number(r.residual) + " above tolerance");
      }
      return r;
    }
    a = b;
    da = db;
  }
  throw NumericalError("no sign change of g(u) - g(-u) found; g is not continuous on the circle");
}

// ---------------------------------------------------------------- separation

SeparationReport separation_obstruction_1d(const FuncSpec& phi, const Grid& grid) {
  require_1d(phi, "separation test");
  if (grid.dim() != 1) throw InputError("separation test needs a 1-D grid");
  std::vector<std::pair<double, double>> samples;  // (x, Phi(x))
  for (double x : grid.axis(0)) {
    try {
      samples.emplace_back(x, phi.eval_scalar(x));
    } catch (const DomainError&) {
    }
  }
  SeparationReport rep;
  const auto e = [&](double x) { return phi.eval_scalar(x) - x; };
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double ei = samples[i].second - samples[i].first;
    if (ei == 0) {
      rep.fixed_points.push_back(samples[i].first);
      continue;
    }
    if (i + 1 < samples.size()) {
      const double ej = samples[i + 1].second - samples[i + 1].first;
      if (ej != 0 && (ei < 0) != (ej < 0)) {
        try {
          rep.fixed_points.push_back(bracket_root(e, samples[i].first, samples[i + 1].first));
        } catch (const DomainError&) {
        }
      }
    }
  }
  const double span = max_span(grid.domain());
  double best = 0;
  for (double z : rep.fixed_points) {
    const double margin = 1e-9 * (1 + std::fabs(z)) * std::max(1.0, span);
    for (const auto& [x, y] : samples) {
      if ((x - z) * (y - z) >= 0) continue;
      const double clear = std::min(std::fabs(x - z), std::fabs(y - z));
      if (clear > margin && clear > best) {
        best = clear;
        rep.witness = SeparationWitness{z, x, y};
      }
    }
  }
  return rep;
}

// ---------------------------------------------------------------- diagnosis

std::string to_string(MorseStatus s) {
  switch (s) {
    case MorseStatus::Established:
      return "established";
    case MorseStatus::NotEstablished:
      return "not-established";
    case MorseStatus::OutOfScope:
      return "out-of-scope";
  }
  return "?";
}

std::string to_string(Verdict v) {
  return v == Verdict::NonEmbeddable ? "NON-EMBEDDABLE" : "NO-OBSTRUCTION-FOUND";
}

json DiagnosisReport::to_json() const {
  json comps = json::array();
  for (const auto& c : components) {
    json cps = json::array();
    for (const auto& cp : c.critical) cps.push_back(cp.to_json());
    comps.push_back({{"critical_points", cps},
                     {"status", to_string(c.status)},
                     {"certificates", c.certificates},
                     {"notes", c.notes},
                     {"dropped_seeds", c.dropped_seeds}});
  }
  json rec = nullptr;
  if (recommendation) {
    rec = {{"architecture", "node4"}, {"variant", "augmented_with_linear"}, {"construction", *recommendation}};
  }
  json mono = nullptr;
  if (monotone) {
    mono = {{"strictly_increasing", *monotone}};
    if (monotone_witness) mono["witness"] = {monotone_witness->first, monotone_witness->second};
  }
  json sep = nullptr;
  if (separation) {
    sep = {{"fixed_points", separation->fixed_points},
           {"witness", nullptr},
           {"scope", "fixed points of 1-D maps only"}};
    if (separation->witness) {
      const auto& w = *separation->witness;
      sep["witness"] = {{"z", w.z}, {"x_star", w.x_star}, {"image", w.image}};
    }
  }
  return {{"components", comps},
          {"verdicts", {{"node1", to_string(node1)}, {"node2", to_string(node2)}, {"node3", to_string(node3)}}},
          {"reasons", reasons},
          {"recommendation", rec},
          {"witnesses", {{"monotonicity", mono}, {"separation", sep}}}};
}

namespace {

ComponentDiagnosis diagnose_component(const FuncSpec& psi, const Grid& grid) {
  ComponentDiagnosis out;
  const auto search = find_critical_points(psi, grid);
  out.dropped_seeds = search.dropped;
  bool blocked = false, out_of_scope = false;
  for (const Vec& p : search.points) {
    CriticalPoint cp;
    try {
      cp = classify_critical(psi, p);
    } catch (const NumericalError& e) {
      out.notes.push_back(e.what());
      blocked = true;
      continue;
    }
    out.critical.push_back(cp);
    if (psi.n_in() == 1) {
      const int k = *cp.order;
      if (k % 2 != 0) {
        out.notes.push_back("odd order " + std::to_string(k) + " at " + format_number(p[0]) +
                            ": topologically ordinary");
        continue;
      }
      try {
        const TopologicalChart1d chart(psi, p[0], k);
        if (chart.residual() <= 1e-8) {
          json cert = chart.to_json();
          cert["kind"] = "topological-chart";
          cert["p"] = p;
          out.certificates.push_back(cert);
        } else {
          out.notes.push_back("chart residual " + format_number(chart.residual()) + " at " +
                              format_number(p[0]) + " above 1e-8");
          blocked = true;
        }
      } catch (const Error& e) {
        out.notes.push_back(std::string("no chart at ") + format_number(p[0]) + ": " + e.what());
        blocked = true;
      }
    } else if (cp.degenerate) {
      out.notes.push_back("degenerate critical point in dimension " + std::to_string(psi.n_in()) +
                          " is not classified");
      out_of_scope = true;
    } else {
      out.certificates.push_back({{"kind", "nondegenerate-hessian"},
                                  {"p", p},
                                  {"index", cp.index},
                                  {"eigenvalues", cp.eigenvalues}});
    }
  }
  if (out_of_scope) {
    out.status = MorseStatus::OutOfScope;
  } else if (!blocked && !out.certificates.empty()) {
    out.status = MorseStatus::Established;
  }
  return out;
}

}  // namespace

DiagnosisReport diagnose(const FuncSpec& phi, const Grid& grid) {
  if (grid.dim() != phi.n_in()) throw InputError("grid dimension must match the map");
  DiagnosisReport rep;
  for (int i = 0; i < phi.n_out(); ++i) {
    rep.components.push_back(diagnose_component(phi.component_spec(i), grid));
    if (rep.components.back().status == MorseStatus::Established) {
      rep.node1 = rep.node2 = rep.node3 = Verdict::NonEmbeddable;
      rep.reasons.push_back("component " + std::to_string(i) +
                            " is a topological Morse function with a topologically critical point; "
                            "no neural ODE, with or without a linear layer or augmentation, embeds it");
    }
  }

  if (phi.n_in() == 1 && phi.n_out() == 1) {
    std::vector<std::pair<double, double>> samples;
    for (double x : grid.axis(0)) {
      try {
        samples.emplace_back(x, phi.eval_scalar(x));
      } catch (const DomainError&) {
      }
    }
    rep.monotone = true;
    for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
      if (samples[i + 1].second <= samples[i].second) {
        rep.monotone = false;
        rep.monotone_witness = std::make_pair(samples[i].first, samples[i + 1].first);
        break;
      }
    }
    if (!*rep.monotone) {
      rep.node1 = Verdict::NonEmbeddable;
      rep.reasons.push_back("not strictly increasing, but every 1-D time-T map is");
    }
    rep.separation = separation_obstruction_1d(phi, grid);
    if (rep.separation->witness) {
      rep.node1 = Verdict::NonEmbeddable;
      rep.reasons.push_back("a sample is mapped across a fixed point; trajectories would have to cross");
    }
  }
  if (rep.node1 == Verdict::NonEmbeddable || rep.node2 == Verdict::NonEmbeddable ||
      rep.node3 == Verdict::NonEmbeddable) {
    rep.recommendation = "universal";
  }
  return rep;
}

}  // namespace nodeembed
