#include "nodeembed/odecore.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace nodeembed {

VectorField::VectorField(FuncSpec spec) : spec_(std::move(spec)) {
  m_ = spec_.n_out();
  if (spec_.n_in() == m_) {
    time_dependent_ = false;
  } else if (spec_.n_in() == m_ + 1) {
    time_dependent_ = true;
  } else {
    throw InputError("vector field must map R^m or R^m x [0,T] to R^m, got n_in " +
                     std::to_string(spec_.n_in()) + " and n_out " + std::to_string(m_));
  }
}

void VectorField::eval(double t, std::span<const double> h, std::span<double> out) const {
  if (!time_dependent_) {
    for (int i = 0; i < m_; ++i) {
      try {
        out[i] = spec_.component(i).eval(h);
      } catch (const DomainError& e) {
        throw DomainError(e.what(), i);
      }
    }
    return;
  }
  double buf[16];
  Vec heap;
  double* ht = buf;
  if (m_ + 1 > 16) {
    heap.resize(m_ + 1);
    ht = heap.data();
  }
  std::copy(h.begin(), h.begin() + m_, ht);
  ht[m_] = t;
  std::span<const double> in(ht, m_ + 1);
  for (int i = 0; i < m_; ++i) {
    try {
      out[i] = spec_.component(i).eval(in);
    } catch (const DomainError& e) {
      throw DomainError(e.what(), i);
    }
  }
}

Vec VectorField::eval(double t, std::span<const double> h) const {
  Vec out(m_);
  eval(t, h, out);
  return out;
}

void IntegratorConfig::validate() const {
  if (!(rtol > 0) || !(atol > 0)) throw InputError("tolerances must be positive");
  if (max_steps < 1) throw InputError("max_steps must be at least 1");
  if (!(blowup > 0)) throw InputError("blow-up bound must be positive");
  if (rk4_steps < 1) throw InputError("rk4_steps must be at least 1");
}

std::string to_string(Status s) {
  switch (s) {
    case Status::Completed: return "completed";
    case Status::BlewUp: return "blew-up";
    case Status::StepLimit: return "step-limit";
  }
  return "unknown";
}

namespace {

double max_norm(std::span<const double> v) {
  double n = 0;
  for (double x : v) n = std::max(n, std::fabs(x));
  return n;
}

// Dormand-Prince 5(4) tableau
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

class Stepper {
 public:
  Stepper(const VectorField& f, int m) : f_(f), m_(m) {
    for (auto& k : k_) k.resize(m);
    tmp_.resize(m);
  }

  // One trial step from (t, y) with k_[0] = f(t, y) already set. Writes the
  // 5th-order solution to y_new and returns the scaled error norm.
  double trial(double t, const Vec& y, double h, Vec& y_new, double rtol, double atol) {
    auto stage = [&](int idx, double c, std::initializer_list<double> a) {
      for (int i = 0; i < m_; ++i) {
        double acc = 0;
        int j = 0;
        for (double aj : a) acc += aj * k_[j++][i];
        tmp_[i] = y[i] + h * acc;
      }
      f_.eval(t + c * h, tmp_, k_[idx]);
    };
    stage(1, c2, {a21});
    stage(2, c3, {a31, a32});
    stage(3, c4, {a41, a42, a43});
    stage(4, c5, {a51, a52, a53, a54});
    stage(5, 1.0, {a61, a62, a63, a64, a65});
    for (int i = 0; i < m_; ++i) {
      y_new[i] = y[i] + h * (b1 * k_[0][i] + b3 * k_[2][i] + b4 * k_[3][i] + b5 * k_[4][i] +
                             b6 * k_[5][i]);
    }
    f_.eval(t + h, y_new, k_[6]);
    double err = 0;
    for (int i = 0; i < m_; ++i) {
      const double e = h * (e1 * k_[0][i] + e3 * k_[2][i] + e4 * k_[3][i] + e5 * k_[4][i] +
                            e6 * k_[5][i] + e7 * k_[6][i]);
      const double sc = atol + rtol * std::max(std::fabs(y[i]), std::fabs(y_new[i]));
      err = std::max(err, std::fabs(e) / sc);
    }
    return err;
  }

  Vec& first() { return k_[0]; }
  void accept() { std::swap(k_[0], k_[6]); }

 private:
  const VectorField& f_;
  int m_;
  std::array<Vec, 7> k_;
  Vec tmp_;
};

double initial_step(const VectorField& f, const Vec& y0, const Vec& f0, double T,
                    const IntegratorConfig& cfg) {
  const int m = static_cast<int>(y0.size());
  double d0 = 0, d1 = 0;
  for (int i = 0; i < m; ++i) {
    const double sc = cfg.atol + cfg.rtol * std::fabs(y0[i]);
    d0 = std::max(d0, std::fabs(y0[i]) / sc);
    d1 = std::max(d1, std::fabs(f0[i]) / sc);
  }
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min(h0, T);
  Vec y1(m);
  for (int i = 0; i < m; ++i) y1[i] = y0[i] + h0 * f0[i];
  double d2 = 0;
  try {
    const Vec f1 = f.eval(h0, y1);
    for (int i = 0; i < m; ++i) {
      const double sc = cfg.atol + cfg.rtol * std::fabs(y0[i]);
      d2 = std::max(d2, std::fabs(f1[i] - f0[i]) / sc);
    }
    d2 /= h0;
  } catch (const DomainError&) {
    return h0 * 1e-3;
  }
  const double dm = std::max(d1, d2);
  const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
  return std::min({100 * h0, h1, T});
}

void push(Trajectory& tr, double t, const Vec& y) {
  tr.t.push_back(t);
  tr.h.push_back(y);
}

Trajectory integrate_rk4(const VectorField& field, Vec y, double T,
                         const IntegratorConfig& cfg) {
  const int m = field.dim();
  Trajectory tr;
  push(tr, 0.0, y);
  const int n = cfg.rk4_steps;
  const double h = T / n;
  Vec k1(m), k2(m), k3(m), k4(m), tmp(m);
  for (int s = 0; s < n; ++s) {
    const double t = s * h;
    if (s == 0) {
      field.eval(t, y, k1);  // a DomainError here is an input problem
    } else {
      try {
        field.eval(t, y, k1);
      } catch (const DomainError& e) {
        throw NumericalError("solution left the field's domain at t=" + format_number(t) +
                             ": " + e.what());
      }
    }
    try {
      for (int i = 0; i < m; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
      field.eval(t + 0.5 * h, tmp, k2);
      for (int i = 0; i < m; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
      field.eval(t + 0.5 * h, tmp, k3);
      for (int i = 0; i < m; ++i) tmp[i] = y[i] + h * k3[i];
      field.eval(t + h, tmp, k4);
    } catch (const DomainError& e) {
      throw NumericalError("solution left the field's domain near t=" + format_number(t) +
                           ": " + e.what());
    }
    for (int i = 0; i < m; ++i) y[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    const double tn = (s + 1 == n) ? T : (s + 1) * h;
    push(tr, tn, y);
    if (!(max_norm(y) <= cfg.blowup)) {
      tr.status = Status::BlewUp;
      tr.t_stop = tn;
      tr.message = "state norm exceeded " + format_number(cfg.blowup);
      return tr;
    }
  }
  tr.t_stop = T;
  return tr;
}

Trajectory integrate_dp45(const VectorField& field, Vec y, double T,
                          const IntegratorConfig& cfg) {
  const int m = field.dim();
  Trajectory tr;
  push(tr, 0.0, y);
  Stepper st(field, m);
  field.eval(0.0, y, st.first());
  const double h_min = 1e-13 * T;
  double h = initial_step(field, y, st.first(), T, cfg);
  double t = 0.0;
  Vec y_new(m);
  long attempts = 0;
  bool last_rejected = false;
  while (t < T) {
    if (++attempts > cfg.max_steps) {
      tr.status = Status::StepLimit;
      tr.t_stop = t;
      tr.message = "exhausted " + std::to_string(cfg.max_steps) + " steps";
      return tr;
    }
    const bool final_step = t + h >= T;
    if (final_step) h = T - t;
    double err;
    try {
      err = st.trial(t, y, h, y_new, cfg.rtol, cfg.atol);
    } catch (const DomainError&) {
      err = std::numeric_limits<double>::quiet_NaN();
    }
    if (err <= 1.0) {
      t = final_step ? T : t + h;
      y.swap(y_new);
      st.accept();
      push(tr, t, y);
      if (!(max_norm(y) <= cfg.blowup)) {
        tr.status = Status::BlewUp;
        tr.t_stop = t;
        tr.message = "state norm exceeded " + format_number(cfg.blowup);
        return tr;
      }
      double fac = err == 0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      if (last_rejected) fac = std::min(fac, 1.0);
      h *= fac;
      last_rejected = false;
    } else {
      // a trial that left the field's domain or overflowed counts as rejected
      const double fac = std::isfinite(err) ? std::clamp(0.9 * std::pow(err, -0.2), 0.2, 1.0)
                                            : 0.25;
      h *= fac;
      last_rejected = true;
      if (h < h_min) {
        tr.status = Status::StepLimit;
        tr.t_stop = t;
        tr.message = "step size fell below " + format_number(h_min) + " at t=" +
                     format_number(t);
        return tr;
      }
    }
  }
  tr.t_stop = T;
  return tr;
}

}  // namespace

Trajectory integrate(const VectorField& field, std::span<const double> x0, double T,
                     const IntegratorConfig& cfg) {
  cfg.validate();
  if (static_cast<int>(x0.size()) != field.dim()) {
    throw InputError("initial state has dimension " + std::to_string(x0.size()) +
                     ", field has " + std::to_string(field.dim()));
  }
  if (!(T > 0) || !std::isfinite(T)) throw InputError("horizon T must be positive and finite");
  Vec y(x0.begin(), x0.end());
  if (cfg.method == Method::RK4) return integrate_rk4(field, std::move(y), T, cfg);
  return integrate_dp45(field, std::move(y), T, cfg);
}

Vec time_T_map(const VectorField& field, std::span<const double> x, double T,
               const IntegratorConfig& cfg) {
  Trajectory tr = integrate(field, x, T, cfg);
  if (!tr.ok()) {
    throw NumericalError("integration " + to_string(tr.status) + " at t=" +
                         format_number(tr.t_stop) + ": " + tr.message);
  }
  return tr.h.back();
}

double time_T_map(const VectorField& field, double x, double T, const IntegratorConfig& cfg) {
  if (field.dim() != 1) throw InputError("scalar time-T map needs a 1-D field");
  return time_T_map(field, std::span<const double>(&x, 1), T, cfg)[0];
}

double check_translation(const VectorField& field, std::span<const double> x, double s,
                         double t, const IntegratorConfig& cfg) {
  if (field.time_dependent()) throw InputError("translation check needs an autonomous field");
  const Vec direct = time_T_map(field, x, s + t, cfg);
  const Vec mid = time_T_map(field, x, s, cfg);
  const Vec composed = time_T_map(field, mid, t, cfg);
  double r = 0;
  for (std::size_t i = 0; i < direct.size(); ++i) {
    r = std::max(r, std::fabs(direct[i] - composed[i]));
  }
  return r;
}

MonotoneReport check_monotone_1d(const VectorField& field, const Grid& grid, double T,
                                 const IntegratorConfig& cfg) {
  if (field.dim() != 1 || grid.dim() != 1) throw InputError("monotonicity check is 1-D only");
  const Expr deriv = field.spec().component(0).derivative(0);
  auto lipschitz_ok = [&](double t, double h) {
    const double in[2] = {h, t};
    try {
      return std::isfinite(deriv.eval(std::span<const double>(in, field.spec().n_in())));
    } catch (const DomainError&) {
      return false;
    }
  };
  MonotoneReport rep;
  for (double x : grid.axis(0)) {
    if (!lipschitz_ok(0.0, x)) rep.uniqueness_suspect = true;
    const Trajectory tr = integrate(field, std::span<const double>(&x, 1), T, cfg);
    if (!tr.ok()) {
      throw NumericalError("integration " + to_string(tr.status) + " from x=" +
                           format_number(x) + ": " + tr.message);
    }
    for (std::size_t i = 0; i < tr.t.size() && !rep.uniqueness_suspect; ++i) {
      if (!lipschitz_ok(tr.t[i], tr.h[i][0])) rep.uniqueness_suspect = true;
    }
    rep.xs.push_back(x);
    rep.values.push_back(tr.h.back()[0]);
  }
  for (std::size_t i = 1; i < rep.values.size(); ++i) {
    if (!(rep.values[i - 1] < rep.values[i])) {
      rep.monotone = false;
      rep.witness = std::make_pair(rep.xs[i - 1], rep.xs[i]);
      break;
    }
  }
  return rep;
}

std::vector<double> continuous_dependence(const VectorField& field, std::span<const double> x,
                                          double T, const std::vector<double>& deltas,
                                          const IntegratorConfig& cfg) {
  const Vec base = time_T_map(field, x, T, cfg);
  std::vector<double> out;
  for (double d : deltas) {
    Vec xp(x.begin(), x.end());
    for (double& v : xp) v += d;
    const Vec moved = time_T_map(field, xp, T, cfg);
    double r = 0;
    for (std::size_t i = 0; i < base.size(); ++i) r = std::max(r, std::fabs(moved[i] - base[i]));
    out.push_back(r);
  }
  return out;
}

std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream os;
  os << 't';
  const std::size_t m = traj.h.empty() ? 0 : traj.h.front().size();
  for (std::size_t i = 1; i <= m; ++i) os << ",h" << i;
  os << '\n';
  for (std::size_t k = 0; k < traj.t.size(); ++k) {
    os << format_csv_number(traj.t[k]);
    for (double v : traj.h[k]) os << ',' << format_csv_number(v);
    os << '\n';
  }
  return os.str();
}

}  // namespace nodeembed
