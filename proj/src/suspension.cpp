#include "nodeembed/suspension.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace nodeembed {

using nlohmann::json;

MappingTorus::MappingTorus(FuncSpec phi, double T, std::optional<FuncSpec> inverse)
    : phi_(std::move(phi)), T_(T), inverse_(std::move(inverse)) {
  const int n = phi_.n_in();
  if (n < 1 || phi_.n_out() != n) throw InputError("mapping torus needs Phi: R^n -> R^n");
  if (!(T_ > 0) || !std::isfinite(T_)) throw InputError("mapping torus horizon T must be positive");
  if (!inverse_) return;
  if (inverse_->n_in() != n || inverse_->n_out() != n) {
    throw InputError("inverse must map R^n -> R^n with the same n as Phi");
  }
  const Grid check = Grid::uniform(inverse_->domain().clipped(-2, 2), n == 1 ? 33 : (n == 2 ? 9 : 3));
  for (const Vec& y : check.points()) {
    Vec back;
    try {
      back = phi_.eval_checked(inverse_->eval_checked(y));
    } catch (const DomainError&) {
      continue;
    }
    for (int i = 0; i < n; ++i) {
      if (std::fabs(back[i] - y[i]) > 1e-8 * (1 + std::fabs(y[i]))) {
        throw InputError("supplied inverse does not invert Phi: Phi(inverse(y)) differs from y at y_" +
                         std::to_string(i + 1) + " = " + format_number(y[i]));
      }
    }
  }
}

Vec MappingTorus::iterate(std::span<const double> x, long long n) const {
  if (static_cast<int>(x.size()) != dim()) throw InputError("point dimension must match the torus");
  if (n < 0 && !inverse_) {
    throw InputError("negative winding needs the inverse of Phi");
  }
  const FuncSpec& f = n < 0 ? *inverse_ : phi_;
  Vec y(x.begin(), x.end());
  for (long long i = 0; i < (n < 0 ? -n : n); ++i) y = f.eval_checked(y);
  return y;
}

json MappingTorus::to_json() const {
  return {{"phi", phi_.to_json()},
          {"inverse", inverse_ ? inverse_->to_json() : json(nullptr)},
          {"T", T_}};
}

MappingTorus MappingTorus::from_json(const json& j) {
  try {
    std::optional<FuncSpec> inv;
    if (j.contains("inverse") && !j.at("inverse").is_null()) inv = FuncSpec::from_json(j.at("inverse"));
    return MappingTorus(FuncSpec::from_json(j.at("phi")), j.value("T", 1.0), std::move(inv));
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed mapping torus JSON: ") + e.what());
  }
}

namespace {

// t = n T + r with r in [0, T), from one division and one fused remainder.
std::pair<long long, double> split_time(double t, double T) {
  if (!std::isfinite(t)) throw InputError("time must be finite");
  const double q = t / T;
  if (std::fabs(q) > 9e15) throw InputError("time is too large for an exact winding count");
  double nf = std::floor(q);
  // a time sitting on the seam up to rounding belongs to the next sheet
  const double near = std::round(q);
  if (near != nf && std::fabs(q - near) <= 4 * std::numeric_limits<double>::epsilon() * std::fabs(q)) nf = near;
  long long n = static_cast<long long>(nf);
  double r = std::fma(-nf, T, t);
  if (r < 0) {
    if (-r <= 4 * std::numeric_limits<double>::epsilon() * std::fabs(t)) {
      r = 0;
    } else {
      --n;
      r += T;
    }
  }
  if (r >= T) {
    ++n;
    r -= T;
  }
  if (r > 0 && r <= 4 * std::numeric_limits<double>::epsilon() * std::fabs(t)) r = 0;
  return {n, r};
}

}  // namespace

TorusPoint canonicalize(const MappingTorus& torus, std::span<const double> x, double t) {
  const auto [n, r] = split_time(t, torus.T());
  return {torus.iterate(x, n), r, n};
}

TorusPoint suspension_flow(const MappingTorus& torus, const TorusPoint& start, double s) {
  if (!(start.r >= 0 && start.r < torus.T())) throw InputError("start point is not canonical (r outside [0, T))");
  if (s == 0) return start;
  TorusPoint p = canonicalize(torus, start.x, start.r + s);
  p.k += start.k;
  return p;
}

std::pair<Vec, double> automorphism(const MappingTorus& torus, long long n, std::span<const double> x,
                                    double t) {
  return {torus.iterate(x, n), t - static_cast<double>(n) * torus.T()};
}

std::string torus_trajectory_csv(const MappingTorus& torus, const TorusPoint& start, double s_total,
                                 int samples) {
  if (samples < 2) throw InputError("trajectory needs at least 2 samples");
  std::ostringstream os;
  os << "s,k,r";
  for (int i = 1; i <= torus.dim(); ++i) os << ",x" << i;
  os << '\n';
  for (int j = 0; j < samples; ++j) {
    const double s = j == samples - 1 ? s_total : s_total * j / (samples - 1);
    const TorusPoint p = suspension_flow(torus, start, s);
    os << format_csv_number(s) << ',' << p.k << ',' << format_csv_number(p.r);
    for (double v : p.x) os << ',' << format_csv_number(v);
    os << '\n';
  }
  return os.str();
}

}  // namespace nodeembed
