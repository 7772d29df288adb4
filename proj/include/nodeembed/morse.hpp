#pragma once

// Critical-point analysis of scalar maps and the obstructions it feeds:
// Morse/topological-Morse classification, 1-D normal forms and charts,
// linear perturbations, C^k norms, an antipodal-point finder on the circle,
// the 1-D fixed-point separation test and the per-architecture diagnosis.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nodeembed/funcspec.hpp"

namespace nodeembed {

constexpr double kCriticalTol = 1e-9;

struct CriticalPoint {
  Vec p;
  double grad_norm = 0;
  Vec eigenvalues;  // ascending
  int index = 0;    // eigenvalues below -threshold
  bool degenerate = false;
  double threshold = 0;
  // 1-D only: first non-vanishing derivative order and its value
  std::optional<int> order;
  std::optional<double> gamma;

  nlohmann::json to_json() const;
};

struct CriticalSearch {
  std::vector<Vec> points;  // sorted, deduplicated
  int seeds = 0;
  int dropped = 0;  // seeds that did not converge inside the domain
};

/// Newton iteration on the symbolic gradient from every grid point. In 1-D
/// the multiplicity-insensitive variant x -= g g' / (g'^2 - g g'') is tried
/// first so degenerate roots converge quadratically.
CriticalSearch find_critical_points(const FuncSpec& psi, const Grid& grid, double tol = kCriticalTol);

/// Hessian eigen-decomposition at p. In 1-D a degenerate point is resolved by
/// successive derivatives up to order 12; NumericalError when none is
/// non-zero.
CriticalPoint classify_critical(const FuncSpec& psi, std::span<const double> p);

/// Psi(mu(u)) = Psi(p) + sign(gamma)^(k-1) u^k near p, with
/// eta(x) = s (s g(x))^(1/k) (x - p), g(x) = (Psi(x) - Psi(p)) / (x - p)^k.
class NormalForm1d {
 public:
  NormalForm1d(const FuncSpec& psi, double p, int k);

  double p() const noexcept { return p_; }
  int k() const noexcept { return k_; }
  double gamma() const noexcept { return gamma_; }
  int sign() const noexcept { return s_; }
  double value_at_p() const noexcept { return psi_p_; }
  /// eta is a monotone bijection from [x_lo, x_hi] onto a set containing [-u_radius, u_radius].
  double x_lo() const noexcept { return x_lo_; }
  double x_hi() const noexcept { return x_hi_; }
  double u_radius() const noexcept { return u_radius_; }
  double residual() const noexcept { return residual_; }

  double g(double x) const;
  double eta(double x) const;
  double mu(double u) const;  // u in [-u_radius, u_radius]
  double model(double u) const;  // Psi(p) + s^(k-1) u^k

  nlohmann::json to_json() const;

 private:
  FuncSpec psi_;
  double p_ = 0;
  int k_ = 2;
  double gamma_ = 0;
  int s_ = 1;
  double psi_p_ = 0;
  Vec taylor_;  // Psi^(j)(p) / j! for j = k..12
  double taylor_radius_ = 0;
  double x_lo_ = 0, x_hi_ = 0, u_radius_ = 0, residual_ = 0;
};

/// mu o eta_k with eta_k(v) = sign(v) |v|^(2/k), giving Psi(p) + s v^2.
/// Even k only.
class TopologicalChart1d {
 public:
  TopologicalChart1d(const FuncSpec& psi, double p, int k);

  const NormalForm1d& normal_form() const noexcept { return nf_; }
  double v_radius() const noexcept { return v_radius_; }
  int index() const noexcept { return nf_.sign() < 0 ? 1 : 0; }
  double residual() const noexcept { return residual_; }
  double operator()(double v) const;

  nlohmann::json to_json() const;

 private:
  NormalForm1d nf_;
  double v_radius_ = 0;
  double residual_ = 0;
};

struct MorseifyResult {
  FuncSpec perturbed;  // Psi + sum a_j x_j
  Vec a;
  std::vector<CriticalPoint> critical;
  bool morse = false;
  int attempts = 0;
  nlohmann::json to_json() const;
};

/// Draws a uniformly from [-bound, bound]^n (up to 5 draws) until every
/// critical point of Psi_a on the grid is non-degenerate.
MorseifyResult morseify(const FuncSpec& psi, double bound, std::uint64_t seed, const Grid& grid);

/// Sum over multi-indices |s| <= k of the grid maximum of |d^s Psi|. A lower
/// bound for the true norm.
double ck_norm(const FuncSpec& psi, int k, const Grid& grid);

struct AntipodalResult {
  double theta = 0;
  Vec u;  // (cos theta, sin theta)
  double residual = 0;  // |g(u) - g(-u)|
};

/// g: R^2 -> R read on the unit circle. Bisects d(theta) = g(u) - g(-u) on
/// [0, pi], which changes sign because d(pi) = -d(0).
AntipodalResult antipodal_point(const FuncSpec& g, double tol = 1e-10);

struct SeparationWitness {
  double z = 0;       // fixed point
  double x_star = 0;  // sample mapped across z
  double image = 0;   // Phi(x_star)
};

struct SeparationReport {
  Vec fixed_points;
  std::optional<SeparationWitness> witness;
};

/// Fixed points of a 1-D map on the grid and a sample x* with x* and Phi(x*)
/// on opposite sides of one of them.
SeparationReport separation_obstruction_1d(const FuncSpec& phi, const Grid& grid);

enum class MorseStatus { Established, NotEstablished, OutOfScope };
std::string to_string(MorseStatus s);

enum class Verdict { NonEmbeddable, NoObstructionFound };
std::string to_string(Verdict v);

struct ComponentDiagnosis {
  std::vector<CriticalPoint> critical;
  MorseStatus status = MorseStatus::NotEstablished;
  std::vector<nlohmann::json> certificates;  // one per topologically critical point
  std::vector<std::string> notes;
  int dropped_seeds = 0;
};

struct DiagnosisReport {
  std::vector<ComponentDiagnosis> components;
  Verdict node1 = Verdict::NoObstructionFound;
  Verdict node2 = Verdict::NoObstructionFound;
  Verdict node3 = Verdict::NoObstructionFound;
  std::vector<std::string> reasons;
  std::optional<std::string> recommendation;
  // 1-D maps only
  std::optional<bool> monotone;
  std::optional<std::pair<double, double>> monotone_witness;
  std::optional<SeparationReport> separation;

  nlohmann::json to_json() const;
};

DiagnosisReport diagnose(const FuncSpec& phi, const Grid& grid);

}  // namespace nodeembed
