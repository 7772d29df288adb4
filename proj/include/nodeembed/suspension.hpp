#pragma once

// The mapping torus of an invertible map Phi with horizon T: R^n x R modulo
// (x, t + T) ~ (Phi(x), t). Points are kept as canonical representatives
// with r in [0, T) and an exact integer winding count.

#include <optional>
#include <string>

#include <json.hpp>

#include "nodeembed/funcspec.hpp"

namespace nodeembed {

struct TorusPoint {
  Vec x;
  double r = 0;     // fiber time, 0 <= r < T
  long long k = 0;  // identifications applied so far
};

class MappingTorus {
 public:
  /// With an inverse, Phi(inverse(x)) = x is checked to 1e-8 on a small grid
  /// over Phi's domain (clipped to [-2, 2]).
  MappingTorus(FuncSpec phi, double T, std::optional<FuncSpec> inverse = {});

  const FuncSpec& phi() const noexcept { return phi_; }
  const std::optional<FuncSpec>& inverse() const noexcept { return inverse_; }
  double T() const noexcept { return T_; }
  int dim() const noexcept { return phi_.n_in(); }

  /// Phi^n by n explicit evaluations; negative n needs the inverse.
  Vec iterate(std::span<const double> x, long long n) const;

  nlohmann::json to_json() const;  // {"phi", "inverse", "T"}
  static MappingTorus from_json(const nlohmann::json& j);

 private:
  FuncSpec phi_;
  double T_ = 1;
  std::optional<FuncSpec> inverse_;
};

/// (Phi^n(x), r, n) with t = n T + r and r in [0, T).
TorusPoint canonicalize(const MappingTorus& torus, std::span<const double> x, double t);

/// Unit-speed fiber flow for duration s; the winding count accumulates.
TorusPoint suspension_flow(const MappingTorus& torus, const TorusPoint& start, double s);

/// Deck transformation (x, t) -> (Phi^n(x), t - n T).
std::pair<Vec, double> automorphism(const MappingTorus& torus, long long n, std::span<const double> x,
                                    double t);

/// "s,k,r,x1..xn" at `samples` evenly spaced durations in [0, s_total].
std::string torus_trajectory_csv(const MappingTorus& torus, const TorusPoint& start, double s_total,
                                 int samples);

}  // namespace nodeembed
