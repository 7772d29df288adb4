#pragma once

// Explicit architectures whose time-T maps equal a given target map, each
// paired with the closed-form flow it integrates.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "nodeembed/architectures.hpp"

namespace nodeembed {

enum class ConstructionId { Linear, Monomial, Moebius, Negation, Polynomial, Universal };

std::string to_string(ConstructionId id);
ConstructionId construction_from_string(const std::string& s);

struct Construction {
  ConstructionId id = ConstructionId::Linear;
  NodeArchitecture arch;
  FuncSpec target;
  /// State of the architecture's flow at time t from the (lifted) input x.
  std::function<Vec(std::span<const double> x, double t)> closed_form;
  /// One-line statement of the result the construction rests on.
  std::string citation;
};

/// f(h) = ln(c)/T h, time-T map c x. Rejects c <= 0.
Construction construct_linear(double c, double T = 1.0);
/// f(h) = ln(alpha)/T h ln(c^(1/(alpha-1)) h) on h > 0, time-T map c x^alpha.
Construction construct_monomial(double c, double alpha, double T = 1.0);
/// f(h) = c/T h^2, time-T map x/(1 - c x), for inputs with c x (1 + 1e-9) < 1.
Construction construct_moebius(double c, double T = 1.0);
/// Rotation by pi in the plane applied to (x, 0): x -> -x.
Construction construct_negation(double T = 1.0);
/// sum_k a_k x^k on x > 0 via n parallel monomial flows between two layers.
Construction construct_polynomial(const Vec& coeffs, double T = 1.0);
/// Freezes x and integrates Phi(x)/T in extra coordinates read out by (0 | I).
Construction construct_universal(const FuncSpec& phi, double T = 1.0);

/// Dispatch on a construction id with JSON parameters:
///   linear {c, T}, monomial {c, alpha, T}, moebius {c, T}, negation {T},
///   polynomial {coeffs, T}, universal {phi: FuncSpec, T}. T defaults to 1.
Construction construct(const std::string& id, const nlohmann::json& params);

/// Throws DomainError outside the formula's validity region.
Vec closed_form_solution(const Construction& c, std::span<const double> x, double t);

}  // namespace nodeembed
