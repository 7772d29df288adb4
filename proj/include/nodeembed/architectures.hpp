#pragma once

// Neural-ODE pipelines built around a vector field: plain time-T map, with an
// affine read-out, zero-padded (augmented) state, and with two arbitrary
// layers around the flow. Plus the grid verifier for candidate embeddings.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "nodeembed/funcspec.hpp"
#include "nodeembed/odecore.hpp"

namespace nodeembed {

struct LinearLayer {
  Eigen::MatrixXd A;  // n_out x m
  Eigen::VectorXd a;  // n_out

  Vec apply(std::span<const double> h) const;
  int n_in() const noexcept { return static_cast<int>(A.cols()); }
  int n_out() const noexcept { return static_cast<int>(A.rows()); }
};

enum class Variant { Basic, WithLinear, Augmented, AugmentedWithLinear, TwoLayer };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

struct Evaluation {
  Vec output;
  Vec final_state;    // h(T) of the underlying flow
  double defect = 0;  // Augmented only: max |trailing components of h(T)|
};

class NodeArchitecture {
 public:
  NodeArchitecture() = default;  // empty placeholder, evaluate() is invalid
  static NodeArchitecture basic(VectorField f, double T, Domain input = {});
  static NodeArchitecture with_linear(VectorField f, double T, LinearLayer L, Domain input = {});
  /// Inputs of dimension n_in are padded with zeros up to the field dimension.
  static NodeArchitecture augmented(VectorField f, double T, int n_in, Domain input = {});
  static NodeArchitecture augmented_with_linear(VectorField f, double T, int n_in,
                                                LinearLayer L, Domain input = {});
  static NodeArchitecture two_layer(FuncSpec layer1, VectorField f, FuncSpec layer2, double T,
                                    Domain input = {});

  Variant variant() const noexcept { return variant_; }
  const VectorField& field() const noexcept { return field_; }
  double T() const noexcept { return T_; }
  int n_in() const noexcept { return n_in_; }
  int n_out() const noexcept;
  int m() const noexcept { return field_.dim(); }
  const std::optional<LinearLayer>& linear() const noexcept { return linear_; }
  const std::optional<FuncSpec>& layer1() const noexcept { return layer1_; }
  const std::optional<FuncSpec>& layer2() const noexcept { return layer2_; }
  const Domain& input_domain() const noexcept { return input_; }
  const IntegratorConfig& config() const noexcept { return cfg_; }

  NodeArchitecture with_config(IntegratorConfig cfg) const;

  /// Throws DomainError for inputs outside the declared input domain and
  /// NumericalError when the flow fails to reach T.
  Evaluation evaluate(std::span<const double> x) const;
  Trajectory trajectory(std::span<const double> x) const;

  nlohmann::json to_json() const;
  static NodeArchitecture from_json(const nlohmann::json& j);

 private:
  void validate() const;
  Vec initial_state(std::span<const double> x) const;

  Variant variant_ = Variant::Basic;
  VectorField field_;
  double T_ = 1.0;
  int n_in_ = 0;
  std::optional<LinearLayer> linear_;
  std::optional<FuncSpec> layer1_, layer2_;
  Domain input_;
  IntegratorConfig cfg_;
};

struct PointResult {
  Vec x;
  Vec node;
  Vec target;
  double err = 0;
  double defect = 0;
  std::string failure;  // empty when evaluation succeeded
};

struct VerificationReport {
  double max_err = 0;
  Vec argmax;
  bool pass = false;
  double tol = 0;
  std::optional<double> defect;  // Augmented only
  std::vector<PointResult> table;
  std::size_t failures = 0;

  std::string table_csv() const;
  nlohmann::json to_json(const std::string& table_ref = "report_table.csv") const;
};

/// Evaluates every grid point, including after failures. pass iff no point
/// failed and max_err <= tol.
VerificationReport verify_embedding(const NodeArchitecture& arch, const FuncSpec& target,
                                    const Grid& grid, double tol = 1e-6);

/// Turns a time-dependent field into an autonomous one on R^{m+1} whose last
/// coordinate is time, read out through A = [I 0].
NodeArchitecture augment_time(const VectorField& f, double T, Domain input = {});

}  // namespace nodeembed
