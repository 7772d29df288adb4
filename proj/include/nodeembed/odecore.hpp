#pragma once

// Explicit Runge-Kutta integration of vector fields, time-T maps and
// numerical checks of the flow laws.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nodeembed/funcspec.hpp"

namespace nodeembed {

/// dh/dt = f(h, t) in R^m. A time-dependent field reads t as variable x_m.
class VectorField {
 public:
  VectorField() = default;
  /// n_out == n_in (autonomous) or n_in == n_out + 1 (time as last input).
  explicit VectorField(FuncSpec spec);

  int dim() const noexcept { return m_; }
  bool time_dependent() const noexcept { return time_dependent_; }
  const FuncSpec& spec() const noexcept { return spec_; }

  void eval(double t, std::span<const double> h, std::span<double> out) const;
  Vec eval(double t, std::span<const double> h) const;

 private:
  FuncSpec spec_;
  int m_ = 0;
  bool time_dependent_ = false;
};

enum class Method { RK4, DormandPrince45 };

struct IntegratorConfig {
  Method method = Method::DormandPrince45;
  double rtol = 1e-9;
  double atol = 1e-12;
  long max_steps = 1'000'000;
  double blowup = 1e12;  // max-norm bound on the state
  int rk4_steps = 10'000;

  void validate() const;  // throws InputError
};

enum class Status { Completed, BlewUp, StepLimit };

std::string to_string(Status s);

struct Trajectory {
  std::vector<double> t;
  std::vector<Vec> h;
  Status status = Status::Completed;
  double t_stop = 0.0;  // last accepted time
  std::string message;

  bool ok() const noexcept { return status == Status::Completed; }
  const Vec& final_state() const { return h.back(); }
};

/// Integrates from t = 0 to t = T. Blow-up and step exhaustion are reported
/// in the status; a DomainError at the initial state propagates.
Trajectory integrate(const VectorField& field, std::span<const double> x0, double T,
                     const IntegratorConfig& cfg = {});

/// Final state of integrate; NumericalError unless the run completed.
Vec time_T_map(const VectorField& field, std::span<const double> x, double T,
               const IntegratorConfig& cfg = {});
double time_T_map(const VectorField& field, double x, double T,
                  const IntegratorConfig& cfg = {});

/// max-norm of h(x, s+t) - h(h(x, s), t).
double check_translation(const VectorField& field, std::span<const double> x, double s,
                         double t, const IntegratorConfig& cfg = {});

struct MonotoneReport {
  bool monotone = true;
  std::optional<std::pair<double, double>> witness;  // x1 < x2, h(x1) >= h(x2)
  /// The field's derivative failed to evaluate (or was not finite) somewhere
  /// on the grid or along a trajectory, so Lipschitz continuity and with it
  /// uniqueness of solutions are not assured.
  bool uniqueness_suspect = false;
  std::vector<double> xs;
  std::vector<double> values;
};

MonotoneReport check_monotone_1d(const VectorField& field, const Grid& grid, double T,
                                 const IntegratorConfig& cfg = {});

/// |time_T_map(x + d) - time_T_map(x)| for each d in deltas.
std::vector<double> continuous_dependence(const VectorField& field, std::span<const double> x,
                                          double T, const std::vector<double>& deltas,
                                          const IntegratorConfig& cfg = {});

/// Header `t,h1,...,hm`, one row per accepted step.
std::string trajectory_csv(const Trajectory& traj);

}  // namespace nodeembed
