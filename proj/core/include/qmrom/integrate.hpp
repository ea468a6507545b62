#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qmrom/types.hpp"

namespace qmrom {

struct NewtonConfig {
  double rel_tol = 1e-6;
  double abs_tol = 1e-9;
  int max_iter = 20;
  bool operator==(const NewtonConfig&) const = default;
};

struct IntegratorConfig {
  double alpha = 0.1;  // numerical damping, 0 <= alpha <= 1/3
  double dt = 1e-4;
  double t_end = 0.2;
  double dt_save = 1e-4;
  NewtonConfig newton;
  /// Divergence guard on max |u|; 0 selects the system's default.
  double displacement_ceiling = 0.0;

  void validate() const;
  Index step_count() const;
  Index save_stride() const;
  bool operator==(const IntegratorConfig&) const = default;
};

/// Weights of the iteration matrix
///   acc * dI/da + vel * (dI/dv + force * dF/dv) + pos * (dI/dq + force * dF/dq)
/// where I is the inertial and F the force part of the residual.
struct NewtonWeights {
  double acc = 0.0;
  double vel = 0.0;
  double pos = 1.0;
  double force = 1.0;
};

class JacobianSolver {
 public:
  virtual ~JacobianSolver() = default;
  virtual Vector solve(const Vector& rhs) const = 0;
};

struct SystemEvaluation {
  Vector inertial;  // terms carrying accelerations (mass, convective)
  Vector force;     // damping + internal - external
};

/// Second-order residual r(q, q', q'', t) = inertial + force, split so that
/// HHT can weight the force part between the two ends of a step.
class SecondOrderSystem {
 public:
  virtual ~SecondOrderSystem() = default;

  virtual Index size() const = 0;
  virtual Index full_size() const = 0;
  virtual SystemEvaluation evaluate(double t, const Vector& q, const Vector& qd,
                                    const Vector& qdd) const = 0;
  /// Factorized iteration matrix; throws SolverError when singular.
  virtual std::unique_ptr<JacobianSolver> jacobian(double t, const Vector& q, const Vector& qd,
                                                   const Vector& qdd,
                                                   const NewtonWeights& weights) const = 0;
  /// Full-space displacement of a state.
  virtual Vector lift(const Vector& q) const = 0;
  /// Norm of the projected external load amplitude (Newton tolerance scale).
  virtual double load_scale() const = 0;
  virtual double displacement_ceiling() const = 0;
  /// Diagnostic for an accepted state (e.g. ill-conditioned tangent), if any.
  virtual std::optional<std::string> check_state(const Vector& /*q*/) const { return std::nullopt; }
};

enum class RunStatus { completed, diverged };

struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> reduced;
  std::vector<Vector> velocities;  // reduced
  std::vector<Vector> full;
  std::vector<int> newton_iterations;  // per step
  RunStatus status = RunStatus::completed;
  double diverged_at = 0.0;
  std::string message;
  std::vector<std::string> diagnostics;

  Index size() const { return static_cast<Index>(times.size()); }
  bool completed() const { return status == RunStatus::completed; }
};

/// Fixed-step HHT-alpha march from (q0, v0) (zero by default). Numerical
/// divergence is reported through Trajectory::status, never thrown.
Trajectory hht_run(const SecondOrderSystem& system, const IntegratorConfig& config,
                   const Vector* q0 = nullptr, const Vector* v0 = nullptr);

struct NewtonReport {
  Vector x;
  int iterations = 0;
  bool converged = false;
  std::vector<double> residual_norms;
  std::string message;
};

using ResidualFunction = std::function<Vector(const Vector&)>;
/// Returns J(x)^{-1} r.
using StepFunction = std::function<Vector(const Vector& x, const Vector& r)>;

/// Full-step Newton; converged when |r| <= max(abs_tol, rel_tol |r0|).
NewtonReport newton_solve(const ResidualFunction& residual, const StepFunction& step, Vector x0,
                          const NewtonConfig& config = {});
NewtonReport newton_solve_dense(const ResidualFunction& residual,
                                const std::function<Matrix(const Vector&)>& jacobian, Vector x0,
                                const NewtonConfig& config = {});

}  // namespace qmrom
