#include "qmrom/integrate.hpp"

#include <cmath>
#include <sstream>

#include "qmrom/errors.hpp"

namespace qmrom {

void IntegratorConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0 / 3.0)) throw InvalidArgument("HHT alpha must lie in [0, 1/3]");
  if (!(dt > 0.0) || !(t_end > 0.0) || !(dt_save > 0.0))
    throw InvalidArgument("time step, end time and save interval must be positive");
  const double ratio = dt_save / dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio || std::round(ratio) < 1.0)
    throw InvalidArgument("save interval must be an integer multiple of the time step");
  if (newton.max_iter < 1 || !(newton.rel_tol > 0.0) || !(newton.abs_tol >= 0.0))
    throw InvalidArgument("invalid Newton settings");
}

Index IntegratorConfig::step_count() const {
  return static_cast<Index>(std::llround(t_end / dt));
}

Index IntegratorConfig::save_stride() const {
  return static_cast<Index>(std::llround(dt_save / dt));
}

namespace {

void save(Trajectory& traj, const SecondOrderSystem& system, double t, const Vector& q,
          const Vector& v) {
  traj.times.push_back(t);
  traj.reduced.push_back(q);
  traj.velocities.push_back(v);
  traj.full.push_back(system.lift(q));
}

}  // namespace

Trajectory hht_run(const SecondOrderSystem& system, const IntegratorConfig& config,
                   const Vector* q0, const Vector* v0) {
  config.validate();
  const Index n = system.size();
  const double alpha = config.alpha;
  const double beta = 0.25 * (1.0 + alpha) * (1.0 + alpha);
  const double gamma = 0.5 + alpha;
  const double dt = config.dt;
  const double c_acc = 1.0 / (beta * dt * dt);
  const double c_vel = gamma / (beta * dt);
  const double ceiling =
      config.displacement_ceiling > 0.0 ? config.displacement_ceiling : system.displacement_ceiling();
  const double tol = std::max(config.newton.abs_tol, config.newton.rel_tol * system.load_scale());

  Vector q = q0 ? *q0 : Vector::Zero(n);
  Vector v = v0 ? *v0 : Vector::Zero(n);
  if (q.size() != n || v.size() != n) throw InvalidArgument("hht_run: initial state has wrong size");

  Trajectory traj;
  Vector a = Vector::Zero(n);
  Vector force_prev;
  try {
    const SystemEvaluation ev0 = system.evaluate(0.0, q, v, a);
    const auto J0 = system.jacobian(0.0, q, v, a, NewtonWeights{1.0, 0.0, 0.0, 1.0});
    a = -J0->solve(ev0.inertial + ev0.force);
    force_prev = system.evaluate(0.0, q, v, a).force;
  } catch (const Error& e) {
    traj.status = RunStatus::diverged;
    traj.diverged_at = 0.0;
    traj.message = std::string("initial acceleration: ") + e.what();
    return traj;
  }
  save(traj, system, 0.0, q, v);

  const Index steps = config.step_count();
  const Index stride = config.save_stride();
  int diagnostics_left = 5;
  const NewtonWeights weights{c_acc, c_vel, 1.0, 1.0 - alpha};

  for (Index step = 1; step <= steps; ++step) {
    const double t = static_cast<double>(step) * dt;
    Vector q1 = q + dt * v + 0.5 * dt * dt * a;
    Vector a1 = c_acc * (q1 - q - dt * v) - (0.5 - beta) / beta * a;
    Vector v1 = v + dt * ((1.0 - gamma) * a + gamma * a1);

    bool converged = false;
    int iterations = 0;
    std::string failure;
    SystemEvaluation ev;
    try {
      for (;;) {
        ev = system.evaluate(t, q1, v1, a1);
        const Vector R = ev.inertial + (1.0 - alpha) * ev.force + alpha * force_prev;
        const double rn = R.norm();
        if (!std::isfinite(rn)) {
          failure = "non-finite residual";
          break;
        }
        if (rn <= tol) {
          converged = true;
          break;
        }
        if (iterations == config.newton.max_iter) {
          std::ostringstream msg;
          msg << "Newton did not converge in " << iterations << " iterations (|r| = " << rn << ")";
          failure = msg.str();
          break;
        }
        const Vector dq = -system.jacobian(t, q1, v1, a1, weights)->solve(R);
        if (!dq.allFinite()) {
          failure = "non-finite Newton update";
          break;
        }
        q1 += dq;
        a1 += c_acc * dq;
        v1 += c_vel * dq;
        ++iterations;
      }
    } catch (const Error& e) {
      failure = e.what();
    }

    if (converged && system.lift(q1).cwiseAbs().maxCoeff() > ceiling) {
      converged = false;
      failure = "displacement exceeded the divergence ceiling";
    }
    if (!converged) {
      traj.status = RunStatus::diverged;
      traj.diverged_at = t;
      traj.message = failure;
      return traj;
    }

    q = std::move(q1);
    v = std::move(v1);
    a = std::move(a1);
    force_prev = std::move(ev.force);
    traj.newton_iterations.push_back(iterations);
    if (diagnostics_left > 0) {
      if (auto d = system.check_state(q)) {
        std::ostringstream msg;
        msg << "t = " << t << ": " << *d;
        traj.diagnostics.push_back(msg.str());
        --diagnostics_left;
      }
    }
    if (step % stride == 0) save(traj, system, t, q, v);
  }
  return traj;
}

NewtonReport newton_solve(const ResidualFunction& residual, const StepFunction& step, Vector x0,
                          const NewtonConfig& config) {
  NewtonReport report;
  report.x = std::move(x0);
  Vector r = residual(report.x);
  double r0 = r.norm();
  report.residual_norms.push_back(r0);
  const double tol = std::max(config.abs_tol, config.rel_tol * r0);
  for (;;) {
    const double rn = report.residual_norms.back();
    if (!std::isfinite(rn)) {
      report.message = "non-finite residual";
      return report;
    }
    if (rn <= tol) {
      report.converged = true;
      return report;
    }
    if (report.iterations == config.max_iter) {
      report.message = "maximum iterations reached";
      return report;
    }
    Vector dx;
    try {
      dx = step(report.x, r);
    } catch (const Error& e) {
      report.message = e.what();
      return report;
    }
    report.x -= dx;
    ++report.iterations;
    r = residual(report.x);
    report.residual_norms.push_back(r.norm());
  }
}

NewtonReport newton_solve_dense(const ResidualFunction& residual,
                                const std::function<Matrix(const Vector&)>& jacobian, Vector x0,
                                const NewtonConfig& config) {
  return newton_solve(
      residual,
      [&](const Vector& x, const Vector& r) -> Vector {
        const Eigen::FullPivLU<Matrix> lu(jacobian(x));
        if (!lu.isInvertible()) throw SolverError("newton_solve: singular Jacobian", r.norm());
        return lu.solve(r);
      },
      std::move(x0), config);
}

}  // namespace qmrom
