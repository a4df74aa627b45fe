#include "d2pc/controllers.hpp"

#include <utility>

namespace d2pc {

namespace {

// Shift a history matrix one sample left and append the newest column.
void push_column(Matrix& hist, const Vector& col) {
  if (col.size() != hist.rows()) {
    throw InvalidInputError("controller observation has wrong dimension");
  }
  const Eigen::Index n = hist.cols();
  if (n > 1) {
    const Matrix shifted = hist.rightCols(n - 1);
    hist.leftCols(n - 1) = shifted;
  }
  if (n > 0) hist.col(n - 1) = col;
}

// Stack the columns of a history matrix, oldest first.
Vector flatten(const Matrix& hist) {
  Vector v(hist.size());
  for (Eigen::Index k = 0; k < hist.cols(); ++k) {
    v.segment(k * hist.rows(), hist.rows()) = hist.col(k);
  }
  return v;
}

// Warm start for stacked-input variables: drop the first block, repeat the
// last one.
Vector shift_plan(const Vector& plan, int m) {
  Vector next(plan.size());
  next.head(plan.size() - m) = plan.tail(plan.size() - m);
  next.tail(m) = plan.tail(m);
  return next;
}

// Solves qp, warm-started from prev (with an optional primal override) when
// prev converged and the sizes still match.
QpSolution solve_step(const QpProblem& qp, QpSettings s, bool warm,
                      const QpSolution& prev, const Vector* z_warm) {
  const Vector& z0 = z_warm != nullptr ? *z_warm : prev.z;
  if (warm && prev.status == QpStatus::Solved &&
      z0.size() == qp.dimension() && prev.y.size() == qp.constraints()) {
    s.warm_start = true;
    s.z0 = z0;
    s.y0 = prev.y;
  }
  return solve(qp, s);
}

Controller::Decision to_decision(const QpSolution& sol, const Vector& u) {
  Controller::Decision d;
  d.status = sol.status;
  d.qp_iterations = sol.iterations;
  d.primal_residual = sol.primal_residual;
  d.dual_residual = sol.dual_residual;
  d.u = sol.status == QpStatus::Solved ? u : Vector::Zero(u.size());
  return d;
}

class MpcController final : public Controller {
public:
  MpcController(LtiSystem sys, ControllerSetup setup)
      : sys_(std::move(sys)), setup_(std::move(setup)) {
    sys_.validate();
    setup_.tracking.validate(static_cast<int>(sys_.inputs()),
                             static_cast<int>(sys_.outputs()));
  }

  Decision decide(int t, const Vector* x_true) override {
    if (x_true == nullptr) {
      throw InvalidInputError("model-based controller needs the plant state");
    }
    const int m = static_cast<int>(sys_.inputs());
    const QpProblem qp =
        condense_mpc(sys_, *x_true, setup_.tracking,
                     stack_reference(setup_.reference, t, setup_.tracking.horizon));
    Vector z_warm;
    const Vector* zw = nullptr;
    if (setup_.warm_start && prev_.status == QpStatus::Solved) {
      z_warm = shift_plan(prev_.z, m);
      zw = &z_warm;
    }
    prev_ = solve_step(qp, setup_.qp, setup_.warm_start, prev_, zw);
    return to_decision(prev_, prev_.z.size() >= m ? Vector(prev_.z.head(m))
                                                  : Vector::Zero(m));
  }

  void observe(const Vector&, const Vector&) override {}

private:
  LtiSystem sys_;
  ControllerSetup setup_;
  QpSolution prev_;
};

class D2pcController final : public Controller {
public:
  D2pcController(DataDrivenModel model, ControllerSetup setup)
      : model_(std::move(model)), setup_(std::move(setup)) {
    setup_.tracking.validate(model_.m, model_.p);
    pred_ = build_predictor(model_, setup_.tracking.horizon);
    y_hist_ = Matrix::Zero(model_.p, model_.nbar);
    u_hist_ = Matrix::Zero(model_.m, model_.nbar);
  }

  Decision decide(int t, const Vector*) override {
    const int m = model_.m;
    const Vector chi = build_chi(y_hist_, u_hist_);
    const QpProblem qp =
        condense_d2pc(pred_, chi, setup_.tracking,
                      stack_reference(setup_.reference, t, setup_.tracking.horizon));
    Vector z_warm;
    const Vector* zw = nullptr;
    if (setup_.warm_start && prev_.status == QpStatus::Solved) {
      z_warm = shift_plan(prev_.z, m);
      zw = &z_warm;
    }
    prev_ = solve_step(qp, setup_.qp, setup_.warm_start, prev_, zw);
    return to_decision(prev_, prev_.z.size() >= m ? Vector(prev_.z.head(m))
                                                  : Vector::Zero(m));
  }

  void observe(const Vector& u, const Vector& y) override {
    push_column(u_hist_, u);
    push_column(y_hist_, y);
  }

private:
  DataDrivenModel model_;
  ControllerSetup setup_;
  Predictor pred_;
  Matrix y_hist_, u_hist_;
  QpSolution prev_;
};

class DeepcController final : public Controller {
public:
  DeepcController(const DeepcBlocks& blocks, const DeepcOptions& opts,
                  ControllerSetup setup)
      : setup_(std::move(setup)), builder_(blocks, setup_.tracking, opts) {
    y_hist_ = Matrix::Zero(blocks.p, blocks.tini);
    u_hist_ = Matrix::Zero(blocks.m, blocks.tini);
  }

  Decision decide(int t, const Vector*) override {
    const int m = builder_.blocks().m;
    const QpProblem qp =
        builder_.build(flatten(u_hist_), flatten(y_hist_),
                       stack_reference(setup_.reference, t, setup_.tracking.horizon));
    prev_ = solve_step(qp, setup_.qp, setup_.warm_start, prev_, nullptr);
    Vector u = Vector::Zero(m);
    if (prev_.status == QpStatus::Solved) {
      u = builder_.stacked_inputs(prev_.z).head(m);
    }
    return to_decision(prev_, u);
  }

  void observe(const Vector& u, const Vector& y) override {
    push_column(u_hist_, u);
    push_column(y_hist_, y);
  }

private:
  ControllerSetup setup_;
  DeepcQpBuilder builder_;
  Matrix y_hist_, u_hist_;
  QpSolution prev_;
};

} // namespace

std::unique_ptr<Controller> make_mpc_controller(const LtiSystem& sys,
                                                const ControllerSetup& setup) {
  return std::make_unique<MpcController>(sys, setup);
}

std::unique_ptr<Controller> make_d2pc_controller(const DataDrivenModel& model,
                                                 const ControllerSetup& setup) {
  return std::make_unique<D2pcController>(model, setup);
}

std::unique_ptr<Controller> make_deepc_controller(const DeepcBlocks& blocks,
                                                  const DeepcOptions& opts,
                                                  const ControllerSetup& setup) {
  return std::make_unique<DeepcController>(blocks, opts, setup);
}

Trajectory run_closed_loop(const LtiSystem& sys, Controller& ctrl,
                           const ReferenceSignal& ref, int nsim,
                           const std::function<Vector(int)>& noise_at) {
  sys.validate();
  if (nsim < 1) throw InvalidInputError("run_closed_loop: nsim must be >= 1");
  if (ref.value.size() != sys.outputs()) {
    throw InvalidInputError("run_closed_loop: reference dimension mismatch");
  }
  const Eigen::Index m = sys.inputs();
  const Eigen::Index p = sys.outputs();

  Trajectory traj;
  traj.reference = Matrix::Zero(p, nsim);
  traj.inputs = Matrix::Zero(m, nsim);
  traj.outputs_true = Matrix::Zero(p, nsim);
  traj.outputs_measured = Matrix::Zero(p, nsim);
  traj.status.resize(nsim, QpStatus::Failure);
  traj.qp_iterations.resize(nsim, 0);

  Vector x = Vector::Zero(sys.order());
  for (int t = 0; t < nsim; ++t) {
    const Vector y_true = sys.C * x;
    Vector y_meas = y_true;
    if (noise_at) {
      const Vector n = noise_at(t);
      if (n.size() != p) {
        throw InvalidInputError("run_closed_loop: noise dimension mismatch");
      }
      y_meas += n;
    }

    traj.reference.col(t) = ref.at(t);
    traj.outputs_true.col(t) = y_true;
    traj.outputs_measured.col(t) = y_meas;
    traj.steps_completed = t + 1;
    // A controller that throws (ill-conditioned QP, diverged arithmetic) is
    // a failed solve for this trial, not a reason to abort the caller.
    try {
      const Controller::Decision d = ctrl.decide(t, &x);
      traj.status[static_cast<std::size_t>(t)] = d.status;
      traj.qp_iterations[static_cast<std::size_t>(t)] = d.qp_iterations;
      if (d.status != QpStatus::Solved) {
        traj.failed = true;
        traj.failure_step = t;
        break;
      }
      traj.inputs.col(t) = d.u;
      ctrl.observe(d.u, y_meas);
      x = sys.A * x + sys.B * d.u;
    } catch (const Error&) {
      traj.failed = true;
      traj.failure_step = t;
      break;
    }
  }
  return traj;
}

Trajectory run_closed_loop(const LtiSystem& sys, Controller& ctrl,
                           const ReferenceSignal& ref, int nsim,
                           const NoiseSpec& noise, Rng& rng) {
  if (noise.amplitude < 0.0) {
    throw InvalidInputError("run_closed_loop: negative noise amplitude");
  }
  const Eigen::Index p = sys.outputs();
  std::function<Vector(int)> noise_at;
  if (noise.amplitude > 0.0) {
    noise_at = [&](int) {
      Vector n(p);
      for (Eigen::Index i = 0; i < p; ++i) {
        n(i) = rng.uniform(-noise.amplitude, noise.amplitude);
      }
      return n;
    };
  }
  return run_closed_loop(sys, ctrl, ref, nsim, noise_at);
}

} // namespace d2pc
