#pragma once

#include <functional>
#include <memory>

#include "d2pc/condense.hpp"

namespace d2pc {

// Options shared by every receding-horizon controller.
struct ControllerSetup {
  TrackingSetup tracking;
  ReferenceSignal reference;
  QpSettings qp;
  bool warm_start = true;
};

// A receding-horizon controller. decide(t) may use measurements up to t-1
// only; the plant state pointer is consumed solely by the model-based
// controller (it plays the role of an exact observer).
class Controller {
public:
  struct Decision {
    Vector u;
    QpStatus status = QpStatus::Failure;
    int qp_iterations = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
  };

  virtual ~Controller() = default;
  [[nodiscard]] virtual Decision decide(int t, const Vector* x_true) = 0;
  // Records the input applied at step t and the measurement taken at t.
  virtual void observe(const Vector& u, const Vector& y_measured) = 0;
};

// Condensed MPC against the exact plant model, fed the true state. Serves as
// the reference the data-driven controllers are compared to.
[[nodiscard]] std::unique_ptr<Controller> make_mpc_controller(
    const LtiSystem& sys, const ControllerSetup& setup);

// Receding-horizon controller on the identified per-channel regressor model.
[[nodiscard]] std::unique_ptr<Controller> make_d2pc_controller(
    const DataDrivenModel& model, const ControllerSetup& setup);

// Hankel-data controller (with or without regularization/slack).
[[nodiscard]] std::unique_ptr<Controller> make_deepc_controller(
    const DeepcBlocks& blocks, const DeepcOptions& opts,
    const ControllerSetup& setup);

// Closed-loop record. Columns 0..steps_completed-1 are valid; a failed QP
// stops the loop at failure_step with that column's status recorded.
struct Trajectory {
  Matrix reference;         // p x nsim
  Matrix inputs;            // m x nsim
  Matrix outputs_true;      // p x nsim, C x(t)
  Matrix outputs_measured;  // p x nsim, C x(t) + noise
  std::vector<QpStatus> status;
  std::vector<int> qp_iterations;
  int steps_completed = 0;
  bool failed = false;
  int failure_step = -1;
};

// Simulates the plant from x(0) = 0 under the controller for nsim steps.
// Measurement noise reaches the controller; the true outputs are recorded
// alongside. The rng overload draws noise per NoiseSpec; the function
// overload lets callers supply an arbitrary per-step noise vector.
[[nodiscard]] Trajectory run_closed_loop(const LtiSystem& sys, Controller& ctrl,
                                         const ReferenceSignal& ref, int nsim,
                                         const NoiseSpec& noise, Rng& rng);
[[nodiscard]] Trajectory run_closed_loop(
    const LtiSystem& sys, Controller& ctrl, const ReferenceSignal& ref,
    int nsim, const std::function<Vector(int)>& noise_at);

} // namespace d2pc
