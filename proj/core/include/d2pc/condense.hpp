#pragma once

#include <optional>
#include <vector>

#include "d2pc/datadriven.hpp"
#include "d2pc/qp.hpp"

namespace d2pc {

// Cost and constraints of the receding-horizon tracking problem
//
//   min sum_{k=0}^{N-1} |y(t+k) - r(t+k)|_Q^2 + |u(t+k)|_R^2
//   s.t. input and output boxes over the horizon
//
// shared by every condensed controller below.
struct TrackingSetup {
  int horizon = 0;
  Matrix Q;  // p x p
  Matrix R;  // m x m
  std::optional<BoxBounds> input_bounds;
  std::optional<BoxBounds> output_bounds;

  void validate(int m, int p) const;
};

// col(r(t), ..., r(t + N - 1)).
[[nodiscard]] Vector stack_reference(const ReferenceSignal& ref, int t, int N);

// Condenses the tracking problem onto the stacked input ubar using the
// batched regressor predictor; chi is the stacked regressor at the current
// step. Variables: ubar in R^(m*N).
[[nodiscard]] QpProblem condense_d2pc(const Predictor& pred, const Vector& chi,
                                      const TrackingSetup& setup,
                                      const Vector& rstack);

// Same condensation against the true state-space model, predicting from the
// exact state x. Used as the reference controller.
[[nodiscard]] QpProblem condense_mpc(const LtiSystem& sys, const Vector& x,
                                     const TrackingSetup& setup,
                                     const Vector& rstack);

// Stacked Hankel data for the subspace predictive controllers. Columns may
// come from several episodes placed side by side.
struct DeepcBlocks {
  Matrix U_p;  // (m*tini) x L
  Matrix Y_p;  // (p*tini) x L
  Matrix U_f;  // (m*N) x L
  Matrix Y_f;  // (p*N) x L
  int tini = 0;
  int horizon = 0;
  int m = 0;
  int p = 0;

  [[nodiscard]] Eigen::Index columns() const { return U_p.cols(); }
};

// Depth-(tini+N) Hankel matrices of each episode, split into past and
// future rows and concatenated over episodes. Episodes shorter than
// tini + N throw InsufficientDataError.
[[nodiscard]] DeepcBlocks build_deepc_blocks(
    const std::vector<EpisodeData>& episodes, int tini, int N);

// Entrywise mean of identically shaped block sets.
[[nodiscard]] DeepcBlocks average_deepc_blocks(
    const std::vector<DeepcBlocks>& sets);

// lambda_g regularizes |g|^2; output_slack relaxes the output-history match
// to Y_p g - sigma = y_ini with penalty lambda_y |sigma|^2.
struct DeepcOptions {
  double lambda_g = 0.0;
  double lambda_y = 0.0;
  bool output_slack = false;
};

// Ridge added on top of lambda_g unconditionally; see DeepcQpBuilder. Far
// below the tracking weights, far above the curvature that measurement noise
// leaks into the flat directions of the data cost.
inline constexpr double kGRidge = 1e-3;

// Assembles the Hankel-data tracking QP over z = g (plus the slack block
// when enabled). The data-dependent parts are built once; per-step calls
// only fill in the histories and the reference.
class DeepcQpBuilder {
public:
  DeepcQpBuilder(DeepcBlocks blocks, const TrackingSetup& setup,
                 const DeepcOptions& opts);

  // u_ini = col(u(t-tini..t-1)), y_ini likewise, rstack as stack_reference.
  [[nodiscard]] QpProblem build(const Vector& u_ini, const Vector& y_ini,
                                const Vector& rstack) const;

  // Stacked input plan U_f g encoded by a solution vector.
  [[nodiscard]] Vector stacked_inputs(const Vector& z) const;

  [[nodiscard]] const DeepcBlocks& blocks() const { return blocks_; }
  [[nodiscard]] Eigen::Index variables() const { return H_.rows(); }

private:
  DeepcBlocks blocks_;
  DeepcOptions opts_;
  Matrix H_;
  Matrix M_;
  Vector l_, u_;      // bound template; history slots overwritten per step
  Matrix YfT_Qbar_;   // Y_f' Qbar, reused for the linear term
};

// One-shot convenience over DeepcQpBuilder.
[[nodiscard]] QpProblem condense_deepc(const DeepcBlocks& blocks,
                                       const TrackingSetup& setup,
                                       const DeepcOptions& opts,
                                       const Vector& u_ini,
                                       const Vector& y_ini,
                                       const Vector& rstack);

} // namespace d2pc
