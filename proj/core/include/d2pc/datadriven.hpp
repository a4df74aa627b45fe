#pragma once

#include <vector>

#include "d2pc/lti.hpp"
#include "d2pc/numerics.hpp"

namespace d2pc {

// The identification below works per output channel. Channel i carries the
// extended regressor
//
//   chi_i(t) = col( y_i(t-nbar), ..., y_i(t-1),
//                   u(t-nbar), ..., u(t-1) )        in R^{(1+m)*nbar}
//
// and evolves as chi_i(t+1) = A_i chi_i(t) + B_i u(t). The most recent
// output y_i(t-1) sits at position nbar-1. The stacked regressor
// concatenates the channels, giving dimension p*(1+m)*nbar.

// Data equations for one channel of one episode: columns t = 0..T-1 hold
// chi_i(t) (X_minus), chi_i(t+1) (X_plus) and u(t) (U_minus).
struct DataMatrices {
  Matrix X_minus;  // (1+m)*nbar x T
  Matrix X_plus;   // (1+m)*nbar x T
  Matrix U_minus;  // m x T
};

// One channel's regressor dynamics.
struct ChannelModel {
  Matrix A;  // (1+m)*nbar square
  Matrix B;  // (1+m)*nbar x m
};

// Model identified from data, one block per output channel, plus rank
// diagnostics from the regression. The data matrix is expected to be rank
// deficient whenever nbar exceeds the true order; that does not hurt the
// fit on plant trajectories, so it is reported rather than rejected.
struct DataDrivenModel {
  int nbar = 0;
  int m = 0;  // plant inputs
  int p = 0;  // plant outputs
  std::vector<ChannelModel> channels;

  Eigen::Index min_data_rank = 0;   // smallest rank seen across regressions
  Eigen::Index full_data_rank = 0;  // (1+m)*nbar + m
  int episodes_used = 0;

  [[nodiscard]] int channel_size() const { return (1 + m) * nbar; }
  [[nodiscard]] int chi_size() const { return p * channel_size(); }
  [[nodiscard]] bool rank_deficient_data() const {
    return min_data_rank < full_data_rank;
  }
};

// Stacked regressor from the nbar most recent samples, oldest first:
// y_hist and u_hist hold columns t-nbar .. t-1.
[[nodiscard]] Vector build_chi(const Matrix& y_hist, const Matrix& u_hist);

// Stacked regressor at episode time t (column initial_offset + t holds time
// t). Requires initial_offset >= nbar and the nbar preceding samples.
[[nodiscard]] Vector chi_from_episode(const EpisodeData& ep, int nbar, int t);

// Shifted data matrices for one channel. T is taken from the episode
// (data_length()); requires initial_offset >= nbar and T >= 4*nbar + 1.
[[nodiscard]] DataMatrices build_data_matrices(const EpisodeData& ep,
                                               int channel, int nbar);

// Least-squares fit [A_i B_i] = X_plus * pinv(col(X_minus, U_minus)) per
// channel, averaged over episodes. All episodes must share the input and
// output dimensions; each must satisfy the build_data_matrices
// preconditions.
[[nodiscard]] DataDrivenModel identify(const std::vector<EpisodeData>& episodes,
                                       int nbar,
                                       double rel_tol = kDefaultRankRelTol);

// One-step regressor update, all channels: chi(t+1) from chi(t) and u(t).
[[nodiscard]] Vector propagate(const DataDrivenModel& model, const Vector& chi,
                               const Vector& u);

// Most recent output stored in the stacked regressor, i.e. y(t-1) when given
// chi(t). The output predicted for time t is chi_output(propagate(chi, u)).
[[nodiscard]] Vector chi_output(const DataDrivenModel& model,
                                const Vector& chi);

// Batched prediction over a horizon. With P = p*(1+m)*nbar:
//   F        (N*P x P)    rows k hold Abar^(k+1)
//   G        (N*P x N*m)  block (k, j) = Abar^(k-j) * Bbar for j <= k
//   selector (p*N x N*P)  picks y(t+k) out of chi(t+k+1)
// where Abar is block diagonal over channels and Bbar stacks the channel
// input maps. Predicted outputs: selector * (F * chi + G * ubar).
struct Predictor {
  Matrix F;
  Matrix G;
  Matrix selector;
  int horizon = 0;
};

[[nodiscard]] Predictor build_predictor(const DataDrivenModel& model, int N);

// Stacked outputs col(y(t), ..., y(t+N-1)) for the stacked input ubar.
[[nodiscard]] Vector predict_outputs(const Predictor& pred, const Vector& chi,
                                     const Vector& ubar);

} // namespace d2pc
