#include "d2pc/datadriven.hpp"

#include <string>

namespace d2pc {

namespace {

// chi for one channel from raw episode columns [first, first + nbar).
Vector channel_chi(const EpisodeData& ep, int channel, int nbar, int first) {
  const Eigen::Index m = ep.inputs.rows();
  Vector chi((1 + m) * nbar);
  for (int k = 0; k < nbar; ++k) {
    chi(k) = ep.outputs(channel, first + k);
  }
  for (int k = 0; k < nbar; ++k) {
    chi.segment(nbar + k * m, m) = ep.inputs.col(first + k);
  }
  return chi;
}

void check_episode(const EpisodeData& ep, int nbar) {
  if (nbar < 1) throw InvalidInputError("regressor memory nbar must be >= 1");
  if (ep.inputs.cols() != ep.outputs.cols()) {
    throw InvalidInputError("episode input/output sample counts differ");
  }
  if (ep.initial_offset < nbar) {
    throw InsufficientDataError(
        "episode warm-up " + std::to_string(ep.initial_offset) +
        " shorter than nbar = " + std::to_string(nbar));
  }
  // A single episode may be too short to determine the dynamics on its own;
  // the per-episode fit is minimum-norm and episodes are averaged, so the
  // only hard requirement is one regression sample.
  if (ep.data_length() < 1) {
    throw InsufficientDataError("episode holds no regression samples");
  }
}

} // namespace

Vector build_chi(const Matrix& y_hist, const Matrix& u_hist) {
  if (y_hist.cols() != u_hist.cols() || y_hist.cols() < 1) {
    throw InvalidInputError("build_chi: history lengths differ or are empty");
  }
  require_finite(y_hist, "build_chi: outputs");
  require_finite(u_hist, "build_chi: inputs");
  const Eigen::Index nbar = y_hist.cols();
  const Eigen::Index p = y_hist.rows();
  const Eigen::Index m = u_hist.rows();
  const Eigen::Index block = (1 + m) * nbar;
  Vector chi(p * block);
  for (Eigen::Index i = 0; i < p; ++i) {
    chi.segment(i * block, nbar) = y_hist.row(i).transpose();
    for (Eigen::Index k = 0; k < nbar; ++k) {
      chi.segment(i * block + nbar + k * m, m) = u_hist.col(k);
    }
  }
  return chi;
}

Vector chi_from_episode(const EpisodeData& ep, int nbar, int t) {
  check_episode(ep, nbar);
  const int first = ep.initial_offset + t - nbar;
  if (first < 0 || ep.initial_offset + t > ep.inputs.cols()) {
    throw InvalidInputError("chi_from_episode: time out of range");
  }
  const Eigen::Index p = ep.outputs.rows();
  const Eigen::Index block = (1 + ep.inputs.rows()) * nbar;
  Vector chi(p * block);
  for (Eigen::Index i = 0; i < p; ++i) {
    chi.segment(i * block, block) = channel_chi(ep, i, nbar, first);
  }
  return chi;
}

DataMatrices build_data_matrices(const EpisodeData& ep, int channel, int nbar) {
  check_episode(ep, nbar);
  if (channel < 0 || channel >= ep.outputs.rows()) {
    throw InvalidInputError("build_data_matrices: channel out of range");
  }
  const Eigen::Index m = ep.inputs.rows();
  const Eigen::Index T = ep.data_length();
  const int off = ep.initial_offset;

  DataMatrices d;
  d.X_minus.resize((1 + m) * nbar, T);
  d.X_plus.resize((1 + m) * nbar, T);
  d.U_minus.resize(m, T);
  for (Eigen::Index t = 0; t < T; ++t) {
    d.X_minus.col(t) = channel_chi(ep, channel, nbar, off + t - nbar);
    d.X_plus.col(t) = channel_chi(ep, channel, nbar, off + t - nbar + 1);
    d.U_minus.col(t) = ep.inputs.col(off + t);
  }
  return d;
}

DataDrivenModel identify(const std::vector<EpisodeData>& episodes, int nbar,
                         double rel_tol) {
  if (episodes.empty()) throw InvalidInputError("identify: no episodes");
  const Eigen::Index m = episodes.front().inputs.rows();
  const Eigen::Index p = episodes.front().outputs.rows();
  for (const auto& ep : episodes) {
    if (ep.inputs.rows() != m || ep.outputs.rows() != p) {
      throw InvalidInputError("identify: episodes have mixed dimensions");
    }
    check_episode(ep, nbar);
  }

  const Eigen::Index block = (1 + m) * nbar;
  DataDrivenModel model;
  model.nbar = nbar;
  model.m = static_cast<int>(m);
  model.p = static_cast<int>(p);
  model.full_data_rank = block + m;
  model.min_data_rank = model.full_data_rank;
  model.episodes_used = static_cast<int>(episodes.size());
  model.channels.resize(p);

  for (Eigen::Index i = 0; i < p; ++i) {
    Matrix AB_sum = Matrix::Zero(block, block + m);
    for (const auto& ep : episodes) {
      const DataMatrices d = build_data_matrices(ep, static_cast<int>(i), nbar);
      Matrix J(block + m, d.X_minus.cols());
      J.topRows(block) = d.X_minus;
      J.bottomRows(m) = d.U_minus;
      model.min_data_rank =
          std::min(model.min_data_rank, numeric_rank(J, rel_tol).numeric_rank);
      AB_sum += d.X_plus * pinv(J, rel_tol);
    }
    const Matrix AB = AB_sum / static_cast<double>(episodes.size());
    model.channels[i].A = AB.leftCols(block);
    model.channels[i].B = AB.rightCols(m);
  }
  return model;
}

Vector propagate(const DataDrivenModel& model, const Vector& chi,
                 const Vector& u) {
  if (chi.size() != model.chi_size()) {
    throw InvalidInputError("propagate: regressor size mismatch");
  }
  if (u.size() != model.m) {
    throw InvalidInputError("propagate: input size mismatch");
  }
  const Eigen::Index block = model.channel_size();
  Vector next(chi.size());
  for (int i = 0; i < model.p; ++i) {
    next.segment(i * block, block) =
        model.channels[i].A * chi.segment(i * block, block) +
        model.channels[i].B * u;
  }
  return next;
}

Vector chi_output(const DataDrivenModel& model, const Vector& chi) {
  if (chi.size() != model.chi_size()) {
    throw InvalidInputError("chi_output: regressor size mismatch");
  }
  const Eigen::Index block = model.channel_size();
  Vector y(model.p);
  for (int i = 0; i < model.p; ++i) {
    y(i) = chi(i * block + model.nbar - 1);
  }
  return y;
}

Predictor build_predictor(const DataDrivenModel& model, int N) {
  if (N < 1) throw InvalidInputError("build_predictor: horizon must be >= 1");
  if (model.channels.size() != static_cast<std::size_t>(model.p)) {
    throw InvalidInputError("build_predictor: malformed model");
  }
  const Eigen::Index block = model.channel_size();
  const Eigen::Index P = model.chi_size();
  const Eigen::Index m = model.m;

  Matrix Abar = Matrix::Zero(P, P);
  Matrix Bbar = Matrix::Zero(P, m);
  for (int i = 0; i < model.p; ++i) {
    Abar.block(i * block, i * block, block, block) = model.channels[i].A;
    Bbar.middleRows(i * block, block) = model.channels[i].B;
  }

  Predictor pred;
  pred.horizon = N;
  pred.F.resize(N * P, P);
  pred.G = Matrix::Zero(N * P, N * m);

  // Row block k holds Abar^(k+1); G block (k, j) = Abar^(k-j) * Bbar.
  Matrix Apow = Abar;  // Abar^(k+1) while filling row block k
  for (int k = 0; k < N; ++k) {
    pred.F.middleRows(k * P, P) = Apow;
    pred.G.block(k * P, k * m, P, m) = Bbar;
    for (int j = k - 1; j >= 0; --j) {
      // Abar^(k-j) * Bbar equals the block above shifted one power up.
      pred.G.block(k * P, j * m, P, m) =
          Abar * pred.G.block((k - 1) * P, j * m, P, m);
    }
    Apow = Abar * Apow;
  }

  pred.selector = Matrix::Zero(model.p * N, N * P);
  for (int k = 0; k < N; ++k) {
    for (int i = 0; i < model.p; ++i) {
      pred.selector(k * model.p + i, k * P + i * block + model.nbar - 1) = 1.0;
    }
  }
  return pred;
}

Vector predict_outputs(const Predictor& pred, const Vector& chi,
                       const Vector& ubar) {
  if (chi.size() != pred.F.cols()) {
    throw InvalidInputError("predict_outputs: regressor size mismatch");
  }
  if (ubar.size() != pred.G.cols()) {
    throw InvalidInputError("predict_outputs: stacked input size mismatch");
  }
  return pred.selector * (pred.F * chi + pred.G * ubar);
}

} // namespace d2pc
