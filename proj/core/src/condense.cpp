#include "d2pc/condense.hpp"

#include <cmath>
#include <string>

namespace d2pc {

namespace {

Matrix kron_identity(int N, const Matrix& W) {
  Matrix out = Matrix::Zero(N * W.rows(), N * W.cols());
  for (int k = 0; k < N; ++k) {
    out.block(k * W.rows(), k * W.cols(), W.rows(), W.cols()) = W;
  }
  return out;
}

Vector tile(const Vector& v, int times) {
  Vector out(v.size() * times);
  for (int k = 0; k < times; ++k) out.segment(k * v.size(), v.size()) = v;
  return out;
}

void check_weight(const Matrix& W, int dim, const char* name) {
  if (W.rows() != dim || W.cols() != dim) {
    throw InvalidInputError(std::string(name) + " has wrong dimensions");
  }
  require_finite(W, name);
}

void check_bounds(const std::optional<BoxBounds>& b, int dim,
                  const char* name) {
  if (!b) return;
  if (b->lower.size() != dim || b->upper.size() != dim) {
    throw InvalidInputError(std::string(name) + " bound size mismatch");
  }
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (std::isnan(b->lower(i)) || std::isnan(b->upper(i)) ||
        b->lower(i) > b->upper(i)) {
      throw InvalidInputError(std::string(name) + " bounds are not an interval");
    }
  }
}

// Tracking QP over ubar for predicted outputs ybar = Phi w + Gamma ubar,
// where w is whatever state the prediction starts from. Output-box rows can
// skip leading blocks that do not depend on ubar.
QpProblem tracking_qp(const Matrix& Phi, const Matrix& Gamma, const Vector& w,
                      const TrackingSetup& setup, const Vector& rstack,
                      int skip_output_rows) {
  const int N = setup.horizon;
  const int p = static_cast<int>(setup.Q.rows());
  const int m = static_cast<int>(setup.R.rows());
  const Matrix Qbar = kron_identity(N, setup.Q);
  const Matrix Rbar = kron_identity(N, setup.R);

  const Vector offset = Phi * w;  // predicted outputs under ubar = 0
  QpProblem qp;
  Matrix H = 2.0 * (Gamma.transpose() * Qbar * Gamma + Rbar);
  qp.H = 0.5 * (H + H.transpose());
  qp.f = 2.0 * Gamma.transpose() * Qbar * (offset - rstack);

  Eigen::Index rows = 0;
  if (setup.input_bounds) rows += m * N;
  if (setup.output_bounds) rows += p * N - skip_output_rows;
  qp.M.resize(rows, m * N);
  qp.lower.resize(rows);
  qp.upper.resize(rows);
  Eigen::Index at = 0;
  if (setup.input_bounds) {
    qp.M.middleRows(at, m * N) = Matrix::Identity(m * N, m * N);
    qp.lower.segment(at, m * N) = tile(setup.input_bounds->lower, N);
    qp.upper.segment(at, m * N) = tile(setup.input_bounds->upper, N);
    at += m * N;
  }
  if (setup.output_bounds) {
    const Eigen::Index nr = p * N - skip_output_rows;
    qp.M.middleRows(at, nr) = Gamma.bottomRows(nr);
    qp.lower.segment(at, nr) =
        tile(setup.output_bounds->lower, N).tail(nr) - offset.tail(nr);
    qp.upper.segment(at, nr) =
        tile(setup.output_bounds->upper, N).tail(nr) - offset.tail(nr);
    at += nr;
  }
  return qp;
}

} // namespace

void TrackingSetup::validate(int m, int p) const {
  if (horizon < 1) throw InvalidInputError("TrackingSetup: horizon must be >= 1");
  check_weight(Q, p, "TrackingSetup: Q");
  check_weight(R, m, "TrackingSetup: R");
  check_bounds(input_bounds, m, "TrackingSetup: input");
  check_bounds(output_bounds, p, "TrackingSetup: output");
}

Vector stack_reference(const ReferenceSignal& ref, int t, int N) {
  const Eigen::Index p = ref.value.size();
  Vector r(p * N);
  for (int k = 0; k < N; ++k) r.segment(k * p, p) = ref.at(t + k);
  return r;
}

QpProblem condense_d2pc(const Predictor& pred, const Vector& chi,
                        const TrackingSetup& setup, const Vector& rstack) {
  const int N = setup.horizon;
  const int p = static_cast<int>(setup.Q.rows());
  const int m = static_cast<int>(setup.R.rows());
  setup.validate(m, p);
  if (pred.horizon != N) {
    throw InvalidInputError("condense_d2pc: predictor horizon mismatch");
  }
  if (pred.G.cols() != m * N || pred.selector.rows() != p * N) {
    throw InvalidInputError("condense_d2pc: predictor dimensions mismatch");
  }
  if (chi.size() != pred.F.cols()) {
    throw InvalidInputError("condense_d2pc: regressor size mismatch");
  }
  if (rstack.size() != p * N) {
    throw InvalidInputError("condense_d2pc: reference stack size mismatch");
  }
  const Matrix Phi = pred.selector * pred.F;
  const Matrix Gamma = pred.selector * pred.G;
  return tracking_qp(Phi, Gamma, chi, setup, rstack, 0);
}

QpProblem condense_mpc(const LtiSystem& sys, const Vector& x,
                       const TrackingSetup& setup, const Vector& rstack) {
  sys.validate();
  const int N = setup.horizon;
  const int p = static_cast<int>(sys.outputs());
  const int m = static_cast<int>(sys.inputs());
  setup.validate(m, p);
  if (x.size() != sys.order()) {
    throw InvalidInputError("condense_mpc: state size mismatch");
  }
  if (rstack.size() != p * N) {
    throw InvalidInputError("condense_mpc: reference stack size mismatch");
  }

  // Phi rows k: C A^k; Gamma block (k, j) = C A^(k-1-j) B for j < k. The
  // first output block is fixed by the current state, so output-box rows
  // start at block 1.
  const Eigen::Index n = sys.order();
  Matrix Phi(p * N, n);
  Matrix Gamma = Matrix::Zero(p * N, m * N);
  std::vector<Matrix> markov(N > 1 ? N - 1 : 0);  // markov[i] = C A^i B
  Matrix CA = sys.C;
  for (int k = 0; k < N; ++k) {
    Phi.middleRows(k * p, p) = CA;
    if (k < N - 1) markov[static_cast<std::size_t>(k)] = CA * sys.B;
    CA = CA * sys.A;
  }
  for (int k = 1; k < N; ++k) {
    for (int j = 0; j < k; ++j) {
      Gamma.block(k * p, j * m, p, m) = markov[static_cast<std::size_t>(k - 1 - j)];
    }
  }
  return tracking_qp(Phi, Gamma, x, setup, rstack, p);
}

DeepcBlocks build_deepc_blocks(const std::vector<EpisodeData>& episodes,
                               int tini, int N) {
  if (episodes.empty()) {
    throw InvalidInputError("build_deepc_blocks: no episodes");
  }
  if (tini < 1 || N < 1) {
    throw InvalidInputError("build_deepc_blocks: tini and N must be >= 1");
  }
  const Eigen::Index m = episodes.front().inputs.rows();
  const Eigen::Index p = episodes.front().outputs.rows();
  const int L = tini + N;

  DeepcBlocks b;
  b.tini = tini;
  b.horizon = N;
  b.m = static_cast<int>(m);
  b.p = static_cast<int>(p);

  Eigen::Index total = 0;
  std::vector<Matrix> hu, hy;
  hu.reserve(episodes.size());
  hy.reserve(episodes.size());
  for (const auto& ep : episodes) {
    if (ep.inputs.rows() != m || ep.outputs.rows() != p) {
      throw InvalidInputError("build_deepc_blocks: episodes have mixed dimensions");
    }
    if (ep.inputs.cols() != ep.outputs.cols()) {
      throw InvalidInputError("build_deepc_blocks: episode sample counts differ");
    }
    hu.push_back(hankel(ep.inputs, L));
    hy.push_back(hankel(ep.outputs, L));
    total += hu.back().cols();
  }

  b.U_p.resize(m * tini, total);
  b.U_f.resize(m * N, total);
  b.Y_p.resize(p * tini, total);
  b.Y_f.resize(p * N, total);
  Eigen::Index at = 0;
  for (std::size_t e = 0; e < episodes.size(); ++e) {
    const Eigen::Index cols = hu[e].cols();
    b.U_p.middleCols(at, cols) = hu[e].topRows(m * tini);
    b.U_f.middleCols(at, cols) = hu[e].bottomRows(m * N);
    b.Y_p.middleCols(at, cols) = hy[e].topRows(p * tini);
    b.Y_f.middleCols(at, cols) = hy[e].bottomRows(p * N);
    at += cols;
  }
  return b;
}

DeepcBlocks average_deepc_blocks(const std::vector<DeepcBlocks>& sets) {
  if (sets.empty()) {
    throw InvalidInputError("average_deepc_blocks: no block sets");
  }
  DeepcBlocks out = sets.front();
  for (std::size_t i = 1; i < sets.size(); ++i) {
    const DeepcBlocks& s = sets[i];
    if (s.U_p.rows() != out.U_p.rows() || s.U_p.cols() != out.U_p.cols() ||
        s.Y_p.rows() != out.Y_p.rows() || s.tini != out.tini ||
        s.horizon != out.horizon) {
      throw InvalidInputError("average_deepc_blocks: shapes differ");
    }
    out.U_p += s.U_p;
    out.Y_p += s.Y_p;
    out.U_f += s.U_f;
    out.Y_f += s.Y_f;
  }
  const double inv = 1.0 / static_cast<double>(sets.size());
  out.U_p *= inv;
  out.Y_p *= inv;
  out.U_f *= inv;
  out.Y_f *= inv;
  return out;
}

DeepcQpBuilder::DeepcQpBuilder(DeepcBlocks blocks, const TrackingSetup& setup,
                               const DeepcOptions& opts)
    : blocks_(std::move(blocks)), opts_(opts) {
  const int N = blocks_.horizon;
  const int m = blocks_.m;
  const int p = blocks_.p;
  const int tini = blocks_.tini;
  setup.validate(m, p);
  if (setup.horizon != N) {
    throw InvalidInputError("DeepcQpBuilder: horizon mismatch");
  }
  if (opts_.lambda_g < 0.0 || opts_.lambda_y < 0.0) {
    throw InvalidInputError("DeepcQpBuilder: negative regularization");
  }
  if (opts_.output_slack && opts_.lambda_y == 0.0) {
    throw InvalidInputError("DeepcQpBuilder: output slack needs lambda_y > 0");
  }

  const Eigen::Index L = blocks_.columns();
  const Eigen::Index ns = opts_.output_slack ? p * tini : 0;
  const Matrix Qbar = kron_identity(N, setup.Q);
  const Matrix Rbar = kron_identity(N, setup.R);
  YfT_Qbar_ = blocks_.Y_f.transpose() * Qbar;

  H_ = Matrix::Zero(L + ns, L + ns);
  {
    // The data cost alone is only weakly convex in g (its null space grows
    // with the column count), and measurement noise turns the flat directions
    // into near-flat ones that let ‖g‖ blow up. A Tikhonov term far below the
    // tracking weights keeps the problem strictly convex without changing
    // which trajectories are preferred.
    const double tikhonov = opts_.lambda_g + kGRidge;
    Matrix Hg = 2.0 * (YfT_Qbar_ * blocks_.Y_f +
                       blocks_.U_f.transpose() * Rbar * blocks_.U_f +
                       tikhonov * Matrix::Identity(L, L));
    H_.topLeftCorner(L, L) = 0.5 * (Hg + Hg.transpose());
    if (ns > 0) {
      H_.bottomRightCorner(ns, ns) =
          2.0 * opts_.lambda_y * Matrix::Identity(ns, ns);
    }
  }

  // Row layout: input history match, output history match, then the boxes.
  Eigen::Index rows = m * tini + p * tini;
  if (setup.input_bounds) rows += m * N;
  if (setup.output_bounds) rows += p * N;
  M_ = Matrix::Zero(rows, L + ns);
  l_.resize(rows);
  u_.resize(rows);
  Eigen::Index at = 0;
  M_.block(at, 0, m * tini, L) = blocks_.U_p;
  at += m * tini;
  M_.block(at, 0, p * tini, L) = blocks_.Y_p;
  if (ns > 0) {
    M_.block(at, L, ns, ns) = -Matrix::Identity(ns, ns);
  }
  at += p * tini;
  if (setup.input_bounds) {
    M_.block(at, 0, m * N, L) = blocks_.U_f;
    l_.segment(at, m * N) = tile(setup.input_bounds->lower, N);
    u_.segment(at, m * N) = tile(setup.input_bounds->upper, N);
    at += m * N;
  }
  if (setup.output_bounds) {
    M_.block(at, 0, p * N, L) = blocks_.Y_f;
    l_.segment(at, p * N) = tile(setup.output_bounds->lower, N);
    u_.segment(at, p * N) = tile(setup.output_bounds->upper, N);
    at += p * N;
  }
}

QpProblem DeepcQpBuilder::build(const Vector& u_ini, const Vector& y_ini,
                                const Vector& rstack) const {
  const int m = blocks_.m;
  const int p = blocks_.p;
  const int tini = blocks_.tini;
  const int N = blocks_.horizon;
  if (u_ini.size() != m * tini || y_ini.size() != p * tini) {
    throw InvalidInputError("DeepcQpBuilder: history size mismatch");
  }
  if (rstack.size() != p * N) {
    throw InvalidInputError("DeepcQpBuilder: reference stack size mismatch");
  }
  QpProblem qp;
  qp.H = H_;
  qp.f = Vector::Zero(H_.rows());
  qp.f.head(blocks_.columns()) = -2.0 * (YfT_Qbar_ * rstack);
  qp.M = M_;
  qp.lower = l_;
  qp.upper = u_;
  qp.lower.segment(0, m * tini) = u_ini;
  qp.upper.segment(0, m * tini) = u_ini;
  qp.lower.segment(m * tini, p * tini) = y_ini;
  qp.upper.segment(m * tini, p * tini) = y_ini;
  return qp;
}

Vector DeepcQpBuilder::stacked_inputs(const Vector& z) const {
  if (z.size() != H_.rows()) {
    throw InvalidInputError("DeepcQpBuilder: solution size mismatch");
  }
  return blocks_.U_f * z.head(blocks_.columns());
}

QpProblem condense_deepc(const DeepcBlocks& blocks, const TrackingSetup& setup,
                         const DeepcOptions& opts, const Vector& u_ini,
                         const Vector& y_ini, const Vector& rstack) {
  return DeepcQpBuilder(blocks, setup, opts).build(u_ini, y_ini, rstack);
}

} // namespace d2pc
