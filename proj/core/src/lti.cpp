#include "d2pc/lti.hpp"

#include <algorithm>
#include <string>

namespace d2pc {

void LtiSystem::validate() const {
  if (A.rows() == 0 || A.rows() != A.cols()) {
    throw InvalidInputError("LtiSystem: A must be square and non-empty");
  }
  if (B.rows() != A.rows() || B.cols() == 0) {
    throw InvalidInputError("LtiSystem: B must be n x m with m >= 1");
  }
  if (C.cols() != A.rows() || C.rows() == 0) {
    throw InvalidInputError("LtiSystem: C must be p x n with p >= 1");
  }
  require_finite(A, "LtiSystem: A");
  require_finite(B, "LtiSystem: B");
  require_finite(C, "LtiSystem: C");
}

Matrix simulate(const LtiSystem& sys, const Matrix& u, const Vector& x0,
                const NoiseSpec& noise, Rng& rng) {
  sys.validate();
  if (u.rows() != sys.inputs()) {
    throw InvalidInputError("simulate: input rows " + std::to_string(u.rows()) +
                            " do not match plant inputs " +
                            std::to_string(sys.inputs()));
  }
  if (x0.size() != sys.order()) {
    throw InvalidInputError("simulate: x0 size does not match plant order");
  }
  require_finite(u, "simulate: inputs");
  require_finite(x0, "simulate: x0");
  if (noise.amplitude < 0.0) {
    throw InvalidInputError("simulate: negative noise amplitude");
  }

  const Eigen::Index T = u.cols();
  const Eigen::Index p = sys.outputs();
  Matrix y(p, T);
  Vector x = x0;
  for (Eigen::Index t = 0; t < T; ++t) {
    y.col(t) = sys.C * x;
    if (noise.amplitude > 0.0) {
      for (Eigen::Index i = 0; i < p; ++i) {
        y(i, t) += rng.uniform(-noise.amplitude, noise.amplitude);
      }
    }
    x = sys.A * x + sys.B * u.col(t);
  }
  return y;
}

EpisodeData collect_episode(const LtiSystem& sys, int T, int nbar,
                            double amplitude, const NoiseSpec& noise,
                            Rng& rng) {
  sys.validate();
  if (nbar < 0) throw InvalidInputError("collect_episode: negative nbar");
  if (T < 1) {
    throw InsufficientDataError("collect_episode: T must be >= 1");
  }
  if (amplitude <= 0.0) {
    throw InvalidInputError("collect_episode: amplitude must be positive");
  }

  const Eigen::Index m = sys.inputs();
  const Eigen::Index len = nbar + T;
  // Excitation of order 2*nbar + 1 is what the regression ultimately leans
  // on, but a short episode cannot certify that deep a Hankel; ask for the
  // deepest order its length supports instead of failing.
  const int max_order = static_cast<int>((len + 1) / (1 + m));
  const int pe_order = std::max(1, std::min(2 * nbar + 1, max_order));
  constexpr int kMaxAttempts = 10;

  Matrix u(m, len);
  bool exciting = false;
  for (int attempt = 0; attempt < kMaxAttempts && !exciting; ++attempt) {
    for (Eigen::Index t = 0; t < len; ++t) {
      for (Eigen::Index i = 0; i < m; ++i) {
        u(i, t) = rng.uniform(-amplitude, amplitude);
      }
    }
    exciting = is_persistently_exciting(u, pe_order);
  }
  if (!exciting) {
    throw ExcitationError(
        "collect_episode: failed to draw an input of excitation order " +
        std::to_string(pe_order) + " in " + std::to_string(kMaxAttempts) +
        " attempts");
  }

  EpisodeData ep;
  ep.inputs = u;
  ep.outputs = simulate(sys, u, Vector::Zero(sys.order()), noise, rng);
  ep.initial_offset = nbar;
  return ep;
}

} // namespace d2pc
