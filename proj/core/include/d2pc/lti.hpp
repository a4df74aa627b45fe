#pragma once

#include <Eigen/Dense>

#include "d2pc/numerics.hpp"
#include "d2pc/rng.hpp"

namespace d2pc {

// Discrete-time LTI plant x(t+1) = A x(t) + B u(t), y(t) = C x(t).
// The identification side of the library never touches A, B, C; only the
// simulator and the model-based reference controller do.
struct LtiSystem {
  Matrix A;  // n x n
  Matrix B;  // n x m
  Matrix C;  // p x n

  [[nodiscard]] Eigen::Index order() const { return A.rows(); }
  [[nodiscard]] Eigen::Index inputs() const { return B.cols(); }
  [[nodiscard]] Eigen::Index outputs() const { return C.rows(); }

  // Throws InvalidInputError on inconsistent shapes or non-finite entries.
  void validate() const;
};

// Measurement noise: i.i.d. uniform on [-amplitude, amplitude], drawn per
// output component per sample. amplitude = 0 disables noise entirely.
struct NoiseSpec {
  double amplitude = 0.0;
};

// Componentwise box, one entry per input or output channel.
struct BoxBounds {
  Vector lower;
  Vector upper;
};

// Reference r(t) for the tracking cost.
struct ReferenceSignal {
  enum class Kind { Step, Constant };

  Kind kind = Kind::Step;
  Vector value;        // p-vector reached after start (Step) or held (Constant)
  int start = 0;       // first step at which a Step reference is active

  [[nodiscard]] Vector at(int t) const {
    if (kind == Kind::Constant || t >= start) return value;
    return Vector::Zero(value.size());
  }

  static ReferenceSignal step(Vector v, int start = 0) {
    return ReferenceSignal{Kind::Step, std::move(v), start};
  }
  static ReferenceSignal constant(Vector v) {
    return ReferenceSignal{Kind::Constant, std::move(v), 0};
  }
};

// One recorded experiment. Columns are samples; the first `initial_offset`
// columns are the warm-up samples that regressors with memory reach back
// into, so column j holds time j - initial_offset.
struct EpisodeData {
  Matrix inputs;           // m x (initial_offset + T)
  Matrix outputs;          // p x (initial_offset + T)
  int initial_offset = 0;

  // Number of samples at time >= 0.
  [[nodiscard]] Eigen::Index data_length() const {
    return inputs.cols() - initial_offset;
  }
};

// Simulates the plant from x0 under the given input sequence (one column per
// sample) and returns the measured outputs y(t) = C x(t) + noise. States stay
// internal; callers needing them should step the plant themselves.
[[nodiscard]] Matrix simulate(const LtiSystem& sys, const Matrix& u,
                              const Vector& x0, const NoiseSpec& noise,
                              Rng& rng);

// Runs one open-loop experiment from x(-nbar) = 0 with inputs drawn i.i.d.
// uniform on [-amplitude, amplitude]. The input covers nbar warm-up samples
// plus T regular ones and is re-drawn (at most 10 times, then
// ExcitationError) until it is persistently exciting of order 2*nbar + 1,
// capped at the deepest order a sequence of that length can certify.
[[nodiscard]] EpisodeData collect_episode(const LtiSystem& sys, int T, int nbar,
                                          double amplitude,
                                          const NoiseSpec& noise, Rng& rng);

} // namespace d2pc
