#pragma once

#include <Eigen/Dense>
#include <limits>
#include <vector>

#include "d2pc/errors.hpp"

namespace d2pc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Outcome of a numeric rank decision, kept around so callers can report why a
// matrix was judged rank deficient.
struct RankReport {
  Eigen::Index numeric_rank = 0;
  Vector singular_values;   // descending
  double tolerance = 0.0;   // absolute cutoff applied to the singular values
};

// Singular values at or below rel_tol * sigma_max * max(rows, cols) count as
// zero. With rel_tol at machine epsilon this is the usual dense-rank cutoff.
// Anything looser is dangerous here: data collected from an unstable plant
// spans ten-plus decades, and the directions that carry the input rows sit
// far below sigma_max while still being perfectly real.
inline constexpr double kDefaultRankRelTol =
    std::numeric_limits<double>::epsilon();

// Moore-Penrose pseudoinverse via SVD with truncation of small singular
// values. Works for any shape, including rank-deficient and zero matrices.
// Throws InvalidInputError on empty or non-finite input.
[[nodiscard]] Matrix pinv(const Matrix& m, double rel_tol = kDefaultRankRelTol);

// Numeric rank under the same truncation rule as pinv.
[[nodiscard]] RankReport numeric_rank(const Matrix& m,
                                      double rel_tol = kDefaultRankRelTol);

// Block Hankel matrix of depth L for a sequence u(0..T-1) of m-vectors,
// supplied as the columns of u. Result is (m*L) x (T-L+1); block (i, j)
// equals u(i + j). Throws InsufficientDataError when T < L.
[[nodiscard]] Matrix hankel(const Matrix& u, int depth);

// Persistency of excitation of order L: the depth-L block Hankel matrix has
// full row rank. Short signals (T < L, where the Hankel matrix does not
// exist) report false instead of throwing. The report carries the singular
// values that the decision was based on.
[[nodiscard]] bool is_persistently_exciting(const Matrix& u, int order,
                                            RankReport* report = nullptr,
                                            double rel_tol = kDefaultRankRelTol);

// Throws InvalidInputError when m has a NaN or infinity. `what` names the
// offending argument in the message.
void require_finite(const Matrix& m, const char* what);

} // namespace d2pc
