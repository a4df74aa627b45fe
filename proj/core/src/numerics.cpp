#include "d2pc/numerics.hpp"

#include <Eigen/SVD>
#include <string>

namespace d2pc {

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw InvalidInputError(std::string(what) + " contains a non-finite entry");
  }
}

namespace {

// BDCSVD degrades to JacobiSVD internally for small sizes; use it throughout
// so large data matrices (hundreds of columns) stay cheap.
Eigen::BDCSVD<Matrix> svd_of(const Matrix& m, unsigned options) {
  return Eigen::BDCSVD<Matrix>(m, options);
}

double rank_cutoff(const Vector& sv, Eigen::Index rows, Eigen::Index cols,
                   double rel_tol) {
  const double sigma_max = sv.size() > 0 ? sv(0) : 0.0;
  return rel_tol * sigma_max * static_cast<double>(std::max(rows, cols));
}

} // namespace

Matrix pinv(const Matrix& m, double rel_tol) {
  if (m.size() == 0) throw InvalidInputError("pinv: empty matrix");
  require_finite(m, "pinv: matrix");
  const auto svd = svd_of(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const double cutoff = rank_cutoff(sv, m.rows(), m.cols(), rel_tol);
  Vector inv_sv = Vector::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) inv_sv(i) = 1.0 / sv(i);
  }
  return svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose();
}

RankReport numeric_rank(const Matrix& m, double rel_tol) {
  if (m.size() == 0) throw InvalidInputError("numeric_rank: empty matrix");
  require_finite(m, "numeric_rank: matrix");
  const auto svd = svd_of(m, 0);
  RankReport report;
  report.singular_values = svd.singularValues();
  report.tolerance =
      rank_cutoff(report.singular_values, m.rows(), m.cols(), rel_tol);
  report.numeric_rank =
      (report.singular_values.array() > report.tolerance).count();
  return report;
}

Matrix hankel(const Matrix& u, int depth) {
  if (u.size() == 0) throw InvalidInputError("hankel: empty signal");
  if (depth < 1) throw InvalidInputError("hankel: depth must be positive");
  require_finite(u, "hankel: signal");
  const Eigen::Index m = u.rows();
  const Eigen::Index T = u.cols();
  if (T < depth) {
    throw InsufficientDataError("hankel: signal length " + std::to_string(T) +
                                " below depth " + std::to_string(depth));
  }
  const Eigen::Index ncols = T - depth + 1;
  Matrix h(m * depth, ncols);
  for (Eigen::Index i = 0; i < depth; ++i) {
    h.middleRows(i * m, m) = u.middleCols(i, ncols);
  }
  return h;
}

bool is_persistently_exciting(const Matrix& u, int order, RankReport* report,
                              double rel_tol) {
  if (u.size() == 0) throw InvalidInputError("is_persistently_exciting: empty signal");
  if (order < 1) throw InvalidInputError("is_persistently_exciting: order must be positive");
  require_finite(u, "is_persistently_exciting: signal");
  if (u.cols() < order) {
    // Hankel matrix of this depth does not exist; cannot be exciting.
    if (report) *report = RankReport{};
    return false;
  }
  const RankReport r = numeric_rank(hankel(u, order), rel_tol);
  const bool full = r.numeric_rank == u.rows() * order;
  if (report) *report = r;
  return full;
}

} // namespace d2pc
