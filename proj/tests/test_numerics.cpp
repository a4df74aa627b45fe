#include "doctest.h"

#include <cmath>

#include "d2pc/numerics.hpp"
#include "oracles.hpp"

using d2pc::Matrix;
using d2pc::Vector;

namespace {

double penrose_error(const Matrix& J, const Matrix& Jp) {
  const double e1 = (J * Jp * J - J).norm();
  const double e2 = (Jp * J * Jp - Jp).norm();
  const Matrix JJp = J * Jp;
  const Matrix JpJ = Jp * J;
  const double e3 = (JJp - JJp.transpose()).norm();
  const double e4 = (JpJ - JpJ.transpose()).norm();
  return std::max(std::max(e1, e2), std::max(e3, e4));
}

} // namespace

TEST_CASE("pinv of the identity is the identity") {
  const Matrix I = Matrix::Identity(3, 3);
  CHECK((d2pc::pinv(I) - I).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("pinv inverts the nonzero part of a singular diagonal") {
  Matrix D = Matrix::Zero(2, 2);
  D(0, 0) = 2.0;
  const Matrix Dp = d2pc::pinv(D);
  CHECK(Dp(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(std::abs(Dp(0, 1)) < 1e-14);
  CHECK(std::abs(Dp(1, 0)) < 1e-14);
  CHECK(std::abs(Dp(1, 1)) < 1e-14);
}

TEST_CASE("pinv of a full-row-rank matrix matches the normal equations") {
  d2pc::Rng rng(101);
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix J = testkit::random_matrix(rng, 3, 5);
    REQUIRE(d2pc::numeric_rank(J).numeric_rank == 3);
    const Matrix diff = d2pc::pinv(J) - testkit::right_pinv(J);
    CHECK(diff.cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("pinv satisfies the four Penrose conditions on random shapes") {
  d2pc::Rng rng(202);
  const int shapes[][2] = {{1, 1},  {2, 7},  {7, 2},   {10, 10},
                           {20, 3}, {35, 80}, {50, 100}};
  for (const auto& s : shapes) {
    const Matrix J = testkit::random_matrix(rng, s[0], s[1]);
    const Matrix Jp = d2pc::pinv(J);
    CHECK(penrose_error(J, Jp) <= 1e-8 * (1.0 + J.norm()));
  }
}

TEST_CASE("pinv handles rank-deficient rectangles") {
  d2pc::Rng rng(303);
  // Rank-2 matrix embedded in 6 x 9.
  const Matrix L = testkit::random_matrix(rng, 6, 2);
  const Matrix R = testkit::random_matrix(rng, 2, 9);
  const Matrix J = L * R;
  const Matrix Jp = d2pc::pinv(J);
  CHECK(penrose_error(J, Jp) <= 1e-8 * (1.0 + J.norm()));
  CHECK(d2pc::numeric_rank(J).numeric_rank == 2);
}

TEST_CASE("pinv of the zero and empty-rank cases") {
  const Matrix Z = Matrix::Zero(3, 4);
  const Matrix Zp = d2pc::pinv(Z);
  CHECK(Zp.rows() == 4);
  CHECK(Zp.cols() == 3);
  CHECK(Zp.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("pinv rejects empty and non-finite input") {
  CHECK_THROWS_AS((void)d2pc::pinv(Matrix()), d2pc::InvalidInputError);
  Matrix bad = Matrix::Ones(2, 2);
  bad(1, 1) = std::nan("");
  CHECK_THROWS_AS((void)d2pc::pinv(bad), d2pc::InvalidInputError);
}

TEST_CASE("hankel lays out a scalar signal by the definition") {
  Matrix u(1, 4);
  u << 1, 2, 3, 4;
  const Matrix H = d2pc::hankel(u, 2);
  Matrix expect(2, 3);
  expect << 1, 2, 3, 2, 3, 4;
  CHECK(H == expect);
}

TEST_CASE("hankel of a constant signal has rank one") {
  const Matrix u = Matrix::Constant(1, 3, 5.0);
  const Matrix H = d2pc::hankel(u, 2);
  CHECK(H == Matrix::Constant(2, 2, 5.0));
  CHECK(d2pc::numeric_rank(H).numeric_rank == 1);
}

TEST_CASE("hankel stacks vector samples blockwise") {
  Matrix u(2, 3);
  u << 1, 0, 1, 0, 1, 1;
  const Matrix H = d2pc::hankel(u, 2);
  Matrix expect(4, 2);
  expect << 1, 0, 0, 1, 0, 1, 1, 1;
  CHECK(H == expect);
}

TEST_CASE("hankel dimensions are (m depth) x (T - depth + 1)") {
  d2pc::Rng rng(404);
  for (const int m : {1, 2, 3}) {
    for (const int T : {5, 9, 14}) {
      for (const int depth : {1, 2, 5}) {
        const Matrix u = testkit::random_matrix(rng, m, T);
        const Matrix H = d2pc::hankel(u, depth);
        CHECK(H.rows() == m * depth);
        CHECK(H.cols() == T - depth + 1);
      }
    }
  }
}

TEST_CASE("hankel rejects signals shorter than the depth") {
  const Matrix u = Matrix::Ones(1, 3);
  CHECK_THROWS_AS((void)d2pc::hankel(u, 4), d2pc::InsufficientDataError);
}

TEST_CASE("excitation fails below the necessary length") {
  d2pc::Rng rng(505);
  // For a scalar signal of order L the Hankel matrix needs at least L
  // columns, so T = 2L - 2 can never be exciting.
  for (const int L : {2, 3, 5}) {
    const Matrix u = testkit::random_matrix(rng, 1, 2 * L - 2);
    CHECK_FALSE(d2pc::is_persistently_exciting(u, L));
  }
}

TEST_CASE("excitation of a hand-checked binary signal") {
  Matrix u(1, 7);
  u << 1, 0, 0, 1, 1, 0, 1;
  d2pc::RankReport rep;
  CHECK(d2pc::is_persistently_exciting(u, 2, &rep));
  CHECK(rep.numeric_rank == 2);
}

TEST_CASE("constant signals are never exciting beyond order one") {
  const Matrix u = Matrix::Constant(1, 10, 3.0);
  CHECK(d2pc::is_persistently_exciting(u, 1));
  CHECK_FALSE(d2pc::is_persistently_exciting(u, 2));
}

TEST_CASE("excitation is monotone in the order") {
  d2pc::Rng rng(606);
  for (int rep = 0; rep < 10; ++rep) {
    const int m = 1 + static_cast<int>(rng.uniform(0.0, 2.0));
    const Matrix u = testkit::random_matrix(rng, m, 25);
    int highest = 0;
    for (int L = 1; L <= 8; ++L) {
      if (d2pc::is_persistently_exciting(u, L)) highest = L;
    }
    for (int L = 1; L <= highest; ++L) {
      CHECK(d2pc::is_persistently_exciting(u, L));
    }
  }
}

TEST_CASE("numeric_rank on stock matrices") {
  CHECK(d2pc::numeric_rank(Matrix::Zero(2, 2)).numeric_rank == 0);
  CHECK(d2pc::numeric_rank(Matrix::Identity(4, 4)).numeric_rank == 4);

  d2pc::Rng rng(707);
  const Vector a = testkit::random_vector(rng, 6);
  const Vector b = testkit::random_vector(rng, 4);
  CHECK(d2pc::numeric_rank(a * b.transpose()).numeric_rank == 1);
}

TEST_CASE("numeric_rank report is internally consistent") {
  d2pc::Rng rng(808);
  const Matrix M = testkit::random_matrix(rng, 5, 8);
  const d2pc::RankReport rep = d2pc::numeric_rank(M);
  REQUIRE(rep.singular_values.size() == 5);
  for (Eigen::Index i = 1; i < rep.singular_values.size(); ++i) {
    CHECK(rep.singular_values(i) <= rep.singular_values(i - 1));
  }
  Eigen::Index above = 0;
  for (Eigen::Index i = 0; i < rep.singular_values.size(); ++i) {
    if (rep.singular_values(i) > rep.tolerance) ++above;
  }
  CHECK(rep.numeric_rank == above);
}

TEST_CASE("rank of M pinv(M) equals rank of M") {
  d2pc::Rng rng(909);
  for (int rep = 0; rep < 8; ++rep) {
    const int r = 1 + static_cast<int>(rng.uniform(0.0, 4.0));
    const Matrix L = testkit::random_matrix(rng, 7, r);
    const Matrix R = testkit::random_matrix(rng, r, 9);
    const Matrix M = L * R;
    const Matrix P = M * d2pc::pinv(M);
    CHECK(d2pc::numeric_rank(P).numeric_rank ==
          d2pc::numeric_rank(M).numeric_rank);
  }
}

TEST_CASE("require_finite flags NaN and infinity") {
  Matrix ok = Matrix::Ones(2, 2);
  CHECK_NOTHROW(d2pc::require_finite(ok, "ok"));
  ok(0, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(d2pc::require_finite(ok, "bad"), d2pc::InvalidInputError);
}
