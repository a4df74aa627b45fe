#include "doctest.h"

#include <cmath>
#include <sstream>

#include "d2pc/qp.hpp"
#include "oracles.hpp"

using d2pc::Matrix;
using d2pc::QpProblem;
using d2pc::QpSettings;
using d2pc::QpStatus;
using d2pc::Vector;

namespace {

QpProblem scalar_problem(double lo, double hi) {
  // min (z - 1)^2  =  min 0.5 z' (2) z + (-2) z  (+ constant)
  QpProblem p;
  p.H = Matrix::Constant(1, 1, 2.0);
  p.f = Vector::Constant(1, -2.0);
  p.M = Matrix::Identity(1, 1);
  p.lower = Vector::Constant(1, lo);
  p.upper = Vector::Constant(1, hi);
  return p;
}

} // namespace

TEST_CASE("interior optimum of a scalar box problem") {
  const auto sol = d2pc::solve(scalar_problem(-2.0, 2.0));
  REQUIRE(sol.status == QpStatus::Solved);
  CHECK(sol.z(0) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("active bound of a scalar box problem") {
  const auto sol = d2pc::solve(scalar_problem(0.0, 0.5));
  REQUIRE(sol.status == QpStatus::Solved);
  CHECK(sol.z(0) == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("equality rows hold exactly at the solution") {
  QpProblem p;
  p.H = Matrix::Identity(2, 2);
  p.f = Vector::Zero(2);
  p.M = Matrix{{1.0, 1.0}};
  p.lower = Vector::Constant(1, 1.0);
  p.upper = Vector::Constant(1, 1.0);
  const auto sol = d2pc::solve(p);
  REQUIRE(sol.status == QpStatus::Solved);
  CHECK(sol.z(0) == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(sol.z(1) == doctest::Approx(0.5).epsilon(1e-7));
}

TEST_CASE("unconstrained problems reduce to a linear solve") {
  d2pc::Rng rng(11);
  const QpProblem p = testkit::random_qp(rng, 3);
  REQUIRE(p.constraints() == 0);
  const auto sol = d2pc::solve(p);
  REQUIRE(sol.status == QpStatus::Solved);
  const Vector direct = p.H.llt().solve(-p.f);
  CHECK((sol.z - direct).cwiseAbs().maxCoeff() <
        1e-8 * (1.0 + direct.cwiseAbs().maxCoeff()));
}

TEST_CASE("random battery matches the projected-gradient oracle") {
  d2pc::Rng rng(2024);
  for (int k = 0; k < 40; ++k) {
    CAPTURE(k);
    const QpProblem p = testkit::random_qp(rng, k);
    const auto sol = d2pc::solve(p);
    REQUIRE(sol.status == QpStatus::Solved);

    const auto oracle = testkit::pg_solve(p);
    REQUIRE(oracle.converged);
    const double obj = testkit::qp_objective(p, sol.z);
    CHECK(std::abs(obj - oracle.objective) <=
          1e-5 * (1.0 + std::abs(oracle.objective)));

    const auto kkt = testkit::kkt_residuals(p, sol.z, sol.y);
    CHECK(kkt.feasibility <= 1e-5);
    CHECK(kkt.stationarity <= 1e-5);
  }
}

TEST_CASE("solved status reports residuals below tolerance") {
  d2pc::Rng rng(77);
  const QpProblem p = testkit::random_qp(rng, 1);
  QpSettings s;
  const auto sol = d2pc::solve(p, s);
  REQUIRE(sol.status == QpStatus::Solved);
  CHECK(sol.primal_residual <= s.eps_primal);
  CHECK(sol.dual_residual <= s.eps_dual);
}

TEST_CASE("solver output is deterministic") {
  d2pc::Rng rng(88);
  const QpProblem p = testkit::random_qp(rng, 2);
  const auto a = d2pc::solve(p);
  const auto b = d2pc::solve(p);
  CHECK(a.z == b.z);
  CHECK(a.iterations == b.iterations);
  CHECK(a.status == b.status);
}

TEST_CASE("uniform scaling of the objective leaves the minimizer in place") {
  d2pc::Rng rng(99);
  QpProblem p = testkit::random_qp(rng, 0);
  const auto base = d2pc::solve(p);
  REQUIRE(base.status == QpStatus::Solved);
  QpProblem scaled = p;
  scaled.H *= 250.0;
  scaled.f *= 250.0;
  const auto sol = d2pc::solve(scaled);
  REQUIRE(sol.status == QpStatus::Solved);
  CHECK((sol.z - base.z).cwiseAbs().maxCoeff() <=
        1e-6 * (1.0 + base.z.cwiseAbs().maxCoeff()));
}

TEST_CASE("tiny iteration budgets end in max-iterations, not nonsense") {
  d2pc::Rng rng(111);
  const QpProblem p = testkit::random_qp(rng, 1);
  QpSettings s;
  s.max_iterations = 2;
  s.polish = false;
  const auto sol = d2pc::solve(p, s);
  CHECK(sol.status == QpStatus::MaxIterations);
  CHECK(sol.z.allFinite());
  CHECK(sol.iterations <= 2);
}

TEST_CASE("an infeasible pair of rows yields failure status, not a throw") {
  QpProblem p;
  p.H = Matrix::Identity(1, 1);
  p.f = Vector::Zero(1);
  p.M = Matrix{{1.0}, {1.0}};
  p.lower = Vector{{-testkit::kInf, 1.0}};
  p.upper = Vector{{0.0, testkit::kInf}};
  const auto sol = d2pc::solve(p);
  CHECK(sol.status != QpStatus::Solved);
}

TEST_CASE("warm starting from the solution converges immediately") {
  d2pc::Rng rng(123);
  const QpProblem p = testkit::random_qp(rng, 0);
  const auto cold = d2pc::solve(p);
  REQUIRE(cold.status == QpStatus::Solved);
  QpSettings s;
  s.warm_start = true;
  s.z0 = cold.z;
  s.y0 = cold.y;
  const auto warm = d2pc::solve(p, s);
  REQUIRE(warm.status == QpStatus::Solved);
  CHECK(warm.iterations <= cold.iterations);
}

TEST_CASE("problem validation rejects malformed data") {
  QpProblem p = scalar_problem(-1.0, 1.0);
  CHECK_NOTHROW(p.validate());

  QpProblem asym = p;
  asym.H = Matrix{{1.0, 2.0}, {0.0, 1.0}};
  asym.f = Vector::Zero(2);
  asym.M = Matrix::Identity(2, 2);
  asym.lower = Vector::Constant(2, -1.0);
  asym.upper = Vector::Constant(2, 1.0);
  CHECK_THROWS_AS(asym.validate(), d2pc::InvalidInputError);

  QpProblem crossed = p;
  crossed.lower(0) = 2.0;
  CHECK_THROWS_AS(crossed.validate(), d2pc::InvalidInputError);

  QpProblem nan_bound = p;
  nan_bound.f(0) = std::nan("");
  CHECK_THROWS_AS((void)d2pc::solve(nan_bound), d2pc::InvalidInputError);
}

TEST_CASE("indefinite quadratics are rejected up front") {
  QpProblem p;
  p.H = Matrix{{1.0, 0.0}, {0.0, -1.0}};
  p.f = Vector::Zero(2);
  p.M = Matrix::Identity(2, 2);
  p.lower = Vector::Constant(2, -1.0);
  p.upper = Vector::Constant(2, 1.0);
  CHECK_THROWS_AS((void)d2pc::solve(p), d2pc::InvalidInputError);
}

TEST_CASE("singular-but-semidefinite quadratics are accepted") {
  // Flat direction pinned by the constraints.
  QpProblem p;
  p.H = Matrix{{2.0, 0.0}, {0.0, 0.0}};
  p.f = Vector{{-2.0, 0.0}};
  p.M = Matrix::Identity(2, 2);
  p.lower = Vector{{-5.0, 0.25}};
  p.upper = Vector{{5.0, 0.25}};
  const auto sol = d2pc::solve(p);
  REQUIRE(sol.status == QpStatus::Solved);
  CHECK(sol.z(0) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(sol.z(1) == doctest::Approx(0.25).epsilon(1e-7));
}

TEST_CASE("problem dump is a readable full-precision listing") {
  const QpProblem p = scalar_problem(-1.0, 1.0);
  std::ostringstream os;
  d2pc::dump(p, os);
  const std::string text = os.str();
  CHECK(text.find("H") != std::string::npos);
  CHECK(text.find("2") != std::string::npos);
}
