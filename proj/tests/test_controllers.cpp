#include "doctest.h"

#include <cmath>

#include "d2pc/benchmark_systems.hpp"
#include "d2pc/controllers.hpp"
#include "oracles.hpp"

using d2pc::Matrix;
using d2pc::Vector;

namespace {

d2pc::ControllerSetup setup_for(const d2pc::BenchmarkConfig& b) {
  d2pc::ControllerSetup s;
  s.tracking.horizon = b.horizon;
  s.tracking.Q = b.Q;
  s.tracking.R = b.R;
  s.tracking.input_bounds = b.input_bounds;
  s.tracking.output_bounds = b.output_bounds;
  s.reference = b.reference;
  return s;
}

std::function<Vector(int)> no_noise(Eigen::Index p) {
  return [p](int) { return Vector::Zero(p); };
}

d2pc::DataDrivenModel identified_model(const d2pc::BenchmarkConfig& b,
                                       int nbar, std::uint64_t seed) {
  d2pc::Rng rng(seed);
  const auto ep = d2pc::collect_episode(b.sys, b.d2pc_data_length(nbar), nbar,
                                        1.0, d2pc::NoiseSpec{}, rng);
  return d2pc::identify({ep}, nbar);
}

} // namespace

TEST_CASE("model-based controller keeps the origin at rest") {
  const auto& b = d2pc::benchmark("inverted_pendulum");
  auto setup = setup_for(b);
  setup.reference = d2pc::ReferenceSignal::constant(Vector::Zero(1));
  auto ctrl = d2pc::make_mpc_controller(b.sys, setup);
  const auto traj = d2pc::run_closed_loop(b.sys, *ctrl, setup.reference, 15,
                                          no_noise(1));
  CHECK_FALSE(traj.failed);
  CHECK(traj.inputs.cwiseAbs().maxCoeff() < 1e-6);
  CHECK(traj.outputs_true.cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("model-based pendulum tracking settles on the step") {
  const auto& b = d2pc::benchmark("inverted_pendulum");
  const auto setup = setup_for(b);
  auto ctrl = d2pc::make_mpc_controller(b.sys, setup);
  const auto traj = d2pc::run_closed_loop(b.sys, *ctrl, setup.reference, 80,
                                          no_noise(1));
  REQUIRE_FALSE(traj.failed);
  CHECK(std::abs(traj.outputs_true(0, 79) - 1.0) < 0.01);
  CHECK(traj.inputs.maxCoeff() <= 20.0 + 1e-6);
  CHECK(traj.inputs.minCoeff() >= -20.0 - 1e-6);
}

TEST_CASE("regressor controller keeps the origin at rest") {
  const auto& b = d2pc::benchmark("two_mass");
  const auto model = identified_model(b, 6, 31);
  auto setup = setup_for(b);
  setup.reference = d2pc::ReferenceSignal::constant(Vector::Zero(1));
  auto ctrl = d2pc::make_d2pc_controller(model, setup);
  const auto traj = d2pc::run_closed_loop(b.sys, *ctrl, setup.reference, 12,
                                          no_noise(1));
  CHECK_FALSE(traj.failed);
  CHECK(traj.inputs.cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("regressor controller follows the exact-state controller") {
  const auto& b = d2pc::benchmark("two_mass");
  const auto model = identified_model(b, 20, 77);
  const auto setup = setup_for(b);

  auto mpc = d2pc::make_mpc_controller(b.sys, setup);
  const auto nominal = d2pc::run_closed_loop(b.sys, *mpc, setup.reference, 300,
                                             no_noise(1));
  REQUIRE_FALSE(nominal.failed);

  auto ddc = d2pc::make_d2pc_controller(model, setup);
  const auto traj = d2pc::run_closed_loop(b.sys, *ddc, setup.reference, 300,
                                          no_noise(1));
  REQUIRE_FALSE(traj.failed);

  CHECK((traj.outputs_true - nominal.outputs_true).cwiseAbs().maxCoeff() <
        0.01);
  CHECK((traj.inputs - nominal.inputs).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("hankel controller tracks the two-mass step from exact data") {
  const auto& b = d2pc::benchmark("two_mass");
  d2pc::Rng rng(41);
  const auto ep = d2pc::collect_episode(b.sys, 100, 4, 1.0, d2pc::NoiseSpec{},
                                        rng);
  const auto blocks = d2pc::build_deepc_blocks({ep}, 4, b.horizon);
  const auto setup = setup_for(b);

  auto mpc = d2pc::make_mpc_controller(b.sys, setup);
  const auto nominal = d2pc::run_closed_loop(b.sys, *mpc, setup.reference, 120,
                                             no_noise(1));
  auto ctrl = d2pc::make_deepc_controller(blocks, d2pc::DeepcOptions{}, setup);
  const auto traj = d2pc::run_closed_loop(b.sys, *ctrl, setup.reference, 120,
                                          no_noise(1));
  REQUIRE_FALSE(traj.failed);
  const double mae =
      (traj.outputs_true - nominal.outputs_true).cwiseAbs().rowwise().sum()
          .sum() / 120.0;
  CHECK(mae < 0.001);
}

TEST_CASE("inputs stay inside the box for every controller") {
  const auto& b = d2pc::benchmark("two_mass");
  const auto setup = setup_for(b);
  const auto model = identified_model(b, 10, 5);

  auto mpc = d2pc::make_mpc_controller(b.sys, setup);
  auto ddc = d2pc::make_d2pc_controller(model, setup);
  for (d2pc::Controller* c : {mpc.get(), ddc.get()}) {
    const auto traj = d2pc::run_closed_loop(b.sys, *c, setup.reference, 60,
                                            no_noise(1));
    REQUIRE_FALSE(traj.failed);
    CHECK(traj.inputs.maxCoeff() <= 2.0 + 1e-6);
    CHECK(traj.inputs.minCoeff() >= -2.0 - 1e-6);
  }
}

TEST_CASE("closed loops are deterministic under a fixed noise stream") {
  const auto& b = d2pc::benchmark("two_mass");
  const auto setup = setup_for(b);
  const auto model = identified_model(b, 8, 13);
  const d2pc::NoiseSpec noise{1e-2};

  auto run = [&]() {
    auto ctrl = d2pc::make_d2pc_controller(model, setup);
    d2pc::Rng rng(555);
    return d2pc::run_closed_loop(b.sys, *ctrl, setup.reference, 40, noise,
                                 rng);
  };
  const auto a = run();
  const auto c = run();
  CHECK(a.inputs == c.inputs);
  CHECK(a.outputs_measured == c.outputs_measured);
}

TEST_CASE("inputs cannot depend on future measurements") {
  const auto& b = d2pc::benchmark("two_mass");
  const auto setup = setup_for(b);
  const auto model = identified_model(b, 8, 17);
  const int flip_at = 25;

  auto run = [&](double late_amp) {
    auto ctrl = d2pc::make_d2pc_controller(model, setup);
    auto noise = [&, late_amp](int t) {
      return Vector::Constant(1, t >= flip_at ? late_amp : 1e-3);
    };
    return d2pc::run_closed_loop(b.sys, *ctrl, setup.reference, 40, noise);
  };
  const auto a = run(0.05);
  const auto c = run(-0.05);
  // u(t) is decided before y(t) is observed, so the divergence caused by
  // noise at flip_at can surface in the inputs only after flip_at.
  CHECK(a.inputs.leftCols(flip_at + 1) == c.inputs.leftCols(flip_at + 1));
  CHECK((a.inputs.rightCols(40 - flip_at - 1) -
         c.inputs.rightCols(40 - flip_at - 1))
            .cwiseAbs()
            .maxCoeff() > 0.0);
}

TEST_CASE("warm-up steps run on zero-padded history without error") {
  const auto& b = d2pc::benchmark("two_mass");
  const auto setup = setup_for(b);
  const auto model = identified_model(b, 20, 19);
  auto ctrl = d2pc::make_d2pc_controller(model, setup);
  // Fewer steps than the regressor memory: every decision uses padding.
  const auto traj = d2pc::run_closed_loop(b.sys, *ctrl, setup.reference, 10,
                                          no_noise(1));
  CHECK_FALSE(traj.failed);
  CHECK(traj.steps_completed == 10);
}

TEST_CASE("a strangled solver budget marks the trial failed") {
  const auto& b = d2pc::benchmark("two_mass");
  auto setup = setup_for(b);
  setup.qp.max_iterations = 1;
  setup.qp.polish = false;
  const auto model = identified_model(b, 6, 23);
  auto ctrl = d2pc::make_d2pc_controller(model, setup);
  const auto traj = d2pc::run_closed_loop(b.sys, *ctrl, setup.reference, 20,
                                          no_noise(1));
  CHECK(traj.failed);
  CHECK(traj.failure_step >= 0);
  CHECK(traj.steps_completed == traj.failure_step + 1);
  CHECK(traj.status[static_cast<std::size_t>(traj.failure_step)] !=
        d2pc::QpStatus::Solved);
}

TEST_CASE("trajectory records carry reference and both output streams") {
  const auto& b = d2pc::benchmark("two_mass");
  const auto setup = setup_for(b);
  auto ctrl = d2pc::make_mpc_controller(b.sys, setup);
  d2pc::Rng rng(777);
  const auto traj = d2pc::run_closed_loop(b.sys, *ctrl, setup.reference, 30,
                                          d2pc::NoiseSpec{0.01}, rng);
  REQUIRE_FALSE(traj.failed);
  CHECK(traj.reference.cols() == 30);
  CHECK(traj.reference(0, 5) == 1.0);
  const Matrix diff = traj.outputs_measured - traj.outputs_true;
  CHECK(diff.cwiseAbs().maxCoeff() <= 0.01);
  CHECK(diff.cwiseAbs().maxCoeff() > 0.0);
}
