#include "doctest.h"

#include <sstream>

#include "d2pc/benchmark_systems.hpp"
#include "d2pc/errors.hpp"
#include "d2pc/io.hpp"

using d2pc::Matrix;
using d2pc::Vector;

namespace {

d2pc::EpisodeData sample_episode(std::uint64_t seed) {
  d2pc::Rng rng(seed);
  const auto& b = d2pc::benchmark("two_mass");
  return d2pc::collect_episode(b.sys, 40, 5, 1.0, d2pc::NoiseSpec{1e-2}, rng);
}

} // namespace

TEST_CASE("episode csv round-trips bit-exactly") {
  const auto ep = sample_episode(2024);
  std::stringstream buf;
  d2pc::write_episode_csv(ep, buf);
  const auto back = d2pc::read_episode_csv(buf);
  CHECK(back.inputs == ep.inputs);
  CHECK(back.outputs == ep.outputs);
  CHECK(back.initial_offset == ep.initial_offset);
}

TEST_CASE("episode csv keeps warm-up rows at negative times") {
  const auto ep = sample_episode(7);
  std::stringstream buf;
  d2pc::write_episode_csv(ep, buf);
  std::string first_data_line;
  std::getline(buf, first_data_line);  // metadata comment
  std::getline(buf, first_data_line);  // column header
  std::getline(buf, first_data_line);
  CHECK(first_data_line.rfind("-" + std::to_string(ep.initial_offset) + ",",
                              0) == 0);
}

TEST_CASE("model text format round-trips exactly") {
  const auto ep = sample_episode(99);
  const auto model = d2pc::identify({ep}, 5);
  std::stringstream buf;
  d2pc::save_model(model, buf);
  const auto back = d2pc::load_model(buf);
  CHECK(back.nbar == model.nbar);
  CHECK(back.m == model.m);
  REQUIRE(back.channels.size() == model.channels.size());
  for (std::size_t i = 0; i < model.channels.size(); ++i) {
    CHECK(back.channels[i].A == model.channels[i].A);
    CHECK(back.channels[i].B == model.channels[i].B);
  }
}

TEST_CASE("model files go through the same format") {
  const auto ep = sample_episode(3);
  const auto model = d2pc::identify({ep}, 5);
  const std::string path = "io_roundtrip_model.txt";
  d2pc::save_model_file(model, path);
  const auto back = d2pc::load_model_file(path);
  CHECK(back.channels[0].A == model.channels[0].A);
  std::remove(path.c_str());
}

TEST_CASE("unwritable and unreadable paths raise file errors") {
  const auto ep = sample_episode(4);
  const auto model = d2pc::identify({ep}, 5);
  CHECK_THROWS_AS(d2pc::save_model_file(model, "/nonexistent-dir/m.txt"),
                  d2pc::FileError);
  CHECK_THROWS_AS((void)d2pc::load_model_file("/nonexistent-dir/m.txt"),
                  d2pc::FileError);
}

TEST_CASE("garbage model text is rejected") {
  std::stringstream buf("not a model\n1 2 3\n");
  CHECK_THROWS_AS((void)d2pc::load_model(buf), d2pc::FileError);
}

TEST_CASE("trajectory csv carries both output streams and the status") {
  const auto& b = d2pc::benchmark("two_mass");
  d2pc::ControllerSetup setup;
  setup.tracking.horizon = b.horizon;
  setup.tracking.Q = b.Q;
  setup.tracking.R = b.R;
  setup.tracking.input_bounds = b.input_bounds;
  setup.reference = b.reference;
  auto ctrl = d2pc::make_mpc_controller(b.sys, setup);
  const auto traj = d2pc::run_closed_loop(
      b.sys, *ctrl, b.reference, 8, [](int) { return Vector::Zero(1); });

  std::ostringstream with_nominal;
  const Matrix nominal = Matrix::Zero(1, 8);
  d2pc::write_trajectory_csv(traj, &nominal, with_nominal);
  CHECK(with_nominal.str().find("y_nom") != std::string::npos);
  CHECK(with_nominal.str().find("solved") != std::string::npos);

  std::ostringstream without;
  d2pc::write_trajectory_csv(traj, nullptr, without);
  CHECK(without.str().find("y_nom") == std::string::npos);
  CHECK(without.str().find("y_true") != std::string::npos);
}

TEST_CASE("solver statuses have stable names") {
  CHECK(std::string(d2pc::qp_status_name(d2pc::QpStatus::Solved)) == "solved");
  CHECK(std::string(d2pc::qp_status_name(d2pc::QpStatus::MaxIterations)) ==
        "max_iterations");
  CHECK(std::string(d2pc::qp_status_name(d2pc::QpStatus::Failure)) ==
        "failure");
}
