#include "d2pc/benchmark_systems.hpp"

#include <algorithm>

namespace d2pc {

int BenchmarkConfig::d2pc_data_length(int nbar) const {
  if (d2pc_base_length > 0) return d2pc_base_length;
  const int m = static_cast<int>(sys.inputs());
  return (1 + m) * (2 * nbar + 1) - 1;
}

int BenchmarkConfig::deepc_episode_length(int q) const {
  return q <= 1 ? deepc_single_length : deepc_mosaic_length;
}

namespace {

BenchmarkConfig make_inverted_pendulum() {
  BenchmarkConfig c;
  c.name = "inverted_pendulum";
  c.sys.A = Matrix{{1.208, 0.106, 0.0, 0.096},
                   {4.187, 1.194, 0.0, 1.779},
                   {-0.016, -0.001, 1.0, 0.070},
                   {-0.299, -0.015, 0.0, 0.460}};
  c.sys.B = Matrix{{-0.022}, {-0.414}, {0.007}, {0.126}};
  c.sys.C = Matrix{{0.0, 0.0, 1.0, 0.0}};
  c.true_order = 4;
  c.horizon = 20;
  c.Q = Matrix::Constant(1, 1, 1000.0);
  c.R = Matrix::Constant(1, 1, 1.0);
  c.input_bounds =
      BoxBounds{Vector::Constant(1, -20.0), Vector::Constant(1, 20.0)};
  c.reference = ReferenceSignal::step(Vector::Constant(1, 1.0));
  c.default_nsim = 80;
  c.default_nbar = 4;
  c.default_tini = 4;
  c.default_lambda_g = 500.0;
  c.default_lambda_y = 5e5;
  // Open-loop unstable: every extra sample multiplies the output range by
  // the dominant eigenvalue (~1.8), so the episode length is a compromise.
  // 33 samples excite every lag the largest sensible regressor uses, yet
  // keep the whole record inside the span a double can resolve at once;
  // pushing much past ~45 drops the small singular values of the data below
  // the roundoff of the large ones and the fit collapses.
  c.d2pc_base_length = 33;
  c.deepc_single_length = 55;   // shortest length admitting the Hankel depth
  c.deepc_mosaic_length = 30;
  return c;
}

BenchmarkConfig make_two_mass() {
  BenchmarkConfig c;
  c.name = "two_mass";
  c.sys.A = Matrix{{0.990, 0.100, 0.010, 0.000},
                   {-0.193, 0.990, 0.193, 0.010},
                   {0.098, 0.003, 0.902, 0.097},
                   {1.928, 0.098, -1.930, 0.902}};
  c.sys.B = Matrix{{0.005}, {0.010}, {0.000}, {0.003}};
  c.sys.C = Matrix{{0.0, 0.0, 1.0, 0.0}};
  c.true_order = 4;
  c.horizon = 20;
  c.Q = Matrix::Constant(1, 1, 200.0);
  c.R = Matrix::Constant(1, 1, 1.0);
  c.input_bounds =
      BoxBounds{Vector::Constant(1, -2.0), Vector::Constant(1, 2.0)};
  c.reference = ReferenceSignal::step(Vector::Constant(1, 1.0));
  c.default_nsim = 300;
  c.default_nbar = 20;
  c.default_tini = 15;
  c.default_lambda_g = 500.0;
  c.default_lambda_y = 5e5;
  c.d2pc_base_length = 100;
  c.deepc_single_length = 100;
  c.deepc_mosaic_length = 100;
  return c;
}

BenchmarkConfig make_four_tank() {
  BenchmarkConfig c;
  c.name = "four_tank";
  c.sys.A = Matrix{{0.921, 0.0, 0.041, 0.0},
                   {0.0, 0.918, 0.0, 0.033},
                   {0.0, 0.0, 0.924, 0.0},
                   {0.0, 0.0, 0.0, 0.937}};
  c.sys.B = Matrix{{0.017, 0.001}, {0.001, 0.023}, {0.0, 0.061}, {0.072, 0.0}};
  c.sys.C = Matrix{{1.0, 0.0, 0.0, 0.0}, {0.0, 1.0, 0.0, 0.0}};
  c.true_order = 4;
  c.horizon = 30;
  c.Q = 3.0 * Matrix::Identity(2, 2);
  c.R = 0.01 * Matrix::Identity(2, 2);
  c.reference = ReferenceSignal::constant(Vector{{0.65, 0.77}});
  c.default_nsim = 300;
  c.default_nbar = 30;
  c.default_tini = 30;
  c.default_lambda_g = 0.1;
  c.default_lambda_y = 1000.0;
  c.d2pc_base_length = 400;
  c.deepc_single_length = 400;
  c.deepc_mosaic_length = 400;
  return c;
}

const std::vector<BenchmarkConfig>& registry() {
  static const std::vector<BenchmarkConfig> all = {
      make_inverted_pendulum(), make_two_mass(), make_four_tank()};
  return all;
}

} // namespace

const BenchmarkConfig& benchmark(const std::string& name) {
  for (const auto& c : registry()) {
    if (c.name == name) return c;
  }
  throw NotFoundError("benchmark: unknown name '" + name + "'");
}

std::vector<std::string> benchmark_names() {
  std::vector<std::string> names;
  names.reserve(registry().size());
  for (const auto& c : registry()) names.push_back(c.name);
  return names;
}

} // namespace d2pc
