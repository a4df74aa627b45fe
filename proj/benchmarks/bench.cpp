// Micro benchmarks for the hot paths: the pseudoinverse behind the episode
// fits, Hankel assembly, a full identification pass, and the per-step QP
// solves of the three controller families.

#include <benchmark/benchmark.h>

#include "d2pc/benchmark_systems.hpp"
#include "d2pc/condense.hpp"
#include "d2pc/datadriven.hpp"
#include "d2pc/numerics.hpp"

namespace {

using d2pc::Matrix;
using d2pc::Vector;

Matrix random_matrix(d2pc::Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.uniform(-1.0, 1.0);
  }
  return m;
}

void bm_pinv(benchmark::State& state) {
  d2pc::Rng rng(1);
  const Matrix J = random_matrix(rng, state.range(0), state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(d2pc::pinv(J));
  }
}
// Typical regression shapes: two-mass (nbar=20) and four-tank (nbar=30).
BENCHMARK(bm_pinv)->Args({41, 80})->Args({92, 310});

void bm_hankel(benchmark::State& state) {
  d2pc::Rng rng(2);
  const Matrix u = random_matrix(rng, 2, 400);
  for (auto _ : state) {
    benchmark::DoNotOptimize(d2pc::hankel(u, static_cast<int>(state.range(0))));
  }
}
BENCHMARK(bm_hankel)->Arg(20)->Arg(60);

void bm_identify(benchmark::State& state) {
  const auto& b = d2pc::benchmark("two_mass");
  d2pc::Rng rng(3);
  const auto ep = d2pc::collect_episode(b.sys, 100, 20, b.excitation_amplitude,
                                        d2pc::NoiseSpec{0.01}, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(d2pc::identify({ep}, 20));
  }
}
BENCHMARK(bm_identify);

void bm_qp_box(benchmark::State& state) {
  // Pendulum-shaped tracking problem: 20 variables, box on every input.
  const auto& b = d2pc::benchmark("inverted_pendulum");
  d2pc::Rng rng(4);
  const auto ep = d2pc::collect_episode(b.sys, b.d2pc_data_length(4), 4,
                                        b.excitation_amplitude,
                                        d2pc::NoiseSpec{}, rng);
  const auto model = d2pc::identify({ep}, 4);
  const auto pred = d2pc::build_predictor(model, b.horizon);
  d2pc::TrackingSetup setup;
  setup.horizon = b.horizon;
  setup.Q = b.Q;
  setup.R = b.R;
  setup.input_bounds = b.input_bounds;
  const Vector chi = Vector::Zero(model.chi_size());
  const Vector rstack = d2pc::stack_reference(b.reference, 0, b.horizon);
  const auto problem = d2pc::condense_d2pc(pred, chi, setup, rstack);
  for (auto _ : state) {
    benchmark::DoNotOptimize(d2pc::solve(problem));
  }
}
BENCHMARK(bm_qp_box);

void bm_qp_unconstrained(benchmark::State& state) {
  // Four-tank-shaped problem: 60 variables, no constraints, direct solve.
  const auto& b = d2pc::benchmark("four_tank");
  d2pc::Rng rng(5);
  const auto ep = d2pc::collect_episode(b.sys, b.d2pc_data_length(30), 30,
                                        b.excitation_amplitude,
                                        d2pc::NoiseSpec{}, rng);
  const auto model = d2pc::identify({ep}, 30);
  const auto pred = d2pc::build_predictor(model, b.horizon);
  d2pc::TrackingSetup setup;
  setup.horizon = b.horizon;
  setup.Q = b.Q;
  setup.R = b.R;
  const Vector chi = Vector::Zero(model.chi_size());
  const Vector rstack = d2pc::stack_reference(b.reference, 0, b.horizon);
  const auto problem = d2pc::condense_d2pc(pred, chi, setup, rstack);
  for (auto _ : state) {
    benchmark::DoNotOptimize(d2pc::solve(problem));
  }
}
BENCHMARK(bm_qp_unconstrained);

void bm_qp_hankel(benchmark::State& state) {
  // Pooled-data controller step on the two-mass system.
  const auto& b = d2pc::benchmark("two_mass");
  d2pc::Rng rng(6);
  const auto ep = d2pc::collect_episode(b.sys, 100, 15, b.excitation_amplitude,
                                        d2pc::NoiseSpec{0.01}, rng);
  const auto blocks = d2pc::build_deepc_blocks({ep}, 15, b.horizon);
  d2pc::TrackingSetup setup;
  setup.horizon = b.horizon;
  setup.Q = b.Q;
  setup.R = b.R;
  setup.input_bounds = b.input_bounds;
  d2pc::DeepcOptions opts;
  opts.lambda_g = b.default_lambda_g;
  opts.lambda_y = b.default_lambda_y;
  opts.output_slack = true;
  d2pc::DeepcQpBuilder builder(blocks, setup, opts);
  const Vector u_ini = Vector::Zero(15);
  const Vector y_ini = Vector::Zero(15);
  const Vector rstack = d2pc::stack_reference(b.reference, 0, b.horizon);
  const auto problem = builder.build(u_ini, y_ini, rstack);
  for (auto _ : state) {
    benchmark::DoNotOptimize(d2pc::solve(problem));
  }
}
BENCHMARK(bm_qp_hankel);

} // namespace

BENCHMARK_MAIN();
