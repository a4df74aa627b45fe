#pragma once

#include <optional>
#include <string>
#include <vector>

#include "d2pc/lti.hpp"

namespace d2pc {

// A named plant together with the control setup used by the experiment
// harness: tracking weights, horizon, constraints, reference, and the data
// collection lengths that the identification methods default to.
struct BenchmarkConfig {
  std::string name;
  LtiSystem sys;
  int true_order = 0;

  int horizon = 0;    // prediction horizon N
  Matrix Q;           // p x p output weight
  Matrix R;           // m x m input weight
  std::optional<BoxBounds> input_bounds;
  std::optional<BoxBounds> output_bounds;
  ReferenceSignal reference;

  int default_nsim = 0;
  int default_nbar = 0;       // regressor memory for the per-channel models
  int default_tini = 0;       // initialization window for the Hankel methods
  double default_lambda_g = 0.0;
  double default_lambda_y = 0.0;
  double excitation_amplitude = 1.0;

  // Baseline experiment lengths; the accessors below enforce the theoretical
  // minima on top of them.
  int d2pc_base_length = 0;      // fixed episode length; 0 = PE bound for nbar
  int deepc_single_length = 0;   // episode length when one episode is used
  int deepc_mosaic_length = 0;   // per-episode length when several are pooled

  // Samples after warm-up for one identification episode. Covers the rank
  // requirement (T >= 4*nbar + 1) and generic excitation of order 2*nbar + 1
  // for an m-input signal of length T + nbar.
  [[nodiscard]] int d2pc_data_length(int nbar) const;

  // Episode length for the Hankel-based controllers with q pooled episodes.
  [[nodiscard]] int deepc_episode_length(int q) const;
};

// Registry of the built-in benchmarks: "inverted_pendulum", "two_mass",
// "four_tank". Throws NotFoundError for unknown names.
[[nodiscard]] const BenchmarkConfig& benchmark(const std::string& name);
[[nodiscard]] std::vector<std::string> benchmark_names();

} // namespace d2pc
