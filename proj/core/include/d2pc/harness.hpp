#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "d2pc/benchmark_systems.hpp"
#include "d2pc/controllers.hpp"

namespace d2pc {

enum class Method { Mpc, D2pc, Deepc, RDeepc };

[[nodiscard]] const char* method_name(Method m);
[[nodiscard]] Method parse_method(const std::string& name);

// One experiment: a benchmark, a controller configuration, and a repetition
// scheme. Zero/negative entries fall back to the benchmark defaults where a
// default exists.
struct ExperimentSpec {
  std::string benchmark = "two_mass";
  Method method = Method::D2pc;

  int nbar = 0;        // regressor memory (0 = benchmark default)
  int data_sets = 1;   // N_d: models or Hankel block sets averaged
  int episodes = 1;    // q: episodes pooled side by side (Hankel methods)
  int tini = 0;        // history window (0 = benchmark default)
  double lambda_g = -1.0;  // < 0 = benchmark default
  double lambda_y = -1.0;
  double noise_amplitude = 0.0;
  int data_length = 0;  // per-episode samples (0 = benchmark policy)

  int trials = 10;
  int nsim = 0;  // 0 = benchmark default
  std::uint64_t seed = 12345;

  QpSettings qp;
  bool warm_start = true;
};

struct TrialResult {
  int trial = 0;
  bool failed = false;
  int failure_step = -1;
  double mae = 0.0;  // meaningful only when !failed
};

// Aggregate of a batch of trials. mean_mae is empty when every trial failed.
struct TableCell {
  std::optional<double> mean_mae;
  double failure_ratio = 0.0;
  int trials = 0;
};

struct ExperimentResult {
  ExperimentSpec spec;  // with defaults resolved
  std::vector<TrialResult> trials;
  TableCell cell;
};

// Mean over samples of the Euclidean distance between the true outputs and
// the nominal trajectory.
[[nodiscard]] double compute_mae(const Matrix& y_true, const Matrix& y_nom);

// Noise-free closed loop of the model-based controller on the named
// benchmark; the shared baseline every method is scored against. Cached per
// (benchmark, nsim) since weights, horizon and reference are fixed.
[[nodiscard]] const Matrix& nominal_outputs(const std::string& benchmark,
                                            int nsim);

// Runs spec.trials independent trials (parallelized; trial k is seeded with
// seed + k, so results do not depend on scheduling) and aggregates them.
[[nodiscard]] ExperimentResult run_experiment(const ExperimentSpec& spec);

// One closed loop, seeded exactly like trial `trial` of run_experiment, but
// returning the full trajectory instead of the aggregate.
[[nodiscard]] Trajectory simulate_trial(const ExperimentSpec& spec,
                                        int trial = 0);

// A predefined experiment grid. Cells are addressed [row][col].
struct TableResult {
  int id = 0;
  std::string title;
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  std::vector<std::vector<TableCell>> cells;
  std::vector<std::vector<ExperimentSpec>> specs;
};

// The built-in grids, ids 1-8. Throws NotFoundError for other ids.
[[nodiscard]] TableResult reproduce_table(int id, std::uint64_t seed = 12345,
                                          int trials = 10);

// "N.A." when every trial failed, the numeric value otherwise.
[[nodiscard]] std::string format_mae(const TableCell& cell);

void write_table_csv(const TableResult& table, std::ostream& os);
void write_experiment_csv(const ExperimentResult& result, std::ostream& os);

} // namespace d2pc
