#include "d2pc/harness.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace d2pc {

namespace {

constexpr std::uint64_t kEpisodeStream = 1;
constexpr std::uint64_t kLoopNoiseStream = 2;

ControllerSetup controller_setup(const BenchmarkConfig& bench,
                                 const ExperimentSpec& spec) {
  ControllerSetup s;
  s.tracking.horizon = bench.horizon;
  s.tracking.Q = bench.Q;
  s.tracking.R = bench.R;
  s.tracking.input_bounds = bench.input_bounds;
  s.tracking.output_bounds = bench.output_bounds;
  s.reference = bench.reference;
  s.qp = spec.qp;
  s.warm_start = spec.warm_start;
  return s;
}

std::unique_ptr<Controller> build_controller(const BenchmarkConfig& bench,
                                             const ExperimentSpec& spec,
                                             Rng& rng) {
  const ControllerSetup setup = controller_setup(bench, spec);
  const NoiseSpec noise{spec.noise_amplitude};
  const double amp = bench.excitation_amplitude;

  switch (spec.method) {
    case Method::Mpc:
      return make_mpc_controller(bench.sys, setup);
    case Method::D2pc: {
      const int T =
          spec.data_length > 0 ? spec.data_length : bench.d2pc_data_length(spec.nbar);
      std::vector<EpisodeData> eps;
      eps.reserve(static_cast<std::size_t>(spec.data_sets));
      for (int e = 0; e < spec.data_sets; ++e) {
        Rng stream = rng.stream(kEpisodeStream, static_cast<std::uint64_t>(e));
        eps.push_back(collect_episode(bench.sys, T, spec.nbar, amp, noise, stream));
      }
      return make_d2pc_controller(identify(eps, spec.nbar), setup);
    }
    case Method::Deepc:
    case Method::RDeepc: {
      const int T = spec.data_length > 0
                        ? spec.data_length
                        : bench.deepc_episode_length(spec.episodes);
      std::vector<DeepcBlocks> sets;
      sets.reserve(static_cast<std::size_t>(spec.data_sets));
      for (int a = 0; a < spec.data_sets; ++a) {
        std::vector<EpisodeData> eps;
        eps.reserve(static_cast<std::size_t>(spec.episodes));
        for (int e = 0; e < spec.episodes; ++e) {
          const auto idx =
              static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(spec.episodes) +
              static_cast<std::uint64_t>(e);
          Rng stream = rng.stream(kEpisodeStream, idx);
          eps.push_back(collect_episode(bench.sys, T, 0, amp, noise, stream));
        }
        sets.push_back(build_deepc_blocks(eps, spec.tini, bench.horizon));
      }
      DeepcOptions opts;
      if (spec.method == Method::RDeepc) {
        opts.lambda_g = spec.lambda_g;
        opts.lambda_y = spec.lambda_y;
        opts.output_slack = true;
      }
      return make_deepc_controller(average_deepc_blocks(sets), opts, setup);
    }
  }
  throw ConfigError("unknown method");
}

ExperimentSpec resolve(const ExperimentSpec& in) {
  ExperimentSpec spec = in;
  const BenchmarkConfig& bench = benchmark(spec.benchmark);
  if (spec.nbar <= 0) spec.nbar = bench.default_nbar;
  if (spec.tini <= 0) spec.tini = bench.default_tini;
  if (spec.lambda_g < 0.0) spec.lambda_g = bench.default_lambda_g;
  if (spec.lambda_y < 0.0) spec.lambda_y = bench.default_lambda_y;
  if (spec.nsim <= 0) spec.nsim = bench.default_nsim;

  if (spec.trials < 1) throw ConfigError("experiment needs at least one trial");
  if (spec.data_sets < 1) throw ConfigError("data_sets must be >= 1");
  if (spec.episodes < 1) throw ConfigError("episodes must be >= 1");
  if (spec.noise_amplitude < 0.0) throw ConfigError("negative noise amplitude");
  if (spec.nbar < 1) throw ConfigError("nbar must be >= 1");
  if (spec.tini < 1) throw ConfigError("tini must be >= 1");
  return spec;
}

Trajectory trial_trajectory(const BenchmarkConfig& bench,
                            const ExperimentSpec& spec, int trial) {
  Rng root(spec.seed + static_cast<std::uint64_t>(trial));
  auto controller = build_controller(bench, spec, root);
  Rng noise_rng = root.stream(kLoopNoiseStream);
  return run_closed_loop(bench.sys, *controller, bench.reference, spec.nsim,
                         NoiseSpec{spec.noise_amplitude}, noise_rng);
}

TrialResult run_trial(const BenchmarkConfig& bench, const ExperimentSpec& spec,
                      const Matrix& nominal, int trial) {
  const Trajectory traj = trial_trajectory(bench, spec, trial);
  TrialResult r;
  r.trial = trial;
  r.failed = traj.failed;
  r.failure_step = traj.failure_step;
  if (!traj.failed) r.mae = compute_mae(traj.outputs_true, nominal);
  return r;
}

} // namespace

const char* method_name(Method m) {
  switch (m) {
    case Method::Mpc: return "mpc";
    case Method::D2pc: return "d2pc";
    case Method::Deepc: return "deepc";
    case Method::RDeepc: return "rdeepc";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  if (name == "mpc") return Method::Mpc;
  if (name == "d2pc") return Method::D2pc;
  if (name == "deepc") return Method::Deepc;
  if (name == "rdeepc") return Method::RDeepc;
  throw ConfigError("unknown method '" + name + "'");
}

double compute_mae(const Matrix& y_true, const Matrix& y_nom) {
  if (y_true.rows() != y_nom.rows() || y_true.cols() != y_nom.cols()) {
    throw InvalidInputError("compute_mae: trajectory shapes differ");
  }
  if (y_true.cols() == 0) throw InvalidInputError("compute_mae: empty trajectory");
  double sum = 0.0;
  for (Eigen::Index t = 0; t < y_true.cols(); ++t) {
    sum += (y_true.col(t) - y_nom.col(t)).norm();
  }
  return sum / static_cast<double>(y_true.cols());
}

const Matrix& nominal_outputs(const std::string& name, int nsim) {
  static std::mutex mutex;
  static std::map<std::pair<std::string, int>, Matrix> cache;
  std::lock_guard<std::mutex> lock(mutex);
  const auto key = std::make_pair(name, nsim);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  const BenchmarkConfig& bench = benchmark(name);
  ExperimentSpec spec;
  spec.benchmark = name;
  spec.method = Method::Mpc;
  const ControllerSetup setup = controller_setup(bench, spec);
  auto ctrl = make_mpc_controller(bench.sys, setup);
  const Trajectory traj = run_closed_loop(bench.sys, *ctrl, bench.reference,
                                          nsim, std::function<Vector(int)>());
  if (traj.failed) {
    throw Error("nominal trajectory solve failed on benchmark " + name);
  }
  return cache.emplace(key, traj.outputs_true).first->second;
}

Trajectory simulate_trial(const ExperimentSpec& in, int trial) {
  const ExperimentSpec spec = resolve(in);
  return trial_trajectory(benchmark(spec.benchmark), spec, trial);
}

ExperimentResult run_experiment(const ExperimentSpec& in) {
  const ExperimentSpec spec = resolve(in);
  const BenchmarkConfig& bench = benchmark(spec.benchmark);
  const Matrix nominal = nominal_outputs(spec.benchmark, spec.nsim);

  ExperimentResult result;
  result.spec = spec;
  result.trials.resize(static_cast<std::size_t>(spec.trials));

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const int workers = static_cast<int>(std::min<unsigned>(
      hw, static_cast<unsigned>(spec.trials)));
  if (workers <= 1) {
    for (int k = 0; k < spec.trials; ++k) {
      result.trials[static_cast<std::size_t>(k)] =
          run_trial(bench, spec, nominal, k);
    }
  } else {
    std::vector<std::future<TrialResult>> futures;
    futures.reserve(static_cast<std::size_t>(spec.trials));
    for (int k = 0; k < spec.trials; ++k) {
      futures.push_back(std::async(std::launch::async, [&, k] {
        return run_trial(bench, spec, nominal, k);
      }));
    }
    for (int k = 0; k < spec.trials; ++k) {
      result.trials[static_cast<std::size_t>(k)] =
          futures[static_cast<std::size_t>(k)].get();
    }
  }

  int failures = 0;
  double sum = 0.0;
  for (const auto& t : result.trials) {
    if (t.failed) {
      ++failures;
    } else {
      sum += t.mae;
    }
  }
  result.cell.trials = spec.trials;
  result.cell.failure_ratio =
      static_cast<double>(failures) / static_cast<double>(spec.trials);
  if (failures < spec.trials) {
    result.cell.mean_mae = sum / static_cast<double>(spec.trials - failures);
  }
  return result;
}

namespace {

ExperimentSpec base_spec(const std::string& benchmark_name, Method method,
                         std::uint64_t seed, int trials) {
  ExperimentSpec s;
  s.benchmark = benchmark_name;
  s.method = method;
  s.seed = seed;
  s.trials = trials;
  return s;
}

TableResult grid(int id, std::string title, std::vector<std::string> rows,
                 std::vector<std::string> cols,
                 std::vector<std::vector<ExperimentSpec>> specs) {
  TableResult t;
  t.id = id;
  t.title = std::move(title);
  t.row_labels = std::move(rows);
  t.col_labels = std::move(cols);
  t.specs = std::move(specs);
  t.cells.resize(t.specs.size());
  for (std::size_t r = 0; r < t.specs.size(); ++r) {
    t.cells[r].resize(t.specs[r].size());
    for (std::size_t c = 0; c < t.specs[r].size(); ++c) {
      t.cells[r][c] = run_experiment(t.specs[r][c]).cell;
    }
  }
  return t;
}

} // namespace

TableResult reproduce_table(int id, std::uint64_t seed, int trials) {
  using Specs = std::vector<std::vector<ExperimentSpec>>;
  switch (id) {
    case 1: {
      // Pendulum, noise-free: pooled-episode Hankel controller vs the
      // regressor controller.
      std::vector<std::string> rows{"deepc q=1", "deepc q=3", "deepc q=5",
                                    "deepc q=10", "d2pc nbar=4"};
      Specs specs;
      for (int q : {1, 3, 5, 10}) {
        ExperimentSpec s = base_spec("inverted_pendulum", Method::Deepc, seed, trials);
        s.episodes = q;
        specs.push_back({s});
      }
      ExperimentSpec d = base_spec("inverted_pendulum", Method::D2pc, seed, trials);
      d.nbar = 4;
      specs.push_back({d});
      return grid(1, "inverted pendulum, A_n=0", std::move(rows), {"A_n=0"},
                  std::move(specs));
    }
    case 2: {
      std::vector<std::string> rows{"deepc q=5", "deepc q=10", "rdeepc q=5",
                                    "rdeepc q=10", "d2pc nbar=10"};
      Specs specs;
      for (Method method : {Method::Deepc, Method::RDeepc}) {
        for (int q : {5, 10}) {
          ExperimentSpec s = base_spec("inverted_pendulum", method, seed, trials);
          s.episodes = q;
          s.noise_amplitude = 1e-4;
          specs.push_back({s});
        }
      }
      ExperimentSpec d = base_spec("inverted_pendulum", Method::D2pc, seed, trials);
      d.nbar = 10;
      d.data_sets = 50;
      d.noise_amplitude = 1e-4;
      specs.push_back({d});
      return grid(2, "inverted pendulum, A_n=1e-4", std::move(rows),
                  {"A_n=1e-4"}, std::move(specs));
    }
    case 3: {
      std::vector<std::string> rows;
      Specs specs;
      for (int nbar : {4, 6, 8, 10, 12, 14}) {
        rows.push_back("nbar=" + std::to_string(nbar));
        ExperimentSpec s = base_spec("inverted_pendulum", Method::D2pc, seed, trials);
        s.nbar = nbar;
        s.data_sets = 50;
        s.noise_amplitude = 1e-4;
        specs.push_back({s});
      }
      return grid(3, "inverted pendulum d2pc, A_n=1e-4, N_d=50",
                  std::move(rows), {"d2pc"}, std::move(specs));
    }
    case 4: {
      std::vector<std::string> rows;
      std::vector<std::string> cols{"deepc tini=4", "deepc tini=15",
                                    "rdeepc tini=4", "rdeepc tini=15",
                                    "d2pc nbar=20"};
      Specs specs;
      for (double an : {1e-8, 1e-4, 1e-2, 1e-1}) {
        std::ostringstream label;
        label << "A_n=" << an;
        rows.push_back(label.str());
        std::vector<ExperimentSpec> row;
        for (Method method : {Method::Deepc, Method::RDeepc}) {
          for (int tini : {4, 15}) {
            ExperimentSpec s = base_spec("two_mass", method, seed, trials);
            s.tini = tini;
            s.noise_amplitude = an;
            row.push_back(s);
          }
        }
        ExperimentSpec d = base_spec("two_mass", Method::D2pc, seed, trials);
        d.nbar = 20;
        d.noise_amplitude = an;
        row.push_back(d);
        specs.push_back(std::move(row));
      }
      return grid(4, "two-mass, N_d=1", std::move(rows), std::move(cols),
                  std::move(specs));
    }
    case 5: {
      std::vector<std::string> rows;
      Specs specs;
      for (int nbar : {4, 6, 8, 10, 15, 20}) {
        rows.push_back("nbar=" + std::to_string(nbar));
        std::vector<ExperimentSpec> row;
        for (double an : {1e-2, 1e-1}) {
          ExperimentSpec s = base_spec("two_mass", Method::D2pc, seed, trials);
          s.nbar = nbar;
          s.noise_amplitude = an;
          row.push_back(s);
        }
        specs.push_back(std::move(row));
      }
      return grid(5, "two-mass d2pc, N_d=1", std::move(rows),
                  {"A_n=1e-2", "A_n=1e-1"}, std::move(specs));
    }
    case 6: {
      std::vector<std::string> rows;
      Specs specs;
      for (int nd : {1, 5, 20, 50, 500}) {
        rows.push_back("N_d=" + std::to_string(nd));
        std::vector<ExperimentSpec> row;
        ExperimentSpec d = base_spec("two_mass", Method::D2pc, seed, trials);
        d.nbar = 20;
        d.data_sets = nd;
        d.noise_amplitude = 1e-1;
        row.push_back(d);
        ExperimentSpec r = base_spec("two_mass", Method::RDeepc, seed, trials);
        r.tini = 15;
        r.data_sets = nd;
        r.noise_amplitude = 1e-1;
        row.push_back(r);
        specs.push_back(std::move(row));
      }
      return grid(6, "two-mass, A_n=0.1", std::move(rows),
                  {"d2pc nbar=20", "rdeepc tini=15"}, std::move(specs));
    }
    case 7: {
      std::vector<std::string> rows;
      Specs specs;
      for (int nbar : {4, 6, 10, 15, 20, 30}) {
        rows.push_back("nbar=" + std::to_string(nbar));
        std::vector<ExperimentSpec> row;
        for (double an : {1e-2, 1e-1}) {
          ExperimentSpec s = base_spec("four_tank", Method::D2pc, seed, trials);
          s.nbar = nbar;
          s.noise_amplitude = an;
          row.push_back(s);
        }
        specs.push_back(std::move(row));
      }
      return grid(7, "four-tank d2pc, N_d=1", std::move(rows),
                  {"A_n=1e-2", "A_n=1e-1"}, std::move(specs));
    }
    case 8: {
      std::vector<std::string> rows;
      Specs specs;
      for (int nd : {1, 5, 20, 50, 500}) {
        rows.push_back("N_d=" + std::to_string(nd));
        std::vector<ExperimentSpec> row;
        ExperimentSpec d = base_spec("four_tank", Method::D2pc, seed, trials);
        d.nbar = 30;
        d.data_sets = nd;
        d.noise_amplitude = 1e-1;
        row.push_back(d);
        ExperimentSpec r = base_spec("four_tank", Method::RDeepc, seed, trials);
        r.tini = 30;
        r.data_sets = nd;
        r.noise_amplitude = 1e-1;
        row.push_back(r);
        specs.push_back(std::move(row));
      }
      return grid(8, "four-tank, A_n=0.1", std::move(rows),
                  {"d2pc nbar=30", "rdeepc tini=30"}, std::move(specs));
    }
    default:
      throw NotFoundError("reproduce_table: id must be in 1..8");
  }
}

std::string format_mae(const TableCell& cell) {
  if (!cell.mean_mae) return "N.A.";
  std::ostringstream os;
  os.precision(6);
  os << *cell.mean_mae;
  return os.str();
}

namespace {

void write_spec_metadata(const ExperimentSpec& s, std::ostream& os) {
  os << "# benchmark=" << s.benchmark << " method=" << method_name(s.method)
     << " nbar=" << s.nbar << " data_sets=" << s.data_sets
     << " episodes=" << s.episodes << " tini=" << s.tini
     << " lambda_g=" << s.lambda_g << " lambda_y=" << s.lambda_y
     << " noise=" << s.noise_amplitude << " trials=" << s.trials
     << " nsim=" << s.nsim << " seed=" << s.seed << "\n";
}

} // namespace

void write_table_csv(const TableResult& t, std::ostream& os) {
  os << "# table " << t.id << ": " << t.title << "\n";
  for (std::size_t r = 0; r < t.specs.size(); ++r) {
    for (std::size_t c = 0; c < t.specs[r].size(); ++c) {
      os << "# cell [" << t.row_labels[r] << "][" << t.col_labels[c] << "] ";
      write_spec_metadata(t.specs[r][c], os);
    }
  }
  os << "row";
  for (const auto& col : t.col_labels) {
    os << "," << col << " mae," << col << " fr";
  }
  os << "\n";
  for (std::size_t r = 0; r < t.cells.size(); ++r) {
    os << t.row_labels[r];
    for (const auto& cell : t.cells[r]) {
      os << "," << format_mae(cell) << "," << cell.failure_ratio;
    }
    os << "\n";
  }
}

void write_experiment_csv(const ExperimentResult& result, std::ostream& os) {
  os << "# experiment ";
  write_spec_metadata(result.spec, os);
  os << "trial,failed,failure_step,mae\n";
  const auto precision = os.precision(10);
  for (const auto& t : result.trials) {
    os << t.trial << "," << (t.failed ? 1 : 0) << "," << t.failure_step << ",";
    if (t.failed) {
      os << "N.A.";
    } else {
      os << t.mae;
    }
    os << "\n";
  }
  os << "# mean_mae=" << format_mae(result.cell)
     << " failure_ratio=" << result.cell.failure_ratio << "\n";
  os.precision(precision);
}

} // namespace d2pc
