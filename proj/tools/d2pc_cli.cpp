#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "d2pc/benchmark_systems.hpp"
#include "d2pc/datadriven.hpp"
#include "d2pc/errors.hpp"
#include "d2pc/harness.hpp"
#include "d2pc/io.hpp"

namespace {

struct SpecFlags {
  std::string benchmark = "two_mass";
  std::string method = "d2pc";
  int nbar = 0;
  int nd = 1;
  int q = 1;
  int tini = 0;
  double lambda_g = -1.0;
  double lambda_y = -1.0;
  double noise = 0.0;
  int trials = 10;
  int nsim = 0;
  std::uint64_t seed = 12345;
  int data_length = 0;
  std::string out;
};

void add_spec_flags(CLI::App* cmd, SpecFlags& f, bool with_trials) {
  cmd->add_option("--benchmark", f.benchmark, "Benchmark name")
      ->capture_default_str();
  cmd->add_option("--method", f.method, "mpc|d2pc|deepc|rdeepc")
      ->capture_default_str();
  cmd->add_option("--nbar", f.nbar, "Regressor memory (0 = benchmark default)");
  cmd->add_option("--nd", f.nd, "Data sets collected and averaged");
  cmd->add_option("--q", f.q, "Episodes pooled side by side (Hankel methods)");
  cmd->add_option("--tini", f.tini, "History window (0 = benchmark default)");
  cmd->add_option("--lambda-g", f.lambda_g,
                  "Regularizer weight (< 0 = benchmark default)");
  cmd->add_option("--lambda-y", f.lambda_y,
                  "Slack weight (< 0 = benchmark default)");
  cmd->add_option("--noise", f.noise, "Measurement noise amplitude");
  if (with_trials) cmd->add_option("--trials", f.trials, "Independent trials");
  cmd->add_option("--nsim", f.nsim, "Closed-loop steps (0 = benchmark default)");
  cmd->add_option("--seed", f.seed, "Root seed");
  cmd->add_option("--data-length", f.data_length,
                  "Per-episode samples (0 = benchmark policy)");
  cmd->add_option("--out", f.out, "Output file (default: stdout)");
}

d2pc::ExperimentSpec to_spec(const SpecFlags& f) {
  d2pc::ExperimentSpec s;
  s.benchmark = f.benchmark;
  s.method = d2pc::parse_method(f.method);
  s.nbar = f.nbar;
  s.data_sets = f.nd;
  s.episodes = f.q;
  s.tini = f.tini;
  s.lambda_g = f.lambda_g;
  s.lambda_y = f.lambda_y;
  s.noise_amplitude = f.noise;
  s.data_length = f.data_length;
  s.trials = f.trials;
  s.nsim = f.nsim;
  s.seed = f.seed;
  return s;
}

template <typename Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty()) {
    fn(std::cout);
    return;
  }
  std::ofstream os(path);
  if (!os) throw d2pc::FileError("cannot open '" + path + "' for writing");
  fn(os);
  if (!os) throw d2pc::FileError("write to '" + path + "' failed");
}

int cmd_simulate(const SpecFlags& f, int trial) {
  const d2pc::ExperimentSpec spec = to_spec(f);
  const auto& bench = d2pc::benchmark(spec.benchmark);
  const int nsim = spec.nsim > 0 ? spec.nsim : bench.default_nsim;
  const d2pc::Trajectory traj = d2pc::simulate_trial(spec, trial);
  const d2pc::Matrix& nominal = d2pc::nominal_outputs(spec.benchmark, nsim);
  with_output(f.out, [&](std::ostream& os) {
    d2pc::write_trajectory_csv(traj, &nominal, os);
  });
  if (traj.failed) {
    std::cerr << "steps=" << traj.steps_completed << " failed at t="
              << traj.failure_step << "\n";
    return 2;
  }
  std::cerr << "steps=" << traj.steps_completed << " mae="
            << d2pc::compute_mae(traj.outputs_true, nominal) << "\n";
  return 0;
}

struct IdentifyFlags {
  std::string benchmark = "two_mass";
  int nbar = 0;
  int nd = 1;
  double noise = 0.0;
  std::uint64_t seed = 12345;
  int trial = 0;
  int data_length = 0;
  std::string out;
  std::string episodes_out;
};

int cmd_identify(const IdentifyFlags& f) {
  const auto& bench = d2pc::benchmark(f.benchmark);
  const int nbar = f.nbar > 0 ? f.nbar : bench.default_nbar;
  const int T =
      f.data_length > 0 ? f.data_length : bench.d2pc_data_length(nbar);
  // Same seeding as trial f.trial of the experiment harness, so a model fit
  // here is the one that trial used.
  d2pc::Rng root(f.seed + static_cast<std::uint64_t>(f.trial));
  std::vector<d2pc::EpisodeData> episodes;
  episodes.reserve(static_cast<std::size_t>(f.nd));
  for (int e = 0; e < f.nd; ++e) {
    d2pc::Rng stream = root.stream(1, static_cast<std::uint64_t>(e));
    episodes.push_back(d2pc::collect_episode(bench.sys, T, nbar,
                                             bench.excitation_amplitude,
                                             d2pc::NoiseSpec{f.noise}, stream));
  }
  if (!f.episodes_out.empty()) {
    for (std::size_t e = 0; e < episodes.size(); ++e) {
      const std::string path =
          f.episodes_out + "_" + std::to_string(e) + ".csv";
      with_output(path, [&](std::ostream& os) {
        d2pc::write_episode_csv(episodes[e], os);
      });
    }
  }
  const d2pc::DataDrivenModel model = d2pc::identify(episodes, nbar);
  std::cerr << "channels=" << model.p << " nbar=" << model.nbar
            << " episodes=" << model.episodes_used << " data_rank="
            << model.min_data_rank << "/" << model.full_data_rank;
  if (model.rank_deficient_data()) std::cerr << " (minimum-norm fit)";
  std::cerr << "\n";
  with_output(f.out, [&](std::ostream& os) { d2pc::save_model(model, os); });
  return 0;
}

int cmd_experiment(const SpecFlags& f) {
  const d2pc::ExperimentResult result = d2pc::run_experiment(to_spec(f));
  with_output(f.out,
              [&](std::ostream& os) { d2pc::write_experiment_csv(result, os); });
  return 0;
}

int cmd_table(int id, std::uint64_t seed, int trials, const std::string& out) {
  const d2pc::TableResult table = d2pc::reproduce_table(id, seed, trials);
  with_output(out, [&](std::ostream& os) { d2pc::write_table_csv(table, os); });
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data-driven predictive control: closed loops, model fits, "
               "experiment batteries and benchmark tables"};
  app.require_subcommand(1);

  SpecFlags sim_flags;
  int sim_trial = 0;
  CLI::App* sim = app.add_subcommand(
      "simulate", "Run one closed loop and write the trajectory as CSV");
  add_spec_flags(sim, sim_flags, false);
  sim->add_option("--trial", sim_trial,
                  "Trial index (run is seeded with seed+trial)");

  IdentifyFlags id_flags;
  CLI::App* ident = app.add_subcommand(
      "identify", "Collect excitation episodes and fit a regressor model");
  ident->add_option("--benchmark", id_flags.benchmark, "Benchmark name")
      ->capture_default_str();
  ident->add_option("--nbar", id_flags.nbar,
                    "Regressor memory (0 = benchmark default)");
  ident->add_option("--nd", id_flags.nd, "Episodes collected and averaged");
  ident->add_option("--noise", id_flags.noise, "Measurement noise amplitude");
  ident->add_option("--seed", id_flags.seed, "Root seed");
  ident->add_option("--trial", id_flags.trial,
                    "Trial index (episodes are seeded with seed+trial)");
  ident->add_option("--data-length", id_flags.data_length,
                    "Per-episode samples (0 = benchmark policy)");
  ident->add_option("--out", id_flags.out, "Model file (default: stdout)");
  ident->add_option("--episodes-out", id_flags.episodes_out,
                    "Also write each episode to <prefix>_<k>.csv");

  SpecFlags exp_flags;
  CLI::App* exp = app.add_subcommand(
      "experiment", "Run a battery of trials and write per-trial results as CSV");
  add_spec_flags(exp, exp_flags, true);

  int table_id = 0;
  std::uint64_t table_seed = 12345;
  int table_trials = 10;
  std::string table_out;
  CLI::App* tab = app.add_subcommand(
      "table", "Reproduce one of the built-in benchmark tables as CSV");
  tab->add_option("id", table_id, "Table id (1-8)")->required();
  tab->add_option("--seed", table_seed, "Root seed");
  tab->add_option("--trials", table_trials, "Trials per cell");
  tab->add_option("--out", table_out, "Output file (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(sim)) return cmd_simulate(sim_flags, sim_trial);
    if (app.got_subcommand(ident)) return cmd_identify(id_flags);
    if (app.got_subcommand(exp)) return cmd_experiment(exp_flags);
    if (app.got_subcommand(tab)) {
      return cmd_table(table_id, table_seed, table_trials, table_out);
    }
  } catch (const d2pc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
