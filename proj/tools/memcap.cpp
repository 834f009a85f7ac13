#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "memcap/capacity.hpp"
#include "memcap/dynamics.hpp"
#include "memcap/errors.hpp"
#include "memcap/experiment.hpp"
#include "memcap/random.hpp"

using namespace memcap;

namespace {

enum ExitCode { kOk = 0, kConfigError = 1, kNumericalFailure = 2 };

// Writes to `path` when given, stdout otherwise.
void deliver(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open '" + path + "' for writing");
  out << text;
  if (!out.flush()) throw std::invalid_argument("write to '" + path + "' failed");
}

struct SweepArgs {
  std::string config;
  std::string out;
  std::string plot;
  std::string json;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  bool fixed_reservoir = false;
};

struct PointArgs {
  int n = 30;
  std::string ensemble = "orthogonal";
  std::string activation = "tanh";
  double sigma = 1.0;
  double spectral_norm = 0.95;
  int length = 100000;
  std::optional<int> washout;
  int tau_max = 0;
  std::optional<double> ridge;
  std::uint64_t seed = 0;
  std::string reservoir;
  std::string save_reservoir;
  std::string trajectory;
  std::string out;
};

ReservoirSpec load_or_sample(const PointArgs& a) {
  if (!a.reservoir.empty()) {
    std::ifstream in(a.reservoir);
    if (!in) throw std::invalid_argument("cannot open reservoir file '" + a.reservoir + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return deserialize_reservoir(buffer.str());
  }
  return sample_reservoir(a.n, parse_ensemble(a.ensemble), a.spectral_norm, a.seed);
}

int cmd_sweep(const SweepArgs& a) {
  SweepConfig cfg = load_sweep_config(a.config);
  if (a.seed) cfg.base_seed = *a.seed;
  if (a.fixed_reservoir) cfg.fixed_reservoir = true;
  if (!a.json.empty()) cfg.keep_profiles = true;

  const SweepResult result = run_sweep(cfg, a.jobs);
  if (a.out.empty()) {
    write_csv(std::cout, result);
  } else {
    emit_csv(result, a.out);
  }
  if (!a.plot.empty()) emit_plot(result, a.plot);
  if (!a.json.empty()) deliver(to_json(result) + "\n", a.json);

  int ok = 0;
  for (const SigmaRow& row : result.rows) {
    ok += row.n_ok;
    for (const CellFailure& f : row.failures)
      std::cerr << fmt::format("sigma={:.6g} replication={}: {}\n", row.sigma, f.replication, f.reason);
  }
  if (ok == 0) {
    std::cerr << "memcap: every cell failed\n";
    return kNumericalFailure;
  }
  return kOk;
}

int cmd_mc(const PointArgs& a) {
  const Activation act = Activation::parse(a.activation);
  const ReservoirSpec spec = load_or_sample(a);
  if (!a.save_reservoir.empty()) deliver(serialize_reservoir(spec) + "\n", a.save_reservoir);

  const InputProcess process{a.sigma, a.length, a.washout.value_or(default_washout(spec.n)),
                             derive_seed(a.seed, 1)};
  const Trajectory traj = run(spec, act, process, Vector::Zero(spec.n));
  if (!a.trajectory.empty()) {
    std::ofstream out(a.trajectory);
    if (!out) throw std::invalid_argument("cannot open '" + a.trajectory + "' for writing");
    write_trajectory_csv(out, traj);
  }
  const CapacityProfile profile = estimate_total_mc(traj, {a.tau_max, a.ridge, true});
  const Regime regime = classify_regime(traj, spec, act, a.sigma);
  deliver(profile_record_header(profile) + ",regime\n" + format_profile_record(profile) + "," + to_string(regime) +
              "\n",
          a.out);
  return kOk;
}

int cmd_oracle(const PointArgs& a) {
  const ReservoirSpec spec = load_or_sample(a);
  const CapacityProfile profile = linear_mc_oracle(spec, a.tau_max > 0 ? a.tau_max : default_tau_max(spec.n));
  deliver(profile_record_header(profile) + "\n" + format_profile_record(profile) + "\n", a.out);
  return kOk;
}

int cmd_thresholds(const SweepArgs& a) {
  SweepConfig cfg = load_sweep_config(a.config);
  if (a.seed) cfg.base_seed = *a.seed;
  if (a.fixed_reservoir) cfg.fixed_reservoir = true;

  double delta = kProxyDelta;
  double d = kProxySaturation;
  if (const auto* p = cfg.activation.piecewise()) {
    delta = p->delta;
    d = p->d;
  }
  std::string text =
      "sigma_index,replication,seed,sigma_lower,sigma_upper,sigma_lower_loose,"
      "sigma_upper_loose_entrywise,sigma_upper_loose_rowsum\n";
  double lower = std::numeric_limits<double>::infinity();
  double upper = 0.0;
  const int rows = cfg.fixed_reservoir ? 1 : cfg.grid.count;
  for (int k = 0; k < rows; ++k) {
    for (int r = 0; r < cfg.replications; ++r) {
      const std::uint64_t seed = reservoir_seed(cfg, k, r);
      const ReservoirSpec spec = sample_reservoir(cfg.n, cfg.ensemble, cfg.spectral_norm, seed);
      const RegimeThresholds th = compute_thresholds(spec, delta, d);
      lower = std::min(lower, th.sigma_lower);
      upper = std::max(upper, th.sigma_upper);
      text += fmt::format("{},{},{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", k, r, seed, th.sigma_lower,
                          th.sigma_upper, th.sigma_lower_loose, th.sigma_upper_loose_entrywise,
                          th.sigma_upper_loose_rowsum);
    }
  }
  deliver(text, a.out);
  std::cerr << fmt::format("auto grid: [{:.6g}, {:.6g}] (delta = {}, D = {})\n", lower, upper, delta, d);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Memory capacity of echo state networks under input rescaling"};
  app.require_subcommand(1);
  app.set_version_flag("--version", MEMCAP_VERSION);

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "Run a sigma sweep from a config file");
  sweep->add_option("--config", sweep_args.config, "Sweep config (key = value)")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", sweep_args.out, "CSV output (stdout when omitted)");
  sweep->add_option("--plot", sweep_args.plot, "SVG bar chart");
  sweep->add_option("--json", sweep_args.json, "Full result with seeds, failures and per-lag profiles");
  sweep->add_option("--seed", sweep_args.seed, "Override base_seed");
  sweep->add_option("--jobs", sweep_args.jobs, "Worker threads")->check(CLI::PositiveNumber);
  sweep->add_flag("--fixed-reservoir", sweep_args.fixed_reservoir, "Reuse each reservoir across the grid");

  SweepArgs th_args;
  auto* thresholds = app.add_subcommand("thresholds", "Print the regime thresholds of a sweep's reservoirs");
  thresholds->add_option("--config", th_args.config, "Sweep config")->required()->check(CLI::ExistingFile);
  thresholds->add_option("--out", th_args.out, "CSV output (stdout when omitted)");
  thresholds->add_option("--seed", th_args.seed, "Override base_seed");
  thresholds->add_flag("--fixed-reservoir", th_args.fixed_reservoir, "One reservoir per replication");

  PointArgs mc_args;
  auto* mc = app.add_subcommand("mc", "Estimate the memory profile at one input scale");
  PointArgs oracle_args;
  auto* oracle = app.add_subcommand("oracle", "Linear-network memory profile from the Lyapunov solution");
  for (auto [cmd, a] : {std::pair{mc, &mc_args}, std::pair{oracle, &oracle_args}}) {
    cmd->add_option("--n", a->n, "State dimension")->check(CLI::PositiveNumber);
    cmd->add_option("--ensemble", a->ensemble, "orthogonal | dense | sparse[:sparsity=..,conditioning=..]");
    cmd->add_option("--spectral-norm", a->spectral_norm, "Target |A|_2");
    cmd->add_option("--tau-max", a->tau_max, "Largest lag (default min(3N, 200))");
    cmd->add_option("--seed", a->seed, "Reservoir seed");
    cmd->add_option("--reservoir", a->reservoir, "Load the reservoir from a file instead of sampling")
        ->check(CLI::ExistingFile);
    cmd->add_option("--save-reservoir", a->save_reservoir, "Write the reservoir to a file");
    cmd->add_option("--out", a->out, "Profile record output (stdout when omitted)");
  }
  mc->add_option("--activation", mc_args.activation, "tanh | relu | logsig | identity | pws:delta=..,d=..");
  mc->add_option("--sigma", mc_args.sigma, "Input scale")->required()->check(CLI::PositiveNumber);
  mc->add_option("--length", mc_args.length, "Recorded trajectory length")->check(CLI::PositiveNumber);
  mc->add_option("--washout", mc_args.washout, "Washout steps (default max(1000, 10 N))");
  mc->add_option("--ridge", mc_args.ridge, "Absolute ridge on the state covariance");
  mc->add_option("--trajectory", mc_args.trajectory, "Export the trajectory as CSV (t, z, x0..)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfigError;
  }

  try {
    if (*sweep) return cmd_sweep(sweep_args);
    if (*thresholds) return cmd_thresholds(th_args);
    if (*oracle) {
      if (!oracle_args.save_reservoir.empty())
        deliver(serialize_reservoir(load_or_sample(oracle_args)) + "\n", oracle_args.save_reservoir);
      return cmd_oracle(oracle_args);
    }
    return cmd_mc(mc_args);
  } catch (const NumericalError& e) {
    std::cerr << "memcap: numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const std::exception& e) {
    std::cerr << "memcap: " << e.what() << "\n";
    return kConfigError;
  }
}
