#include "memcap/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "json.hpp"
#include "memcap/capacity.hpp"
#include "memcap/random.hpp"

#ifndef MEMCAP_VERSION
#define MEMCAP_VERSION "dev"
#endif

namespace memcap {
namespace {

constexpr std::uint64_t kReservoirTag = 0x7265736572766f69ull;  // "reservoi"
constexpr std::uint64_t kInputTag = 0x696e707574737373ull;      // "inputsss"
constexpr std::uint64_t kSharedAcrossSigma = std::numeric_limits<std::uint64_t>::max();

template <typename Fn>
void parallel_for(std::size_t count, int jobs, Fn&& body) {
  std::size_t workers = jobs > 0 ? static_cast<std::size_t>(jobs)
                                 : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) body(i);
    });
  }
}

struct ReservoirDraw {
  std::optional<ReservoirSpec> spec;
  std::string error;
};

struct CellOutcome {
  bool ok = false;
  double total = 0.0;
  Regime regime = Regime::kIntermediate;
  std::vector<double> profile;
  std::string reason;
};

std::pair<double, double> threshold_parameters(const Activation& act) {
  if (const auto* p = act.piecewise()) return {p->delta, p->d};
  return {kProxyDelta, kProxySaturation};
}

}  // namespace

std::vector<double> log_grid(double lower, double upper, int count) {
  if (count < 2) throw std::invalid_argument("log_grid: count must be >= 2");
  if (!(lower > 0.0 && upper > lower)) throw std::invalid_argument("log_grid: need 0 < lower < upper");
  std::vector<double> grid(count);
  const double lo = std::log10(lower);
  const double step = (std::log10(upper) - lo) / (count - 1);
  for (int i = 0; i < count; ++i) grid[i] = std::pow(10.0, lo + step * i);
  grid.front() = lower;
  grid.back() = upper;
  return grid;
}

std::uint64_t reservoir_seed(const SweepConfig& cfg, int sigma_index, int replication) {
  const std::uint64_t row =
      cfg.fixed_reservoir ? kSharedAcrossSigma : static_cast<std::uint64_t>(sigma_index);
  return derive_seed(cfg.base_seed, kReservoirTag, row, static_cast<std::uint64_t>(replication));
}

std::uint64_t input_seed(const SweepConfig& cfg, int sigma_index, int replication) {
  return derive_seed(cfg.base_seed, kInputTag, static_cast<std::uint64_t>(sigma_index),
                     static_cast<std::uint64_t>(replication));
}

SweepResult run_sweep(const SweepConfig& cfg, int jobs) {
  validate(cfg);
  const int count = cfg.grid.count;
  const int reps = cfg.replications;
  const int reservoir_rows = cfg.fixed_reservoir ? 1 : count;

  std::vector<ReservoirDraw> draws(static_cast<std::size_t>(reservoir_rows) * reps);
  parallel_for(draws.size(), jobs, [&](std::size_t i) {
    const int row = static_cast<int>(i) / reps;
    const int r = static_cast<int>(i) % reps;
    try {
      draws[i].spec = sample_reservoir(cfg.n, cfg.ensemble, cfg.spectral_norm, reservoir_seed(cfg, row, r));
    } catch (const std::exception& e) {
      draws[i].error = std::string("reservoir sampling: ") + e.what();
    }
  });

  SweepResult result;
  result.config = cfg;
  result.version = MEMCAP_VERSION;

  std::string grid_error;
  if (cfg.grid.bounds) {
    std::tie(result.grid_lower, result.grid_upper) = *cfg.grid.bounds;
  } else {
    // Envelope of the per-reservoir thresholds: the left edge is linear and
    // the right edge saturated for every reservoir in the sweep.
    const auto [delta, d] = threshold_parameters(cfg.activation);
    double lower = std::numeric_limits<double>::infinity();
    double upper = 0.0;
    for (auto& draw : draws) {
      if (!draw.spec) continue;
      try {
        const auto th = compute_thresholds(*draw.spec, delta, d);
        lower = std::min(lower, th.sigma_lower);
        upper = std::max(upper, th.sigma_upper);
      } catch (const std::exception& e) {
        draw.error = std::string("thresholds: ") + e.what();
        draw.spec.reset();
      }
    }
    if (upper > 0.0 && lower < upper) {
      result.grid_lower = lower;
      result.grid_upper = upper;
    } else {
      grid_error = "automatic sigma grid: no reservoir produced valid thresholds";
    }
  }

  std::vector<double> sigmas(count, std::numeric_limits<double>::quiet_NaN());
  if (grid_error.empty()) sigmas = log_grid(result.grid_lower, result.grid_upper, count);

  const int washout = cfg.washout.value_or(default_washout(cfg.n));
  EstimatorOptions options;
  options.tau_max = cfg.tau_max.value_or(default_tau_max(cfg.n));
  options.ridge = cfg.ridge;

  std::vector<CellOutcome> cells(static_cast<std::size_t>(count) * reps);
  parallel_for(cells.size(), jobs, [&](std::size_t i) {
    const int k = static_cast<int>(i) / reps;
    const int r = static_cast<int>(i) % reps;
    CellOutcome& cell = cells[i];
    if (!grid_error.empty()) {
      cell.reason = grid_error;
      return;
    }
    const ReservoirDraw& draw = draws[static_cast<std::size_t>(cfg.fixed_reservoir ? 0 : k) * reps + r];
    if (!draw.spec) {
      cell.reason = draw.error;
      return;
    }
    try {
      InputProcess process{sigmas[k], cfg.trajectory_length, washout, input_seed(cfg, k, r)};
      const Trajectory traj = run(*draw.spec, cfg.activation, process, Vector::Zero(cfg.n));
      CapacityProfile profile = estimate_total_mc(traj, options);
      cell.regime = classify_regime(traj, *draw.spec, cfg.activation, sigmas[k]);
      cell.total = profile.total;
      if (cfg.keep_profiles) cell.profile = std::move(profile.per_lag);
      cell.ok = true;
    } catch (const std::exception& e) {
      cell.reason = e.what();
    }
  });

  // Ordered reduce over (sigma index, replication).
  result.rows.resize(count);
  for (int k = 0; k < count; ++k) {
    SigmaRow& row = result.rows[k];
    row.sigma = sigmas[k];
    double sum = 0.0;
    std::size_t profile_len = 0;
    for (int r = 0; r < reps; ++r) {
      const CellOutcome& cell = cells[static_cast<std::size_t>(k) * reps + r];
      if (!cell.ok) {
        ++row.n_failed;
        row.failures.push_back({r, cell.reason});
        continue;
      }
      ++row.n_ok;
      sum += cell.total;
      profile_len = std::max(profile_len, cell.profile.size());
      switch (cell.regime) {
        case Regime::kSaturated: ++row.regime_saturated; break;
        case Regime::kLinearEquivalent: ++row.regime_linear; break;
        case Regime::kIntermediate: ++row.regime_intermediate; break;
      }
    }
    if (row.n_ok == 0) {
      row.mc_mean = std::numeric_limits<double>::quiet_NaN();
      row.mc_sd = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    row.mc_mean = sum / row.n_ok;
    double squares = 0.0;
    // Early-stopped profiles are padded with zeros.
    row.mean_profile.assign(profile_len, 0.0);
    for (int r = 0; r < reps; ++r) {
      const CellOutcome& cell = cells[static_cast<std::size_t>(k) * reps + r];
      if (!cell.ok) continue;
      squares += (cell.total - row.mc_mean) * (cell.total - row.mc_mean);
      for (std::size_t tau = 0; tau < cell.profile.size(); ++tau) row.mean_profile[tau] += cell.profile[tau];
    }
    for (double& v : row.mean_profile) v /= row.n_ok;
    row.mc_sd = row.n_ok > 1 ? std::sqrt(squares / (row.n_ok - 1)) : 0.0;
  }
  return result;
}

void write_csv(std::ostream& out, const SweepResult& result) {
  if (result.rows.empty()) throw std::invalid_argument("write_csv: sweep result has an empty grid");
  out << kSweepCsvHeader << '\n';
  for (const auto& row : result.rows) {
    fmt::print(out, "{:.17g},{:.17g},{:.17g},{},{},{},{},{}\n", row.sigma, row.mc_mean, row.mc_sd,
               row.n_ok, row.n_failed, row.regime_saturated, row.regime_linear,
               row.regime_intermediate);
  }
}

void emit_csv(const SweepResult& result, const std::filesystem::path& path) {
  if (result.rows.empty()) throw std::invalid_argument("emit_csv: sweep result has an empty grid");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit_csv: cannot open '" + path.string() + "' for writing");
  write_csv(out, result);
  if (!out.flush()) throw std::runtime_error("emit_csv: write to '" + path.string() + "' failed");
}

std::vector<SigmaRow> parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kSweepCsvHeader)
    throw std::invalid_argument("parse_csv: missing or unexpected header");
  std::vector<SigmaRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string field; std::getline(ss, field, ',');) fields.push_back(field);
    if (fields.size() != 8)
      throw std::invalid_argument("parse_csv: expected 8 fields, got " + std::to_string(fields.size()));
    SigmaRow row;
    try {
      row.sigma = std::stod(fields[0]);
      row.mc_mean = std::stod(fields[1]);
      row.mc_sd = std::stod(fields[2]);
      row.n_ok = std::stoi(fields[3]);
      row.n_failed = std::stoi(fields[4]);
      row.regime_saturated = std::stoi(fields[5]);
      row.regime_linear = std::stoi(fields[6]);
      row.regime_intermediate = std::stoi(fields[7]);
    } catch (const std::exception&) {
      throw std::invalid_argument("parse_csv: malformed row '" + line + "'");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string to_json(const SweepResult& result) {
  using json = nlohmann::ordered_json;
  const SweepConfig& cfg = result.config;
  json j;
  j["format"] = "memcap.sweep";
  j["version"] = result.version;
  j["config"] = format_sweep_config(cfg);
  j["grid"] = {{"lower", result.grid_lower}, {"upper", result.grid_upper}, {"count", cfg.grid.count}};
  json rows = json::array();
  for (std::size_t k = 0; k < result.rows.size(); ++k) {
    const SigmaRow& row = result.rows[k];
    json seeds = json::array();
    for (int r = 0; r < cfg.replications; ++r) {
      seeds.push_back({{"reservoir", reservoir_seed(cfg, static_cast<int>(k), r)},
                       {"inputs", input_seed(cfg, static_cast<int>(k), r)}});
    }
    json failures = json::array();
    for (const auto& f : row.failures) failures.push_back({{"replication", f.replication}, {"reason", f.reason}});
    json entry = {{"sigma", row.sigma},
                  {"mc_mean", row.mc_mean},
                  {"mc_sd", row.mc_sd},
                  {"n_ok", row.n_ok},
                  {"n_failed", row.n_failed},
                  {"regime_saturated", row.regime_saturated},
                  {"regime_linear", row.regime_linear},
                  {"regime_intermediate", row.regime_intermediate},
                  {"seeds", std::move(seeds)},
                  {"failures", std::move(failures)}};
    if (cfg.keep_profiles) entry["mean_profile"] = row.mean_profile;
    rows.push_back(std::move(entry));
  }
  j["rows"] = std::move(rows);
  return j.dump(2) + "\n";
}

void emit_plot(const SweepResult& result, const std::filesystem::path& path) {
  if (result.rows.empty()) throw std::invalid_argument("emit_plot: sweep result has an empty grid");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit_plot: cannot open '" + path.string() + "' for writing");
  write_plot_svg(out, result);
  if (!out.flush()) throw std::runtime_error("emit_plot: write to '" + path.string() + "' failed");
}

}  // namespace memcap
