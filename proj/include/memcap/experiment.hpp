#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "memcap/activations.hpp"
#include "memcap/dynamics.hpp"
#include "memcap/ensembles.hpp"

namespace memcap {

/// Plotting bounds used by the automatic grid for activations without an
/// exact linear/saturated decomposition (tanh, ReLU, LogSig, identity).
inline constexpr double kProxyDelta = 0.1;
inline constexpr double kProxySaturation = 10.0;

struct SigmaGrid {
  int count = 12;
  /// Explicit [lower, upper]; nullopt means the envelope of the regime
  /// thresholds over every reservoir in the sweep.
  std::optional<std::pair<double, double>> bounds;
};

struct SweepConfig {
  int n = 30;
  double spectral_norm = 0.95;
  Ensemble ensemble = OrthogonalGaussian{};
  Activation activation = Tanh{};
  SigmaGrid grid;
  int trajectory_length = 100000;
  std::optional<int> washout;   // default_washout(n)
  int replications = 10;
  std::optional<int> tau_max;   // default_tau_max(n)
  std::optional<double> ridge;  // relative default
  std::uint64_t base_seed = 0;
  /// Reuse reservoir r across all sigma values instead of redrawing per cell.
  bool fixed_reservoir = false;
  /// Keep the mean per-lag profile of every grid point.
  bool keep_profiles = false;
};

/// Throws std::invalid_argument on an inconsistent configuration.
void validate(const SweepConfig& cfg);

/// Key-value text (INI without sections, '#' or ';' comments):
///   n = 30
///   ensemble = sparse:sparsity=0.1,conditioning=0.7
///   activation = pws:delta=0.5,d=2
///   sigma_count = 12
///   sigma_bounds = auto        (or "1e-4, 10")
///   trajectory_length = 100000
///   replications = 10
///   base_seed = 7
SweepConfig parse_sweep_config(std::istream& in);
SweepConfig load_sweep_config(const std::filesystem::path& path);
std::string format_sweep_config(const SweepConfig& cfg);

/// Log-spaced grid from lower to upper inclusive.
std::vector<double> log_grid(double lower, double upper, int count);

/// Reservoir seed of cell (sigma_index, replication).
std::uint64_t reservoir_seed(const SweepConfig& cfg, int sigma_index, int replication);
/// Input seed of cell (sigma_index, replication).
std::uint64_t input_seed(const SweepConfig& cfg, int sigma_index, int replication);

struct CellFailure {
  int replication = 0;
  std::string reason;
};

struct SigmaRow {
  double sigma = 0.0;
  double mc_mean = 0.0;
  double mc_sd = 0.0;
  int n_ok = 0;
  int n_failed = 0;
  int regime_saturated = 0;
  int regime_linear = 0;
  int regime_intermediate = 0;
  std::vector<double> mean_profile;
  std::vector<CellFailure> failures;
};

struct SweepResult {
  SweepConfig config;
  double grid_lower = 0.0;
  double grid_upper = 0.0;
  std::vector<SigmaRow> rows;
  std::string version;
};

/// Runs every (sigma, replication) cell on `jobs` worker threads. Cell
/// failures are recorded per row; the output does not depend on `jobs`.
SweepResult run_sweep(const SweepConfig& cfg, int jobs = 1);

inline constexpr const char* kSweepCsvHeader =
    "sigma,mc_mean,mc_sd,n_ok,n_failed,regime_saturated,regime_linear,regime_intermediate";

void write_csv(std::ostream& out, const SweepResult& result);
void emit_csv(const SweepResult& result, const std::filesystem::path& path);
/// Inverse of write_csv for the numeric columns.
std::vector<SigmaRow> parse_csv(std::istream& in);

/// Config echo, provenance and per-row data including failures and profiles.
std::string to_json(const SweepResult& result);

/// Bar chart of mc_mean against log10(sigma) as SVG, with reference lines at
/// 1 and N.
void write_plot_svg(std::ostream& out, const SweepResult& result);
void emit_plot(const SweepResult& result, const std::filesystem::path& path);

}  // namespace memcap
