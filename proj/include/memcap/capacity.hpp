#pragma once

#include <optional>
#include <string>
#include <vector>

#include "memcap/dynamics.hpp"
#include "memcap/ensembles.hpp"

namespace memcap {

struct CapacityDiagnostics {
  /// Ratio of extreme eigenvalues of the (regularized) state covariance.
  double condition_estimate = 0.0;
  /// Per-lag values pulled back into [0, 1].
  int clip_count = 0;
  /// Sum of per-lag values before the total was clipped to [0, N].
  double raw_total = 0.0;
  /// Number of lags actually evaluated (tau = 0 .. lags_evaluated - 1).
  int lags_evaluated = 0;
  bool early_stopped = false;
  /// Finite-sample estimates may dip below the population floor of 1.
  bool below_lower_bound = false;
};

struct CapacityProfile {
  std::vector<double> per_lag;
  double total = 0.0;
  int tau_max = 0;
  /// Absolute ridge added to the state covariance.
  double ridge = 0.0;
  /// Input scale the profile was measured at (RMS of the inputs); NaN for
  /// the scale-free linear oracle.
  double sigma = 0.0;
  CapacityDiagnostics diagnostics;
};

/// min(3 N, 200)
int default_tau_max(int n);

/// Early stop once this many consecutive lags fall below kEarlyStopLevel.
inline constexpr int kEarlyStopRun = 10;
inline constexpr double kEarlyStopLevel = 1e-4;
/// Default ridge is this fraction of trace(Gamma_x) / N.
inline constexpr double kRelativeRidge = 1e-10;

struct EstimatorOptions {
  int tau_max = 0;  // 0 selects default_tau_max(N)
  /// Absolute ridge; nullopt selects kRelativeRidge * trace / N.
  std::optional<double> ridge;
  bool early_stop = true;
};

/// Normalized quadratic form c^T (Gamma_x + ridge I)^{-1} c / Var(z) with
/// c = Cov(x_t, z_{t - tau}) from the aligned pairs, clipped to [0, 1].
/// Throws std::invalid_argument when tau >= T - N, NumericalError when the
/// regularized covariance is numerically singular.
double estimate_mc_tau(const Trajectory& traj, int tau, std::optional<double> ridge = std::nullopt);

/// Sums estimate_mc_tau over tau = 0..tau_max sharing one factorization.
CapacityProfile estimate_total_mc(const Trajectory& traj, const EstimatorOptions& options = {});

/// Population memory profile of the linear network x_t = A x_{t-1} + C z_t,
/// with the state covariance from the discrete Lyapunov equation.
/// Independent of the input scale.
CapacityProfile linear_mc_oracle(const ReservoirSpec& spec, int tau_max);

/// Solves gamma = a gamma a^T + q by fixed-point iteration (requires |a|_2 < 1).
Matrix solve_lyapunov(const Matrix& a, const Matrix& q);

/// "sigma,total,tau_max,ridge,clip_count,mc_0,mc_1,..."
std::string format_profile_record(const CapacityProfile& profile);
std::string profile_record_header(const CapacityProfile& profile);

}  // namespace memcap
