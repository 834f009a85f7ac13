#pragma once

#include <cstdint>
#include <iosfwd>

#include <Eigen/Dense>

#include "memcap/activations.hpp"
#include "memcap/ensembles.hpp"

namespace memcap {

/// i.i.d. rescaled Rademacher inputs z_t = sigma * zeta_t.
struct InputProcess {
  double sigma = 1.0;
  int length = 100000;
  int washout = 1000;
  std::uint64_t seed = 0;
};

/// max(1000, 10 n)
int default_washout(int n);

/// Post-washout inputs and states of x_t = phi(A x_{t-1} + C z_t + xi).
struct Trajectory {
  Vector inputs;            // length T
  Matrix states;            // T x N, row t is x_t
  Vector warm_state;        // the state preceding row 0
  Activation activation;
};

/// The `length` post-washout inputs. Washout inputs come from a separate
/// stream, so changing the washout leaves these untouched.
Vector generate_inputs(const InputProcess& process);
Vector generate_washout_inputs(const InputProcess& process);

/// Iterates the state map from x_init over the washout and then the
/// recorded window. Throws NumericalError naming the step on a non-finite
/// state.
Trajectory run(const ReservoirSpec& spec, const Activation& act, const InputProcess& process,
               const Vector& x_init);

/// Same recursion on explicit input sequences.
Trajectory run_inputs(const ReservoirSpec& spec, const Activation& act, const Vector& washout_inputs,
                      const Vector& inputs, const Vector& x_init);

/// x_t = A x_{t-1} + C z_t + xi over `inputs`, starting from `warm_state`.
Matrix replay_linear(const ReservoirSpec& spec, const Vector& inputs, const Vector& warm_state);

struct RegimeThresholds {
  /// Above this every state is extreme: (sqrt(N) |A|_2 + D) / c_min.
  double sigma_upper = 0.0;
  /// Below this the network is linear: delta (1 - |A|_2) / (sqrt(N) c_max).
  double sigma_lower = 0.0;
  /// (N max_ij |A_ij| + D) / c_min
  double sigma_upper_loose_entrywise = 0.0;
  /// (N max_i sum_j |A_ij| + D) / c_min
  double sigma_upper_loose_rowsum = 0.0;
  /// delta (1 - |A|_2) / c_max
  double sigma_lower_loose = 0.0;
};

/// Requires a piecewise sigmoid activation.
RegimeThresholds compute_thresholds(const ReservoirSpec& spec, const Activation& act);
/// Thresholds for explicit (delta, d); used as plotting bounds for
/// activations without exact linear/saturated pieces.
RegimeThresholds compute_thresholds(const ReservoirSpec& spec, double delta, double d);

struct ExtremeStates {
  Vector x_plus;
  Vector x_minus;
};

/// x_plus/minus = phi(+-C D / c_min) for the piecewise sigmoid.
ExtremeStates extreme_states(const ReservoirSpec& spec, const Activation& act);

enum class Regime { kSaturated, kLinearEquivalent, kIntermediate };

const char* to_string(Regime regime);

/// Absolute tolerance between the realized states and the linear replay.
inline constexpr double kLinearEquivalenceTolerance = 1e-12;
/// Relative tolerance to the extreme pair phi(+-C sigma) for activations
/// that only saturate asymptotically. The piecewise sigmoid is compared
/// exactly.
inline constexpr double kAsymptoticSaturationTolerance = 1e-4;

/// Saturated when every state equals the extreme state selected by
/// sign(z_t); linear-equivalent when the states match the linear replay to
/// kLinearEquivalenceTolerance; intermediate otherwise.
Regime classify_regime(const Trajectory& traj, const ReservoirSpec& spec, const Activation& act,
                       double sigma);

/// Columns t, z, x0..x{N-1}.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

}  // namespace memcap
