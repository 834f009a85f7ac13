#include "memcap/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "memcap/errors.hpp"
#include "memcap/random.hpp"

namespace memcap {
namespace {

Vector rademacher(double sigma, int length, Philox4x32 rng) {
  Vector z(length);
  for (int t = 0; t < length; ++t) z(t) = rng.bit() ? sigma : -sigma;
  return z;
}

void check_process(const InputProcess& p) {
  if (!(p.sigma > 0.0) || !std::isfinite(p.sigma))
    throw std::invalid_argument("input process: sigma must be positive and finite");
  if (p.length < 1) throw std::invalid_argument("input process: length must be >= 1");
  if (p.washout < 0) throw std::invalid_argument("input process: washout must be >= 0");
}

void check_dimensions(const ReservoirSpec& spec, const Vector& x) {
  const auto n = static_cast<Eigen::Index>(spec.n);
  if (spec.connectivity.rows() != n || spec.connectivity.cols() != n ||
      spec.input_mask.size() != n || spec.input_shift.size() != n) {
    throw std::invalid_argument("reservoir: A, C, xi dimensions disagree with n");
  }
  if (x.size() != n) throw std::invalid_argument("initial state has the wrong dimension");
}

// One step of the recursion. Kept in a single place so the nonlinear run and
// the linear replay perform bit-identical arithmetic.
inline void pre_activation(const ReservoirSpec& spec, const Vector& prev, double z, Vector& out) {
  out.noalias() = spec.connectivity * prev;
  out += spec.input_mask * z;
  out += spec.input_shift;
}

}  // namespace

int default_washout(int n) { return std::max(1000, 10 * n); }

Vector generate_inputs(const InputProcess& process) {
  check_process(process);
  return rademacher(process.sigma, process.length, Philox4x32(process.seed, Stream::kInputs));
}

Vector generate_washout_inputs(const InputProcess& process) {
  check_process(process);
  return rademacher(process.sigma, process.washout,
                    Philox4x32(process.seed, Stream::kWashoutInputs));
}

Trajectory run(const ReservoirSpec& spec, const Activation& act, const InputProcess& process,
               const Vector& x_init) {
  return run_inputs(spec, act, generate_washout_inputs(process), generate_inputs(process), x_init);
}

Trajectory run_inputs(const ReservoirSpec& spec, const Activation& act, const Vector& washout_inputs,
                      const Vector& inputs, const Vector& x_init) {
  check_dimensions(spec, x_init);
  if (inputs.size() == 0) throw std::invalid_argument("run: empty input sequence");

  Vector x = x_init;
  Vector pre(spec.n);
  auto step = [&](double z, Eigen::Index t) {
    pre_activation(spec, x, z, pre);
    if (!pre.allFinite()) {
      throw NumericalError("run: non-finite state at step " + std::to_string(t) +
                           " (washout steps are counted first)");
    }
    act.apply_inplace(pre);
    x.swap(pre);
  };

  for (Eigen::Index t = 0; t < washout_inputs.size(); ++t) step(washout_inputs(t), t);

  Trajectory traj;
  traj.activation = act;
  traj.inputs = inputs;
  traj.warm_state = x;
  traj.states.resize(inputs.size(), spec.n);
  for (Eigen::Index t = 0; t < inputs.size(); ++t) {
    step(inputs(t), washout_inputs.size() + t);
    traj.states.row(t) = x.transpose();
  }
  return traj;
}

Matrix replay_linear(const ReservoirSpec& spec, const Vector& inputs, const Vector& warm_state) {
  check_dimensions(spec, warm_state);
  Matrix states(inputs.size(), spec.n);
  Vector x = warm_state;
  Vector pre(spec.n);
  for (Eigen::Index t = 0; t < inputs.size(); ++t) {
    pre_activation(spec, x, inputs(t), pre);
    x.swap(pre);
    states.row(t) = x.transpose();
  }
  return states;
}

RegimeThresholds compute_thresholds(const ReservoirSpec& spec, const Activation& act) {
  const auto* p = act.piecewise();
  if (p == nullptr)
    throw std::invalid_argument("compute_thresholds: requires a piecewise sigmoid activation");
  return compute_thresholds(spec, p->delta, p->d);
}

RegimeThresholds compute_thresholds(const ReservoirSpec& spec, double delta, double d) {
  if (!(delta > 0.0 && d > delta))
    throw std::invalid_argument("compute_thresholds: need 0 < delta < d");
  const double c_min = spec.mask_floor();
  const double c_max = spec.mask_ceiling();
  if (!(c_min > 0.0))
    throw std::invalid_argument(
        "compute_thresholds: input mask has a zero entry (dense-mask assumption min|C_i| > 0 fails)");
  const double a_norm = spectral_norm(spec.connectivity);
  if (!(a_norm < 1.0))
    throw std::invalid_argument("compute_thresholds: |A|_2 = " + std::to_string(a_norm) +
                                " >= 1 violates the echo state condition");

  const double n = static_cast<double>(spec.n);
  const double root_n = std::sqrt(n);
  const double entry_max = spec.connectivity.cwiseAbs().maxCoeff();
  const double row_sum_max = spec.connectivity.cwiseAbs().rowwise().sum().maxCoeff();

  RegimeThresholds out;
  out.sigma_upper = (root_n * a_norm + d) / c_min;
  out.sigma_lower = delta * (1.0 - a_norm) / (root_n * c_max);
  out.sigma_upper_loose_entrywise = (n * entry_max + d) / c_min;
  out.sigma_upper_loose_rowsum = (n * row_sum_max + d) / c_min;
  out.sigma_lower_loose = delta * (1.0 - a_norm) / c_max;
  return out;
}

ExtremeStates extreme_states(const ReservoirSpec& spec, const Activation& act) {
  const auto* p = act.piecewise();
  if (p == nullptr)
    throw std::invalid_argument("extreme_states: requires a piecewise sigmoid activation");
  const double c_min = spec.mask_floor();
  if (!(c_min > 0.0))
    throw std::invalid_argument("extreme_states: input mask has a zero entry");

  // |C_i| / c_min >= 1 exactly in floating point, so every argument clears D.
  const Vector scaled = spec.input_mask.cwiseAbs() / c_min * p->d;
  const Vector signs = spec.input_mask.cwiseSign();
  ExtremeStates out;
  out.x_plus = apply_vector(act, signs.cwiseProduct(scaled));
  out.x_minus = apply_vector(act, -signs.cwiseProduct(scaled));
  if (!((out.x_plus.array().abs() == 1.0).all() && (out.x_minus.array().abs() == 1.0).all())) {
    throw std::logic_error("extreme_states: scaled mask failed to saturate");
  }
  return out;
}

const char* to_string(Regime regime) {
  switch (regime) {
    case Regime::kSaturated:
      return "saturated";
    case Regime::kLinearEquivalent:
      return "linear";
    case Regime::kIntermediate:
      return "intermediate";
  }
  return "unknown";
}

Regime classify_regime(const Trajectory& traj, const ReservoirSpec& spec, const Activation& act,
                       double sigma) {
  Vector x_plus;
  Vector x_minus;
  double tolerance = 0.0;
  if (act.piecewise() != nullptr && spec.mask_floor() > 0.0) {
    auto extremes = extreme_states(spec, act);
    x_plus = std::move(extremes.x_plus);
    x_minus = std::move(extremes.x_minus);
  } else {
    x_plus = apply_vector(act, spec.input_mask * sigma + spec.input_shift);
    x_minus = apply_vector(act, -spec.input_mask * sigma + spec.input_shift);
    tolerance = kAsymptoticSaturationTolerance *
                std::max(x_plus.cwiseAbs().maxCoeff(), x_minus.cwiseAbs().maxCoeff());
  }

  bool saturated = true;
  for (Eigen::Index t = 0; t < traj.states.rows() && saturated; ++t) {
    const Vector& reference = traj.inputs(t) > 0.0 ? x_plus : x_minus;
    saturated = (traj.states.row(t).transpose() - reference).cwiseAbs().maxCoeff() <= tolerance;
  }
  if (saturated) return Regime::kSaturated;

  const Matrix linear = replay_linear(spec, traj.inputs, traj.warm_state);
  if ((linear - traj.states).cwiseAbs().maxCoeff() <= kLinearEquivalenceTolerance)
    return Regime::kLinearEquivalent;
  return Regime::kIntermediate;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << "t,z";
  for (Eigen::Index i = 0; i < traj.states.cols(); ++i) out << ",x" << i;
  out << '\n';
  for (Eigen::Index t = 0; t < traj.states.rows(); ++t) {
    fmt::print(out, "{},{:.17g}", t, traj.inputs(t));
    for (Eigen::Index i = 0; i < traj.states.cols(); ++i) fmt::print(out, ",{:.17g}", traj.states(t, i));
    out << '\n';
  }
}

}  // namespace memcap
