#include "memcap/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "memcap/errors.hpp"

namespace memcap {
namespace {

constexpr double kMaxCondition = 1e15;
constexpr double kLyapunovTolerance = 1e-14;
constexpr int kLyapunovIterationLimit = 1000000;

// Eigendecomposition of a symmetric positive definite matrix, reused for
// every quadratic form c^T M^{-1} c.
class SpdInverseForm {
 public:
  SpdInverseForm(const Matrix& m, const char* what) : eig_(m) {
    if (eig_.info() != Eigen::Success)
      throw NumericalError(std::string(what) + ": eigendecomposition failed");
    const Vector& values = eig_.eigenvalues();
    const double lo = values.minCoeff();
    const double hi = values.maxCoeff();
    if (!(lo > 0.0) || hi / lo > kMaxCondition) {
      throw NumericalError(fmt::format(
          "{}: covariance is numerically singular (eigenvalues in [{:.3g}, {:.3g}]); "
          "increase the ridge",
          what, lo, hi));
    }
    condition_ = hi / lo;
  }

  double operator()(const Vector& c) const {
    const Vector projected = eig_.eigenvectors().transpose() * c;
    return (projected.array().square() / eig_.eigenvalues().array()).sum();
  }

  double condition() const { return condition_; }

 private:
  Eigen::SelfAdjointEigenSolver<Matrix> eig_;
  double condition_ = 0.0;
};

double clip_unit(double value, int& clip_count) {
  if (value > 1.0) {
    ++clip_count;
    return 1.0;
  }
  if (value < 0.0) {
    ++clip_count;
    return 0.0;
  }
  return value;
}

// Centered states, input variance and the factorized regularized state
// covariance of one trajectory.
class LagEstimator {
 public:
  LagEstimator(const Trajectory& traj, std::optional<double> ridge)
      : traj_(traj),
        centered_(traj.states.rowwise() - traj.states.colwise().mean()),
        input_variance_((traj.inputs.array() - traj.inputs.mean()).square().mean()),
        ridge_(0.0),
        form_(regularized(ridge), "estimate_mc_tau") {
    if (!(input_variance_ > 0.0)) throw NumericalError("estimate_mc_tau: inputs have zero variance");
  }

  double operator()(int tau) const {
    const Eigen::Index t_len = traj_.inputs.size();
    const Eigen::Index n = traj_.states.cols();
    if (tau < 0) throw std::invalid_argument("estimate_mc_tau: tau must be >= 0");
    if (tau >= t_len - n) {
      throw std::invalid_argument(fmt::format(
          "estimate_mc_tau: tau = {} needs T - tau >= N + 1 (T = {}, N = {})", tau, t_len, n));
    }
    const Eigen::Index pairs = t_len - tau;
    // Pairs (x_t, z_{t - tau}) for t = tau .. T - 1.
    const Vector lagged = traj_.inputs.head(pairs).array() - traj_.inputs.head(pairs).mean();
    const Vector cross = centered_.bottomRows(pairs).transpose() * lagged / static_cast<double>(pairs);
    return form_(cross) / input_variance_;
  }

  double ridge() const { return ridge_; }
  double condition() const { return form_.condition(); }

 private:
  Matrix regularized(std::optional<double> ridge) {
    const Eigen::Index t_len = traj_.states.rows();
    const Eigen::Index n = traj_.states.cols();
    if (traj_.inputs.size() != t_len || t_len < n + 1)
      throw std::invalid_argument("estimate_mc_tau: trajectory needs at least N + 1 aligned samples");
    Matrix gamma = centered_.transpose() * centered_ / static_cast<double>(t_len);
    if (ridge && *ridge < 0.0) throw std::invalid_argument("estimate_mc_tau: ridge must be >= 0");
    ridge_ = ridge ? *ridge : kRelativeRidge * gamma.trace() / static_cast<double>(n);
    gamma.diagonal().array() += ridge_;
    return gamma;
  }

  const Trajectory& traj_;
  Matrix centered_;
  double input_variance_;
  double ridge_;
  SpdInverseForm form_;
};

}  // namespace

int default_tau_max(int n) { return std::min(3 * n, 200); }

double estimate_mc_tau(const Trajectory& traj, int tau, std::optional<double> ridge) {
  int ignored = 0;
  return clip_unit(LagEstimator(traj, ridge)(tau), ignored);
}

CapacityProfile estimate_total_mc(const Trajectory& traj, const EstimatorOptions& options) {
  const int n = static_cast<int>(traj.states.cols());
  const int tau_max = options.tau_max > 0 ? options.tau_max : default_tau_max(n);
  const LagEstimator estimator(traj, options.ridge);

  CapacityProfile profile;
  profile.tau_max = tau_max;
  profile.ridge = estimator.ridge();
  profile.sigma = std::sqrt(traj.inputs.squaredNorm() / static_cast<double>(traj.inputs.size()));
  profile.diagnostics.condition_estimate = estimator.condition();

  int quiet_run = 0;
  for (int tau = 0; tau <= tau_max; ++tau) {
    const double value = clip_unit(estimator(tau), profile.diagnostics.clip_count);
    profile.per_lag.push_back(value);
    quiet_run = value < kEarlyStopLevel ? quiet_run + 1 : 0;
    if (options.early_stop && quiet_run >= kEarlyStopRun && tau < tau_max) {
      profile.diagnostics.early_stopped = true;
      break;
    }
  }

  double sum = 0.0;
  for (double v : profile.per_lag) sum += v;
  profile.diagnostics.raw_total = sum;
  profile.diagnostics.lags_evaluated = static_cast<int>(profile.per_lag.size());
  profile.total = std::clamp(sum, 0.0, static_cast<double>(n));
  profile.diagnostics.below_lower_bound = profile.total < 1.0;
  return profile;
}

Matrix solve_lyapunov(const Matrix& a, const Matrix& q) {
  if (a.rows() != a.cols() || q.rows() != a.rows() || q.cols() != a.cols())
    throw std::invalid_argument("solve_lyapunov: dimension mismatch");
  if (!(spectral_norm(a) < 1.0))
    throw NumericalError("solve_lyapunov: |A|_2 >= 1, fixed-point iteration does not converge");

  Matrix gamma = q;
  Matrix next(q.rows(), q.cols());
  for (int iter = 0; iter < kLyapunovIterationLimit; ++iter) {
    next.noalias() = a * gamma * a.transpose();
    next += q;
    const double change = (next - gamma).cwiseAbs().maxCoeff();
    gamma.swap(next);
    if (change <= kLyapunovTolerance * gamma.cwiseAbs().maxCoeff()) return gamma;
  }
  throw NumericalError("solve_lyapunov: no convergence within the iteration limit");
}

CapacityProfile linear_mc_oracle(const ReservoirSpec& spec, int tau_max) {
  if (tau_max < 0) throw std::invalid_argument("linear_mc_oracle: tau_max must be >= 0");
  const Matrix& a = spec.connectivity;
  const Vector& c = spec.input_mask;
  const Matrix gamma = solve_lyapunov(a, c * c.transpose());
  const SpdInverseForm form(gamma, "linear_mc_oracle");

  CapacityProfile profile;
  profile.tau_max = tau_max;
  profile.sigma = std::numeric_limits<double>::quiet_NaN();
  profile.diagnostics.condition_estimate = form.condition();

  Vector response = c;  // A^tau C
  double sum = 0.0;
  for (int tau = 0; tau <= tau_max; ++tau) {
    const double value = clip_unit(form(response), profile.diagnostics.clip_count);
    profile.per_lag.push_back(value);
    sum += value;
    response = a * response;
  }
  profile.diagnostics.raw_total = sum;
  profile.diagnostics.lags_evaluated = tau_max + 1;
  profile.total = std::clamp(sum, 0.0, static_cast<double>(spec.n));
  profile.diagnostics.below_lower_bound = profile.total < 1.0;
  return profile;
}

std::string profile_record_header(const CapacityProfile& profile) {
  std::string out = "sigma,total,tau_max,ridge,clip_count";
  for (std::size_t tau = 0; tau < profile.per_lag.size(); ++tau) out += fmt::format(",mc_{}", tau);
  return out;
}

std::string format_profile_record(const CapacityProfile& profile) {
  std::string out = fmt::format("{:.17g},{:.17g},{},{:.17g},{}", profile.sigma, profile.total,
                                profile.tau_max, profile.ridge, profile.diagnostics.clip_count);
  for (double v : profile.per_lag) out += fmt::format(",{:.17g}", v);
  return out;
}

}  // namespace memcap
