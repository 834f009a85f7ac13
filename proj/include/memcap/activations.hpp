#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include <Eigen/Dense>

namespace memcap {

/// Odd C^1 sigmoid that is the identity on (-delta, delta) and equals +-1
/// outside (-d, d). On [delta, d] it follows the cubic Hermite segment
/// through (delta, delta) with slope 1 and (d, 1) with slope 0.
struct PiecewiseSigmoid {
  double delta = 0.5;
  double d = 2.0;
};
struct Tanh {};
struct ReLU {};
/// sign(x) * log(1 + |x|)
struct LogSig {};
struct Identity {};

class Activation {
 public:
  using Kind = std::variant<PiecewiseSigmoid, Tanh, ReLU, LogSig, Identity>;

  Activation() : kind_(Identity{}) {}
  Activation(Tanh t) : kind_(t) {}
  Activation(ReLU r) : kind_(r) {}
  Activation(LogSig l) : kind_(l) {}
  Activation(Identity i) : kind_(i) {}
  /// Throws std::invalid_argument unless 0 < delta < 1, delta < d and the
  /// Hermite bridge is monotone (d + 2 delta <= 3).
  Activation(PiecewiseSigmoid p);

  /// "tanh", "relu", "logsig", "identity", "pws:delta=0.5,d=2".
  static Activation parse(std::string_view text);

  const Kind& kind() const noexcept { return kind_; }
  const PiecewiseSigmoid* piecewise() const noexcept { return std::get_if<PiecewiseSigmoid>(&kind_); }

  /// Throws std::invalid_argument on NaN.
  double operator()(double x) const;

  /// Elementwise, in place. NaN entries throw.
  void apply_inplace(Eigen::Ref<Eigen::VectorXd> v) const;

  bool operator==(const Activation& other) const;

 private:
  Kind kind_;
};

double apply(const Activation& act, double x);
Eigen::VectorXd apply_vector(const Activation& act, const Eigen::Ref<const Eigen::VectorXd>& v);

/// True for activations bounded by 1 that flatten out (piecewise sigmoid, tanh).
bool is_saturating(const Activation& act);

/// Half-width of the interval around 0 on which the activation is exactly
/// the identity: delta for the piecewise sigmoid, +inf for the identity,
/// none otherwise.
std::optional<double> linear_radius(const Activation& act);

std::string to_string(const Activation& act);

}  // namespace memcap
