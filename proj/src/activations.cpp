#include "memcap/activations.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "json.hpp"
#include "tagged_params.hpp"

namespace memcap {
namespace {

double piecewise_sigmoid(const PiecewiseSigmoid& p, double x) {
  const double ax = std::abs(x);
  if (ax < p.delta) return x;
  if (ax > p.d) return std::copysign(1.0, x);
  const double h = p.d - p.delta;
  const double s = (ax - p.delta) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  // Hermite basis: value delta, slope 1 at s = 0; value 1, slope 0 at s = 1.
  const double y = (2.0 * s3 - 3.0 * s2 + 1.0) * p.delta + (s3 - 2.0 * s2 + s) * h +
                   (-2.0 * s3 + 3.0 * s2);
  return std::copysign(y, x);
}

double log_sig(double x) { return std::copysign(std::log1p(std::abs(x)), x); }

struct Evaluate {
  double x;
  double operator()(const PiecewiseSigmoid& p) const { return piecewise_sigmoid(p, x); }
  double operator()(const Tanh&) const { return std::tanh(x); }
  double operator()(const ReLU&) const { return x > 0.0 ? x : 0.0; }
  double operator()(const LogSig&) const { return log_sig(x); }
  double operator()(const Identity&) const { return x; }
};

}  // namespace

Activation::Activation(PiecewiseSigmoid p) : kind_(p) {
  if (!(p.delta > 0.0 && p.delta < 1.0))
    throw std::invalid_argument("piecewise sigmoid: delta must lie in (0, 1)");
  if (!(p.d > p.delta)) throw std::invalid_argument("piecewise sigmoid: d must exceed delta");
  // Fritsch-Carlson: the bridge is monotone iff its initial slope is at most
  // three times the secant slope (1 - delta) / (d - delta).
  if (p.d + 2.0 * p.delta > 3.0 + 1e-12)
    throw std::invalid_argument(
        "piecewise sigmoid: d + 2*delta must not exceed 3, otherwise the cubic bridge overshoots 1");
}

Activation Activation::parse(std::string_view text) {
  auto tagged = detail::parse_tagged(text);
  Activation out;
  if (tagged.name == "tanh") {
    out = Tanh{};
  } else if (tagged.name == "relu") {
    out = ReLU{};
  } else if (tagged.name == "logsig") {
    out = LogSig{};
  } else if (tagged.name == "identity" || tagged.name == "linear") {
    out = Identity{};
  } else if (tagged.name == "pws" || tagged.name == "piecewise") {
    PiecewiseSigmoid p;
    p.delta = tagged.take("delta", p.delta);
    p.d = tagged.take("d", p.d);
    out = Activation(p);
  } else {
    throw std::invalid_argument("unknown activation '" + tagged.name +
                                "' (expected tanh, relu, logsig, identity, pws:delta=..,d=..)");
  }
  tagged.expect_consumed();
  return out;
}

double Activation::operator()(double x) const {
  if (std::isnan(x)) throw std::invalid_argument("activation: NaN input");
  return std::visit(Evaluate{x}, kind_);
}

void Activation::apply_inplace(Eigen::Ref<Eigen::VectorXd> v) const {
  if (v.hasNaN()) throw std::invalid_argument("activation: NaN input");
  std::visit(
      [&v](const auto& k) {
        for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = Evaluate{v(i)}(k);
      },
      kind_);
}

bool Activation::operator==(const Activation& other) const {
  if (kind_.index() != other.kind_.index()) return false;
  const auto* a = piecewise();
  const auto* b = other.piecewise();
  return a == nullptr || (a->delta == b->delta && a->d == b->d);
}

double apply(const Activation& act, double x) { return act(x); }

Eigen::VectorXd apply_vector(const Activation& act, const Eigen::Ref<const Eigen::VectorXd>& v) {
  Eigen::VectorXd out = v;
  act.apply_inplace(out);
  return out;
}

bool is_saturating(const Activation& act) {
  return std::holds_alternative<PiecewiseSigmoid>(act.kind()) ||
         std::holds_alternative<Tanh>(act.kind());
}

std::optional<double> linear_radius(const Activation& act) {
  if (const auto* p = act.piecewise()) return p->delta;
  if (std::holds_alternative<Identity>(act.kind())) return std::numeric_limits<double>::infinity();
  return std::nullopt;
}

std::string to_string(const Activation& act) {
  struct Visitor {
    std::string operator()(const PiecewiseSigmoid& p) const {
      return "pws:delta=" + nlohmann::json(p.delta).dump() + ",d=" + nlohmann::json(p.d).dump();
    }
    std::string operator()(const Tanh&) const { return "tanh"; }
    std::string operator()(const ReLU&) const { return "relu"; }
    std::string operator()(const LogSig&) const { return "logsig"; }
    std::string operator()(const Identity&) const { return "identity"; }
  };
  return std::visit(Visitor{}, act.kind());
}

}  // namespace memcap
