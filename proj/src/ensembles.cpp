#include "memcap/ensembles.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "json.hpp"

#include "memcap/errors.hpp"
#include "memcap/random.hpp"
#include "tagged_params.hpp"

namespace memcap {
namespace {

constexpr int kMaxResamples = 16;
constexpr int kPowerIterationLimit = 5000;
constexpr double kPowerIterationTolerance = 1e-12;

void require_dimension(int n, int minimum, const char* what) {
  if (n < minimum) {
    throw std::invalid_argument(std::string(what) + ": dimension must be >= " +
                                std::to_string(minimum) + ", got " + std::to_string(n));
  }
}

Matrix gaussian_matrix(int n, Philox4x32& rng) {
  std::normal_distribution<double> normal;
  Matrix g(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) g(i, j) = normal(rng);
  return g;
}

}  // namespace

Ensemble parse_ensemble(std::string_view text) {
  auto tagged = detail::parse_tagged(text);
  Ensemble out;
  if (tagged.name == "orthogonal" || tagged.name == "ortho") {
    out = OrthogonalGaussian{};
  } else if (tagged.name == "dense" || tagged.name == "normal" || tagged.name == "gaussian") {
    out = DenseGaussian{};
  } else if (tagged.name == "sparse") {
    SparseConditionedGaussian sparse;
    sparse.sparsity = tagged.take("sparsity", sparse.sparsity);
    sparse.conditioning = tagged.take("conditioning", sparse.conditioning);
    if (!(sparse.sparsity > 0.0 && sparse.sparsity <= 1.0))
      throw std::invalid_argument("sparse ensemble: sparsity must lie in (0, 1]");
    if (!(sparse.conditioning > 0.0 && sparse.conditioning <= 1.0))
      throw std::invalid_argument("sparse ensemble: conditioning must lie in (0, 1]");
    out = sparse;
  } else {
    throw std::invalid_argument("unknown ensemble '" + tagged.name +
                                "' (expected orthogonal, sparse, dense)");
  }
  tagged.expect_consumed();
  return out;
}

std::string to_string(const Ensemble& ensemble) {
  struct Visitor {
    std::string operator()(const OrthogonalGaussian&) const { return "orthogonal"; }
    std::string operator()(const DenseGaussian&) const { return "dense"; }
    std::string operator()(const SparseConditionedGaussian& s) const {
      return "sparse:sparsity=" + nlohmann::json(s.sparsity).dump() +
             ",conditioning=" + nlohmann::json(s.conditioning).dump();
    }
  };
  return std::visit(Visitor{}, ensemble);
}

double ReservoirSpec::mask_floor() const { return min_abs_entry(input_mask); }
double ReservoirSpec::mask_ceiling() const { return max_abs_entry(input_mask); }

Matrix sample_orthogonal(int n, std::uint64_t seed) {
  require_dimension(n, 1, "sample_orthogonal");
  for (int attempt = 0; attempt < kMaxResamples; ++attempt) {
    Philox4x32 rng(seed, Stream::kMatrix, static_cast<std::uint32_t>(attempt));
    const Matrix g = gaussian_matrix(n, rng);
    // Householder QR with the sign convention diag(R) > 0 yields the same Q
    // as Gram-Schmidt on the columns of g.
    Eigen::HouseholderQR<Matrix> qr(g);
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    const Eigen::VectorXd diag = r.diagonal().cwiseAbs();
    if (diag.minCoeff() <= 1e-12 * diag.maxCoeff()) continue;
    Matrix q = qr.householderQ();
    for (int j = 0; j < n; ++j)
      if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    return q;
  }
  throw NumericalError("sample_orthogonal: rank-deficient Gaussian draws exhausted retries");
}

Matrix sample_sparse_gaussian(int n, double sparsity, std::uint64_t seed) {
  require_dimension(n, 1, "sample_sparse_gaussian");
  if (!(sparsity > 0.0 && sparsity <= 1.0))
    throw std::invalid_argument("sample_sparse_gaussian: sparsity must lie in (0, 1]");
  for (int attempt = 0; attempt < kMaxResamples; ++attempt) {
    Philox4x32 rng(seed, Stream::kMatrix, static_cast<std::uint32_t>(attempt));
    std::normal_distribution<double> normal;
    Matrix g(n, n);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        const bool keep = rng.uniform() < sparsity;
        const double value = normal(rng);
        g(i, j) = keep ? value : 0.0;
      }
    }
    if (!g.isZero(0.0)) return g;
  }
  throw NumericalError("sample_sparse_gaussian: all-zero draws exhausted retries");
}

Matrix sample_sparse_conditioned(int n, double sparsity, double conditioning, std::uint64_t seed) {
  require_dimension(n, 2, "sample_sparse_conditioned");
  if (!(conditioning > 0.0 && conditioning <= 1.0))
    throw std::invalid_argument("sample_sparse_conditioned: conditioning must lie in (0, 1]");
  const Matrix g = sample_sparse_gaussian(n, sparsity, seed);

  Eigen::JacobiSVD<Matrix> svd(g, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Vector s = svd.singularValues();
  if (!s.allFinite())
    throw NumericalError("sample_sparse_conditioned: SVD produced non-finite singular values");
  const double s_max = s(0);
  const double s_min = s(n - 1);
  // Affine, order-preserving map of [s_min, s_max] onto [conditioning * s_max, s_max].
  if (s_max - s_min > 0.0) {
    s = (s_max * (conditioning + (1.0 - conditioning) * ((s.array() - s_min) / (s_max - s_min))))
            .matrix();
  } else {
    s.setConstant(s_max);
  }
  return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

Matrix sample_dense_gaussian(int n, std::uint64_t seed) {
  require_dimension(n, 1, "sample_dense_gaussian");
  Philox4x32 rng(seed, Stream::kMatrix);
  return gaussian_matrix(n, rng);
}

Matrix sample_connectivity(int n, const Ensemble& ensemble, std::uint64_t seed) {
  struct Visitor {
    int n;
    std::uint64_t seed;
    Matrix operator()(const OrthogonalGaussian&) const { return sample_orthogonal(n, seed); }
    Matrix operator()(const DenseGaussian&) const { return sample_dense_gaussian(n, seed); }
    Matrix operator()(const SparseConditionedGaussian& s) const {
      return sample_sparse_conditioned(n, s.sparsity, s.conditioning, seed);
    }
  };
  return std::visit(Visitor{n, seed}, ensemble);
}

Vector sample_input_mask(int n, std::uint64_t seed) {
  require_dimension(n, 1, "sample_input_mask");
  for (int attempt = 0; attempt < kMaxResamples; ++attempt) {
    Philox4x32 rng(seed, Stream::kMask, static_cast<std::uint32_t>(attempt));
    std::normal_distribution<double> normal;
    Vector c(n);
    for (int i = 0; i < n; ++i) c(i) = normal(rng);
    if ((c.array() != 0.0).all()) return c;
  }
  throw NumericalError("sample_input_mask: zero entries on every resample");
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  const double scale = m.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  if (!std::isfinite(scale)) throw std::invalid_argument("spectral_norm: non-finite entries");

  const Matrix a = m / scale;
  Philox4x32 rng(0x5eed, Stream::kPowerIteration);
  std::normal_distribution<double> normal;
  Vector v(a.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = normal(rng);
  v.normalize();

  for (int iter = 0; iter < kPowerIterationLimit; ++iter) {
    const Vector w = a.transpose() * (a * v);
    const double lambda = v.dot(w);
    if (!(lambda > 0.0)) break;
    const double residual = (w - lambda * v).norm();
    if (residual <= kPowerIterationTolerance * lambda) return scale * std::sqrt(lambda);
    v = w / w.norm();
  }
  Eigen::JacobiSVD<Matrix> svd(a);
  return scale * svd.singularValues()(0);
}

Matrix normalize_spectral(const Matrix& m, double target) {
  if (!(target > 0.0 && target < 1.0))
    throw std::invalid_argument("normalize_spectral: target must lie in (0, 1)");
  const double norm = spectral_norm(m);
  if (norm == 0.0) throw std::invalid_argument("normalize_spectral: zero matrix");
  return m * (target / norm);
}

double min_abs_entry(const Eigen::Ref<const Vector>& v) {
  if (v.size() == 0) throw std::invalid_argument("min_abs_entry: empty vector");
  return v.cwiseAbs().minCoeff();
}

double max_abs_entry(const Eigen::Ref<const Vector>& v) {
  if (v.size() == 0) throw std::invalid_argument("max_abs_entry: empty vector");
  return v.cwiseAbs().maxCoeff();
}

ReservoirSpec sample_reservoir(int n, const Ensemble& ensemble, double target_spectral_norm,
                               std::uint64_t seed) {
  ReservoirSpec spec;
  spec.n = n;
  spec.ensemble = ensemble;
  spec.target_spectral_norm = target_spectral_norm;
  spec.seed = seed;
  spec.connectivity = normalize_spectral(sample_connectivity(n, ensemble, seed), target_spectral_norm);
  spec.input_mask = sample_input_mask(n, seed);
  spec.input_shift = Vector::Zero(n);
  return spec;
}

std::string serialize_reservoir(const ReservoirSpec& spec) {
  nlohmann::ordered_json j;
  j["format"] = "memcap.reservoir";
  j["version"] = 1;
  j["n"] = spec.n;
  j["ensemble"] = to_string(spec.ensemble);
  j["target_spectral_norm"] = spec.target_spectral_norm;
  j["seed"] = spec.seed;
  auto rows = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < spec.connectivity.rows(); ++i) {
    auto row = nlohmann::ordered_json::array();
    for (Eigen::Index k = 0; k < spec.connectivity.cols(); ++k) row.push_back(spec.connectivity(i, k));
    rows.push_back(std::move(row));
  }
  j["connectivity"] = std::move(rows);
  j["input_mask"] = std::vector<double>(spec.input_mask.data(), spec.input_mask.data() + spec.input_mask.size());
  j["input_shift"] =
      std::vector<double>(spec.input_shift.data(), spec.input_shift.data() + spec.input_shift.size());
  return j.dump(1) + "\n";
}

ReservoirSpec deserialize_reservoir(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("reservoir: malformed JSON: ") + e.what());
  }
  if (j.value("format", "") != "memcap.reservoir")
    throw std::invalid_argument("reservoir: missing or wrong 'format' tag");
  try {
    ReservoirSpec spec;
    spec.n = j.at("n").get<int>();
    spec.ensemble = parse_ensemble(j.at("ensemble").get<std::string>());
    spec.target_spectral_norm = j.at("target_spectral_norm").get<double>();
    spec.seed = j.at("seed").get<std::uint64_t>();
    const auto& rows = j.at("connectivity");
    if (spec.n < 1 || rows.size() != static_cast<std::size_t>(spec.n))
      throw std::invalid_argument("reservoir: connectivity must have n rows");
    spec.connectivity.resize(spec.n, spec.n);
    for (int i = 0; i < spec.n; ++i) {
      const auto row = rows.at(i).get<std::vector<double>>();
      if (row.size() != static_cast<std::size_t>(spec.n))
        throw std::invalid_argument("reservoir: connectivity row " + std::to_string(i) + " has wrong length");
      for (int k = 0; k < spec.n; ++k) spec.connectivity(i, k) = row[k];
    }
    const auto mask = j.at("input_mask").get<std::vector<double>>();
    const auto shift = j.value("input_shift", std::vector<double>(spec.n, 0.0));
    if (mask.size() != static_cast<std::size_t>(spec.n) || shift.size() != mask.size())
      throw std::invalid_argument("reservoir: input_mask/input_shift must have n entries");
    spec.input_mask = Eigen::Map<const Vector>(mask.data(), spec.n);
    spec.input_shift = Eigen::Map<const Vector>(shift.data(), spec.n);
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("reservoir: ") + e.what());
  }
}

}  // namespace memcap
