#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

#include <Eigen/Dense>

namespace memcap {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Q factor of a Gaussian matrix.
struct OrthogonalGaussian {};

/// Gaussian entries kept with probability `sparsity`, then singular values
/// mapped affinely onto [conditioning * s_max, s_max].
struct SparseConditionedGaussian {
  double sparsity = 0.1;
  double conditioning = 0.7;
};

/// I.i.d. N(0, 1) entries.
struct DenseGaussian {};

using Ensemble = std::variant<OrthogonalGaussian, SparseConditionedGaussian, DenseGaussian>;

/// Accepts "orthogonal", "dense", "sparse" and "sparse:sparsity=0.1,conditioning=0.7".
Ensemble parse_ensemble(std::string_view text);
std::string to_string(const Ensemble& ensemble);

/// A sampled reservoir: connectivity A, input mask C, input shift xi.
struct ReservoirSpec {
  int n = 0;
  Matrix connectivity;
  Vector input_mask;
  Vector input_shift;
  Ensemble ensemble;
  double target_spectral_norm = 0.95;
  std::uint64_t seed = 0;

  /// Smallest absolute entry of the input mask.
  double mask_floor() const;
  /// Largest absolute entry of the input mask.
  double mask_ceiling() const;
};

Matrix sample_orthogonal(int n, std::uint64_t seed);
/// Gaussian entries, each kept independently with probability `sparsity`.
/// All-zero draws are resampled.
Matrix sample_sparse_gaussian(int n, double sparsity, std::uint64_t seed);
Matrix sample_sparse_conditioned(int n, double sparsity, double conditioning, std::uint64_t seed);
Matrix sample_dense_gaussian(int n, std::uint64_t seed);
Matrix sample_connectivity(int n, const Ensemble& ensemble, std::uint64_t seed);
Vector sample_input_mask(int n, std::uint64_t seed);

/// Largest singular value. Power iteration on m^T m, falling back to a full
/// SVD when the iteration stalls.
double spectral_norm(const Matrix& m);

/// Rescales m so that its spectral norm equals `target`.
Matrix normalize_spectral(const Matrix& m, double target);

double min_abs_entry(const Eigen::Ref<const Vector>& v);
double max_abs_entry(const Eigen::Ref<const Vector>& v);

/// Draws A from `ensemble`, normalizes it to `target_spectral_norm`, and
/// draws a Gaussian input mask. xi is zero.
ReservoirSpec sample_reservoir(int n, const Ensemble& ensemble, double target_spectral_norm,
                               std::uint64_t seed);

/// Self-describing JSON text with row-major matrix data.
std::string serialize_reservoir(const ReservoirSpec& spec);
ReservoirSpec deserialize_reservoir(std::string_view text);

}  // namespace memcap
