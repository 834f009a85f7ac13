#include <cmath>

#include "doctest.h"
#include "memcap/ensembles.hpp"

using namespace memcap;

namespace {

// Independent norm: largest singular value from a full SVD.
double svd_norm(const Matrix& m) { return Eigen::JacobiSVD<Matrix>(m).singularValues()(0); }

}  // namespace

TEST_SUITE("ensembles") {
  TEST_CASE("orthogonal: n = 1 is +-1") {
    const Matrix q = sample_orthogonal(1, 3);
    REQUIRE(q.rows() == 1);
    CHECK(std::abs(q(0, 0)) == doctest::Approx(1.0).epsilon(1e-15));
  }

  TEST_CASE("orthogonal: Q^T Q = I for many seeds") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
      for (int n : {2, 5, 30}) {
        const Matrix q = sample_orthogonal(n, seed);
        const double err = (q.transpose() * q - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
        CHECK(err <= 1e-10);
      }
    }
  }

  TEST_CASE("orthogonal: fixed seed reproduces bit-exactly") {
    const Matrix a = sample_orthogonal(30, 12345);
    const Matrix b = sample_orthogonal(30, 12345);
    CHECK((a.array() == b.array()).all());
    CHECK(!(a.array() == sample_orthogonal(30, 12346).array()).all());
  }

  TEST_CASE("sparse conditioned: ratio 1 forces equal singular values") {
    const Matrix m = sample_sparse_conditioned(2, 1.0, 1.0, 9);
    const Vector s = Eigen::JacobiSVD<Matrix>(m).singularValues();
    CHECK(s(1) / s(0) == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("sparse conditioned: singular value ratio equals conditioning") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const Matrix m = sample_sparse_conditioned(30, 0.1, 0.7, seed);
      const Vector s = Eigen::JacobiSVD<Matrix>(m).singularValues();
      CHECK(std::abs(s(29) / s(0) - 0.7) <= 1e-8);
    }
  }

  TEST_CASE("sparse draw: nonzero fraction tracks sparsity") {
    // Oracle: direct counting over 100 draws at n = 30 (90 000 entries).
    long nonzero = 0;
    long total = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const Matrix g = sample_sparse_gaussian(30, 0.1, seed);
      nonzero += (g.array() != 0.0).count();
      total += g.size();
    }
    const double fraction = static_cast<double>(nonzero) / total;
    CHECK(fraction >= 0.05);
    CHECK(fraction <= 0.15);
    CHECK(std::abs(fraction - 0.1) <= 6 * std::sqrt(0.1 * 0.9 / total));
  }

  TEST_CASE("sparse conditioned: rejects invalid parameters") {
    CHECK_THROWS_AS(sample_sparse_conditioned(1, 0.1, 0.7, 0), std::invalid_argument);
    CHECK_THROWS_AS(sample_sparse_conditioned(5, 0.0, 0.7, 0), std::invalid_argument);
    CHECK_THROWS_AS(sample_sparse_conditioned(5, 0.1, 1.5, 0), std::invalid_argument);
  }

  TEST_CASE("dense gaussian: determinism and entry mean") {
    CHECK(sample_dense_gaussian(1, 4).size() == 1);
    CHECK((sample_dense_gaussian(30, 77).array() == sample_dense_gaussian(30, 77).array()).all());
    for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
      // 900 entries, sd of the mean 1/30; 6 sigma = 0.2.
      CHECK(std::abs(sample_dense_gaussian(30, seed).mean()) <= 0.2);
    }
  }

  TEST_CASE("input mask: nonzero, deterministic, floor <= ceiling") {
    CHECK(sample_input_mask(1, 0)(0) != 0.0);
    const Vector c = sample_input_mask(30, 11);
    CHECK((c.array() == sample_input_mask(30, 11).array()).all());
    CHECK(min_abs_entry(c) > 0.0);
    CHECK(max_abs_entry(c) >= min_abs_entry(c));
  }

  TEST_CASE("spectral norm: hand-checkable cases") {
    Matrix diag = Matrix::Zero(2, 2);
    diag(0, 0) = 3.0;
    diag(1, 1) = -4.0;
    CHECK(spectral_norm(diag) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(spectral_norm(Matrix::Zero(3, 3)) == 0.0);

    Matrix nilpotent = Matrix::Zero(2, 2);
    nilpotent(0, 1) = 1.0;
    // Oracle: eigenvalues of m^T m = diag(0, 1).
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(nilpotent.transpose() * nilpotent);
    CHECK(spectral_norm(nilpotent) == doctest::Approx(std::sqrt(eig.eigenvalues().maxCoeff())).epsilon(1e-12));
    CHECK(spectral_norm(nilpotent) == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("spectral norm agrees with SVD on random matrices") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const Matrix m = sample_dense_gaussian(30, seed);
      CHECK(std::abs(spectral_norm(m) - svd_norm(m)) <= 1e-10 * svd_norm(m));
    }
  }

  TEST_CASE("normalize_spectral") {
    const Matrix id = Matrix::Identity(3, 3);
    CHECK((normalize_spectral(id, 0.95) - 0.95 * id).cwiseAbs().maxCoeff() <= 1e-15);

    const Matrix q = sample_orthogonal(6, 2);
    CHECK((normalize_spectral(q, 0.95) - 0.95 * q).cwiseAbs().maxCoeff() <= 1e-12);

    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const Matrix a = normalize_spectral(sample_dense_gaussian(30, seed), 0.95);
      CHECK(std::abs(svd_norm(a) - 0.95) <= 1e-10 * 0.95);
    }
    CHECK_THROWS_AS(normalize_spectral(Matrix::Zero(3, 3), 0.95), std::invalid_argument);
    CHECK_THROWS_AS(normalize_spectral(id, 1.0), std::invalid_argument);
  }

  TEST_CASE("min/max abs entry") {
    Vector v(3);
    v << -2.0, 0.5, 3.0;
    CHECK(min_abs_entry(v) == 0.5);
    CHECK(max_abs_entry(v) == 3.0);
    CHECK(min_abs_entry(Vector::Zero(4)) == 0.0);
    CHECK(max_abs_entry(Vector::Zero(4)) == 0.0);
    Vector single(1);
    single << -7.0;
    CHECK(min_abs_entry(single) == 7.0);
    CHECK(max_abs_entry(single) == 7.0);
    CHECK_THROWS_AS(min_abs_entry(Vector()), std::invalid_argument);
    CHECK_THROWS_AS(max_abs_entry(Vector()), std::invalid_argument);
  }

  TEST_CASE("sampled reservoirs hit the target norm for every ensemble") {
    const Ensemble ensembles[] = {OrthogonalGaussian{}, SparseConditionedGaussian{0.1, 0.7}, DenseGaussian{}};
    for (const auto& ensemble : ensembles) {
      for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const ReservoirSpec spec = sample_reservoir(30, ensemble, 0.95, seed);
        CHECK(std::abs(svd_norm(spec.connectivity) - 0.95) <= 1e-10 * 0.95);
        CHECK(spec.mask_floor() > 0.0);
        CHECK(spec.input_shift.isZero(0.0));
      }
    }
  }

  TEST_CASE("ensemble strings") {
    CHECK(std::holds_alternative<OrthogonalGaussian>(parse_ensemble("orthogonal")));
    CHECK(std::holds_alternative<DenseGaussian>(parse_ensemble("dense")));
    const auto sparse = std::get<SparseConditionedGaussian>(parse_ensemble("sparse:sparsity=0.2, conditioning=0.5"));
    CHECK(sparse.sparsity == 0.2);
    CHECK(sparse.conditioning == 0.5);
    CHECK(to_string(parse_ensemble(to_string(Ensemble{sparse}))) == to_string(Ensemble{sparse}));
    CHECK_THROWS_AS(parse_ensemble("wishart"), std::invalid_argument);
    CHECK_THROWS_AS(parse_ensemble("sparse:density=0.1"), std::invalid_argument);
  }

  TEST_CASE("reservoir serialization round-trips exactly") {
    const ReservoirSpec spec = sample_reservoir(7, SparseConditionedGaussian{0.3, 0.7}, 0.9, 99);
    const ReservoirSpec back = deserialize_reservoir(serialize_reservoir(spec));
    CHECK(back.n == spec.n);
    CHECK(back.seed == spec.seed);
    CHECK(back.target_spectral_norm == spec.target_spectral_norm);
    CHECK(to_string(back.ensemble) == to_string(spec.ensemble));
    CHECK((back.connectivity.array() == spec.connectivity.array()).all());
    CHECK((back.input_mask.array() == spec.input_mask.array()).all());
    CHECK((back.input_shift.array() == spec.input_shift.array()).all());
    CHECK(serialize_reservoir(spec).find("\"connectivity\"") != std::string::npos);
    CHECK_THROWS_AS(deserialize_reservoir("{}"), std::invalid_argument);
    CHECK_THROWS_AS(deserialize_reservoir("not json"), std::invalid_argument);
  }
}
