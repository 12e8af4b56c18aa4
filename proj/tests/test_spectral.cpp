#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "isocl/spectral.hpp"
#include "expect_error.hpp"
#include "oracles.hpp"

namespace {

using isocl::ErrorKind;
using isocl::FeatureMatrix;
using isocl::Matrix;
using isocl::Vector;
using isocl::testing::expect_error;
using Eigen::Vector2d;
namespace t = isocl::testing;

Matrix cols2(std::initializer_list<std::pair<double, double>> pts) {
  Matrix m(2, static_cast<Eigen::Index>(pts.size()));
  Eigen::Index j = 0;
  for (auto [a, b] : pts) {
    m(0, j) = a;
    m(1, j) = b;
    ++j;
  }
  return m;
}

TEST(FeatureMatrixTest, RejectsNonFiniteAndBadLabels) {
  Matrix m = Matrix::Ones(2, 3);
  m(1, 2) = std::numeric_limits<double>::quiet_NaN();
  expect_error(ErrorKind::InvalidInput, [&] { FeatureMatrix x(m); });
  expect_error(ErrorKind::InvalidInput, [&] { FeatureMatrix x(Matrix::Ones(2, 3), std::vector<int>{0, 1}); });
  expect_error(ErrorKind::InvalidInput, [&] { FeatureMatrix x(Matrix::Ones(2, 2), std::vector<int>{0, -1}); });
}

TEST(FeatureMatrixTest, ClassesAreSortedAndDistinct) {
  FeatureMatrix x(Matrix::Zero(1, 5), std::vector<int>{3, 1, 3, 0, 1});
  EXPECT_EQ(x.classes(), (std::vector<int>{0, 1, 3}));
  EXPECT_TRUE(FeatureMatrix(Matrix::Zero(1, 2)).classes().empty());
}

TEST(CenterTest, SingleSampleBecomesZero) {
  const FeatureMatrix c = isocl::center(FeatureMatrix(Matrix::Ones(2, 1)));
  EXPECT_EQ(c.data(), Matrix::Zero(2, 1));
}

TEST(CenterTest, SymmetricPair) {
  const FeatureMatrix c = isocl::center(FeatureMatrix(cols2({{0, 0}, {2, 0}})));
  EXPECT_EQ(c.data(), cols2({{-1, 0}, {1, 0}}));
}

TEST(CenterTest, RowSumsVanish) {
  auto rng = t::make_rng(1);
  const FeatureMatrix c = isocl::center(FeatureMatrix(t::random_gaussian(4, 50, rng, 3.0)));
  for (Eigen::Index i = 0; i < 4; ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < 50; ++j) s += c.data()(i, j);
    EXPECT_NEAR(s, 0.0, 1e-12);
  }
}

TEST(CenterTest, KeepsLabels) {
  const FeatureMatrix c = isocl::center(FeatureMatrix(Matrix::Ones(2, 2), std::vector<int>{4, 5}));
  ASSERT_TRUE(c.has_labels());
  EXPECT_EQ(*c.labels(), (std::vector<int>{4, 5}));
}

TEST(CenterTest, EmptyIsInvalid) {
  expect_error(ErrorKind::InvalidInput, [] { isocl::center(FeatureMatrix(Matrix(2, 0))); });
  expect_error(ErrorKind::InvalidInput, [] { isocl::center(FeatureMatrix(Matrix(0, 3))); });
}

TEST(CovarianceTest, TwoPointExamples) {
  EXPECT_EQ(isocl::covariance(cols2({{1, 0}, {-1, 0}})).sigma, Matrix(Vector2d(1, 0).asDiagonal()));
  const auto c = isocl::covariance(cols2({{0, 0}, {0, 2}}));
  EXPECT_EQ(c.sigma, Matrix(Vector2d(0, 1).asDiagonal()));
  EXPECT_EQ(c.sample_count, 2);
}

TEST(CovarianceTest, MatchesDoubleLoopOracle) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto rng = t::make_rng(seed);
    const Matrix x = t::random_gaussian(3, 200, rng, 2.0);
    EXPECT_LE((isocl::covariance(x).sigma - t::naive_covariance(x)).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(CovarianceTest, Errors) {
  expect_error(ErrorKind::InvalidInput, [] { isocl::covariance(Matrix(Matrix::Ones(3, 1))); });
  Matrix bad = Matrix::Ones(2, 3);
  bad(0, 0) = std::numeric_limits<double>::infinity();
  expect_error(ErrorKind::InvalidInput, [&] { isocl::covariance(bad); });
}

TEST(CovarianceTest, CenteringIsIdempotent) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto rng = t::make_rng(100 + seed);
    const FeatureMatrix x(t::random_gaussian(5, 40, rng, 4.0).array() + 7.0);
    const Matrix a = isocl::covariance(x).sigma;
    const Matrix b = isocl::covariance(isocl::center(x)).sigma;
    EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(CovarianceTest, TraceEqualsMeanSquaredDeviationAndSpectrumSum) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto rng = t::make_rng(200 + seed);
    const Matrix x = t::random_gaussian(6, 30, rng);
    const Vector mean = x.rowwise().mean();
    const double msd = (x.colwise() - mean).squaredNorm() / 30.0;
    const auto c = isocl::covariance(x);
    EXPECT_NEAR(c.sigma.trace(), msd, 1e-12 * msd);
    const auto s = isocl::eig_spectrum(c);
    EXPECT_NEAR(s.gammas.sum(), msd, 1e-9 * msd);
    EXPECT_NEAR(s.trace, msd, 1e-9 * msd);
  }
}

isocl::CovarianceMatrix as_cov(const Matrix& m) { return {m, 10}; }

TEST(EigSpectrumTest, IdentityAndDiagonal) {
  const auto s = isocl::eig_spectrum(as_cov(Matrix::Identity(5, 5)));
  ASSERT_EQ(s.dimension(), 5);
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(s.gammas[i], 1.0, 1e-15);
  const auto d = isocl::eig_spectrum(as_cov(Matrix(Vector2d(1, 4).asDiagonal())));
  EXPECT_NEAR(d.gammas[0], 4.0, 1e-15);
  EXPECT_NEAR(d.gammas[1], 1.0, 1e-15);
}

TEST(EigSpectrumTest, MatchesCharacteristicPolynomialRoots) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    auto rng = t::make_rng(300 + seed);
    const Matrix g = t::random_gaussian(3, 3, rng);
    const Matrix a = g * g.transpose();  // PSD so nothing is clamped
    const auto roots = t::charpoly_eigenvalues_3x3(a);
    const auto s = isocl::eig_spectrum(as_cov(a));
    ASSERT_EQ(roots.size(), 3u) << "seed " << seed;
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(s.gammas[i], roots[static_cast<std::size_t>(i)], 1e-8);
  }
}

TEST(EigSpectrumTest, DescendingAndClamped) {
  // Rank-2 covariance in D = 4: tiny negative rounding must clamp to exactly 0.
  auto rng = t::make_rng(7);
  const Matrix b = t::random_gaussian(4, 2, rng);
  const auto s = isocl::eig_spectrum(as_cov(b * b.transpose()));
  for (int i = 0; i + 1 < 4; ++i) EXPECT_GE(s.gammas[i], s.gammas[i + 1]);
  EXPECT_EQ(s.gammas[2], 0.0);
  EXPECT_EQ(s.gammas[3], 0.0);
}

TEST(EigSpectrumTest, RotationInvariance) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto rng = t::make_rng(400 + seed);
    const Matrix g = t::random_gaussian(6, 6, rng);
    const Matrix sigma = g * g.transpose();
    const Matrix q = t::random_orthogonal(6, rng);
    const auto a = isocl::eig_spectrum(as_cov(sigma));
    const auto b = isocl::eig_spectrum(as_cov(q * sigma * q.transpose()));
    EXPECT_LE((a.gammas - b.gammas).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(EigSpectrumTest, DecompositionReconstructs) {
  auto rng = t::make_rng(9);
  const Matrix g = t::random_gaussian(5, 5, rng);
  const Matrix sigma = g * g.transpose();
  const auto d = isocl::eig_decompose(as_cov(sigma));
  const Matrix rebuilt = d.vectors * d.spectrum.gammas.asDiagonal() * d.vectors.transpose();
  EXPECT_LE((rebuilt - sigma).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((d.vectors.transpose() * d.vectors - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(EigSpectrumTest, RejectsNonSymmetricAndIndefinite) {
  Matrix m = Matrix::Identity(3, 3);
  m(0, 1) = 0.5;
  expect_error(ErrorKind::InvalidInput, [&] { isocl::eig_spectrum(as_cov(m)); });
  expect_error(ErrorKind::InvalidInput,
               [] { isocl::eig_spectrum(as_cov(Matrix(Vector2d(1, -1).asDiagonal()))); });
}

TEST(MahalanobisTest, Examples) {
  const Vector2d u(1, 0), v(0, 0);
  EXPECT_EQ(isocl::mahalanobis_sq(u, u, Matrix::Identity(2, 2)), 0.0);
  EXPECT_DOUBLE_EQ(isocl::mahalanobis_sq(u, v, Matrix(Vector2d(0.25, 1).asDiagonal())), 0.25);
}

TEST(MahalanobisTest, MatchesTripleProductAndIsSymmetric) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto rng = t::make_rng(500 + seed);
    const Matrix g = t::random_gaussian(4, 4, rng);
    const Matrix p = g * g.transpose() + Matrix::Identity(4, 4);
    const Vector u = t::random_gaussian(4, 1, rng);
    const Vector v = t::random_gaussian(4, 1, rng);
    double oracle = 0.0;
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) oracle += (u[i] - v[i]) * p(i, j) * (u[j] - v[j]);
    }
    const double a = isocl::mahalanobis_sq(u, v, p);
    EXPECT_NEAR(a, oracle, 1e-12 * std::max(1.0, oracle));
    EXPECT_EQ(a, isocl::mahalanobis_sq(v, u, p));
    EXPECT_GE(a, 0.0);
  }
}

TEST(MahalanobisTest, DimensionMismatch) {
  expect_error(ErrorKind::InvalidInput,
               [] { isocl::mahalanobis_sq(Vector::Zero(2), Vector::Zero(3), Matrix::Identity(2, 2)); });
  expect_error(ErrorKind::InvalidInput,
               [] { isocl::mahalanobis_sq(Vector::Zero(2), Vector::Zero(2), Matrix::Identity(3, 3)); });
}

}  // namespace
