#include <cmath>
#include <random>

#include "doctest.h"
#include "nirom/errors.hpp"
#include "nirom/numerics.hpp"

using namespace nirom;

namespace {

Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> nd;
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = nd(rng);
  return m;
}

double orthonormality_defect(const Matrix& q) {
  return (q.transpose() * q - Matrix::Identity(q.cols(), q.cols())).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("truncated_svd: identity keeps unit spectrum") {
  const auto r = truncated_svd(Matrix::Identity(3, 3), RankSpec::fixed(3));
  CHECK(r.rank == 3);
  for (int i = 0; i < 3; ++i) CHECK(r.sigma[i] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("truncated_svd: analytic rank-one outer product") {
  Vector u(2), v(2);
  u << 1, 2;
  v << 3, 4;
  const Matrix m = u * v.transpose();
  const auto r = truncated_svd(m, RankSpec::fixed(1));
  // sigma = |u| |v| = sqrt(5) * 5
  CHECK(r.sigma[0] == doctest::Approx(std::sqrt(5.0) * 5.0).epsilon(1e-14));
  const Matrix rec = r.u * r.sigma.asDiagonal() * r.v.transpose();
  CHECK((rec - m).norm() < 1e-12);
  // sign convention: dominant entry of u is nonnegative
  CHECK(r.u(1, 0) > 0.0);
}

TEST_CASE("truncated_svd: energy threshold picks the smallest sufficient rank") {
  Matrix d = Eigen::Vector3d(3, 2, 1).asDiagonal();
  // (9 + 4) / 14 = 0.9286 >= 0.92 while 9/14 = 0.643 is not
  CHECK(truncated_svd(d, RankSpec::energy(0.92)).rank == 2);
  CHECK(truncated_svd(d, RankSpec::energy(0.6)).rank == 1);
  CHECK(truncated_svd(d, RankSpec::energy(1.0)).rank == 3);
}

TEST_CASE("truncated_svd: error paths") {
  Matrix bad = Matrix::Identity(2, 2);
  bad(0, 1) = std::nan("");
  CHECK_THROWS_AS(truncated_svd(bad, RankSpec::fixed(1)), DomainError);
  CHECK_THROWS_AS(truncated_svd(Matrix(0, 0), RankSpec::fixed(1)), DomainError);
  CHECK_THROWS_AS(truncated_svd(Matrix::Identity(2, 3), RankSpec::fixed(3)), DomainError);
  CHECK_THROWS_AS(truncated_svd(Matrix::Identity(2, 3), RankSpec::fixed(0)), DomainError);
  CHECK_THROWS_AS(truncated_svd(Matrix::Identity(2, 2), RankSpec::energy(0.0)), DomainError);
  CHECK_THROWS_AS(truncated_svd(Matrix::Identity(2, 2), RankSpec::energy(1.5)), DomainError);
}

TEST_CASE("truncated_svd: tail energy identity and orthonormal factors") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index rows = 2 + static_cast<Eigen::Index>(rng() % 19);
    const Eigen::Index cols = 2 + static_cast<Eigen::Index>(rng() % 19);
    const Matrix m = random_matrix(rng, rows, cols);
    const std::size_t k = 1 + rng() % static_cast<std::size_t>(std::min(rows, cols));
    const auto r = truncated_svd(m, RankSpec::fixed(k));
    const double residual = (m - r.u * r.sigma.asDiagonal() * r.v.transpose()).squaredNorm();
    const double tail = r.all_sigma.tail(r.all_sigma.size() - static_cast<Eigen::Index>(k)).squaredNorm();
    CHECK(std::abs(residual - tail) <= 1e-8 * m.squaredNorm());
    CHECK(orthonormality_defect(r.u) < 1e-10);
    CHECK(orthonormality_defect(r.v) < 1e-10);
    for (Eigen::Index i = 1; i < r.all_sigma.size(); ++i) CHECK(r.all_sigma[i] <= r.all_sigma[i - 1]);
  }
}

TEST_CASE("sym_eig: diagonal input gives permuted identity") {
  Matrix c = Eigen::Vector3d(1, 5, 3).asDiagonal();
  const auto r = sym_eig(c);
  CHECK(r.eigenvalues[0] == doctest::Approx(5));
  CHECK(r.eigenvalues[1] == doctest::Approx(3));
  CHECK(r.eigenvalues[2] == doctest::Approx(1));
  CHECK(r.eigenvectors(1, 0) == doctest::Approx(1.0));
  CHECK(r.eigenvectors(2, 1) == doctest::Approx(1.0));
  CHECK(r.eigenvectors(0, 2) == doctest::Approx(1.0));
}

TEST_CASE("sym_eig: 2x2 characteristic polynomial oracle") {
  Matrix c(2, 2);
  c << 2, 1, 1, 2;
  // det(C - l I) = (2 - l)^2 - 1 -> l = 3, 1
  const auto r = sym_eig(c);
  CHECK(r.eigenvalues[0] == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(r.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-14));
  const double h = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(r.eigenvectors(0, 0) - h) < 1e-12);
  CHECK(std::abs(r.eigenvectors(1, 0) - h) < 1e-12);
  // second vector is (1, -1)/sqrt2 up to the dominant-entry sign rule (tie -> index 0)
  CHECK(std::abs(r.eigenvectors(0, 1) - h) < 1e-12);
  CHECK(std::abs(r.eigenvectors(1, 1) + h) < 1e-12);
}

TEST_CASE("sym_eig: zero matrix and error paths") {
  const auto r = sym_eig(Matrix::Zero(4, 4));
  for (int i = 0; i < 4; ++i) CHECK(r.eigenvalues[i] == 0.0);
  CHECK_THROWS_AS(sym_eig(Matrix::Zero(2, 3)), DomainError);
  Matrix asym(2, 2);
  asym << 1, 2, 0, 1;
  CHECK_THROWS_AS(sym_eig(asym), DomainError);
  Matrix nan = Matrix::Identity(2, 2);
  nan(0, 0) = INFINITY;
  CHECK_THROWS_AS(sym_eig(nan), DomainError);
}

TEST_CASE("sym_eig: residual and reconstruction on random symmetric matrices") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng() % 12);
    const Matrix g = random_matrix(rng, n, n);
    const Matrix c = g + g.transpose();
    const auto r = sym_eig(c);
    CHECK(orthonormality_defect(r.eigenvectors) < 1e-10);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double res = (c * r.eigenvectors.col(j) - r.eigenvalues[j] * r.eigenvectors.col(j)).norm();
      CHECK(res <= 1e-8 * (1.0 + c.norm()));
      if (j > 0) CHECK(r.eigenvalues[j] <= r.eigenvalues[j - 1]);
    }
    const Matrix rec = r.eigenvectors * r.eigenvalues.asDiagonal() * r.eigenvectors.transpose();
    CHECK((rec - c).norm() <= 1e-8 * c.norm());
  }
}

TEST_CASE("pseudo_inverse: diagonal and rank-deficient cases") {
  Matrix d(2, 2);
  d << 2, 0, 0, 4;
  const Matrix di = pseudo_inverse(d);
  CHECK(di(0, 0) == doctest::Approx(0.5));
  CHECK(di(1, 1) == doctest::Approx(0.25));
  CHECK(std::abs(di(0, 1)) < 1e-15);

  Matrix p(2, 2);
  p << 1, 0, 0, 0;
  CHECK((pseudo_inverse(p) - p).norm() < 1e-15);
}

TEST_CASE("pseudo_inverse: matches the normal-equations inverse for full column rank") {
  std::mt19937_64 rng(17);
  const Matrix m = random_matrix(rng, 5, 3);
  const Matrix oracle = (m.transpose() * m).inverse() * m.transpose();
  const Matrix pinv = pseudo_inverse(m);
  CHECK((pinv - oracle).norm() < 1e-10);
  CHECK((pinv * m - Matrix::Identity(3, 3)).norm() < 1e-8);
}

TEST_CASE("pseudo_inverse: Moore-Penrose identities on rank-deficient matrices") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index rows = 1 + static_cast<Eigen::Index>(rng() % 30);
    const Eigen::Index cols = 1 + static_cast<Eigen::Index>(rng() % 30);
    const Eigen::Index rank = 1 + static_cast<Eigen::Index>(rng() % std::min(rows, cols));
    const Matrix m = random_matrix(rng, rows, rank) * random_matrix(rng, rank, cols);
    const Matrix x = pseudo_inverse(m);
    const double s = m.norm(), sx = x.norm();
    CHECK((m * x * m - m).norm() <= 1e-8 * s);
    CHECK((x * m * x - x).norm() <= 1e-8 * sx);
    CHECK(((m * x).transpose() - m * x).norm() <= 1e-8);
    CHECK(((x * m).transpose() - x * m).norm() <= 1e-8);
  }
  Matrix bad = Matrix::Ones(2, 2);
  bad(1, 1) = std::nan("");
  CHECK_THROWS_AS(pseudo_inverse(bad), DomainError);
}

TEST_CASE("general_eig: diagonal, rotation and Jordan block") {
  Matrix d(2, 2);
  d << 2, 0, 0, 3;
  auto r = general_eig(d);
  CHECK(r.eigenvalues[0].real() == doctest::Approx(3));
  CHECK(r.eigenvalues[1].real() == doctest::Approx(2));

  Matrix rot(2, 2);
  rot << 0, -1, 1, 0;
  // lambda^2 + 1 = 0
  r = general_eig(rot);
  CHECK(std::abs(r.eigenvalues[0] - complex(0, 1)) < 1e-14);
  CHECK(std::abs(r.eigenvalues[1] - complex(0, -1)) < 1e-14);
  for (int j = 0; j < 2; ++j) {
    CHECK(std::abs(r.eigenvectors.col(j).norm() - 1.0) < 1e-14);
    CHECK(r.eigenvectors(0, j).real() >= 0.0);
    const ComplexVector res = rot.cast<complex>() * r.eigenvectors.col(j) - r.eigenvalues[j] * r.eigenvectors.col(j);
    CHECK(res.norm() < 1e-12);
  }

  Matrix jordan(2, 2);
  jordan << 1, 1, 0, 1;
  r = general_eig(jordan);
  CHECK(std::abs(r.eigenvalues[0] - 1.0) < 1e-12);
  CHECK(std::abs(r.eigenvalues[1] - 1.0) < 1e-12);

  CHECK_THROWS_AS(general_eig(Matrix::Zero(2, 3)), DomainError);
}

TEST_CASE("numerics: identical inputs give identical bits") {
  std::mt19937_64 rng(3);
  const Matrix m = random_matrix(rng, 12, 7);
  const auto a = truncated_svd(m, RankSpec::fixed(5));
  const auto b = truncated_svd(m, RankSpec::fixed(5));
  CHECK(a.u == b.u);
  CHECK(a.sigma == b.sigma);
  const Matrix c = m.transpose() * m;
  CHECK(sym_eig(c).eigenvectors == sym_eig(c).eigenvectors);
  CHECK(pseudo_inverse(m) == pseudo_inverse(m));
}
