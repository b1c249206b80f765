#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <random>

#include "dynfpc/spca.hpp"

using namespace dynfpc;

namespace {

FunctionalSeries series_with_gram(Eigen::MatrixXd coeffs, const Eigen::MatrixXd& V) {
  FunctionalSeries fs;
  fs.basis = make_coefficient_basis(static_cast<int>(coeffs.cols()));
  fs.basis.gram = V;
  fs.coeffs = std::move(coeffs);
  fs.mean = Eigen::VectorXd::Zero(fs.basis.d);
  return fs;
}

}  // namespace

TEST_CASE("static_fpca hand case: diagonal covariance", "[spca]") {
  Eigen::MatrixXd x(4, 2);
  double a = std::sqrt(6.0), b = std::sqrt(2.0);
  x << a, 0, -a, 0, 0, b, 0, -b;  // lag-0 covariance diag(3, 1) with divisor n
  auto fs = series_with_gram(x, Eigen::MatrixXd::Identity(2, 2));
  auto model = static_fpca(fs, 2);
  REQUIRE(model.eigenvalues(0) == Catch::Approx(3.0).epsilon(1e-12));
  REQUIRE(model.eigenvalues(1) == Catch::Approx(1.0).epsilon(1e-12));
  REQUIRE((model.eigenvectors.col(0) - Eigen::Vector2d(1, 0)).cwiseAbs().maxCoeff() <= 1e-12);
  REQUIRE((model.eigenvectors.col(1) - Eigen::Vector2d(0, 1)).cwiseAbs().maxCoeff() <= 1e-12);

  REQUIRE_THROWS_AS(static_fpca(fs, 3), std::invalid_argument);
  REQUIRE_THROWS_AS(static_fpca(fs, 0), std::invalid_argument);
  FunctionalSeries raw = fs;
  raw.mean.reset();
  REQUIRE_THROWS_AS(static_fpca(raw, 1), std::invalid_argument);
}

TEST_CASE("static_fpca identities under a non-identity gram", "[spca]") {
  const int d = 4, n = 200;
  std::mt19937_64 rng(417);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd M(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) M(i, j) = nd(rng);
  Eigen::MatrixXd V = M * M.transpose() + d * Eigen::MatrixXd::Identity(d, d);
  Eigen::MatrixXd x(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) x(i, j) = (j + 1.0) * nd(rng);
  auto fs = center(series_with_gram(x, V));
  auto model = static_fpca(fs, d);

  // V-orthonormal columns, descending nonnegative eigenvalues, sign rule
  Eigen::MatrixXd G = model.eigenvectors.transpose() * V * model.eigenvectors;
  REQUIRE((G - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff() <= 1e-10);
  for (int m = 0; m < d; ++m) {
    if (m + 1 < d) REQUIRE(model.eigenvalues(m) >= model.eigenvalues(m + 1));
    REQUIRE(model.eigenvalues(m) >= -1e-12);
    double z = (V * model.eigenvectors.col(m))(0);
    if (std::abs(z) > 1e-8) {
      REQUIRE(z > 0.0);
    } else {
      int imax = 0;
      model.eigenvectors.col(m).cwiseAbs().maxCoeff(&imax);
      REQUIRE(model.eigenvectors(imax, m) > 0.0);
    }
  }

  // score variance (divisor n) equals the eigenvalue, an algebraic identity
  auto sc = static_scores(fs, model);
  REQUIRE(sc.kind == "static");
  REQUIRE(sc.valid == std::vector<std::uint8_t>(n, 1));
  for (int m = 0; m < d; ++m) {
    double var = sc.scores.col(m).squaredNorm() / n;
    REQUIRE(var == Catch::Approx(model.eigenvalues(m)).epsilon(1e-10));
  }

  // full reconstruction is exact; truncated NMSE equals the tail eigenvalue ratio
  REQUIRE((static_reconstruct(sc, model, d).coeffs - fs.coeffs).cwiseAbs().maxCoeff() <= 1e-10);
  for (int p_use : {1, 2, 3}) {
    double tail = model.eigenvalues.tail(d - p_use).sum() / model.eigenvalues.sum();
    REQUIRE(nmse(fs, static_reconstruct(sc, model, p_use)) == Catch::Approx(tail).margin(1e-8));
  }
  REQUIRE(static_reconstruct(sc, model, 0).coeffs.cwiseAbs().maxCoeff() == 0.0);
  REQUIRE_THROWS_AS(static_reconstruct(sc, model, d + 1), std::invalid_argument);
}

TEST_CASE("static scores of an eigenvector curve", "[spca]") {
  Eigen::MatrixXd x(6, 3);
  std::mt19937_64 rng(99);
  std::normal_distribution<double> nd;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 3; ++j) x(i, j) = (3.0 - j) * nd(rng);
  auto fs = center(series_with_gram(x, Eigen::MatrixXd::Identity(3, 3)));
  auto model = static_fpca(fs, 3);
  FunctionalSeries unit = fs;
  unit.coeffs = model.eigenvectors.col(0).transpose().replicate(2, 1);
  auto sc = static_scores(unit, model);
  REQUIRE((sc.scores.row(0) - Eigen::RowVector3d(1, 0, 0)).cwiseAbs().maxCoeff() <= 1e-10);

  unit.coeffs.setZero();
  REQUIRE(static_scores(unit, model).scores.cwiseAbs().maxCoeff() == 0.0);

  FunctionalSeries other = fs;
  other.basis = make_coefficient_basis(3);
  other.basis.gram(0, 0) = 2.0;
  REQUIRE_THROWS_AS(static_scores(other, model), data_error);
}

TEST_CASE("static reconstruction beats random V-orthonormal frames", "[spca]") {
  const int d = 5, n = 300, p = 2;
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd M(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) M(i, j) = nd(rng);
  Eigen::MatrixXd V = M * M.transpose() + d * Eigen::MatrixXd::Identity(d, d);
  Eigen::MatrixXd x(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) x(i, j) = (d - j) * nd(rng);
  auto fs = center(series_with_gram(x, V));
  auto model = static_fpca(fs, p);
  double best = nmse(fs, static_reconstruct(static_scores(fs, model), model, p));

  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd W(d, p);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < p; ++j) W(i, j) = nd(rng);
    // V-orthonormalize: W <- W T^{-1} with T'T the V-Gram of W
    Eigen::LLT<Eigen::MatrixXd> llt(W.transpose() * V * W);
    REQUIRE(llt.info() == Eigen::Success);
    Eigen::MatrixXd T = llt.matrixU();
    W = T.triangularView<Eigen::Upper>().solve<Eigen::OnTheRight>(W);
    REQUIRE((W.transpose() * V * W - Eigen::MatrixXd::Identity(p, p)).cwiseAbs().maxCoeff() <=
            1e-10);
    FunctionalSeries rec = fs;
    rec.coeffs = (fs.coeffs * V * W) * W.transpose();
    REQUIRE(best <= nmse(fs, rec) + 1e-12);
  }
}
