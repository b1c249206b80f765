#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <stdexcept>
#include <string>
#include <vector>

#include "dynfpc/dpca.hpp"
#include "dynfpc/fbasis.hpp"
#include "dynfpc/specden.hpp"

namespace dynfpc {

struct StaticFpcModel {
  Eigen::VectorXd eigenvalues;  // descending, length p
  Eigen::MatrixXd eigenvectors; // d x p, V-orthonormal columns
  BasisSpec basis;
};

// Classical FPCA of the lag-0 covariance: whitened symmetric eigenproblem.
// Signs follow the same canonicalization as the dynamic eigendecomposition
// (positive V-inner product with the constant function, largest-magnitude
// coordinate positive as fallback) so that a flat spectrum makes the two
// pipelines produce identical scores.
inline StaticFpcModel static_fpca(const FunctionalSeries& series, int p) {
  const int d = series.d();
  if (p < 1 || p > d) throw std::invalid_argument("static_fpca: need 1 <= p <= d");
  if (!series.mean.has_value())
    throw std::invalid_argument("static_fpca: series must be centered first");
  const auto acov = autocov(series, 0);
  const Eigen::MatrixXd C0 = acov.at(0);
  const Eigen::MatrixXd& V = series.basis.gram;

  Eigen::LLT<Eigen::MatrixXd> llt(V);
  if (llt.info() != Eigen::Success)
    throw numeric_error("static_fpca: gram matrix is not positive definite");
  Eigen::MatrixXd R = llt.matrixU();
  Eigen::MatrixXd H = R * C0 * R.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (H + H.transpose()));
  if (es.info() != Eigen::Success)
    throw numeric_error("static_fpca: eigensolver failed to converge");

  StaticFpcModel model;
  model.basis = series.basis;
  model.eigenvalues.resize(p);
  model.eigenvectors.resize(d, p);
  for (int m = 0; m < p; ++m) {
    model.eigenvalues(m) = es.eigenvalues()(d - 1 - m);
    Eigen::VectorXd v = R.triangularView<Eigen::Upper>().solve(es.eigenvectors().col(d - 1 - m));
    double z = (V * v)(0);
    if (std::abs(z) > detail::kAlignTol) {
      if (z < 0) v = -v;
    } else {
      int imax = 0;
      v.cwiseAbs().maxCoeff(&imax);
      if (v(imax) < 0) v = -v;
    }
    model.eigenvectors.col(m) = v;
  }
  return model;
}

inline ScoreSeries static_scores(const FunctionalSeries& series, const StaticFpcModel& model) {
  detail::require_basis_match(series.basis, model.basis, "static_scores");
  if (!series.mean.has_value())
    throw std::invalid_argument("static_scores: series must be centered first");
  ScoreSeries out;
  out.kind = "static";
  out.L = 0;
  out.scores = series.coeffs * (model.basis.gram * model.eigenvectors);
  out.valid.assign(static_cast<std::size_t>(series.n()), 1);
  return out;
}

inline FunctionalSeries static_reconstruct(const ScoreSeries& scores, const StaticFpcModel& model,
                                           int p_use) {
  const int p = static_cast<int>(model.eigenvectors.cols());
  if (p_use < 0 || p_use > p || p_use > scores.scores.cols())
    throw std::invalid_argument("static_reconstruct: p_use out of range");
  FunctionalSeries out;
  out.basis = model.basis;
  out.coeffs = scores.scores.leftCols(p_use) * model.eigenvectors.leftCols(p_use).transpose();
  out.mean = Eigen::VectorXd::Zero(model.basis.d);
  return out;
}

}  // namespace dynfpc
