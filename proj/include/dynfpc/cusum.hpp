#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "dynfpc/dpca.hpp"

namespace dynfpc {

struct CusumResult {
  Eigen::VectorXd values;    // T(x) at x = j/n, j = 1..n
  double sup_stat = 0.0;
  Eigen::VectorXd lambdas0;  // normalizing eigenvalues at frequency zero
};

// CUSUM change-point functional on dynamic scores, normalized by the
// frequency-zero eigenvalues. Score rows enter exactly as stored: rows inside
// the boundary band were computed from zero-padded curves, which keeps the
// contrast's constant-shift invariance intact.
inline CusumResult cusum_dyn(const ScoreSeries& scores, const Eigen::VectorXd& lambdas0) {
  if (scores.kind != "dynamic")
    throw std::invalid_argument("cusum_dyn: scores must come from the dynamic pipeline");
  const int n = static_cast<int>(scores.scores.rows());
  const int p = static_cast<int>(scores.scores.cols());
  if (n < 1) throw std::invalid_argument("cusum_dyn: empty score series");
  if (lambdas0.size() != p)
    throw std::invalid_argument("cusum_dyn: lambdas0 length must equal the component count");
  if ((lambdas0.array() <= 0.0).any())
    throw std::invalid_argument("cusum_dyn: lambdas0 must be positive");

  CusumResult out;
  out.lambdas0 = lambdas0;
  out.values = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd prefix = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd total = scores.scores.colwise().sum();
  for (int j = 1; j <= n; ++j) {
    prefix += scores.scores.row(j - 1);
    double x = double(j) / n;
    double t = 0.0;
    for (int m = 0; m < p; ++m) {
      double c = prefix(m) - x * total(m);
      t += c * c / lambdas0(m);
    }
    out.values(j - 1) = (2.0 * M_PI / n) * t;
  }
  out.sup_stat = out.values.maxCoeff();
  return out;
}

}  // namespace dynfpc
