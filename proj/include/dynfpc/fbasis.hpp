// Fourier basis on [0,1], least-squares projection of sampled curves,
// evaluation, centering, and V-inner products of coefficient vectors.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <string>

#include "dynfpc/common.hpp"

namespace dynfpc {

struct BasisSpec {
  int d = 0;
  // Ordered convention id: "fourier" = (1, sqrt2 sin(2*pi*u), sqrt2 cos(2*pi*u), ...),
  // "coefficient" = abstract coordinate basis with V = I and no point evaluation.
  std::string functions;
  Eigen::MatrixXd gram;       // V, symmetric positive definite
  Eigen::VectorXd eval_grid;  // default evaluation grid (empty for "coefficient")
};

// Abstract coordinate basis; lets any d (including even) flow through the
// coefficient-space pipeline where no point evaluation is required.
inline BasisSpec make_coefficient_basis(int d) {
  if (d < 1) throw std::invalid_argument("basis dimension must be >= 1");
  BasisSpec b;
  b.d = d;
  b.functions = "coefficient";
  b.gram = Eigen::MatrixXd::Identity(d, d);
  return b;
}

inline BasisSpec build_fourier_basis(int d, int m_grid) {
  if (d < 1 || d % 2 == 0) throw std::invalid_argument("fourier basis dimension must be odd and >= 1");
  if (m_grid < 4 * d) throw std::invalid_argument("evaluation grid must have at least 4*d points");
  BasisSpec b;
  b.d = d;
  b.functions = "fourier";
  b.gram = Eigen::MatrixXd::Identity(d, d);  // orthonormal system, V = I analytically
  b.eval_grid = Eigen::VectorXd::LinSpaced(m_grid, 0.0, 1.0);
  return b;
}

// Design matrix B with B(i,k) = v_k(points[i]).
inline Eigen::MatrixXd basis_design(const BasisSpec& basis, const Eigen::VectorXd& points) {
  if (basis.functions != "fourier")
    throw std::invalid_argument("basis '" + basis.functions + "' has no point evaluation");
  const double sqrt2 = std::sqrt(2.0);
  const double twopi = 2.0 * M_PI;
  Eigen::MatrixXd B(points.size(), basis.d);
  for (Eigen::Index i = 0; i < points.size(); ++i) {
    B(i, 0) = 1.0;
    for (int k = 1; 2 * k < basis.d + 1; ++k) {
      if (2 * k - 1 < basis.d) B(i, 2 * k - 1) = sqrt2 * std::sin(twopi * k * points[i]);
      if (2 * k < basis.d) B(i, 2 * k) = sqrt2 * std::cos(twopi * k * points[i]);
    }
  }
  return B;
}

struct FunctionalSeries {
  Eigen::MatrixXd coeffs;  // n x d, row t = coefficient vector of curve t
  BasisSpec basis;
  std::optional<Eigen::VectorXd> mean;  // subtracted sample mean, set by center()

  int n() const { return static_cast<int>(coeffs.rows()); }
  int d() const { return static_cast<int>(coeffs.cols()); }
};

inline FunctionalSeries project_curves(const Eigen::MatrixXd& samples, const Eigen::VectorXd& grid,
                                       const BasisSpec& basis) {
  if (grid.size() < basis.d) throw std::invalid_argument("underdetermined projection: need at least d grid points");
  for (Eigen::Index i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("grid must be strictly increasing");
  if (samples.cols() != grid.size()) throw std::invalid_argument("samples/grid size mismatch");
  Eigen::MatrixXd B = basis_design(basis, grid);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(B);
  if (qr.rank() < basis.d) throw numeric_error("rank-deficient basis design matrix");
  FunctionalSeries out;
  out.coeffs = qr.solve(samples.transpose()).transpose();
  out.basis = basis;
  return out;
}

inline Eigen::MatrixXd evaluate(const FunctionalSeries& series, const Eigen::VectorXd& points,
                                bool uncentered = false) {
  if (points.size() == 0) throw std::invalid_argument("empty evaluation point set");
  Eigen::MatrixXd B = basis_design(series.basis, points);
  Eigen::MatrixXd vals = series.coeffs * B.transpose();
  if (uncentered && series.mean) vals.rowwise() += (B * (*series.mean)).transpose();
  return vals;
}

inline FunctionalSeries center(const FunctionalSeries& series) {
  FunctionalSeries out = series;
  Eigen::VectorXd mu = series.coeffs.colwise().mean();
  out.coeffs.rowwise() -= mu.transpose();
  if (series.mean) mu += *series.mean;
  out.mean = mu;
  return out;
}

inline double norm_sq(const FunctionalSeries& series, int t) {
  if (t < 0 || t >= series.n()) throw std::out_of_range("norm_sq: index out of range");
  return series.coeffs.row(t) * series.basis.gram * series.coeffs.row(t).transpose();
}

// <x, y>_V for coefficient vectors: y^H V x. Real overload.
inline double vdot(const Eigen::MatrixXd& V, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  return y.transpose() * V * x;
}
inline std::complex<double> vdot(const Eigen::MatrixXd& V, const Eigen::VectorXcd& x,
                                 const Eigen::VectorXcd& y) {
  return (y.adjoint() * (V * x))(0);
}

}  // namespace dynfpc
