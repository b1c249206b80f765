// Autocovariance matrices of the coefficient series and lag-window spectral
// density matrices on the symmetric grid theta_j = pi*j/N, j = -N..N.
// Everything is computed for j >= 0 and reflected by conjugation.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "dynfpc/fbasis.hpp"

namespace dynfpc {

struct AutocovSet {
  int d = 0;
  int q = 0;                       // largest computed lag
  std::vector<Eigen::MatrixXd> c;  // c[h] for h = 0..q
  BasisSpec basis;

  // C_{-h} = C_h' by construction.
  Eigen::MatrixXd at(int h) const {
    int a = h < 0 ? -h : h;
    if (a > q) throw std::out_of_range("autocovariance lag out of range");
    return h >= 0 ? c[a] : Eigen::MatrixXd(c[a].transpose());
  }
};

// C_h = (1/n) sum_{k=h+1..n} X_k X_{k-h}'. Divisor n, not n-h: keeps the
// Bartlett lag-window estimate nonnegative definite.
inline AutocovSet autocov(const FunctionalSeries& series, int q) {
  const int n = series.n();
  if (q < 0 || q >= n) throw std::invalid_argument("autocov: need 0 <= q < n");
  if (!series.mean) throw std::invalid_argument("autocov: series must be centered first");
  AutocovSet out;
  out.d = series.d();
  out.q = q;
  out.basis = series.basis;
  out.c.reserve(q + 1);
  const Eigen::MatrixXd& X = series.coeffs;
  for (int h = 0; h <= q; ++h)
    out.c.push_back(X.bottomRows(n - h).transpose() * X.topRows(n - h) / double(n));
  return out;
}

inline double lag_weight(const std::string& weight, double x) {
  double a = std::abs(x);
  if (weight == "bartlett" || weight == "triangular-hk") return a >= 1.0 ? 0.0 : 1.0 - a;
  if (weight == "flat-top") {
    // Politis-style trapezoid: 1 on [0,1/2], linear to 0 at 1.
    if (a <= 0.5) return 1.0;
    return a >= 1.0 ? 0.0 : 2.0 * (1.0 - a);
  }
  throw std::invalid_argument("unknown lag window '" + weight + "'");
}

struct SpectralDensityEstimate {
  int d = 0;
  int n_theta = 0;
  int q = 0;            // bandwidth used (0 for analytic spectra)
  std::string weight;   // lag window id, or "analytic"
  BasisSpec basis;      // supplies the gram V used downstream
  std::vector<Eigen::MatrixXcd> mats;  // j = 0..n_theta

  double theta(int j) const { return M_PI * double(j) / double(n_theta); }

  // Matrix at theta_j for j in -N..N; conjugate reflection below zero.
  Eigen::MatrixXcd at(int j) const {
    int a = j < 0 ? -j : j;
    if (a > n_theta) throw std::out_of_range("frequency index out of range");
    return j >= 0 ? mats[a] : mats[a].conjugate();
  }
};

inline SpectralDensityEstimate lag_window_sdm(const AutocovSet& acov, int q,
                                              const std::string& weight, int n_theta) {
  if (q > acov.q) throw std::invalid_argument("bandwidth exceeds available lags");
  if (n_theta < 1) throw std::invalid_argument("n_theta must be positive");
  lag_weight(weight, 0.0);  // validates the id
  SpectralDensityEstimate out;
  out.d = acov.d;
  out.n_theta = n_theta;
  out.q = q;
  out.weight = weight;
  out.basis = acov.basis;
  out.mats.resize(n_theta + 1);
  const std::complex<double> minus_i(0.0, -1.0);
  for (int j = 0; j <= n_theta; ++j) {
    const double th = M_PI * double(j) / double(n_theta);
    Eigen::MatrixXcd F = acov.c[0].cast<std::complex<double>>() * lag_weight(weight, 0.0);
    for (int h = 1; h <= q; ++h) {
      double w = lag_weight(weight, double(h) / double(q));
      if (w == 0.0) continue;
      std::complex<double> e = std::exp(minus_i * (double(h) * th));
      F += w * (acov.c[h].cast<std::complex<double>>() * e +
                acov.c[h].transpose().cast<std::complex<double>>() * std::conj(e));
    }
    F /= 2.0 * M_PI;
    out.mats[j] = 0.5 * (F + F.adjoint());  // exact Hermitian symmetry
  }
  return out;
}

// Exact spectrum of the VAR(1) recursion X_t = A X_{t-1} + e_t, Var(e) = Sigma:
// F_theta = (1/2pi) (I - A e^{-i theta})^{-1} Sigma (I - A' e^{i theta})^{-1}.
// Oracle for estimator tests and exact-pipeline runs; gram is the identity.
inline SpectralDensityEstimate analytic_sdm_var1(const Eigen::MatrixXd& A,
                                                 const Eigen::MatrixXd& Sigma, int n_theta) {
  const int d = static_cast<int>(A.rows());
  if (A.cols() != d || Sigma.rows() != d || Sigma.cols() != d)
    throw std::invalid_argument("analytic_sdm_var1: dimension mismatch");
  double rho = A.eigenvalues().cwiseAbs().maxCoeff();
  if (!(rho < 1.0)) throw numeric_error("VAR(1) is nonstationary: spectral radius >= 1");
  SpectralDensityEstimate out;
  out.d = d;
  out.n_theta = n_theta;
  out.q = 0;
  out.weight = "analytic";
  out.basis = make_coefficient_basis(d);
  out.mats.resize(n_theta + 1);
  Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(d, d);
  Eigen::MatrixXcd Ac = A.cast<std::complex<double>>();
  Eigen::MatrixXcd Sc = Sigma.cast<std::complex<double>>();
  for (int j = 0; j <= n_theta; ++j) {
    const double th = M_PI * double(j) / double(n_theta);
    std::complex<double> e(std::cos(th), -std::sin(th));
    Eigen::MatrixXcd B = (I - Ac * e).partialPivLu().inverse();
    Eigen::MatrixXcd F = B * Sc * B.adjoint() / (2.0 * M_PI);
    out.mats[j] = 0.5 * (F + F.adjoint());
  }
  return out;
}

}  // namespace dynfpc
