// Dynamic FPCA core: eigendecomposition of the spectral density matrices with
// phase alignment, filter synthesis by Fourier inversion on the frequency grid,
// truncation-lag selection, scores, reconstruction, and variance diagnostics.
//
// All integrals over theta use the closed grid theta_j = pi*j/N with trapezoid
// half-weights at j = +-N (the two endpoints are the same point of the circle),
// which makes the discrete transform exactly unitary: Parseval holds to machine
// precision and band-limited curves invert exactly.
#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "dynfpc/specden.hpp"

namespace dynfpc {

struct EigenCurves {
  int p = 0;
  int n_theta = 0;
  Eigen::MatrixXd lambdas;                // p x (N+1), descending in m at every j
  std::vector<Eigen::MatrixXcd> vectors;  // j = 0..N, each d x p, e* V e = 1, phase-aligned
  Eigen::VectorXd ref;                    // alignment reference coefficient vector
  BasisSpec basis;
  Eigen::VectorXd min_gap;  // per component: min_j distance to the adjacent eigenvalues
};

namespace detail {

constexpr double kAlignTol = 1e-8;

// Rotate e by a unit-modulus factor so that <e, anchor>_V is real positive.
// Returns false when the inner product is below tolerance (cannot align).
inline bool align_phase(Eigen::VectorXcd& e, const Eigen::VectorXcd& anchor,
                        const Eigen::MatrixXd& V) {
  std::complex<double> z = (anchor.adjoint() * (V * e))(0);
  double a = std::abs(z);
  if (a <= kAlignTol) return false;
  e *= std::conj(z) / a;
  return true;
}

}  // namespace detail

inline EigenCurves eigendecompose(const SpectralDensityEstimate& sdm, int p,
                                  std::optional<Eigen::VectorXd> ref = std::nullopt) {
  const int d = sdm.d;
  const int N = sdm.n_theta;
  if (p < 1 || p > d) throw std::invalid_argument("eigendecompose: need 1 <= p <= d");
  Eigen::VectorXd r = ref.value_or([&] {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
    v[0] = 1.0;  // coefficient vector of the constant function
    return v;
  }());
  if (r.size() != d) throw std::invalid_argument("eigendecompose: reference vector has wrong size");

  const Eigen::MatrixXd& V = sdm.basis.gram;
  Eigen::LLT<Eigen::MatrixXd> llt(V);
  if (llt.info() != Eigen::Success) throw numeric_error("gram matrix is not positive definite");
  Eigen::MatrixXd R = llt.matrixU();  // V = R'R

  EigenCurves out;
  out.p = p;
  out.n_theta = N;
  out.basis = sdm.basis;
  out.ref = r;
  out.lambdas.resize(p, N + 1);
  out.vectors.resize(N + 1);
  out.min_gap = Eigen::VectorXd::Constant(p, std::numeric_limits<double>::infinity());

  Eigen::MatrixXcd Rc = R.cast<std::complex<double>>();
  for (int j = 0; j <= N; ++j) {
    const Eigen::MatrixXcd& G = sdm.mats[j];
    if ((G - G.adjoint()).norm() > 1e-10 * (1.0 + G.norm()))
      throw std::invalid_argument("eigendecompose: input matrix is not Hermitian");
    // Whitened Hermitian problem: eigenpairs of R G R' give those of G V after e = R^{-1} f.
    Eigen::MatrixXcd H = Rc * G * Rc.adjoint();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (H + H.adjoint()));
    if (es.info() != Eigen::Success) throw numeric_error("eigendecomposition failed");
    Eigen::VectorXd evals = es.eigenvalues();  // ascending
    out.vectors[j].resize(d, p);
    for (int m = 0; m < p; ++m) {
      double lam = evals[d - 1 - m];
      out.lambdas(m, j) = lam;
      double gap = std::numeric_limits<double>::infinity();
      if (m > 0) gap = std::min(gap, out.lambdas(m - 1, j) - lam);
      if (d - 2 - m >= 0) gap = std::min(gap, lam - evals[d - 2 - m]);
      out.min_gap[m] = std::min(out.min_gap[m], gap);
      Eigen::VectorXcd f = es.eigenvectors().col(d - 1 - m);
      out.vectors[j].col(m) = R.triangularView<Eigen::Upper>().solve(f);
    }
  }

  // Phase alignment: reference rule, sequential continuity where the reference
  // inner product vanishes; at j = 0 fall back to a real positive coordinate.
  for (int m = 0; m < p; ++m) {
    for (int j = 0; j <= N; ++j) {
      Eigen::VectorXcd e = out.vectors[j].col(m);
      if (!detail::align_phase(e, r.cast<std::complex<double>>(), V)) {
        if (j > 0) {
          Eigen::VectorXcd prev = out.vectors[j - 1].col(m);
          if (!detail::align_phase(e, prev, V)) { /* orthogonal to both anchors; keep as is */
          }
        } else {
          int k;
          e.cwiseAbs().maxCoeff(&k);
          std::complex<double> z = e[k];
          if (std::abs(z) > 0) e *= std::conj(z) / std::abs(z);
        }
      }
      out.vectors[j].col(m) = e;
    }
  }
  return out;
}

struct DynamicFpcModel {
  std::vector<Eigen::MatrixXd> filters;  // per m: d x (2L+1), column k+L holds phi_{mk}
  int L = 0;
  bool l_capped = false;          // mass target unreachable within l_max
  double max_imag = 0.0;          // largest |Im| seen before discarding imaginary parts
  Eigen::VectorXd captured_mass;  // per m: sum_{|k|<=L} ||phi_{mk}||_V^2
  EigenCurves eigen;
  BasisSpec basis;
  std::optional<Eigen::VectorXd> mean;  // centering recorded at fit time
};

// phi_{mk} = (1/2pi) int phi_m(s) e^{-iks} ds, discretized on the closed grid
// with endpoint half-weights; conjugate reflection supplies j < 0. The result
// is real by symmetry; the imaginary residue is tracked and discarded.
inline DynamicFpcModel filter_coefficients(const EigenCurves& eigen, double epsilon = 0.01,
                                           int l_max = 60) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("filter_coefficients: epsilon must be in (0,1)");
  const int N = eigen.n_theta;
  if (l_max < 0 || l_max > N)
    throw std::invalid_argument("filter_coefficients: need 0 <= l_max <= n_theta");
  const int d = static_cast<int>(eigen.basis.gram.rows());
  const int p = eigen.p;
  const Eigen::MatrixXd& V = eigen.basis.gram;

  DynamicFpcModel model;
  model.eigen = eigen;
  model.basis = eigen.basis;

  // Full table of candidate lags, then the joint truncation rule.
  std::vector<Eigen::MatrixXd> full(p, Eigen::MatrixXd(d, 2 * l_max + 1));
  double max_imag = 0.0;
  for (int m = 0; m < p; ++m) {
    for (int l = -l_max; l <= l_max; ++l) {
      Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(d);
      for (int j = -N; j <= N; ++j) {
        double w = (j == N || j == -N) ? 0.5 : 1.0;
        double ang = -double(l) * M_PI * double(j) / double(N);
        std::complex<double> e(std::cos(ang), std::sin(ang));
        Eigen::VectorXcd phi = eigen.vectors[std::abs(j)].col(m);
        if (j < 0) phi = phi.conjugate();
        acc += (w * e) * phi;
      }
      acc /= 2.0 * double(N);
      max_imag = std::max(max_imag, acc.imag().cwiseAbs().maxCoeff());
      full[m].col(l + l_max) = acc.real();
    }
  }
  model.max_imag = max_imag;

  auto mass_at = [&](int m, int L) {
    double s = full[m].col(l_max).transpose() * V * full[m].col(l_max);
    for (int l = 1; l <= L; ++l) {
      s += full[m].col(l_max + l).transpose() * V * full[m].col(l_max + l);
      s += full[m].col(l_max - l).transpose() * V * full[m].col(l_max - l);
    }
    return s;
  };

  int L = l_max;
  bool reached = false;
  for (int cand = 0; cand <= l_max && !reached; ++cand) {
    bool all = true;
    for (int m = 0; m < p; ++m) all = all && mass_at(m, cand) >= 1.0 - epsilon;
    if (all) {
      L = cand;
      reached = true;
    }
  }
  model.L = L;
  model.l_capped = !reached;

  model.filters.resize(p);
  model.captured_mass.resize(p);
  for (int m = 0; m < p; ++m) {
    model.filters[m] = full[m].middleCols(l_max - L, 2 * L + 1);
    model.captured_mass[m] = mass_at(m, L);
  }
  return model;
}

struct ScoreSeries {
  Eigen::MatrixXd scores;  // n x p
  int L = 0;               // boundary half-width used
  std::string kind;        // "dynamic" or "static"
  std::vector<std::uint8_t> valid;  // per row: 1 iff t in [L+1, n-L] (1-based)
};

namespace detail {

inline void require_basis_match(const BasisSpec& a, const BasisSpec& b, const char* where) {
  bool ok = a.d == b.d && a.functions == b.functions &&
            (a.gram - b.gram).cwiseAbs().maxCoeff() <= 1e-12;
  if (!ok) throw data_error(std::string(where) + ": series/model basis mismatch");
}

}  // namespace detail

// Y_mt = sum_{k=-L..L} X_{t-k}' V phi_{mk}, zero-padded outside 1..n.
inline ScoreSeries dynamic_scores(const FunctionalSeries& series, const DynamicFpcModel& model) {
  if (!series.mean) throw std::invalid_argument("dynamic_scores: series must be centered");
  detail::require_basis_match(series.basis, model.basis, "dynamic_scores");
  const int n = series.n();
  const int p = static_cast<int>(model.filters.size());
  const int L = model.L;
  ScoreSeries out;
  out.kind = "dynamic";
  out.L = L;
  out.scores = Eigen::MatrixXd::Zero(n, p);
  out.valid.assign(n, 0);
  const Eigen::MatrixXd& X = series.coeffs;
  for (int m = 0; m < p; ++m) {
    Eigen::MatrixXd W = series.basis.gram * model.filters[m];  // d x (2L+1)
    for (int t = 0; t < n; ++t) {
      double y = 0.0;
      const int klo = std::max(-L, t - (n - 1));
      const int khi = std::min(L, t);
      for (int k = klo; k <= khi; ++k) y += X.row(t - k).dot(W.col(k + L));
      out.scores(t, m) = y;
    }
  }
  for (int t = L; t < n - L; ++t) out.valid[t] = 1;
  return out;
}

// X_t = sum_{m<=p_use} sum_{k=-L..L} Y_{m,t+k} phi_{mk}, scores zero outside 1..n.
inline FunctionalSeries dynamic_kl_reconstruct(const ScoreSeries& scores,
                                               const DynamicFpcModel& model, int p_use) {
  const int p = static_cast<int>(model.filters.size());
  if (p_use < 0 || p_use > p || scores.scores.cols() < p_use)
    throw std::invalid_argument("dynamic_kl_reconstruct: p_use out of range");
  const int n = static_cast<int>(scores.scores.rows());
  const int L = model.L;
  FunctionalSeries out;
  out.basis = model.basis;
  out.coeffs = Eigen::MatrixXd::Zero(n, model.basis.d);
  for (int m = 0; m < p_use; ++m) {
    for (int t = 0; t < n; ++t) {
      const int klo = std::max(-L, -t);
      const int khi = std::min(L, n - 1 - t);
      for (int k = klo; k <= khi; ++k)
        out.coeffs.row(t) += scores.scores(t + k, m) * model.filters[m].col(k + L).transpose();
    }
  }
  return out;
}

// Proportion of variance captured by the first p_use dynamic components:
// integrated eigenvalue curves over the sample second moment.
inline double pv_dyn(const EigenCurves& eigen, const FunctionalSeries& series, int p_use) {
  if (!series.mean) throw std::invalid_argument("pv_dyn: series must be centered");
  if (p_use < 0 || p_use > eigen.p) throw std::invalid_argument("pv_dyn: p_use out of range");
  const int N = eigen.n_theta;
  const int n = series.n();
  double denom =
      (series.coeffs * series.basis.gram).cwiseProduct(series.coeffs).sum() / double(n);
  if (!(denom > 0.0)) throw data_error("pv_dyn: zero total variance");
  double num = 0.0;
  for (int m = 0; m < p_use; ++m) {
    auto lam = [&](int j) {
      double v = eigen.lambdas(m, j);
      return v < 0.0 ? 0.0 : v;  // clip the tiny negative eigenvalues of PSD inputs
    };
    double s = lam(0) + lam(N);  // half-weights at the identified endpoints +-pi
    for (int j = 1; j < N; ++j) s += 2.0 * lam(j);
    num += s * M_PI / double(N);
  }
  return num / denom;
}

// Normalized mean squared error sum_k ||X_k - Xhat_k||_V^2 / sum_k ||X_k||_V^2.
inline double nmse(const FunctionalSeries& original, const FunctionalSeries& reconstructed) {
  if (!original.mean) throw std::invalid_argument("nmse: original must be centered");
  detail::require_basis_match(original.basis, reconstructed.basis, "nmse");
  if (original.coeffs.rows() != reconstructed.coeffs.rows())
    throw std::invalid_argument("nmse: length mismatch");
  const Eigen::MatrixXd& V = original.basis.gram;
  Eigen::MatrixXd D = original.coeffs - reconstructed.coeffs;
  double num = (D * V).cwiseProduct(D).sum();
  double den = (original.coeffs * V).cwiseProduct(original.coeffs).sum();
  if (!(den > 0.0)) throw data_error("nmse: zero total variance");
  return num / den;
}

}  // namespace dynfpc
