#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "dynfpc/dpca.hpp"
#include "dynfpc/fbasis.hpp"
#include "dynfpc/spca.hpp"
#include "dynfpc/specden.hpp"

namespace dynfpc {

struct OperatorSpec {
  std::string kind;  // "psi1" | "psi2" | "psi3"
  int d = 0;
  double kappa = 0.0;
  std::uint64_t seed = 0;
  Eigen::MatrixXd matrix;  // realized transition matrix, spectral norm = kappa
};

// Entry scale profile for the random operator draw; indices are 1-based.
// psi(i,j) is the standard deviation of entry (i,j) before normalization.
inline double psi_profile(const std::string& kind, int i, int j, bool psi2_alt = false) {
  if (kind == "psi1") return 1.0 / std::sqrt(double(i) * i + double(j) * j);
  if (kind == "psi2") {
    double ei = psi2_alt ? std::pow(double(i), 1.5) : double(i);
    return 1.0 / (ei + std::pow(double(j), 1.5));
  }
  if (kind == "psi3") return std::exp(-double(i + j));
  throw std::invalid_argument("unknown operator kind '" + kind + "'");
}

inline OperatorSpec make_operator(const std::string& kind, int d, double kappa,
                                  std::uint64_t seed, bool psi2_alt = false) {
  if (d < 1) throw std::invalid_argument("make_operator: need d >= 1");
  if (!(kappa > 0.0) || kappa >= 1.0)
    throw std::invalid_argument("make_operator: kappa must lie in (0,1); kappa >= 1 gives a nonstationary AR(1)");
  psi_profile(kind, 1, 1, psi2_alt);  // validates kind
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd G(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      G(i, j) = psi_profile(kind, i + 1, j + 1, psi2_alt) * nd(rng);
  double nrm = Eigen::JacobiSVD<Eigen::MatrixXd>(G).singularValues()(0);
  if (!(nrm > 0)) throw numeric_error("make_operator: degenerate random draw");
  OperatorSpec op;
  op.kind = kind;
  op.d = d;
  op.kappa = kappa;
  op.seed = seed;
  op.matrix = (kappa / nrm) * G;
  return op;
}

// Innovation coefficient variances. "exp" grows as exp((i-1)/10);
// "matched" ties coordinate variances to the operator's own decay
// profile at row index 0, keeping signal and noise on the same scale.
inline Eigen::VectorXd noise_variances(const std::string& profile, const std::string& kind,
                                       int d, bool psi2_alt = false) {
  Eigen::VectorXd v(d);
  if (profile == "exp") {
    for (int i = 0; i < d; ++i) v(i) = std::exp(i / 10.0);
  } else if (profile == "matched") {
    for (int i = 0; i < d; ++i) {
      int j = i + 1;
      if (kind == "psi1")
        v(i) = 1.0 / double(j);
      else if (kind == "psi2")
        v(i) = std::pow(double(j), -1.5);
      else if (kind == "psi3")
        v(i) = std::exp(-double(j));
      else
        throw std::invalid_argument("unknown operator kind '" + kind + "'");
    }
  } else {
    throw std::invalid_argument("unknown noise profile '" + profile + "'");
  }
  return v;
}

inline FunctionalSeries simulate_far1(const OperatorSpec& op, const Eigen::VectorXd& noise_vars,
                                      int n, int burn_in, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("simulate_far1: need n >= 1");
  if (burn_in < 0) throw std::invalid_argument("simulate_far1: need burn_in >= 0");
  if (noise_vars.size() != op.d)
    throw std::invalid_argument("simulate_far1: noise_vars length must equal d");
  if ((noise_vars.array() <= 0.0).any())
    throw std::invalid_argument("simulate_far1: noise variances must be positive");
  const int d = op.d;
  Eigen::VectorXd sd = noise_vars.cwiseSqrt();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  FunctionalSeries out;
  out.basis = make_coefficient_basis(d);
  out.coeffs.resize(n, d);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(d), eps(d);
  for (int t = 0; t < burn_in + n; ++t) {
    for (int i = 0; i < d; ++i) eps(i) = sd(i) * nd(rng);
    x = op.matrix * x + eps;
    if (t >= burn_in) out.coeffs.row(t - burn_in) = x.transpose();
  }
  if (!out.coeffs.allFinite()) throw numeric_error("simulate_far1: series diverged to non-finite values");
  return out;
}

struct BenchmarkConfig {
  std::vector<std::string> kinds{"psi1", "psi2", "psi3"};
  std::vector<int> dims{15};
  std::vector<double> kappas{0.1, 0.3, 0.6, 0.9};
  std::vector<int> components{1, 2, 3, 6};
  int n = 400;
  int reps = 50;
  int q = 20;
  int n_theta = 1000;
  double epsilon = 0.01;
  int l_max = 60;
  int burn_in = 100;
  std::uint64_t master_seed = 20260401;
  std::string weight = "bartlett";
  std::string noise_profile = "matched";  // or "exp"
  bool psi2_alt = false;
};

struct BenchmarkRow {
  std::string kind;
  int d = 0;
  double kappa = 0.0;
  int p = 0;
  std::string method;  // "dynamic" | "static"
  double mean_nmse = 0.0;
  double sd_nmse = 0.0;
  int reps = 0;
  std::uint64_t seed = 0;
};

namespace detail {

// One replication of one benchmark cell: NMSE per requested p for both methods.
struct RepResult {
  std::vector<double> dyn, stat;  // indexed like config.components
};

inline RepResult benchmark_rep(const BenchmarkConfig& cfg, const std::string& kind, int d,
                               double kappa, std::uint64_t cell_task, int rep) {
  auto op = make_operator(kind, d, kappa, derive_seed(cfg.master_seed, cell_task, 2 * rep),
                          cfg.psi2_alt);
  auto vars = noise_variances(cfg.noise_profile, kind, d, cfg.psi2_alt);
  auto fs = center(simulate_far1(op, vars, cfg.n, cfg.burn_in,
                                 derive_seed(cfg.master_seed, cell_task, 2 * rep + 1)));
  const int p_max = std::min(d, *std::max_element(cfg.components.begin(), cfg.components.end()));

  auto smodel = static_fpca(fs, p_max);
  auto sscores = static_scores(fs, smodel);

  auto acov = autocov(fs, cfg.q);
  auto sdm = lag_window_sdm(acov, cfg.q, cfg.weight, cfg.n_theta);
  auto eig = eigendecompose(sdm, p_max);
  auto dmodel = filter_coefficients(eig, cfg.epsilon, cfg.l_max);
  auto dscores = dynamic_scores(fs, dmodel);

  RepResult r;
  for (int p : cfg.components) {
    int pu = std::min(p, p_max);
    r.stat.push_back(nmse(fs, static_reconstruct(sscores, smodel, pu)));
    r.dyn.push_back(nmse(fs, dynamic_kl_reconstruct(dscores, dmodel, pu)));
  }
  return r;
}

}  // namespace detail

inline std::vector<BenchmarkRow> run_benchmark(const BenchmarkConfig& cfg) {
  if (cfg.reps < 1) throw std::invalid_argument("run_benchmark: need reps >= 1");
  if (cfg.n <= 2 * cfg.l_max)
    throw std::invalid_argument("run_benchmark: need n > 2*l_max");
  if (cfg.kinds.empty() || cfg.dims.empty() || cfg.kappas.empty() || cfg.components.empty())
    throw std::invalid_argument("run_benchmark: empty sweep list");
  int p_top = *std::max_element(cfg.components.begin(), cfg.components.end());
  for (int d : cfg.dims)
    if (p_top > d)
      throw std::invalid_argument("run_benchmark: component count exceeds dimension");

  std::vector<BenchmarkRow> rows;
  std::uint64_t cell_task = 0;
  for (const auto& kind : cfg.kinds)
    for (int d : cfg.dims)
      for (double kappa : cfg.kappas) {
        ++cell_task;
        std::vector<detail::RepResult> results(cfg.reps);
        std::vector<std::string> errors(cfg.reps);
        std::atomic<int> next{0};
        int nworkers = std::max(1, std::min(static_cast<int>(worker_threads()), cfg.reps));
        auto work = [&] {
          for (;;) {
            int r = next.fetch_add(1);
            if (r >= cfg.reps) return;
            try {
              results[r] = detail::benchmark_rep(cfg, kind, d, kappa, cell_task, r);
            } catch (const std::exception& e) {
              errors[r] = e.what();
            }
          }
        };
        if (nworkers == 1) {
          work();
        } else {
          std::vector<std::thread> pool;
          for (int w = 0; w < nworkers; ++w) pool.emplace_back(work);
          for (auto& t : pool) t.join();
        }
        for (int r = 0; r < cfg.reps; ++r)
          if (!errors[r].empty())
            throw numeric_error("run_benchmark: replication " + std::to_string(r) + " of cell " +
                                kind + "/d=" + std::to_string(d) + " failed: " + errors[r]);

        // ordered reduction by replication index
        for (std::size_t ip = 0; ip < cfg.components.size(); ++ip) {
          for (const char* method : {"dynamic", "static"}) {
            double mean = 0.0, m2 = 0.0;
            for (int r = 0; r < cfg.reps; ++r) {
              double v = (method[0] == 'd') ? results[r].dyn[ip] : results[r].stat[ip];
              mean += v;
            }
            mean /= cfg.reps;
            for (int r = 0; r < cfg.reps; ++r) {
              double v = (method[0] == 'd') ? results[r].dyn[ip] : results[r].stat[ip];
              m2 += (v - mean) * (v - mean);
            }
            BenchmarkRow row;
            row.kind = kind;
            row.d = d;
            row.kappa = kappa;
            row.p = cfg.components[ip];
            row.method = method;
            row.mean_nmse = mean;
            row.sd_nmse = cfg.reps > 1 ? std::sqrt(m2 / (cfg.reps - 1)) : 0.0;
            row.reps = cfg.reps;
            row.seed = cfg.master_seed;
            rows.push_back(row);
          }
        }
      }
  return rows;
}

}  // namespace dynfpc
