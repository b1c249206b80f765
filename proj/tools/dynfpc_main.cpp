// dynfpc: dynamic functional principal component analysis toolkit.
// Subcommands: simulate, fit, transform, reconstruct, cusum, benchmark.
#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "dynfpc/cusum.hpp"
#include "dynfpc/dpca.hpp"
#include "dynfpc/io.hpp"
#include "dynfpc/simgen.hpp"
#include "dynfpc/spca.hpp"

using namespace dynfpc;

namespace {

std::string psi_name(int psi) {
  if (psi < 1 || psi > 3) throw std::invalid_argument("--psi must be 1, 2, or 3");
  return "psi" + std::to_string(psi);
}

// Centers incoming data the way the model prescribes: with the model's own
// stored mean when present (so transform matches the fitted preprocessing),
// otherwise with the sample mean.
FunctionalSeries center_for_model(FunctionalSeries fs, const DynamicFpcModel& model) {
  if (model.mean) {
    if (model.mean->size() != fs.d())
      throw data_error("model/data dimension mismatch");
    fs.coeffs.rowwise() -= model.mean->transpose();
    fs.mean = *model.mean;
    return fs;
  }
  return center(fs);
}

Eigen::VectorXd parse_ref(const std::string& s, int d) {
  std::vector<double> vals;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
  if (static_cast<int>(vals.size()) != d)
    throw std::invalid_argument("--ref needs exactly d comma-separated values");
  return Eigen::Map<const Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

struct SimulateArgs {
  int psi = 1, d = 15, n = 400, burn_in = 100, grid = 64;
  double kappa = 0.5;
  std::uint64_t seed = 1;
  std::string noise = "exp", out = "coeffs.csv", curves_out;
  bool psi2_alt = false;
};

void run_simulate(const SimulateArgs& a) {
  auto op = make_operator(psi_name(a.psi), a.d, a.kappa, derive_seed(a.seed, 1, 0), a.psi2_alt);
  auto vars = noise_variances(a.noise, op.kind, a.d, a.psi2_alt);
  auto fs = simulate_far1(op, vars, a.n, a.burn_in, derive_seed(a.seed, 1, 1));
  write_coeff_csv(a.out, fs);
  if (!a.curves_out.empty()) {
    if (a.grid < 2) throw std::invalid_argument("--grid must be at least 2");
    write_curve_csv(a.curves_out, fs, Eigen::VectorXd::LinSpaced(a.grid, 0.0, 1.0));
  }
}

struct FitArgs {
  std::string in, model_out = "model.json", report_out, sdm_out, weight = "bartlett", ref;
  int d = 15, p = 1, q = 0, n_theta = 1000, l_max = 60;
  double epsilon = 0.01;
};

void run_fit(const FitArgs& a) {
  auto fs = center(load_series_csv(a.in, a.d));
  int q = a.q > 0 ? a.q : static_cast<int>(std::floor(std::sqrt(double(fs.n()))));
  auto acov = autocov(fs, q);
  auto sdm = lag_window_sdm(acov, q, a.weight, a.n_theta);
  if (!a.sdm_out.empty()) write_sdm_json(a.sdm_out, sdm);
  std::optional<Eigen::VectorXd> ref;
  if (!a.ref.empty()) ref = parse_ref(a.ref, fs.d());
  auto eig = eigendecompose(sdm, a.p, ref);
  auto model = filter_coefficients(eig, a.epsilon, a.l_max);
  model.mean = fs.mean;
  write_model_json(a.model_out, model);

  if (!a.report_out.empty()) {
    auto out = detail::open_out(a.report_out);
    out << "key,value\n";
    out << "n," << fs.n() << "\n";
    out << "d," << fs.d() << "\n";
    out << "p," << a.p << "\n";
    out << "q," << q << "\n";
    out << "n_theta," << a.n_theta << "\n";
    out << "weight," << a.weight << "\n";
    out << "epsilon," << detail::fmt17(a.epsilon) << "\n";
    out << "l_max," << a.l_max << "\n";
    out << "L," << model.L << "\n";
    out << "l_capped," << int(model.l_capped) << "\n";
    out << "max_imag," << detail::fmt17(model.max_imag) << "\n";
    out << "pv_dyn," << detail::fmt17(pv_dyn(eig, fs, a.p)) << "\n";
    auto smodel = static_fpca(fs, a.p);
    double trace = 0.0;
    for (int t = 0; t < fs.n(); ++t) trace += norm_sq(fs, t);
    trace /= fs.n();
    out << "pv_static," << detail::fmt17(smodel.eigenvalues.sum() / trace) << "\n";
    for (int m = 0; m < a.p; ++m) {
      out << "lambda0_" << (m + 1) << ',' << detail::fmt17(eig.lambdas(m, 0)) << "\n";
      out << "captured_mass_" << (m + 1) << ','
          << detail::fmt17(model.captured_mass[static_cast<std::size_t>(m)]) << "\n";
      out << "min_gap_" << (m + 1) << ',' << detail::fmt17(eig.min_gap(m)) << "\n";
    }
    if (!out) throw data_error("failed while writing '" + a.report_out + "'");
  }
}

struct TransformArgs {
  std::string model, in, out = "scores.csv";
};

void run_transform(const TransformArgs& a) {
  auto model = read_model_json(a.model);
  auto fs = center_for_model(load_series_csv(a.in, model.basis.d), model);
  write_scores_csv(a.out, dynamic_scores(fs, model));
}

struct ReconstructArgs {
  std::string model, in, out = "recon.csv", summary_out;
  int p = 0;  // 0 = all model components
};

void run_reconstruct(const ReconstructArgs& a) {
  auto model = read_model_json(a.model);
  auto fs = center_for_model(load_series_csv(a.in, model.basis.d), model);
  int p = a.p > 0 ? a.p : static_cast<int>(model.filters.size());
  auto scores = dynamic_scores(fs, model);
  auto rec = dynamic_kl_reconstruct(scores, model, p);
  double dyn = nmse(fs, rec);
  rec.mean = model.mean;  // written with the mean added back
  write_coeff_csv(a.out, rec, true);

  auto smodel = static_fpca(fs, std::min(p, fs.d()));
  double stat = nmse(fs, static_reconstruct(static_scores(fs, smodel), smodel, std::min(p, fs.d())));
  std::string summary = "method,p,nmse\n";
  summary += "dynamic," + std::to_string(p) + "," + detail::fmt17(dyn) + "\n";
  summary += "static," + std::to_string(std::min(p, fs.d())) + "," + detail::fmt17(stat) + "\n";
  if (a.summary_out.empty()) {
    std::cout << summary;
  } else {
    auto out = detail::open_out(a.summary_out);
    out << summary;
    if (!out) throw data_error("failed while writing '" + a.summary_out + "'");
  }
}

struct CusumArgs {
  std::string model, in, out = "cusum.csv", summary_out;
};

void run_cusum(const CusumArgs& a) {
  auto model = read_model_json(a.model);
  auto fs = center_for_model(load_series_csv(a.in, model.basis.d), model);
  auto scores = dynamic_scores(fs, model);
  Eigen::VectorXd lambdas0 = model.eigen.lambdas.col(0);
  auto res = cusum_dyn(scores, lambdas0);
  write_cusum_csv(a.out, res);
  if (!a.summary_out.empty()) write_cusum_json(a.summary_out, res);
}

struct BenchmarkArgs {
  std::vector<std::string> kinds{"psi1", "psi2", "psi3"};
  std::vector<int> dims{15};
  std::vector<double> kappas{0.1, 0.3, 0.6, 0.9};
  std::vector<int> components{1, 2, 3, 6};
  int n = 400, reps = 50, q = 20, n_theta = 1000, l_max = 60, burn_in = 100;
  double epsilon = 0.01;
  std::uint64_t seed = 20260401;
  std::string noise = "matched", weight = "bartlett", out = "benchmark.csv";
  bool psi2_alt = false;
};

void run_benchmark_cmd(const BenchmarkArgs& a) {
  BenchmarkConfig cfg;
  cfg.kinds = a.kinds;
  cfg.dims = a.dims;
  cfg.kappas = a.kappas;
  cfg.components = a.components;
  cfg.n = a.n;
  cfg.reps = a.reps;
  cfg.q = a.q > 0 ? a.q : static_cast<int>(std::floor(std::sqrt(double(a.n))));
  cfg.n_theta = a.n_theta;
  cfg.epsilon = a.epsilon;
  cfg.l_max = a.l_max;
  cfg.burn_in = a.burn_in;
  cfg.master_seed = a.seed;
  cfg.noise_profile = a.noise;
  cfg.weight = a.weight;
  cfg.psi2_alt = a.psi2_alt;
  write_benchmark_csv(a.out, run_benchmark(cfg));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dynamic FPCA: spectral estimation, filtering, reconstruction, benchmarking"};
  app.require_subcommand(1);

  SimulateArgs sa;
  auto* sim = app.add_subcommand("simulate", "simulate a functional AR(1) coefficient series");
  sim->add_option("--psi", sa.psi, "operator family: 1, 2, or 3")->required();
  sim->add_option("--d", sa.d, "basis dimension");
  sim->add_option("--kappa", sa.kappa, "operator norm, must be in (0,1)")->required();
  sim->add_option("--n", sa.n, "series length");
  sim->add_option("--seed", sa.seed, "master seed");
  sim->add_option("--burn-in", sa.burn_in, "discarded initial samples");
  sim->add_option("--noise", sa.noise, "innovation variance profile: exp | matched");
  sim->add_flag("--psi2-alt", sa.psi2_alt, "use the i^{3/2} variant of the psi2 profile");
  sim->add_option("--out", sa.out, "coefficient CSV path");
  sim->add_option("--curves-out", sa.curves_out, "optional evaluated-curve CSV path");
  sim->add_option("--grid", sa.grid, "evaluation grid size for --curves-out");
  sim->callback([&] { run_simulate(sa); });

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "fit a dynamic FPCA model to curve or coefficient data");
  fit->add_option("--in", fa.in, "input CSV (curve or coefficient)")->required();
  fit->add_option("--d", fa.d, "projection dimension for curve input");
  fit->add_option("--p", fa.p, "number of dynamic components");
  fit->add_option("--q", fa.q, "lag-window bandwidth (0 = floor(sqrt(n)))");
  fit->add_option("--ntheta", fa.n_theta, "frequency grid half-size");
  fit->add_option("--epsilon", fa.epsilon, "filter mass threshold");
  fit->add_option("--lmax", fa.l_max, "truncation lag cap");
  fit->add_option("--weight", fa.weight, "lag window: bartlett | triangular-hk | flat-top");
  fit->add_option("--ref", fa.ref, "alignment reference, d comma-separated values");
  fit->add_option("--model-out", fa.model_out, "model JSON path");
  fit->add_option("--report-out", fa.report_out, "diagnostic report CSV path");
  fit->add_option("--sdm-out", fa.sdm_out, "spectral density estimate JSON path");
  fit->callback([&] { run_fit(fa); });

  TransformArgs ta;
  auto* tr = app.add_subcommand("transform", "compute dynamic scores with a fitted model");
  tr->add_option("--model", ta.model, "model JSON")->required();
  tr->add_option("--in", ta.in, "input CSV")->required();
  tr->add_option("--out", ta.out, "score CSV path");
  tr->callback([&] { run_transform(ta); });

  ReconstructArgs ra;
  auto* rc = app.add_subcommand("reconstruct", "dynamic Karhunen-Loeve reconstruction plus NMSE");
  rc->add_option("--model", ra.model, "model JSON")->required();
  rc->add_option("--in", ra.in, "input CSV")->required();
  rc->add_option("--p", ra.p, "components to use (0 = all in model)");
  rc->add_option("--out", ra.out, "reconstruction coefficient CSV path");
  rc->add_option("--summary-out", ra.summary_out, "NMSE summary CSV path (stdout if omitted)");
  rc->callback([&] { run_reconstruct(ra); });

  CusumArgs ca;
  auto* cu = app.add_subcommand("cusum", "CUSUM change-point statistic on dynamic scores");
  cu->add_option("--model", ca.model, "model JSON")->required();
  cu->add_option("--in", ca.in, "input CSV")->required();
  cu->add_option("--out", ca.out, "CUSUM CSV path");
  cu->add_option("--summary-out", ca.summary_out, "summary JSON path");
  cu->callback([&] { run_cusum(ca); });

  BenchmarkArgs ba;
  auto* be = app.add_subcommand("benchmark", "Monte Carlo NMSE benchmark");
  be->add_option("--kinds", ba.kinds, "operator families")->delimiter(',');
  be->add_option("--dims", ba.dims, "dimensions")->delimiter(',');
  be->add_option("--kappas", ba.kappas, "operator norms")->delimiter(',');
  be->add_option("--components", ba.components, "component counts")->delimiter(',');
  be->add_option("--n", ba.n, "series length");
  be->add_option("--reps", ba.reps, "replications per cell");
  be->add_option("--q", ba.q, "bandwidth (0 = floor(sqrt(n)))");
  be->add_option("--ntheta", ba.n_theta, "frequency grid half-size");
  be->add_option("--epsilon", ba.epsilon, "filter mass threshold");
  be->add_option("--lmax", ba.l_max, "truncation lag cap");
  be->add_option("--burn-in", ba.burn_in, "discarded initial samples");
  be->add_option("--seed", ba.seed, "master seed");
  be->add_option("--noise", ba.noise, "innovation profile: matched | exp");
  be->add_option("--weight", ba.weight, "lag window kernel");
  be->add_flag("--psi2-alt", ba.psi2_alt, "use the i^{3/2} variant of the psi2 profile");
  be->add_option("--out", ba.out, "benchmark table CSV path");
  be->callback([&] { run_benchmark_cmd(ba); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const data_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const numeric_error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
