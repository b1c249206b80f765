#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "dynfpc/io.hpp"

using namespace dynfpc;
namespace fs = std::filesystem;

namespace {

struct TmpDir {
  fs::path path;
  TmpDir() {
    path = fs::temp_directory_path() / ("dynfpc_test_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TmpDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

int run_cli(const std::string& args) {
  std::string cmd = std::string("\"") + DYNFPC_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

FunctionalSeries random_series(int n, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  FunctionalSeries fs_;
  fs_.basis = make_coefficient_basis(d);
  fs_.coeffs.resize(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) fs_.coeffs(i, j) = nd(rng);
  return fs_;
}

}  // namespace

TEST_CASE("coefficient CSV round-trip is exact", "[io-cli]") {
  TmpDir tmp;
  auto series = random_series(17, 3, 5);
  series.coeffs(0, 0) = 1.0 / 3.0;  // a value with no short decimal form
  write_coeff_csv(tmp.file("c.csv"), series);
  auto back = load_series_csv(tmp.file("c.csv"));
  REQUIRE(back.n() == 17);
  REQUIRE(back.d() == 3);
  REQUIRE(back.basis.functions == "fourier");  // odd d gets an evaluable basis
  REQUIRE((back.coeffs - series.coeffs).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE_FALSE(back.mean.has_value());

  auto even = random_series(5, 4, 6);
  write_coeff_csv(tmp.file("e.csv"), even);
  REQUIRE(load_series_csv(tmp.file("e.csv")).basis.functions == "coefficient");
}

TEST_CASE("curve CSV round-trip through projection", "[io-cli]") {
  TmpDir tmp;
  auto series = random_series(8, 3, 11);
  series.basis = build_fourier_basis(3, 16);
  Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(32, 0.0, 1.0);
  write_curve_csv(tmp.file("curves.csv"), series, grid);
  auto back = load_series_csv(tmp.file("curves.csv"), 3);
  REQUIRE(back.basis.functions == "fourier");
  REQUIRE((back.coeffs - series.coeffs).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("malformed CSV input is reported with a line number", "[io-cli]") {
  TmpDir tmp;
  {
    std::ofstream out(tmp.file("bad.csv"));
    out << "t,c_1\n1,0.5\n2,oops\n";
  }
  try {
    load_series_csv(tmp.file("bad.csv"));
    FAIL("expected data_error");
  } catch (const data_error& e) {
    REQUIRE(std::string(e.what()).find(":3:") != std::string::npos);
  }
  {
    std::ofstream out(tmp.file("ragged.csv"));
    out << "t,c_1,c_2\n1,0.5,1.0\n2,0.5\n";
  }
  REQUIRE_THROWS_AS(load_series_csv(tmp.file("ragged.csv")), data_error);
  {
    std::ofstream out(tmp.file("odd.csv"));
    out << "z,c_1\n1,0.5\n";
  }
  REQUIRE_THROWS_AS(load_series_csv(tmp.file("odd.csv")), data_error);
  {
    std::ofstream out(tmp.file("empty.csv"));
  }
  REQUIRE_THROWS_AS(load_series_csv(tmp.file("empty.csv")), data_error);
  REQUIRE_THROWS_AS(load_series_csv(tmp.file("nothere.csv")), data_error);
}

TEST_CASE("score and cusum CSV shapes", "[io-cli]") {
  TmpDir tmp;
  ScoreSeries sc;
  sc.kind = "dynamic";
  sc.L = 1;
  sc.scores = Eigen::MatrixXd::Zero(3, 2);
  sc.scores << 1, 2, 3, 4, 5, 6;
  sc.valid = {0, 1, 0};
  write_scores_csv(tmp.file("s.csv"), sc);
  auto text = slurp(tmp.file("s.csv"));
  REQUIRE(text.rfind("t,Y_1,Y_2,valid\n", 0) == 0);
  REQUIRE(text.find("\n2,3,4,1\n") != std::string::npos);

  CusumResult res;
  res.values = Eigen::VectorXd::LinSpaced(4, 1.0, 4.0);
  res.sup_stat = 4.0;
  res.lambdas0 = Eigen::VectorXd::Ones(1);
  write_cusum_csv(tmp.file("cu.csv"), res);
  auto cu = slurp(tmp.file("cu.csv"));
  REQUIRE(cu.rfind("x,T\n0.25,1\n", 0) == 0);
  write_cusum_json(tmp.file("cu.json"), res);
  auto j = nlohmann::json::parse(slurp(tmp.file("cu.json")));
  REQUIRE(j["sup_stat"].get<double>() == 4.0);
}

TEST_CASE("model JSON round-trip preserves filters bitwise", "[io-cli]") {
  TmpDir tmp;
  // Genuinely dynamic model from an analytic VAR(1) spectrum.
  Eigen::MatrixXd A(3, 3), Sigma(3, 3);
  A << 0.5, 0.1, 0.0, 0.0, 0.3, 0.1, 0.1, 0.0, 0.2;
  Sigma = Eigen::Vector3d(1.0, 0.6, 0.3).asDiagonal();
  auto eig = eigendecompose(analytic_sdm_var1(A, Sigma, 128), 2);
  auto model = filter_coefficients(eig, 0.01, 30);
  model.mean = Eigen::Vector3d(0.1, -0.2, 0.3);
  write_model_json(tmp.file("m.json"), model);
  auto back = read_model_json(tmp.file("m.json"));
  REQUIRE(back.L == model.L);
  REQUIRE(back.l_capped == model.l_capped);
  REQUIRE(back.basis.functions == "coefficient");
  REQUIRE(back.basis.d == 3);
  REQUIRE(back.filters.size() == model.filters.size());
  for (std::size_t m = 0; m < model.filters.size(); ++m)
    REQUIRE((back.filters[m] - model.filters[m]).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE((back.captured_mass - model.captured_mass).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE((back.eigen.lambdas - model.eigen.lambdas).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE((back.eigen.ref - model.eigen.ref).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(back.mean.has_value());
  REQUIRE((*back.mean - *model.mean).cwiseAbs().maxCoeff() == 0.0);

  // scoring with the reloaded model matches the in-memory model exactly
  auto fs = center(random_series(40, 3, 21));
  auto s1 = dynamic_scores(fs, model);
  auto s2 = dynamic_scores(fs, back);
  REQUIRE((s1.scores - s2.scores).cwiseAbs().maxCoeff() == 0.0);

  REQUIRE_THROWS_AS(read_model_json(tmp.file("missing.json")), data_error);
  {
    std::ofstream out(tmp.file("junk.json"));
    out << "{not json";
  }
  REQUIRE_THROWS_AS(read_model_json(tmp.file("junk.json")), data_error);
}

TEST_CASE("spectral estimate JSON export", "[io-cli]") {
  TmpDir tmp;
  auto sdm = analytic_sdm_var1(Eigen::MatrixXd::Constant(1, 1, 0.5),
                               Eigen::MatrixXd::Identity(1, 1), 8);
  write_sdm_json(tmp.file("sdm.json"), sdm);
  auto j = nlohmann::json::parse(slurp(tmp.file("sdm.json")));
  REQUIRE(j["format"] == "dynfpc-sdm");
  REQUIRE(j["d"] == 1);
  REQUIRE(j["n_theta"] == 8);
  REQUIRE(j["matrices"].size() == 9);
  double re0 = j["matrices"][0][0][0][0].get<double>();
  REQUIRE(re0 == Catch::Approx(1.0 / (2 * M_PI * 0.25)).epsilon(1e-12));
  REQUIRE(j["matrices"][0][0][0][1].get<double>() == 0.0);
}

TEST_CASE("benchmark CSV format", "[io-cli]") {
  TmpDir tmp;
  BenchmarkRow row;
  row.kind = "psi1";
  row.d = 5;
  row.kappa = 0.5;
  row.p = 1;
  row.method = "dynamic";
  row.mean_nmse = 0.25;
  row.sd_nmse = 0.03125;
  row.reps = 2;
  row.seed = 42;
  write_benchmark_csv(tmp.file("b.csv"), {row});
  auto text = slurp(tmp.file("b.csv"));
  REQUIRE(text == "kind,d,kappa,p,method,mean_nmse,sd_nmse,reps,seed\n"
                  "psi1,5,0.5,1,dynamic,0.25,0.03125,2,42\n");
}

TEST_CASE("command-line pipeline: exit codes, outputs, determinism", "[io-cli]") {
  TmpDir tmp;
  std::string c = tmp.file("c.csv"), m = tmp.file("m.json");

  REQUIRE(run_cli("simulate --psi 1 --d 7 --kappa 0.6 --n 150 --seed 7 --out " + c) == 0);
  auto first = slurp(c);
  REQUIRE(run_cli("simulate --psi 1 --d 7 --kappa 0.6 --n 150 --seed 7 --out " + c) == 0);
  REQUIRE(slurp(c) == first);  // byte-identical rerun
  REQUIRE(run_cli("simulate --psi 1 --d 7 --kappa 0.6 --n 150 --seed 8 --out " +
                  tmp.file("c8.csv")) == 0);
  REQUIRE(slurp(tmp.file("c8.csv")) != first);

  REQUIRE(run_cli("fit --in " + c + " --p 2 --ntheta 200 --model-out " + m + " --report-out " +
                  tmp.file("r.csv") + " --sdm-out " + tmp.file("sdm.json")) == 0);
  REQUIRE(slurp(tmp.file("r.csv")).rfind("key,value\n", 0) == 0);

  REQUIRE(run_cli("transform --model " + m + " --in " + c + " --out " + tmp.file("s.csv")) == 0);
  REQUIRE(slurp(tmp.file("s.csv")).rfind("t,Y_1,Y_2,valid\n", 0) == 0);

  REQUIRE(run_cli("reconstruct --model " + m + " --in " + c + " --p 2 --out " +
                  tmp.file("rec.csv") + " --summary-out " + tmp.file("sum.csv")) == 0);
  auto sum = slurp(tmp.file("sum.csv"));
  REQUIRE(sum.rfind("method,p,nmse\n", 0) == 0);
  REQUIRE(sum.find("dynamic,2,") != std::string::npos);
  REQUIRE(sum.find("static,2,") != std::string::npos);

  REQUIRE(run_cli("cusum --model " + m + " --in " + c + " --out " + tmp.file("cu.csv") +
                  " --summary-out " + tmp.file("cu.json")) == 0);
  auto cj = nlohmann::json::parse(slurp(tmp.file("cu.json")));
  REQUIRE(cj["sup_stat"].get<double>() > 0.0);
  REQUIRE(cj["lambdas0"].size() == 2);

  REQUIRE(run_cli("benchmark --kinds psi1 --dims 5 --kappas 0.5 --components 1 --n 150 --reps 2"
                  " --ntheta 100 --q 12 --seed 3 --out " + tmp.file("b.csv")) == 0);
  auto b = slurp(tmp.file("b.csv"));
  REQUIRE(b.rfind("kind,d,kappa,p,method,mean_nmse,sd_nmse,reps,seed\n", 0) == 0);
  REQUIRE(b.find("psi1,5,0.5,1,dynamic,") != std::string::npos);
  REQUIRE(b.find("psi1,5,0.5,1,static,") != std::string::npos);

  // exit codes: usage (2), data (3)
  REQUIRE(run_cli("simulate --psi 1 --d 7 --kappa 1.2 --n 10 --out " + tmp.file("x.csv")) == 2);
  REQUIRE(run_cli("simulate --psi 1 --d 7") == 2);  // missing required --kappa
  REQUIRE(run_cli("fit --in " + tmp.file("absent.csv")) == 3);
  REQUIRE(run_cli("nosuchcommand") == 2);
  REQUIRE(run_cli("--help") == 0);
  REQUIRE(run_cli("fit --in " + c + " --p 99 --ntheta 50 --model-out " + tmp.file("z.json")) == 2);
}
