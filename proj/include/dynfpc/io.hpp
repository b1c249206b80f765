#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dynfpc/cusum.hpp"
#include "dynfpc/dpca.hpp"
#include "dynfpc/fbasis.hpp"
#include "dynfpc/simgen.hpp"
#include "dynfpc/specden.hpp"

namespace dynfpc {

namespace detail {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    std::size_t a = field.find_first_not_of(" \t\r");
    std::size_t b = field.find_last_not_of(" \t\r");
    out.push_back(a == std::string::npos ? "" : field.substr(a, b - a + 1));
  }
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

inline double parse_double(const std::string& s, const std::string& path, int lineno) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw data_error(path + ":" + std::to_string(lineno) + ": expected a number, got '" + s + "'");
  }
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;  // numeric payload, first column included
  std::string path;
};

inline CsvTable read_csv_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open '" + path + "' for reading");
  CsvTable t;
  t.path = path;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv_line(line);
    if (lineno == 1) {
      t.header = fields;
      continue;
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_double(f, path, lineno));
    if (!t.rows.empty() && row.size() != t.rows.front().size())
      throw data_error(path + ":" + std::to_string(lineno) + ": inconsistent column count");
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw data_error(path + ": empty file");
  return t;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot open '" + path + "' for writing");
  return out;
}

// Basis attached to coefficient data: Fourier when the dimension permits it
// (so curves can be evaluated later), abstract coordinates otherwise. Both
// have identity gram, so the numerical pipeline is unaffected.
inline BasisSpec default_basis_for(int d) {
  if (d >= 1 && d % 2 == 1) return build_fourier_basis(d, 4 * d);
  return make_coefficient_basis(d);
}

}  // namespace detail

// Coefficient CSV: header "t,c_1,...,c_d"; one row per curve, t = 1..n.
inline void write_coeff_csv(const std::string& path, const FunctionalSeries& series,
                            bool add_mean = false) {
  auto out = detail::open_out(path);
  out << "t";
  for (int j = 1; j <= series.d(); ++j) out << ",c_" << j;
  out << "\n";
  for (int t = 0; t < series.n(); ++t) {
    out << (t + 1);
    for (int j = 0; j < series.d(); ++j) {
      double v = series.coeffs(t, j);
      if (add_mean && series.mean) v += (*series.mean)(j);
      out << ',' << detail::fmt17(v);
    }
    out << "\n";
  }
  if (!out) throw data_error("failed while writing '" + path + "'");
}

// Curve CSV: header "u,<u_1>,...,<u_r>" carrying the grid; rows "t,x_t(u_1),...".
inline void write_curve_csv(const std::string& path, const FunctionalSeries& series,
                            const Eigen::VectorXd& points, bool uncentered = false) {
  Eigen::MatrixXd vals = evaluate(series, points, uncentered);
  auto out = detail::open_out(path);
  out << "u";
  for (Eigen::Index i = 0; i < points.size(); ++i) out << ',' << detail::fmt17(points(i));
  out << "\n";
  for (int t = 0; t < series.n(); ++t) {
    out << (t + 1);
    for (Eigen::Index i = 0; i < points.size(); ++i) out << ',' << detail::fmt17(vals(t, i));
    out << "\n";
  }
  if (!out) throw data_error("failed while writing '" + path + "'");
}

// Reads either coefficient CSV (header starts with "t") or curve CSV (header
// starts with "u", grid in the header). Curve samples are least-squares
// projected onto a Fourier basis of dimension d_curves.
inline FunctionalSeries load_series_csv(const std::string& path, int d_curves = 15) {
  auto t = detail::read_csv_table(path);
  if (t.rows.empty()) throw data_error(path + ": no data rows");
  const int ncol = static_cast<int>(t.rows.front().size());
  if (ncol < 2) throw data_error(path + ": need at least one value column");
  if (t.header.front() == "t") {
    FunctionalSeries fs;
    fs.coeffs.resize(static_cast<int>(t.rows.size()), ncol - 1);
    for (std::size_t i = 0; i < t.rows.size(); ++i)
      for (int j = 1; j < ncol; ++j) fs.coeffs(static_cast<int>(i), j - 1) = t.rows[i][j];
    fs.basis = detail::default_basis_for(ncol - 1);
    return fs;
  }
  if (t.header.front() == "u") {
    if (static_cast<int>(t.header.size()) != ncol)
      throw data_error(path + ": header grid width does not match data rows");
    Eigen::VectorXd grid(ncol - 1);
    for (int j = 1; j < ncol; ++j) grid(j - 1) = detail::parse_double(t.header[j], path, 1);
    Eigen::MatrixXd samples(static_cast<int>(t.rows.size()), ncol - 1);
    for (std::size_t i = 0; i < t.rows.size(); ++i)
      for (int j = 1; j < ncol; ++j) samples(static_cast<int>(i), j - 1) = t.rows[i][j];
    return project_curves(samples, grid, build_fourier_basis(d_curves, std::max(4 * d_curves, 1)));
  }
  throw data_error(path + ": unrecognized header '" + t.header.front() +
                   "' (expected 't' or 'u' in the first column)");
}

// Score CSV: header "t,Y_1,...,Y_p,valid".
inline void write_scores_csv(const std::string& path, const ScoreSeries& scores) {
  auto out = detail::open_out(path);
  const int n = static_cast<int>(scores.scores.rows());
  const int p = static_cast<int>(scores.scores.cols());
  out << "t";
  for (int m = 1; m <= p; ++m) out << ",Y_" << m;
  out << ",valid\n";
  for (int t = 0; t < n; ++t) {
    out << (t + 1);
    for (int m = 0; m < p; ++m) out << ',' << detail::fmt17(scores.scores(t, m));
    out << ',' << int(scores.valid[static_cast<std::size_t>(t)]) << "\n";
  }
  if (!out) throw data_error("failed while writing '" + path + "'");
}

inline void write_benchmark_csv(const std::string& path, const std::vector<BenchmarkRow>& rows) {
  auto out = detail::open_out(path);
  out << "kind,d,kappa,p,method,mean_nmse,sd_nmse,reps,seed\n";
  for (const auto& r : rows)
    out << r.kind << ',' << r.d << ',' << detail::fmt17(r.kappa) << ',' << r.p << ',' << r.method
        << ',' << detail::fmt17(r.mean_nmse) << ',' << detail::fmt17(r.sd_nmse) << ',' << r.reps
        << ',' << r.seed << "\n";
  if (!out) throw data_error("failed while writing '" + path + "'");
}

inline void write_cusum_csv(const std::string& path, const CusumResult& res) {
  auto out = detail::open_out(path);
  out << "x,T\n";
  const int n = static_cast<int>(res.values.size());
  for (int j = 1; j <= n; ++j)
    out << detail::fmt17(double(j) / n) << ',' << detail::fmt17(res.values(j - 1)) << "\n";
  if (!out) throw data_error("failed while writing '" + path + "'");
}

inline void write_cusum_json(const std::string& path, const CusumResult& res) {
  nlohmann::json j;
  j["sup_stat"] = res.sup_stat;
  j["lambdas0"] = std::vector<double>(res.lambdas0.data(), res.lambdas0.data() + res.lambdas0.size());
  auto out = detail::open_out(path);
  out << j.dump(2) << "\n";
  if (!out) throw data_error("failed while writing '" + path + "'");
}

namespace detail {

inline nlohmann::json basis_to_json(const BasisSpec& b) {
  nlohmann::json j;
  j["functions"] = b.functions;
  j["d"] = b.d;
  if (b.eval_grid.size() > 0) j["m_grid"] = b.eval_grid.size();
  return j;
}

inline BasisSpec basis_from_json(const nlohmann::json& j) {
  std::string functions = j.at("functions").get<std::string>();
  int d = j.at("d").get<int>();
  if (functions == "fourier")
    return build_fourier_basis(d, j.value("m_grid", 4 * d));
  if (functions == "coefficient") return make_coefficient_basis(d);
  throw data_error("model JSON names unknown basis '" + functions + "'");
}

}  // namespace detail

inline void write_model_json(const std::string& path, const DynamicFpcModel& model) {
  nlohmann::json j;
  j["format"] = "dynfpc-model";
  j["version"] = 1;
  j["basis"] = detail::basis_to_json(model.basis);
  j["L"] = model.L;
  j["l_capped"] = model.l_capped;
  j["max_imag"] = model.max_imag;
  j["captured_mass"] = std::vector<double>(model.captured_mass.data(),
                                           model.captured_mass.data() + model.captured_mass.size());
  nlohmann::json jf = nlohmann::json::array();
  for (const auto& F : model.filters) {
    nlohmann::json jm = nlohmann::json::array();
    for (Eigen::Index k = 0; k < F.cols(); ++k) {
      nlohmann::json jl = nlohmann::json::array();
      for (Eigen::Index i = 0; i < F.rows(); ++i) jl.push_back(F(i, k));
      jm.push_back(std::move(jl));
    }
    jf.push_back(std::move(jm));
  }
  j["filters"] = std::move(jf);
  if (model.mean)
    j["mean"] = std::vector<double>(model.mean->data(), model.mean->data() + model.mean->size());
  else
    j["mean"] = nullptr;
  nlohmann::json je;
  je["p"] = model.eigen.p;
  je["n_theta"] = model.eigen.n_theta;
  nlohmann::json jl = nlohmann::json::array();
  for (int m = 0; m < model.eigen.p; ++m) {
    nlohmann::json row = nlohmann::json::array();
    for (int k = 0; k <= model.eigen.n_theta; ++k) row.push_back(model.eigen.lambdas(m, k));
    jl.push_back(std::move(row));
  }
  je["lambdas"] = std::move(jl);
  je["ref"] = std::vector<double>(model.eigen.ref.data(),
                                  model.eigen.ref.data() + model.eigen.ref.size());
  je["min_gap"] = std::vector<double>(model.eigen.min_gap.data(),
                                      model.eigen.min_gap.data() + model.eigen.min_gap.size());
  j["eigen"] = std::move(je);
  auto out = detail::open_out(path);
  out << j.dump(2) << "\n";
  if (!out) throw data_error("failed while writing '" + path + "'");
}

// Loads a fitted model. Eigenvector curves are not persisted; the returned
// eigen block carries eigenvalue curves, reference, and gaps, which is what
// scoring, reconstruction, variance, and CUSUM need.
inline DynamicFpcModel read_model_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open '" + path + "' for reading");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw data_error(path + ": invalid JSON: " + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "dynfpc-model")
      throw data_error(path + ": not a model file");
    DynamicFpcModel model;
    model.basis = detail::basis_from_json(j.at("basis"));
    model.L = j.at("L").get<int>();
    model.l_capped = j.at("l_capped").get<bool>();
    model.max_imag = j.at("max_imag").get<double>();
    {
      auto cm = j.at("captured_mass").get<std::vector<double>>();
      model.captured_mass =
          Eigen::Map<const Eigen::VectorXd>(cm.data(), static_cast<Eigen::Index>(cm.size()));
    }
    for (const auto& jm : j.at("filters")) {
      Eigen::MatrixXd F(model.basis.d, static_cast<Eigen::Index>(jm.size()));
      if (static_cast<int>(jm.size()) != 2 * model.L + 1)
        throw data_error(path + ": filter lag count does not match L");
      for (Eigen::Index k = 0; k < F.cols(); ++k) {
        const auto& jl = jm.at(static_cast<std::size_t>(k));
        if (static_cast<int>(jl.size()) != model.basis.d)
          throw data_error(path + ": filter vector length does not match basis dimension");
        for (Eigen::Index i = 0; i < F.rows(); ++i)
          F(i, k) = jl.at(static_cast<std::size_t>(i)).get<double>();
      }
      model.filters.push_back(std::move(F));
    }
    if (!j.at("mean").is_null()) {
      auto v = j.at("mean").get<std::vector<double>>();
      model.mean = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    }
    const auto& je = j.at("eigen");
    model.eigen.p = je.at("p").get<int>();
    model.eigen.n_theta = je.at("n_theta").get<int>();
    model.eigen.basis = model.basis;
    model.eigen.lambdas.resize(model.eigen.p, model.eigen.n_theta + 1);
    const auto& jl = je.at("lambdas");
    if (static_cast<int>(jl.size()) != model.eigen.p)
      throw data_error(path + ": eigenvalue curve count does not match p");
    for (int m = 0; m < model.eigen.p; ++m)
      for (int k = 0; k <= model.eigen.n_theta; ++k)
        model.eigen.lambdas(m, k) = jl.at(m).at(k).get<double>();
    auto ref = je.at("ref").get<std::vector<double>>();
    model.eigen.ref =
        Eigen::Map<const Eigen::VectorXd>(ref.data(), static_cast<Eigen::Index>(ref.size()));
    auto gap = je.at("min_gap").get<std::vector<double>>();
    model.eigen.min_gap =
        Eigen::Map<const Eigen::VectorXd>(gap.data(), static_cast<Eigen::Index>(gap.size()));
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw data_error(path + ": malformed model JSON: " + e.what());
  }
}

// Spectral estimate as JSON: grid size and per-frequency matrices, each entry
// an (re, im) pair, for j = 0..n_theta (negative j by conjugate reflection).
inline void write_sdm_json(const std::string& path, const SpectralDensityEstimate& sdm) {
  nlohmann::json j;
  j["format"] = "dynfpc-sdm";
  j["version"] = 1;
  j["d"] = sdm.d;
  j["n_theta"] = sdm.n_theta;
  j["q"] = sdm.q;
  j["weight"] = sdm.weight;
  j["basis"] = detail::basis_to_json(sdm.basis);
  nlohmann::json mats = nlohmann::json::array();
  for (const auto& F : sdm.mats) {
    nlohmann::json jm = nlohmann::json::array();
    for (int r = 0; r < sdm.d; ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (int c = 0; c < sdm.d; ++c)
        row.push_back(nlohmann::json::array({F(r, c).real(), F(r, c).imag()}));
      jm.push_back(std::move(row));
    }
    mats.push_back(std::move(jm));
  }
  j["matrices"] = std::move(mats);
  auto out = detail::open_out(path);
  out << j.dump() << "\n";
  if (!out) throw data_error("failed while writing '" + path + "'");
}

}  // namespace dynfpc
