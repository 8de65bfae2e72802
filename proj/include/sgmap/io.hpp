#pragma once

// CSV / JSON serialization for data sets, priors, configurations and reports.

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgmap/harness.hpp"
#include "sgmap/lasso.hpp"
#include "sgmap/map_estimator.hpp"
#include "sgmap/model.hpp"
#include "sgmap/priors.hpp"

namespace sgmap::io {

using json = nlohmann::json;

struct format_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string num_fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

namespace detail {

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

inline double to_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw format_error("not a number: '" + s + "'");
  }
  while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used]))) ++used;
  if (used != s.size()) throw format_error("trailing characters in number: '" + s + "'");
  return v;
}

inline void write_rows(std::ostream& os, const RealMatrix& v) {
  for (std::size_t j = 0; j < v.rows(); ++j) {
    for (std::size_t i = 0; i < v.cols(); ++i) os << (i ? "," : "") << num(v(j, i));
    os << '\n';
  }
}

inline json rows_json(const RealMatrix& v) {
  json rows = json::array();
  for (std::size_t j = 0; j < v.rows(); ++j) rows.push_back(std::vector<double>(v.row(j).begin(), v.row(j).end()));
  return rows;
}

inline RealMatrix rows_from_json(const json& rows) {
  if (!rows.is_array() || rows.empty()) throw format_error("values must be a non-empty array of rows");
  const std::size_t m = rows.size(), n = rows[0].size();
  RealMatrix v(m, n);
  for (std::size_t j = 0; j < m; ++j) {
    if (rows[j].size() != n) throw format_error("ragged rows");
    for (std::size_t i = 0; i < n; ++i) v(j, i) = rows[j][i].get<double>();
  }
  return v;
}

/// Parses "n=<n> sigma=<s>" (sigma optional). Returns {n, sigma or 0}.
inline std::pair<std::size_t, double> parse_header(const std::string& line) {
  std::istringstream ss(line);
  std::string tok;
  std::size_t n = 0;
  double sigma = 0.0;
  bool have_n = false;
  while (ss >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw format_error("bad CSV header token '" + tok + "'");
    const auto key = tok.substr(0, eq), val = tok.substr(eq + 1);
    if (key == "n") {
      n = static_cast<std::size_t>(to_double(val));
      have_n = true;
    } else if (key == "sigma") {
      sigma = to_double(val);
    } else {
      throw format_error("unknown CSV header key '" + key + "'");
    }
  }
  if (!have_n) throw format_error("CSV header must declare n=<n>");
  return {n, sigma};
}

inline std::pair<RealMatrix, double> read_matrix_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw format_error("empty CSV");
  const auto [n, sigma] = parse_header(line);
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    if (line.back() == '\r') line.pop_back();
    std::vector<double> row;
    for (const auto& c : split(line, ',')) row.push_back(to_double(c));
    if (row.size() != n) throw format_error("CSV row length differs from header n");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw format_error("CSV has no data rows");
  RealMatrix v(rows.size(), n);
  for (std::size_t j = 0; j < rows.size(); ++j)
    for (std::size_t i = 0; i < n; ++i) v(j, i) = rows[j][i];
  return {std::move(v), sigma};
}

}  // namespace detail

// -- ObservationSet / MeanSet -------------------------------------------------

inline void write_csv(std::ostream& os, const ObservationSet& y) {
  os << "n=" << y.n() << " sigma=" << num(y.sigma()) << '\n';
  detail::write_rows(os, y.values());
}

inline void write_csv(std::ostream& os, const MeanSet& mu) {
  os << "n=" << mu.n() << '\n';
  detail::write_rows(os, mu.values());
}

inline ObservationSet read_observations_csv(std::istream& is) {
  auto [v, sigma] = detail::read_matrix_csv(is);
  if (!(sigma > 0)) throw format_error("observation CSV header needs sigma=<positive>");
  return ObservationSet(std::move(v), sigma);
}

inline MeanSet read_means_csv(std::istream& is) { return MeanSet(detail::read_matrix_csv(is).first); }

inline json to_json(const ObservationSet& y) {
  return {{"m", y.m()}, {"n", y.n()}, {"sigma", y.sigma()}, {"values", detail::rows_json(y.values())}};
}

inline json to_json(const MeanSet& mu) {
  return {{"m", mu.m()}, {"n", mu.n()}, {"values", detail::rows_json(mu.values())}};
}

inline ObservationSet observations_from_json(const json& j) {
  auto v = detail::rows_from_json(j.at("values"));
  if (j.contains("m") && j.at("m").get<std::size_t>() != v.rows()) throw format_error("m disagrees with values");
  if (j.contains("n") && j.at("n").get<std::size_t>() != v.cols()) throw format_error("n disagrees with values");
  return ObservationSet(std::move(v), j.at("sigma").get<double>());
}

inline MeanSet means_from_json(const json& j) { return MeanSet(detail::rows_from_json(j.at("values"))); }

/// Loads observations from a .json or CSV file (by extension).
inline ObservationSet load_observations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw format_error("cannot open " + path);
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") return observations_from_json(json::parse(in));
  return read_observations_csv(in);
}

// -- priors and configs -------------------------------------------------------

inline json to_json(const PriorDescriptor& d) {
  return std::visit(
      [](const auto& k) -> json {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, prior_kind::Binomial>) return {{"kind", "binomial"}, {"K", k.K}, {"xi", k.xi}};
        else if constexpr (std::is_same_v<T, prior_kind::Geometric>)
          return {{"kind", "geometric"}, {"K", k.K}, {"q", k.q}, {"include_zero", k.include_zero}};
        else if constexpr (std::is_same_v<T, prior_kind::Uniform>)
          return {{"kind", "uniform"}, {"K", k.K}, {"include_zero", k.include_zero}};
        else return {{"kind", "custom"}, {"masses", k.masses}};
      },
      d);
}

inline json to_json(const SparsityPrior& p) { return to_json(p.descriptor()); }

inline SparsityPrior prior_from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "binomial") return binomial_prior(j.at("K").get<std::size_t>(), j.at("xi").get<double>());
  if (kind == "geometric")
    return truncated_geometric_prior(j.at("K").get<std::size_t>(), j.at("q").get<double>(),
                                     j.value("include_zero", false));
  if (kind == "uniform") return uniform_prior(j.at("K").get<std::size_t>(), j.value("include_zero", true));
  if (kind == "custom") return custom_prior(j.at("masses").get<std::vector<double>>());
  throw format_error("unknown prior kind '" + kind + "'");
}

inline json to_json(const PenaltyConfig& c) {
  json within = json::array();
  for (const auto& p : c.within_priors) within.push_back(to_json(p));
  return {{"gamma", c.gamma},
          {"sigma", c.sigma},
          {"form", c.form == PenaltyForm::bayes ? "bayes" : "complexity"},
          {"between_prior", to_json(c.between_prior)},
          {"within_priors", within}};
}

/// Reads a penalty configuration. "sigma" defaults to `default_sigma`;
/// "within_prior" (one shared) or "within_priors" (list) are accepted.
inline PenaltyConfig config_from_json(const json& j, double default_sigma = 1.0) {
  PenaltyConfig c{j.at("gamma").get<double>(), j.value("sigma", default_sigma), prior_from_json(j.at("between_prior")),
                  {}, PenaltyForm::bayes};
  if (j.contains("within_prior")) c.within_priors.push_back(prior_from_json(j.at("within_prior")));
  if (j.contains("within_priors"))
    for (const auto& p : j.at("within_priors")) c.within_priors.push_back(prior_from_json(p));
  if (c.within_priors.empty()) throw format_error("config needs within_prior or within_priors");
  const auto form = j.value("form", std::string("bayes"));
  if (form == "complexity") c.form = PenaltyForm::complexity;
  else if (form != "bayes") throw format_error("form must be bayes or complexity");
  return c;
}

inline json to_json(const SimScenario& s) {
  return {{"m", s.m},         {"n", s.n},         {"nonzero_counts", s.nonzero_counts},
          {"tau", s.tau},     {"sigma", s.sigma}, {"replications", s.replications},
          {"seed", s.seed},   {"fixed_signal", s.fixed_signal}};
}

inline SimScenario scenario_from_json(const json& j) {
  SimScenario s;
  s.m = j.at("m").get<std::size_t>();
  s.n = j.at("n").get<std::size_t>();
  s.nonzero_counts = j.at("nonzero_counts").get<std::vector<std::size_t>>();
  s.tau = j.at("tau").get<double>();
  s.sigma = j.value("sigma", 1.0);
  s.replications = j.value("replications", std::size_t{1000});
  s.seed = j.value("seed", std::uint64_t{0});
  s.fixed_signal = j.value("fixed_signal", false);
  s.validate();
  return s;
}

// -- results ------------------------------------------------------------------

inline json to_json(const EstimateResult& r) {
  json h = json::array(), w = json::array();
  for (const auto& s : r.scores) {
    h.push_back(s.h_hat);
    w.push_back(s.w);
  }
  return {{"m0_hat", r.m0_hat}, {"selected", r.selected_groups}, {"h_hat", h},
          {"W", w},             {"objective", r.objective},      {"estimate", detail::rows_json(r.estimate.values())}};
}

inline json to_json(const TuneResult& t) {
  return {{"mode", t.mode == TuneMode::semi ? "semi" : "full"},
          {"lambda1", t.best_params.lambda1},
          {"lambda2", t.best_params.lambda2},
          {"mse", t.best_mse},
          {"se", t.best_se},
          {"grid_points", t.grid.size()}};
}

inline void write_grid_csv(std::ostream& os, const TuneResult& t) {
  os << "lambda1,lambda2,mse,se\n";
  for (const auto& p : t.grid)
    os << num(p.params.lambda1) << ',' << num(p.params.lambda2) << ',' << num(p.mse) << ',' << num(p.se) << '\n';
}

inline json to_json(const MSEReport& r) {
  json j = {{"estimator", r.estimator}, {"gamma", r.gamma}, {"mse", r.mse},
            {"se", r.standard_error},   {"reps", r.replications}, {"seed", r.seed}};
  if (r.params) {
    j["lambda1"] = r.params->lambda1;
    j["lambda2"] = r.params->lambda2;
  }
  return j;
}

inline constexpr const char* report_csv_header = "gamma,estimator,mse,se,reps,seed,lambda1,lambda2";

/// Long-format report CSV; the first six columns are gamma, estimator, mse,
/// se, reps, seed. lambda1/lambda2 are blank for non-lasso estimators.
inline void write_reports_csv(std::ostream& os, const std::vector<MSEReport>& reports) {
  os << report_csv_header << '\n';
  for (const auto& r : reports) {
    os << num(r.gamma) << ',' << r.estimator << ',' << num(r.mse) << ',' << num(r.standard_error) << ','
       << r.replications << ',' << r.seed << ',';
    if (r.params) os << num(r.params->lambda1) << ',' << num(r.params->lambda2);
    else os << ',';
    os << '\n';
  }
}

inline std::vector<MSEReport> read_reports_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("gamma,estimator,mse,se,reps,seed", 0) != 0)
    throw format_error("report CSV: unexpected header");
  std::vector<MSEReport> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto c = detail::split(line, ',');
    if (c.size() != 8) throw format_error("report CSV: expected 8 columns");
    MSEReport r;
    r.gamma = detail::to_double(c[0]);
    r.estimator = c[1];
    r.mse = detail::to_double(c[2]);
    r.standard_error = detail::to_double(c[3]);
    r.replications = std::stoull(c[4]);
    r.seed = std::stoull(c[5]);
    if (!c[6].empty()) r.params = LassoParams{detail::to_double(c[6]), detail::to_double(c[7])};
    out.push_back(std::move(r));
  }
  return out;
}

/// Wide text layout: one row per gamma, one column per estimator, SE in
/// brackets on the following line.
inline void write_table3_text(std::ostream& os, const std::vector<MSEReport>& reports) {
  std::vector<std::string> names;
  for (const auto& r : reports)
    if (std::find(names.begin(), names.end(), r.estimator) == names.end()) names.push_back(r.estimator);
  os << std::setw(6) << "gamma";
  for (const auto& n : names) os << std::setw(18) << n;
  os << '\n' << std::fixed << std::setprecision(2);
  for (double g : table_gammas()) {
    std::ostringstream mse, se;
    mse << std::fixed << std::setprecision(2);
    se << std::fixed << std::setprecision(2);
    for (const auto& n : names)
      for (const auto& r : reports)
        if (r.gamma == g && r.estimator == n) {
          mse << std::setw(18) << r.mse;
          se << std::setw(18) << ("(" + num_fixed(r.standard_error) + ")");
        }
    os << std::setw(6) << g << mse.str() << '\n' << std::setw(6) << "" << se.str() << '\n';
  }
  os.unsetf(std::ios::fixed);
}

inline void write_table2_csv(std::ostream& os, const std::vector<Table2Row>& rows) {
  os << "gamma,lambda1,lambda2,mse,se\n";
  for (const auto& r : rows)
    os << num(r.gamma) << ',' << num(r.params.lambda1) << ',' << num(r.params.lambda2) << ',' << num(r.mse) << ','
       << num(r.se) << '\n';
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "m,n,m0,eta,k,risk,se,bound,ratio\n";
  for (const auto& r : rows)
    os << r.config.m << ',' << r.config.n << ',' << r.config.m0 << ',' << num(r.config.eta) << ','
       << r.nonzeros_per_group << ',' << num(r.risk) << ',' << num(r.se) << ',' << num(r.bound) << ','
       << num(r.ratio) << '\n';
}

}  // namespace sgmap::io
