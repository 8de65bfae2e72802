#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "sgmap/sgmap.hpp"

namespace {

using sgmap::io::json;

struct Common {
  std::size_t reps = 1000;
  std::uint64_t seed = 20130101;
  std::string out;
  std::string format = "csv";
  std::size_t threads = 0;
};

void add_common(CLI::App* cmd, Common& c, bool with_reps = true) {
  if (with_reps) cmd->add_option("--reps", c.reps, "Monte Carlo replications")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", c.seed, "Base RNG seed");
  cmd->add_option("--out", c.out, "Output path (default: stdout)");
  cmd->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json", "text"}));
  cmd->add_option("--threads", c.threads, "Worker threads (0 = all cores)");
}

/// Writes `text` to --out or stdout.
void emit(const Common& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(c.out);
  if (!f) throw std::runtime_error("cannot write " + c.out);
  f << text;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return json::parse(in);
}

std::string reports_text(const Common& c, const std::vector<sgmap::MSEReport>& reports) {
  std::ostringstream os;
  if (c.format == "json") {
    json arr = json::array();
    for (const auto& r : reports) arr.push_back(sgmap::io::to_json(r));
    os << arr.dump(2) << '\n';
  } else if (c.format == "text") {
    sgmap::io::write_table3_text(os, reports);
  } else {
    sgmap::io::write_reports_csv(os, reports);
  }
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse group MAP estimation and simulation harness"};
  app.require_subcommand(1);

  // estimate
  Common est_c;
  std::string data_path, config_path;
  auto* est = app.add_subcommand("estimate", "Run the sparse group MAP estimator on a data file");
  est->add_option("--data", data_path, "Observations (.csv or .json)")->required();
  est->add_option("--config", config_path, "Penalty configuration (.json)")->required();
  est->add_option("--out", est_c.out, "Output path (default: stdout)");

  // simulate
  Common sim_c;
  std::string scenario_path, estimator_label = "map-binomial", grid_text;
  double tau = 3.0, gamma = 0.0;
  bool fixed_signal = false;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo MSE of one estimator on a scenario");
  sim->add_option("--scenario", scenario_path, "Scenario JSON (default: the ten-group design)");
  sim->add_option("--tau", tau, "Signal sd for the default scenario");
  sim->add_option("--estimator", estimator_label,
                  "map-binomial | map-geometric | sgl-semi | sgl-full | sgl:<l1>:<l2> | group-lasso:<l> | zero "
                  "(MAP labels accept a -complexity suffix)");
  sim->add_option("--gamma", gamma, "Slab variance ratio (default tau^2/sigma^2)");
  sim->add_option("--grid", grid_text, "Oracle grid, e.g. l1=0:20:0.1;l2=0:8:0.1");
  sim->add_flag("--fixed-signal", fixed_signal, "Draw the signal once and reuse it across replications");
  add_common(sim, sim_c);

  // table3
  Common t3_c;
  std::string t3_grid, t3_estimators;
  auto* t3 = app.add_subcommand("table3", "MSE table: four estimators x gamma in {1, 9, 25}");
  t3->add_option("--grid", t3_grid, "Oracle grid for the lasso estimators");
  t3->add_option("--estimators", t3_estimators, "Comma-separated estimator labels (default: the four standard ones)");
  add_common(t3, t3_c);

  // table2
  Common t2_c;
  std::string t2_grid;
  auto* t2 = app.add_subcommand("table2", "Fully-oracle sparse group lasso (lambda1, lambda2) per gamma");
  t2->add_option("--grid", t2_grid, "Grid spec, e.g. l1=0:20:0.1;l2=0:8:0.1");
  add_common(t2, t2_c);

  // tune
  Common tune_c;
  std::string tune_scenario, tune_mode = "full", tune_grid, grid_out;
  double tune_tau = 3.0;
  auto* tune = app.add_subcommand("tune", "Oracle grid search for sparse group lasso parameters");
  tune->add_option("--scenario", tune_scenario, "Scenario JSON (default: the ten-group design)");
  tune->add_option("--tau", tune_tau, "Signal sd for the default scenario");
  tune->add_option("--mode", tune_mode, "semi | full")->check(CLI::IsMember({"semi", "full"}));
  tune->add_option("--grid", tune_grid, "Grid spec");
  tune->add_option("--grid-out", grid_out, "CSV file for the full grid surface");
  add_common(tune, tune_c);

  // rate-sweep
  Common rs_c;
  double amplitude = 5.0, q = 0.3;
  auto* rs = app.add_subcommand("rate-sweep", "Empirical risk vs. minimax bound on l0 designs");
  rs->add_option("--amplitude", amplitude, "Nonzero magnitude in units of sigma");
  rs->add_option("--q", q, "Geometric prior parameter for both levels");
  add_common(rs, rs_c);
  rs_c.reps = 200;

  CLI11_PARSE(app, argc, argv);

  try {
    if (*est) {
      const auto data = sgmap::io::load_observations(data_path);
      const auto cfg = sgmap::io::config_from_json(read_json_file(config_path), data.sigma());
      emit(est_c, sgmap::io::to_json(sgmap::estimate(data, cfg)).dump(2) + "\n");
    } else if (*sim) {
      auto sc = scenario_path.empty() ? sgmap::SimScenario::standard(tau)
                                      : sgmap::io::scenario_from_json(read_json_file(scenario_path));
      if (sim->count("--reps") || scenario_path.empty()) sc.replications = sim_c.reps;
      if (sim->count("--seed") || scenario_path.empty()) sc.seed = sim_c.seed;
      sc.fixed_signal = sc.fixed_signal || fixed_signal;
      const double g = gamma > 0 ? gamma : sc.tau * sc.tau / (sc.sigma * sc.sigma);
      sgmap::RunOptions opt{sim_c.threads, grid_text.empty() ? sgmap::GridSpec::defaults()
                                                             : sgmap::GridSpec::parse(grid_text)};
      const auto rep = sgmap::run_mse(sc, sgmap::parse_estimator(estimator_label), g, opt);
      emit(sim_c, reports_text(sim_c, {rep}));
    } else if (*t3) {
      sgmap::RunOptions opt{t3_c.threads,
                            t3_grid.empty() ? sgmap::GridSpec::defaults() : sgmap::GridSpec::parse(t3_grid)};
      auto estimators = sgmap::table3_estimators();
      if (!t3_estimators.empty()) {
        estimators.clear();
        std::istringstream ss(t3_estimators);
        for (std::string label; std::getline(ss, label, ',');) estimators.push_back(sgmap::parse_estimator(label));
      }
      emit(t3_c, reports_text(t3_c, sgmap::reproduce_table3(t3_c.reps, t3_c.seed, opt, estimators)));
    } else if (*t2) {
      const auto grid = t2_grid.empty() ? sgmap::GridSpec::defaults() : sgmap::GridSpec::parse(t2_grid);
      const auto rows = sgmap::reproduce_table2(grid, t2_c.reps, t2_c.seed, t2_c.threads);
      std::ostringstream os;
      if (t2_c.format == "json") {
        json arr = json::array();
        for (const auto& r : rows)
          arr.push_back({{"gamma", r.gamma}, {"lambda1", r.params.lambda1}, {"lambda2", r.params.lambda2},
                         {"mse", r.mse}, {"se", r.se}});
        os << arr.dump(2) << '\n';
      } else {
        sgmap::io::write_table2_csv(os, rows);
      }
      emit(t2_c, os.str());
    } else if (*tune) {
      auto sc = tune_scenario.empty() ? sgmap::SimScenario::standard(tune_tau)
                                      : sgmap::io::scenario_from_json(read_json_file(tune_scenario));
      if (tune->count("--seed") || tune_scenario.empty()) sc.seed = tune_c.seed;
      const auto grid = tune_grid.empty() ? sgmap::GridSpec::defaults() : sgmap::GridSpec::parse(tune_grid);
      const auto res = sgmap::oracle_tune(sc, tune_mode == "semi" ? sgmap::TuneMode::semi : sgmap::TuneMode::full,
                                          grid, tune_c.reps, tune_c.threads);
      if (!grid_out.empty()) {
        std::ofstream f(grid_out);
        if (!f) throw std::runtime_error("cannot write " + grid_out);
        sgmap::io::write_grid_csv(f, res);
      }
      emit(tune_c, sgmap::io::to_json(res).dump(2) + "\n");
    } else if (*rs) {
      const double g = amplitude * amplitude;
      const auto rows = sgmap::rate_sweep(
          sgmap::default_sweep_grid(),
          [&](std::size_t m, std::size_t n) { return sgmap::geometric_config(m, n, g, 1.0, q, q); }, rs_c.reps,
          rs_c.seed, amplitude, 1.0, rs_c.threads);
      std::ostringstream os;
      sgmap::io::write_sweep_csv(os, rows);
      emit(rs_c, os.str());
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
