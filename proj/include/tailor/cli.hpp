#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tailor/compare.hpp"
#include "tailor/policy.hpp"
#include "tailor/scenario.hpp"

namespace tailor::cli {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> cycles;
  bool emit_trajectory = false;
};

inline void apply(const Overrides& ov, Scenario& sc) {
  if (ov.seed) sc.sim.seed = *ov.seed;
  if (ov.cycles) sc.sim.cycles = *ov.cycles;
  try {
    sc.sim.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config error at sim: ") + e.what());
  }
}

inline nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  try {
    return nlohmann::json::parse(in, nullptr, true, true);  // allow comments
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
}

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream os(p, std::ios::binary);  // '\n' endings everywhere
  if (!os) throw IoError("cannot write file: " + p.string());
  return os;
}

inline std::string fmt(double v, const char* spec = "%.10g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

inline void write_summary(const std::filesystem::path& dir, const Scenario& sc,
                          const SolvedPolicy& sp, double wall_s) {
  nlohmann::json res = nlohmann::json::array();
  for (const auto& r : sp.residuals) res.push_back({{"dv", r.dv}, {"drho", r.drho}});
  const nlohmann::json j = {
      {"scenario", sc.name},
      {"rho", sp.rho},
      {"iterations", sp.iterations},
      {"converged", sp.converged},
      {"residuals", res},
      {"max_eval_residual", sp.max_eval_residual},
      {"wall_time_s", wall_s},
      {"grid",
       {{"dt", sp.grids.dt},
        {"y_cut", sp.grids.y_cut()},
        {"state_nodes", sp.grids.m + 1},
        {"theta_fine", sp.grids.theta_fine},
        {"theta_max", sp.grids.theta_max},
        {"n_log", sp.grids.n_log},
        {"n_candidates", sp.grids.candidates.size() + 1},
        {"far_field_slope", sp.grids.slope},
        {"quad_horizon", sp.grids.t_act()}}}};
  auto os = open_out(dir / "summary.json");
  os << j.dump(2) << "\n";
}

inline SolvedPolicy solve_scenario_to(const std::filesystem::path& out_dir,
                                      const Scenario& sc) {
  std::filesystem::create_directories(out_dir);
  const auto t0 = std::chrono::steady_clock::now();
  const SolvedPolicy sp = policy_iteration(sc.dist, sc.kappa_s, sc.kappa_p,
                                           sc.grids, sc.solver);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_summary(out_dir, sc, sp, wall);
  auto os = open_out(out_dir / "policy.csv");
  write_policy_csv(os, sp);
  return sp;
}

inline SolvedPolicy run_solve(const std::string& cfg_path, const std::string& out_dir,
                              const Overrides& ov = {}) {
  Scenario sc = parse_scenario(load_json(cfg_path));
  apply(ov, sc);
  return solve_scenario_to(out_dir, sc);
}

/// Like run_solve but the service law comes from an empirical delay trace.
inline SolvedPolicy run_trace(const std::string& cfg_path, const std::string& trace_path,
                              const std::string& out_dir, const Overrides& ov = {}) {
  nlohmann::json j = load_json(cfg_path);
  j["distribution"] = {{"family", "tabulated"}, {"path", trace_path}};
  Scenario sc = parse_scenario(j);
  apply(ov, sc);
  return solve_scenario_to(out_dir, sc);
}

inline std::vector<Scenario> parse_scenario_set(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("scenarios"))
    throw ConfigError("config error: expected an object with a 'scenarios' array");
  detail::check_keys(j, {"scenarios"}, "");
  const auto& arr = j.at("scenarios");
  if (!arr.is_array())
    throw ConfigError("config error: 'scenarios' must be an array");
  std::vector<Scenario> v;
  for (std::size_t i = 0; i < arr.size(); ++i)
    v.push_back(parse_scenario(arr[i], "scenario_" + std::to_string(i + 1)));
  return v;
}

inline void write_comparison_csv(const std::filesystem::path& p,
                                 const std::vector<CompareRow>& rows) {
  auto os = open_out(p);
  os << "scenario,tailor_rho,tailor_sim,tailor_stderr,aoinp_rho,aoinp_sim,"
        "zw_rho,zw_sim,ratio_aoinp,ratio_zw\n";
  for (const auto& r : rows) {
    os << r.scenario << ',' << fmt(r.tailor_rho) << ',' << fmt(r.tailor_sim) << ','
       << fmt(r.tailor_stderr) << ',' << fmt(r.aoinp_rho) << ',' << fmt(r.aoinp_sim)
       << ',' << fmt(r.zw_rho) << ',' << fmt(r.zw_sim) << ','
       << fmt(r.ratio_aoinp, "%.3g") << ',' << fmt(r.ratio_zw, "%.3g") << '\n';
  }
}

inline std::vector<CompareRow> run_compare(const std::string& cfg_path,
                                           const std::string& out_dir,
                                           const Overrides& ov = {}) {
  std::vector<Scenario> scenarios = parse_scenario_set(load_json(cfg_path));
  for (auto& sc : scenarios) apply(ov, sc);
  const auto rows = compare_scenarios(scenarios);
  std::filesystem::create_directories(out_dir);
  write_comparison_csv(std::filesystem::path(out_dir) / "comparison.csv", rows);
  return rows;
}

inline std::vector<CompareRow> run_table1(const std::string& out_dir,
                                          const Overrides& ov = {}) {
  std::vector<Scenario> scenarios = table1_scenarios();
  for (auto& sc : scenarios) apply(ov, sc);
  const auto rows = compare_scenarios(scenarios);
  std::filesystem::create_directories(out_dir);
  write_comparison_csv(std::filesystem::path(out_dir) / "comparison.csv", rows);
  return rows;
}

/// Simulates one policy ("tailor" solves first; "aoinp"/"zw" are analytic
/// baselines) and writes simulation.csv plus an optional event trajectory.
inline SimResult run_simulate(const std::string& cfg_path, const std::string& out_dir,
                              const std::string& policy_name, const Overrides& ov = {}) {
  Scenario sc = parse_scenario(load_json(cfg_path));
  apply(ov, sc);
  std::filesystem::create_directories(out_dir);

  SimPolicy pol;
  if (policy_name == "tailor") {
    pol = make_sim_policy(solve_scenario_to(out_dir, sc));
  } else if (policy_name == "aoinp") {
    pol = threshold_policy(aoi_np_solve(sc.dist, sc.kappa_s).beta);
  } else if (policy_name == "zw") {
    pol = threshold_policy(0.0);
  } else {
    throw ConfigError("config error: unknown policy '" + policy_name +
                      "'; supported: tailor, aoinp, zw");
  }

  std::ofstream traj;
  TrajectorySink sink = nullptr;
  if (ov.emit_trajectory) {
    traj = open_out(std::filesystem::path(out_dir) / "trajectory.csv");
    traj << "t,aoi,mode,event\n";
    sink = [&traj](double t, double aoi, char mode, const char* ev) {
      traj << fmt(t) << ',' << fmt(aoi) << ',' << mode << ',' << ev << '\n';
    };
  }

  const SimResult r = simulate(pol, sc.dist, sc.kappa_s, sc.kappa_p, sc.sim, sink);
  auto os = open_out(std::filesystem::path(out_dir) / "simulation.csv");
  os << "scenario,policy,avg_cost,stderr,n_samples,n_preemptions,n_deliveries,"
        "sim_time\n";
  os << sc.name << ',' << policy_name << ',' << fmt(r.avg_cost) << ','
     << fmt(r.stderr_est) << ',' << r.n_samples << ',' << r.n_preemptions << ','
     << r.n_deliveries << ',' << fmt(r.elapsed_sim_time) << '\n';
  return r;
}

}  // namespace tailor::cli
