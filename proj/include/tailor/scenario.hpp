#pragma once

#include <cmath>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tailor/distributions.hpp"
#include "tailor/grids.hpp"
#include "tailor/simulator.hpp"
#include "tailor/solver.hpp"

namespace tailor {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One fully resolved run: distribution, costs, grids, solver and simulation
/// settings.
struct Scenario {
  std::string name;
  ServiceDistribution dist;
  double kappa_s = 1.0;
  double kappa_p = 1.0;
  Grids grids;
  SolverOptions solver;
  SimConfig sim;
};

namespace detail {

using nlohmann::json;

inline void check_keys(const json& obj, const std::set<std::string>& allowed,
                       const std::string& path) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key()))
      throw ConfigError("config error: unknown field '" +
                        (path.empty() ? it.key() : path + "." + it.key()) + "'");
  }
}

inline double get_num(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key))
    throw ConfigError("config error: missing field '" + path + "." + key + "'");
  const auto& v = obj.at(key);
  if (!v.is_number())
    throw ConfigError("config error: field '" + path + "." + key + "' must be a number");
  return v.get<double>();
}

inline double get_num_or(const json& obj, const std::string& key,
                         const std::string& path, double dflt) {
  return obj.contains(key) ? get_num(obj, key, path) : dflt;
}

inline ServiceDistribution parse_distribution(const json& d) {
  if (!d.is_object())
    throw ConfigError("config error: 'distribution' must be an object");
  if (!d.contains("family"))
    throw ConfigError("config error: missing field 'distribution.family'");
  const std::string fam = d.at("family").get<std::string>();
  try {
    if (fam == "exponential") {
      check_keys(d, {"family", "rate"}, "distribution");
      return ServiceDistribution::exponential(get_num(d, "rate", "distribution"));
    }
    if (fam == "lomax") {
      check_keys(d, {"family", "scale", "shape"}, "distribution");
      return ServiceDistribution::lomax(get_num(d, "scale", "distribution"),
                                        get_num(d, "shape", "distribution"));
    }
    if (fam == "lognormal") {
      check_keys(d, {"family", "mu", "sigma2"}, "distribution");
      return ServiceDistribution::log_normal(get_num(d, "mu", "distribution"),
                                             get_num(d, "sigma2", "distribution"));
    }
    if (fam == "tabulated") {
      check_keys(d, {"family", "path"}, "distribution");
      if (!d.contains("path"))
        throw ConfigError("config error: missing field 'distribution.path'");
      return ServiceDistribution::from_samples(d.at("path").get<std::string>());
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config error at distribution: ") + e.what());
  }
  throw ConfigError("config error: unknown distribution family '" + fam +
                    "'; supported: exponential, lomax, lognormal, tabulated");
}

inline Grids parse_grids(const json* gj, const ServiceDistribution& dist) {
  const double ey = dist.moments().mean;
  GridParams p;
  p.dt = 0.01;
  p.y_cut = 20.0 * ey;
  p.theta_fine = 5.0 * ey;
  p.n_log = 60;
  p.slope = ey;
  p.tail_eps = 1e-4;
  bool theta_max_given = false;
  if (gj) {
    check_keys(*gj, {"dt", "y_cut", "theta_fine", "theta_max", "tail_eps", "n_log",
                     "far_field_slope"},
               "grid");
    if (gj->contains("theta_max") && gj->contains("tail_eps"))
      throw ConfigError("config error: specify either 'grid.theta_max' or "
                        "'grid.tail_eps', not both");
    p.dt = get_num_or(*gj, "dt", "grid", p.dt);
    p.y_cut = get_num_or(*gj, "y_cut", "grid", p.y_cut);
    p.theta_fine = get_num_or(*gj, "theta_fine", "grid", p.theta_fine);
    p.slope = get_num_or(*gj, "far_field_slope", "grid", p.slope);
    if (gj->contains("n_log")) p.n_log = static_cast<int>(get_num(*gj, "n_log", "grid"));
    if (gj->contains("theta_max")) {
      p.theta_max = get_num(*gj, "theta_max", "grid");
      p.tail_eps = 0.0;
      theta_max_given = true;
    } else {
      p.tail_eps = get_num_or(*gj, "tail_eps", "grid", p.tail_eps);
    }
  }
  if (!(p.dt > 0.0)) throw ConfigError("config error at grid.dt: must be > 0");
  if (!theta_max_given) {
    // ceil to the grid so the quantized candidate still covers the tail
    const double t_eps = dist.tail_quantile(p.tail_eps);
    p.theta_max = std::ceil(t_eps / p.dt - 1e-9) * p.dt;
  }
  if (p.theta_max < p.theta_fine) p.theta_max = p.theta_fine;
  try {
    return make_grids(p, dist);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config error at grid: ") + e.what());
  }
}

inline SolverOptions parse_solver(const json* sj) {
  SolverOptions o;
  if (sj) {
    check_keys(*sj, {"eps_v", "eps_rho", "max_iter"}, "solver");
    o.eps_v = get_num_or(*sj, "eps_v", "solver", o.eps_v);
    o.eps_rho = get_num_or(*sj, "eps_rho", "solver", o.eps_rho);
    o.max_iter = static_cast<int>(get_num_or(*sj, "max_iter", "solver", o.max_iter));
    if (o.max_iter < 1)
      throw ConfigError("config error at solver.max_iter: must be >= 1");
  }
  return o;
}

inline SimConfig parse_sim(const json* mj) {
  SimConfig c;
  c.cycles = 200000;
  if (mj) {
    check_keys(*mj,
               {"cycles", "warmup_cycles", "batches", "seed",
                "max_preemptions_per_packet_chain"},
               "sim");
    if (mj->contains("cycles"))
      c.cycles = static_cast<std::uint64_t>(get_num(*mj, "cycles", "sim"));
    if (mj->contains("warmup_cycles"))
      c.warmup_cycles = static_cast<std::uint64_t>(get_num(*mj, "warmup_cycles", "sim"));
    if (mj->contains("batches"))
      c.batches = static_cast<std::uint64_t>(get_num(*mj, "batches", "sim"));
    if (mj->contains("seed"))
      c.seed = static_cast<std::uint64_t>(get_num(*mj, "seed", "sim"));
    if (mj->contains("max_preemptions_per_packet_chain"))
      c.max_preemptions_per_chain = static_cast<std::uint64_t>(
          get_num(*mj, "max_preemptions_per_packet_chain", "sim"));
    try {
      c.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config error at sim: ") + e.what());
    }
  }
  return c;
}

}  // namespace detail

/// Parses one scenario object; enforces the schema strictly so a typo in a
/// grid parameter cannot silently change a run.
inline Scenario parse_scenario(const nlohmann::json& j,
                               const std::string& default_name = "scenario") {
  using detail::check_keys;
  if (!j.is_object()) throw ConfigError("config error: scenario must be an object");
  check_keys(j, {"name", "distribution", "kappa_s", "kappa_p", "grid", "solver", "sim"},
             "");
  if (!j.contains("distribution"))
    throw ConfigError("config error: missing field 'distribution'");
  ServiceDistribution dist = detail::parse_distribution(j.at("distribution"));
  const double ks = detail::get_num_or(j, "kappa_s", "", 1.0);
  const double kp = detail::get_num_or(j, "kappa_p", "", 1.0);
  if (!(ks > 0.0)) throw ConfigError("config error at kappa_s: must be > 0");
  if (!(kp > 0.0)) throw ConfigError("config error at kappa_p: must be > 0");
  const nlohmann::json* gj = j.contains("grid") ? &j.at("grid") : nullptr;
  const nlohmann::json* sj = j.contains("solver") ? &j.at("solver") : nullptr;
  const nlohmann::json* mj = j.contains("sim") ? &j.at("sim") : nullptr;
  Scenario sc{j.value("name", default_name),
              dist,
              ks,
              kp,
              detail::parse_grids(gj, dist),
              detail::parse_solver(sj),
              detail::parse_sim(mj)};
  return sc;
}

inline Scenario make_scenario(std::string name, ServiceDistribution dist,
                              double kappa_s, double kappa_p) {
  Scenario sc{std::move(name), dist, kappa_s, kappa_p,
              detail::parse_grids(nullptr, dist), SolverOptions{}, detail::parse_sim(nullptr)};
  return sc;
}

/// The four built-in benchmark scenarios (kappa_s = 1 throughout): Lomax(1,2.1)
/// at kappa_p = 1 and 5, and the two equal-mean log-normals.
inline std::vector<Scenario> table1_scenarios() {
  std::vector<Scenario> v;
  v.push_back(make_scenario("YL1_kp1", ServiceDistribution::log_normal(-1.31, 4.0), 1.0, 1.0));
  v.push_back(make_scenario("YL2_kp1", ServiceDistribution::log_normal(-2.31, 6.0), 1.0, 1.0));
  v.push_back(make_scenario("YP_kp1", ServiceDistribution::lomax(1.0, 2.1), 1.0, 1.0));
  v.push_back(make_scenario("YP_kp5", ServiceDistribution::lomax(1.0, 2.1), 1.0, 5.0));
  return v;
}

}  // namespace tailor
