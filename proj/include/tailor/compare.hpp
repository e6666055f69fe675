#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "tailor/baselines.hpp"
#include "tailor/scenario.hpp"
#include "tailor/simulator.hpp"
#include "tailor/solver.hpp"

namespace tailor {

struct CompareRow {
  std::string scenario;
  double tailor_rho, tailor_sim, tailor_stderr;
  double aoinp_rho, aoinp_sim;
  double zw_rho, zw_sim;
  double ratio_aoinp, ratio_zw;  // benchmark cost / TAILOR cost
};

inline unsigned tailor_thread_cap() {
  unsigned cap = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("TAILOR_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) cap = static_cast<unsigned>(v);
  }
  return cap;
}

inline CompareRow compare_one(const Scenario& sc) {
  const SolvedPolicy solved = policy_iteration(sc.dist, sc.kappa_s, sc.kappa_p,
                                               sc.grids, sc.solver);
  SimConfig cfg = sc.sim;
  cfg.stream = 0;
  const SimResult st = simulate(make_sim_policy(solved), sc.dist, sc.kappa_s,
                                sc.kappa_p, cfg);
  const BaselineResult np = aoi_np_solve(sc.dist, sc.kappa_s);
  cfg.stream = 1;
  const SimResult sn = simulate(threshold_policy(np.beta), sc.dist, sc.kappa_s,
                                sc.kappa_p, cfg);
  const double zw = zero_wait_cost(sc.dist, sc.kappa_s);
  cfg.stream = 2;
  const SimResult sz = simulate(threshold_policy(0.0), sc.dist, sc.kappa_s,
                                sc.kappa_p, cfg);
  return {sc.name,        solved.rho,      st.avg_cost, st.stderr_est,
          np.rho,         sn.avg_cost,     zw,          sz.avg_cost,
          np.rho / solved.rho, zw / solved.rho};
}

/// Runs every scenario (solver + all three policies simulated) and returns
/// rows sorted by scenario name; scenarios may be processed concurrently up
/// to the TAILOR_THREADS cap without affecting the output.
inline std::vector<CompareRow> compare_scenarios(const std::vector<Scenario>& scenarios) {
  std::vector<CompareRow> rows(scenarios.size());
  std::vector<std::exception_ptr> errors(scenarios.size());
  const unsigned n_threads =
      std::min<unsigned>(tailor_thread_cap(),
                         static_cast<unsigned>(std::max<std::size_t>(1, scenarios.size())));
  std::atomic<std::size_t> next{0};
  const auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= scenarios.size()) return;
      try {
        rows[i] = compare_one(scenarios[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (n_threads <= 1 || scenarios.size() <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::sort(rows.begin(), rows.end(),
            [](const CompareRow& a, const CompareRow& b) { return a.scenario < b.scenario; });
  return rows;
}

}  // namespace tailor
