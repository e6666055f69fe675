#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "tailor/grids.hpp"

namespace tailor {

/// Stationary joint policy on the state grid. z_map[i] is the AoI level to
/// sample at when idle with AoI y_i (a grid node or the analytic tail
/// candidate); theta_map[i] is the preemption age for a busy phase started at
/// AoI y_i (+inf = never preempt). Beyond the grid the idle rule is
/// z(d) = max(d, z_tail) and the busy rule freezes at theta_map[m].
struct StationaryPolicy {
  std::vector<double> z_map;
  std::vector<double> theta_map;
  double z_tail = 0.0;

  double target_aoi(double aoi, double dt, double y_cut) const {
    if (aoi > y_cut) return std::max(aoi, z_tail);
    const auto i = static_cast<std::size_t>(round_to_grid(aoi, dt));
    return std::max(aoi, z_map[std::min(i, z_map.size() - 1)]);
  }

  double preempt_age(double busy_aoi, double dt, double y_cut) const {
    if (busy_aoi > y_cut) return theta_map.back();
    const auto i = static_cast<std::size_t>(round_to_grid(busy_aoi, dt));
    return theta_map[std::min(i, theta_map.size() - 1)];
  }
};

struct IterationTrace {
  double dv;    // sup-norm change of v
  double drho;  // change of the average cost
};

/// Output of the average-cost policy iteration.
struct SolvedPolicy {
  StationaryPolicy policy;
  double rho = 0.0;
  std::vector<double> v;        // relative value on the state grid, v[0] = 0
  std::vector<double> h_idle;   // idle relative value on the uniform action grid
  int iterations = 0;
  bool converged = false;
  std::vector<IterationTrace> residuals;
  double max_eval_residual = 0.0;  // worst Poisson-system residual seen
  Grids grids;
};

inline void write_policy_csv(std::ostream& os, const SolvedPolicy& sp) {
  os << "y,v,z,theta\n";
  char buf[160];
  for (std::size_t i = 0; i < sp.v.size(); ++i) {
    const double th = sp.policy.theta_map[i];
    if (std::isinf(th)) {
      std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,inf\n",
                    sp.grids.node(static_cast<std::int64_t>(i)), sp.v[i],
                    sp.policy.z_map[i]);
    } else {
      std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g\n",
                    sp.grids.node(static_cast<std::int64_t>(i)), sp.v[i],
                    sp.policy.z_map[i], th);
    }
    os << buf;
  }
}

}  // namespace tailor
