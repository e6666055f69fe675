// Acceptance suite: runs every gate criterion at its pinned tolerance and
// prints one PASS/FAIL line per criterion. Exit code = number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "tailor/baselines.hpp"
#include "tailor/rng.hpp"
#include "tailor/scenario.hpp"
#include "tailor/simulator.hpp"
#include "tailor/solver.hpp"

using namespace tailor;

namespace {

struct Criterion {
  std::string id;
  bool pass = true;
  std::string detail;
};

void require(Criterion& c, bool ok, const std::string& msg) {
  if (!ok) {
    c.pass = false;
    c.detail += (c.detail.empty() ? "" : "; ") + msg;
  }
}

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double elapsed_s(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Solved {
  Scenario sc;
  SolvedPolicy sp;
  double wall_s;
};

Solved solve_timed(const Scenario& sc, const SolverOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  SolvedPolicy sp = policy_iteration(sc.dist, sc.kappa_s, sc.kappa_p, sc.grids, opt);
  return {sc, std::move(sp), elapsed_s(t0)};
}

Grids halved_dt_grids(const Scenario& sc) {
  GridParams p;
  p.dt = sc.grids.dt / 2.0;
  p.y_cut = sc.grids.y_cut();
  p.theta_fine = sc.grids.theta_fine;
  p.theta_max = std::ceil(sc.grids.theta_max / p.dt) * p.dt;
  p.n_log = sc.grids.n_log;
  p.slope = sc.grids.slope;
  return make_grids(p, sc.dist);
}

// candidate position of a theta value: 0..n-1 finite, n = never
std::size_t candidate_pos(const Grids& g, double theta) {
  if (std::isinf(theta)) return g.candidates.size();
  const std::int64_t j = std::llround(theta / g.dt);
  const auto it = std::lower_bound(g.candidates.begin(), g.candidates.end(), j);
  return static_cast<std::size_t>(it - g.candidates.begin());
}

}  // namespace

int main() {
  std::vector<Criterion> crit;
  const auto suite_t0 = std::chrono::steady_clock::now();

  // ---- shared solves -------------------------------------------------------
  std::printf("solving benchmark scenarios...\n");
  std::fflush(stdout);
  std::vector<Scenario> scen = table1_scenarios();  // YL1, YL2, YP_kp1, YP_kp5
  std::map<std::string, Solved> solved;
  for (const auto& sc : scen) {
    solved.emplace(sc.name, solve_timed(sc, sc.solver));
    std::printf("  %-8s rho = %-10.6g iters = %-3d wall = %.1fs\n", sc.name.c_str(),
                solved.at(sc.name).sp.rho, solved.at(sc.name).sp.iterations,
                solved.at(sc.name).wall_s);
    std::fflush(stdout);
  }

  Scenario exp_sc = make_scenario("EXP1", ServiceDistribution::exponential(1.0), 1.0, 1.0);
  const Solved exp_solved = solve_timed(exp_sc, exp_sc.solver);
  std::printf("  %-8s rho = %-10.6g iters = %-3d wall = %.1fs\n\n", "EXP1",
              exp_solved.sp.rho, exp_solved.sp.iterations, exp_solved.wall_s);
  std::fflush(stdout);

  // ---- C1: exponential closed form ----------------------------------------
  {
    Criterion c{"C1 exponential closed form (v = y/lambda, constant maps)"};
    const SolvedPolicy& sp = exp_solved.sp;
    const Grids& g = sp.grids;
    require(c, sp.converged, "solver did not converge");
    require(c, g.dt == 0.01 && std::fabs(g.y_cut() - 20.0) < 1e-12,
            "grid is not the pinned dt=0.01, y_cut=20");
    double worst = 0.0;
    for (std::int64_t i = 0; i <= g.m; ++i)
      worst = std::max(worst, std::fabs(sp.v[static_cast<std::size_t>(i)] - g.node(i)));
    require(c, worst <= 0.05, "max|v - y| = " + num(worst) + " > 0.05");

    std::size_t pos_min = SIZE_MAX, pos_max = 0;
    for (std::int64_t i = 0; i <= g.m && g.node(i) <= 10.0; ++i) {
      const std::size_t p =
          candidate_pos(g, sp.policy.theta_map[static_cast<std::size_t>(i)]);
      pos_min = std::min(pos_min, p);
      pos_max = std::max(pos_max, p);
    }
    require(c, pos_max - pos_min <= 1,
            "theta map varies by more than one candidate step on [0,10]");

    double worst_z = 0.0;
    for (std::int64_t i = 0; i <= g.m; ++i) {
      const double want = std::max(g.node(i), sp.rho - 1.0);
      worst_z = std::max(worst_z,
                         std::fabs(sp.policy.z_map[static_cast<std::size_t>(i)] - want));
    }
    require(c, worst_z <= g.dt + 1e-12,
            "z map deviates from max(d, rho-1) by " + num(worst_z));
    require(c, exp_solved.wall_s < 60.0,
            "solve took " + num(exp_solved.wall_s) + "s >= 60s");
    c.detail += (c.detail.empty() ? "" : "; ") + std::string("max|v-y|=") + num(worst) +
                ", rho=" + num(sp.rho) + ", wall=" + num(exp_solved.wall_s) + "s";
    crit.push_back(c);
  }

  // ---- C2: no-preemption reduction ----------------------------------------
  {
    Criterion c{"C2 no-preemption reduction matches AoI-NP and linear v"};
    for (const char* name : {"YP_kp1", "YL1_kp1", "YL2_kp1"}) {
      const Scenario& sc = solved.at(name).sc;
      SolverOptions opt = sc.solver;
      opt.no_preemption = true;
      const Solved s = solve_timed(sc, opt);
      const BaselineResult base = aoi_np_solve(sc.dist, sc.kappa_s);
      const double rel = std::fabs(s.sp.rho - base.rho) / base.rho;
      require(c, rel <= 0.01, std::string(name) + ": never-only rho off by " +
                                  num(100.0 * rel) + "%");
      const double ey = sc.dist.moments().mean;
      double worst_slope = 0.0;
      for (std::size_t i = 1; i < s.sp.v.size(); ++i) {
        const double slope = (s.sp.v[i] - s.sp.v[i - 1]) / sc.grids.dt;
        worst_slope = std::max(worst_slope, std::fabs(slope - ey) / ey);
      }
      require(c, worst_slope <= 0.02, std::string(name) + ": per-cell slope off by " +
                                          num(100.0 * worst_slope) + "%");
    }
    crit.push_back(c);
  }

  // ---- C3: benchmark cost reproduction + grid refinement -------------------
  {
    Criterion c{"C3 benchmark costs reproduced, dt-refinement stable"};
    const std::map<std::string, std::pair<double, double>> target = {
        {"YP_kp1", {2.06, 0.10}},
        {"YP_kp5", {2.35, 0.10}},
        {"YL1_kp1", {1.99, 0.10}},
        {"YL2_kp1", {1.77, 0.15}},
    };
    for (const auto& [name, tt] : target) {
      const Solved& s = solved.at(name);
      const double rel = std::fabs(s.sp.rho - tt.first) / tt.first;
      require(c, s.sp.converged, name + ": not converged");
      require(c, rel <= tt.second,
              name + ": rho = " + num(s.sp.rho) + " vs " + num(tt.first) + " (" +
                  num(100.0 * rel) + "% > " + num(100.0 * tt.second) + "%)");
      require(c, s.wall_s < 300.0, name + ": solve took " + num(s.wall_s) + "s >= 300s");
      c.detail += (c.detail.empty() ? "" : "; ") + name + "=" + num(s.sp.rho);
    }
    for (const auto& [name, tt] : target) {
      (void)tt;
      const Scenario& sc = solved.at(name).sc;
      const Grids fine = halved_dt_grids(sc);
      const SolvedPolicy half =
          policy_iteration(sc.dist, sc.kappa_s, sc.kappa_p, fine, sc.solver);
      const double drift = std::fabs(half.rho - solved.at(name).sp.rho) /
                           solved.at(name).sp.rho;
      require(c, drift <= 0.01, name + ": halving dt moves rho by " +
                                    num(100.0 * drift) + "% > 1%");
    }
    crit.push_back(c);
  }

  // ---- C4: baseline cross-checks -------------------------------------------
  {
    Criterion c{"C4 baseline cross-checks and heavy-tail bias direction"};
    const auto l1 = ServiceDistribution::log_normal(-1.31, 4.0);
    const auto l2 = ServiceDistribution::log_normal(-2.31, 6.0);
    const auto lomax = ServiceDistribution::lomax(1.0, 2.1);
    const double zw_l1 = zero_wait_cost(l1, 1.0);
    require(c, std::fabs(zw_l1 - 56.8) / 56.8 <= 0.01,
            "ZW analytic for Y_L1 = " + num(zw_l1) + " not within 1% of 56.8");
    const BaselineResult np_l1 = aoi_np_solve(l1, 1.0);
    require(c, std::fabs(np_l1.rho - 16.0) / 16.0 <= 0.15,
            "AoI-NP for Y_L1 = " + num(np_l1.rho) + " not within 15% of 16.0");

    const double zw_lomax = zero_wait_cost(lomax, 1.0);
    const double zw_l2 = zero_wait_cost(l2, 1.0);
    std::printf("[INFO] C4: ZW analytic (renewal-reward) vs tabulated simulated values:\n"
                "[INFO]   lomax(1,2.1): analytic %.4g vs reported 6.35\n"
                "[INFO]   lognormal(-2.31,6): analytic %.4g vs reported 524\n"
                "[INFO]   finite-horizon estimates of E[Y^2]-driven costs are biased "
                "low on heavy tails;\n"
                "[INFO]   the bias direction is asserted below at a 1e4-cycle horizon.\n",
                zw_lomax, zw_l2);
    for (const auto& [nm, d, analytic] :
         std::vector<std::tuple<const char*, ServiceDistribution, double>>{
             {"lomax", lomax, zw_lomax}, {"lognormal L2", l2, zw_l2}}) {
      SimConfig cfg;
      cfg.cycles = 10000;
      cfg.seed = 1;
      const SimResult r = simulate(threshold_policy(0.0), d, 1.0, 1.0, cfg);
      require(c, r.avg_cost < analytic,
              std::string(nm) + ": short-horizon ZW estimate " + num(r.avg_cost) +
                  " not below analytic " + num(analytic));
    }
    crit.push_back(c);
  }

  // ---- C5: ordering and variance-driven reversal ---------------------------
  {
    Criterion c{"C5 cost ordering and variance-driven reversal"};
    for (const auto& [name, s] : solved) {
      const double rho_np = aoi_np_solve(s.sc.dist, s.sc.kappa_s).rho;
      const double rho_zw = zero_wait_cost(s.sc.dist, s.sc.kappa_s);
      require(c, s.sp.rho <= rho_np + 1e-6 * rho_np,
              name + ": TAILOR above AoI-NP");
      require(c, rho_np <= rho_zw + 1e-9, name + ": AoI-NP above ZW");
    }
    const double t_l1 = solved.at("YL1_kp1").sp.rho;
    const double t_l2 = solved.at("YL2_kp1").sp.rho;
    const double a_l1 = aoi_np_solve(solved.at("YL1_kp1").sc.dist, 1.0).rho;
    const double a_l2 = aoi_np_solve(solved.at("YL2_kp1").sc.dist, 1.0).rho;
    require(c, t_l2 < t_l1, "no reversal: TAILOR(L2) = " + num(t_l2) +
                                " !< TAILOR(L1) = " + num(t_l1));
    require(c, a_l2 > a_l1, "AoI-NP should worsen with variance: " + num(a_l2) +
                                " !> " + num(a_l1));
    c.detail = "tailor L1/L2 = " + num(t_l1) + "/" + num(t_l2) +
               ", aoinp L1/L2 = " + num(a_l1) + "/" + num(a_l2);
    crit.push_back(c);
  }

  // ---- C6: solver vs simulator ---------------------------------------------
  {
    Criterion c{"C6 simulated cost of the solved policy matches rho (3 sigma)"};
    for (const auto& [name, s] : solved) {
      SimConfig cfg;
      cfg.cycles = 1020000;
      cfg.warmup_cycles = 20000;  // leaves 1e6 post-warmup cycles
      cfg.seed = 31;
      const auto t0 = std::chrono::steady_clock::now();
      const SimResult r =
          simulate(make_sim_policy(s.sp), s.sc.dist, s.sc.kappa_s, s.sc.kappa_p, cfg);
      const double wall = elapsed_s(t0);
      const double gap = std::fabs(r.avg_cost - s.sp.rho);
      require(c, gap <= 3.0 * r.stderr_est,
              name + ": |sim - rho| = " + num(gap) + " > 3*se = " +
                  num(3.0 * r.stderr_est));
      require(c, wall < 120.0, name + ": simulation took " + num(wall) + "s >= 120s");
      c.detail += (c.detail.empty() ? "" : "; ") + name + " gap=" + num(gap) +
                  " se=" + num(r.stderr_est);
    }
    crit.push_back(c);
  }

  // ---- C7: oracle equivalences ---------------------------------------------
  {
    Criterion c{"C7 oracle equivalences (argmin, stochastic Q, residuals, G)"};
    // (a) busy improvement equals a naive double loop bitwise on a 20x15 grid
    {
      const auto d = ServiceDistribution::lomax(1.0, 2.1);
      GridParams p{0.1, 2.0, 1.0, 3.16, 5, d.moments().mean, 0.0};
      const Grids g = make_grids(p, d);
      const ActionTables tab = ActionTables::build(d, g);
      std::vector<double> v(static_cast<std::size_t>(g.m) + 1);
      for (std::int64_t i = 0; i <= g.m; ++i)
        v[static_cast<std::size_t>(i)] = 0.9 * g.node(i);
      const IdleEnvelope env = idle_envelope(v, 1.7, 1.0, tab, g);
      const auto fast = busy_improve(v, 1.7, env, tab, 1.0, g);
      bool same = g.m == 20 && g.candidates.size() == 15;
      for (std::int64_t i = 0; i <= g.m && same; ++i) {
        double best = eval_q(g.node(i), kNeverIdx, 1.7, v, env, tab, 1.0, g);
        double best_theta = kInf;
        for (std::int64_t j : g.candidates) {
          const double q = eval_q(g.node(i), j, 1.7, v, env, tab, 1.0, g);
          if (q < best) {
            best = q;
            best_theta = g.node(j);
          }
        }
        same = fast[static_cast<std::size_t>(i)] == best_theta;
      }
      require(c, same, "busy_improve differs from the naive double loop");
    }
    // (b) eval_Q vs a 1e6-replication stochastic stopping oracle at 5 points
    {
      const Solved& s = solved.at("YP_kp1");
      const Grids& g = s.sp.grids;
      const ActionTables tab = ActionTables::build(s.sc.dist, g);
      const IdleEnvelope env = idle_envelope(s.sp.v, s.sp.rho, s.sc.kappa_s, tab, g);
      const double y_m = g.y_cut();
      const double v_m = s.sp.v[static_cast<std::size_t>(g.m)];
      const auto h_at = [&](double t) {
        if (t >= g.t_act())
          return s.sc.kappa_s + v_m + g.slope * (std::max(t, env.z_tail) - y_m);
        const double q = t / g.dt;
        const auto j = static_cast<std::size_t>(q);
        const double frac = q - static_cast<double>(j);
        return (1.0 - frac) * env.h_idle[j] + frac * env.h_idle[j + 1];
      };
      const std::vector<std::pair<double, double>> pts = {
          {0.0, 0.5}, {1.0, 1.0}, {3.0, 2.0}, {8.0, 5.0}, {15.0, 10.0}};
      int k = 0;
      for (const auto& [y, theta] : pts) {
        const double q = eval_q_time(y, theta, s.sp.rho, s.sp.v, env, tab,
                                     s.sc.kappa_p, g);
        RngStream rng(4242, static_cast<std::uint64_t>(k++));
        const int reps = 1000000;
        double sum = 0.0, sum2 = 0.0;
        for (int r = 0; r < reps; ++r) {
          const double draw = s.sc.dist.sample(rng);
          double x;
          if (draw <= theta) {
            x = (y - s.sp.rho) * draw + 0.5 * draw * draw + h_at(draw);
          } else {
            x = (y - s.sp.rho) * theta + 0.5 * theta * theta + s.sc.kappa_p +
                far_field_value(s.sp.v, y + theta, g.slope, g.dt, y_m);
          }
          sum += x;
          sum2 += x * x;
        }
        const double mean = sum / reps;
        const double se =
            std::sqrt(std::max(0.0, (sum2 / reps - mean * mean) / (reps - 1.0)));
        require(c, std::fabs(q - mean) <= 3.0 * se,
                "eval_Q at (y=" + num(y) + ", theta=" + num(theta) + "): |" + num(q) +
                    " - " + num(mean) + "| > 3*se = " + num(3.0 * se));
      }
    }
    // (c) Poisson residual contract held on every solve above
    {
      double worst = exp_solved.sp.max_eval_residual;
      for (const auto& [name, s] : solved) worst = std::max(worst, s.sp.max_eval_residual);
      require(c, worst < kInf, "missing residual diagnostics");
      c.detail += (c.detail.empty() ? "" : "; ") + std::string("max residual = ") +
                  num(worst);
    }
    // (d) exponential argmin of G matches the solver threshold
    {
      const SolvedPolicy& sp = exp_solved.sp;
      const Grids& g = sp.grids;
      const double lambda = 1.0, kp = 1.0, ks = 1.0;
      const double y_m = g.y_cut();
      const double v_m = sp.v[static_cast<std::size_t>(g.m)];
      const double z_tail = std::max(y_m, sp.rho - g.slope);
      const auto h_at = [&](double t) {
        if (t >= g.t_act())
          return ks + v_m + g.slope * (std::max(t, z_tail) - y_m);
        const double q = t / g.dt;
        const auto j = static_cast<std::size_t>(q);
        const double frac = q - static_cast<double>(j);
        return (1.0 - frac) * sp.h_idle[j] + frac * sp.h_idle[j + 1];
      };
      const auto g_of = [&](double tau) {
        return exp_stopping_objective(tau, sp.rho, h_at, lambda, kp);
      };
      // "never" limit: integral to the horizon plus the linear-tail remainder
      const double T = g.t_act();
      const double a0 = ks + v_m + g.slope * (z_tail > T ? z_tail - y_m : -y_m);
      const double b0 = (z_tail > T) ? 0.0 : g.slope;
      const double head = adaptive_trapezoid(
          [&](double t) {
            return std::exp(-lambda * t) * (t - sp.rho + lambda * h_at(t));
          },
          0.0, T, 1e-10);
      const double e_t = std::exp(-lambda * T);
      const double int_e = e_t / lambda;                  // int_T^inf e^{-l t}
      const double int_te = e_t * (T + 1.0 / lambda) / lambda;  // int_T^inf t e^{-l t}
      const double g_never =
          head + (1.0 + lambda * b0) * int_te + (lambda * a0 - sp.rho) * int_e;

      std::size_t best_pos = g.candidates.size();
      double best = g_never;
      for (std::size_t k = 0; k < g.candidates.size(); ++k) {
        const double val = g_of(g.node(g.candidates[k]));
        if (val < best) {
          best = val;
          best_pos = k;
        }
      }
      const std::size_t solver_pos = candidate_pos(g, sp.policy.theta_map[0]);
      const std::size_t lo = std::min(best_pos, solver_pos);
      const std::size_t hi = std::max(best_pos, solver_pos);
      require(c, hi - lo <= 1, "G argmin at candidate " + std::to_string(best_pos) +
                                   " vs solver " + std::to_string(solver_pos));
    }
    crit.push_back(c);
  }

  // ---- C8: structural property suite ---------------------------------------
  {
    Criterion c{"C8 structural properties on every scenario"};
    std::vector<const Solved*> all = {&exp_solved};
    for (const auto& [name, s] : solved) all.push_back(&s);
    for (const Solved* s : all) {
      const SolvedPolicy& sp = s->sp;
      const std::string& nm = s->sc.name;
      require(c, sp.v[0] == 0.0, nm + ": v(0) != 0");
      const double tol = 1e-6 * (1.0 + std::fabs(sp.v.back()));
      for (std::size_t i = 1; i < sp.v.size(); ++i) {
        if (!(sp.v[i] >= sp.v[i - 1] - tol)) {
          require(c, false, nm + ": v not nondecreasing at node " + std::to_string(i));
          break;
        }
      }
      const double ey = s->sc.dist.moments().mean;
      const double slope =
          (sp.v[sp.v.size() - 1] - sp.v[sp.v.size() - 2]) / sp.grids.dt;
      require(c, slope <= ey + 1e-3,
              nm + ": terminal slope " + num(slope) + " > E[Y] + 1e-3");
      // A/J1 monotone on a theta sweep
      double pa = 0.0, pj = 0.0;
      for (int k = 1; k <= 200; ++k) {
        const auto pe = s->sc.dist.partial_expectations(0.05 * k * ey);
        if (!(pe.A >= pa - 1e-12 && pe.J1 >= pj - 1e-12)) {
          require(c, false, nm + ": A/J1 not monotone");
          break;
        }
        pa = pe.A;
        pj = pe.J1;
      }
    }
    // Lomax hazard is DFR
    const auto lom = ServiceDistribution::lomax(1.0, 2.1);
    double prev = lom.hazard(0.0);
    for (int i = 1; i <= 100; ++i) {
      const double cur = lom.hazard(0.1 * i);
      if (!(cur < prev)) {
        require(c, false, "lomax hazard not strictly decreasing");
        break;
      }
      prev = cur;
    }
    crit.push_back(c);
  }

  // ---- report ---------------------------------------------------------------
  int failures = 0;
  std::printf("\n");
  for (const auto& c : crit) {
    std::printf("[%s] %s%s%s\n", c.pass ? "PASS" : "FAIL", c.id.c_str(),
                c.detail.empty() ? "" : ": ", c.detail.c_str());
    if (!c.pass) ++failures;
  }
  std::printf("\n%d/%zu criteria passed (total %.1fs)\n",
              static_cast<int>(crit.size()) - failures, crit.size(),
              elapsed_s(suite_t0));
  return failures;
}
