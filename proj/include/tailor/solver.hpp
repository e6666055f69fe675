#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "tailor/distributions.hpp"
#include "tailor/grids.hpp"
#include "tailor/policy.hpp"
#include "tailor/quadrature.hpp"

namespace tailor {

class SolveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::int64_t kNeverIdx = -1;

/// Service-law tables on the uniform quadrature grid t_j = j*dt,
/// j = 0..quad_n. A and J1 are cumulative trapezoid integrals of the tail;
/// probability-mass integrals elsewhere use the CDF increments of `cdf`, so
/// mass hiding below the first node (sharp log-normal peaks) is never lost.
struct ActionTables {
  std::vector<double> tail;
  std::vector<double> cdf;
  std::vector<double> A;
  std::vector<double> J1;
  double ey = 0.0;
  double ey2 = 0.0;
  double tail_T = 0.0;       // tail at the quadrature horizon
  double ey_above_T = 0.0;   // E[Y 1{Y > T_act}]

  static ActionTables build(const ServiceDistribution& dist, const Grids& g) {
    ActionTables t;
    const std::size_t n = static_cast<std::size_t>(g.quad_n);
    t.tail.resize(n + 1);
    t.cdf.resize(n + 1);
    t.A.resize(n + 1);
    t.J1.resize(n + 1);
    for (std::size_t j = 0; j <= n; ++j) {
      const double tj = g.node(static_cast<std::int64_t>(j));
      t.tail[j] = dist.tail(tj);
      t.cdf[j] = dist.cdf(tj);
    }
    t.A[0] = t.J1[0] = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double t0 = g.node(static_cast<std::int64_t>(j));
      const double t1 = t0 + g.dt;
      t.A[j + 1] = t.A[j] + 0.5 * g.dt * (t.tail[j] + t.tail[j + 1]);
      t.J1[j + 1] = t.J1[j] + 0.5 * g.dt * (t0 * t.tail[j] + t1 * t.tail[j + 1]);
    }
    const Moments m = dist.moments();
    t.ey = m.mean;
    t.ey2 = m.second;
    t.tail_T = t.tail[n];
    t.ey_above_T = std::max(0.0, m.mean - dist.partial_first(g.t_act()));
    return t;
  }
};

/// Idle-phase improvement: suffix-min envelope of
/// phi_i = kappa_s + v(y_i) + y_i^2/2 - rho*y_i, plus the analytic candidate
/// z_tail = max(y_cut, rho - s) that covers minimizers beyond the grid.
struct IdleEnvelope {
  std::vector<double> m;        // envelope minima per state node
  std::vector<double> z_map;    // chosen sampling targets
  double z_tail = 0.0;
  std::vector<double> h_idle;   // h_I on the uniform action grid
  std::vector<double> i_fh;     // prefix of int h_I dF
  double i_fh_inf = 0.0;        // theta -> inf limit of the above
};

inline IdleEnvelope idle_envelope(std::span<const double> v, double rho,
                                  double kappa_s, const ActionTables& tab,
                                  const Grids& g) {
  const std::int64_t m = g.m;
  const double y_m = g.y_cut();
  const double v_m = v[static_cast<std::size_t>(m)];
  const double s = g.slope;
  IdleEnvelope env;
  env.z_tail = std::max(y_m, rho - s);
  if (env.z_tail > g.t_act())
    throw SolveError("idle envelope: rho - s exceeds the quadrature horizon; "
                     "increase y_cut or theta_max");
  const double phi_tail = kappa_s + v_m + s * (env.z_tail - y_m) +
                          0.5 * env.z_tail * env.z_tail - rho * env.z_tail;

  env.m.resize(static_cast<std::size_t>(m) + 1);
  env.z_map.resize(static_cast<std::size_t>(m) + 1);
  double best = kInf;
  std::int64_t best_i = m;
  for (std::int64_t i = m; i >= 0; --i) {
    const double yi = g.node(i);
    const double phi = kappa_s + v[static_cast<std::size_t>(i)] + 0.5 * yi * yi - rho * yi;
    if (phi <= best) {  // ties prefer the smaller index
      best = phi;
      best_i = i;
    }
    if (phi_tail < best) {
      env.m[static_cast<std::size_t>(i)] = phi_tail;
      env.z_map[static_cast<std::size_t>(i)] = env.z_tail;
    } else {
      env.m[static_cast<std::size_t>(i)] = best;
      env.z_map[static_cast<std::size_t>(i)] = g.node(best_i);
    }
  }

  // h_I on the action grid; beyond y_cut both v and the envelope are in the
  // far-field linear regime.
  const std::size_t n = static_cast<std::size_t>(g.quad_n);
  env.h_idle.resize(n + 1);
  for (std::size_t j = 0; j <= n; ++j) {
    const double tj = g.node(static_cast<std::int64_t>(j));
    double mt;
    if (static_cast<std::int64_t>(j) <= m) {
      mt = env.m[j];
    } else {
      const double z = std::max(tj, env.z_tail);
      mt = kappa_s + v_m + s * (z - y_m) + 0.5 * z * z - rho * z;
    }
    env.h_idle[j] = rho * tj - 0.5 * tj * tj + mt;
  }

  env.i_fh.resize(n + 1);
  env.i_fh[0] = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double mass = tab.cdf[j + 1] - tab.cdf[j];
    env.i_fh[j + 1] = env.i_fh[j] + 0.5 * mass * (env.h_idle[j] + env.h_idle[j + 1]);
  }
  // beyond the horizon h_I(t) = kappa_s + v_m + s*(t - y_m)
  env.i_fh_inf = env.i_fh[n] + (kappa_s + v_m - s * y_m) * tab.tail_T +
                 s * tab.ey_above_T;
  return env;
}

/// Busy-phase objective Q(y, theta; rho) for a candidate given as an index on
/// the uniform action grid (kNeverIdx = never preempt).
inline double eval_q(double y, std::int64_t cand, double rho,
                     std::span<const double> v, const IdleEnvelope& env,
                     const ActionTables& tab, double kappa_p, const Grids& g) {
  if (cand == kNeverIdx)
    return (y - rho) * tab.ey + 0.5 * tab.ey2 + env.i_fh_inf;
  const auto j = static_cast<std::size_t>(cand);
  const double cont = kappa_p + far_field_value(v, y + g.node(cand), g.slope,
                                                g.dt, g.y_cut());
  return (y - rho) * tab.A[j] + tab.J1[j] + env.i_fh[j] + tab.tail[j] * cont;
}

/// Same objective with theta given in time units (must be a grid multiple or
/// +inf); convenience entry point for tests and oracles.
inline double eval_q_time(double y, double theta, double rho,
                          std::span<const double> v, const IdleEnvelope& env,
                          const ActionTables& tab, double kappa_p, const Grids& g) {
  if (std::isinf(theta))
    return eval_q(y, kNeverIdx, rho, v, env, tab, kappa_p, g);
  const std::int64_t j = std::llround(theta / g.dt);
  if (std::fabs(g.node(j) - theta) > 1e-9 * (1.0 + theta) || j < 0 || j > g.quad_n)
    throw std::invalid_argument("eval_q: theta is not on the action grid");
  return eval_q(y, j, rho, v, env, tab, kappa_p, g);
}

/// Busy-phase improvement: per-state argmin of Q over the hybrid candidate
/// set. Ties break toward the smallest finite theta; "never" loses ties.
inline std::vector<double> busy_improve(std::span<const double> v, double rho,
                                        const IdleEnvelope& env, const ActionTables& tab,
                                        double kappa_p, const Grids& g,
                                        bool no_preemption = false) {
  std::vector<double> theta(static_cast<std::size_t>(g.m) + 1, kInf);
  for (std::int64_t i = 0; i <= g.m; ++i) {
    const double y = g.node(i);
    double best = eval_q(y, kNeverIdx, rho, v, env, tab, kappa_p, g);
    double best_theta = kInf;
    if (!no_preemption) {
      for (std::int64_t j : g.candidates) {
        const double q = eval_q(y, j, rho, v, env, tab, kappa_p, g);
        if (q < best) {
          best = q;
          best_theta = g.node(j);
        }
      }
    }
    theta[static_cast<std::size_t>(i)] = best_theta;
  }
  return theta;
}

struct PolicyEvalResult {
  double rho = 0.0;
  std::vector<double> v;
  double residual = 0.0;
};

/// Policy evaluation: solves the Poisson-equation linear system
///   v = r_pi - rho*g_pi + P_pi v,  v(0) = 0,
/// closed at the right boundary by v(y_M) - v(y_{M-1}) = s*dt. The shared
/// prefix integrals int_0^theta v(z(t)) dF are introduced as auxiliary
/// unknowns chained over the distinct theta values, which keeps every row
/// sparse even for the all-"never" policy. The residual of the direct
/// (non-augmented) equations is verified after the solve.
inline PolicyEvalResult policy_evaluate(const StationaryPolicy& pol,
                                        const ActionTables& tab, const Grids& g,
                                        double kappa_s, double kappa_p) {
  const std::int64_t m = g.m;
  const std::size_t n = static_cast<std::size_t>(g.quad_n);
  const double dt = g.dt;
  const double y_m = g.y_cut();
  const double s = g.slope;
  if (pol.z_tail > g.t_act() + 1e-12)
    throw SolveError("policy_evaluate: z_tail beyond the quadrature horizon");

  // candidate index per state (kNeverIdx for never)
  std::vector<std::int64_t> th_idx(static_cast<std::size_t>(m) + 1);
  for (std::int64_t i = 0; i <= m; ++i) {
    const double th = pol.theta_map[static_cast<std::size_t>(i)];
    if (std::isinf(th)) {
      th_idx[static_cast<std::size_t>(i)] = kNeverIdx;
    } else {
      const std::int64_t j = std::llround(th / dt);
      if (j < 1 || j > g.quad_n || std::fabs(g.node(j) - th) > 1e-9 * (1.0 + th))
        throw std::invalid_argument("policy_evaluate: off-grid theta in policy");
      th_idx[static_cast<std::size_t>(i)] = j;
    }
  }

  // idle targets and waits on the uniform action grid
  std::vector<double> zt(n + 1), w(n + 1);
  for (std::size_t j = 0; j <= n; ++j) {
    const double tj = g.node(static_cast<std::int64_t>(j));
    double z = (static_cast<std::int64_t>(j) <= m) ? pol.z_map[j]
                                                   : std::max(tj, pol.z_tail);
    if (z < tj) z = tj;  // z >= current AoI by construction
    zt[j] = z;
    w[j] = z - tj;
  }

  // mass-weighted prefix integrals int_0^theta (.) dF
  std::vector<double> ifw(n + 1), ifr(n + 1);
  ifw[0] = ifr[0] = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double mass = tab.cdf[j + 1] - tab.cdf[j];
    const double t0 = g.node(static_cast<std::int64_t>(j)), t1 = t0 + dt;
    ifw[j + 1] = ifw[j] + 0.5 * mass * (w[j] + w[j + 1]);
    ifr[j + 1] = ifr[j] + 0.5 * mass *
                              ((kappa_s + t0 * w[j] + 0.5 * w[j] * w[j]) +
                               (kappa_s + t1 * w[j + 1] + 0.5 * w[j + 1] * w[j + 1]));
  }
  // beyond the horizon w == 0 (z_tail <= T_act), so only kappa_s survives
  const double ifw_inf = ifw[n];
  const double ifr_inf = ifr[n] + kappa_s * tab.tail_T;

  const auto g_of = [&](std::int64_t j) {
    return j == kNeverIdx ? tab.ey + ifw_inf
                          : tab.A[static_cast<std::size_t>(j)] + ifw[static_cast<std::size_t>(j)];
  };
  const auto r_of = [&](std::int64_t i, std::int64_t j) {
    const double yi = g.node(i);
    if (j == kNeverIdx) return yi * tab.ey + 0.5 * tab.ey2 + ifr_inf;
    const auto ju = static_cast<std::size_t>(j);
    return yi * tab.A[ju] + tab.J1[ju] + tab.tail[ju] * kappa_p + ifr[ju];
  };

  // distinct theta indices -> auxiliary unknown slots
  std::vector<std::int64_t> distinct = th_idx;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  const bool has_never = !distinct.empty() && distinct.front() == kNeverIdx;
  if (has_never) distinct.erase(distinct.begin());
  const std::size_t n_fin = distinct.size();
  const auto slot_of = [&](std::int64_t j) -> std::size_t {
    if (j == kNeverIdx) return n_fin;  // never slot is last
    return static_cast<std::size_t>(
        std::lower_bound(distinct.begin(), distinct.end(), j) - distinct.begin());
  };

  const std::size_t n_aux = n_fin + (has_never ? 1 : 0);
  const std::size_t n_unknown = static_cast<std::size_t>(m) + 1 + n_aux;
  const std::int64_t rho_col = m;  // v_i sits at column i-1 for i >= 1
  const auto vcol = [&](std::int64_t i) { return i - 1; };
  const auto aux_col = [&](std::size_t k) {
    return static_cast<std::int64_t>(static_cast<std::size_t>(m) + 1 + k);
  };

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(m) * 5 + 2 * n + 16);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_unknown));
  std::int64_t row = 0;
  double rhs_norm = 0.0;

  // main rows i = 0..m-1: v_i + rho*g_i - c_{theta_i} - tail(theta_i)*v(y_i+theta_i) = r_i
  for (std::int64_t i = 0; i < m; ++i) {
    const std::int64_t j = th_idx[static_cast<std::size_t>(i)];
    double b = r_of(i, j);
    if (i >= 1) trip.emplace_back(row, vcol(i), 1.0);
    trip.emplace_back(row, rho_col, g_of(j));
    trip.emplace_back(row, aux_col(slot_of(j)), -1.0);
    if (j != kNeverIdx) {
      const double d = tab.tail[static_cast<std::size_t>(j)];
      const std::int64_t tgt = i + j;
      if (tgt <= m) {
        trip.emplace_back(row, vcol(tgt), -d);  // tgt >= 1 always
      } else {
        trip.emplace_back(row, vcol(m), -d);
        b += d * s * (g.node(tgt) - y_m);
      }
    }
    rhs[row] = b;
    rhs_norm = std::max(rhs_norm, std::fabs(b));
    ++row;
  }

  // right-boundary slope closure
  trip.emplace_back(row, vcol(m), 1.0);
  trip.emplace_back(row, vcol(m - 1), -1.0);
  rhs[row] = s * dt;
  rhs_norm = std::max(rhs_norm, std::fabs(s * dt));
  ++row;

  // auxiliary chain: c_k = c_{k-1} + int_{theta_(k-1)}^{theta_(k)} v(z(t)) dF
  std::vector<double> coef(static_cast<std::size_t>(m) + 1, 0.0);
  std::vector<std::int64_t> touched;
  double seg_const = 0.0;
  const auto add_endpoint = [&](std::size_t jnode, double wgt) {
    const double z = zt[jnode];
    if (z <= y_m + 1e-12) {
      const std::int64_t col = std::llround(z / dt);
      if (col == 0) return;  // v(0) = 0
      if (coef[static_cast<std::size_t>(col)] == 0.0) touched.push_back(col);
      coef[static_cast<std::size_t>(col)] += wgt;
    } else {
      if (coef[static_cast<std::size_t>(m)] == 0.0) touched.push_back(m);
      coef[static_cast<std::size_t>(m)] += wgt;
      seg_const += wgt * s * (z - y_m);
    }
  };
  const auto flush_segment = [&](std::size_t k, bool first, double extra_vm,
                                 double extra_const) {
    if (extra_vm != 0.0) {
      if (coef[static_cast<std::size_t>(m)] == 0.0) touched.push_back(m);
      coef[static_cast<std::size_t>(m)] += extra_vm;
    }
    trip.emplace_back(row, aux_col(k), 1.0);
    if (!first) trip.emplace_back(row, aux_col(k - 1), -1.0);
    for (std::int64_t col : touched) {
      trip.emplace_back(row, vcol(col), -coef[static_cast<std::size_t>(col)]);
      coef[static_cast<std::size_t>(col)] = 0.0;
    }
    touched.clear();
    rhs[row] = seg_const + extra_const;
    rhs_norm = std::max(rhs_norm, std::fabs(rhs[row]));
    seg_const = 0.0;
    ++row;
  };

  std::size_t jcur = 0;
  for (std::size_t k = 0; k < n_fin; ++k) {
    const auto jend = static_cast<std::size_t>(distinct[k]);
    for (std::size_t j = jcur; j < jend; ++j) {
      const double mass = tab.cdf[j + 1] - tab.cdf[j];
      add_endpoint(j, 0.5 * mass);
      add_endpoint(j + 1, 0.5 * mass);
    }
    jcur = jend;
    flush_segment(k, k == 0, 0.0, 0.0);
  }
  if (has_never) {
    for (std::size_t j = jcur; j < n; ++j) {
      const double mass = tab.cdf[j + 1] - tab.cdf[j];
      add_endpoint(j, 0.5 * mass);
      add_endpoint(j + 1, 0.5 * mass);
    }
    // tail beyond the horizon: v is linear there
    flush_segment(n_fin, n_fin == 0, tab.tail_T,
                  s * (tab.ey_above_T - y_m * tab.tail_T));
  }

  Eigen::SparseMatrix<double> mat(static_cast<Eigen::Index>(n_unknown),
                                  static_cast<Eigen::Index>(n_unknown));
  mat.setFromTriplets(trip.begin(), trip.end());
  mat.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.analyzePattern(mat);
  lu.factorize(mat);
  if (lu.info() != Eigen::Success)
    throw SolveError("policy_evaluate: singular or ill-conditioned Poisson system "
                     "(degenerate policy?); |A|_inf = " +
                     std::to_string(mat.coeffs().cwiseAbs().maxCoeff()));
  const Eigen::VectorXd x = lu.solve(rhs);

  PolicyEvalResult out;
  out.rho = x[rho_col];
  out.v.assign(static_cast<std::size_t>(m) + 1, 0.0);
  for (std::int64_t i = 1; i <= m; ++i)
    out.v[static_cast<std::size_t>(i)] = x[vcol(i)];

  // residual of the direct equations, rebuilt from the solved v
  std::vector<double> cpre(n + 1, 0.0);
  const auto v_of_z = [&](double z) {
    return far_field_value(out.v, z, s, dt, y_m);
  };
  for (std::size_t j = 0; j < n; ++j) {
    const double mass = tab.cdf[j + 1] - tab.cdf[j];
    cpre[j + 1] = cpre[j] + 0.5 * mass * (v_of_z(zt[j]) + v_of_z(zt[j + 1]));
  }
  const double v_m_val = out.v[static_cast<std::size_t>(m)];
  const double c_inf = cpre[n] + tab.tail_T * v_m_val +
                       s * (tab.ey_above_T - y_m * tab.tail_T);
  double res = 0.0;
  for (std::int64_t i = 0; i < m; ++i) {
    const std::int64_t j = th_idx[static_cast<std::size_t>(i)];
    double pv;
    if (j == kNeverIdx) {
      pv = c_inf;
    } else {
      const auto ju = static_cast<std::size_t>(j);
      pv = cpre[ju] + tab.tail[ju] * v_of_z(g.node(i + j));
    }
    const double ri = out.v[static_cast<std::size_t>(i)] + out.rho * g_of(j) - pv - r_of(i, j);
    res = std::max(res, std::fabs(ri));
  }
  res = std::max(res, std::fabs(v_m_val - out.v[static_cast<std::size_t>(m - 1)] - s * dt));
  out.residual = res;
  if (!(res <= 1e-9 * (1.0 + rhs_norm))) {
    // crude conditioning hint: solution amplification over the data
    const double hint = mat.coeffs().cwiseAbs().maxCoeff() * x.cwiseAbs().maxCoeff() /
                        std::max(rhs_norm, 1e-300);
    throw SolveError("policy_evaluate: residual " + std::to_string(res) +
                     " exceeds tolerance; condition estimate ~" + std::to_string(hint));
  }
  return out;
}

struct SolverOptions {
  double eps_v = 0.0;      // 0 = auto: 1e-6 * (1 + |v(y_M)|)
  double eps_rho = 1e-8;
  int max_iter = 200;
  bool no_preemption = false;  // restrict the candidate set to {never}
};

/// Average-cost policy iteration with heavy-tail acceleration: alternates the
/// idle suffix-min envelope, the busy-phase argmin over the hybrid candidate
/// set, and exact policy evaluation, from v = 0, rho = 0, theta = never.
inline SolvedPolicy policy_iteration(const ServiceDistribution& dist, double kappa_s,
                                     double kappa_p, const Grids& g,
                                     const SolverOptions& opt = {}) {
  if (opt.max_iter < 1) throw std::invalid_argument("policy_iteration: max_iter >= 1");
  const ActionTables tab = ActionTables::build(dist, g);
  const auto msize = static_cast<std::size_t>(g.m) + 1;

  SolvedPolicy sp;
  sp.grids = g;
  std::vector<double> v(msize, 0.0);
  double rho = 0.0;
  std::vector<double> theta_prev(msize, kInf);
  bool converged = false;
  int iters = 0;

  for (int k = 0; k < opt.max_iter; ++k) {
    const IdleEnvelope env = idle_envelope(v, rho, kappa_s, tab, g);
    // The first evaluated policy is the no-preemption one: its Poisson system
    // is well posed and puts (rho, v) on the right scale before the myopic
    // v = 0 continuation values can steer the busy improvement.
    std::vector<double> theta =
        (k == 0 || opt.no_preemption)
            ? std::vector<double>(msize, kInf)
            : busy_improve(v, rho, env, tab, kappa_p, g, false);

    if (k >= 1 && !opt.no_preemption) {
      bool churn = true;
      for (std::int64_t i = 0; i <= g.m && churn; ++i) {
        churn = theta[static_cast<std::size_t>(i)] == g.dt &&
                env.z_map[static_cast<std::size_t>(i)] == g.node(i);
      }
      if (churn)
        throw SolveError("policy_iteration: degenerate churn policy (theta = dt and "
                         "zero waiting everywhere); costs too small for this grid");
    }

    StationaryPolicy pol{env.z_map, theta, env.z_tail};
    const PolicyEvalResult ev = policy_evaluate(pol, tab, g, kappa_s, kappa_p);
    sp.max_eval_residual = std::max(sp.max_eval_residual, ev.residual);

    double dv = 0.0;
    for (std::size_t i = 0; i < msize; ++i)
      dv = std::max(dv, std::fabs(ev.v[i] - v[i]));
    const double drho = std::fabs(ev.rho - rho);
    sp.residuals.push_back({dv, drho});
    v = ev.v;
    rho = ev.rho;
    iters = k + 1;

    const bool same_theta = std::equal(theta.begin(), theta.end(), theta_prev.begin());
    theta_prev = std::move(theta);
    const double eps_v =
        opt.eps_v > 0.0 ? opt.eps_v : 1e-6 * (1.0 + std::fabs(v[msize - 1]));
    if (dv <= eps_v && drho <= opt.eps_rho && same_theta) {
      converged = true;
      break;
    }
  }

  // report maps consistent with the final (v, rho)
  const IdleEnvelope env = idle_envelope(v, rho, kappa_s, tab, g);
  std::vector<double> theta =
      busy_improve(v, rho, env, tab, kappa_p, g, opt.no_preemption);
  sp.policy = StationaryPolicy{env.z_map, std::move(theta), env.z_tail};
  sp.rho = rho;
  sp.v = std::move(v);
  sp.h_idle = env.h_idle;
  sp.iterations = iters;
  sp.converged = converged;
  return sp;
}

/// Exponential-service stopping objective
///   G(tau) = int_0^tau e^{-l t} (t - rho + l*h_I(t)) dt + e^{-l tau}(kappa_p + tau/l).
/// Test oracle: its argmin must match the solver's constant threshold.
template <typename H>
double exp_stopping_objective(double tau, double rho, H&& h_idle, double lambda,
                              double kappa_p) {
  if (tau < 0.0) throw std::invalid_argument("exp_stopping_objective: tau >= 0");
  double integral = 0.0;
  if (tau > 0.0) {
    integral = adaptive_trapezoid(
        [&](double t) {
          return std::exp(-lambda * t) * (t - rho + lambda * h_idle(t));
        },
        0.0, tau, 1e-10);
  }
  return integral + std::exp(-lambda * tau) * (kappa_p + tau / lambda);
}

}  // namespace tailor
