#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "tailor/distributions.hpp"

namespace tailor {

/// Round a time to its nearest state-grid node index, ties toward the lower
/// node. Matches the solver's round-to-grid lookup rule.
inline std::int64_t round_to_grid(double y, double dt) {
  const double q = y / dt;
  const double fl = std::floor(q);
  return static_cast<std::int64_t>(fl) + ((q - fl) > 0.5 ? 1 : 0);
}

/// Uniform state grid on [0, y_cut] plus the hybrid preemption-candidate set:
/// uniform multiples of dt up to theta_fine, log-spaced up to theta_max, and a
/// trailing "never" sentinel. All finite candidates are exact grid multiples.
struct Grids {
  double dt = 0.0;
  std::int64_t m = 0;          // state nodes are y_i = i*dt, i = 0..m
  double theta_fine = 0.0;     // end of the uniform candidate segment
  double theta_max = 0.0;      // largest finite candidate (quantized)
  int n_log = 0;
  double slope = 0.0;          // far-field slope s of v beyond y_cut
  std::vector<std::int64_t> candidates;  // finite candidates as grid indices
  std::int64_t quad_n = 0;     // quadrature horizon index: uniform nodes 0..quad_n

  double y_cut() const { return static_cast<double>(m) * dt; }
  double t_act() const { return static_cast<double>(quad_n) * dt; }
  double node(std::int64_t i) const { return static_cast<double>(i) * dt; }
};

/// State grid points {0, dt, ..., M*dt} with M = round(y_cut/dt).
inline std::vector<double> build_state_grid(double dt, double y_cut) {
  if (!(dt > 0.0)) throw std::invalid_argument("state grid: dt must be > 0");
  const std::int64_t m = std::llround(y_cut / dt);
  if (m < 1) throw std::invalid_argument("state grid: y_cut must be >= dt");
  std::vector<double> g(static_cast<std::size_t>(m) + 1);
  for (std::int64_t i = 0; i <= m; ++i) g[static_cast<std::size_t>(i)] = i * dt;
  return g;
}

/// Hybrid candidate set as grid indices (t_j = j*dt, j >= 1), sorted and
/// deduplicated. theta = 0 is excluded: an instant-preemption loop would never
/// let impulses stop accumulating. The infinite "never" candidate is implicit
/// and always available on top of the returned finite set.
inline std::vector<std::int64_t> build_hybrid_action_grid(double dt, double theta_fine,
                                                          double theta_max, int n_log) {
  if (!(dt > 0.0)) throw std::invalid_argument("action grid: dt must be > 0");
  if (!(theta_fine >= dt)) throw std::invalid_argument("action grid: theta_fine < dt");
  if (theta_max < theta_fine)
    throw std::invalid_argument("action grid: theta_max < theta_fine");
  if (n_log < 1) throw std::invalid_argument("action grid: n_log must be >= 1");
  const std::int64_t j_fine = std::llround(theta_fine / dt);
  const std::int64_t j_max = std::llround(theta_max / dt);
  std::vector<std::int64_t> idx;
  idx.reserve(static_cast<std::size_t>(j_fine) + static_cast<std::size_t>(n_log));
  for (std::int64_t j = 1; j <= j_fine; ++j) idx.push_back(j);
  const double tf = j_fine * dt, tm = j_max * dt;
  if (tm > tf) {
    const double ratio = tm / tf;
    for (int k = 1; k <= n_log; ++k) {
      const double t = tf * std::pow(ratio, static_cast<double>(k) / n_log);
      const std::int64_t j = std::max<std::int64_t>(1, std::llround(t / dt));
      idx.push_back(j);
    }
  } else {
    idx.push_back(j_max);
  }
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  return idx;
}

/// Candidate times including the trailing "never" (= +inf) sentinel.
inline std::vector<double> candidate_times(const Grids& g) {
  std::vector<double> t;
  t.reserve(g.candidates.size() + 1);
  for (std::int64_t j : g.candidates) t.push_back(g.node(j));
  t.push_back(kInf);
  return t;
}

/// Lookup of a gridded function with the linear far-field closure
/// v(y) ~ v(y_cut) + s*(y - y_cut) beyond the truncation boundary.
inline double far_field_value(std::span<const double> v, double y, double s,
                              double dt, double y_cut) {
  if (y < 0.0) throw std::invalid_argument("far_field_value: negative y");
  const std::int64_t m = static_cast<std::int64_t>(v.size()) - 1;
  if (y <= y_cut) {
    const std::int64_t i = std::min(round_to_grid(y, dt), m);
    return v[static_cast<std::size_t>(i)];
  }
  return v[static_cast<std::size_t>(m)] + s * (y - static_cast<double>(m) * dt);
}

struct GridParams {
  double dt;
  double y_cut;
  double theta_fine;
  double theta_max;   // may be resolved from tail_eps upstream
  int n_log;
  double slope;
  double tail_eps = 0.0;  // 0 disables the coverage assertion
};

/// Builds the full grid bundle for one scenario. The quadrature horizon spans
/// max(theta_max, y_cut) so that everything beyond it lives in the far-field
/// linear regime of both v and the idle envelope.
inline Grids make_grids(const GridParams& p, const ServiceDistribution& dist) {
  Grids g;
  if (!(p.dt > 0.0)) throw std::invalid_argument("grids: dt must be > 0");
  g.dt = p.dt;
  g.m = std::llround(p.y_cut / p.dt);
  if (g.m < 10) throw std::invalid_argument("grids: y_cut must be >= 10*dt");
  g.candidates = build_hybrid_action_grid(p.dt, p.theta_fine, p.theta_max, p.n_log);
  g.theta_fine = p.theta_fine;
  g.theta_max = g.node(g.candidates.back());
  g.n_log = p.n_log;
  g.slope = p.slope;
  g.quad_n = std::max(g.candidates.back(), g.m);
  if (p.tail_eps > 0.0) {
    const double cover = dist.tail(g.theta_max);
    if (cover > p.tail_eps * (1.0 + 1e-9))
      throw std::invalid_argument("grids: action grid does not cover the tail: tail(" +
                                  std::to_string(g.theta_max) + ") = " +
                                  std::to_string(cover) + " > tail_eps");
  }
  return g;
}

}  // namespace tailor
