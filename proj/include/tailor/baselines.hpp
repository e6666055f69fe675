#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "tailor/distributions.hpp"

namespace tailor {

struct BaselineResult {
  std::string name;
  double rho = 0.0;
  double beta = 0.0;  // sampling threshold; 0 for zero-wait
};

/// Zero-wait, never-preempt long-run cost by renewal-reward over delivery
/// cycles: rho = (E[Y]^2 + E[Y^2]/2 + kappa_s) / E[Y].
inline double zero_wait_cost(const ServiceDistribution& dist, double kappa_s) {
  const Moments m = dist.moments();
  return (m.mean * m.mean + 0.5 * m.second + kappa_s) / m.mean;
}

/// Average cost of the no-preemption threshold-sampling rule z(d) = max(d, beta).
/// Cycle expectations factorize over the independent pair (previous service
/// time, next service time) into partial moments of Y.
inline double aoi_np_rho(const ServiceDistribution& dist, double kappa_s, double beta) {
  if (beta < 0.0) throw std::invalid_argument("aoi_np_rho: beta must be >= 0");
  const Moments m = dist.moments();
  const PartialExpectations pe = dist.partial_expectations(beta);
  const double fb = dist.tail(beta);
  const double ew = beta - pe.A;                                  // E[(beta - Y)+]
  const double ew2 = beta * beta - 2.0 * beta * pe.A + 2.0 * pe.J1;
  const double s1 = pe.A - beta * fb;                             // E[Y 1{Y<=beta}]
  const double s2 = 2.0 * pe.J1 - beta * beta * fb;               // E[Y^2 1{Y<=beta}]
  const double eyw = beta * s1 - s2;                              // E[Y (beta - Y)+]
  const double num = eyw + m.mean * m.mean +
                     0.5 * (ew2 + 2.0 * ew * m.mean + m.second) + kappa_s;
  return num / (ew + m.mean);
}

/// Optimal no-preemption sampling: minimizes rho(beta) by golden section and
/// checks the fixed-point identity beta = max(0, rho - E[Y]) afterwards.
inline BaselineResult aoi_np_solve(const ServiceDistribution& dist, double kappa_s) {
  const Moments m = dist.moments();
  double hi = 10.0 * (m.mean + std::sqrt(m.second));
  constexpr double kGolden = 0.6180339887498949;

  double beta_star = 0.0;
  for (int attempt = 0;; ++attempt) {
    double a = 0.0, b = hi;
    double x1 = b - kGolden * (b - a), x2 = a + kGolden * (b - a);
    double f1 = aoi_np_rho(dist, kappa_s, x1), f2 = aoi_np_rho(dist, kappa_s, x2);
    const double tol = 1e-10 * (1.0 + hi);
    while (b - a > tol) {
      if (f1 <= f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - kGolden * (b - a);
        f1 = aoi_np_rho(dist, kappa_s, x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + kGolden * (b - a);
        f2 = aoi_np_rho(dist, kappa_s, x2);
      }
    }
    beta_star = 0.5 * (a + b);
    if (beta_star < 0.99 * hi) break;
    if (attempt >= 6)
      throw std::runtime_error("aoi_np_solve: minimizer keeps hitting the bracket "
                               "edge after 6 doublings");
    hi *= 2.0;
  }
  // the edge beta = 0 can win over an interior stationary point
  if (aoi_np_rho(dist, kappa_s, 0.0) <= aoi_np_rho(dist, kappa_s, beta_star))
    beta_star = 0.0;
  const double rho_star = aoi_np_rho(dist, kappa_s, beta_star);
  const double fixed_point = std::max(0.0, rho_star - m.mean);
  if (std::fabs(beta_star - fixed_point) > 1e-4 * (1.0 + rho_star))
    throw std::runtime_error("aoi_np_solve: fixed-point identity violated: beta = " +
                             std::to_string(beta_star) + " vs max(0, rho - E[Y]) = " +
                             std::to_string(fixed_point));
  return {"AoI-NP", rho_star, beta_star};
}

}  // namespace tailor
