#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "tailor/distributions.hpp"
#include "tailor/policy.hpp"
#include "tailor/rng.hpp"

namespace tailor {

class SimError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SimConfig {
  std::uint64_t cycles = 100000;        // delivery cycles to simulate
  std::uint64_t warmup_cycles = kAuto;  // kAuto = 1% of cycles
  std::uint64_t batches = 50;
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;  // replication index; (seed, stream) keys the RNG
  std::uint64_t max_preemptions_per_chain = 1000000;

  static constexpr std::uint64_t kAuto = std::numeric_limits<std::uint64_t>::max();

  std::uint64_t effective_warmup() const {
    return warmup_cycles == kAuto ? cycles / 100 : warmup_cycles;
  }

  void validate() const {
    if (batches < 10) throw std::invalid_argument("sim: batches must be >= 10");
    if (cycles < batches) throw std::invalid_argument("sim: cycles must be >= batches");
    if (effective_warmup() >= cycles)
      throw std::invalid_argument("sim: warmup_cycles must be < cycles");
    if (cycles - effective_warmup() < batches)
      throw std::invalid_argument("sim: too few post-warmup cycles for the batch count");
  }
};

struct SimResult {
  double avg_cost = 0.0;
  double stderr_est = 0.0;  // batch-means standard error
  std::uint64_t n_samples = 0;
  std::uint64_t n_preemptions = 0;
  std::uint64_t n_deliveries = 0;
  double aoi_time_integral = 0.0;
  double impulse_cost_total = 0.0;
  double elapsed_sim_time = 0.0;
};

/// Policy view the simulator drives: target AoI to sample at when idle, and
/// preemption age (+inf = never) for a busy phase started at a given AoI.
struct SimPolicy {
  std::function<double(double)> target_aoi;
  std::function<double(double)> preempt_age;
};

inline SimPolicy make_sim_policy(const SolvedPolicy& sp) {
  const double dt = sp.grids.dt, y_cut = sp.grids.y_cut();
  const StationaryPolicy pol = sp.policy;  // copy: keep the view self-contained
  return {
      [pol, dt, y_cut](double aoi) { return pol.target_aoi(aoi, dt, y_cut); },
      [pol, dt, y_cut](double y) { return pol.preempt_age(y, dt, y_cut); },
  };
}

/// Threshold baseline: sample once AoI reaches beta (zero-wait when beta = 0),
/// never preempt.
inline SimPolicy threshold_policy(double beta) {
  return {
      [beta](double aoi) { return std::max(aoi, beta); },
      [](double) { return kInf; },
  };
}

/// Called at every event epoch: (time, AoI just after the event, mode
/// 'I'/'B' just after the event, event name).
using TrajectorySink = std::function<void(double, double, char, const char*)>;

/// Event-driven renewal simulation of the sampling/preemption process:
/// AoI drifts at unit rate, sampling costs kappa_s, preemption costs kappa_p
/// and restarts service with a fresh draw, delivery resets AoI to the
/// delivered packet's service age. Long-run average cost is estimated over
/// post-warmup delivery cycles with batch-means error bars.
inline SimResult simulate(const SimPolicy& pol, const ServiceDistribution& dist,
                          double kappa_s, double kappa_p, const SimConfig& cfg,
                          const TrajectorySink& sink = nullptr) {
  cfg.validate();
  const std::uint64_t warmup = cfg.effective_warmup();
  const std::uint64_t batch_cycles = (cfg.cycles - warmup) / cfg.batches;
  const std::uint64_t total_cycles = warmup + batch_cycles * cfg.batches;

  RngStream rng(cfg.seed, cfg.stream);
  SimResult res;
  std::vector<double> batch_cost(cfg.batches, 0.0), batch_time(cfg.batches, 0.0);

  double clock = 0.0;
  double aoi = dist.moments().mean;  // arbitrary start state, absorbed by warmup
  if (sink) sink(clock, aoi, 'I', "start");

  for (std::uint64_t c = 0; c < total_cycles; ++c) {
    const bool collect = c >= warmup;
    double cost = 0.0, span = 0.0;

    // idle phase: wait until AoI reaches the sampling target
    const double z = pol.target_aoi(aoi);
    if (!std::isfinite(z) || z < aoi - 1e-9)
      throw SimError("simulate: sampling target below current AoI");
    const double wait = std::max(0.0, z - aoi);
    cost += aoi * wait + 0.5 * wait * wait + kappa_s;
    span += wait;
    clock += wait;
    aoi = z;
    if (collect) ++res.n_samples;
    if (sink) sink(clock, aoi, 'B', "sample");

    // busy chain: fresh attempts until one completes before its preempt age
    double y = aoi;
    std::uint64_t chain = 0;
    for (;;) {
      if (!std::isfinite(y)) throw SimError("simulate: AoI overflow in busy chain");
      const double theta = pol.preempt_age(y);
      const double draw = dist.sample(rng);
      if (draw <= theta) {
        cost += y * draw + 0.5 * draw * draw;
        span += draw;
        clock += draw;
        // delivery resets AoI to the delivered packet's service age
        if (draw > y + draw + 1e-9)
          throw std::logic_error("simulate: reset above pre-delivery AoI");
        aoi = draw;
        if (collect) ++res.n_deliveries;
        if (sink) sink(clock, aoi, 'I', "deliver");
        break;
      }
      cost += y * theta + 0.5 * theta * theta + kappa_p;
      span += theta;
      clock += theta;
      y += theta;  // AoI unchanged by the preemption impulse itself
      if (collect) ++res.n_preemptions;
      if (sink) sink(clock, y, 'B', "preempt");
      if (++chain > cfg.max_preemptions_per_chain)
        throw SimError("simulate: preemption cap exceeded within one chain "
                       "(degenerate policy)");
    }

    if (collect) {
      const std::uint64_t b = (c - warmup) / batch_cycles;
      batch_cost[b] += cost;
      batch_time[b] += span;
      res.aoi_time_integral += cost;  // impulse part split off below
      res.elapsed_sim_time += span;
    }
  }

  res.impulse_cost_total = kappa_s * static_cast<double>(res.n_samples) +
                           kappa_p * static_cast<double>(res.n_preemptions);
  res.aoi_time_integral -= res.impulse_cost_total;
  const double total_cost = res.aoi_time_integral + res.impulse_cost_total;
  res.avg_cost = total_cost / res.elapsed_sim_time;

  double mean_ratio = 0.0;
  std::vector<double> ratio(cfg.batches);
  for (std::uint64_t b = 0; b < cfg.batches; ++b) {
    ratio[b] = batch_cost[b] / batch_time[b];
    mean_ratio += ratio[b];
  }
  mean_ratio /= static_cast<double>(cfg.batches);
  double var = 0.0;
  for (double r : ratio) var += (r - mean_ratio) * (r - mean_ratio);
  var /= static_cast<double>(cfg.batches - 1);
  res.stderr_est = std::sqrt(var / static_cast<double>(cfg.batches));
  return res;
}

}  // namespace tailor
