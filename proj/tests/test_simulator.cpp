#include <doctest.h>

#include <cmath>
#include <vector>

#include "tailor/baselines.hpp"
#include "tailor/simulator.hpp"
#include "tailor/solver.hpp"

using namespace tailor;

TEST_CASE("zero-wait on exponential(1) reproduces rho = 3") {
  const auto d = ServiceDistribution::exponential(1.0);
  SimConfig cfg;
  cfg.cycles = 1000000;
  cfg.seed = 42;
  const SimResult r = simulate(threshold_policy(0.0), d, 1.0, 1.0, cfg);
  CHECK(std::fabs(r.avg_cost - 3.0) <= 3.0 * r.stderr_est);
  CHECK(r.stderr_est < 0.02);
  CHECK(r.n_samples == r.n_deliveries);
  CHECK(r.n_preemptions == 0);
  CHECK(r.avg_cost ==
        doctest::Approx((r.aoi_time_integral + r.impulse_cost_total) /
                        r.elapsed_sim_time));
}

TEST_CASE("same seed and config give a bit-identical result") {
  const auto d = ServiceDistribution::lomax(1.0, 2.1);
  SimConfig cfg;
  cfg.cycles = 20000;
  cfg.seed = 777;
  const SimResult a = simulate(threshold_policy(0.5), d, 1.0, 1.0, cfg);
  const SimResult b = simulate(threshold_policy(0.5), d, 1.0, 1.0, cfg);
  CHECK(a.avg_cost == b.avg_cost);
  CHECK(a.stderr_est == b.stderr_est);
  CHECK(a.aoi_time_integral == b.aoi_time_integral);
  CHECK(a.elapsed_sim_time == b.elapsed_sim_time);
  CHECK(a.n_samples == b.n_samples);
  CHECK(a.n_preemptions == b.n_preemptions);
  CHECK(a.n_deliveries == b.n_deliveries);
}

TEST_CASE("solved lomax policy simulates to the solver cost") {
  const auto d = ServiceDistribution::lomax(1.0, 2.1);
  GridParams p;
  p.dt = 0.02;
  p.y_cut = 20.0 * d.moments().mean;
  p.theta_fine = 5.0 * d.moments().mean;
  p.theta_max = std::ceil(d.tail_quantile(1e-4) / p.dt) * p.dt;
  p.n_log = 60;
  p.slope = d.moments().mean;
  const Grids g = make_grids(p, d);
  const SolvedPolicy sp = policy_iteration(d, 1.0, 1.0, g);
  REQUIRE(sp.converged);
  SimConfig cfg;
  cfg.cycles = 300000;
  cfg.seed = 9;
  const SimResult r = simulate(make_sim_policy(sp), d, 1.0, 1.0, cfg);
  CHECK(std::fabs(r.avg_cost - sp.rho) <= 3.0 * r.stderr_est + 0.01 * sp.rho);
  CHECK(r.n_preemptions > 0);  // preemption is actually exercised
}

TEST_CASE("preemption chains advance the busy-start age by exactly theta") {
  // finite-theta policy: busy-start AoI grows arithmetically across preempts
  const auto d = ServiceDistribution::lomax(1.0, 2.1);
  SimPolicy pol{[](double aoi) { return aoi; }, [](double) { return 0.7; }};
  SimConfig cfg;
  cfg.cycles = 2000;
  cfg.seed = 3;
  std::vector<double> busy_starts;
  double last_mode_start = -1.0;
  const SimResult r = simulate(
      pol, d, 1.0, 1.0, cfg,
      [&](double, double aoi, char mode, const char* ev) {
        if (std::string_view(ev) == "sample") last_mode_start = aoi;
        if (std::string_view(ev) == "preempt") {
          CHECK(aoi == doctest::Approx(last_mode_start + 0.7).epsilon(1e-12));
          last_mode_start = aoi;
        }
        if (std::string_view(ev) == "deliver") CHECK(mode == 'I');
      });
  CHECK(r.n_preemptions > 0);
}

TEST_CASE("batch-means stderr halves when cycles and batches quadruple") {
  const auto d = ServiceDistribution::exponential(1.0);
  SimConfig small;
  small.cycles = 50000;
  small.batches = 50;
  small.seed = 11;
  SimConfig big = small;
  big.cycles = 200000;
  big.batches = 200;
  const SimResult a = simulate(threshold_policy(0.0), d, 1.0, 1.0, small);
  const SimResult b = simulate(threshold_policy(0.0), d, 1.0, 1.0, big);
  const double ratio = a.stderr_est / b.stderr_est;
  CHECK(ratio >= 2.0 * 0.8);
  CHECK(ratio <= 2.0 * 1.2);
}

TEST_CASE("preemption cap flags degenerate policies") {
  const auto d = ServiceDistribution::lomax(1.0, 2.1);
  SimPolicy pol{[](double aoi) { return aoi; }, [](double) { return 0.01; }};
  SimConfig cfg;
  cfg.cycles = 1000;
  cfg.max_preemptions_per_chain = 10;
  CHECK_THROWS_AS(simulate(pol, d, 1.0, 1.0, cfg), SimError);
}

TEST_CASE("config invariants are validated") {
  SimConfig cfg;
  cfg.cycles = 20;
  cfg.batches = 5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.batches = 30;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);  // cycles < batches
  cfg.cycles = 100;
  cfg.warmup_cycles = 100;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
