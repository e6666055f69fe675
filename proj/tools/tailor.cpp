// tailor: optimal joint sampling-and-preemption policies for minimizing the
// age of information under general service-time distributions, with analytic
// baselines and a seeded event-driven simulator for validation.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "tailor/cli.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

void print_rows(const std::vector<tailor::CompareRow>& rows) {
  std::printf("%-14s %10s %10s %10s %8s %8s\n", "scenario", "tailor", "aoi-np",
              "zero-wait", "np/t", "zw/t");
  for (const auto& r : rows)
    std::printf("%-14s %10.4g %10.4g %10.4g %8.3g %8.3g\n", r.scenario.c_str(),
                r.tailor_rho, r.aoinp_rho, r.zw_rho, r.ratio_aoinp, r.ratio_zw);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"age-of-information sampling and preemption policy toolkit"};
  app.require_subcommand(1);

  std::string config, out = "out", trace, policy = "tailor";
  tailor::cli::Overrides ov;
  std::uint64_t seed_flag = 0, cycles_flag = 0;

  const auto add_common = [&](CLI::App* cmd, bool needs_config) {
    if (needs_config)
      cmd->add_option("--config", config, "scenario config (JSON)")->required();
    cmd->add_option("--out", out, "output directory");
    cmd->add_option("--seed", seed_flag, "override simulation seed");
    cmd->add_option("--cycles", cycles_flag, "override simulation cycle count");
  };

  auto* solve = app.add_subcommand("solve", "solve one scenario; writes summary.json and policy.csv");
  add_common(solve, true);
  auto* compare = app.add_subcommand("compare", "solve + simulate a scenario set; writes comparison.csv");
  add_common(compare, true);
  auto* simulate = app.add_subcommand("simulate", "simulate a policy for one scenario");
  add_common(simulate, true);
  simulate->add_option("--policy", policy, "tailor | aoinp | zw");
  simulate->add_flag("--emit-trajectory", ov.emit_trajectory,
                     "dump t,aoi,mode,event at every event epoch");
  auto* tracecmd = app.add_subcommand("trace", "solve with an empirical delay trace");
  add_common(tracecmd, true);
  tracecmd->add_option("--trace", trace, "trace file: one delay per line")->required();
  auto* table1 = app.add_subcommand("table1", "run the built-in benchmark scenario set");
  add_common(table1, false);

  CLI11_PARSE(app, argc, argv);

  for (CLI::App* cmd : {solve, compare, simulate, tracecmd, table1}) {
    if (!cmd->parsed()) continue;
    if (cmd->count("--seed")) ov.seed = seed_flag;
    if (cmd->count("--cycles")) ov.cycles = cycles_flag;
  }

  try {
    if (solve->parsed()) {
      const auto sp = tailor::cli::run_solve(config, out, ov);
      std::printf("rho = %.10g  iterations = %d  converged = %s\n", sp.rho,
                  sp.iterations, sp.converged ? "true" : "false");
      return sp.converged ? kExitOk : kExitNumeric;
    }
    if (compare->parsed()) {
      print_rows(tailor::cli::run_compare(config, out, ov));
      return kExitOk;
    }
    if (simulate->parsed()) {
      const auto r = tailor::cli::run_simulate(config, out, policy, ov);
      std::printf("avg_cost = %.10g  stderr = %.3g  (samples %llu, preemptions %llu)\n",
                  r.avg_cost, r.stderr_est,
                  static_cast<unsigned long long>(r.n_samples),
                  static_cast<unsigned long long>(r.n_preemptions));
      return kExitOk;
    }
    if (tracecmd->parsed()) {
      const auto sp = tailor::cli::run_trace(config, trace, out, ov);
      std::printf("rho = %.10g  iterations = %d  converged = %s\n", sp.rho,
                  sp.iterations, sp.converged ? "true" : "false");
      return sp.converged ? kExitOk : kExitNumeric;
    }
    if (table1->parsed()) {
      print_rows(tailor::cli::run_table1(out, ov));
      return kExitOk;
    }
  } catch (const tailor::ConfigError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitConfig;
  } catch (const tailor::TraceParseError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitConfig;
  } catch (const tailor::cli::IoError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitIo;
  } catch (const tailor::SolveError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return kExitOk;
}
