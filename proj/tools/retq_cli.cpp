#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "retq/report.hpp"

namespace fs = std::filesystem;
using namespace retq;

namespace {

struct SweepPoint {
  std::vector<double> coords;
  MeasureReport measures;
  bool failed = false;
  std::string error;
};

std::string sweep_csv(const std::vector<SweepAxis>& axes,
                      const std::vector<SweepPoint>& points) {
  std::ostringstream os;
  for (const SweepAxis& a : axes) os << a.key << ',';
  os << "e_orbit,p_repair,p_drop_normal,p_drop_cat,p_block_cat,p_block_emergency,"
        "alpha_f,p_preempt_new,p_preempt_emergency,theta_r_succ,error\n";
  for (const SweepPoint& pt : points) {
    for (double c : pt.coords) os << c << ',';
    if (pt.failed) {
      os << ",,,,,,,,,," << '"' << pt.error << '"' << '\n';
      continue;
    }
    const MeasureReport& m = pt.measures;
    os << m.e_orbit << ',' << m.p_repair << ',' << m.p_drop_normal << ','
       << m.p_drop_cat << ',' << m.p_block_cat << ',' << m.p_block_emergency << ','
       << m.alpha_f << ',' << m.p_preempt_new << ',' << m.p_preempt_emergency << ','
       << m.theta_r_succ << ",\n";
  }
  return os.str();
}

int run_sweep(const RunSpec& spec, const fs::path& out_dir, int threads) {
  if (spec.sweep.empty()) {
    std::cerr << "sweep mode requires a sweep section in the config\n";
    return 1;
  }
  std::size_t total = 1;
  for (const SweepAxis& a : spec.sweep) total *= a.values.size();
  std::vector<SweepPoint> points(total);
  std::atomic<std::size_t> cursor{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t idx = cursor.fetch_add(1);
      if (idx >= total) return;
      SweepPoint& pt = points[idx];
      std::size_t rest = idx;
      ModelConfig cfg = spec.model;
      try {
        for (const SweepAxis& a : spec.sweep) {
          const double v = a.values[rest % a.values.size()];
          rest /= a.values.size();
          pt.coords.push_back(v);
          apply_parameter(cfg, a.key, v);
        }
        StationaryDistribution dist = solve_new(cfg, spec.solver);
        pt.measures = compute_measures(cfg, dist);
      } catch (const std::exception& e) {
        pt.failed = true;
        pt.error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < std::max(1, threads); ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  write_text_file((out_dir / "sweep.csv").string(), sweep_csv(spec.sweep, points));
  std::size_t failed = 0;
  for (const SweepPoint& pt : points)
    if (pt.failed) ++failed;
  std::cout << "sweep: " << total - failed << "/" << total << " points solved, "
            << (out_dir / "sweep.csv").string() << "\n";
  return failed == total ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Matrix-analytic solver and simulator for a multi-server retrial "
               "queue with disasters and backup channels"};
  std::string config_path, mode = "solve", out = ".";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int max_level = -1, threads = static_cast<int>(std::thread::hardware_concurrency());
  bool dump_blocks_flag = false;

  app.add_option("--config", config_path, "JSON model/run configuration")->required();
  app.add_option("--mode", mode, "solve | simulate | check | optimize | sweep")
      ->check(CLI::IsMember({"solve", "simulate", "check", "optimize", "sweep"}));
  app.add_option("--out", out, "output directory");
  app.add_option("--seed", seed, "override simulation/optimizer seed")
      ->each([&](const std::string&) { seed_set = true; });
  app.add_option("--max-level", max_level,
                 "pin the solver's initial truncation level i0 (skips bootstrap)");
  app.add_option("--threads", threads, "worker threads in sweep mode");
  app.add_flag("--dump-blocks", dump_blocks_flag,
               "also write the generator blocks as a triplet text file");
  CLI11_PARSE(app, argc, argv);

  try {
    RunSpec spec = load_config(config_path);
    if (max_level >= 0) spec.solver.initial_level = max_level;
    if (seed_set) {
      spec.sim.seed = seed;
      spec.opt_seed = seed;
    }
    const fs::path out_dir(out);
    fs::create_directories(out_dir);
    RunMeta meta{spec.config_hash, spec.sim.seed};

    if (dump_blocks_flag) {
      GeneratorBlocks blocks =
          build_blocks(spec.model, spec.model.orbit_threshold + 2);
      std::ofstream dump(out_dir / "blocks.txt");
      dump_blocks(blocks, dump);
    }

    if (mode == "check") {
      StabilityReport rep = check_ergodicity(spec.model);
      write_text_file((out_dir / "check.json").string(), to_json(rep, meta));
      std::cout << "stable=" << (rep.stable ? "true" : "false")
                << " margin=" << rep.margin << "\n";
      return rep.stable ? 0 : 3;
    }
    if (mode == "solve") {
      StationaryDistribution dist = solve_new(spec.model, spec.solver);
      MeasureReport m = compute_measures(spec.model, dist);
      write_text_file((out_dir / "solve.json").string(), to_json(m, dist.stats, meta));
      write_distribution_csv(dist, (out_dir / "distribution.csv").string());
      std::cout << "solved to level " << dist.stats.final_level << " in "
                << dist.stats.sweeps << " sweep(s), " << dist.stats.g_evaluations
                << " G evaluations, " << dist.stats.wall_seconds << " s\n";
      return 0;
    }
    if (mode == "simulate") {
      SimEstimate est = simulate(spec.sim);
      write_text_file((out_dir / "simulate.json").string(), to_json(est, meta));
      StabilityReport stab = check_ergodicity(spec.model);
      if (stab.stable) {
        StationaryDistribution dist = solve_new(spec.model, spec.solver);
        MeasureReport m = compute_measures(spec.model, dist);
        write_text_file((out_dir / "agreement.csv").string(), agreement_csv(m, est));
      }
      std::cout << "simulated " << spec.sim.replications << " replication(s), E[orbit]="
                << est.e_orbit.mean << " +- " << est.e_orbit.half_width << "\n";
      return 0;
    }
    if (mode == "optimize") {
      OptResult res = nsga2(spec.optimize, spec.opt_pop, spec.opt_generations,
                            spec.opt_seed);
      RunMeta opt_meta{spec.config_hash, spec.opt_seed};
      write_text_file((out_dir / "optimize.json").string(), to_json(res, opt_meta));
      write_text_file((out_dir / "optimum.csv").string(), optimum_csv(res));
      std::cout << (res.feasible ? "optimum" : "infeasible; best") << " K=" << res.k_star
                << " lambda_e=" << res.lambda_star << " mu_e=" << res.mu_star << "\n";
      return res.feasible ? 0 : 3;
    }
    return run_sweep(spec, out_dir, threads);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
