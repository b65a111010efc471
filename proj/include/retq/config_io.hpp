#pragma once

#include <string>
#include <vector>

#include "retq/nsga2.hpp"
#include "retq/simulator.hpp"

namespace retq {

struct SweepAxis {
  std::string key;  // parameter name, see apply_parameter
  std::vector<double> values;
};

// One run request: the model plus per-mode parameter sections.
struct RunSpec {
  ModelConfig model;
  SolverParams solver;
  SimConfig sim;        // sim.model filled from model
  OptProblem optimize;  // optimize.base filled from model
  int opt_pop = 40;
  int opt_generations = 50;
  std::uint64_t opt_seed = 1;
  std::vector<SweepAxis> sweep;
  std::string config_hash;  // FNV-1a of the raw config text
};

// Parse and validate a JSON config file. Reported errors carry the JSON
// path of the offending entry.
RunSpec load_config(const std::string& path);
RunSpec parse_config(const std::string& text, const std::string& origin);

// Named model transformations used by sweep axes and experiment grids:
//   lambda_h, lambda_n, lambda_e  (class arrival rate, class matrix rescaled)
//   mu_h, mu_n, mu_e, mu_repair   (PH rate rescaled, shape kept)
//   theta                         (retrial clock rate)
//   catastrophe_rate              (disaster MAP rate)
//   channels, backup_channels, orbit_threshold (integers)
void apply_parameter(ModelConfig& cfg, const std::string& key, double value);

std::string fnv1a_hex(const std::string& text);

}  // namespace retq
