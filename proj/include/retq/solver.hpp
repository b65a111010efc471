#pragma once

#include "retq/generator.hpp"

namespace retq {

struct SolverParams {
  double delta = 1e-12;    // tail mass cutoff for the bootstrap level
  double eps_g = 1e-10;    // accuracy of the G matrices
  double eps_f = 1e-10;    // accuracy of the steady-state vector
  int s_multiplier = 2;    // s = m * i0
  int initial_level = -1;  // i0; negative lets the solver bootstrap it
  int max_iterations = 64;
};

struct SolverStats {
  int initial_level = 0;       // i0 actually used
  int interval = 0;            // s actually used
  int final_level = 0;         // i*, highest level with a computed vector
  int g_evaluations = 0;       // G-recursion matrix evaluations
  int sweeps = 0;              // backward/forward rounds until convergence
  double tail_mass_bound = 0;  // probability mass above final_level
  double wall_seconds = 0;
};

struct StationaryDistribution {
  std::vector<RowVector> z;  // per level, 0..final_level
  SolverStats stats;

  double level_mass(int level) const { return z[level].sum(); }
  double total() const;
};

// Truncation level for the M/M/S-type analogue used to bootstrap i0: the
// birth-death chain with the same mean input, service and retrial rates.
int bootstrap_initial_level(const ModelConfig& cfg, double delta);

// Steady-state solver expanding the G-matrix interval until both the matrix
// recursion and the probability vector stabilise.
StationaryDistribution solve_new(const ModelConfig& cfg, const SolverParams& params);

// Baseline variant: i0 and s fixed by the caller; on reaching the interval
// end without convergence the interval is discarded and restarted further
// out.
StationaryDistribution solve_old(const ModelConfig& cfg, const SolverParams& params);

}  // namespace retq
