#pragma once

#include "retq/generator.hpp"

namespace retq {

// Drift condition for the level process, evaluated on the repeating tail
// blocks. The chain is positive recurrent iff the input rate of orbit-bound
// calls is strictly below the stationary departure rate of the tail phase
// process (disaster flushes folded into its diagonal).
struct StabilityReport {
  bool stable = false;
  double input_rate = 0.0;      // lambda_H + lambda_N
  double departure_rate = 0.0;  // stationary orbit departure rate in the tail
  double margin = 0.0;          // departure_rate - input_rate
  RowVector tail_phase;         // stationary vector of the tail phase process
};

StabilityReport check_ergodicity(const ModelConfig& cfg);

}  // namespace retq
