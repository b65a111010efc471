#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/SparseCore>

#include "retq/model.hpp"

namespace retq {

struct Transition {
  StateDescriptor to;
  double rate;
};

// Every transition out of a state, by event semantics. Self-loops (lost
// arrivals that do not move the MMAP phase) are included with their rate;
// they cancel against the diagonal during assembly.
std::vector<Transition> transitions(const ModelConfig& cfg, const StateDescriptor& s);

// Total rate of all exponential clocks active in the state: MMAP, disaster
// MAP and every running PH clock. The diagonal of the generator is
// -total_exit_rate + (self-loop rates).
double total_exit_rate(const ModelConfig& cfg, const StateDescriptor& s);

// Block representation of the level-dependent generator: block tridiagonal
// in the orbit size plus the disaster first column. For l > M the up/diag/
// down/to_zero blocks no longer depend on l.
struct GeneratorBlocks {
  ModelConfig cfg;
  int max_level = 0;
  std::vector<LevelIndex> index;  // per level, 0..max_level
  std::vector<Matrix> diag;       // Q_{l,l},   l = 0..max_level
  std::vector<Matrix> up;         // Q_{l,l+1}, l = 0..max_level-1
  std::vector<Matrix> down;       // Q_{l,l-1}, orbit departures, l >= 1
  std::vector<Matrix> to_zero;    // Q_{l,0},   disaster flush, l >= 1

  // Q_{l,0} as used in balance equations: down(1)+to_zero(1) at l = 1,
  // to_zero(l) for l >= 2.
  Matrix first_column(int level) const;
  // Append blocks for further levels (used when the solver search interval
  // grows).
  void extend(int new_max_level);
};

// Assemble blocks for levels 0..max_level and verify that every global row
// sums to zero (tolerance 1e-10); throws naming the offending state
// otherwise.
GeneratorBlocks build_blocks(const ModelConfig& cfg, int max_level);

// Full sparse generator truncated at max_level, with the up-block of the
// last level folded into its diagonal. Row order: level 0 first.
Eigen::SparseMatrix<double> truncate_direct(const GeneratorBlocks& blocks);

// Stationary vector of the truncated generator via sparse LU, split back
// into per-level segments.
std::vector<RowVector> stationary_direct(const GeneratorBlocks& blocks);

// Triplet text dump: one "level_from level_to row col rate" line per entry.
void dump_blocks(const GeneratorBlocks& blocks, std::ostream& os);

}  // namespace retq
