#include "retq/ergodicity.hpp"

#include <Eigen/Dense>

namespace retq {

StabilityReport check_ergodicity(const ModelConfig& cfg) {
  cfg.validate();
  const int tail = cfg.orbit_threshold + 1;
  GeneratorBlocks blocks = build_blocks(cfg, tail + 1);

  // Phase-process generator of the repeating part: level moves are folded
  // back onto the phase marginal, flush rates join the diagonal via the row
  // sums of the first-column block.
  Matrix a = blocks.diag[tail] + blocks.up[tail] + blocks.down[tail];
  a += Matrix(blocks.to_zero[tail].rowwise().sum().asDiagonal());

  const Eigen::Index n = a.rows();
  Matrix sys = a;
  sys.col(n - 1).setOnes();
  RowVector rhs = RowVector::Zero(n);
  rhs(n - 1) = 1.0;
  RowVector x = sys.transpose().fullPivLu().solve(rhs.transpose()).transpose();

  StabilityReport rep;
  rep.tail_phase = x;
  rep.input_rate = arrival_rate(cfg.arrivals, static_cast<int>(CallClass::Handoff)) +
                   arrival_rate(cfg.arrivals, static_cast<int>(CallClass::New));
  rep.departure_rate = x * blocks.down[tail].rowwise().sum();
  rep.margin = rep.departure_rate - rep.input_rate;
  rep.stable = rep.input_rate < rep.departure_rate;
  return rep;
}

}  // namespace retq
