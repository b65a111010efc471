#pragma once

#include <cstdint>

#include "retq/measures.hpp"

namespace retq {

// Minimize the backup channel count K subject to the three catastrophic-
// scenario loss probabilities staying below tolerance. Decision variables:
// integer K and the emergency arrival and service rates.
struct OptProblem {
  ModelConfig base;
  int k_min = 1, k_max = 1;
  double lambda_lo = 0.1, lambda_hi = 5.0;  // emergency arrival rate box
  double mu_lo = 0.1, mu_hi = 10.0;         // emergency service rate box
  double eps1 = 1e-3;  // bound on P_E (emergency blocking)
  double eps2 = 1e-3;  // bound on P_b^c (new-call blocking, backup mode)
  double eps3 = 1e-3;  // bound on P_preempt^emr
  bool optimize_lambda = true;  // false fixes lambda_E at fixed_lambda
  double fixed_lambda = 1.0;
  SolverParams solver;
};

struct ConstraintValues {
  double p_block_emergency = 0;
  double p_block_cat = 0;
  double p_preempt_emergency = 0;
  double violation = 0;  // sum of positive constraint excesses
  bool feasible = false;
};

struct OptResult {
  bool feasible = false;
  int k_star = 0;
  double lambda_star = 0, mu_star = 0;
  ConstraintValues at_optimum;
  int generations = 0;
  int evaluations = 0;  // solver runs (cache misses)
};

// Model with the decision vector applied: K backup channels, emergency class
// matrix scaled to lambda_e, emergency service scaled to rate mu_e.
ModelConfig apply_decision(const OptProblem& problem, int k, double lambda_e,
                           double mu_e);

ConstraintValues evaluate_decision(const OptProblem& problem, int k, double lambda_e,
                                   double mu_e);

OptResult nsga2(const OptProblem& problem, int pop, int generations,
                std::uint64_t seed);

// Exhaustive oracle: smallest K admitting a feasible point on a dense
// (lambda_e, mu_e) grid; k_max + 1 when even K = k_max is infeasible.
int verify_minimal_k(const OptProblem& problem, int grid = 8);

}  // namespace retq
