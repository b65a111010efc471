#pragma once

#include "retq/solver.hpp"

namespace retq {

// Stationary performance functionals. Probabilities are dimensionless, the
// alpha_f and theta_r_succ entries are rates per unit time. Measures whose
// defining arrival rate is zero are reported as NaN (not applicable).
struct MeasureReport {
  std::vector<double> p_orbit;  // orbit size distribution, 0..final_level
  double e_orbit = 0;           // expected orbit size
  double e_orbit_tail = 0;      // bound on the truncated part of the mean

  std::vector<double> p_handoff;    // handoff calls in service, 0..S
  std::vector<double> p_new;        // new calls in service, 0..S
  std::vector<double> p_emergency;  // emergency calls in service, 0..K

  double p_repair = 0;        // system under repair (incl. backup operation)
  double p_drop_normal = 0;   // handoff dropped, all primary channels busy
  double p_drop_cat = 0;      // handoff dropped, backup channels full
  double p_block_cat = 0;     // new call blocked, backup channels full
  double p_block_emergency = 0;  // emergency blocked, backup full of emergencies
  double alpha_f = 0;            // rate of call-loss events caused by disasters
  double p_preempt_new = 0;      // handoff arrival preempts a new call
  double p_preempt_emergency = 0;  // emergency arrival preempts in backup mode
  double theta_r_succ = 0;         // rate of successful retrial connections
};

MeasureReport compute_measures(const ModelConfig& cfg, const StationaryDistribution& z);

}  // namespace retq
