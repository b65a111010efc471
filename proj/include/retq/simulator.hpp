#pragma once

#include <cstdint>
#include <random>

#include "retq/measures.hpp"

namespace retq {

// Exact CTMC absorption sampling; channel is always 0 for a plain PH and
// identifies the absorption channel for a marked PH.
std::pair<double, int> sample_ph(const PhaseType& ph, std::mt19937_64& rng);
std::pair<double, int> sample_ph(const MarkedPhaseType& ph, std::mt19937_64& rng);

struct SimConfig {
  ModelConfig model;
  std::uint64_t events = 1000000;  // horizon per replication, post-warmup
  double warmup_fraction = 0.1;
  int replications = 1;
  int batches = 20;  // per replication
  std::uint64_t seed = 1;
  std::uint64_t orbit_warning_bound = 100000;
};

struct Estimate {
  double mean = 0;
  double se = 0;
  double half_width = 0;  // 95% CI
  int batches = 0;

  bool covers(double x) const { return std::abs(x - mean) <= half_width; }
};

// Per-measure batch-means estimates; mirrors MeasureReport. Count-ratio
// measures with no observed arrivals in a batch skip that batch.
struct SimEstimate {
  std::vector<Estimate> p_orbit;
  Estimate e_orbit;
  std::vector<Estimate> p_handoff, p_new, p_emergency;
  Estimate p_repair;
  Estimate p_drop_normal, p_drop_cat, p_block_cat, p_block_emergency;
  Estimate alpha_f, p_preempt_new, p_preempt_emergency, theta_r_succ;
  bool orbit_warning = false;  // orbit exceeded the configured bound
};

// Full-model event simulation tracking each call's phase individually; an
// independent statistical oracle for the matrix-analytic pipeline.
SimEstimate simulate(const SimConfig& sim);

}  // namespace retq
