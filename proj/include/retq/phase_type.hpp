#pragma once

#include <vector>

#include "retq/types.hpp"

namespace retq {

// Phase-type distribution (beta, A): absorption time of a CTMC with initial
// row vector beta and sub-generator A. Exit vector A0 = -A*1.
struct PhaseType {
  RowVector init;
  Matrix subgen;

  PhaseType() = default;
  PhaseType(RowVector init_, Matrix subgen_);

  int order() const { return static_cast<int>(init.size()); }
  Vector exit_vector() const { return -subgen.rowwise().sum(); }

  // init (-A)^-1 1. Throws if the sub-generator is singular.
  double mean() const;
  double rate() const { return 1.0 / mean(); }

  static PhaseType exponential(double rate);
  static PhaseType erlang(int stages, double stage_rate);
  // Same shape, sub-generator scaled so the fundamental rate equals target.
  PhaseType scaled_to_rate(double target) const;

  void validate() const;
};

// Phase-type with several absorption channels; the per-channel exit vectors
// sum to -A*1.
struct MarkedPhaseType {
  RowVector init;
  Matrix subgen;
  std::vector<Vector> exits;

  MarkedPhaseType() = default;
  MarkedPhaseType(RowVector init_, Matrix subgen_, std::vector<Vector> exits_);

  int order() const { return static_cast<int>(init.size()); }
  int channels() const { return static_cast<int>(exits.size()); }
  double mean() const;
  double rate() const { return 1.0 / mean(); }
  PhaseType unmarked() const { return PhaseType(init, subgen); }
  // init (-A)^-1 exits[k]; sums to 1 over k.
  double splitting_probability(int channel) const;

  // Two channels: exits[0] = p_ab * A0 (abandonment), exits[1] = rest.
  static MarkedPhaseType split(const PhaseType& ph, double abandon_fraction);

  void validate() const;
};

// Two-matrix Markovian arrival process (D0, D1).
struct Map2 {
  Matrix d0;
  Matrix d1;

  Map2() = default;
  Map2(Matrix d0_, Matrix d1_);

  int order() const { return static_cast<int>(d0.rows()); }
  static Map2 poisson(double rate);

  void validate() const;
};

// Marked MAP: C0 plus one nonnegative matrix per call class.
struct MarkedMap {
  Matrix c0;
  std::vector<Matrix> classes;

  MarkedMap() = default;
  MarkedMap(Matrix c0_, std::vector<Matrix> classes_);

  int order() const { return static_cast<int>(c0.rows()); }
  int class_count() const { return static_cast<int>(classes.size()); }
  Matrix phase_generator() const;

  void validate() const;
};

// Stationary vector of an irreducible conservative generator: pi G = 0, pi 1 = 1.
RowVector stationary_phase(const Matrix& generator);
RowVector stationary_phase(const MarkedMap& map);
RowVector stationary_phase(const Map2& map);

// lambda_k = pi C_k 1.
double arrival_rate(const MarkedMap& map, int cls);
double total_event_rate(const Map2& map);  // pi D1 1

// Single-class view of one class: the other class matrices are folded into d0
// so phase dynamics are preserved and only class-cls transitions are marked.
Map2 class_view(const MarkedMap& map, int cls);
// All classes marked: d0 = C0, d1 = sum of class matrices.
Map2 superposed_view(const MarkedMap& map);

// Lag-1 autocorrelation of consecutive inter-arrival times. With phi the
// stationary vector of the embedded chain P = (-D0)^-1 D1:
//   m1 = phi (-D0)^-1 1,  m2 = 2 phi (-D0)^-2 1,
//   E[X_k X_{k+1}] = phi (-D0)^-1 P (-D0)^-1 1,
//   corr = (E[X_k X_{k+1}] - m1^2) / (m2 - m1^2).
// A Poisson/renewal MAP gives 0. Throws on zero variance.
double map_lag1_correlation(const Map2& map);

// Squared coefficient of variation of inter-arrival times, (m2 - m1^2)/m1^2.
double map_variation_coefficient_sq(const Map2& map);

}  // namespace retq
