#include "retq/phase_type.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace retq {

namespace {

constexpr double kTol = 1e-12;

void check_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols())
    throw std::invalid_argument(std::string(what) + ": matrix must be square");
}

void check_rate_matrix(const Matrix& m, const char* what) {
  check_square(m, what);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (i != j && m(i, j) < -kTol)
        throw std::invalid_argument(std::string(what) +
                                    ": negative off-diagonal entry");
}

// Solve pi G = 0, pi 1 = 1 by replacing the last column with ones.
RowVector solve_stationary(const Matrix& gen) {
  const Eigen::Index n = gen.rows();
  Matrix a = gen.transpose();
  a.row(n - 1).setOnes();
  Vector b = Vector::Zero(n);
  b(n - 1) = 1.0;
  Eigen::FullPivLU<Matrix> lu(a);
  if (!lu.isInvertible())
    throw std::runtime_error("stationary_phase: reducible or degenerate generator");
  Vector pi = lu.solve(b);
  if (pi.minCoeff() < -1e-9)
    throw std::runtime_error("stationary_phase: negative solution, generator not irreducible");
  return pi.cwiseMax(0.0).transpose() / pi.cwiseMax(0.0).sum();
}

// Reachability of the directed graph of positive off-diagonal entries.
bool is_irreducible(const Matrix& gen) {
  const int n = static_cast<int>(gen.rows());
  if (n == 1) return true;
  for (int start = 0; start < n; ++start) {
    std::vector<bool> seen(n, false);
    std::vector<int> stack{start};
    seen[start] = true;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int v = 0; v < n; ++v)
        if (v != u && !seen[v] && gen(u, v) > kTol) {
          seen[v] = true;
          stack.push_back(v);
        }
    }
    for (bool s : seen)
      if (!s) return false;
  }
  return true;
}

}  // namespace

PhaseType::PhaseType(RowVector init_, Matrix subgen_)
    : init(std::move(init_)), subgen(std::move(subgen_)) {
  validate();
}

void PhaseType::validate() const {
  if (init.size() != subgen.rows())
    throw std::invalid_argument("PhaseType: init/subgen dimension mismatch");
  check_rate_matrix(subgen, "PhaseType");
  if (init.minCoeff() < -kTol || std::abs(init.sum() - 1.0) > 1e-10)
    throw std::invalid_argument("PhaseType: init is not a probability vector");
  bool strict = false;
  for (Eigen::Index i = 0; i < subgen.rows(); ++i) {
    if (subgen(i, i) >= 0)
      throw std::invalid_argument("PhaseType: sub-generator diagonal must be negative");
    double rs = subgen.row(i).sum();
    if (rs > 1e-10)
      throw std::invalid_argument("PhaseType: sub-generator row sum must be <= 0");
    if (rs < -kTol) strict = true;
  }
  if (!strict)
    throw std::invalid_argument("PhaseType: sub-generator has no exit (not a distribution)");
}

double PhaseType::mean() const {
  Eigen::FullPivLU<Matrix> lu(-subgen);
  if (!lu.isInvertible())
    throw std::runtime_error("PhaseType: singular sub-generator, invalid distribution");
  Vector ones = Vector::Ones(order());
  return init * lu.solve(ones);
}

PhaseType PhaseType::exponential(double rate) {
  if (rate <= 0) throw std::invalid_argument("PhaseType::exponential: rate must be > 0");
  RowVector b(1);
  b << 1.0;
  Matrix a(1, 1);
  a << -rate;
  return PhaseType(b, a);
}

PhaseType PhaseType::erlang(int stages, double stage_rate) {
  if (stages < 1 || stage_rate <= 0)
    throw std::invalid_argument("PhaseType::erlang: bad parameters");
  RowVector b = RowVector::Zero(stages);
  b(0) = 1.0;
  Matrix a = Matrix::Zero(stages, stages);
  for (int i = 0; i < stages; ++i) {
    a(i, i) = -stage_rate;
    if (i + 1 < stages) a(i, i + 1) = stage_rate;
  }
  return PhaseType(b, a);
}

PhaseType PhaseType::scaled_to_rate(double target) const {
  if (target <= 0) throw std::invalid_argument("scaled_to_rate: target must be > 0");
  return PhaseType(init, subgen * (target / rate()));
}

MarkedPhaseType::MarkedPhaseType(RowVector init_, Matrix subgen_,
                                 std::vector<Vector> exits_)
    : init(std::move(init_)), subgen(std::move(subgen_)), exits(std::move(exits_)) {
  validate();
}

void MarkedPhaseType::validate() const {
  PhaseType(init, subgen);  // base invariants
  if (exits.empty())
    throw std::invalid_argument("MarkedPhaseType: needs at least one absorption channel");
  Vector total = Vector::Zero(order());
  for (const Vector& e : exits) {
    if (e.size() != order())
      throw std::invalid_argument("MarkedPhaseType: exit vector dimension mismatch");
    if (e.minCoeff() < -kTol)
      throw std::invalid_argument("MarkedPhaseType: exit vectors must be nonnegative");
    total += e;
  }
  Vector expect = -subgen.rowwise().sum();
  if ((total - expect).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("MarkedPhaseType: exit vectors do not sum to -A*1");
}

double MarkedPhaseType::mean() const { return unmarked().mean(); }

double MarkedPhaseType::splitting_probability(int channel) const {
  Eigen::FullPivLU<Matrix> lu(-subgen);
  return init * lu.solve(exits.at(channel));
}

MarkedPhaseType MarkedPhaseType::split(const PhaseType& ph, double abandon_fraction) {
  if (abandon_fraction < 0.0 || abandon_fraction > 1.0)
    throw std::invalid_argument("MarkedPhaseType::split: fraction outside [0,1]");
  Vector a0 = ph.exit_vector();
  return MarkedPhaseType(ph.init, ph.subgen,
                         {abandon_fraction * a0, (1.0 - abandon_fraction) * a0});
}

Map2::Map2(Matrix d0_, Matrix d1_) : d0(std::move(d0_)), d1(std::move(d1_)) {
  validate();
}

void Map2::validate() const {
  check_rate_matrix(d0, "Map2 d0");
  check_square(d1, "Map2 d1");
  if (d1.rows() != d0.rows())
    throw std::invalid_argument("Map2: d0/d1 dimension mismatch");
  if (d1.minCoeff() < -kTol)
    throw std::invalid_argument("Map2: d1 must be nonnegative");
  Matrix gen = d0 + d1;
  if (gen.rowwise().sum().cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("Map2: d0 + d1 is not conservative");
  // The all-zero MAP (no events at all) is accepted as the degenerate
  // "catastrophes switched off" case.
  if (d1.cwiseAbs().maxCoeff() > kTol) {
    for (Eigen::Index i = 0; i < d0.rows(); ++i)
      if (d0(i, i) >= 0)
        throw std::invalid_argument("Map2: d0 diagonal must be negative");
    if (!is_irreducible(gen))
      throw std::invalid_argument("Map2: d0 + d1 must be irreducible");
  }
}

Map2 Map2::poisson(double rate) {
  Matrix d0(1, 1), d1(1, 1);
  d0 << -rate;
  d1 << rate;
  return Map2(d0, d1);
}

MarkedMap::MarkedMap(Matrix c0_, std::vector<Matrix> classes_)
    : c0(std::move(c0_)), classes(std::move(classes_)) {
  validate();
}

Matrix MarkedMap::phase_generator() const {
  Matrix gen = c0;
  for (const Matrix& c : classes) gen += c;
  return gen;
}

void MarkedMap::validate() const {
  check_rate_matrix(c0, "MarkedMap c0");
  if (classes.empty())
    throw std::invalid_argument("MarkedMap: needs at least one class");
  for (const Matrix& c : classes) {
    if (c.rows() != c0.rows() || c.cols() != c0.cols())
      throw std::invalid_argument("MarkedMap: class matrix dimension mismatch");
    if (c.minCoeff() < -kTol)
      throw std::invalid_argument("MarkedMap: class matrices must be nonnegative");
  }
  Matrix gen = phase_generator();
  if (gen.rowwise().sum().cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("MarkedMap: c0 + sum of classes is not conservative");
  if (!is_irreducible(gen))
    throw std::invalid_argument("MarkedMap: phase generator must be irreducible");
}

RowVector stationary_phase(const Matrix& generator) {
  return solve_stationary(generator);
}

RowVector stationary_phase(const MarkedMap& map) {
  return solve_stationary(map.phase_generator());
}

RowVector stationary_phase(const Map2& map) {
  return solve_stationary(map.d0 + map.d1);
}

double arrival_rate(const MarkedMap& map, int cls) {
  if (cls < 0 || cls >= map.class_count())
    throw std::invalid_argument("arrival_rate: invalid class id");
  RowVector pi = stationary_phase(map);
  return pi * map.classes[cls].rowwise().sum();
}

double total_event_rate(const Map2& map) {
  if (map.d1.cwiseAbs().maxCoeff() < kTol) return 0.0;
  RowVector pi = stationary_phase(map);
  return pi * map.d1.rowwise().sum();
}

Map2 class_view(const MarkedMap& map, int cls) {
  if (cls < 0 || cls >= map.class_count())
    throw std::invalid_argument("class_view: invalid class id");
  Matrix d0 = map.c0;
  for (int k = 0; k < map.class_count(); ++k)
    if (k != cls) d0 += map.classes[k];
  return Map2(d0, map.classes[cls]);
}

Map2 superposed_view(const MarkedMap& map) {
  Matrix d1 = Matrix::Zero(map.order(), map.order());
  for (const Matrix& c : map.classes) d1 += c;
  return Map2(map.c0, d1);
}

namespace {

struct MapMoments {
  double m1, m2, joint;
};

MapMoments interarrival_moments(const Map2& map) {
  const Eigen::Index n = map.order();
  if (map.d1.cwiseAbs().maxCoeff() < kTol)
    throw std::runtime_error("map moments: MAP has no arrivals");
  Eigen::FullPivLU<Matrix> lu(-map.d0);
  if (!lu.isInvertible())
    throw std::runtime_error("map moments: -D0 singular");
  Matrix inv = lu.inverse();
  Matrix p = inv * map.d1;  // embedded chain at arrival epochs
  RowVector phi = solve_stationary(p - Matrix::Identity(n, n));
  Vector ones = Vector::Ones(n);
  MapMoments mm;
  mm.m1 = phi * inv * ones;
  mm.m2 = 2.0 * phi * inv * inv * ones;
  mm.joint = phi * inv * p * inv * ones;
  return mm;
}

}  // namespace

double map_lag1_correlation(const Map2& map) {
  MapMoments mm = interarrival_moments(map);
  double var = mm.m2 - mm.m1 * mm.m1;
  if (var <= 1e-14 * mm.m1 * mm.m1)
    throw std::runtime_error("map_lag1_correlation: degenerate zero-variance input");
  return (mm.joint - mm.m1 * mm.m1) / var;
}

double map_variation_coefficient_sq(const Map2& map) {
  MapMoments mm = interarrival_moments(map);
  return (mm.m2 - mm.m1 * mm.m1) / (mm.m1 * mm.m1);
}

}  // namespace retq
