#include <doctest.h>

#include <Eigen/SparseLU>
#include <random>

#include "retq/config_io.hpp"
#include "retq/ergodicity.hpp"
#include "retq/solver.hpp"

using namespace retq;

namespace {

std::string fixture(const char* name) {
  return std::string(RETQ_FIXTURE_DIR) + "/" + name;
}

// total variation distance between the orbit-size marginals
double level_tv(const StationaryDistribution& a, const StationaryDistribution& b) {
  const size_t n = std::max(a.z.size(), b.z.size());
  double tv = 0;
  for (size_t l = 0; l < n; ++l) {
    const double pa = l < a.z.size() ? a.z[l].sum() : 0.0;
    const double pb = l < b.z.size() ? b.z[l].sum() : 0.0;
    tv += std::abs(pa - pb);
  }
  return 0.5 * tv;
}

// single-phase test chain, stabilised by the disaster flush
ModelConfig random_chain(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ModelConfig cfg;
  cfg.channels = 2;
  cfg.backup_channels = 1;
  cfg.orbit_threshold = 2;
  const double lh = 0.1 + 0.2 * u(rng);
  const double ln = 0.2 + 0.3 * u(rng);
  cfg.arrivals.c0 = Matrix::Constant(1, 1, -(lh + ln + 0.1));
  cfg.arrivals.classes = {Matrix::Constant(1, 1, lh), Matrix::Constant(1, 1, ln),
                          Matrix::Constant(1, 1, 0.1)};
  cfg.catastrophe = Map2::poisson(0.02 + 0.05 * u(rng));
  cfg.service[0] = PhaseType::exponential(0.8 + 0.6 * u(rng));
  cfg.service[1] = PhaseType::exponential(0.8 + 0.6 * u(rng));
  cfg.service[2] = PhaseType::exponential(1.0);
  cfg.repair = PhaseType::exponential(0.5 + u(rng));
  cfg.retrial = MarkedPhaseType::split(PhaseType::exponential(1.0 + 2.0 * u(rng)), 0.2);
  cfg.validate();
  return cfg;
}

}  // namespace

TEST_CASE("degenerate configuration reproduces the classical retrial queue") {
  // Independent oracle: the M/M/S retrial queue with at most M active retrial
  // clocks, assembled as a flat truncated CTMC over (busy, orbit) pairs.
  RunSpec spec = load_config(fixture("degenerate_mms.json"));
  const int S = spec.model.channels;
  const int M = spec.model.orbit_threshold;
  const double lam = arrival_rate(spec.model.arrivals, 1);
  const double mu = spec.model.service[1].rate();
  const double theta = spec.model.retrial.subgen(0, 0) == 0
                           ? 0.0
                           : -spec.model.retrial.subgen(0, 0);
  REQUIRE(lam == doctest::Approx(1.5));
  REQUIRE(mu == doctest::Approx(1.0));
  REQUIRE(theta == doctest::Approx(1.5));

  const int L = 220;  // orbit truncation, far beyond the solver tail cutoff
  const int n = (S + 1) * (L + 1);
  auto id = [&](int busy, int orbit) { return orbit * (S + 1) + busy; };
  Eigen::SparseMatrix<double> q(n, n);
  std::vector<Eigen::Triplet<double>> trip;
  auto add = [&](int from, int to, double rate) {
    trip.emplace_back(to, from, rate);   // transposed for the balance system
    trip.emplace_back(from, from, -rate);
  };
  for (int orbit = 0; orbit <= L; ++orbit)
    for (int busy = 0; busy <= S; ++busy) {
      const int s = id(busy, orbit);
      if (busy < S) add(s, id(busy + 1, orbit), lam);
      else if (orbit < L) add(s, id(busy, orbit + 1), lam);
      if (busy > 0) add(s, id(busy - 1, orbit), busy * mu);
      if (orbit > 0 && busy < S)
        add(s, id(busy + 1, orbit - 1), std::min(orbit, M) * theta);
    }
  q.setFromTriplets(trip.begin(), trip.end());
  // pin pi(0) = 1, drop its balance equation, then renormalise
  Vector rhs = Vector::Zero(n - 1);
  Eigen::SparseMatrix<double> sys(n - 1, n - 1);
  std::vector<Eigen::Triplet<double>> st;
  for (int col = 0; col < q.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(q, col); it; ++it) {
      if (it.row() == 0) continue;
      if (col == 0) rhs(it.row() - 1) -= it.value();
      else st.emplace_back(it.row() - 1, col - 1, it.value());
    }
  sys.setFromTriplets(st.begin(), st.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(sys);
  REQUIRE(lu.info() == Eigen::Success);
  Vector tail = lu.solve(rhs);
  Vector pi(n);
  pi(0) = 1.0;
  pi.tail(n - 1) = tail;
  pi /= pi.sum();

  StationaryDistribution z = solve_new(spec.model, spec.solver);
  double tv_orbit = 0, tv_busy = 0;
  Vector busy_marg = Vector::Zero(S + 1);
  for (int orbit = 0; orbit <= L; ++orbit)
    for (int busy = 0; busy <= S; ++busy) busy_marg(busy) += pi(id(busy, orbit));
  Vector busy_solver = Vector::Zero(S + 1);
  for (size_t l = 0; l < z.z.size(); ++l) {
    LevelIndex index(spec.model, static_cast<int>(l));
    index.for_each([&](std::int64_t i, const StateDescriptor& s) {
      busy_solver(s.k1 + s.k2) += z.z[l](i);
    });
    double oracle_level = 0;
    if (l <= static_cast<size_t>(L))
      for (int busy = 0; busy <= S; ++busy)
        oracle_level += pi(id(busy, static_cast<int>(l)));
    tv_orbit += std::abs(z.level_mass(static_cast<int>(l)) - oracle_level);
  }
  tv_busy = (busy_solver - busy_marg).cwiseAbs().sum();
  CHECK(0.5 * tv_orbit < 1e-8);
  CHECK(0.5 * tv_busy < 1e-8);
}

TEST_CASE("expanding and restarting solver variants agree") {
  RunSpec spec = load_config(fixture("small_s2.json"));
  StationaryDistribution a = solve_new(spec.model, spec.solver);
  StationaryDistribution b = solve_old(spec.model, spec.solver);
  CHECK(level_tv(a, b) < 1e-8);
  CHECK(a.total() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(b.total() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(a.stats.final_level >= a.stats.initial_level);
  CHECK(a.stats.sweeps >= 1);
  for (const RowVector& seg : a.z) CHECK(seg.minCoeff() >= 0);
}

TEST_CASE("both variants match the direct truncation on random single-phase chains") {
  std::mt19937_64 rng(7);
  SolverParams params;
  for (int trial = 0; trial < 6; ++trial) {
    ModelConfig cfg = random_chain(rng);
    StationaryDistribution a = solve_new(cfg, params);
    StationaryDistribution b = solve_old(cfg, params);
    CHECK(level_tv(a, b) < 1e-8);

    GeneratorBlocks blocks = build_blocks(cfg, 2 * a.stats.final_level + 4);
    std::vector<RowVector> direct = stationary_direct(blocks);
    StationaryDistribution d;
    d.z = std::move(direct);
    CHECK(level_tv(a, d) < 1e-7);
  }
}

TEST_CASE("bootstrap level grows as the tail cutoff tightens") {
  RunSpec spec = load_config(fixture("degenerate_mms.json"));
  const int coarse = bootstrap_initial_level(spec.model, 1e-4);
  const int fine = bootstrap_initial_level(spec.model, 1e-12);
  CHECK(coarse >= 1);
  CHECK(fine >= coarse);
}

TEST_CASE("stability flips when the load crosses the service capacity") {
  RunSpec spec = load_config(fixture("degenerate_mms.json"));
  StabilityReport base = check_ergodicity(spec.model);
  CHECK(base.stable);
  CHECK(base.margin > 0);

  ModelConfig hot = spec.model;
  apply_parameter(hot, "lambda_n", 4.0);  // above S * mu = 3
  StabilityReport over = check_ergodicity(hot);
  CHECK_FALSE(over.stable);

  // an unstable drift with no catastrophe cannot be solved
  CHECK_THROWS(solve_new(hot, spec.solver));

  // the catastrophe flush keeps the unstable-drift chain solvable
  RunSpec t2 = load_config(fixture("table2_s2.json"));
  StabilityReport drift = check_ergodicity(t2.model);
  CHECK_FALSE(drift.stable);
  StationaryDistribution z = solve_new(t2.model, t2.solver);
  CHECK(z.total() == doctest::Approx(1.0).epsilon(1e-6));
}
