#include "retq/solver.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "retq/ergodicity.hpp"

namespace retq {

double StationaryDistribution::total() const {
  double t = 0;
  for (const RowVector& v : z) t += v.sum();
  return t;
}

namespace {

double mat_norm(const Matrix& m) { return m.cwiseAbs().rowwise().sum().maxCoeff(); }

// Rate-matched all-exponential analogue: every PH replaced by an exponential
// with its fundamental rate, every MAP by a Poisson stream with its rate.
ModelConfig exponential_analogue(const ModelConfig& cfg) {
  ModelConfig a;
  a.channels = cfg.channels;
  a.backup_channels = cfg.backup_channels;
  a.orbit_threshold = cfg.orbit_threshold;
  a.catastrophe_restarts_repairs = cfg.catastrophe_restarts_repairs;

  const double lh = arrival_rate(cfg.arrivals, 0);
  const double ln = arrival_rate(cfg.arrivals, 1);
  const double le = arrival_rate(cfg.arrivals, 2);
  a.arrivals.c0 = Matrix::Constant(1, 1, -(lh + ln + le));
  a.arrivals.classes = {Matrix::Constant(1, 1, lh), Matrix::Constant(1, 1, ln),
                        Matrix::Constant(1, 1, le)};
  a.catastrophe = Map2::poisson(total_event_rate(cfg.catastrophe));
  for (int c = 0; c < 3; ++c) a.service[c] = PhaseType::exponential(cfg.service[c].rate());
  a.repair = PhaseType::exponential(cfg.repair.rate());
  const double theta = cfg.retrial.rate();
  const double p_ab = cfg.retrial.splitting_probability(0);
  a.retrial = MarkedPhaseType(RowVector::Ones(1), Matrix::Constant(1, 1, -theta),
                              {Vector::Constant(1, p_ab * theta),
                               Vector::Constant(1, (1.0 - p_ab) * theta)});
  return a;
}

struct BackwardPass {
  std::vector<Matrix> g;  // converged route, G_j maps level j+1 to j
  std::vector<Matrix> w;  // pivot Q_{j,j} + Q_{j,j+1} G_j, j = 1..kappa
  int agree_level = -1;   // highest i with the two routes within eps_g on 0..i
};

BackwardPass backward_dual(const GeneratorBlocks& blocks, int kappa, double eps_g,
                           int& g_evaluations) {
  BackwardPass out;
  const std::int64_t top = blocks.index[kappa].size();
  if (blocks.index[kappa + 1].size() != top)
    throw std::logic_error("backward_dual: start level is not in the repeating tail");
  std::vector<Matrix> g1(kappa + 1), g2(kappa + 1), w1(kappa + 1);
  g1[kappa] = Matrix::Zero(top, top);
  g2[kappa] = Matrix::Identity(top, top);
  std::vector<double> diff(kappa, 0.0);
  for (int j = kappa; j >= 1; --j) {
    Matrix piv1 = blocks.diag[j] + blocks.up[j] * g1[j];
    Matrix piv2 = blocks.diag[j] + blocks.up[j] * g2[j];
    g1[j - 1] = piv1.partialPivLu().solve(-blocks.down[j]);
    g2[j - 1] = piv2.partialPivLu().solve(-blocks.down[j]);
    g_evaluations += 2;
    w1[j] = std::move(piv1);
    diff[j - 1] = mat_norm(g1[j - 1] - g2[j - 1]);
  }
  int agree = -1;
  while (agree + 1 < kappa && diff[agree + 1] <= eps_g) ++agree;
  out.g = std::move(g1);
  out.w = std::move(w1);
  out.agree_level = agree;
  return out;
}

struct ForwardPass {
  std::vector<RowVector> z;  // normalized over levels 0..istar
  int istar = -1;
  double tail_bound = 0.0;
};

// Accumulates the catastrophe first column into B and runs the level
// recursion z(i) = z(i-1) R_{i-1}; stops at the first level with
// max-entry below eps_f.
bool forward_sweep(const GeneratorBlocks& blocks, const std::vector<Matrix>& w,
                   int kappa, double eps_f, ForwardPass& out) {
  std::vector<Matrix> r(kappa);  // R_j maps level j to j+1
  for (int j = 0; j < kappa; ++j)
    r[j] = w[j + 1].transpose().partialPivLu().solve(-blocks.up[j].transpose()).transpose();

  Matrix b = blocks.first_column(kappa);
  for (int i = kappa - 1; i >= 1; --i) b = blocks.first_column(i) + r[i] * b;
  b = blocks.diag[0] + r[0] * b;

  // z(0) b = 0 with the last balance equation replaced by normalization
  const Eigen::Index n0 = b.rows();
  Matrix sys = b;
  sys.col(n0 - 1).setOnes();
  Vector rhs = Vector::Zero(n0);
  rhs(n0 - 1) = 1.0;
  Eigen::FullPivLU<Matrix> lu(sys.transpose());
  if (!lu.isInvertible())
    throw std::runtime_error("forward_sweep: boundary matrix null space is degenerate");
  RowVector z0 = lu.solve(rhs).transpose();

  std::vector<RowVector> z(kappa + 1);
  z[0] = z0;
  double mass = z0.sum();
  for (int i = 1; i <= kappa; ++i) {
    z[i] = z[i - 1] * r[i - 1];
    mass += z[i].sum();
  }
  int istar = -1;
  for (int i = 1; i <= kappa; ++i)
    if (z[i].cwiseAbs().maxCoeff() / mass < eps_f) {
      istar = i;
      break;
    }
  if (istar < 0) return false;

  double kept = 0;
  for (int i = 0; i <= istar; ++i) kept += z[i].sum();
  out.z.assign(z.begin(), z.begin() + istar + 1);
  for (RowVector& v : out.z) v = (v / kept).cwiseMax(0.0);
  out.istar = istar;
  const double rr = mat_norm(r[kappa - 1]);
  out.tail_bound = rr < 1.0 ? out.z[istar].sum() * rr / (1.0 - rr)
                            : std::numeric_limits<double>::quiet_NaN();
  return true;
}

StationaryDistribution run(const ModelConfig& cfg, const SolverParams& params,
                           bool new_algorithm) {
  const auto t0 = std::chrono::steady_clock::now();
  cfg.validate();
  // A positive disaster rate flushes the orbit to zero and keeps the chain
  // positive recurrent even when the normal-scenario drift test fails.
  StabilityReport stab = check_ergodicity(cfg);
  if (!stab.stable && total_event_rate(cfg.catastrophe) <= 0) {
    std::ostringstream os;
    os << "solver: configuration not ergodic (margin " << stab.margin << ")";
    throw std::runtime_error(os.str());
  }

  int i0 = params.initial_level >= 0 ? params.initial_level
                                     : bootstrap_initial_level(cfg, params.delta);
  int s = std::max(1, params.s_multiplier * i0);
  const int floor_level = cfg.orbit_threshold + 1;

  StationaryDistribution result;
  result.stats.initial_level = i0;
  GeneratorBlocks blocks = build_blocks(cfg, floor_level + 1);
  for (int iter = 1; iter <= params.max_iterations; ++iter) {
    const int kappa = std::max(i0 - 1 + s, floor_level);
    blocks.extend(kappa + 1);
    result.stats.sweeps = iter;
    result.stats.interval = s;

    BackwardPass bw =
        backward_dual(blocks, kappa, params.eps_g, result.stats.g_evaluations);
    bool ok = false;
    ForwardPass fw;
    if (bw.agree_level >= 0) {
      ok = forward_sweep(blocks, bw.w, kappa, params.eps_f, fw) &&
           fw.istar <= bw.agree_level + 1;
    }
    if (ok) {
      result.z = std::move(fw.z);
      result.stats.final_level = fw.istar;
      result.stats.tail_mass_bound = fw.tail_bound;
      result.stats.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      return result;
    }
    if (new_algorithm) {
      // keep the explored interval as the new starting point and widen
      i0 = kappa + 1;
      s *= 2;
    } else {
      // the interval is discarded and the search restarts further out
      i0 = kappa + s;
    }
  }
  throw std::runtime_error("solver: no convergence within max_iterations (last i0 " +
                           std::to_string(i0) + ", s " + std::to_string(s) + ")");
}

}  // namespace

int bootstrap_initial_level(const ModelConfig& cfg, double delta) {
  if (delta <= 0) throw std::invalid_argument("bootstrap_initial_level: delta > 0");
  ModelConfig analogue = exponential_analogue(cfg);
  StabilityReport stab = check_ergodicity(analogue);
  if (!stab.stable && total_event_rate(analogue.catastrophe) <= 0) {
    std::ostringstream os;
    os << "bootstrap_initial_level: exponential analogue unstable (margin "
       << stab.margin << ")";
    throw std::runtime_error(os.str());
  }
  int max_level = std::max(16, analogue.orbit_threshold + 2);
  for (;;) {
    GeneratorBlocks blocks = build_blocks(analogue, max_level);
    std::vector<RowVector> z = stationary_direct(blocks);
    if (z.back().cwiseAbs().maxCoeff() < delta || delta >= 1.0) {
      for (int l = 0; l <= max_level; ++l)
        if (z[l].cwiseAbs().maxCoeff() < delta) return l;
      return max_level;
    }
    if (max_level > 65536)
      throw std::runtime_error("bootstrap_initial_level: analogue tail does not decay");
    max_level *= 2;
  }
}

StationaryDistribution solve_new(const ModelConfig& cfg, const SolverParams& params) {
  return run(cfg, params, true);
}

StationaryDistribution solve_old(const ModelConfig& cfg, const SolverParams& params) {
  return run(cfg, params, false);
}

}  // namespace retq
