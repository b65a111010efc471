#include "retq/nsga2.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <random>
#include <stdexcept>
#include <tuple>

namespace retq {

ModelConfig apply_decision(const OptProblem& problem, int k, double lambda_e,
                           double mu_e) {
  ModelConfig cfg = problem.base;
  cfg.backup_channels = k;
  const double current = arrival_rate(cfg.arrivals, 2);
  if (current <= 0)
    throw std::invalid_argument("apply_decision: base config has no emergency class");
  cfg.arrivals.classes[2] *= lambda_e / current;
  cfg.arrivals.c0 -= Matrix((cfg.arrivals.classes[2] - problem.base.arrivals.classes[2])
                                .rowwise()
                                .sum()
                                .asDiagonal());
  cfg.service[2] = cfg.service[2].scaled_to_rate(mu_e);
  return cfg;
}

ConstraintValues evaluate_decision(const OptProblem& problem, int k, double lambda_e,
                                   double mu_e) {
  ModelConfig cfg = apply_decision(problem, k, lambda_e, mu_e);
  StationaryDistribution dist = solve_new(cfg, problem.solver);
  MeasureReport m = compute_measures(cfg, dist);
  ConstraintValues c;
  c.p_block_emergency = m.p_block_emergency;
  c.p_block_cat = m.p_block_cat;
  c.p_preempt_emergency = m.p_preempt_emergency;
  c.violation = std::max(0.0, c.p_block_emergency - problem.eps1) +
                std::max(0.0, c.p_block_cat - problem.eps2) +
                std::max(0.0, c.p_preempt_emergency - problem.eps3);
  c.feasible = c.violation == 0.0;
  return c;
}

namespace {

struct Individual {
  int k = 1;
  double lambda_e = 0, mu_e = 0;
  ConstraintValues cv;
  int rank = 0;
  double crowding = 0;
};

using Cache = std::map<std::tuple<int, long long, long long>, ConstraintValues>;

std::tuple<int, long long, long long> cache_key(const Individual& ind) {
  return {ind.k, std::llround(ind.lambda_e * 1e4), std::llround(ind.mu_e * 1e4)};
}

// constraint-domination: feasible beats infeasible, infeasible compare by
// violation, feasible compare by Pareto order on (K, violation)
bool dominates(const Individual& a, const Individual& b) {
  if (a.cv.feasible != b.cv.feasible) return a.cv.feasible;
  if (!a.cv.feasible) return a.cv.violation < b.cv.violation;
  const bool le = a.k <= b.k && a.cv.violation <= b.cv.violation;
  const bool lt = a.k < b.k || a.cv.violation < b.cv.violation;
  return le && lt;
}

// fronts via the S_p / n_p bookkeeping
std::vector<std::vector<int>> sort_fronts(std::vector<Individual>& pop) {
  const int n = static_cast<int>(pop.size());
  std::vector<std::vector<int>> dominated(n);
  std::vector<int> count(n, 0);
  std::vector<std::vector<int>> fronts(1);
  for (int p = 0; p < n; ++p) {
    for (int q = 0; q < n; ++q) {
      if (p == q) continue;
      if (dominates(pop[p], pop[q]))
        dominated[p].push_back(q);
      else if (dominates(pop[q], pop[p]))
        ++count[p];
    }
    if (count[p] == 0) {
      pop[p].rank = 0;
      fronts[0].push_back(p);
    }
  }
  int f = 0;
  while (!fronts[f].empty()) {
    std::vector<int> next;
    for (int p : fronts[f])
      for (int q : dominated[p])
        if (--count[q] == 0) {
          pop[q].rank = f + 1;
          next.push_back(q);
        }
    fronts.push_back(std::move(next));
    ++f;
  }
  fronts.pop_back();
  return fronts;
}

void crowding_distance(std::vector<Individual>& pop, const std::vector<int>& front) {
  for (int p : front) pop[p].crowding = 0;
  const auto inf = std::numeric_limits<double>::infinity();
  for (int obj = 0; obj < 2; ++obj) {
    auto value = [&](int p) {
      return obj == 0 ? static_cast<double>(pop[p].k) : pop[p].cv.violation;
    };
    std::vector<int> order = front;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return value(a) < value(b); });
    pop[order.front()].crowding = inf;
    pop[order.back()].crowding = inf;
    const double span = value(order.back()) - value(order.front());
    if (span <= 0) continue;
    for (size_t q = 1; q + 1 < order.size(); ++q)
      pop[order[q]].crowding += (value(order[q + 1]) - value(order[q - 1])) / span;
  }
}

bool crowded_less(const Individual& a, const Individual& b) {
  return a.rank < b.rank || (a.rank == b.rank && a.crowding > b.crowding);
}

double clamp(double x, double lo, double hi) { return std::min(hi, std::max(lo, x)); }

// simulated binary crossover, eta_c = 15
double sbx(double a, double b, double lo, double hi, std::mt19937_64& rng) {
  const double eta = 15.0;
  const double u = std::uniform_real_distribution<double>(0, 1)(rng);
  const double beta = u <= 0.5 ? std::pow(2 * u, 1.0 / (eta + 1))
                               : std::pow(1.0 / (2 * (1 - u)), 1.0 / (eta + 1));
  const double child = 0.5 * ((1 + beta) * a + (1 - beta) * b);
  return clamp(child, lo, hi);
}

// polynomial mutation, eta_m = 20
double poly_mutate(double x, double lo, double hi, std::mt19937_64& rng) {
  const double eta = 20.0;
  const double u = std::uniform_real_distribution<double>(0, 1)(rng);
  const double span = hi - lo;
  const double d = u < 0.5 ? std::pow(2 * u, 1.0 / (eta + 1)) - 1
                           : 1 - std::pow(2 * (1 - u), 1.0 / (eta + 1));
  return clamp(x + d * span, lo, hi);
}

// The decision variables barely move the orbit tail, so the truncation level
// from one bootstrap on the base config serves every evaluation; solve_new
// still widens on its own if that level turns out too small.
OptProblem pin_initial_level(const OptProblem& problem) {
  OptProblem p = problem;
  if (p.solver.initial_level < 0)
    p.solver.initial_level = bootstrap_initial_level(p.base, p.solver.delta);
  return p;
}

void evaluate_all(const OptProblem& problem, std::vector<Individual>& pop, Cache& cache,
                  int& evaluations) {
  std::vector<std::pair<size_t, std::future<ConstraintValues>>> pending;
  for (size_t q = 0; q < pop.size(); ++q) {
    auto it = cache.find(cache_key(pop[q]));
    if (it != cache.end()) {
      pop[q].cv = it->second;
    } else {
      pending.emplace_back(q, std::async(std::launch::async, [&problem, &pop, q] {
                             return evaluate_decision(problem, pop[q].k,
                                                      pop[q].lambda_e, pop[q].mu_e);
                           }));
    }
  }
  for (auto& [q, fut] : pending) {
    pop[q].cv = fut.get();
    cache.emplace(cache_key(pop[q]), pop[q].cv);
    ++evaluations;
  }
}

}  // namespace

OptResult nsga2(const OptProblem& problem_in, int pop_size, int generations,
                std::uint64_t seed) {
  if (pop_size < 4 || generations < 1)
    throw std::invalid_argument("nsga2: need pop >= 4, generations >= 1");
  OptProblem problem = pin_initial_level(problem_in);
  std::mt19937_64 rng(seed);
  auto rand_lambda = [&] {
    return problem.optimize_lambda
               ? std::uniform_real_distribution<double>(problem.lambda_lo,
                                                        problem.lambda_hi)(rng)
               : problem.fixed_lambda;
  };
  auto rand_k = [&] {
    return std::uniform_int_distribution<int>(problem.k_min, problem.k_max)(rng);
  };
  auto rand_mu = [&] {
    return std::uniform_real_distribution<double>(problem.mu_lo, problem.mu_hi)(rng);
  };

  Cache cache;
  int evaluations = 0;
  std::vector<Individual> pop(pop_size);
  for (Individual& ind : pop) {
    ind.k = rand_k();
    ind.lambda_e = rand_lambda();
    ind.mu_e = rand_mu();
  }
  evaluate_all(problem, pop, cache, evaluations);
  auto fronts = sort_fronts(pop);
  for (const auto& front : fronts) crowding_distance(pop, front);

  for (int gen = 0; gen < generations; ++gen) {
    auto tournament = [&]() -> const Individual& {
      const int a = std::uniform_int_distribution<int>(0, pop_size - 1)(rng);
      const int b = std::uniform_int_distribution<int>(0, pop_size - 1)(rng);
      return crowded_less(pop[a], pop[b]) ? pop[a] : pop[b];
    };
    std::vector<Individual> offspring;
    offspring.reserve(pop_size);
    while (static_cast<int>(offspring.size()) < pop_size) {
      const Individual& p1 = tournament();
      const Individual& p2 = tournament();
      Individual child;
      const double ux = std::uniform_real_distribution<double>(0, 1)(rng);
      child.k = ux < 0.5 ? p1.k : p2.k;
      child.lambda_e = problem.optimize_lambda
                           ? sbx(p1.lambda_e, p2.lambda_e, problem.lambda_lo,
                                 problem.lambda_hi, rng)
                           : problem.fixed_lambda;
      child.mu_e = sbx(p1.mu_e, p2.mu_e, problem.mu_lo, problem.mu_hi, rng);
      // mutation: step K with probability 1/3, perturb the rates
      if (std::uniform_real_distribution<double>(0, 1)(rng) < 1.0 / 3.0) {
        child.k += std::uniform_int_distribution<int>(0, 1)(rng) ? 1 : -1;
        child.k = std::min(problem.k_max, std::max(problem.k_min, child.k));
      }
      if (std::uniform_real_distribution<double>(0, 1)(rng) < 0.5 &&
          problem.optimize_lambda)
        child.lambda_e =
            poly_mutate(child.lambda_e, problem.lambda_lo, problem.lambda_hi, rng);
      if (std::uniform_real_distribution<double>(0, 1)(rng) < 0.5)
        child.mu_e = poly_mutate(child.mu_e, problem.mu_lo, problem.mu_hi, rng);
      offspring.push_back(child);
    }
    evaluate_all(problem, offspring, cache, evaluations);

    // elitist merge and truncation by (rank, crowding)
    std::vector<Individual> merged = pop;
    merged.insert(merged.end(), offspring.begin(), offspring.end());
    auto merged_fronts = sort_fronts(merged);
    for (const auto& front : merged_fronts) crowding_distance(merged, front);
    std::vector<Individual> next;
    next.reserve(pop_size);
    for (const auto& front : merged_fronts) {
      if (static_cast<int>(next.size() + front.size()) <= pop_size) {
        for (int p : front) next.push_back(merged[p]);
      } else {
        std::vector<int> order = front;
        std::sort(order.begin(), order.end(), [&](int a, int b) {
          return merged[a].crowding > merged[b].crowding;
        });
        for (int p : order) {
          if (static_cast<int>(next.size()) == pop_size) break;
          next.push_back(merged[p]);
        }
      }
      if (static_cast<int>(next.size()) == pop_size) break;
    }
    pop = std::move(next);
  }

  OptResult result;
  result.generations = generations;
  result.evaluations = evaluations;
  const Individual* best = nullptr;
  for (const Individual& ind : pop) {
    if (ind.cv.feasible) {
      if (!best || !best->cv.feasible || ind.k < best->k ||
          (ind.k == best->k && ind.cv.violation < best->cv.violation))
        best = &ind;
    } else if (!best || (!best->cv.feasible && ind.cv.violation < best->cv.violation)) {
      best = &ind;
    }
  }
  result.feasible = best->cv.feasible;
  result.k_star = best->k;
  result.lambda_star = best->lambda_e;
  result.mu_star = best->mu_e;
  result.at_optimum = best->cv;
  return result;
}

int verify_minimal_k(const OptProblem& problem_in, int grid) {
  OptProblem problem = pin_initial_level(problem_in);
  for (int k = problem.k_min; k <= problem.k_max; ++k) {
    for (int il = 0; il < (problem.optimize_lambda ? grid : 1); ++il) {
      const double lam =
          problem.optimize_lambda
              ? problem.lambda_lo + (problem.lambda_hi - problem.lambda_lo) *
                                        (grid == 1 ? 0.0 : double(il) / (grid - 1))
              : problem.fixed_lambda;
      for (int im = 0; im < grid; ++im) {
        const double mu = problem.mu_lo + (problem.mu_hi - problem.mu_lo) *
                                              (grid == 1 ? 0.0 : double(im) / (grid - 1));
        if (evaluate_decision(problem, k, lam, mu).feasible) return k;
      }
    }
  }
  return problem.k_max + 1;
}

}  // namespace retq
