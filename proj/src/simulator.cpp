#include "retq/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace retq {

namespace {

int sample_row(const RowVector& weights, double total, std::mt19937_64& rng) {
  double u = std::uniform_real_distribution<double>(0.0, total)(rng);
  for (int k = 0; k < weights.size(); ++k) {
    if (weights(k) <= 0) continue;
    u -= weights(k);
    if (u <= 0) return k;
  }
  for (int k = static_cast<int>(weights.size()) - 1; k >= 0; --k)
    if (weights(k) > 0) return k;
  throw std::logic_error("sample_row: empty distribution");
}

int sample_init(const RowVector& init, std::mt19937_64& rng) {
  return sample_row(init, 1.0, rng);
}

std::pair<double, int> absorb(const RowVector& init, const Matrix& subgen,
                              const std::vector<Vector>& exits, std::mt19937_64& rng) {
  const int n = static_cast<int>(init.size());
  int p = sample_init(init, rng);
  double t = 0;
  for (;;) {
    const double total = -subgen(p, p);
    t += std::exponential_distribution<double>(total)(rng);
    double u = std::uniform_real_distribution<double>(0.0, total)(rng);
    int next = -1;
    for (int q = 0; q < n && next < 0; ++q) {
      if (q == p || subgen(p, q) <= 0) continue;
      u -= subgen(p, q);
      if (u <= 0) next = q;
    }
    if (next >= 0) {
      p = next;
      continue;
    }
    for (size_t ch = 0; ch < exits.size(); ++ch) {
      u -= exits[ch](p);
      if (u <= 0) return {t, static_cast<int>(ch)};
    }
    return {t, static_cast<int>(exits.size()) - 1};
  }
}

// quantiles of the t distribution, 97.5%
double t_quantile(int df) {
  static const double table[] = {0,     12.71, 4.303, 3.182, 2.776, 2.571, 2.447,
                                 2.365, 2.306, 2.262, 2.228, 2.201, 2.179, 2.160,
                                 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
                                 2.080, 2.074, 2.069, 2.064, 2.060, 2.056, 2.052,
                                 2.048, 2.045, 2.042};
  if (df < 1) return 0;
  if (df <= 30) return table[df];
  if (df <= 40) return 2.021;
  if (df <= 60) return 2.000;
  return 1.96;
}

struct Tally {
  double time = 0;
  double orbit_time = 0;
  double repair_time = 0;
  std::vector<double> orbit_hist, k1_time, k2_time, i_time;
  std::uint64_t arr_h = 0, arr_n = 0, arr_e = 0;
  std::uint64_t drop_n = 0, drop_c = 0, block_c = 0, block_e = 0;
  std::uint64_t pre_n = 0, pre_e = 0, flush_loss = 0, retry_succ = 0;

  Tally(int hist_cap, int s, int k)
      : orbit_hist(hist_cap + 1, 0.0),
        k1_time(s + 1, 0.0),
        k2_time(s + 1, 0.0),
        i_time(k + 1, 0.0) {}
};

struct World {
  const ModelConfig& cfg;
  std::mt19937_64& rng;
  Regime regime = Regime::Normal;
  int v1 = 0, v2 = 0;
  std::vector<int> svc[3];  // per-call service phases
  std::vector<int> rep;     // per-channel repair phases
  std::vector<int> orbit;   // tracked retrial clock phases
  std::uint64_t untracked = 0;

  World(const ModelConfig& c, std::mt19937_64& r) : cfg(c), rng(r) {
    v1 = sample_init(stationary_phase(cfg.arrivals), rng);
    v2 = sample_init(stationary_phase(Matrix(cfg.catastrophe.d0 + cfg.catastrophe.d1)),
                     rng);
  }

  int busy() const {
    return static_cast<int>(svc[0].size() + svc[1].size() + svc[2].size());
  }
  std::uint64_t orbit_size() const { return orbit.size() + untracked; }

  void orbit_join() {
    if (static_cast<int>(orbit.size()) < cfg.orbit_threshold)
      orbit.push_back(sample_init(cfg.retrial.init, rng));
    else
      ++untracked;
  }
  void orbit_depart(size_t idx) {
    orbit.erase(orbit.begin() + idx);
    if (untracked > 0) {
      --untracked;
      orbit.push_back(sample_init(cfg.retrial.init, rng));
    }
  }
  void fresh_repairs(int count) {
    rep.clear();
    for (int q = 0; q < count; ++q) rep.push_back(sample_init(cfg.repair.init, rng));
  }

  void disaster(Tally& tally) {
    switch (regime) {
      case Regime::Normal: {
        const int b = busy();
        if (b == 0 && orbit_size() == 0) return;
        ++tally.flush_loss;
        orbit.clear();
        untracked = 0;
        svc[0].clear();
        svc[1].clear();
        if (b == 0) return;
        fresh_repairs(b);
        regime = b == cfg.channels ? Regime::Backup : Regime::RepairOnly;
        return;
      }
      case Regime::RepairOnly:
        if (cfg.catastrophe_restarts_repairs) fresh_repairs(static_cast<int>(rep.size()));
        return;
      case Regime::Backup:
        svc[0].clear();
        svc[1].clear();
        svc[2].clear();
        if (cfg.catastrophe_restarts_repairs) fresh_repairs(cfg.channels);
        return;
    }
  }

  void arrival(int cls, Tally& tally) {
    const PhaseType& svc_ph = cfg.service[cls];
    if (cls == 0) ++tally.arr_h;
    if (cls == 1) ++tally.arr_n;
    if (cls == 2) ++tally.arr_e;
    if (regime == Regime::RepairOnly) return;  // every arrival lost
    if (regime == Regime::Normal) {
      const bool full = busy() == cfg.channels;
      if (cls == 0) {
        if (!full) {
          svc[0].push_back(sample_init(svc_ph.init, rng));
        } else if (!svc[1].empty()) {
          ++tally.pre_n;
          const size_t victim = std::uniform_int_distribution<size_t>(
              0, svc[1].size() - 1)(rng);
          svc[1].erase(svc[1].begin() + victim);
          orbit_join();  // the preempted new call retries from scratch
          svc[0].push_back(sample_init(svc_ph.init, rng));
        } else {
          ++tally.drop_n;
        }
      } else if (cls == 1) {
        if (!full)
          svc[1].push_back(sample_init(svc_ph.init, rng));
        else
          orbit_join();
      }
      // emergency calls are lost outside the backup regime
      return;
    }
    // backup regime
    const bool full = busy() == cfg.backup_channels;
    if (!full) {
      svc[cls].push_back(sample_init(svc_ph.init, rng));
      return;
    }
    if (cls == 0) {
      ++tally.drop_c;
    } else if (cls == 1) {
      ++tally.block_c;
    } else {
      const int victim_cls = !svc[1].empty() ? 1 : (!svc[0].empty() ? 0 : -1);
      if (victim_cls < 0) {
        ++tally.block_e;
        return;
      }
      ++tally.pre_e;
      const size_t victim = std::uniform_int_distribution<size_t>(
          0, svc[victim_cls].size() - 1)(rng);
      svc[victim_cls].erase(svc[victim_cls].begin() + victim);
      svc[2].push_back(sample_init(svc_ph.init, rng));
    }
  }

  void repair_done(size_t idx) {
    if (regime == Regime::Backup) {
      svc[0].clear();
      svc[1].clear();
      svc[2].clear();
    }
    rep.erase(rep.begin() + idx);
    regime = rep.empty() ? Regime::Normal : Regime::RepairOnly;
  }

  void accumulate(Tally& tally, double dt) const {
    tally.time += dt;
    const double l = static_cast<double>(orbit_size());
    tally.orbit_time += l * dt;
    const size_t cap = tally.orbit_hist.size() - 1;
    tally.orbit_hist[std::min<size_t>(static_cast<size_t>(l), cap)] += dt;
    if (regime != Regime::Normal) tally.repair_time += dt;
    tally.k1_time[svc[0].size()] += dt;
    tally.k2_time[svc[1].size()] += dt;
    tally.i_time[svc[2].size()] += dt;
  }

  // one Gillespie step; the sojourn time is credited to the pre-event state
  double step(Tally& tally) {
    const Matrix& c0 = cfg.arrivals.c0;
    const Matrix& d0 = cfg.catastrophe.d0;
    const Matrix& d1 = cfg.catastrophe.d1;
    const double r_arr = -c0(v1, v1);
    const double r_cat = -d0(v2, v2);
    double r_svc[3] = {0, 0, 0};
    for (int cls = 0; cls < 3; ++cls)
      for (int p : svc[cls]) r_svc[cls] -= cfg.service[cls].subgen(p, p);
    double r_rep = 0;
    for (int p : rep) r_rep -= cfg.repair.subgen(p, p);
    double r_orb = 0;
    for (int p : orbit) r_orb -= cfg.retrial.subgen(p, p);
    const double total = r_arr + r_cat + r_svc[0] + r_svc[1] + r_svc[2] + r_rep + r_orb;

    const double dt = std::exponential_distribution<double>(total)(rng);
    accumulate(tally, dt);
    double u = std::uniform_real_distribution<double>(0.0, total)(rng);

    if (u < r_arr) {
      for (int v = 0; v < c0.cols(); ++v) {
        if (v == v1 || c0(v1, v) <= 0) continue;
        u -= c0(v1, v);
        if (u < 0) {
          v1 = v;
          return dt;
        }
      }
      for (int cls = 0; cls < 3; ++cls) {
        const Matrix& c = cfg.arrivals.classes[cls];
        for (int v = 0; v < c.cols(); ++v) {
          if (c(v1, v) <= 0) continue;
          u -= c(v1, v);
          if (u < 0) {
            v1 = v;
            arrival(cls, tally);
            return dt;
          }
        }
      }
      throw std::logic_error("simulate: arrival selection overflow");
    }
    u -= r_arr;

    if (u < r_cat) {
      for (int v = 0; v < d0.cols(); ++v) {
        if (v == v2 || d0(v2, v) <= 0) continue;
        u -= d0(v2, v);
        if (u < 0) {
          v2 = v;
          return dt;
        }
      }
      for (int v = 0; v < d1.cols(); ++v) {
        if (d1(v2, v) <= 0) continue;
        u -= d1(v2, v);
        if (u < 0) {
          v2 = v;
          disaster(tally);
          return dt;
        }
      }
      throw std::logic_error("simulate: catastrophe selection overflow");
    }
    u -= r_cat;

    for (int cls = 0; cls < 3; ++cls) {
      if (u >= r_svc[cls]) {
        u -= r_svc[cls];
        continue;
      }
      const Matrix& a = cfg.service[cls].subgen;
      const Vector exit = cfg.service[cls].exit_vector();
      for (size_t idx = 0; idx < svc[cls].size(); ++idx) {
        const int p = svc[cls][idx];
        if (u >= -a(p, p)) {
          u += a(p, p);
          continue;
        }
        for (int q = 0; q < a.cols(); ++q) {
          if (q == p || a(p, q) <= 0) continue;
          u -= a(p, q);
          if (u < 0) {
            svc[cls][idx] = q;
            return dt;
          }
        }
        svc[cls].erase(svc[cls].begin() + idx);  // service completion
        return dt;
      }
      throw std::logic_error("simulate: service selection overflow");
    }

    if (u < r_rep) {
      const Matrix& b = cfg.repair.subgen;
      for (size_t idx = 0; idx < rep.size(); ++idx) {
        const int p = rep[idx];
        if (u >= -b(p, p)) {
          u += b(p, p);
          continue;
        }
        for (int q = 0; q < b.cols(); ++q) {
          if (q == p || b(p, q) <= 0) continue;
          u -= b(p, q);
          if (u < 0) {
            rep[idx] = q;
            return dt;
          }
        }
        repair_done(idx);
        return dt;
      }
      throw std::logic_error("simulate: repair selection overflow");
    }
    u -= r_rep;

    const Matrix& g = cfg.retrial.subgen;
    for (size_t idx = 0; idx < orbit.size(); ++idx) {
      const int p = orbit[idx];
      if (u >= -g(p, p)) {
        u += g(p, p);
        continue;
      }
      for (int q = 0; q < g.cols(); ++q) {
        if (q == p || g(p, q) <= 0) continue;
        u -= g(p, q);
        if (u < 0) {
          orbit[idx] = q;
          return dt;
        }
      }
      u -= cfg.retrial.exits[0](p);
      if (u < 0) {
        orbit_depart(idx);  // abandonment
        return dt;
      }
      // retrial attempt
      if (regime == Regime::Normal && busy() < cfg.channels) {
        ++tally.retry_succ;
        orbit_depart(idx);
        svc[1].push_back(sample_init(cfg.service[1].init, rng));
      } else {
        orbit[idx] = sample_init(cfg.retrial.init, rng);  // failed, restart
      }
      return dt;
    }
    throw std::logic_error("simulate: retrial selection overflow");
  }
};

Estimate reduce(const std::vector<double>& batch_values) {
  std::vector<double> v;
  for (double x : batch_values)
    if (std::isfinite(x)) v.push_back(x);
  Estimate e;
  e.batches = static_cast<int>(v.size());
  if (v.empty()) {
    e.mean = std::numeric_limits<double>::quiet_NaN();
    return e;
  }
  for (double x : v) e.mean += x;
  e.mean /= v.size();
  if (v.size() > 1) {
    double ss = 0;
    for (double x : v) ss += (x - e.mean) * (x - e.mean);
    e.se = std::sqrt(ss / (v.size() - 1) / v.size());
    e.half_width = t_quantile(static_cast<int>(v.size()) - 1) * e.se;
  }
  return e;
}

}  // namespace

std::pair<double, int> sample_ph(const PhaseType& ph, std::mt19937_64& rng) {
  return absorb(ph.init, ph.subgen, {ph.exit_vector()}, rng);
}

std::pair<double, int> sample_ph(const MarkedPhaseType& ph, std::mt19937_64& rng) {
  return absorb(ph.init, ph.subgen, ph.exits, rng);
}

SimEstimate simulate(const SimConfig& sim) {
  sim.model.validate();
  if (sim.replications < 1 || sim.batches < 1 || sim.warmup_fraction < 0 ||
      sim.warmup_fraction >= 1)
    throw std::invalid_argument("simulate: bad SimConfig");
  const int hist_cap = 63;
  const int s = sim.model.channels, k = sim.model.backup_channels;
  std::vector<Tally> batches;
  bool orbit_warning = false;

  for (int repl = 0; repl < sim.replications; ++repl) {
    std::mt19937_64 rng(sim.seed * 0x9E3779B97F4A7C15ULL + 0x100000001B3ULL * repl);
    World world(sim.model, rng);
    const std::uint64_t warmup =
        static_cast<std::uint64_t>(sim.events * sim.warmup_fraction);
    Tally discard(hist_cap, s, k);
    for (std::uint64_t e = 0; e < warmup; ++e) world.step(discard);
    const std::uint64_t per_batch = std::max<std::uint64_t>(1, sim.events / sim.batches);
    for (int b = 0; b < sim.batches; ++b) {
      Tally tally(hist_cap, s, k);
      for (std::uint64_t e = 0; e < per_batch; ++e) {
        world.step(tally);
        if (world.orbit_size() > sim.orbit_warning_bound) orbit_warning = true;
      }
      batches.push_back(std::move(tally));
    }
  }

  auto per_batch_value = [&](auto fn) {
    std::vector<double> vals;
    vals.reserve(batches.size());
    for (const Tally& t : batches) vals.push_back(fn(t));
    return reduce(vals);
  };
  auto ratio = [](std::uint64_t num, std::uint64_t den) {
    return den > 0 ? static_cast<double>(num) / den
                   : std::numeric_limits<double>::quiet_NaN();
  };

  SimEstimate out;
  out.orbit_warning = orbit_warning;
  out.e_orbit = per_batch_value([](const Tally& t) { return t.orbit_time / t.time; });
  out.p_repair = per_batch_value([](const Tally& t) { return t.repair_time / t.time; });
  for (int x = 0; x <= hist_cap; ++x)
    out.p_orbit.push_back(
        per_batch_value([x](const Tally& t) { return t.orbit_hist[x] / t.time; }));
  for (int x = 0; x <= s; ++x) {
    out.p_handoff.push_back(
        per_batch_value([x](const Tally& t) { return t.k1_time[x] / t.time; }));
    out.p_new.push_back(
        per_batch_value([x](const Tally& t) { return t.k2_time[x] / t.time; }));
  }
  for (int x = 0; x <= k; ++x)
    out.p_emergency.push_back(
        per_batch_value([x](const Tally& t) { return t.i_time[x] / t.time; }));
  out.p_drop_normal =
      per_batch_value([&](const Tally& t) { return ratio(t.drop_n, t.arr_h); });
  out.p_drop_cat =
      per_batch_value([&](const Tally& t) { return ratio(t.drop_c, t.arr_h); });
  out.p_block_cat =
      per_batch_value([&](const Tally& t) { return ratio(t.block_c, t.arr_n); });
  out.p_block_emergency =
      per_batch_value([&](const Tally& t) { return ratio(t.block_e, t.arr_e); });
  out.p_preempt_new =
      per_batch_value([&](const Tally& t) { return ratio(t.pre_n, t.arr_h); });
  out.p_preempt_emergency =
      per_batch_value([&](const Tally& t) { return ratio(t.pre_e, t.arr_e); });
  out.alpha_f = per_batch_value([](const Tally& t) { return t.flush_loss / t.time; });
  out.theta_r_succ =
      per_batch_value([](const Tally& t) { return t.retry_succ / t.time; });
  return out;
}

}  // namespace retq
