#include "retq/generator.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace retq {

namespace {

// Ways the retrial CSFP vector changes when one orbit call joins. Beyond the
// threshold M the excess calls are phase-less and the tracked vector is
// unchanged.
void orbit_join_variants(const ModelConfig& cfg, int level,
                         const std::vector<int>& ret,
                         std::vector<std::pair<std::vector<int>, double>>& out) {
  out.clear();
  if (level < cfg.orbit_threshold) {
    const RowVector& gamma = cfg.retrial.init;
    for (int h = 0; h < cfg.retrial.order(); ++h) {
      if (gamma(h) <= 0) continue;
      std::vector<int> t = ret;
      t[h] += 1;
      out.emplace_back(std::move(t), gamma(h));
    }
  } else {
    out.emplace_back(ret, 1.0);
  }
}

// Retrial vector after the clock in phase h absorbs and the call leaves the
// orbit (level -> level-1). If phase-less excess calls remain, one of them is
// promoted with a fresh clock.
void orbit_depart_variants(const ModelConfig& cfg, int level, int h,
                           const std::vector<int>& ret,
                           std::vector<std::pair<std::vector<int>, double>>& out) {
  out.clear();
  std::vector<int> base = ret;
  base[h] -= 1;
  if (level > cfg.orbit_threshold) {
    const RowVector& gamma = cfg.retrial.init;
    for (int hh = 0; hh < cfg.retrial.order(); ++hh) {
      if (gamma(hh) <= 0) continue;
      std::vector<int> t = base;
      t[hh] += 1;
      out.emplace_back(std::move(t), gamma(hh));
    }
  } else {
    out.emplace_back(std::move(base), 1.0);
  }
}

struct TransitionBuilder {
  const ModelConfig& cfg;
  const StateDescriptor& src;
  std::vector<Transition>& out;

  void add(StateDescriptor t, double rate) {
    if (rate <= 0.0) return;
    out.push_back({std::move(t), rate});
  }

  StateDescriptor empty_normal(int v1, int v2) const {
    StateDescriptor t;
    t.regime = Regime::Normal;
    t.level = 0;
    t.v1 = v1;
    t.v2 = v2;
    t.svc_h.assign(cfg.service[0].order(), 0);
    t.svc_n.assign(cfg.service[1].order(), 0);
    t.ret.assign(cfg.retrial.order(), 0);
    return t;
  }

  // Disaster landing state: j failed channels (j = busy channels at the
  // disaster epoch), repair clocks freshly initialized.
  void add_flush_targets(int v1, int v2, int failed, double rate) {
    if (failed == 0) {
      add(empty_normal(v1, v2), rate);
      return;
    }
    RowVector weights = fresh_start_weights(failed, cfg.repair.init);
    CsfpSpace space(failed, cfg.repair.order());
    for (std::int64_t r = 0; r < space.size(); ++r) {
      if (weights(r) <= 0) continue;
      StateDescriptor t;
      t.v1 = v1;
      t.v2 = v2;
      t.level = 0;
      t.j = failed;
      t.rep = space.unrank(r);
      if (failed == cfg.channels) {
        t.regime = Regime::Backup;
        t.svc_h.assign(cfg.service[0].order(), 0);
        t.svc_n.assign(cfg.service[1].order(), 0);
        t.svc_e.assign(cfg.service[2].order(), 0);
      } else {
        t.regime = Regime::RepairOnly;
      }
      add(std::move(t), rate * weights(r));
    }
  }

  void hidden_phase_moves() {
    const Matrix& c0 = cfg.arrivals.c0;
    for (int v = 0; v < cfg.mmap_phases(); ++v)
      if (v != src.v1 && c0(src.v1, v) > 0) {
        StateDescriptor t = src;
        t.v1 = v;
        add(std::move(t), c0(src.v1, v));
      }
    const Matrix& d0 = cfg.catastrophe.d0;
    for (int v = 0; v < cfg.cat_phases(); ++v)
      if (v != src.v2 && d0(src.v2, v) > 0) {
        StateDescriptor t = src;
        t.v2 = v;
        add(std::move(t), d0(src.v2, v));
      }
  }

  void lost_arrival(int v1_next, double rate) {
    StateDescriptor t = src;
    t.v1 = v1_next;
    add(std::move(t), rate);
  }

  // Phase drift and completion for one CSFP-tracked PH process.
  template <typename Drift, typename Complete>
  void ph_clocks(const PhaseType& ph, const std::vector<int>& counts, Drift drift,
                 Complete complete) {
    const Vector exit = ph.exit_vector();
    for (int m = 0; m < ph.order(); ++m) {
      if (counts[m] == 0) continue;
      for (int mm = 0; mm < ph.order(); ++mm)
        if (mm != m && ph.subgen(m, mm) > 0) drift(m, mm, counts[m] * ph.subgen(m, mm));
      if (exit(m) > 0) complete(m, counts[m] * exit(m));
    }
  }

  void normal_regime() {
    const int s_ = cfg.channels;
    const int free = s_ - src.k1 - src.k2;
    std::vector<std::pair<std::vector<int>, double>> ret_variants;

    hidden_phase_moves();

    // arrivals
    for (int cls = 0; cls < 3; ++cls) {
      const Matrix& c = cfg.arrivals.classes[cls];
      const PhaseType& svc = cfg.service[cls];
      for (int v = 0; v < cfg.mmap_phases(); ++v) {
        const double rate = c(src.v1, v);
        if (rate <= 0) continue;
        if (cls == static_cast<int>(CallClass::Handoff)) {
          if (free > 0) {
            for (int m = 0; m < svc.order(); ++m) {
              if (svc.init(m) <= 0) continue;
              StateDescriptor t = src;
              t.v1 = v;
              t.k1 += 1;
              t.svc_h[m] += 1;
              add(std::move(t), rate * svc.init(m));
            }
          } else if (src.k2 >= 1) {
            // preemptive repeat priority: a uniformly chosen new call is
            // pushed to the orbit
            orbit_join_variants(cfg, src.level, src.ret, ret_variants);
            for (int mv = 0; mv < cfg.service[1].order(); ++mv) {
              if (src.svc_n[mv] == 0) continue;
              const double wv = static_cast<double>(src.svc_n[mv]) / src.k2;
              for (int m = 0; m < svc.order(); ++m) {
                if (svc.init(m) <= 0) continue;
                for (const auto& [rv, wr] : ret_variants) {
                  StateDescriptor t = src;
                  t.v1 = v;
                  t.level += 1;
                  t.k1 += 1;
                  t.k2 -= 1;
                  t.svc_h[m] += 1;
                  t.svc_n[mv] -= 1;
                  t.ret = rv;
                  add(std::move(t), rate * wv * svc.init(m) * wr);
                }
              }
            }
          } else {
            lost_arrival(v, rate);
          }
        } else if (cls == static_cast<int>(CallClass::New)) {
          if (free > 0) {
            for (int m = 0; m < svc.order(); ++m) {
              if (svc.init(m) <= 0) continue;
              StateDescriptor t = src;
              t.v1 = v;
              t.k2 += 1;
              t.svc_n[m] += 1;
              add(std::move(t), rate * svc.init(m));
            }
          } else {
            orbit_join_variants(cfg, src.level, src.ret, ret_variants);
            for (const auto& [rv, wr] : ret_variants) {
              StateDescriptor t = src;
              t.v1 = v;
              t.level += 1;
              t.ret = rv;
              add(std::move(t), rate * wr);
            }
          }
        } else {
          // emergency calls are served only while the backup channels run
          lost_arrival(v, rate);
        }
      }
    }

    // disaster
    const Matrix& d1 = cfg.catastrophe.d1;
    const int busy = src.k1 + src.k2;
    for (int v = 0; v < cfg.cat_phases(); ++v) {
      const double rate = d1(src.v2, v);
      if (rate <= 0) continue;
      if (busy == 0 && src.level == 0) {
        StateDescriptor t = src;
        t.v2 = v;
        add(std::move(t), rate);
      } else {
        add_flush_targets(src.v1, v, busy, rate);
      }
    }

    // service clocks
    ph_clocks(cfg.service[0], src.svc_h,
              [&](int m, int mm, double rate) {
                StateDescriptor t = src;
                t.svc_h[m] -= 1;
                t.svc_h[mm] += 1;
                add(std::move(t), rate);
              },
              [&](int m, double rate) {
                StateDescriptor t = src;
                t.k1 -= 1;
                t.svc_h[m] -= 1;
                add(std::move(t), rate);
              });
    ph_clocks(cfg.service[1], src.svc_n,
              [&](int m, int mm, double rate) {
                StateDescriptor t = src;
                t.svc_n[m] -= 1;
                t.svc_n[mm] += 1;
                add(std::move(t), rate);
              },
              [&](int m, double rate) {
                StateDescriptor t = src;
                t.k2 -= 1;
                t.svc_n[m] -= 1;
                add(std::move(t), rate);
              });

    // retrial clocks
    const MarkedPhaseType& ret_ph = cfg.retrial;
    const RowVector& gamma = ret_ph.init;
    for (int h = 0; h < ret_ph.order(); ++h) {
      if (src.ret[h] == 0) continue;
      const double n_h = src.ret[h];
      for (int hh = 0; hh < ret_ph.order(); ++hh)
        if (hh != h && ret_ph.subgen(h, hh) > 0) {
          StateDescriptor t = src;
          t.ret[h] -= 1;
          t.ret[hh] += 1;
          add(std::move(t), n_h * ret_ph.subgen(h, hh));
        }
      const double abandon = n_h * ret_ph.exits[0](h);
      if (abandon > 0) {
        orbit_depart_variants(cfg, src.level, h, src.ret, ret_variants);
        for (const auto& [rv, wr] : ret_variants) {
          StateDescriptor t = src;
          t.level -= 1;
          t.ret = rv;
          add(std::move(t), abandon * wr);
        }
      }
      const double retry = n_h * ret_ph.exits[1](h);
      if (retry > 0) {
        if (free > 0) {
          orbit_depart_variants(cfg, src.level, h, src.ret, ret_variants);
          const PhaseType& svc = cfg.service[1];
          for (int m = 0; m < svc.order(); ++m) {
            if (svc.init(m) <= 0) continue;
            for (const auto& [rv, wr] : ret_variants) {
              StateDescriptor t = src;
              t.level -= 1;
              t.k2 += 1;
              t.svc_n[m] += 1;
              t.ret = rv;
              add(std::move(t), retry * svc.init(m) * wr);
            }
          }
        } else {
          // failed attempt: the clock restarts from scratch
          for (int hh = 0; hh < ret_ph.order(); ++hh) {
            if (gamma(hh) <= 0) continue;
            StateDescriptor t = src;
            t.ret[h] -= 1;
            t.ret[hh] += 1;
            add(std::move(t), retry * gamma(hh));
          }
        }
      }
    }
  }

  void repair_only_regime() {
    hidden_phase_moves();
    // every arriving call is lost while channels are down
    for (int cls = 0; cls < 3; ++cls) {
      const Matrix& c = cfg.arrivals.classes[cls];
      for (int v = 0; v < cfg.mmap_phases(); ++v)
        if (c(src.v1, v) > 0) lost_arrival(v, c(src.v1, v));
    }
    const Matrix& d1 = cfg.catastrophe.d1;
    for (int v = 0; v < cfg.cat_phases(); ++v) {
      const double rate = d1(src.v2, v);
      if (rate <= 0) continue;
      if (cfg.catastrophe_restarts_repairs) {
        add_flush_targets(src.v1, v, src.j, rate);
      } else {
        StateDescriptor t = src;
        t.v2 = v;
        add(std::move(t), rate);
      }
    }
    ph_clocks(cfg.repair, src.rep,
              [&](int m, int mm, double rate) {
                StateDescriptor t = src;
                t.rep[m] -= 1;
                t.rep[mm] += 1;
                add(std::move(t), rate);
              },
              [&](int m, double rate) {
                if (src.j == 1) {
                  add(empty_normal(src.v1, src.v2), rate);
                } else {
                  StateDescriptor t = src;
                  t.j -= 1;
                  t.rep[m] -= 1;
                  add(std::move(t), rate);
                }
              });
  }

  void backup_regime() {
    const int kcap = cfg.backup_channels;
    const int free = kcap - src.k1 - src.k2 - src.i;
    hidden_phase_moves();

    for (int cls = 0; cls < 3; ++cls) {
      const Matrix& c = cfg.arrivals.classes[cls];
      const PhaseType& svc = cfg.service[cls];
      for (int v = 0; v < cfg.mmap_phases(); ++v) {
        const double rate = c(src.v1, v);
        if (rate <= 0) continue;
        if (free > 0) {
          for (int m = 0; m < svc.order(); ++m) {
            if (svc.init(m) <= 0) continue;
            StateDescriptor t = src;
            t.v1 = v;
            if (cls == 0) {
              t.k1 += 1;
              t.svc_h[m] += 1;
            } else if (cls == 1) {
              t.k2 += 1;
              t.svc_n[m] += 1;
            } else {
              t.i += 1;
              t.svc_e[m] += 1;
            }
            add(std::move(t), rate * svc.init(m));
          }
        } else if (cls == static_cast<int>(CallClass::Emergency) &&
                   (src.k2 >= 1 || src.k1 >= 1)) {
          // absolute preemptive priority: a new call is displaced first,
          // then a handoff call; the victim is lost (no orbit here)
          const bool victim_new = src.k2 >= 1;
          const std::vector<int>& vic = victim_new ? src.svc_n : src.svc_h;
          const int vic_count = victim_new ? src.k2 : src.k1;
          for (int mv = 0; mv < static_cast<int>(vic.size()); ++mv) {
            if (vic[mv] == 0) continue;
            const double wv = static_cast<double>(vic[mv]) / vic_count;
            for (int m = 0; m < svc.order(); ++m) {
              if (svc.init(m) <= 0) continue;
              StateDescriptor t = src;
              t.v1 = v;
              t.i += 1;
              t.svc_e[m] += 1;
              if (victim_new) {
                t.k2 -= 1;
                t.svc_n[mv] -= 1;
              } else {
                t.k1 -= 1;
                t.svc_h[mv] -= 1;
              }
              add(std::move(t), rate * wv * svc.init(m));
            }
          }
        } else {
          lost_arrival(v, rate);
        }
      }
    }

    const Matrix& d1 = cfg.catastrophe.d1;
    for (int v = 0; v < cfg.cat_phases(); ++v) {
      const double rate = d1(src.v2, v);
      if (rate <= 0) continue;
      if (cfg.catastrophe_restarts_repairs) {
        add_flush_targets(src.v1, v, cfg.channels, rate);
      } else if (src.k1 + src.k2 + src.i > 0) {
        StateDescriptor t = src;
        t.v2 = v;
        t.k1 = t.k2 = t.i = 0;
        std::fill(t.svc_h.begin(), t.svc_h.end(), 0);
        std::fill(t.svc_n.begin(), t.svc_n.end(), 0);
        std::fill(t.svc_e.begin(), t.svc_e.end(), 0);
        add(std::move(t), rate);
      } else {
        StateDescriptor t = src;
        t.v2 = v;
        add(std::move(t), rate);
      }
    }

    for (int cls = 0; cls < 3; ++cls) {
      const std::vector<int>& counts =
          cls == 0 ? src.svc_h : (cls == 1 ? src.svc_n : src.svc_e);
      ph_clocks(cfg.service[cls], counts,
                [&](int m, int mm, double rate) {
                  StateDescriptor t = src;
                  auto& vec = cls == 0 ? t.svc_h : (cls == 1 ? t.svc_n : t.svc_e);
                  vec[m] -= 1;
                  vec[mm] += 1;
                  add(std::move(t), rate);
                },
                [&](int m, double rate) {
                  StateDescriptor t = src;
                  if (cls == 0) {
                    t.k1 -= 1;
                    t.svc_h[m] -= 1;
                  } else if (cls == 1) {
                    t.k2 -= 1;
                    t.svc_n[m] -= 1;
                  } else {
                    t.i -= 1;
                    t.svc_e[m] -= 1;
                  }
                  add(std::move(t), rate);
                });
    }

    // The first repair completion stops the backup channels: every call in
    // backup service is dropped and the system is repair-only until j = 0.
    ph_clocks(cfg.repair, src.rep,
              [&](int m, int mm, double rate) {
                StateDescriptor t = src;
                t.rep[m] -= 1;
                t.rep[mm] += 1;
                add(std::move(t), rate);
              },
              [&](int m, double rate) {
                if (cfg.channels == 1) {
                  add(empty_normal(src.v1, src.v2), rate);
                } else {
                  StateDescriptor t;
                  t.regime = Regime::RepairOnly;
                  t.level = 0;
                  t.v1 = src.v1;
                  t.v2 = src.v2;
                  t.j = cfg.channels - 1;
                  t.rep = src.rep;
                  t.rep[m] -= 1;
                  add(std::move(t), rate);
                }
              });
  }
};

}  // namespace

std::vector<Transition> transitions(const ModelConfig& cfg, const StateDescriptor& s) {
  std::vector<Transition> out;
  TransitionBuilder b{cfg, s, out};
  switch (s.regime) {
    case Regime::Normal: b.normal_regime(); break;
    case Regime::RepairOnly: b.repair_only_regime(); break;
    case Regime::Backup: b.backup_regime(); break;
  }
  return out;
}

double total_exit_rate(const ModelConfig& cfg, const StateDescriptor& s) {
  double total = -cfg.arrivals.c0(s.v1, s.v1) - cfg.catastrophe.d0(s.v2, s.v2);
  auto clocks = [&](const Matrix& subgen, const std::vector<int>& counts) {
    for (size_t m = 0; m < counts.size(); ++m) total -= counts[m] * subgen(m, m);
  };
  if (!s.svc_h.empty()) clocks(cfg.service[0].subgen, s.svc_h);
  if (!s.svc_n.empty()) clocks(cfg.service[1].subgen, s.svc_n);
  if (!s.svc_e.empty()) clocks(cfg.service[2].subgen, s.svc_e);
  if (!s.rep.empty()) clocks(cfg.repair.subgen, s.rep);
  if (!s.ret.empty()) clocks(cfg.retrial.subgen, s.ret);
  return total;
}

namespace {

void assemble_level(const ModelConfig& cfg, int level, const LevelIndex& here,
                    const LevelIndex& below, const LevelIndex& above,
                    const LevelIndex& zero, Matrix& diag, Matrix& up, Matrix& down,
                    Matrix& to_zero) {
  const std::int64_t n = here.size();
  diag = Matrix::Zero(n, n);
  up = Matrix::Zero(n, above.size());
  down = level >= 1 ? Matrix::Zero(n, below.size()) : Matrix();
  to_zero = level >= 2 ? Matrix::Zero(n, zero.size()) : Matrix();

  here.for_each([&](std::int64_t row, const StateDescriptor& s) {
    diag(row, row) -= total_exit_rate(cfg, s);
    for (const Transition& tr : transitions(cfg, s)) {
      const int tl = tr.to.level;
      if (tl == level) {
        diag(row, here.index_of(tr.to)) += tr.rate;
      } else if (tl == level + 1) {
        up(row, above.index_of(tr.to)) += tr.rate;
      } else if (tl == level - 1) {
        down(row, below.index_of(tr.to)) += tr.rate;
      } else if (tl == 0 && level >= 2) {
        to_zero(row, zero.index_of(tr.to)) += tr.rate;
      } else {
        throw std::logic_error("assemble_level: transition skips levels from " +
                               s.to_string());
      }
    }
    double rowsum = diag.row(row).sum() + up.row(row).sum();
    if (level >= 1) rowsum += down.row(row).sum();
    if (level >= 2) rowsum += to_zero.row(row).sum();
    if (std::abs(rowsum) > 1e-10)
      throw std::runtime_error("generator row sum violation (" +
                               std::to_string(rowsum) + ") at state " + s.to_string());
  });
}

}  // namespace

GeneratorBlocks build_blocks(const ModelConfig& cfg, int max_level) {
  if (max_level < cfg.orbit_threshold + 1)
    throw std::invalid_argument("build_blocks: max_level must be >= M + 1");
  GeneratorBlocks blocks;
  blocks.cfg = cfg;
  blocks.max_level = -1;
  blocks.index.reserve(max_level + 2);
  blocks.extend(max_level);
  return blocks;
}

void GeneratorBlocks::extend(int new_max_level) {
  if (new_max_level <= max_level) return;
  while (static_cast<int>(index.size()) <= new_max_level + 1)
    index.emplace_back(cfg, static_cast<int>(index.size()));
  diag.resize(new_max_level + 1);
  up.resize(new_max_level + 1);
  down.resize(new_max_level + 1);
  to_zero.resize(new_max_level + 1);
  const int tail = cfg.orbit_threshold + 1;
  for (int l = max_level + 1; l <= new_max_level; ++l) {
    if (l > tail + 1) {
      // blocks are level-independent beyond the orbit threshold
      diag[l] = diag[tail + 1];
      up[l] = up[tail + 1];
      down[l] = down[tail + 1];
      to_zero[l] = to_zero[tail + 1];
      continue;
    }
    assemble_level(cfg, l, index[l], l >= 1 ? index[l - 1] : index[0], index[l + 1],
                   index[0], diag[l], up[l], down[l], to_zero[l]);
  }
  max_level = new_max_level;
}

Matrix GeneratorBlocks::first_column(int level) const {
  if (level < 1 || level > max_level)
    throw std::invalid_argument("first_column: level out of range");
  if (level == 1) return down[1];
  return to_zero[level];
}

Eigen::SparseMatrix<double> truncate_direct(const GeneratorBlocks& blocks) {
  std::vector<std::int64_t> offset(blocks.max_level + 1);
  std::int64_t total = 0;
  for (int l = 0; l <= blocks.max_level; ++l) {
    offset[l] = total;
    total += blocks.index[l].size();
  }
  std::vector<Eigen::Triplet<double>> trips;
  auto put = [&](const Matrix& m, std::int64_t ro, std::int64_t co) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        if (m(r, c) != 0.0) trips.emplace_back(ro + r, co + c, m(r, c));
  };
  for (int l = 0; l <= blocks.max_level; ++l) {
    Matrix d = blocks.diag[l];
    if (l == blocks.max_level) {
      // absorb the up-block so the truncation stays a generator
      d += Matrix(blocks.up[l].rowwise().sum().asDiagonal());
    } else {
      put(blocks.up[l], offset[l], offset[l + 1]);
    }
    put(d, offset[l], offset[l]);
    if (l >= 1) put(blocks.down[l], offset[l], offset[l - 1]);
    if (l >= 2) put(blocks.to_zero[l], offset[l], offset[0]);
  }
  Eigen::SparseMatrix<double> q(total, total);
  q.setFromTriplets(trips.begin(), trips.end());
  return q;
}

std::vector<RowVector> stationary_direct(const GeneratorBlocks& blocks) {
  Eigen::SparseMatrix<double> q = truncate_direct(blocks);
  const std::int64_t n = q.rows();
  const std::int64_t n0 = blocks.index[0].size();
  // Permute the level-0 block to the end: the flush transitions make its
  // balance equations dense, and eliminating those rows last keeps the LU
  // fill-in linear in the truncation level.
  auto perm = [&](std::int64_t s) { return s < n0 ? n - n0 + s : s - n0; };
  // Pin z(state 0) = 1 and drop its (redundant) balance equation; this keeps
  // the system sparse, unlike appending a dense normalization row.
  const std::int64_t pinned = perm(0);
  std::vector<Eigen::Triplet<double>> trips;
  Vector rhs = Vector::Zero(n - 1);
  auto reduced = [&](std::int64_t s) { return s < pinned ? s : s - 1; };
  for (int k = 0; k < q.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(q, k); it; ++it) {
      const std::int64_t r = perm(it.col()), c = perm(it.row());  // transposed
      if (r == pinned) continue;
      if (c == pinned)
        rhs(reduced(r)) = -it.value();
      else
        trips.emplace_back(reduced(r), reduced(c), it.value());
    }
  Eigen::SparseMatrix<double> sys(n - 1, n - 1);
  sys.setFromTriplets(trips.begin(), trips.end());
  sys.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(sys);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("stationary_direct: sparse factorization failed");
  Vector zr = lu.solve(rhs);
  Vector z(n);
  for (std::int64_t s = 0; s < n; ++s) {
    const std::int64_t p = perm(s);
    z(s) = p == pinned ? 1.0 : zr(reduced(p));
  }
  z = z.cwiseMax(0.0);
  z /= z.sum();
  std::vector<RowVector> segments;
  std::int64_t pos = 0;
  for (int l = 0; l <= blocks.max_level; ++l) {
    segments.push_back(z.segment(pos, blocks.index[l].size()).transpose());
    pos += blocks.index[l].size();
  }
  return segments;
}

void dump_blocks(const GeneratorBlocks& blocks, std::ostream& os) {
  os << "# level_from level_to row col rate\n";
  auto put = [&os](const Matrix& m, int lf, int lt) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        if (m(r, c) != 0.0)
          os << lf << ' ' << lt << ' ' << r << ' ' << c << ' ' << m(r, c) << '\n';
  };
  for (int l = 0; l <= blocks.max_level; ++l) {
    put(blocks.diag[l], l, l);
    if (l < blocks.max_level) put(blocks.up[l], l, l + 1);
    if (l >= 1) put(blocks.down[l], l, l - 1);
    if (l >= 2) put(blocks.to_zero[l], l, 0);
  }
}

}  // namespace retq
