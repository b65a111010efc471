#include "retq/measures.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace retq {

namespace {

double row_rate(const Matrix& m, int row) { return m.row(row).sum(); }

}  // namespace

MeasureReport compute_measures(const ModelConfig& cfg, const StationaryDistribution& z) {
  if (z.z.empty()) throw std::invalid_argument("compute_measures: empty distribution");
  const int top = static_cast<int>(z.z.size()) - 1;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double lam_h = arrival_rate(cfg.arrivals, 0);
  const double lam_n = arrival_rate(cfg.arrivals, 1);
  const double lam_e = arrival_rate(cfg.arrivals, 2);
  const Matrix& ch = cfg.arrivals.classes[0];
  const Matrix& cn = cfg.arrivals.classes[1];
  const Matrix& ce = cfg.arrivals.classes[2];
  const Vector retry_exit = cfg.retrial.exits[1];

  MeasureReport rep;
  rep.p_orbit.assign(top + 1, 0.0);
  rep.p_handoff.assign(cfg.channels + 1, 0.0);
  rep.p_new.assign(cfg.channels + 1, 0.0);
  rep.p_emergency.assign(cfg.backup_channels + 1, 0.0);

  // accumulators for the class-weighted arrival functionals
  double drop_normal = 0, drop_cat = 0, block_cat = 0, block_emr = 0;
  double preempt_new = 0, preempt_emr = 0;

  for (int l = 0; l <= top; ++l) {
    LevelIndex index(cfg, l);
    if (index.size() != z.z[l].size())
      throw std::invalid_argument("compute_measures: level size mismatch");
    const RowVector& zl = z.z[l];
    index.for_each([&](std::int64_t idx, const StateDescriptor& s) {
      const double p = zl(idx);
      if (p == 0.0) return;
      rep.p_orbit[l] += p;
      rep.p_handoff[s.k1] += p;
      rep.p_new[s.k2] += p;
      rep.p_emergency[s.i] += p;
      if (s.regime != Regime::Normal) rep.p_repair += p;

      switch (s.regime) {
        case Regime::Normal: {
          const bool full = s.k1 + s.k2 == cfg.channels;
          if (full && s.k2 == 0) drop_normal += p * row_rate(ch, s.v1);
          if (full && s.k2 >= 1) preempt_new += p * row_rate(ch, s.v1);
          if (s.k1 + s.k2 >= 1 || s.level >= 1)
            rep.alpha_f += p * row_rate(cfg.catastrophe.d1, s.v2);
          if (s.level >= 1 && !full) {
            double succ = 0;
            for (size_t h = 0; h < s.ret.size(); ++h)
              succ += s.ret[h] * retry_exit(static_cast<int>(h));
            rep.theta_r_succ += p * succ;
          }
          break;
        }
        case Regime::RepairOnly:
          break;
        case Regime::Backup: {
          const bool full = s.k1 + s.k2 + s.i == cfg.backup_channels;
          if (full) {
            drop_cat += p * row_rate(ch, s.v1);
            block_cat += p * row_rate(cn, s.v1);
            if (s.k1 + s.k2 >= 1)
              preempt_emr += p * row_rate(ce, s.v1);
            else
              block_emr += p * row_rate(ce, s.v1);
          }
          break;
        }
      }
    });
    rep.e_orbit += l * rep.p_orbit[l];
  }

  // geometric bound on the orbit-mean remainder above the truncation level
  if (top >= 1 && rep.p_orbit[top - 1] > 0) {
    const double r = std::min(rep.p_orbit[top] / rep.p_orbit[top - 1], 0.999);
    if (r > 0)
      rep.e_orbit_tail =
          rep.p_orbit[top] * (top * r / (1 - r) + r / ((1 - r) * (1 - r)));
  }

  // A zero numerator means the event cannot occur, reported as probability 0
  // even for a class with no arrivals; NaN is reserved for a genuinely
  // undefined ratio.
  auto ratio = [nan](double num, double rate) {
    if (num == 0.0) return 0.0;
    return rate > 0 ? num / rate : nan;
  };
  rep.p_drop_normal = ratio(drop_normal, lam_h);
  rep.p_drop_cat = ratio(drop_cat, lam_h);
  rep.p_block_cat = ratio(block_cat, lam_n);
  rep.p_block_emergency = ratio(block_emr, lam_e);
  rep.p_preempt_new = ratio(preempt_new, lam_h);
  rep.p_preempt_emergency = ratio(preempt_emr, lam_e);
  return rep;
}

}  // namespace retq
