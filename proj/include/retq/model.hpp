#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "retq/csfp.hpp"
#include "retq/phase_type.hpp"

namespace retq {

enum class CallClass : int { Handoff = 0, New = 1, Emergency = 2 };

enum class Regime { Normal, RepairOnly, Backup };

const char* regime_name(Regime r);

// Full configuration of the multi-server catastrophic retrial model.
//
// Channels: S primary channels; after a catastrophe fails all of them, K
// slow backup channels serve until the first repair completes. The orbit
// tracks per-call retrial clocks up to the threshold M; beyond M the excess
// orbit calls are counted but phase-less.
struct ModelConfig {
  int channels = 1;         // S
  int backup_channels = 1;  // K, 0 < K <= S
  int orbit_threshold = 1;  // M >= 1

  MarkedMap arrivals;  // classes ordered Handoff, New, Emergency
  Map2 catastrophe;
  std::array<PhaseType, 3> service;  // per class
  PhaseType repair;
  MarkedPhaseType retrial;  // exits[0] = abandonment, exits[1] = retrial attempt

  // A disaster while repairs are running restarts the affected repair clocks
  // from the repair initial vector.
  bool catastrophe_restarts_repairs = true;

  const PhaseType& svc(CallClass c) const { return service[static_cast<int>(c)]; }
  const Matrix& class_matrix(CallClass c) const {
    return arrivals.classes[static_cast<int>(c)];
  }

  int mmap_phases() const { return arrivals.order(); }
  int cat_phases() const { return catastrophe.order(); }
  // Tracked retrial clocks at orbit size l.
  int tracked_clocks(int level) const {
    return level < orbit_threshold ? level : orbit_threshold;
  }

  void validate() const;
};

// One state of the chain. CSFP count vectors are kept only for the processes
// active in the regime; inactive vectors are empty.
struct StateDescriptor {
  Regime regime = Regime::Normal;
  int level = 0;  // orbit size l
  int k1 = 0;     // handoff calls in service
  int k2 = 0;     // new calls in service
  int j = 0;      // channels under repair
  int i = 0;      // emergency calls in service
  int v1 = 0;     // MMAP phase
  int v2 = 0;     // catastrophe MAP phase
  std::vector<int> svc_h, svc_n, svc_e, rep, ret;

  bool operator==(const StateDescriptor&) const = default;
  std::string to_string() const;
};

Regime classify(const StateDescriptor& s, const ModelConfig& cfg);
void check_consistent(const StateDescriptor& s, const ModelConfig& cfg);

// Linear indexing of all states at one level. Canonical order: regime
// (normal, repair-only, backup), then (k1, k2) / j / (k1, k2, i) ascending,
// then within a block the mixed-radix index
//   (((v1 * L2 + v2) * TH + rank_h) * TN + rank_n) * ... * TR + rank_r
// with the rightmost factor fastest.
class LevelIndex {
 public:
  LevelIndex(const ModelConfig& cfg, int level);

  int level() const { return level_; }
  std::int64_t size() const { return size_; }

  std::int64_t index_of(const StateDescriptor& s) const;
  StateDescriptor state_at(std::int64_t idx) const;

  // Offset of the normal-regime (k1, k2) block (valid at every level).
  std::int64_t normal_offset(int k1, int k2) const;

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (std::int64_t idx = 0; idx < size_; ++idx) fn(idx, state_at(idx));
  }

 private:
  struct Block {
    Regime regime;
    int k1, k2, j, i;
    std::int64_t offset;
    std::vector<int> dims;  // mixed-radix dimensions, v1 first
  };
  const Block& block_at(std::int64_t idx) const;

  int level_;
  int s_, k_, m_;
  std::array<int, 3> svc_phases_;
  int rep_phases_, ret_phases_, l1_, l2_;
  std::int64_t size_;
  std::vector<Block> blocks_;
};

}  // namespace retq
