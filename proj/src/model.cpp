#include "retq/model.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace retq {

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::Normal: return "normal";
    case Regime::RepairOnly: return "repair-only";
    case Regime::Backup: return "backup";
  }
  return "?";
}

void ModelConfig::validate() const {
  if (channels < 1) throw std::invalid_argument("ModelConfig: channels must be >= 1");
  if (backup_channels < 1 || backup_channels > channels)
    throw std::invalid_argument("ModelConfig: need 0 < K <= S");
  if (orbit_threshold < 1)
    throw std::invalid_argument("ModelConfig: orbit threshold M must be >= 1");
  arrivals.validate();
  if (arrivals.class_count() != 3)
    throw std::invalid_argument("ModelConfig: arrivals must carry 3 classes (H, N, E)");
  catastrophe.validate();
  for (const PhaseType& ph : service) ph.validate();
  repair.validate();
  retrial.validate();
  if (retrial.channels() != 2)
    throw std::invalid_argument(
        "ModelConfig: retrial needs 2 absorption channels (abandon, retry)");
}

std::string StateDescriptor::to_string() const {
  std::ostringstream os;
  os << regime_name(regime) << " l=" << level << " k1=" << k1 << " k2=" << k2
     << " j=" << j << " i=" << i << " v1=" << v1 << " v2=" << v2;
  auto dump = [&os](const char* name, const std::vector<int>& v) {
    if (v.empty()) return;
    os << " " << name << "=(";
    for (size_t q = 0; q < v.size(); ++q) os << (q ? "," : "") << v[q];
    os << ")";
  };
  dump("h", svc_h);
  dump("n", svc_n);
  dump("e", svc_e);
  dump("rep", rep);
  dump("ret", ret);
  return os.str();
}

namespace {

int vec_total(const std::vector<int>& v) {
  return std::accumulate(v.begin(), v.end(), 0);
}

}  // namespace

Regime classify(const StateDescriptor& s, const ModelConfig& cfg) {
  check_consistent(s, cfg);
  return s.regime;
}

void check_consistent(const StateDescriptor& s, const ModelConfig& cfg) {
  auto fail = [&](const char* msg) {
    throw std::invalid_argument(std::string("inconsistent state (") + msg +
                                "): " + s.to_string());
  };
  if (s.level < 0 || s.k1 < 0 || s.k2 < 0 || s.j < 0 || s.i < 0) fail("negative count");
  if (s.v1 < 0 || s.v1 >= cfg.mmap_phases()) fail("mmap phase");
  if (s.v2 < 0 || s.v2 >= cfg.cat_phases()) fail("catastrophe phase");
  switch (s.regime) {
    case Regime::Normal:
      if (s.j != 0 || s.i != 0) fail("normal regime requires j = i = 0");
      if (s.k1 + s.k2 > cfg.channels) fail("too many busy channels");
      if (vec_total(s.svc_h) != s.k1) fail("handoff counts");
      if (vec_total(s.svc_n) != s.k2) fail("new counts");
      if (vec_total(s.ret) != cfg.tracked_clocks(s.level)) fail("retrial counts");
      if (!s.svc_e.empty() || !s.rep.empty()) fail("inactive process tracked");
      break;
    case Regime::RepairOnly:
      if (s.level != 0 || s.k1 != 0 || s.k2 != 0 || s.i != 0) fail("repair-only regime");
      if (s.j < 1 || s.j > cfg.channels - 1) fail("repair count out of range");
      if (vec_total(s.rep) != s.j) fail("repair counts");
      if (!s.svc_h.empty() || !s.svc_n.empty() || !s.svc_e.empty() || !s.ret.empty())
        fail("inactive process tracked");
      break;
    case Regime::Backup:
      if (s.level != 0 || s.j != cfg.channels) fail("backup regime requires l = 0, j = S");
      if (s.k1 + s.k2 + s.i > cfg.backup_channels) fail("too many busy backup channels");
      if (vec_total(s.svc_h) != s.k1) fail("handoff counts");
      if (vec_total(s.svc_n) != s.k2) fail("new counts");
      if (vec_total(s.svc_e) != s.i) fail("emergency counts");
      if (vec_total(s.rep) != cfg.channels) fail("repair counts");
      if (!s.ret.empty()) fail("orbit tracked in backup regime");
      break;
  }
}

LevelIndex::LevelIndex(const ModelConfig& cfg, int level) : level_(level) {
  cfg.validate();
  if (level < 0) throw std::invalid_argument("LevelIndex: negative level");
  s_ = cfg.channels;
  k_ = cfg.backup_channels;
  m_ = cfg.orbit_threshold;
  for (int c = 0; c < 3; ++c) svc_phases_[c] = cfg.service[c].order();
  rep_phases_ = cfg.repair.order();
  ret_phases_ = cfg.retrial.order();
  l1_ = cfg.mmap_phases();
  l2_ = cfg.cat_phases();

  const int tracked = cfg.tracked_clocks(level);
  const std::int64_t tr = multiset_count(tracked, ret_phases_);
  std::int64_t offset = 0;
  auto push = [&](Regime reg, int k1, int k2, int j, int i, std::vector<int> dims) {
    std::int64_t n = 1;
    for (int d : dims) n *= d;
    blocks_.push_back({reg, k1, k2, j, i, offset, std::move(dims)});
    offset += n;
  };

  for (int k1 = 0; k1 <= s_; ++k1)
    for (int k2 = 0; k2 + k1 <= s_; ++k2)
      push(Regime::Normal, k1, k2, 0, 0,
           {l1_, l2_, static_cast<int>(multiset_count(k1, svc_phases_[0])),
            static_cast<int>(multiset_count(k2, svc_phases_[1])),
            static_cast<int>(tr)});
  if (level == 0) {
    for (int j = 1; j <= s_ - 1; ++j)
      push(Regime::RepairOnly, 0, 0, j, 0,
           {l1_, l2_, static_cast<int>(multiset_count(j, rep_phases_))});
    const int trep = static_cast<int>(multiset_count(s_, rep_phases_));
    for (int k1 = 0; k1 <= k_; ++k1)
      for (int k2 = 0; k2 + k1 <= k_; ++k2)
        for (int i = 0; i + k1 + k2 <= k_; ++i)
          push(Regime::Backup, k1, k2, s_, i,
               {l1_, l2_, static_cast<int>(multiset_count(k1, svc_phases_[0])),
                static_cast<int>(multiset_count(k2, svc_phases_[1])),
                static_cast<int>(multiset_count(i, svc_phases_[2])), trep});
  }
  size_ = offset;
}

std::int64_t LevelIndex::normal_offset(int k1, int k2) const {
  for (const Block& b : blocks_)
    if (b.regime == Regime::Normal && b.k1 == k1 && b.k2 == k2) return b.offset;
  throw std::invalid_argument("normal_offset: no such block");
}

std::int64_t LevelIndex::index_of(const StateDescriptor& s) const {
  if (s.level != level_)
    throw std::invalid_argument("LevelIndex::index_of: wrong level");
  const Block* blk = nullptr;
  for (const Block& b : blocks_)
    if (b.regime == s.regime && b.k1 == s.k1 && b.k2 == s.k2 && b.j == s.j &&
        b.i == s.i) {
      blk = &b;
      break;
    }
  if (!blk) throw std::invalid_argument("LevelIndex::index_of: no block for state " +
                                        s.to_string());
  std::vector<std::int64_t> digits{s.v1, s.v2};
  switch (s.regime) {
    case Regime::Normal:
      digits.push_back(CsfpSpace(s.k1, svc_phases_[0]).rank(s.svc_h));
      digits.push_back(CsfpSpace(s.k2, svc_phases_[1]).rank(s.svc_n));
      digits.push_back(CsfpSpace(vec_total(s.ret), ret_phases_).rank(s.ret));
      break;
    case Regime::RepairOnly:
      digits.push_back(CsfpSpace(s.j, rep_phases_).rank(s.rep));
      break;
    case Regime::Backup:
      digits.push_back(CsfpSpace(s.k1, svc_phases_[0]).rank(s.svc_h));
      digits.push_back(CsfpSpace(s.k2, svc_phases_[1]).rank(s.svc_n));
      digits.push_back(CsfpSpace(s.i, svc_phases_[2]).rank(s.svc_e));
      digits.push_back(CsfpSpace(s_, rep_phases_).rank(s.rep));
      break;
  }
  std::int64_t idx = 0;
  for (size_t q = 0; q < digits.size(); ++q) idx = idx * blk->dims[q] + digits[q];
  return blk->offset + idx;
}

const LevelIndex::Block& LevelIndex::block_at(std::int64_t idx) const {
  if (idx < 0 || idx >= size_)
    throw std::invalid_argument("LevelIndex: index out of range");
  // blocks_ is ordered by offset
  size_t lo = 0, hi = blocks_.size();
  while (hi - lo > 1) {
    size_t mid = (lo + hi) / 2;
    if (blocks_[mid].offset <= idx)
      lo = mid;
    else
      hi = mid;
  }
  return blocks_[lo];
}

StateDescriptor LevelIndex::state_at(std::int64_t idx) const {
  const Block& blk = block_at(idx);
  std::int64_t rest = idx - blk.offset;
  std::vector<std::int64_t> digits(blk.dims.size());
  for (size_t q = blk.dims.size(); q-- > 0;) {
    digits[q] = rest % blk.dims[q];
    rest /= blk.dims[q];
  }
  StateDescriptor s;
  s.regime = blk.regime;
  s.level = level_;
  s.k1 = blk.k1;
  s.k2 = blk.k2;
  s.j = blk.j;
  s.i = blk.i;
  s.v1 = static_cast<int>(digits[0]);
  s.v2 = static_cast<int>(digits[1]);
  switch (blk.regime) {
    case Regime::Normal: {
      const int tracked = level_ < m_ ? level_ : m_;
      s.svc_h = CsfpSpace(blk.k1, svc_phases_[0]).unrank(digits[2]);
      s.svc_n = CsfpSpace(blk.k2, svc_phases_[1]).unrank(digits[3]);
      s.ret = CsfpSpace(tracked, ret_phases_).unrank(digits[4]);
      break;
    }
    case Regime::RepairOnly:
      s.rep = CsfpSpace(blk.j, rep_phases_).unrank(digits[2]);
      break;
    case Regime::Backup:
      s.svc_h = CsfpSpace(blk.k1, svc_phases_[0]).unrank(digits[2]);
      s.svc_n = CsfpSpace(blk.k2, svc_phases_[1]).unrank(digits[3]);
      s.svc_e = CsfpSpace(blk.i, svc_phases_[2]).unrank(digits[4]);
      s.rep = CsfpSpace(s_, rep_phases_).unrank(digits[5]);
      break;
  }
  return s;
}

}  // namespace retq
