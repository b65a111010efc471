#include "retq/csfp.hpp"

#include <limits>
#include <stdexcept>

namespace retq {

std::int64_t multiset_count(int n, int m) {
  if (n < 0 || m < 1) throw std::invalid_argument("multiset_count: need n >= 0, m >= 1");
  // C(n+m-1, m-1) with overflow guard
  std::int64_t result = 1;
  for (int k = 1; k <= m - 1; ++k) {
    std::int64_t num = n + k;
    if (result > std::numeric_limits<std::int64_t>::max() / num)
      throw std::overflow_error("multiset_count: result exceeds 64-bit range");
    result = result * num / k;  // exact: product of k consecutive terms divisible by k!
  }
  return result;
}

CsfpSpace::CsfpSpace(int total, int phases) : total_(total), phases_(phases) {
  if (total < 0 || phases < 1)
    throw std::invalid_argument("CsfpSpace: need total >= 0, phases >= 1");
}

std::int64_t CsfpSpace::size() const { return multiset_count(total_, phases_); }

std::int64_t CsfpSpace::rank(const std::vector<int>& counts) const {
  if (static_cast<int>(counts.size()) != phases_)
    throw std::invalid_argument("CsfpSpace::rank: wrong vector length");
  std::int64_t r = 0;
  int remaining = total_;
  for (int pos = 0; pos < phases_ - 1; ++pos) {
    int c = counts[pos];
    if (c < 0 || c > remaining)
      throw std::invalid_argument("CsfpSpace::rank: counts out of range");
    // vectors with a larger entry at this position come first
    for (int larger = c + 1; larger <= remaining; ++larger)
      r += multiset_count(remaining - larger, phases_ - 1 - pos);
    remaining -= c;
  }
  if (counts[phases_ - 1] != remaining)
    throw std::invalid_argument("CsfpSpace::rank: counts do not sum to total");
  return r;
}

std::vector<int> CsfpSpace::unrank(std::int64_t r) const {
  if (r < 0 || r >= size())
    throw std::invalid_argument("CsfpSpace::unrank: rank out of range");
  std::vector<int> counts(phases_, 0);
  int remaining = total_;
  for (int pos = 0; pos < phases_ - 1; ++pos) {
    for (int c = remaining; c >= 0; --c) {
      std::int64_t block = multiset_count(remaining - c, phases_ - 1 - pos);
      if (r < block) {
        counts[pos] = c;
        remaining -= c;
        break;
      }
      r -= block;
    }
  }
  counts[phases_ - 1] = remaining;
  return counts;
}

Matrix SparseRateMatrix::dense() const {
  Matrix m = Matrix::Zero(rows, cols);
  for (const Entry& e : entries) m(e.row, e.col) += e.value;
  return m;
}

SparseRateMatrix begin_service(int n, const RowVector& beta) {
  const int m = static_cast<int>(beta.size());
  CsfpSpace from(n, m), to(n + 1, m);
  SparseRateMatrix out(from.size(), to.size());
  from.for_each([&](std::int64_t r, std::vector<int> counts) {
    for (int p = 0; p < m; ++p) {
      if (beta(p) == 0.0) continue;
      counts[p] += 1;
      out.add(r, to.rank(counts), beta(p));
      counts[p] -= 1;
    }
  });
  return out;
}

SparseRateMatrix phase_drift(int n, const Matrix& subgen) {
  const int m = static_cast<int>(subgen.rows());
  CsfpSpace space(n, m);
  SparseRateMatrix out(space.size(), space.size());
  space.for_each([&](std::int64_t r, std::vector<int> counts) {
    double diag = 0.0;
    for (int p = 0; p < m; ++p) {
      if (counts[p] == 0) continue;
      diag += counts[p] * subgen(p, p);
      for (int q = 0; q < m; ++q) {
        if (q == p || subgen(p, q) == 0.0) continue;
        const double rate = counts[p] * subgen(p, q);
        counts[p] -= 1;
        counts[q] += 1;
        out.add(r, space.rank(counts), rate);
        counts[p] += 1;
        counts[q] -= 1;
      }
    }
    if (diag != 0.0) out.add(r, r, diag);
  });
  return out;
}

SparseRateMatrix complete_service(int n, const Vector& exit) {
  if (n < 1) throw std::invalid_argument("complete_service: requires n >= 1");
  const int m = static_cast<int>(exit.size());
  CsfpSpace from(n, m), to(n - 1, m);
  SparseRateMatrix out(from.size(), to.size());
  from.for_each([&](std::int64_t r, std::vector<int> counts) {
    for (int p = 0; p < m; ++p) {
      if (counts[p] == 0 || exit(p) == 0.0) continue;
      counts[p] -= 1;
      out.add(r, to.rank(counts), (counts[p] + 1) * exit(p));
      counts[p] += 1;
    }
  });
  return out;
}

RowVector fresh_start_weights(int j, const RowVector& alpha) {
  Matrix acc = Matrix::Ones(1, 1);
  for (int step = 0; step < j; ++step)
    acc = acc * begin_service(step, alpha).dense();
  return acc.row(0);
}

}  // namespace retq
