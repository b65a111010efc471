#pragma once

#include <cstdint>
#include <vector>

#include "retq/types.hpp"

namespace retq {

// T_n^m = (n+m-1)! / (n! (m-1)!): number of ways to distribute n
// indistinguishable servers over m phases. Throws on overflow.
std::int64_t multiset_count(int n, int m);

// The count-server-for-phase state space for n servers over m phases:
// nonnegative integer vectors of length m summing to n, ranked in
// reverse-lexicographic order (rank 0 is (n,0,...,0), the last rank is
// (0,...,0,n)). rank/unrank form a bijection onto {0,...,T_n^m - 1}.
class CsfpSpace {
 public:
  CsfpSpace(int total, int phases);

  int total() const { return total_; }
  int phases() const { return phases_; }
  std::int64_t size() const;

  std::int64_t rank(const std::vector<int>& counts) const;
  std::vector<int> unrank(std::int64_t r) const;

  template <typename Fn>
  void for_each(Fn&& fn) const {
    std::vector<int> counts(phases_, 0);
    counts[0] = total_;
    const std::int64_t n = size();
    for (std::int64_t r = 0; r < n; ++r) fn(r, unrank(r));
  }

 private:
  int total_;
  int phases_;
};

// Triplet-form rate matrix produced by the combinatorial operators.
struct SparseRateMatrix {
  struct Entry {
    std::int64_t row, col;
    double value;
  };
  std::int64_t rows = 0, cols = 0;
  std::vector<Entry> entries;

  SparseRateMatrix() = default;
  SparseRateMatrix(std::int64_t r, std::int64_t c) : rows(r), cols(c) {}
  void add(std::int64_t r, std::int64_t c, double v) { entries.push_back({r, c, v}); }
  Matrix dense() const;
};

// P_n(beta): starting one more process when n are running. Maps T_n^M to
// T_{n+1}^M; row for count vector s has entry beta_m at rank(s + e_m).
// Rows are stochastic.
SparseRateMatrix begin_service(int n, const RowVector& beta);

// A_n(., A): phase transitions that do not complete any of the n running
// processes. Entry s -> s - e_m + e_m' has rate counts_m * A[m,m'];
// the diagonal is sum_m counts_m * A[m,m].
SparseRateMatrix phase_drift(int n, const Matrix& subgen);

// L_n(., exit): completion of one of the n running processes. Maps T_n^M to
// T_{n-1}^M; entry s -> s - e_m has rate counts_m * exit_m. Requires n >= 1.
SparseRateMatrix complete_service(int n, const Vector& exit);

// Multinomial initialization weights: probability that starting j fresh
// processes with initial vector alpha lands on count vector s, for every s
// in T_j^M order. Equals the product P_0(alpha) P_1(alpha) ... P_{j-1}(alpha).
RowVector fresh_start_weights(int j, const RowVector& alpha);

}  // namespace retq
