#pragma once

#include <cstdint>
#include <map>

namespace wlac {

struct BlockCounts {
  std::uint64_t strong_phase1 = 0;
  std::uint64_t strong_phase2 = 0;
  std::uint64_t weak = 0;
  std::uint64_t unlabeled_phase1 = 0;
  std::uint64_t unlabeled_phase2 = 0;

  std::uint64_t strong() const noexcept { return strong_phase1 + strong_phase2; }
  std::uint64_t unlabeled() const noexcept { return unlabeled_phase1 + unlabeled_phase2; }

  BlockCounts& operator+=(const BlockCounts& o) noexcept;
  bool operator==(const BlockCounts&) const = default;
};

/// Exact per-block accounting of oracle usage. Totals are always derived
/// from the per-block counters, so they cannot drift.
class QueryLedger {
 public:
  BlockCounts& block(int m) { return blocks_[m]; }
  const std::map<int, BlockCounts>& blocks() const noexcept { return blocks_; }
  bool empty() const noexcept { return blocks_.empty(); }

  BlockCounts totals() const;

  /// Throws std::logic_error if a block has more Phase-2 queries than Phase-2 draws.
  void check() const;

  bool operator==(const QueryLedger&) const = default;

 private:
  std::map<int, BlockCounts> blocks_;
};

/// Counter-wise union of ledgers over disjoint block ranges.
/// Throws std::invalid_argument when the block ranges overlap.
QueryLedger ledger_merge(const QueryLedger& a, const QueryLedger& b);

}  // namespace wlac
