#include "wlac/ledger.hpp"

#include <stdexcept>
#include <string>

namespace wlac {

BlockCounts& BlockCounts::operator+=(const BlockCounts& o) noexcept {
  strong_phase1 += o.strong_phase1;
  strong_phase2 += o.strong_phase2;
  weak += o.weak;
  unlabeled_phase1 += o.unlabeled_phase1;
  unlabeled_phase2 += o.unlabeled_phase2;
  return *this;
}

BlockCounts QueryLedger::totals() const {
  BlockCounts t;
  for (const auto& [m, c] : blocks_) t += c;
  return t;
}

void QueryLedger::check() const {
  for (const auto& [m, c] : blocks_) {
    if (c.strong_phase2 > c.unlabeled_phase2) {
      throw std::logic_error("ledger block " + std::to_string(m) +
                             ": more Phase-2 queries than Phase-2 draws");
    }
  }
}

QueryLedger ledger_merge(const QueryLedger& a, const QueryLedger& b) {
  QueryLedger out = a;
  for (const auto& [m, c] : b.blocks()) {
    if (a.blocks().count(m) != 0) {
      throw std::invalid_argument("ledger_merge: block " + std::to_string(m) + " present in both");
    }
    out.block(m) = c;
  }
  return out;
}

}  // namespace wlac
