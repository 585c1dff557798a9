#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <vector>

#include "coshare/message.hpp"

namespace coshare {

struct ActiveFavor {
  OperatorId beneficiary{OperatorId::A};
  FavorDescriptor favor;
  std::uint32_t granted_stage{0};
  std::uint32_t expiry_stage{0};  // first stage at which the favor no longer applies
};

struct LedgerEvent {
  std::uint32_t stage{0};
  OperatorId beneficiary{OperatorId::A};
  std::int64_t units{0};
};

/// Book of favors exchanged between A and B.
///
/// The balance is kept from A's side: positive means A owes B. With a
/// non-zero window only grants from the last `window_stages` stages count
/// toward the balance; with window 0 the whole history counts.
class FavorLedger {
 public:
  explicit FavorLedger(std::uint32_t window_stages = 0, std::size_t history_capacity = 256)
      : window_(window_stages), capacity_(history_capacity) {}

  std::int64_t balance() const { return balance_; }
  /// Debt of `op` toward its opponent (negative = credit).
  std::int64_t debt_of(OperatorId op) const { return op == OperatorId::A ? balance_ : -balance_; }

  const std::vector<ActiveFavor>& active_favors() const { return active_; }
  const std::deque<LedgerEvent>& history() const { return history_; }

  std::int64_t units_granted_by(OperatorId op) const { return units_granted_[index_of(op)]; }
  std::int64_t favors_granted_by(OperatorId op) const { return favors_granted_[index_of(op)]; }

  void record_grant(std::uint32_t stage, OperatorId beneficiary, const FavorDescriptor& favor) {
    const auto units = favor.units();
    balance_ += beneficiary == OperatorId::A ? units : -units;
    units_granted_[index_of(other(beneficiary))] += units;
    favors_granted_[index_of(other(beneficiary))] += 1;
    active_.push_back({beneficiary, favor, stage, stage + favor.duration_stages});
    history_.push_back({stage, beneficiary, units});
    if (window_ == 0 && history_.size() > capacity_) history_.pop_front();
  }

  /// Drops favors whose expiry stage is <= `current_stage` and ages the
  /// balance window. Returns true if any favor was removed, i.e. the
  /// spectrum state has to fall back to the stage's own resolution.
  bool expire(std::uint32_t current_stage) {
    const auto before = active_.size();
    std::erase_if(active_, [&](const ActiveFavor& f) { return f.expiry_stage <= current_stage; });
    if (window_ > 0) {
      while (!history_.empty() && history_.front().stage + window_ <= current_stage) {
        const auto& e = history_.front();
        balance_ -= e.beneficiary == OperatorId::A ? e.units : -e.units;
        history_.pop_front();
      }
    }
    return active_.size() != before;
  }

 private:
  std::uint32_t window_;
  std::size_t capacity_;
  std::int64_t balance_{0};
  std::array<std::int64_t, 2> units_granted_{0, 0};
  std::array<std::int64_t, 2> favors_granted_{0, 0};
  std::vector<ActiveFavor> active_;
  std::deque<LedgerEvent> history_;
};

}  // namespace coshare
