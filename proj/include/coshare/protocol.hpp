#pragma once

// Decision rules of the coordination protocol: minimum-rule resolution of
// the one-shot proposals and the single ask/grant favor round.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "coshare/ledger.hpp"
#include "coshare/message.hpp"
#include "coshare/ran.hpp"

namespace coshare {

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Decision { Grant, Deny };

struct MinimumRuleResult {
  std::size_t share_count{0};
  SpectrumOutcome outcome;
};

/// The least amount of sharing proposed wins.
inline MinimumRuleResult resolve_minimum_rule(const CarrierPlan& plan, std::size_t proposal_a,
                                              std::size_t proposal_b) {
  const auto budget = plan.contributed_by(OperatorId::A).size();
  if (proposal_a > budget)
    throw ProtocolError("minimum rule: proposal of A exceeds its contributed carriers");
  if (proposal_b > plan.contributed_by(OperatorId::B).size())
    throw ProtocolError("minimum rule: proposal of B exceeds its contributed carriers");
  const auto shared = std::min(proposal_a, proposal_b);
  return {shared, relabeled(plan, shared_outcome(plan, shared))};
}

/// Throws ProtocolError unless `asker` may ask `favor` on top of `base`.
inline void validate_favor(const CarrierPlan& plan, const SpectrumOutcome& base, OperatorId asker,
                           const FavorDescriptor& favor) {
  if (favor.ccs.empty()) throw ProtocolError("favor: empty carrier set");
  if (favor.duration_stages == 0) throw ProtocolError("favor: duration must be >= 1 stage");
  if (!favor.ccs.subset_of(plan.pool()))
    throw ProtocolError("favor: carrier set reaches outside the shared pool");
  for (auto cc : favor.ccs.indices()) {
    if (favor.type == FavorType::ExclusiveUse && base.exclusive(cc) == asker)
      throw ProtocolError("favor: carrier " + std::to_string(cc) +
                          " is already exclusive to the asker");
    if (favor.type == FavorType::JointUse && base.usable_by(asker).contains(cc))
      throw ProtocolError("favor: carrier " + std::to_string(cc) + " is already usable by the asker");
  }
}

inline SpectrumOutcome apply_favor(const CarrierPlan& plan, const SpectrumOutcome& base,
                                   OperatorId beneficiary, const FavorDescriptor& favor) {
  auto o = favor.type == FavorType::ExclusiveUse ? with_exclusive_use(base, beneficiary, favor.ccs)
                                                 : with_joint_use(base, beneficiary, favor.ccs);
  return relabeled(plan, std::move(o));
}

/// Exclusive-use favors `asker` could ask on top of `base`: all pooled
/// carriers not already exclusive to it, optionally followed by each of
/// those carriers alone. Ordered by ascending lowest carrier index after
/// the full set.
inline std::vector<FavorDescriptor> candidate_favors(const CarrierPlan& plan,
                                                     const SpectrumOutcome& base,
                                                     OperatorId asker, bool single_cc_variants,
                                                     std::uint16_t duration = 1) {
  CcSet open;
  for (auto cc : plan.pool().indices())
    if (base.exclusive(cc) != asker) open.insert(cc);
  std::vector<FavorDescriptor> out;
  if (open.empty()) return out;
  out.push_back({FavorType::ExclusiveUse, open, duration});
  if (single_cc_variants && open.size() > 1)
    for (auto cc : open.indices()) out.push_back({FavorType::ExclusiveUse, CcSet{cc}, duration});
  return out;
}

struct FavorRoundResult {
  SpectrumOutcome outcome;
  bool both_asked{false};
  std::optional<OperatorId> beneficiary;
  std::optional<FavorDescriptor> granted;
};

/// One ask/grant round. `reply_a` is A's answer to B's ask and vice versa;
/// a reply without a matching ask is a protocol violation. When both ask in
/// the same stage nothing happens.
inline FavorRoundResult resolve_favor_round(std::uint32_t stage, const CarrierPlan& plan,
                                            const SpectrumOutcome& base,
                                            const std::optional<FavorDescriptor>& ask_a,
                                            const std::optional<FavorDescriptor>& ask_b,
                                            std::optional<Decision> reply_a,
                                            std::optional<Decision> reply_b, FavorLedger& ledger) {
  if (ask_a) validate_favor(plan, base, OperatorId::A, *ask_a);
  if (ask_b) validate_favor(plan, base, OperatorId::B, *ask_b);
  FavorRoundResult r{base, false, std::nullopt, std::nullopt};
  if (ask_a && ask_b) {
    if (reply_a || reply_b) throw ProtocolError("favor round: reply sent although both asked");
    r.both_asked = true;
    return r;
  }
  if (reply_a && !ask_b) throw ProtocolError("favor round: A replied without an ask from B");
  if (reply_b && !ask_a) throw ProtocolError("favor round: B replied without an ask from A");
  if (!ask_a && !ask_b) return r;

  const OperatorId asker = ask_a ? OperatorId::A : OperatorId::B;
  const auto& favor = ask_a ? *ask_a : *ask_b;
  const auto reply = ask_a ? reply_b : reply_a;
  if (!reply) throw ProtocolError("favor round: ask left unanswered");
  if (*reply == Decision::Grant) {
    r.outcome = apply_favor(plan, base, asker, favor);
    r.beneficiary = asker;
    r.granted = favor;
    ledger.record_grant(stage, asker, favor);
  }
  return r;
}

/// Removes favors that are due at `current_stage`; true if the spectrum
/// state must revert to the stage's own resolution.
inline bool expire_favors(FavorLedger& ledger, std::uint32_t current_stage) {
  return ledger.expire(current_stage);
}

/// Favors granted in earlier stages that are still running.
inline SpectrumOutcome apply_active_favors(const CarrierPlan& plan, SpectrumOutcome base,
                                           const FavorLedger& ledger) {
  for (const auto& f : ledger.active_favors()) base = apply_favor(plan, base, f.beneficiary, f.favor);
  return base;
}

}  // namespace coshare
