#pragma once

// Operator-side decisions. Everything here works from an OperatorView, which
// carries only what an operator can know or measure about its own network:
// its UEs, its own BSs, and the aggregate interference the opponent causes
// at its UEs (measured on the opponent's reserved carrier, where every
// active opponent BS transmits at the constant per-carrier power).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "coshare/ledger.hpp"
#include "coshare/protocol.hpp"
#include "coshare/ran.hpp"
#include "coshare/stats.hpp"

namespace coshare {

struct ViewUe {
  std::size_t serving{0};               // index into OperatorView::own_bs_power
  std::vector<double> own_rx_mw;        // received power from each own BS
  double opponent_interference_mw{0.0}; // measured aggregate from the opponent
};

struct OperatorView {
  OperatorId self{OperatorId::A};
  CarrierPlan plan;
  double noise_mw{1e-8};
  std::vector<std::size_t> own_bs_load;
  std::vector<ViewUe> ues;

  std::size_t ue_count() const { return ues.size(); }
};

inline OperatorView make_operator_view(OperatorId op, const StageSnapshot& snap) {
  OperatorView v;
  v.self = op;
  v.plan = snap.plan();
  v.noise_mw = snap.noise_mw();
  const auto& bss = snap.base_stations();
  std::vector<std::size_t> own_bs;
  std::vector<std::size_t> local(bss.size(), 0);
  for (std::size_t b = 0; b < bss.size(); ++b)
    if (bss[b].owner == op) {
      local[b] = own_bs.size();
      own_bs.push_back(b);
      v.own_bs_load.push_back(snap.load(b));
    }
  for (auto u : snap.ues_of(op)) {
    ViewUe vu;
    vu.serving = local[snap.serving_bs(u)];
    for (auto b : own_bs) vu.own_rx_mw.push_back(snap.rx_mw(b, u));
    for (std::size_t b = 0; b < bss.size(); ++b)
      if (bss[b].owner != op && snap.active(b)) vu.opponent_interference_mw += snap.rx_mw(b, u);
    v.ues.push_back(std::move(vu));
  }
  return v;
}

/// Own utility under `outcome`, assuming the opponent's active BSs transmit
/// on every carrier the outcome lets the opponent use.
inline Utility estimated_utility(const OperatorView& v, const SpectrumOutcome& outcome) {
  const CcSet mine = outcome.usable_by(v.self);
  const CcSet theirs = outcome.usable_by(other(v.self));
  const double w = v.plan.cc_bandwidth_hz;
  Utility total = 0.0;
  for (const auto& ue : v.ues) {
    double intra = 0.0;
    for (std::size_t b = 0; b < v.own_bs_load.size(); ++b)
      if (b != ue.serving && v.own_bs_load[b] > 0) intra += ue.own_rx_mw[b];
    const double share = 1.0 / static_cast<double>(v.own_bs_load[ue.serving]);
    const double signal = ue.own_rx_mw[ue.serving];
    double rate = 0.0;
    for (auto cc : mine.indices()) {
      if (cc >= v.plan.n_cc) continue;
      const double opp = theirs.contains(cc) ? ue.opponent_interference_mw : 0.0;
      rate += share * w * std::log2(1.0 + signal / (v.noise_mw + intra + opp));
    }
    if (!(rate > 0.0)) return kMinusInfinity;
    total += std::log(rate);
  }
  return total;
}

enum class FavorBases { Any, SharedOnly };

struct StrategyParams {
  double q_gain{0.7};
  double q_loss{0.7};
  std::int64_t credit_limit{4};
  std::size_t warmup_stages{50};
  double balance_gain{0.25};
  // Grant only if the loss is below the mean gain of the asks this operator
  // itself would make, so granted favors are worth returning.
  bool reciprocity_cap{true};
  bool adaptive{true};
  double fixed_theta_g{std::numeric_limits<double>::infinity()};
  double fixed_theta_l{0.0};
  bool single_cc_favors{false};
  std::uint16_t favor_duration{1};
  FavorBases favor_bases{FavorBases::Any};
  // Scripted behaviour for fallback-safety checks.
  std::optional<std::size_t> forced_proposal;
  bool deny_all{false};
};

struct ThresholdPolicy {
  double theta_g{std::numeric_limits<double>::infinity()};
  double theta_l{0.0};
  EmpiricalDistribution gains;
  EmpiricalDistribution losses;
};

/// Share count for the one-shot game: the amount of sharing that maximizes
/// own estimated utility, ties going to less sharing. An operator without
/// UEs offers everything it contributed.
inline std::size_t one_shot_proposal(const OperatorView& v) {
  const auto budget = v.plan.contributed_by(v.self).size();
  if (v.ue_count() == 0) return budget;
  std::size_t best = 0;
  Utility best_u = estimated_utility(v, shared_outcome(v.plan, 0));
  for (std::size_t k = 1; k <= budget; ++k) {
    const Utility u = estimated_utility(v, shared_outcome(v.plan, k));
    if (u > best_u) {
      best = k;
      best_u = u;
    }
  }
  return best;
}

inline std::vector<FavorDescriptor> strategy_candidates(const OperatorView& v,
                                                        const SpectrumOutcome& base,
                                                        OperatorId asker,
                                                        const StrategyParams& p) {
  if (p.favor_bases == FavorBases::SharedOnly && base.label == "O1") return {};
  return candidate_favors(v.plan, base, asker, p.single_cc_favors, p.favor_duration);
}

inline double favor_gain(const OperatorView& v, const SpectrumOutcome& base,
                         const FavorDescriptor& f) {
  return utility_difference(estimated_utility(v, base),
                            estimated_utility(v, apply_favor(v.plan, base, v.self, f)));
}

/// Utility the view's operator gives up if it grants `f` to its opponent.
inline double favor_loss(const OperatorView& v, const SpectrumOutcome& base,
                         const FavorDescriptor& f) {
  return -utility_difference(estimated_utility(v, base),
                             estimated_utility(v, apply_favor(v.plan, base, other(v.self), f)));
}

inline bool within_credit(std::int64_t debt, std::int64_t units, std::int64_t limit) {
  return debt + units <= limit;
}

struct AskDecision {
  std::optional<FavorDescriptor> ask;
  std::optional<double> best_gain;
};

/// Picks the candidate with the largest gain (first wins ties) and asks for
/// it if the gain beats theta_g and the resulting own debt stays within the
/// credit limit. The best gain is recorded either way.
inline AskDecision decide_ask(const OperatorView& v, const SpectrumOutcome& base,
                              const std::vector<FavorDescriptor>& candidates,
                              ThresholdPolicy& policy, const StrategyParams& p,
                              std::int64_t own_debt) {
  AskDecision d;
  if (candidates.empty()) return d;
  std::size_t best = 0;
  double best_gain = favor_gain(v, base, candidates[0]);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double g = favor_gain(v, base, candidates[i]);
    if (g > best_gain) {
      best = i;
      best_gain = g;
    }
  }
  d.best_gain = best_gain;
  policy.gains.add(best_gain);
  if (best_gain > policy.theta_g &&
      within_credit(own_debt, candidates[best].units(), p.credit_limit))
    d.ask = candidates[best];
  return d;
}

struct GrantDecision {
  Decision decision{Decision::Deny};
  double loss{0.0};
};

/// Grants when the loss is below theta_l (a costless favor is always
/// acceptable) and the asker's debt stays within the credit limit.
inline GrantDecision decide_grant(const OperatorView& v, const FavorDescriptor& ask,
                                  const SpectrumOutcome& base, ThresholdPolicy& policy,
                                  const StrategyParams& p, std::int64_t asker_debt) {
  GrantDecision g;
  g.loss = favor_loss(v, base, ask);
  policy.losses.add(g.loss);
  const bool cheap = g.loss < policy.theta_l || g.loss <= 0.0;
  if (!p.deny_all && cheap && within_credit(asker_debt, ask.units(), p.credit_limit))
    g.decision = Decision::Grant;
  return g;
}

/// Re-derives both thresholds from the sample history and the own debt.
///
/// theta_g is the q_gain quantile of observed gains and theta_l the q_loss
/// quantile of observed losses, optionally capped by the mean of the gains
/// above theta_g. Both quantile levels move up by balance_gain * debt / D
/// (clamped to [-1, 1] in units of D): a debtor asks less and tolerates
/// larger losses, a creditor asks more and grants less. Until both sample
/// sets hold warmup_stages entries no favors are exchanged.
inline void update_thresholds(ThresholdPolicy& policy, const StrategyParams& p,
                              std::int64_t own_debt) {
  if (!p.adaptive) {
    policy.theta_g = p.fixed_theta_g;
    policy.theta_l = p.fixed_theta_l;
    return;
  }
  if (policy.gains.size() < p.warmup_stages || policy.losses.size() < p.warmup_stages ||
      policy.gains.empty() || policy.losses.empty()) {
    policy.theta_g = std::numeric_limits<double>::infinity();
    policy.theta_l = 0.0;
    return;
  }
  double s = 0.0;
  if (p.credit_limit > 0)
    s = static_cast<double>(own_debt) / static_cast<double>(p.credit_limit);
  else if (own_debt != 0)
    s = own_debt > 0 ? 1.0 : -1.0;
  s = std::clamp(s, -1.0, 1.0);
  const double qg = std::clamp(p.q_gain + p.balance_gain * s, 0.0, 1.0);
  const double ql = std::clamp(p.q_loss + p.balance_gain * s, 0.0, 1.0);
  policy.theta_g = policy.gains.quantile(qg);
  double tl = policy.losses.quantile(ql);
  if (p.reciprocity_cap) {
    const double cap = policy.gains.tail_mean(policy.theta_g).value_or(policy.theta_g);
    tl = std::min(tl, cap * (1.0 + p.balance_gain * s));
  }
  policy.theta_l = std::max(tl, 0.0);
}

/// Per-operator endpoint state: parameters plus the adaptive policy.
class OperatorStrategy {
 public:
  OperatorStrategy(OperatorId self, StrategyParams params) : self_(self), params_(std::move(params)) {
    update_thresholds(policy_, params_, 0);
  }

  OperatorId self() const { return self_; }
  const StrategyParams& params() const { return params_; }
  const ThresholdPolicy& policy() const { return policy_; }

  std::size_t propose(const OperatorView& v) const {
    if (params_.forced_proposal) return *params_.forced_proposal;
    return one_shot_proposal(v);
  }

  AskDecision ask(const OperatorView& v, const SpectrumOutcome& base, std::int64_t own_debt) {
    return decide_ask(v, base, strategy_candidates(v, base, self_, params_), policy_, params_,
                      own_debt);
  }

  GrantDecision reply(const OperatorView& v, const FavorDescriptor& favor,
                      const SpectrumOutcome& base, std::int64_t asker_debt) {
    return decide_grant(v, favor, base, policy_, params_, asker_debt);
  }

  /// Records the loss the opponent's usual favor would cost, for stages in
  /// which the opponent did not ask.
  void observe_unasked(const OperatorView& v, const SpectrumOutcome& base) {
    const auto c = strategy_candidates(v, base, other(self_), params_);
    if (!c.empty()) policy_.losses.add(favor_loss(v, base, c.front()));
  }

  void end_stage(std::int64_t own_debt) { update_thresholds(policy_, params_, own_debt); }

 private:
  OperatorId self_;
  StrategyParams params_;
  ThresholdPolicy policy_;
};

}  // namespace coshare
