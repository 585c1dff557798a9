#pragma once

// Two-operator small-cell RAN: carriers, spectrum outcomes, association,
// downlink SINR, equal-time-share UE rates and proportional-fair utility.

#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "coshare/geometry.hpp"

namespace coshare {

enum class OperatorId : std::uint8_t { A = 0, B = 1 };

constexpr std::array<OperatorId, 2> kOperators{OperatorId::A, OperatorId::B};

constexpr std::size_t index_of(OperatorId op) { return static_cast<std::size_t>(op); }
constexpr OperatorId other(OperatorId op) {
  return op == OperatorId::A ? OperatorId::B : OperatorId::A;
}
inline const char* to_string(OperatorId op) { return op == OperatorId::A ? "A" : "B"; }

// Proportional-fair utility in nats. A UE with zero rate drives the utility
// to -infinity, which orders below every finite value.
using Utility = double;
constexpr Utility kMinusInfinity = -std::numeric_limits<double>::infinity();

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

/// Set of component-carrier indices (at most 32 carriers).
class CcSet {
 public:
  constexpr CcSet() = default;
  constexpr explicit CcSet(std::uint32_t mask) : mask_(mask) {}
  CcSet(std::initializer_list<std::size_t> ccs) {
    for (auto c : ccs) insert(c);
  }

  constexpr bool contains(std::size_t cc) const { return cc < 32 && ((mask_ >> cc) & 1U) != 0; }
  void insert(std::size_t cc) {
    if (cc >= 32) throw std::out_of_range("CcSet: carrier index >= 32");
    mask_ |= (1U << cc);
  }
  void erase(std::size_t cc) {
    if (cc < 32) mask_ &= ~(1U << cc);
  }
  constexpr std::size_t size() const { return static_cast<std::size_t>(std::popcount(mask_)); }
  constexpr bool empty() const { return mask_ == 0; }
  constexpr std::uint32_t mask() const { return mask_; }

  CcSet operator|(CcSet o) const { return CcSet(mask_ | o.mask_); }
  CcSet operator&(CcSet o) const { return CcSet(mask_ & o.mask_); }
  CcSet without(CcSet o) const { return CcSet(mask_ & ~o.mask_); }
  bool subset_of(CcSet o) const { return (mask_ & ~o.mask_) == 0; }

  std::vector<std::size_t> indices() const {
    std::vector<std::size_t> v;
    for (std::size_t i = 0; i < 32; ++i)
      if (contains(i)) v.push_back(i);
    return v;
  }

  friend bool operator==(CcSet, CcSet) = default;

 private:
  std::uint32_t mask_{0};
};

struct BaseStation {
  OperatorId owner{OperatorId::A};
  Position position;
  double tx_power_per_cc_dbm{20.0};
};

struct CarrierPlan {
  std::size_t n_cc{4};
  double cc_bandwidth_hz{20e6};
  std::vector<OperatorId> owner_of;
  std::vector<bool> contributed;

  CcSet owned(OperatorId op) const {
    CcSet s;
    for (std::size_t c = 0; c < n_cc; ++c)
      if (owner_of[c] == op) s.insert(c);
    return s;
  }
  CcSet reserved(OperatorId op) const {
    CcSet s;
    for (std::size_t c = 0; c < n_cc; ++c)
      if (owner_of[c] == op && !contributed[c]) s.insert(c);
    return s;
  }
  /// Contributed carriers of `op` in ascending index order.
  std::vector<std::size_t> contributed_by(OperatorId op) const {
    std::vector<std::size_t> v;
    for (std::size_t c = 0; c < n_cc; ++c)
      if (owner_of[c] == op && contributed[c]) v.push_back(c);
    return v;
  }
  /// All carriers put into the sharing game by either operator.
  CcSet pool() const {
    CcSet s;
    for (std::size_t c = 0; c < n_cc; ++c)
      if (contributed[c]) s.insert(c);
    return s;
  }
  double total_bandwidth_hz() const { return static_cast<double>(n_cc) * cc_bandwidth_hz; }

  void validate() const {
    if (n_cc == 0 || n_cc > 32) throw std::invalid_argument("carrier_plan: n_cc must be in [1, 32]");
    if (owner_of.size() != n_cc || contributed.size() != n_cc)
      throw std::invalid_argument("carrier_plan: owner_of/contributed must have n_cc entries");
    if (!(cc_bandwidth_hz > 0.0))
      throw std::invalid_argument("carrier_plan: cc_bandwidth_hz must be positive");
    if (owned(OperatorId::A).size() != owned(OperatorId::B).size())
      throw std::invalid_argument("carrier_plan: operators must own equally many carriers");
    if (contributed_by(OperatorId::A).size() != contributed_by(OperatorId::B).size())
      throw std::invalid_argument("carrier_plan: operators must contribute equally many carriers");
  }
};

/// 4 x 20 MHz; A owns {0, 1}, B owns {2, 3}; A contributes 1, B contributes 2.
inline CarrierPlan default_carrier_plan() {
  return CarrierPlan{4,
                     20e6,
                     {OperatorId::A, OperatorId::A, OperatorId::B, OperatorId::B},
                     {false, true, true, false}};
}

struct SpectrumOutcome {
  std::array<CcSet, 2> usable{};
  std::string label;

  CcSet usable_by(OperatorId op) const { return usable[index_of(op)]; }

  /// The operator that alone may use `cc`, if exactly one may.
  std::optional<OperatorId> exclusive(std::size_t cc) const {
    const bool a = usable[0].contains(cc);
    const bool b = usable[1].contains(cc);
    if (a && !b) return OperatorId::A;
    if (b && !a) return OperatorId::B;
    return std::nullopt;
  }

  bool same_allocation(const SpectrumOutcome& o) const { return usable == o.usable; }
};

// Outcome construction ------------------------------------------------------

/// Each operator uses exactly the carriers it owns.
inline SpectrumOutcome fallback_outcome(const CarrierPlan& plan) {
  return {{plan.owned(OperatorId::A), plan.owned(OperatorId::B)}, "O1"};
}

/// Both operators open their first `share_count` contributed carriers for
/// joint use.
inline SpectrumOutcome shared_outcome(const CarrierPlan& plan, std::size_t share_count) {
  SpectrumOutcome o = fallback_outcome(plan);
  for (auto op : kOperators) {
    const auto offered = plan.contributed_by(op);
    if (share_count > offered.size())
      throw std::invalid_argument("shared_outcome: share count exceeds contributed carriers");
    for (std::size_t i = 0; i < share_count; ++i) o.usable[index_of(other(op))].insert(offered[i]);
  }
  return o;
}

/// `beneficiary` gets exclusive use of `ccs`; the other operator vacates them.
inline SpectrumOutcome with_exclusive_use(SpectrumOutcome o, OperatorId beneficiary, CcSet ccs) {
  o.usable[index_of(beneficiary)] = o.usable[index_of(beneficiary)] | ccs;
  o.usable[index_of(other(beneficiary))] = o.usable[index_of(other(beneficiary))].without(ccs);
  return o;
}

/// `beneficiary` starts using `ccs` alongside whoever already uses them.
inline SpectrumOutcome with_joint_use(SpectrumOutcome o, OperatorId beneficiary, CcSet ccs) {
  o.usable[index_of(beneficiary)] = o.usable[index_of(beneficiary)] | ccs;
  return o;
}

struct StandardOutcomes {
  SpectrumOutcome o1;   // fallback
  SpectrumOutcome o2;   // full joint use of the pool (also reported as O2a)
  SpectrumOutcome o2b;  // pool exclusive to B
  SpectrumOutcome o2c;  // pool exclusive to A
};

inline StandardOutcomes standard_outcomes(const CarrierPlan& plan) {
  StandardOutcomes s;
  s.o1 = fallback_outcome(plan);
  s.o2 = shared_outcome(plan, plan.contributed_by(OperatorId::A).size());
  s.o2.label = "O2";
  s.o2b = with_exclusive_use(s.o2, OperatorId::B, plan.pool());
  s.o2b.label = "O2b";
  s.o2c = with_exclusive_use(s.o2, OperatorId::A, plan.pool());
  s.o2c.label = "O2c";
  return s;
}

/// Names an allocation after the matching standard outcome, or "custom".
inline std::string outcome_label(const CarrierPlan& plan, const SpectrumOutcome& o) {
  const auto s = standard_outcomes(plan);
  for (const auto* c : {&s.o1, &s.o2, &s.o2b, &s.o2c})
    if (o.same_allocation(*c)) return c->label;
  return "custom";
}

inline SpectrumOutcome relabeled(const CarrierPlan& plan, SpectrumOutcome o) {
  o.label = outcome_label(plan, o);
  return o;
}

/// Reserved carriers always stay usable by their owner, and nothing outside
/// the plan is usable.
inline bool is_valid_outcome(const CarrierPlan& plan, const SpectrumOutcome& o) {
  const CcSet all(plan.n_cc >= 32 ? 0xFFFFFFFFU : ((1U << plan.n_cc) - 1U));
  for (auto op : kOperators) {
    if (!o.usable_by(op).subset_of(all)) return false;
    if (!plan.reserved(op).subset_of(o.usable_by(op))) return false;
    if (!(plan.reserved(op) & o.usable_by(other(op))).empty()) return false;
  }
  return true;
}

// Stage snapshot ------------------------------------------------------------

struct UserEquipment {
  OperatorId op{OperatorId::A};
  Position position;
};

/// Received power in dBm from every BS at every UE, row-major by BS.
struct GainTable {
  std::size_t n_bs{0};
  std::size_t n_ue{0};
  std::vector<double> gain_db;

  double at(std::size_t bs, std::size_t ue) const { return gain_db[bs * n_ue + ue]; }
};

/// Own-operator BS with the strongest received power; ties go to the lowest
/// BS index. Throws if a UE's operator has no BS.
inline std::vector<std::size_t> associate(const std::vector<UserEquipment>& ues,
                                          const std::vector<BaseStation>& bss,
                                          const GainTable& gains) {
  std::vector<std::size_t> serving(ues.size());
  for (std::size_t u = 0; u < ues.size(); ++u) {
    std::optional<std::size_t> best;
    double best_rx = 0.0;
    for (std::size_t b = 0; b < bss.size(); ++b) {
      if (bss[b].owner != ues[u].op) continue;
      const double rx = bss[b].tx_power_per_cc_dbm + gains.at(b, u);
      if (!best || rx > best_rx) {
        best = b;
        best_rx = rx;
      }
    }
    if (!best)
      throw std::invalid_argument(std::string("associate: operator ") + to_string(ues[u].op) +
                                  " has no base station");
    serving[u] = *best;
  }
  return serving;
}

class StageSnapshot {
 public:
  StageSnapshot(CarrierPlan plan, std::vector<BaseStation> bss, std::vector<UserEquipment> ues,
                GainTable gains, double noise_per_cc_dbm)
      : plan_(std::move(plan)),
        bss_(std::move(bss)),
        ues_(std::move(ues)),
        gains_(std::move(gains)),
        noise_mw_(db_to_linear(noise_per_cc_dbm)),
        noise_dbm_(noise_per_cc_dbm) {
    if (gains_.n_bs != bss_.size() || gains_.n_ue != ues_.size() ||
        gains_.gain_db.size() != bss_.size() * ues_.size())
      throw std::invalid_argument("StageSnapshot: gain table shape mismatch");
    serving_ = associate(ues_, bss_, gains_);
    load_.assign(bss_.size(), 0);
    for (auto b : serving_) ++load_[b];
    rx_mw_.resize(gains_.gain_db.size());
    for (std::size_t b = 0; b < bss_.size(); ++b)
      for (std::size_t u = 0; u < ues_.size(); ++u)
        rx_mw_[b * ues_.size() + u] = db_to_linear(bss_[b].tx_power_per_cc_dbm + gains_.at(b, u));
  }

  const CarrierPlan& plan() const { return plan_; }
  const std::vector<BaseStation>& base_stations() const { return bss_; }
  const std::vector<UserEquipment>& ues() const { return ues_; }
  const GainTable& gains() const { return gains_; }
  double noise_mw() const { return noise_mw_; }
  double noise_dbm() const { return noise_dbm_; }

  std::size_t serving_bs(std::size_t ue) const { return serving_.at(ue); }
  const std::vector<std::size_t>& association() const { return serving_; }
  std::size_t load(std::size_t bs) const { return load_.at(bs); }
  bool active(std::size_t bs) const { return load_.at(bs) > 0; }
  double rx_mw(std::size_t bs, std::size_t ue) const { return rx_mw_[bs * ues_.size() + ue]; }

  std::vector<std::size_t> ues_of(OperatorId op) const {
    std::vector<std::size_t> v;
    for (std::size_t u = 0; u < ues_.size(); ++u)
      if (ues_[u].op == op) v.push_back(u);
    return v;
  }
  std::size_t ue_count(OperatorId op) const { return ues_of(op).size(); }

  /// Fraction of time `ue` is scheduled on each carrier of its serving BS.
  double time_share(std::size_t ue) const {
    return 1.0 / static_cast<double>(load_[serving_.at(ue)]);
  }

 private:
  CarrierPlan plan_;
  std::vector<BaseStation> bss_;
  std::vector<UserEquipment> ues_;
  GainTable gains_;
  double noise_mw_;
  double noise_dbm_;
  std::vector<std::size_t> serving_;
  std::vector<std::size_t> load_;
  std::vector<double> rx_mw_;
};

/// Path gains from geometry for every BS/UE pair. `shadowing` (if non-empty)
/// holds one standard normal draw per pair, row-major by BS.
inline GainTable compute_gains(const std::vector<BaseStation>& bss,
                               const std::vector<UserEquipment>& ues, const Layout& layout,
                               const PropagationParams& prop,
                               const std::vector<double>& shadowing = {}) {
  GainTable g{bss.size(), ues.size(), std::vector<double>(bss.size() * ues.size())};
  for (std::size_t b = 0; b < bss.size(); ++b)
    for (std::size_t u = 0; u < ues.size(); ++u) {
      std::optional<double> draw;
      if (!shadowing.empty()) draw = shadowing.at(b * ues.size() + u);
      g.gain_db[b * ues.size() + u] =
          path_gain_db(bss[b].position, ues[u].position, layout, prop, draw);
    }
  return g;
}

// Link evaluation -------------------------------------------------------------

inline double sinr_linear(std::size_t ue, std::size_t cc, const SpectrumOutcome& outcome,
                          const StageSnapshot& snap) {
  const auto op = snap.ues().at(ue).op;
  const auto serving = snap.serving_bs(ue);
  if (!outcome.usable_by(op).contains(cc))
    throw std::logic_error("sinr_linear: carrier " + std::to_string(cc) +
                           " is not usable by the serving operator");
  if (!snap.active(serving)) throw std::logic_error("sinr_linear: serving BS is idle");
  double interference = 0.0;
  const auto& bss = snap.base_stations();
  for (std::size_t b = 0; b < bss.size(); ++b) {
    if (b == serving || !snap.active(b)) continue;
    if (!outcome.usable_by(bss[b].owner).contains(cc)) continue;
    interference += snap.rx_mw(b, ue);
  }
  return snap.rx_mw(serving, ue) / (snap.noise_mw() + interference);
}

inline double ue_rate(std::size_t ue, const SpectrumOutcome& outcome, const StageSnapshot& snap) {
  const auto op = snap.ues().at(ue).op;
  const double share = snap.time_share(ue);
  const double w = snap.plan().cc_bandwidth_hz;
  double rate = 0.0;
  for (auto cc : outcome.usable_by(op).indices()) {
    if (cc >= snap.plan().n_cc) continue;
    rate += share * w * std::log2(1.0 + sinr_linear(ue, cc, outcome, snap));
  }
  return rate;
}

inline std::vector<double> operator_rates(OperatorId op, const SpectrumOutcome& outcome,
                                          const StageSnapshot& snap) {
  std::vector<double> r;
  for (auto u : snap.ues_of(op)) r.push_back(ue_rate(u, outcome, snap));
  return r;
}

inline Utility pf_utility(const std::vector<double>& rates) {
  Utility u = 0.0;
  for (double r : rates) {
    if (!(r > 0.0)) return kMinusInfinity;
    u += std::log(r);
  }
  return u;
}

inline Utility operator_utility(OperatorId op, const SpectrumOutcome& outcome,
                                const StageSnapshot& snap) {
  return pf_utility(operator_rates(op, outcome, snap));
}

/// U(to) - U(from), with the -infinity sentinel handled so the result is
/// never NaN: leaving -infinity is +infinity, entering it is -infinity.
inline double utility_difference(Utility from, Utility to) {
  const bool from_inf = std::isinf(from);
  const bool to_inf = std::isinf(to);
  if (from_inf && to_inf) return 0.0;
  if (from_inf) return std::numeric_limits<double>::infinity();
  if (to_inf) return -std::numeric_limits<double>::infinity();
  return to - from;
}

inline double utility_delta(OperatorId op, const SpectrumOutcome& from, const SpectrumOutcome& to,
                            const StageSnapshot& snap) {
  return utility_difference(operator_utility(op, from, snap), operator_utility(op, to, snap));
}

inline Utility sum_utility(const SpectrumOutcome& outcome, const StageSnapshot& snap) {
  return operator_utility(OperatorId::A, outcome, snap) +
         operator_utility(OperatorId::B, outcome, snap);
}

}  // namespace coshare
