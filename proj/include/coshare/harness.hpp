#pragma once

// Stage-game orchestration. Each stage draws its own world (loads, UE drops,
// optional shadowing) from a generator seeded by (seed, stage index) only,
// so every mode sees exactly the same stage t: comparisons across modes are
// paired through common random numbers.

#include <array>
#include <chrono>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <utility>
#include <string>
#include <vector>

#include "coshare/config.hpp"
#include "coshare/ledger.hpp"
#include "coshare/message.hpp"
#include "coshare/protocol.hpp"
#include "coshare/ran.hpp"
#include "coshare/strategy.hpp"

namespace coshare {

inline std::mt19937_64 stage_rng(std::uint64_t seed, std::uint32_t stage) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xFFFFFFFFU),
                    static_cast<std::uint32_t>(seed >> 32), stage, 0x5eedU};
  return std::mt19937_64(seq);
}

struct StageDraw {
  std::array<double, 2> mean_load{};
  std::array<std::size_t, 2> load{};
  StageSnapshot snapshot;
};

inline std::array<double, 2> stage_means(const ScenarioConfig& c, std::uint32_t stage,
                                         std::mt19937_64& rng) {
  bool alt = false;
  switch (c.loads.schedule) {
    case LoadSchedule::Constant: break;
    case LoadSchedule::Block: alt = 2ULL * stage >= c.n_stages; break;
    case LoadSchedule::Interleaved: alt = std::bernoulli_distribution(0.5)(rng); break;
  }
  return alt ? std::array<double, 2>{c.loads.alt_mean_a, c.loads.alt_mean_b}
             : std::array<double, 2>{c.loads.mean_a, c.loads.mean_b};
}

inline StageDraw draw_stage(const ScenarioConfig& c, std::uint32_t stage) {
  auto rng = stage_rng(c.seed, stage);
  const auto means = stage_means(c, stage, rng);
  std::array<std::size_t, 2> load{};
  for (auto op : kOperators) {
    const double m = means[index_of(op)];
    load[index_of(op)] =
        m > 0.0 ? static_cast<std::size_t>(std::poisson_distribution<long>(m)(rng)) : 0;
  }
  std::vector<UserEquipment> ues;
  for (auto op : kOperators)
    for (const auto& p : place_ues(load[index_of(op)], c.region_of(op), rng)) ues.push_back({op, p});
  std::vector<double> shadow;
  if (c.propagation.shadowing) {
    std::normal_distribution<double> z(0.0, 1.0);
    shadow.resize(c.base_stations.size() * ues.size());
    for (auto& s : shadow) s = z(rng);
  }
  auto gains = compute_gains(c.base_stations, ues, c.layout, c.propagation, shadow);
  return {means, load, StageSnapshot(c.carriers, c.base_stations, std::move(ues), std::move(gains),
                                     c.noise_dbm)};
}

/// Outcomes the joint optimizer chooses from, in tie-break order (least
/// sharing first).
inline std::vector<SpectrumOutcome> cooperative_outcome_set(const CarrierPlan& plan,
                                                            bool single_cc_variants) {
  const auto s = standard_outcomes(plan);
  std::vector<SpectrumOutcome> set{s.o1, s.o2b, s.o2c};
  if (single_cc_variants)
    for (auto op : kOperators)
      for (auto cc : plan.pool().indices())
        set.push_back(relabeled(plan, with_exclusive_use(s.o2, op, CcSet{cc})));
  set.push_back(s.o2);
  return set;
}

/// Argmax of U_A + U_B over `outcomes`; the first one wins ties.
inline SpectrumOutcome full_cooperation_oracle(const StageSnapshot& snap,
                                               const std::vector<SpectrumOutcome>& outcomes) {
  if (outcomes.empty()) throw std::invalid_argument("full_cooperation_oracle: no outcomes");
  std::size_t best = 0;
  Utility best_u = sum_utility(outcomes[0], snap);
  for (std::size_t i = 1; i < outcomes.size(); ++i) {
    const Utility u = sum_utility(outcomes[i], snap);
    if (u > best_u) {
      best = i;
      best_u = u;
    }
  }
  return outcomes[best];
}

struct StageResult {
  std::uint32_t stage{0};
  Mode mode{Mode::NoSharing};
  std::array<std::size_t, 2> n_ue{};
  std::array<double, 2> mean_load{};
  std::string one_shot_label;
  SpectrumOutcome outcome;
  std::array<std::vector<double>, 2> rates;
  std::array<Utility, 2> utility{};
  std::vector<ProtocolMessage> messages;
  std::int64_t balance{0};  // A's debt after the stage
  std::array<double, 2> theta_g{};
  std::array<double, 2> theta_l{};
};

/// In-memory ordered, reliable transport. Every message crosses the wire
/// encoding, and the receiver works on the decoded copy.
class MessageChannel {
 public:
  ProtocolMessage send(const ProtocolMessage& m) {
    const auto wire = encode(m);
    bytes_ += wire.size();
    auto received = decode(wire);
    log_.push_back(received);
    return received;
  }
  std::vector<ProtocolMessage> take_log() { return std::exchange(log_, {}); }
  std::size_t bytes_sent() const { return bytes_; }

 private:
  std::vector<ProtocolMessage> log_;
  std::size_t bytes_{0};
};

/// Protocol state of one game instance: the two endpoints and the ledger.
struct GameState {
  explicit GameState(const ScenarioConfig& c)
      : ledger(c.ledger_window),
        strategies{OperatorStrategy(OperatorId::A, c.strategy),
                   OperatorStrategy(OperatorId::B, c.strategy)} {}

  FavorLedger ledger;
  std::array<OperatorStrategy, 2> strategies;
  MessageChannel channel;
};

inline std::size_t received_share(const ProtocolMessage& m) {
  return std::get<ShareProposal>(m.payload).share_count;
}

/// One stage: proposals and minimum rule, then (combined mode) expiry and
/// one favor round, then evaluation of the final outcome.
inline StageResult run_stage(const ScenarioConfig& c, Mode mode, std::uint32_t stage,
                             const StageDraw& draw, GameState& game) {
  const auto& snap = draw.snapshot;
  const auto& plan = c.carriers;
  StageResult r;
  r.stage = stage;
  r.mode = mode;
  r.n_ue = draw.load;
  r.mean_load = draw.mean_load;

  SpectrumOutcome final_outcome;
  switch (mode) {
    case Mode::NoSharing:
      game.channel.send(ProtocolMessage::noop(stage, OperatorId::A));
      game.channel.send(ProtocolMessage::noop(stage, OperatorId::B));
      final_outcome = fallback_outcome(plan);
      r.one_shot_label = final_outcome.label;
      break;
    case Mode::FullCooperation:
      game.channel.send(ProtocolMessage::noop(stage, OperatorId::A));
      game.channel.send(ProtocolMessage::noop(stage, OperatorId::B));
      final_outcome =
          full_cooperation_oracle(snap, cooperative_outcome_set(plan, c.strategy.single_cc_favors));
      r.one_shot_label = final_outcome.label;
      break;
    case Mode::OneShotOnly:
    case Mode::Combined: {
      const std::array<OperatorView, 2> views{make_operator_view(OperatorId::A, snap),
                                              make_operator_view(OperatorId::B, snap)};
      auto& sa = game.strategies[0];
      auto& sb = game.strategies[1];
      const auto pa = game.channel.send(ProtocolMessage::propose(
          stage, OperatorId::A, static_cast<std::uint8_t>(sa.propose(views[0]))));
      const auto pb = game.channel.send(ProtocolMessage::propose(
          stage, OperatorId::B, static_cast<std::uint8_t>(sb.propose(views[1]))));
      const auto base = resolve_minimum_rule(plan, received_share(pa), received_share(pb)).outcome;
      r.one_shot_label = base.label;
      final_outcome = base;
      if (mode == Mode::OneShotOnly) break;

      expire_favors(game.ledger, stage);
      if (!game.ledger.active_favors().empty()) {
        final_outcome = apply_active_favors(plan, base, game.ledger);
        game.channel.send(ProtocolMessage::noop(stage, OperatorId::A));
        game.channel.send(ProtocolMessage::noop(stage, OperatorId::B));
      } else {
        std::array<std::optional<FavorDescriptor>, 2> asks;
        for (auto op : kOperators) {
          auto& s = game.strategies[index_of(op)];
          auto d = s.ask(views[index_of(op)], base, game.ledger.debt_of(op));
          const auto msg = d.ask ? ProtocolMessage::ask(stage, op, *d.ask)
                                 : ProtocolMessage::noop(stage, op);
          const auto rx = game.channel.send(msg);
          if (rx.kind == MessageKind::AskFavor) asks[index_of(op)] = std::get<FavorDescriptor>(rx.payload);
        }
        std::array<std::optional<Decision>, 2> replies;
        for (auto op : kOperators) {
          const auto& incoming = asks[index_of(other(op))];
          auto& s = game.strategies[index_of(op)];
          if (incoming && !asks[index_of(op)]) {
            const auto g =
                s.reply(views[index_of(op)], *incoming, base, game.ledger.debt_of(other(op)));
            const auto rx = game.channel.send(g.decision == Decision::Grant
                                                  ? ProtocolMessage::grant(stage, op)
                                                  : ProtocolMessage::deny(stage, op));
            replies[index_of(op)] =
                rx.kind == MessageKind::Grant ? Decision::Grant : Decision::Deny;
          } else {
            s.observe_unasked(views[index_of(op)], base);
          }
        }
        final_outcome = resolve_favor_round(stage, plan, base, asks[0], asks[1], replies[0],
                                            replies[1], game.ledger)
                            .outcome;
      }
      for (auto op : kOperators)
        game.strategies[index_of(op)].end_stage(game.ledger.debt_of(op));
      break;
    }
  }

  r.outcome = relabeled(plan, final_outcome);
  for (auto op : kOperators) {
    r.rates[index_of(op)] = operator_rates(op, r.outcome, snap);
    r.utility[index_of(op)] = pf_utility(r.rates[index_of(op)]);
    r.theta_g[index_of(op)] = game.strategies[index_of(op)].policy().theta_g;
    r.theta_l[index_of(op)] = game.strategies[index_of(op)].policy().theta_l;
  }
  r.balance = game.ledger.balance();
  r.messages = game.channel.take_log();
  return r;
}

struct ModeRun {
  Mode mode{Mode::NoSharing};
  std::vector<StageResult> stages;
  double seconds{0.0};
};

struct SimulationResult {
  ScenarioConfig config;
  std::vector<ModeRun> runs;

  const ModeRun* find(Mode m) const {
    for (const auto& r : runs)
      if (r.mode == m) return &r;
    return nullptr;
  }
  /// True when no UE of either operator appeared in any stage.
  bool degenerate() const {
    for (const auto& run : runs)
      for (const auto& s : run.stages)
        if (s.n_ue[0] + s.n_ue[1] > 0) return false;
    return true;
  }
};

/// Runs the listed modes side by side over the same stage draws.
inline SimulationResult run_simulation(const ScenarioConfig& c,
                                       const std::vector<Mode>& modes = {kAllModes.begin(),
                                                                         kAllModes.end()}) {
  c.validate();
  SimulationResult out{c, {}};
  std::vector<GameState> games;
  for (auto m : modes) {
    out.runs.push_back({m, {}, 0.0});
    out.runs.back().stages.reserve(c.n_stages);
    games.emplace_back(c);
  }
  using clock = std::chrono::steady_clock;
  for (std::uint32_t t = 0; t < c.n_stages; ++t) {
    const auto t0 = clock::now();
    const auto draw = draw_stage(c, t);
    const double draw_s = std::chrono::duration<double>(clock::now() - t0).count();
    for (std::size_t i = 0; i < modes.size(); ++i) {
      const auto t1 = clock::now();
      out.runs[i].stages.push_back(run_stage(c, modes[i], t, draw, games[i]));
      out.runs[i].seconds +=
          draw_s + std::chrono::duration<double>(clock::now() - t1).count();
    }
  }
  return out;
}

}  // namespace coshare
