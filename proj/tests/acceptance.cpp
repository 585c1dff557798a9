// Acceptance gate: runs every acceptance criterion and prints one PASS/FAIL
// line per criterion. Exit status is non-zero if any criterion fails.

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "coshare/report.hpp"
#include "golden.hpp"
#include "oracles.hpp"

using namespace coshare;

namespace {

int g_failures = 0;

void verdict(bool ok, const std::string& id, const std::string& detail) {
  std::printf("%s  %-34s %s\n", ok ? "PASS" : "FAIL", id.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

void info(const std::string& id, const std::string& detail) {
  std::printf("INFO  %-34s %s\n", id.c_str(), detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

const std::vector<std::uint64_t> kSeeds{1, 2, 3};
constexpr std::int64_t kCreditLimit = 4;

struct Pooled {
  std::map<std::pair<int, Mode>, std::vector<double>> rates;  // (op, mode)
  std::vector<SimulationResult> runs;
  double max_mode_seconds{0.0};

  const std::vector<double>& of(OperatorId op, Mode m) const { return rates.at({index_of(op), m}); }
  double imp(OperatorId op, Mode m, double p) const {
    return improvement(of(op, m), of(op, Mode::NoSharing), p).value_or(std::nan(""));
  }
};

Pooled run_seeds(ScenarioConfig c) {
  Pooled out;
  for (auto seed : kSeeds) {
    c.seed = seed;
    auto res = run_simulation(c);
    for (const auto& run : res.runs) {
      out.max_mode_seconds = std::max(out.max_mode_seconds, run.seconds);
      for (auto op : kOperators) {
        auto& v = out.rates[{index_of(op), run.mode}];
        const auto r = pooled_rates(run, op);
        v.insert(v.end(), r.begin(), r.end());
      }
    }
    out.runs.push_back(std::move(res));
  }
  return out;
}

bool within(double x, double lo, double hi) { return x >= lo && x <= hi; }

// Scenario 1 ---------------------------------------------------------------

void scenario1(const Pooled& s1) {
  for (auto op : kOperators) {
    const std::string o = to_string(op);
    const double c10 = s1.imp(op, Mode::Combined, 10), c50 = s1.imp(op, Mode::Combined, 50);
    verdict(within(c10, 27, 67) && within(c50, 25, 65), "s1.combined-vs-nosharing." + o,
            fmt("p10 %+.1f%% (47+-20)  p50 %+.1f%% (45+-20)", c10, c50));
    const double o10 = s1.imp(op, Mode::OneShotOnly, 10), o50 = s1.imp(op, Mode::OneShotOnly, 50);
    verdict(std::abs(c10 - o10) <= 8 && std::abs(c50 - o50) <= 8, "s1.combined-vs-oneshot." + o,
            fmt("|dp10| %.2f pp  |dp50| %.2f pp (<= 8)", std::abs(c10 - o10), std::abs(c50 - o50)));
    const double f10 = s1.imp(op, Mode::FullCooperation, 10);
    const double f50 = s1.imp(op, Mode::FullCooperation, 50);
    verdict(std::abs(c10 - f10) <= 8 && std::abs(c50 - f50) <= 8, "s1.combined-vs-fullcoop." + o,
            fmt("|dp10| %.2f pp  |dp50| %.2f pp (<= 8)", std::abs(c10 - f10), std::abs(c50 - f50)));
  }
  verdict(s1.max_mode_seconds < 60.0, "s1.runtime-per-mode",
          fmt("slowest mode %.2f s for 4000 stages (< 60)", s1.max_mode_seconds));

  double o2 = 0.0, n = 0.0;
  for (const auto& res : s1.runs)
    for (const auto& st : res.find(Mode::Combined)->stages) {
      o2 += st.outcome.label == "O2" ? 1.0 : 0.0;
      n += 1.0;
    }
  std::string modal;
  double best = -1.0;
  std::map<std::string, double> census;
  for (const auto& res : s1.runs)
    for (const auto& st : res.find(Mode::Combined)->stages) census[st.outcome.label] += 1.0;
  for (const auto& [l, k] : census)
    if (k > best) {
      best = k;
      modal = l;
    }
  verdict(modal == "O2" && o2 / n > 0.5, "s1.outcome-census",
          "modal " + modal + fmt(", O2 frequency %.1f%% (> 50%%)", 100.0 * o2 / n));
}

// Scenario 2 ---------------------------------------------------------------

void scenario2(const Pooled& s2) {
  for (auto op : kOperators) {
    const std::string o = to_string(op);
    const double o10 = s2.imp(op, Mode::OneShotOnly, 10), o50 = s2.imp(op, Mode::OneShotOnly, 50);
    verdict(within(o10, -5, 15) && within(o50, 0, 20), "s2.oneshot-vs-nosharing." + o,
            fmt("p10 %+.1f%% in [-5,15]  p50 %+.1f%% in [0,20]", o10, o50));
    const double c10 = s2.imp(op, Mode::Combined, 10), c50 = s2.imp(op, Mode::Combined, 50);
    verdict(within(c10, 10, 45) && within(c50, 10, 45) && c10 > o10 && c50 > o50,
            "s2.combined-vs-nosharing." + o,
            fmt("p10 %+.1f%%  p50 %+.1f%% in [10,45], above one-shot (%+.1f, %+.1f)", c10, c50, o10,
                o50));
    const double f10 = s2.imp(op, Mode::FullCooperation, 10);
    const double f50 = s2.imp(op, Mode::FullCooperation, 50);
    verdict(std::abs(c10 - f10) <= 10 && std::abs(c50 - f50) <= 10, "s2.combined-vs-fullcoop." + o,
            fmt("full-coop p10 %+.1f%% p50 %+.1f%%; gaps %.2f / %.2f pp (<= 10)", f10, f50,
                std::abs(c10 - f10), std::abs(c50 - f50)));
  }
  verdict(s2.max_mode_seconds < 60.0, "s2.runtime-per-mode",
          fmt("slowest mode %.2f s for 4000 stages (< 60)", s2.max_mode_seconds));
}

// Properties ---------------------------------------------------------------

void minimum_rule() {
  const auto plan = default_carrier_plan();
  bool ok = true;
  for (std::size_t a = 0; a <= 1; ++a)
    for (std::size_t b = 0; b <= 1; ++b) {
      const auto ab = resolve_minimum_rule(plan, a, b), ba = resolve_minimum_rule(plan, b, a);
      ok = ok && ab.share_count == std::min(a, b) && ab.outcome.same_allocation(ba.outcome);
      ok = ok && resolve_minimum_rule(plan, a, a).share_count == a;
      ok = ok && ab.outcome.label == (std::min(a, b) == 1 ? "O2" : "O1");
    }
  verdict(ok, "minimum-rule-algebra", "commutative, idempotent, min over {0,1}^2");
}

void fallback_safety() {
  auto c = asymmetric_load_high_interference();
  c.strategy.deny_all = true;
  auto res = run_simulation(c, {Mode::Combined});
  std::size_t bad = 0, asks = 0;
  for (const auto& s : res.runs[0].stages) {
    bad += s.outcome.label != s.one_shot_label ? 1 : 0;
    for (const auto& m : s.messages) asks += m.kind == MessageKind::AskFavor ? 1 : 0;
  }
  verdict(bad == 0 && asks > 0, "fallback.all-deny",
          std::to_string(c.n_stages) + " stages, " + std::to_string(asks) +
              " asks, final != one-shot in " + std::to_string(bad));

  c = asymmetric_load_high_interference();
  c.strategy.forced_proposal = 0;
  res = run_simulation(c, {Mode::OneShotOnly, Mode::Combined});
  std::size_t not_o1 = 0, unconsented = 0, favored = 0;
  for (const auto& s : res.runs[0].stages) not_o1 += s.outcome.label != "O1" ? 1 : 0;
  for (const auto& s : res.runs[1].stages) {
    not_o1 += s.one_shot_label != "O1" ? 1 : 0;
    if (s.outcome.label == "O1") continue;
    ++favored;
    bool granted = false;
    for (const auto& m : s.messages) granted = granted || m.kind == MessageKind::Grant;
    unconsented += granted ? 0 : 1;
  }
  c.strategy.deny_all = true;
  const auto strict = run_simulation(c, {Mode::Combined});
  for (const auto& s : strict.runs[0].stages) not_o1 += s.outcome.label != "O1" ? 1 : 0;
  verdict(not_o1 == 0 && unconsented == 0, "fallback.zero-proposals",
          "resolution O1 in every stage; " + std::to_string(favored) +
              " stages left O1 only through a granted favor, " + std::to_string(unconsented) +
              " without consent");
}

struct LedgerCheck {
  std::size_t stages{0}, mismatches{0}, over_limit{0};
  std::int64_t max_abs{0};
};

void check_ledger(const ModeRun& run, LedgerCheck& lc) {
  std::int64_t expected = 0;
  for (const auto& s : run.stages) {
    std::optional<ProtocolMessage> ask;
    for (const auto& m : s.messages) {
      if (m.kind == MessageKind::AskFavor) ask = m;
      if (m.kind == MessageKind::Grant && ask) {
        const auto units = std::get<FavorDescriptor>(ask->payload).units();
        expected += ask->sender == OperatorId::A ? units : -units;
      }
    }
    // balance_A = -balance_B holds by construction of the recorded value;
    // the audit is that the balance equals the signed sum of granted units.
    lc.mismatches += s.balance != expected ? 1 : 0;
    lc.over_limit += std::abs(s.balance) > kCreditLimit ? 1 : 0;
    lc.max_abs = std::max(lc.max_abs, std::abs(s.balance));
    ++lc.stages;
  }
}

void ledger_property(const std::vector<const Pooled*>& all) {
  LedgerCheck lc;
  for (const auto* p : all)
    for (const auto& res : p->runs)
      for (const auto& run : res.runs) check_ledger(run, lc);
  verdict(lc.mismatches == 0 && lc.over_limit == 0, "ledger.conservation-and-limit",
          std::to_string(lc.stages) + " stages audited, max |balance| " + std::to_string(lc.max_abs) +
              " (D = 4), " + std::to_string(lc.mismatches) + " conservation mismatches");
}

void both_ask(const Pooled& s2) {
  const auto plan = default_carrier_plan();
  const auto std_o = standard_outcomes(plan);
  FavorLedger ledger;
  ledger.record_grant(0, OperatorId::B, {FavorType::ExclusiveUse, CcSet{1}, 1});
  ledger.expire(1);
  const auto bal = ledger.balance();
  const auto hist = ledger.history().size();
  const FavorDescriptor f{FavorType::ExclusiveUse, CcSet{1, 2}, 1};
  const auto r = resolve_favor_round(5, plan, std_o.o2, f, f, std::nullopt, std::nullopt, ledger);
  bool ok = r.both_asked && r.outcome.same_allocation(std_o.o2) && ledger.balance() == bal &&
            ledger.history().size() == hist && ledger.active_favors().empty();
  // Every stage of the scenario-2 runs in which both asked.
  std::size_t seen = 0;
  for (const auto& res : s2.runs) {
    const auto& st = res.find(Mode::Combined)->stages;
    for (std::size_t t = 1; t < st.size(); ++t) {
      int asks = 0;
      for (const auto& m : st[t].messages) asks += m.kind == MessageKind::AskFavor ? 1 : 0;
      if (asks < 2) continue;
      ++seen;
      ok = ok && st[t].outcome.label == st[t].one_shot_label && st[t].balance == st[t - 1].balance;
    }
  }
  verdict(ok, "both-ask-tie", "scripted stage exact; " + std::to_string(seen) +
                                  " simulated both-ask stages left outcome and ledger unchanged");
}

void degenerate_equivalence() {
  bool ok = true;
  std::size_t stages = 0;
  for (auto c : {equal_load_low_interference(), asymmetric_load_high_interference()}) {
    c.strategy.adaptive = false;
    c.strategy.fixed_theta_g = std::numeric_limits<double>::infinity();
    c.strategy.fixed_theta_l = 0.0;
    const auto res = run_simulation(c, {Mode::OneShotOnly, Mode::Combined});
    const auto& a = res.runs[0].stages;
    const auto& b = res.runs[1].stages;
    for (std::size_t t = 0; t < a.size(); ++t) {
      ++stages;
      ok = ok && a[t].outcome.same_allocation(b[t].outcome) && a[t].rates == b[t].rates &&
           std::memcmp(a[t].utility.data(), b[t].utility.data(), sizeof(double) * 2) == 0;
    }
  }
  verdict(ok, "degenerate-strategy-equivalence",
          std::to_string(stages) + " stages, combined == one-shot bit for bit");
}

void ran_oracle(const std::vector<const Pooled*>& all) {
  const auto plan = default_carrier_plan();
  std::vector<SpectrumOutcome> outcomes;
  for (std::uint32_t k = 0; k < 9; ++k) {
    SpectrumOutcome o{{plan.reserved(OperatorId::A), plan.reserved(OperatorId::B)}, ""};
    auto code = k;
    for (auto cc : plan.pool().indices()) {
      if (code % 3 != 1) o.usable[0].insert(cc);
      if (code % 3 != 0) o.usable[1].insert(cc);
      code /= 3;
    }
    outcomes.push_back(o);
  }
  double worst = 0.0;
  std::size_t values = 0;
  bool util_ok = true;
  int snapshots = 0;
  for (auto c : {equal_load_low_interference(), asymmetric_load_high_interference()})
    for (std::uint32_t t = 0; t < 50; ++t) {
      c.seed = 1000 + t;
      const auto d = draw_stage(c, t * 37);
      ++snapshots;
      for (const auto& o : outcomes) {
        const auto ref = oracle::rates(c, d.snapshot.ues(), {o.usable[0].mask(), o.usable[1].mask()});
        for (auto op : kOperators) {
          const auto got = operator_rates(op, o, d.snapshot);
          const auto& want = ref[index_of(op)];
          if (got.size() != want.size()) {
            worst = 1.0;
            continue;
          }
          for (std::size_t i = 0; i < got.size(); ++i) {
            worst = std::max(worst, std::abs(got[i] - want[i]) / std::max(want[i], 1e-300));
            ++values;
          }
          const double u = operator_utility(op, o, d.snapshot), uw = oracle::pf(want);
          if (std::isinf(uw)) util_ok = util_ok && u == uw;
          else util_ok = util_ok && std::abs(u - uw) <= 1e-9 * std::max(1.0, std::abs(uw));
        }
      }
    }
  verdict(worst <= 1e-9 && util_ok, "ran.brute-force-oracle",
          std::to_string(snapshots) + " snapshots x 9 allocations, " + std::to_string(values) +
              fmt(" rates, max rel err %.2e (<= 1e-9)", worst));

  std::size_t checked = 0, violations = 0;
  for (const auto* p : all)
    for (const auto& res : p->runs) {
      const auto& fc = res.find(Mode::FullCooperation)->stages;
      for (const auto& run : res.runs)
        for (std::size_t t = 0; t < run.stages.size(); ++t) {
          ++checked;
          const double mine = run.stages[t].utility[0] + run.stages[t].utility[1];
          violations += fc[t].utility[0] + fc[t].utility[1] < mine ? 1 : 0;
        }
    }
  verdict(violations == 0, "ran.full-cooperation-dominance",
          std::to_string(checked) + " (mode, stage) pairs, " + std::to_string(violations) + " violations");
}

void codec() {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<std::uint32_t> u32;
  std::uniform_int_distribution<int> pick(0, 4), bit(0, 1), byte(0, 255), dur(1, 65535);
  std::size_t bad = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto op = bit(rng) ? OperatorId::B : OperatorId::A;
    ProtocolMessage m;
    switch (pick(rng)) {
      case 0: m = ProtocolMessage::noop(u32(rng), op); break;
      case 1: m = ProtocolMessage::propose(u32(rng), op, static_cast<std::uint8_t>(byte(rng))); break;
      case 2:
        m = ProtocolMessage::ask(u32(rng), op,
                                 {bit(rng) ? FavorType::JointUse : FavorType::ExclusiveUse,
                                  CcSet(u32(rng) | 1U), static_cast<std::uint16_t>(dur(rng))});
        break;
      case 3: m = ProtocolMessage::grant(u32(rng), op); break;
      default: m = ProtocolMessage::deny(u32(rng), op); break;
    }
    const auto b = encode(m);
    bad += (decode(b) == m && encode(decode(b)) == b) ? 0 : 1;
  }
  verdict(bad == 0, "codec.round-trip", "10000 random messages, " + std::to_string(bad) + " mismatches");

  std::size_t golden_bad = 0, truncations = 0, trunc_bad = 0;
  std::size_t n_cases = 0;
  for (int pass = 0; pass < 2; ++pass) {
    const auto cases = golden::load(golden::corpus_path());
    n_cases = cases.size();
    for (const auto& c : cases) {
      const auto it = golden::expected().find(c.name);
      if (it == golden::expected().end() || encode(it->second) != c.bytes || !(decode(c.bytes) == it->second))
        ++golden_bad;
      if (pass) continue;
      for (std::size_t n = 0; n < c.bytes.size(); ++n) {
        ++truncations;
        try {
          decode(std::span<const std::uint8_t>(c.bytes.data(), n));
          ++trunc_bad;
        } catch (const DecodeError&) {
        }
      }
    }
  }
  verdict(golden_bad == 0 && n_cases == golden::expected().size(), "codec.golden-corpus",
          std::to_string(n_cases) + " frozen encodings stable over 2 passes");
  verdict(trunc_bad == 0, "codec.truncation",
          std::to_string(truncations) + " truncated inputs, all rejected with DecodeError");
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void determinism() {
  const auto base = std::filesystem::temp_directory_path() / "coshare_acceptance";
  std::filesystem::remove_all(base);
  bool ok = true;
  std::size_t bytes = 0;
  for (auto c : {equal_load_low_interference(), asymmetric_load_high_interference()}) {
    write_report(base / "a", run_simulation(c));
    write_report(base / "b", run_simulation(c));
    const auto x = slurp(base / "a" / "stages.csv"), y = slurp(base / "b" / "stages.csv");
    ok = ok && !x.empty() && x == y;
    bytes += x.size();
  }
  std::filesystem::remove_all(base);
  verdict(ok, "determinism.stages-csv", std::to_string(bytes) + " bytes byte-identical across reruns");
}

void block_schedule_info() {
  auto c = asymmetric_load_high_interference();
  c.loads.schedule = LoadSchedule::Block;
  const auto p = run_seeds(c);
  for (auto op : kOperators)
    info(std::string("s2.block-schedule.") + to_string(op),
         fmt("one-shot p10 %+.1f%% p50 %+.1f%%; combined p10 %+.1f%% p50 %+.1f%%",
             p.imp(op, Mode::OneShotOnly, 10), p.imp(op, Mode::OneShotOnly, 50),
             p.imp(op, Mode::Combined, 10), p.imp(op, Mode::Combined, 50)) +
             fmt("; full-coop p10 %+.1f%% p50 %+.1f%%", p.imp(op, Mode::FullCooperation, 10),
                 p.imp(op, Mode::FullCooperation, 50)));
}

}  // namespace

int main() {
  std::printf("acceptance: seeds 1,2,3 x 4000 stages, rates pooled per operator\n");
  const auto s1 = run_seeds(equal_load_low_interference());
  scenario1(s1);
  const auto s2 = run_seeds(asymmetric_load_high_interference());
  scenario2(s2);
  minimum_rule();
  fallback_safety();
  ledger_property({&s1, &s2});
  both_ask(s2);
  degenerate_equivalence();
  ran_oracle({&s1, &s2});
  codec();
  determinism();
  block_schedule_info();
  std::printf("%s: %d criterion line(s) failed\n", g_failures ? "FAILED" : "PASSED", g_failures);
  return g_failures ? 1 : 0;
}
