#pragma once

// Rate CDFs, percentiles, improvement ratios and favor-exchange counts.

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coshare/harness.hpp"
#include "coshare/stats.hpp"

namespace coshare {

/// Percentile `p` in (0, 100) with linear interpolation between closest
/// ranks (the "R-7" / numpy-default estimator).
inline double percentile(std::vector<double> samples, double p) {
  if (samples.empty()) throw std::invalid_argument("percentile: no samples");
  if (!(p > 0.0 && p < 100.0)) throw std::invalid_argument("percentile: p must be in (0, 100)");
  std::sort(samples.begin(), samples.end());
  return quantile_sorted(samples, p / 100.0);
}

/// Relative gain of `mode` over `baseline` at percentile p, in percent.
/// Undefined (nullopt) when the baseline percentile is zero.
inline std::optional<double> improvement(const std::vector<double>& mode,
                                         const std::vector<double>& baseline, double p) {
  const double q_base = percentile(baseline, p);
  if (q_base == 0.0) return std::nullopt;
  return 100.0 * (percentile(mode, p) - q_base) / q_base;
}

struct RateCdf {
  OperatorId op{OperatorId::A};
  Mode mode{Mode::NoSharing};
  std::vector<double> sorted_rates;

  std::size_t size() const { return sorted_rates.size(); }
  double quantile(double p) const { return quantile_sorted(sorted_rates, p / 100.0); }
  /// Empirical CDF value at each sorted sample: (i + 1) / n.
  double cdf_at(std::size_t i) const {
    return static_cast<double>(i + 1) / static_cast<double>(sorted_rates.size());
  }
};

/// All UE rate samples of `op`, pooled over stages.
inline std::vector<double> pooled_rates(const ModeRun& run, OperatorId op) {
  std::vector<double> v;
  for (const auto& s : run.stages)
    v.insert(v.end(), s.rates[index_of(op)].begin(), s.rates[index_of(op)].end());
  return v;
}

inline RateCdf make_cdf(std::vector<double> rates, OperatorId op, Mode mode) {
  std::sort(rates.begin(), rates.end());
  return {op, mode, std::move(rates)};
}

struct FavorCounts {
  std::int64_t asks{0};
  std::int64_t grants{0};    // favors this operator granted
  std::int64_t denies{0};
  std::int64_t received{0};  // favors this operator was granted
  std::int64_t proposals_to_share{0};
};

struct FavorStats {
  std::array<FavorCounts, 2> per_operator{};
  std::int64_t both_ask_stages{0};
  std::vector<std::int64_t> balance;  // A's debt after each stage
};

/// Counts read off the message log of each stage.
inline FavorStats favor_stats(const std::vector<StageResult>& stages) {
  FavorStats st;
  st.balance.reserve(stages.size());
  for (const auto& s : stages) {
    std::array<bool, 2> asked{false, false};
    for (const auto& m : s.messages) {
      auto& c = st.per_operator[index_of(m.sender)];
      switch (m.kind) {
        case MessageKind::AskFavor:
          ++c.asks;
          asked[index_of(m.sender)] = true;
          break;
        case MessageKind::Grant:
          ++c.grants;
          ++st.per_operator[index_of(other(m.sender))].received;
          break;
        case MessageKind::Deny: ++c.denies; break;
        case MessageKind::Propose:
          if (std::get<ShareProposal>(m.payload).share_count > 0) ++c.proposals_to_share;
          break;
        case MessageKind::Noop: break;
      }
    }
    if (asked[0] && asked[1]) ++st.both_ask_stages;
    st.balance.push_back(s.balance);
  }
  return st;
}

/// Fraction of stages ending in each outcome label.
inline std::vector<std::pair<std::string, double>> outcome_census(
    const std::vector<StageResult>& stages) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& s : stages) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const auto& e) { return e.first == s.outcome.label; });
    if (it == out.end()) out.emplace_back(s.outcome.label, 1.0);
    else it->second += 1.0;
  }
  for (auto& e : out) e.second /= static_cast<double>(std::max<std::size_t>(stages.size(), 1));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace coshare
