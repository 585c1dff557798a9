#pragma once

// CSV and JSON files written by the simulator and read back by `report`.
//
//   stages.csv              one row per (mode, stage)
//   rates_<op>_<mode>.csv   stage,rate_bps    one row per UE sample
//   cdf_<op>_<mode>.csv     rate_bps,cdf      sorted samples with (i+1)/n
//   summary.json            percentiles, improvements, favor counts

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coshare/harness.hpp"
#include "coshare/metrics.hpp"

namespace coshare {

inline std::string format_double(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline double parse_double(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

inline std::string describe(const ProtocolMessage& m) {
  std::string s = std::string(to_string(m.sender)) + ":" + to_string(m.kind);
  if (const auto* p = std::get_if<ShareProposal>(&m.payload)) {
    s += "(" + std::to_string(p->share_count) + ")";
  } else if (const auto* f = std::get_if<FavorDescriptor>(&m.payload)) {
    s += f->type == FavorType::ExclusiveUse ? "(X{" : "(J{";
    bool first = true;
    for (auto c : f->ccs.indices()) {
      s += (first ? "" : ";") + std::to_string(c);
      first = false;
    }
    s += "}x" + std::to_string(f->duration_stages) + ")";
  }
  return s;
}

inline std::string rates_file_name(OperatorId op, Mode m) {
  return std::string("rates_") + to_string(op) + "_" + to_string(m) + ".csv";
}
inline std::string cdf_file_name(OperatorId op, Mode m) {
  return std::string("cdf_") + to_string(op) + "_" + to_string(m) + ".csv";
}

inline void write_stages_csv(std::ostream& out, const SimulationResult& res) {
  out << "mode,stage,mean_load_a,mean_load_b,n_ue_a,n_ue_b,one_shot,outcome,utility_a,utility_b,"
         "asks_a,asks_b,grants_a,grants_b,denies_a,denies_b,balance_a,theta_g_a,theta_l_a,"
         "theta_g_b,theta_l_b,messages\n";
  for (const auto& run : res.runs) {
    for (const auto& s : run.stages) {
      std::array<int, 2> asks{}, grants{}, denies{};
      std::string msgs;
      for (const auto& m : s.messages) {
        const auto i = index_of(m.sender);
        if (m.kind == MessageKind::AskFavor) ++asks[i];
        if (m.kind == MessageKind::Grant) ++grants[i];
        if (m.kind == MessageKind::Deny) ++denies[i];
        if (!msgs.empty()) msgs += ' ';
        msgs += describe(m);
      }
      out << to_string(run.mode) << ',' << s.stage << ',' << format_double(s.mean_load[0]) << ','
          << format_double(s.mean_load[1]) << ',' << s.n_ue[0] << ',' << s.n_ue[1] << ','
          << s.one_shot_label << ',' << s.outcome.label << ',' << format_double(s.utility[0])
          << ',' << format_double(s.utility[1]) << ',' << asks[0] << ',' << asks[1] << ','
          << grants[0] << ',' << grants[1] << ',' << denies[0] << ',' << denies[1] << ','
          << s.balance << ',' << format_double(s.theta_g[0]) << ','
          << format_double(s.theta_l[0]) << ',' << format_double(s.theta_g[1]) << ','
          << format_double(s.theta_l[1]) << ',' << msgs << '\n';
    }
  }
}

inline void write_rates_csv(std::ostream& out, const ModeRun& run, OperatorId op) {
  out << "stage,rate_bps\n";
  for (const auto& s : run.stages)
    for (double r : s.rates[index_of(op)]) out << s.stage << ',' << format_double(r) << '\n';
}

inline std::vector<double> read_rates_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("stage,rate_bps", 0) != 0)
    throw std::runtime_error("rates csv: missing 'stage,rate_bps' header");
  std::vector<double> v;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error("rates csv: line " + std::to_string(lineno) + ": missing column");
    try {
      v.push_back(parse_double(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw std::runtime_error("rates csv: line " + std::to_string(lineno) + ": bad rate_bps");
    }
  }
  return v;
}

inline void write_cdf_csv(std::ostream& out, const RateCdf& cdf) {
  out << "rate_bps,cdf\n";
  for (std::size_t i = 0; i < cdf.size(); ++i)
    out << format_double(cdf.sorted_rates[i]) << ',' << format_double(cdf.cdf_at(i)) << '\n';
}

struct RateSet {
  OperatorId op{OperatorId::A};
  Mode mode{Mode::NoSharing};
  std::vector<double> rates;
};

inline nlohmann::json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

/// Rate section of summary.json: one entry per (operator, mode) with
/// percentiles and, when a no-sharing set exists, improvements over it.
inline nlohmann::json rate_summary(const std::vector<RateSet>& sets) {
  static constexpr std::array<double, 3> kPercentiles{10.0, 50.0, 90.0};
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : sets) {
    nlohmann::json e;
    e["operator"] = to_string(s.op);
    e["mode"] = to_string(s.mode);
    e["n_samples"] = s.rates.size();
    const RateSet* base = nullptr;
    for (const auto& b : sets)
      if (b.op == s.op && b.mode == Mode::NoSharing) base = &b;
    double mean = 0.0;
    for (double r : s.rates) mean += r;
    e["mean"] = s.rates.empty() ? nlohmann::json(nullptr)
                                : nlohmann::json(mean / static_cast<double>(s.rates.size()));
    for (double p : kPercentiles) {
      const auto key = "p" + std::to_string(static_cast<int>(p));
      e[key] = s.rates.empty() ? nlohmann::json(nullptr) : nlohmann::json(percentile(s.rates, p));
      std::optional<double> imp;
      if (base && !s.rates.empty() && !base->rates.empty()) imp = improvement(s.rates, base->rates, p);
      e["improvement_vs_nosharing_" + key] = optional_number(imp);
    }
    arr.push_back(e);
  }
  return arr;
}

inline nlohmann::json favor_summary(const FavorStats& st) {
  nlohmann::json j;
  for (auto op : kOperators) {
    const auto& c = st.per_operator[index_of(op)];
    j[to_string(op)] = {{"asks", c.asks},
                        {"grants", c.grants},
                        {"denies", c.denies},
                        {"received", c.received},
                        {"proposals_to_share", c.proposals_to_share}};
  }
  j["both_ask_stages"] = st.both_ask_stages;
  if (!st.balance.empty()) {
    j["final_balance_a"] = st.balance.back();
    j["min_balance_a"] = *std::min_element(st.balance.begin(), st.balance.end());
    j["max_balance_a"] = *std::max_element(st.balance.begin(), st.balance.end());
  }
  return j;
}

inline nlohmann::json summarize(const SimulationResult& res) {
  nlohmann::json j;
  j["scenario"] = res.config.scenario;
  j["seed"] = res.config.seed;
  j["n_stages"] = res.config.n_stages;
  j["degenerate"] = res.degenerate();
  std::vector<RateSet> sets;
  for (const auto& run : res.runs)
    for (auto op : kOperators) sets.push_back({op, run.mode, pooled_rates(run, op)});
  j["results"] = rate_summary(sets);
  for (const auto& run : res.runs) {
    const auto m = to_string(run.mode);
    j["favor_counts"][m] = favor_summary(favor_stats(run.stages));
    for (const auto& [label, frac] : outcome_census(run.stages)) j["outcome_census"][m][label] = frac;
    j["runtime_s"][m] = run.seconds;
  }
  return j;
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << content;
}

/// Writes every report file for `res` into `dir` (created if missing).
inline void write_report(const std::filesystem::path& dir, const SimulationResult& res) {
  std::filesystem::create_directories(dir);
  {
    std::ostringstream s;
    write_stages_csv(s, res);
    write_file(dir / "stages.csv", s.str());
  }
  for (const auto& run : res.runs)
    for (auto op : kOperators) {
      std::ostringstream r;
      write_rates_csv(r, run, op);
      write_file(dir / rates_file_name(op, run.mode), r.str());
      std::ostringstream c;
      write_cdf_csv(c, make_cdf(pooled_rates(run, op), op, run.mode));
      write_file(dir / cdf_file_name(op, run.mode), c.str());
    }
  write_file(dir / "summary.json", summarize(res).dump(2) + "\n");
}

/// Rebuilds CDF files and the rate section of summary.json from the rate
/// CSVs found in `dir`.
inline nlohmann::json report_from_directory(const std::filesystem::path& dir) {
  std::vector<RateSet> sets;
  for (auto m : kAllModes)
    for (auto op : kOperators) {
      const auto p = dir / rates_file_name(op, m);
      if (!std::filesystem::exists(p)) continue;
      std::ifstream in(p);
      sets.push_back({op, m, read_rates_csv(in)});
    }
  if (sets.empty()) throw std::runtime_error("report: no rates_<op>_<mode>.csv files in " + dir.string());
  for (const auto& s : sets) {
    std::ostringstream c;
    write_cdf_csv(c, make_cdf(s.rates, s.op, s.mode));
    write_file(dir / cdf_file_name(s.op, s.mode), c.str());
  }
  nlohmann::json j;
  j["results"] = rate_summary(sets);
  return j;
}

}  // namespace coshare
