// Command-line front end: run scenarios, rebuild reports, encode/decode
// protocol messages.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "coshare/config.hpp"
#include "coshare/harness.hpp"
#include "coshare/message.hpp"
#include "coshare/report.hpp"

namespace {

std::vector<coshare::Mode> parse_modes(const std::string& arg) {
  if (arg == "all") return {coshare::kAllModes.begin(), coshare::kAllModes.end()};
  std::vector<coshare::Mode> modes;
  std::stringstream ss(arg);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) modes.push_back(coshare::parse_mode(item));
  if (modes.empty()) throw coshare::ConfigError("mode", "no mode given");
  return modes;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-operator small-cell spectrum sharing simulator"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "Run stage games and write the report files");
  std::string config_path, scenario, mode_arg = "all", out_dir = "out";
  std::uint64_t seed = 0;
  std::uint32_t stages = 0;
  sim->add_option("--config", config_path, "JSON scenario config");
  sim->add_option("--scenario", scenario, "Built-in scenario when no config is given")
      ->check(CLI::IsMember({"equal-load-low-interf", "asym-load-high-interf"}));
  sim->add_option("--mode", mode_arg,
                  "no-sharing, one-shot-only, combined, full-cooperation, a comma list, or all");
  sim->add_option("--seed", seed, "Overrides the config seed");
  sim->add_option("--stages", stages, "Overrides the config stage count");
  sim->add_option("--out", out_dir, "Output directory");

  auto* rep = app.add_subcommand("report", "Rebuild CDFs and rate summary from rate CSVs");
  std::string in_dir;
  rep->add_option("--in", in_dir, "Directory holding rates_<op>_<mode>.csv")->required();

  auto* enc = app.add_subcommand("encode", "Encode one protocol message as hex");
  std::uint32_t stage_index = 0;
  std::string sender = "A", kind = "NOOP", favor_type = "EXCLUSIVE_USE";
  unsigned share = 0;
  std::vector<unsigned> ccs;
  unsigned duration = 1;
  enc->add_option("--stage", stage_index);
  enc->add_option("--sender", sender)->check(CLI::IsMember({"A", "B"}));
  enc->add_option("--kind", kind)->check(
      CLI::IsMember({"NOOP", "PROPOSE", "ASK_FAVOR", "GRANT", "DENY"}));
  enc->add_option("--share", share);
  enc->add_option("--favor-type", favor_type)->check(CLI::IsMember({"JOINT_USE", "EXCLUSIVE_USE"}));
  enc->add_option("--ccs", ccs);
  enc->add_option("--duration", duration);

  auto* dec = app.add_subcommand("decode", "Decode a hex protocol message");
  std::string hex;
  dec->add_option("hex", hex)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      coshare::ScenarioConfig cfg;
      if (!config_path.empty()) cfg = coshare::load_config(config_path);
      else if (!scenario.empty()) cfg = coshare::preset(scenario);
      else cfg = coshare::equal_load_low_interference();
      if (sim->count("--seed")) cfg.seed = seed;
      if (sim->count("--stages")) cfg.n_stages = stages;
      cfg.validate();
      const auto res = coshare::run_simulation(cfg, parse_modes(mode_arg));
      coshare::write_report(out_dir, res);
      const auto summary = coshare::summarize(res);
      for (const auto& e : summary["results"]) {
        std::cout << e["operator"].get<std::string>() << ' ' << e["mode"].get<std::string>()
                  << " p10=" << e["p10"] << " p50=" << e["p50"]
                  << " imp_p10=" << e["improvement_vs_nosharing_p10"]
                  << " imp_p50=" << e["improvement_vs_nosharing_p50"] << '\n';
      }
      std::cout << "wrote " << out_dir << '\n';
    } else if (*rep) {
      const auto j = coshare::report_from_directory(in_dir);
      coshare::write_file(std::filesystem::path(in_dir) / "summary.json", j.dump(2) + "\n");
      std::cout << j.dump(2) << '\n';
    } else if (*enc) {
      coshare::ProtocolMessage m;
      m.stage_index = stage_index;
      m.sender = sender == "A" ? coshare::OperatorId::A : coshare::OperatorId::B;
      if (kind == "NOOP") m = coshare::ProtocolMessage::noop(stage_index, m.sender);
      else if (kind == "GRANT") m = coshare::ProtocolMessage::grant(stage_index, m.sender);
      else if (kind == "DENY") m = coshare::ProtocolMessage::deny(stage_index, m.sender);
      else if (kind == "PROPOSE")
        m = coshare::ProtocolMessage::propose(stage_index, m.sender, static_cast<std::uint8_t>(share));
      else {
        coshare::FavorDescriptor f;
        f.type = favor_type == "JOINT_USE" ? coshare::FavorType::JointUse
                                           : coshare::FavorType::ExclusiveUse;
        for (auto c : ccs) f.ccs.insert(c);
        f.duration_stages = static_cast<std::uint16_t>(duration);
        m = coshare::ProtocolMessage::ask(stage_index, m.sender, f);
      }
      std::cout << coshare::to_hex(coshare::encode(m)) << '\n';
    } else if (*dec) {
      const auto m = coshare::decode(coshare::from_hex(hex));
      std::cout << "stage " << m.stage_index << ' ' << coshare::describe(m) << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
