// Command-line front end: one subcommand per pipeline, config-driven.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ptkr/commands.hpp"
#include "ptkr/config.hpp"
#include "ptkr/errors.hpp"
#include "ptkr/table.hpp"

namespace {

struct Args {
  std::string config;
  std::string out;
  int t_max = 0;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* sub, Args& args) {
  sub->add_option("--config", args.config, "config file (key = value)")->required();
  sub->add_option("--out", args.out, "output directory")->required();
  sub->add_option("--t-max", args.t_max, "override schedule.t_max")->check(CLI::PositiveNumber);
  sub->add_option("--override", args.overrides, "key=value, may repeat");
}

int run(const std::string& name, const Args& args) {
  try {
    std::vector<ptkr::Override> overrides;
    for (const auto& o : args.overrides) overrides.push_back(ptkr::parse_override(o));
    if (args.t_max > 0) overrides.emplace_back("schedule.t_max", std::to_string(args.t_max));
    const ptkr::RunConfig config = ptkr::load_config(args.config, overrides);
    ptkr::run_subcommand(name, config, args.out, std::cerr);
    return ptkr::kExitOk;
  } catch (const std::exception& e) {
    const std::string record = ptkr::error_record(name, e);
    std::cerr << record << "\n";
    try {
      if (!args.out.empty()) {
        std::filesystem::create_directories(args.out);
        ptkr::write_text_atomic((std::filesystem::path(args.out) / "error.json").string(),
                                record + "\n");
      }
    } catch (const std::exception&) {
    }
    return ptkr::exit_code_for(e);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PT-symmetric kicked rotor: evolution, OTOCs, phase scans and fits"};
  app.set_version_flag("--version", std::string(ptkr::library_version()));
  app.require_subcommand(1);

  Args args;
  std::string chosen;
  const std::map<std::string, std::string> help{
      {"evolve", "forward evolution: log-norm, moments and density snapshots"},
      {"otoc", "OTOC series over the sample schedule, optional reversal diagnostics"},
      {"phase-scan", "classify a (K, lambda) grid as broken or unbroken"},
      {"lambda-c", "bisect the critical non-Hermiticity for one (K, hbar)"},
      {"fit", "fit a scaling law to columns of earlier result tables"},
      {"plot", "render a result table as SVG"}};
  for (const auto& name : ptkr::subcommand_names()) {
    CLI::App* sub = app.add_subcommand(name, help.at(name));
    add_common(sub, args);
    sub->callback([&chosen, name] { chosen = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ptkr::kExitOk : ptkr::kExitConfig;
  }
  return run(chosen, args);
}
