#pragma once

#include <exception>
#include <iosfwd>
#include <string>
#include <vector>

#include "ptkr/config.hpp"

namespace ptkr {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitIo = 4;

const std::vector<std::string>& subcommand_names();

const char* library_version();

struct CommandReport {
  std::vector<std::string> outputs;  // files written, in order
};

// Runs one pipeline and writes its artifacts into `out_dir` (created when
// missing). Relative input paths in the config are resolved against
// `out_dir`. Progress lines go to `log`.
CommandReport run_subcommand(const std::string& name, const RunConfig& config,
                             const std::string& out_dir, std::ostream& log);

// 2 config, 3 numerical abort, 4 I/O.
int exit_code_for(const std::exception& error);

// One-line JSON object describing a failure.
std::string error_record(const std::string& subcommand, const std::exception& error);

}  // namespace ptkr
