#pragma once

#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ptkr/basis.hpp"
#include "ptkr/propagator.hpp"

namespace ptkr {

enum class SampleSpacing { log, linear };

struct ScheduleConfig {
  int t_max = 1000;
  SampleSpacing spacing = SampleSpacing::log;
  int count = 40;
  bool include_zero = true;
  int checkpoint_stride = 0;
  int threads = 1;

  bool operator==(const ScheduleConfig&) const = default;
};

struct GuardConfig {
  bool enabled = true;
  double fraction = 0.1;
  double tolerance = 1e-8;

  TailGuard guard() const { return {fraction, tolerance, enabled}; }
  bool operator==(const GuardConfig&) const = default;
};

struct EvolveConfig {
  std::vector<int> snapshot_times;

  bool operator==(const EvolveConfig&) const = default;
};

// Optional single reversal traced step by step (forward and backward legs).
// t_n = 0 disables it.
struct ReversalConfig {
  int t_n = 0;
  bool insert_p = true;
  std::vector<int> snapshot_times;

  bool operator==(const ReversalConfig&) const = default;
};

struct PhaseConfig {
  double mu_threshold = 1e-4;
  double r2_min = 0.5;
  int t_max = 2000;
  int t_max_limit = 8000;
  std::vector<double> kick_axis;
  std::vector<double> lambda_axis;
  int threads = 1;

  bool operator==(const PhaseConfig&) const = default;
};

struct LambdaCConfig {
  double lo = 1e-5;
  double hi = 0.3;
  double tol = 1e-4;

  bool operator==(const LambdaCConfig&) const = default;
};

enum class FitKind {
  power_law,
  ballistic_quadratic,
  ballistic_linear,
  time_avg,
  k_scaling,
  localization,
  growth_rate
};

struct FitConfig {
  FitKind kind = FitKind::power_law;
  std::vector<std::string> inputs;
  std::string x = "t_n";
  std::string y = "c";
  double window_lo = -std::numeric_limits<double>::infinity();
  double window_hi = std::numeric_limits<double>::infinity();

  bool operator==(const FitConfig&) const = default;
};

enum class PlotKind { line, heat };

struct PlotConfig {
  PlotKind kind = PlotKind::line;
  std::string input;
  std::string x = "t_n";
  std::vector<std::string> y{"c"};
  std::string z = "mu";
  bool log_x = false;
  bool log_y = false;
  std::string title;
  std::string output = "plot.svg";

  bool operator==(const PlotConfig&) const = default;
};

struct RunConfig {
  ModelParams model{};
  int n_modes = 8192;
  double sigma = 10.0;
  ScheduleConfig schedule;
  GuardConfig guard;
  EvolveConfig evolve;
  ReversalConfig reversal;
  PhaseConfig phase;
  LambdaCConfig lambda_c;
  FitConfig fit;
  PlotConfig plot;

  BasisSpec basis() const { return {n_modes, model.hbar_eff}; }
  std::vector<int> sample_times() const;
  bool operator==(const RunConfig&) const = default;
};

using Override = std::pair<std::string, std::string>;

// Line-oriented `key = value` text with dotted keys; `#` starts a comment.
// Lists are comma separated. Overrides replace (or add) keys after the text
// is read and are reported with line 0.
RunConfig parse_config(const std::string& text, const std::vector<Override>& overrides = {});
RunConfig load_config(const std::string& path, const std::vector<Override>& overrides = {});

// Every key, in a fixed order, so that parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& config);

// FNV-1a 64 of the serialized form, as 16 hex digits.
std::string config_hash(const RunConfig& config);

// `key=value` from the command line.
Override parse_override(const std::string& text);

const char* to_string(FitKind kind);
const char* to_string(SampleSpacing spacing);
const char* to_string(PlotKind kind);

// Key/value pairs written into table headers.
std::vector<std::pair<std::string, std::string>> config_metadata(const RunConfig& config);

}  // namespace ptkr
