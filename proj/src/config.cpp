#include "ptkr/config.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "ptkr/errors.hpp"
#include "ptkr/otoc.hpp"
#include "ptkr/text.hpp"

namespace ptkr {

namespace {

struct Entry {
  std::string value;
  int line = 0;
};

[[noreturn]] void fail(const std::string& code, const std::string& key, int line,
                       const std::string& what) {
  std::ostringstream msg;
  if (line > 0) msg << "line " << line << ": ";
  if (!key.empty()) msg << key << ": ";
  msg << what;
  throw ConfigError(code, key, line, msg.str());
}

double to_real(const std::string& key, const Entry& e) {
  const auto v = parse_real(e.value);
  if (!v) fail("parse_error", key, e.line, "expected a real number, got '" + e.value + "'");
  return *v;
}

int to_int(const std::string& key, const Entry& e) {
  const auto v = parse_integer(e.value);
  if (!v || *v < std::numeric_limits<int>::min() || *v > std::numeric_limits<int>::max()) {
    fail("parse_error", key, e.line, "expected an integer, got '" + e.value + "'");
  }
  return static_cast<int>(*v);
}

bool to_bool(const std::string& key, const Entry& e) {
  if (e.value == "true") return true;
  if (e.value == "false") return false;
  fail("parse_error", key, e.line, "expected true or false, got '" + e.value + "'");
}

std::vector<std::string> to_list(const Entry& e) {
  if (trim(e.value).empty()) return {};
  return split(e.value, ',');
}

std::vector<double> to_reals(const std::string& key, const Entry& e) {
  std::vector<double> out;
  for (const auto& item : to_list(e)) out.push_back(to_real(key, {item, e.line}));
  return out;
}

std::vector<int> to_ints(const std::string& key, const Entry& e) {
  std::vector<int> out;
  for (const auto& item : to_list(e)) out.push_back(to_int(key, {item, e.line}));
  return out;
}

template <class T>
std::string join(const std::vector<T>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_same_v<T, double>) {
      out += format_real_short(items[i]);
    } else if constexpr (std::is_same_v<T, int>) {
      out += std::to_string(items[i]);
    } else {
      out += items[i];
    }
  }
  return out;
}

template <class E, std::size_t N>
E to_enum(const std::string& key, const Entry& e, const std::pair<const char*, E> (&names)[N]) {
  for (const auto& [name, value] : names) {
    if (e.value == name) return value;
  }
  std::string allowed;
  for (const auto& [name, value] : names) allowed += std::string(allowed.empty() ? "" : "|") + name;
  fail("parse_error", key, e.line, "expected one of " + allowed + ", got '" + e.value + "'");
}

constexpr std::pair<const char*, SampleSpacing> kSpacings[] = {
    {"log", SampleSpacing::log}, {"linear", SampleSpacing::linear}};
constexpr std::pair<const char*, FitKind> kFitKinds[] = {
    {"power_law", FitKind::power_law},
    {"ballistic_quadratic", FitKind::ballistic_quadratic},
    {"ballistic_linear", FitKind::ballistic_linear},
    {"time_avg", FitKind::time_avg},
    {"k_scaling", FitKind::k_scaling},
    {"localization", FitKind::localization},
    {"growth_rate", FitKind::growth_rate}};
constexpr std::pair<const char*, PlotKind> kPlotKinds[] = {{"line", PlotKind::line},
                                                           {"heat", PlotKind::heat}};

template <class E, std::size_t N>
const char* enum_name(E value, const std::pair<const char*, E> (&names)[N]) {
  for (const auto& [name, v] : names) {
    if (v == value) return name;
  }
  return "?";
}

struct Field {
  const char* key;
  bool required;
  std::function<void(RunConfig&, const std::string&, const Entry&)> read;
  std::function<std::string(const RunConfig&)> write;
};

#define PTKR_REAL(KEY, MEMBER)                                                                \
  Field {                                                                                     \
    KEY, false, [](RunConfig& c, const std::string& k, const Entry& e) { c.MEMBER = to_real(k, e); }, \
        [](const RunConfig& c) { return format_real_short(c.MEMBER); }                              \
  }
#define PTKR_INT(KEY, MEMBER)                                                                 \
  Field {                                                                                     \
    KEY, false, [](RunConfig& c, const std::string& k, const Entry& e) { c.MEMBER = to_int(k, e); }, \
        [](const RunConfig& c) { return std::to_string(c.MEMBER); }                           \
  }
#define PTKR_BOOL(KEY, MEMBER)                                                                \
  Field {                                                                                     \
    KEY, false, [](RunConfig& c, const std::string& k, const Entry& e) { c.MEMBER = to_bool(k, e); }, \
        [](const RunConfig& c) { return std::string(c.MEMBER ? "true" : "false"); }           \
  }
#define PTKR_STRING(KEY, MEMBER)                                                              \
  Field {                                                                                     \
    KEY, false, [](RunConfig& c, const std::string&, const Entry& e) { c.MEMBER = e.value; }, \
        [](const RunConfig& c) { return c.MEMBER; }                                           \
  }
#define PTKR_LIST(KEY, MEMBER, PARSE)                                                         \
  Field {                                                                                     \
    KEY, false, [](RunConfig& c, [[maybe_unused]] const std::string& k, const Entry& e) { c.MEMBER = PARSE; }, \
        [](const RunConfig& c) { return join(c.MEMBER); }                                     \
  }
#define PTKR_ENUM(KEY, MEMBER, NAMES)                                                         \
  Field {                                                                                     \
    KEY, false,                                                                               \
        [](RunConfig& c, const std::string& k, const Entry& e) { c.MEMBER = to_enum(k, e, NAMES); }, \
        [](const RunConfig& c) { return std::string(enum_name(c.MEMBER, NAMES)); }            \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f{
        PTKR_REAL("model.kick_strength", model.kick_strength),
        PTKR_REAL("model.non_hermiticity", model.non_hermiticity),
        PTKR_REAL("model.hbar_eff", model.hbar_eff),
        PTKR_INT("basis.n_modes", n_modes),
        PTKR_REAL("initial.sigma", sigma),
        PTKR_INT("schedule.t_max", schedule.t_max),
        PTKR_ENUM("schedule.spacing", schedule.spacing, kSpacings),
        PTKR_INT("schedule.count", schedule.count),
        PTKR_BOOL("schedule.include_zero", schedule.include_zero),
        PTKR_INT("schedule.checkpoint_stride", schedule.checkpoint_stride),
        PTKR_INT("schedule.threads", schedule.threads),
        PTKR_BOOL("guard.enabled", guard.enabled),
        PTKR_REAL("guard.fraction", guard.fraction),
        PTKR_REAL("guard.tolerance", guard.tolerance),
        PTKR_LIST("evolve.snapshot_times", evolve.snapshot_times, to_ints(k, e)),
        PTKR_INT("reversal.t_n", reversal.t_n),
        PTKR_BOOL("reversal.insert_p", reversal.insert_p),
        PTKR_LIST("reversal.snapshot_times", reversal.snapshot_times, to_ints(k, e)),
        PTKR_REAL("phase.mu_threshold", phase.mu_threshold),
        PTKR_REAL("phase.r2_min", phase.r2_min),
        PTKR_INT("phase.t_max", phase.t_max),
        PTKR_INT("phase.t_max_limit", phase.t_max_limit),
        PTKR_LIST("phase.kick_axis", phase.kick_axis, to_reals(k, e)),
        PTKR_LIST("phase.lambda_axis", phase.lambda_axis, to_reals(k, e)),
        PTKR_INT("phase.threads", phase.threads),
        PTKR_REAL("lambda_c.lo", lambda_c.lo),
        PTKR_REAL("lambda_c.hi", lambda_c.hi),
        PTKR_REAL("lambda_c.tol", lambda_c.tol),
        PTKR_ENUM("fit.kind", fit.kind, kFitKinds),
        PTKR_LIST("fit.inputs", fit.inputs, to_list(e)),
        PTKR_STRING("fit.x", fit.x),
        PTKR_STRING("fit.y", fit.y),
        PTKR_REAL("fit.window_lo", fit.window_lo),
        PTKR_REAL("fit.window_hi", fit.window_hi),
        PTKR_ENUM("plot.kind", plot.kind, kPlotKinds),
        PTKR_STRING("plot.input", plot.input),
        PTKR_STRING("plot.x", plot.x),
        PTKR_LIST("plot.y", plot.y, to_list(e)),
        PTKR_STRING("plot.z", plot.z),
        PTKR_BOOL("plot.log_x", plot.log_x),
        PTKR_BOOL("plot.log_y", plot.log_y),
        PTKR_STRING("plot.title", plot.title),
        PTKR_STRING("plot.output", plot.output),
    };
    f[0].required = true;
    f[2].required = true;
    return f;
  }();
  return table;
}

#undef PTKR_REAL
#undef PTKR_INT
#undef PTKR_BOOL
#undef PTKR_STRING
#undef PTKR_LIST
#undef PTKR_ENUM

void check(bool ok, const std::map<std::string, Entry>& entries, const std::string& key,
           const std::string& what) {
  if (ok) return;
  const auto it = entries.find(key);
  fail("invalid_value", key, it == entries.end() ? 0 : it->second.line, what);
}

bool sorted_unique(const std::vector<int>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] <= v[i - 1]) return false;
  }
  return true;
}

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

void validate(const RunConfig& c, const std::map<std::string, Entry>& e) {
  check(std::isfinite(c.model.kick_strength), e, "model.kick_strength", "must be finite");
  check(std::isfinite(c.model.non_hermiticity) && c.model.non_hermiticity >= 0.0, e,
        "model.non_hermiticity", "must be finite and non-negative");
  check(finite_positive(c.model.hbar_eff), e, "model.hbar_eff", "must be finite and positive");
  check(c.n_modes >= 4 && c.n_modes % 2 == 0, e, "basis.n_modes", "must be even and >= 4");
  check(finite_positive(c.sigma), e, "initial.sigma", "must be finite and positive");
  check(c.schedule.t_max >= 1, e, "schedule.t_max", "must be >= 1");
  check(c.schedule.count >= 1, e, "schedule.count", "must be >= 1");
  check(c.schedule.checkpoint_stride >= 0, e, "schedule.checkpoint_stride", "must be >= 0");
  check(c.schedule.threads >= 1, e, "schedule.threads", "must be >= 1");
  check(c.guard.fraction > 0.0 && c.guard.fraction < 0.5, e, "guard.fraction",
        "must lie in (0, 0.5)");
  check(finite_positive(c.guard.tolerance) && c.guard.tolerance < 1.0, e, "guard.tolerance",
        "must lie in (0, 1)");
  for (int t : c.evolve.snapshot_times) {
    check(t >= 0 && t <= c.schedule.t_max, e, "evolve.snapshot_times",
          "times must lie in [0, schedule.t_max]");
  }
  check(sorted_unique(c.evolve.snapshot_times), e, "evolve.snapshot_times",
        "times must be strictly increasing");
  check(c.reversal.t_n >= 0, e, "reversal.t_n", "must be >= 0");
  for (int t : c.reversal.snapshot_times) {
    check(t >= 0 && t <= c.reversal.t_n, e, "reversal.snapshot_times",
          "times must lie in [0, reversal.t_n]");
  }
  check(sorted_unique(c.reversal.snapshot_times), e, "reversal.snapshot_times",
        "times must be strictly increasing");
  check(std::isfinite(c.phase.mu_threshold), e, "phase.mu_threshold", "must be finite");
  check(c.phase.r2_min >= 0.0 && c.phase.r2_min <= 1.0, e, "phase.r2_min", "must lie in [0, 1]");
  check(c.phase.t_max >= 10, e, "phase.t_max", "must be >= 10");
  check(c.phase.t_max_limit >= c.phase.t_max, e, "phase.t_max_limit", "must be >= phase.t_max");
  check(std::is_sorted(c.phase.kick_axis.begin(), c.phase.kick_axis.end()), e, "phase.kick_axis",
        "must be sorted");
  check(std::is_sorted(c.phase.lambda_axis.begin(), c.phase.lambda_axis.end()), e,
        "phase.lambda_axis", "must be sorted");
  for (double l : c.phase.lambda_axis) {
    check(std::isfinite(l) && l >= 0.0, e, "phase.lambda_axis", "values must be non-negative");
  }
  for (double k : c.phase.kick_axis) {
    check(std::isfinite(k), e, "phase.kick_axis", "values must be finite");
  }
  check(c.phase.threads >= 1, e, "phase.threads", "must be >= 1");
  check(std::isfinite(c.lambda_c.lo) && c.lambda_c.lo >= 0.0, e, "lambda_c.lo",
        "must be non-negative");
  check(std::isfinite(c.lambda_c.hi) && c.lambda_c.hi > c.lambda_c.lo, e, "lambda_c.hi",
        "must exceed lambda_c.lo");
  check(finite_positive(c.lambda_c.tol), e, "lambda_c.tol", "must be positive");
  check(!(c.fit.window_lo > c.fit.window_hi), e, "fit.window_hi", "must be >= fit.window_lo");
  check(!c.plot.y.empty(), e, "plot.y", "needs at least one column");
}

std::map<std::string, Entry> read_entries(const std::string& text) {
  std::map<std::string, Entry> entries;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view view(raw);
    if (line == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) fail("parse_error", "", line, "expected 'key = value'");
    const std::string key(trim(view.substr(0, eq)));
    if (key.empty()) fail("parse_error", "", line, "missing key before '='");
    if (entries.count(key)) {
      fail("duplicate_key", key, line,
           "already set on line " + std::to_string(entries[key].line));
    }
    entries[key] = {std::string(trim(view.substr(eq + 1))), line};
  }
  return entries;
}

}  // namespace

std::vector<int> RunConfig::sample_times() const {
  return schedule.spacing == SampleSpacing::log
             ? log_sample_times(schedule.t_max, schedule.count, schedule.include_zero)
             : linear_sample_times(schedule.t_max, schedule.count, schedule.include_zero);
}

RunConfig parse_config(const std::string& text, const std::vector<Override>& overrides) {
  std::map<std::string, Entry> entries = read_entries(text);
  for (const auto& [key, value] : overrides) entries[key] = {value, 0};

  std::set<std::string> known;
  for (const Field& f : fields()) known.insert(f.key);
  for (const auto& [key, entry] : entries) {
    if (!known.count(key)) fail("unknown_key", key, entry.line, "unknown key");
  }

  RunConfig config;
  for (const Field& f : fields()) {
    const auto it = entries.find(f.key);
    if (it == entries.end()) {
      if (f.required) fail("missing_key", f.key, 0, "required key is missing");
      continue;
    }
    f.read(config, f.key, it->second);
  }
  validate(config, entries);
  return config;
}

RunConfig load_config(const std::string& path, const std::vector<Override>& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), overrides);
}

std::string serialize_config(const RunConfig& config) {
  std::string out;
  for (const Field& f : fields()) {
    out += f.key;
    out += " = ";
    out += f.write(config);
    out += '\n';
  }
  return out;
}

std::string config_hash(const RunConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : serialize_config(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Override parse_override(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) {
    fail("parse_error", "", 0, "override '" + text + "' is not of the form key=value");
  }
  return {std::string(trim(std::string_view(text).substr(0, eq))),
          std::string(trim(std::string_view(text).substr(eq + 1)))};
}

const char* to_string(FitKind kind) { return enum_name(kind, kFitKinds); }
const char* to_string(SampleSpacing spacing) { return enum_name(spacing, kSpacings); }
const char* to_string(PlotKind kind) { return enum_name(kind, kPlotKinds); }

std::vector<std::pair<std::string, std::string>> config_metadata(const RunConfig& config) {
  return {{"config_hash", config_hash(config)},
          {"model.kick_strength", format_real_short(config.model.kick_strength)},
          {"model.non_hermiticity", format_real_short(config.model.non_hermiticity)},
          {"model.hbar_eff", format_real_short(config.model.hbar_eff)},
          {"basis.n_modes", std::to_string(config.n_modes)},
          {"initial.sigma", format_real_short(config.sigma)}};
}

}  // namespace ptkr
