#include "ptkr/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <map>
#include <ostream>
#include <set>

#include <json.hpp>

#include "ptkr/errors.hpp"
#include "ptkr/fit.hpp"
#include "ptkr/otoc.hpp"
#include "ptkr/phase_scan.hpp"
#include "ptkr/propagator.hpp"
#include "ptkr/svg.hpp"
#include "ptkr/table.hpp"
#include "ptkr/text.hpp"

#ifndef PTKR_VERSION
#define PTKR_VERSION "0.0.0"
#endif

namespace ptkr {

namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Session {
 public:
  Session(std::string name, const RunConfig& config, const std::string& out_dir, std::ostream& log)
      : name_(std::move(name)), config_(config), dir_(out_dir), log_(log) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) {
      throw IoError("cannot create output directory '" + out_dir + "'");
    }
  }

  const RunConfig& config() const { return config_; }
  std::ostream& log() { return log_; }

  ResultTable table(std::vector<Column> columns) const {
    ResultTable t(std::move(columns));
    for (const auto& [k, v] : config_metadata(config_)) t.set_meta(k, v);
    t.set_meta("subcommand", name_);
    t.set_meta("version", library_version());
    t.set_meta("timestamp", utc_timestamp());
    return t;
  }

  void write(const std::string& file, const ResultTable& t) {
    const fs::path path = dir_ / file;
    write_table(path.string(), t);
    report_.outputs.push_back(path.string());
    log_ << "wrote " << path.string() << " (" << t.row_count() << " rows)\n";
  }

  void write_text(const std::string& file, const std::string& text) {
    const fs::path path = dir_ / file;
    write_text_atomic(path.string(), text);
    report_.outputs.push_back(path.string());
    log_ << "wrote " << path.string() << "\n";
  }

  std::string resolve(const std::string& input) const {
    const fs::path p(input);
    return (p.is_absolute() ? p : dir_ / p).string();
  }

  CommandReport report() const { return report_; }

 private:
  std::string name_;
  const RunConfig& config_;
  fs::path dir_;
  std::ostream& log_;
  CommandReport report_;
};

std::vector<Column> density_columns() {
  return {{"index", ColumnType::integer},
          {"p", ColumnType::real},
          {"momentum_density", ColumnType::real},
          {"theta", ColumnType::real},
          {"angle_density", ColumnType::real}};
}

ResultTable density_table(const Session& s, const WaveState& state, int t) {
  const Observables obs = observables(state);
  const BasisSpec& basis = state.basis();
  ResultTable table = s.table(density_columns());
  table.set_meta("time", std::to_string(t));
  for (Eigen::Index k = 0; k < basis.size(); ++k) {
    table.add_row({static_cast<double>(basis.index_at(k)), basis.momentum_at(k),
                   obs.momentum_density(k), basis.angle_at(k), obs.angle_density(k)});
  }
  return table;
}

void run_evolve(Session& s) {
  const RunConfig& c = s.config();
  const BasisSpec basis = c.basis();
  const FloquetPropagator prop(basis, c.model, c.guard.guard());
  Eigen::VectorXcd amps = gaussian_state(basis, c.sigma).amplitudes();
  const std::set<int> snaps(c.evolve.snapshot_times.begin(), c.evolve.snapshot_times.end());

  ResultTable table = s.table({{"t", ColumnType::integer},
                               {"log_norm", ColumnType::real},
                               {"p_mean", ColumnType::real},
                               {"p2", ColumnType::real},
                               {"p4", ColumnType::real}});
  double log_norm = 0.0;
  auto record = [&](int t) {
    const Moments m = moments(amps, basis);
    table.add_row({static_cast<double>(t), log_norm, m.p_mean, m.p2, m.p4});
    if (snaps.count(t)) {
      s.write("density_t" + std::to_string(t) + ".csv", density_table(s, {basis, amps}, t));
    }
  };
  record(0);
  for (int t = 1; t <= c.schedule.t_max; ++t) {
    try {
      prop.step(amps, Direction::forward);
    } catch (const GridOverflowError&) {
      table.set_meta("overflow_at", std::to_string(t));
      s.write("evolve.csv", table);
      throw;
    }
    const double n2 = amps.squaredNorm();
    log_norm += std::log(n2);
    amps /= std::sqrt(n2);
    record(t);
  }
  s.write("evolve.csv", table);
}

void run_reversal(Session& s) {
  const RunConfig& c = s.config();
  const BasisSpec basis = c.basis();
  const int t_n = c.reversal.t_n;
  TrajectoryOptions topts;
  topts.retain = {t_n};
  topts.retain.insert(topts.retain.end(), c.reversal.snapshot_times.begin(),
                      c.reversal.snapshot_times.end());
  topts.guard = c.guard.guard();
  const ForwardTrajectory traj(c.model, basis, c.sigma, t_n, topts);
  BackwardOptions bopts;
  bopts.insert_p = c.reversal.insert_p;
  bopts.capture_times = c.reversal.snapshot_times;
  bopts.reverse_phi = false;
  const BackwardResult rev = backward_pass(traj, t_n, bopts);

  ResultTable trace = s.table({{"doubled_time", ColumnType::integer},
                               {"time", ColumnType::integer},
                               {"leg", ColumnType::integer},
                               {"log_norm", ColumnType::real},
                               {"p_mean", ColumnType::real},
                               {"p2", ColumnType::real}});
  trace.set_meta("leg", "0 forward, 1 backward");
  trace.set_meta("reversal.t_n", std::to_string(t_n));
  double log_norm = 0.0;
  for (int t = 0; t <= t_n; ++t) {
    if (t > 0) log_norm += std::log(traj.psi_growth()[t - 1]);
    const Moments& m = traj.psi_moments()[t];
    trace.add_row({double(t), double(t), 0.0, log_norm, m.p_mean, m.p2});
  }
  for (const BackwardRecord& r : rev.psi_series) {
    trace.add_row({double(r.doubled_time), double(r.time), 1.0, log_norm + r.log_norm, r.p_mean, r.p2});
  }
  s.write("reversal.csv", trace);

  ResultTable ratio = s.table({{"t_j", ColumnType::integer},
                               {"doubled_time", ColumnType::integer},
                               {"p2_forward", ColumnType::real},
                               {"p2_backward", ColumnType::real},
                               {"ratio", ColumnType::real}});
  for (const ReversalPoint& p : reversal_ratio_series(traj, rev)) {
    ratio.add_row({double(p.t_j), double(p.doubled_time), p.p2_forward, p.p2_backward, p.ratio});
  }
  s.write("reversal_ratio.csv", ratio);

  for (int t : c.reversal.snapshot_times) {
    s.write("density_forward_t" + std::to_string(t) + ".csv", density_table(s, traj.psi(t), t));
    s.write("density_backward_t" + std::to_string(t) + ".csv",
            density_table(s, rev.psi_snapshots.at(t), t));
  }
}

void run_otoc(Session& s) {
  const RunConfig& c = s.config();
  const BasisSpec basis = c.basis();
  SeriesOptions opts;
  opts.guard = c.guard.guard();
  opts.checkpoint_stride = c.schedule.checkpoint_stride;
  opts.threads = c.schedule.threads;
  const std::vector<int> times = c.sample_times();
  s.log() << "otoc: " << times.size() << " samples up to t=" << times.back() << "\n";
  const OtocSeries series = otoc_series(c.model, basis, c.sigma, times, opts);

  std::vector<Column> cols{{"t_n", ColumnType::integer},
                           {"c1", ColumnType::real},
                           {"c2", ColumnType::real}};
  for (auto& col : complex_columns("c3")) cols.push_back(col);
  cols.push_back({"c", ColumnType::real});
  cols.push_back({"p2_R_t0", ColumnType::real});
  cols.push_back({"norm_psi_R_t0", ColumnType::real});
  ResultTable table = s.table(cols);

  std::string failed;
  std::string first_failure;
  for (const OtocSample& x : series.samples) {
    if (!x.point) {
      failed += (failed.empty() ? "" : " ") + std::to_string(x.t_n);
      if (first_failure.empty()) first_failure = x.failure;
      continue;
    }
    const OtocPoint& p = *x.point;
    table.add_row({double(p.t_n), p.c1, p.c2, p.c3.real(), p.c3.imag(), p.c,
                   x.diagnostics.p2_R_t0, x.diagnostics.norm_psi_R_t0});
  }
  if (!failed.empty()) table.set_meta("failed_samples", failed);
  s.write("otoc.csv", table);

  ResultTable forward = s.table({{"t", ColumnType::integer},
                                 {"p_mean", ColumnType::real},
                                 {"p2", ColumnType::real}});
  for (std::size_t t = 0; t < series.forward_moments.size(); ++t) {
    const Moments& m = series.forward_moments[t];
    forward.add_row({double(t), m.p_mean, m.p2});
  }
  s.write("forward.csv", forward);

  if (c.reversal.t_n > 0) run_reversal(s);

  if (!failed.empty()) {
    throw GridOverflowError("samples t_n = " + failed + " failed; first: " + first_failure, kNaN);
  }
}

ClassifierOptions classifier_options(const RunConfig& c) {
  ClassifierOptions o;
  o.n_modes = c.n_modes;
  o.sigma = c.sigma;
  o.t_max = c.phase.t_max;
  o.mu_threshold = c.phase.mu_threshold;
  o.r2_min = c.phase.r2_min;
  o.t_max_limit = c.phase.t_max_limit;
  o.guard = c.guard.guard();
  return o;
}

void run_phase_scan(Session& s) {
  const RunConfig& c = s.config();
  if (c.phase.kick_axis.empty()) throw ConfigError("missing_key", "phase.kick_axis", 0, "phase.kick_axis: required by phase-scan");
  if (c.phase.lambda_axis.empty()) throw ConfigError("missing_key", "phase.lambda_axis", 0, "phase.lambda_axis: required by phase-scan");
  const PhaseDiagram d = scan_diagram(c.phase.kick_axis, c.phase.lambda_axis, c.model.hbar_eff,
                                      classifier_options(c), c.phase.threads);
  ResultTable table = s.table({{"kick_strength", ColumnType::real},
                               {"lambda", ColumnType::real},
                               {"mu", ColumnType::real},
                               {"r_squared", ColumnType::real},
                               {"log_mean_norm", ColumnType::real},
                               {"label", ColumnType::integer},
                               {"inconclusive", ColumnType::integer},
                               {"t_max_used", ColumnType::integer}});
  table.set_meta("label", "0 unbroken, 1 broken");
  int inconclusive = 0;
  for (const PhaseCell& cell : d.cells) {
    const Classification& k = cell.classification;
    table.add_row({cell.kick_strength, cell.non_hermiticity, k.mu, k.r_squared, k.mean_log_norm,
                   k.label == PhaseLabel::broken ? 1.0 : 0.0, k.inconclusive ? 1.0 : 0.0,
                   double(k.t_max_used)});
    if (k.inconclusive) ++inconclusive;
  }
  if (inconclusive) s.log() << "phase-scan: " << inconclusive << " cells hit the grid guard\n";
  s.write("phase_diagram.csv", table);
}

void run_lambda_c(Session& s) {
  const RunConfig& c = s.config();
  const LambdaCResult r = find_lambda_c(c.model.kick_strength, c.model.hbar_eff, c.lambda_c.lo,
                                        c.lambda_c.hi, c.lambda_c.tol, classifier_options(c));
  ResultTable table = s.table({{"kick_strength", ColumnType::real},
                               {"hbar_eff", ColumnType::real},
                               {"lambda_c", ColumnType::real},
                               {"bracket_lo", ColumnType::real},
                               {"bracket_hi", ColumnType::real},
                               {"evaluations", ColumnType::integer}});
  table.add_row({c.model.kick_strength, c.model.hbar_eff, r.lambda_c, r.bracket_lo, r.bracket_hi,
                 double(r.evaluations)});
  s.write("lambda_c.csv", table);
}

std::vector<Column> fit_columns() {
  return {{"value", ColumnType::real},      {"prefactor", ColumnType::real},
          {"r_squared", ColumnType::real},  {"window_lo", ColumnType::real},
          {"window_hi", ColumnType::real},  {"points", ColumnType::integer}};
}

double meta_real(const ResultTable& t, const std::string& key, const std::string& path) {
  const auto v = t.meta(key);
  const auto x = v ? parse_real(*v) : std::nullopt;
  if (!x) throw SchemaMismatchError("'" + path + "' has no numeric '" + key + "' metadata");
  return *x;
}

void require_pairing(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError("inconsistent_pairing", key, 0, key + ": " + what);
}

void run_fit(Session& s) {
  const RunConfig& c = s.config();
  const FitConfig& f = c.fit;
  if (f.inputs.empty()) throw ConfigError("missing_key", "fit.inputs", 0, "fit.inputs: required by fit");
  const TimeWindow pinned{f.window_lo, f.window_hi};
  // Unpinned windows fall back to the documented defaults of each fit kind.
  auto window_for = [&](const Eigen::VectorXd& x) {
    if (!pinned.unbounded()) return pinned;
    switch (f.kind) {
      case FitKind::power_law:
        return default_power_law_window(x);
      case FitKind::time_avg:
      case FitKind::k_scaling:
      case FitKind::growth_rate:
        return default_saturation_window(x);
      default:
        return pinned;
    }
  };
  ResultTable out = s.table(fit_columns());
  out.set_meta("fit.kind", to_string(f.kind));
  out.set_meta("fit.x", f.x);
  out.set_meta("fit.y", f.y);

  auto load = [&](const std::string& input) { return read_table(s.resolve(input)); };
  auto add = [&](const FitResult& r) {
    out.add_row({r.value, r.prefactor, r.r_squared, r.window_lo, r.window_hi, double(r.points)});
  };

  if (f.kind == FitKind::k_scaling) {
    ResultTable avg = s.table({{"kick_strength", ColumnType::real}, {"c_bar", ColumnType::real}});
    std::vector<std::pair<double, double>> rows;
    for (const auto& input : f.inputs) {
      const ResultTable t = load(input);
      const std::string path = s.resolve(input);
      require_pairing(meta_real(t, "model.hbar_eff", path) == c.model.hbar_eff, "model.hbar_eff",
                      "'" + path + "' was computed with a different hbar_eff");
      const Eigen::VectorXd x = t.column(f.x);
      rows.emplace_back(meta_real(t, "model.kick_strength", path),
                        time_avg(x, t.column(f.y), window_for(x)));
    }
    std::sort(rows.begin(), rows.end());
    Eigen::VectorXd k(static_cast<Eigen::Index>(rows.size()));
    Eigen::VectorXd cb(k.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      k(i) = rows[i].first;
      cb(i) = rows[i].second;
      avg.add_row({rows[i].first, rows[i].second});
    }
    s.write("k_scaling.csv", avg);
    add(k_scaling_exponent(k, cb));
    s.write("fit.csv", out);
    return;
  }

  if (f.inputs.size() != 1) {
    throw ConfigError("invalid_value", "fit.inputs", 0,
                      std::string("fit.inputs: kind ") + to_string(f.kind) + " takes exactly one table");
  }
  const std::string path = s.resolve(f.inputs.front());
  const ResultTable t = load(f.inputs.front());
  const Eigen::VectorXd xcol = f.kind == FitKind::localization ? Eigen::VectorXd() : t.column(f.x);
  const TimeWindow window = f.kind == FitKind::localization ? pinned : window_for(xcol);
  switch (f.kind) {
    case FitKind::power_law:
      add(fit_power_law(xcol, t.column(f.y), window));
      break;
    case FitKind::ballistic_quadratic:
      add(fit_ballistic_rate(xcol, t.column(f.y), BallisticMode::quadratic, window));
      break;
    case FitKind::ballistic_linear:
      add(fit_ballistic_rate(xcol, t.column(f.y), BallisticMode::linear, window));
      break;
    case FitKind::time_avg: {
      const Eigen::VectorXd& x = xcol;
      double lo = INFINITY;
      double hi = -INFINITY;
      Eigen::Index n = 0;
      for (double v : x) {
        if (!window.contains(v)) continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        ++n;
      }
      out.add_row({time_avg(x, t.column(f.y), window), kNaN, kNaN, lo, hi, double(n)});
      break;
    }
    case FitKind::growth_rate: {
      const Eigen::VectorXd& x = xcol;
      const Eigen::VectorXd y = t.column(f.y);
      std::vector<double> xs, ys;
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (window.contains(x(i))) {
          xs.push_back(x(i));
          ys.push_back(y(i));
        }
      }
      if (static_cast<Eigen::Index>(xs.size()) < kMinGrowthWindow) {
        throw FitError("window_too_short", "growth fit window needs at least 10 samples");
      }
      const LinearFit line = least_squares(
          Eigen::Map<const Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size())),
          Eigen::Map<const Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size())));
      out.add_row({line.slope, std::exp(line.intercept), line.r_squared, xs.front(), xs.back(),
                   double(line.points)});
      break;
    }
    case FitKind::localization: {
      require_pairing(meta_real(t, "model.hbar_eff", path) == c.model.hbar_eff, "model.hbar_eff",
                      "density table and config disagree on hbar_eff");
      require_pairing(meta_real(t, "basis.n_modes", path) == c.n_modes &&
                          t.row_count() == static_cast<std::size_t>(c.n_modes),
                      "basis.n_modes", "density table and config disagree on the grid size");
      add(fit_localization_length(t.column(f.y), c.basis()));
      break;
    }
    case FitKind::k_scaling:
      break;
  }
  out.set_meta("input", path);
  s.write("fit.csv", out);
}

void run_plot(Session& s) {
  const PlotConfig& p = s.config().plot;
  if (p.input.empty()) throw ConfigError("missing_key", "plot.input", 0, "plot.input: required by plot");
  const ResultTable t = read_table(s.resolve(p.input));
  std::string svg;
  if (p.kind == PlotKind::line) {
    LinePlot plot{p.title, p.x, p.y.size() == 1 ? p.y.front() : "", p.log_x, p.log_y, {}};
    const Eigen::VectorXd x = t.column(p.x);
    for (const auto& name : p.y) plot.series.push_back({name, x, t.column(name)});
    svg = render_svg(plot);
  } else {
    const Eigen::VectorXd xs = t.column(p.x);
    const Eigen::VectorXd ys = t.column(p.y.front());
    const Eigen::VectorXd zs = t.column(p.z);
    std::vector<double> xa(xs.begin(), xs.end());
    std::vector<double> ya(ys.begin(), ys.end());
    for (auto* axis : {&xa, &ya}) {
      std::sort(axis->begin(), axis->end());
      axis->erase(std::unique(axis->begin(), axis->end()), axis->end());
    }
    HeatPlot plot{p.title, p.x, p.y.front(), xa, ya,
                  Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(ya.size()),
                                            static_cast<Eigen::Index>(xa.size()), kNaN),
                  p.log_x, p.log_y};
    for (Eigen::Index i = 0; i < xs.size(); ++i) {
      const auto ix = std::lower_bound(xa.begin(), xa.end(), xs(i)) - xa.begin();
      const auto iy = std::lower_bound(ya.begin(), ya.end(), ys(i)) - ya.begin();
      plot.z(iy, ix) = zs(i);
    }
    svg = render_svg(plot);
  }
  s.write_text(p.output, svg);
}

}  // namespace

const std::vector<std::string>& subcommand_names() {
  static const std::vector<std::string> names{"evolve", "otoc", "phase-scan", "lambda-c", "fit", "plot"};
  return names;
}

const char* library_version() { return PTKR_VERSION; }

CommandReport run_subcommand(const std::string& name, const RunConfig& config,
                             const std::string& out_dir, std::ostream& log) {
  static const std::map<std::string, void (*)(Session&)> table{
      {"evolve", run_evolve},   {"otoc", run_otoc}, {"phase-scan", run_phase_scan},
      {"lambda-c", run_lambda_c}, {"fit", run_fit},   {"plot", run_plot}};
  const auto it = table.find(name);
  if (it == table.end()) throw InvalidArgument("unknown subcommand '" + name + "'");
  Session session(name, config, out_dir, log);
  it->second(session);
  return session.report();
}

int exit_code_for(const std::exception& error) {
  if (dynamic_cast<const IoError*>(&error) || dynamic_cast<const SchemaMismatchError*>(&error)) {
    return kExitIo;
  }
  if (dynamic_cast<const GridOverflowError*>(&error) || dynamic_cast<const ZeroStateError*>(&error) ||
      dynamic_cast<const FitError*>(&error)) {
    return kExitNumerical;
  }
  if (dynamic_cast<const ConfigError*>(&error) || dynamic_cast<const InvalidArgument*>(&error) ||
      dynamic_cast<const BracketError*>(&error)) {
    return kExitConfig;
  }
  if (dynamic_cast<const std::filesystem::filesystem_error*>(&error)) return kExitIo;
  return kExitConfig;
}

std::string error_record(const std::string& subcommand, const std::exception& error) {
  nlohmann::ordered_json j;
  j["status"] = "error";
  j["subcommand"] = subcommand;
  j["exit_code"] = exit_code_for(error);
  const auto* e = dynamic_cast<const Error*>(&error);
  j["code"] = e ? e->code() : "internal";
  j["message"] = error.what();
  if (const auto* ce = dynamic_cast<const ConfigError*>(&error)) {
    j["key"] = ce->key();
    j["line"] = ce->line();
  }
  if (const auto* ge = dynamic_cast<const GridOverflowError*>(&error)) {
    if (std::isfinite(ge->tail_mass())) j["tail_mass"] = ge->tail_mass();
  }
  return j.dump();
}

}  // namespace ptkr
