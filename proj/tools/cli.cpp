#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "thpsim/config.hpp"
#include "thpsim/decay_fit.hpp"
#include "thpsim/histogram.hpp"
#include "thpsim/pipeline.hpp"
#include "thpsim/report.hpp"

namespace thpsim::cli {

namespace fs = std::filesystem;
using ordered = nlohmann::ordered_json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<long long> frames;
  unsigned workers = 0;
  std::string out;
  bool force = false;
  bool normalize_display = false;
  std::string wavelength = "attack";
  // histogram
  std::string input;
  std::optional<double> trials;
  std::optional<std::size_t> tail_start;
  std::optional<std::size_t> fit_from;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

// Output directory that refuses to clobber existing files unless forced.
class OutputDir {
 public:
  OutputDir(std::string dir, bool force) : dir_(std::move(dir)), force_(force) {}

  void claim(std::initializer_list<std::string> names) {
    for (const auto& n : names) {
      const fs::path p = fs::path(dir_) / n;
      if (fs::exists(p) && !force_) {
        throw std::runtime_error("'" + p.string() + "' exists; pass --force to overwrite");
      }
      files_.push_back(n);
    }
  }

  void write(const std::string& name, const std::string& content) {
    fs::create_directories(dir_);
    const fs::path p = fs::path(dir_) / name;
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write '" + p.string() + "'");
    f << content;
  }

  const std::string& dir() const { return dir_; }
  const std::vector<std::string>& files() const { return files_; }

 private:
  std::string dir_;
  bool force_;
  std::vector<std::string> files_;
};

struct Context {
  std::string command;
  std::vector<std::string> argv;
  Options opt;
  std::ostream& out;
};

std::string resolved_config_path(const Options& opt) {
  if (!opt.config.empty()) return opt.config;
  return THPSIM_DEFAULT_CONFIG;
}

Config load(const Context& ctx) {
  Config cfg = load_config(resolved_config_path(ctx.opt));
  if (ctx.opt.seed) cfg.seed = *ctx.opt.seed;
  if (ctx.opt.frames) {
    if (*ctx.opt.frames < 1) throw UsageError("--frames must be >= 1");
    cfg.frames = static_cast<std::uint64_t>(*ctx.opt.frames);
  }
  return cfg;
}

AttackWavelength wavelength(const Options& opt) {
  if (opt.wavelength == "attack") return AttackWavelength::attack;
  if (opt.wavelength == "signal") return AttackWavelength::signal;
  throw UsageError("--wavelength must be 'attack' or 'signal'");
}

void write_manifest(OutputDir& dir, const Context& ctx, const std::optional<Config>& cfg,
                    ordered extra = ordered::object()) {
  ordered m;
  m["tool"] = "thpsim";
  m["version"] = THPSIM_VERSION;
  m["command"] = ctx.command;
  m["argv"] = ctx.argv;
  if (cfg) {
    const std::string path = resolved_config_path(ctx.opt);
    m["config_path"] = fs::absolute(path).string();
    m["config_text"] = read_file(path);
    m["seed"] = cfg->seed;
    m["frames"] = cfg->frames;
  } else {
    m["config_path"] = nullptr;
  }
  m["workers"] = ctx.opt.workers;
  m["output_dir"] = fs::absolute(dir.dir()).string();
  m["outputs"] = dir.files();
  m["timestamp"] = timestamp_utc();
  for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
  dir.write("manifest.json", m.dump(2) + "\n");
}

std::string default_out(const Options& opt, const std::string& command) {
  return opt.out.empty() ? "thpsim_out/" + command : opt.out;
}

ordered opt_json(const std::optional<double>& v) { return v ? ordered(*v) : ordered(nullptr); }

// ---- budget -------------------------------------------------------------

int cmd_budget(Context& ctx) {
  OutputDir dir(default_out(ctx.opt, "budget"), ctx.opt.force);
  dir.claim({"budget.json", "manifest.json"});
  const Config cfg = load(ctx);
  const BudgetReport b = compute_budget(cfg);

  auto& out = ctx.out;
  out << std::left << std::setw(36) << "path" << std::setw(10) << "profile" << "loss_dB\n";
  for (const auto& l : b.lines) {
    out << std::setw(36) << l.label << std::setw(10) << l.profile << format6(l.loss_db) << '\n';
  }
  out << std::right;
  if (b.mu_at_z) out << "mu at Z (power): " << format6(*b.mu_at_z) << '\n';
  if (b.mu_at_x) out << "mu at X (counting): " << format6(*b.mu_at_x) << '\n';
  if (b.measured_zcx_loss) out << "measured Z-C*-X loss: " << format6(*b.measured_zcx_loss) << " dB\n";
  if (b.rho) out << "rho: " << format6(*b.rho) << '\n';
  for (const auto& n : b.notices) out << "note: " << n << '\n';

  ordered j;
  j["lines"] = ordered::array();
  for (const auto& l : b.lines) {
    j["lines"].push_back({{"path", l.label}, {"profile", l.profile}, {"loss_db", l.loss_db}});
  }
  j["double_pass_signal_db"] = opt_json(b.double_pass_signal);
  j["double_pass_attack_db"] = opt_json(b.double_pass_attack);
  j["circulator_best_db"] = opt_json(b.circulator_best);
  j["circulator_worst_db"] = opt_json(b.circulator_worst);
  j["circulator_midway_db"] = opt_json(b.circulator_midway);
  j["rho"] = opt_json(b.rho);
  j["mu_at_z"] = opt_json(b.mu_at_z);
  j["mu_at_x"] = opt_json(b.mu_at_x);
  j["measured_zcx_loss_db"] = opt_json(b.measured_zcx_loss);
  j["notices"] = b.notices;
  dir.write("budget.json", j.dump(2) + "\n");
  write_manifest(dir, ctx, cfg);
  return exit_code::ok;
}

// ---- factors ------------------------------------------------------------

int cmd_factors(Context& ctx) {
  OutputDir dir(default_out(ctx.opt, "factors"), ctx.opt.force);
  dir.claim({"factors.json", "manifest.json"});
  const Config cfg = load(ctx);
  const Factors f = compute_factors(cfg);
  const std::pair<const char*, const Factor*> rows[] = {
      {"theta_s", &f.theta_s}, {"theta_l", &f.theta_l}, {"rho", &f.rho},       {"nu", &f.nu},
      {"gamma", &f.gamma},     {"delta0", &f.delta0},   {"delta1", &f.delta1},
  };
  ordered j;
  for (const auto& [name, factor] : rows) {
    ctx.out << std::left << std::setw(9) << name << std::right << std::setw(13)
            << format6(factor->value);
    const std::string n = name;
    if (n == "theta_s" || n == "theta_l") {
      ctx.out << "  (" << format6(factor->value / std::numbers::pi) << " pi)";
    }
    ctx.out << "  <- " << factor->provenance << '\n';
    j[name] = {{"value", factor->value}, {"provenance", factor->provenance}};
  }
  dir.write("factors.json", j.dump(2) + "\n");
  write_manifest(dir, ctx, cfg);
  return exit_code::ok;
}

// ---- simulate -----------------------------------------------------------

void print_report(std::ostream& out, const BreachReport& r) {
  const auto& s = r.result;
  out << "frames " << s.frames << ", sifted bits " << s.sifted_count << '\n';
  out << "Q      " << format6(s.qber.value) << "  [" << format6(s.qber.lo) << ", "
      << format6(s.qber.hi) << "]  q_abort " << format6(r.q_abort) << '\n';
  if (s.eve_info) {
    out << "I_act  " << format6(s.eve_info->value) << "  [" << format6(s.eve_info->lo) << ", "
        << format6(s.eve_info->hi) << "]  i_est " << format6(r.i_est) << '\n';
  } else {
    out << "I_act  undefined (nothing sifted)\n";
  }
  out << "detection rate " << format6(s.detection_rate.value) << " per slot, baseline "
      << format6(r.baseline_rate) << ", deviation " << format6(r.rate_deviation) << '\n';
  out << "readout error " << format6(r.readout_error) << '\n';
  out << "breach " << (r.breach ? "yes" : "no") << '\n';
}

int cmd_simulate(Context& ctx) {
  OutputDir dir(default_out(ctx.opt, "simulate"), ctx.opt.force);
  dir.claim({"result.json", "result.csv", "manifest.json"});
  const Config cfg = load(ctx);
  const AttackWavelength wl = wavelength(ctx.opt);
  const auto [d0, d1] = detectors_for(cfg, wl);
  const AttackCombination combo = combination_for(cfg, wl);

  EvalSettings es;
  es.i_est = cfg.i_est;
  es.excess_noise = cfg.excess_noise;
  es.sim.workers = ctx.opt.workers;
  const BreachReport r = evaluate(combo, cfg.frame, d0, d1, cfg.frames, cfg.seed, es);
  print_report(ctx.out, r);

  dir.write("result.json", report_to_json(r));
  std::ostringstream csv;
  const BreachReport one[] = {r};
  write_reports_csv(csv, one);
  dir.write("result.csv", csv.str());
  write_manifest(dir, ctx, cfg,
                 {{"wavelength", ctx.opt.wavelength},
                  {"afterpulse_scale", {d0.afterpulse_scale, d1.afterpulse_scale}}});

  if (r.result.qber.value >= r.q_abort) return exit_code::abort_qber;
  return r.breach ? exit_code::breach : exit_code::no_breach;
}

// ---- optimize -----------------------------------------------------------

int cmd_optimize(Context& ctx) {
  OutputDir dir(default_out(ctx.opt, "optimize"), ctx.opt.force);
  dir.claim({"ranked.json", "ranked.csv", "evaluated.csv", "manifest.json"});
  const Config cfg = load(ctx);
  const AttackWavelength wl = wavelength(ctx.opt);
  const auto [d0, d1] = detectors_for(cfg, wl);
  const ParameterGrid grid = grid_for(cfg, wl);

  OptimizeSettings os;
  os.n_frames = cfg.frames;
  os.seed = cfg.seed;
  os.rate_tolerance = cfg.rate_tolerance;
  os.budget = cfg.budget;
  os.eval.i_est = cfg.i_est;
  os.eval.excess_noise = cfg.excess_noise;
  os.eval.sim.workers = ctx.opt.workers;

  std::vector<AttackCombination> combos = grid.combinations(cfg.frame);
  if (os.budget && combos.size() > *os.budget) combos.resize(*os.budget);
  const double baseline = baseline_detection_rate(cfg.frame, d0, d1, os.n_frames, os.seed, os.eval.sim);
  std::vector<BreachReport> all;
  const Evaluator eval = [&](const AttackCombination& c) {
    all.push_back(evaluate(c, cfg.frame, d0, d1, os.n_frames, os.seed, os.eval, baseline));
    return all.back();
  };
  const std::vector<BreachReport> ranked = optimize(combos, eval, os);

  ctx.out << "evaluated " << all.size() << " combinations, " << ranked.size()
          << " breach within constraints\n";
  const std::size_t shown = std::min<std::size_t>(ranked.size(), 10);
  for (std::size_t i = 0; i < shown; ++i) {
    const auto& r = ranked[i];
    const auto& c = r.combination;
    ctx.out << (i + 1) << ". block " << c.n_block << " lowloss " << c.n_lowloss << " t_ll "
            << format6(c.t_ll) << " thp " << c.n_thp_slots << "/" << c.n_bursts << "x"
            << c.burst_len << " mu " << format6(c.readout_mu) << " : Q "
            << format6(r.result.qber.value) << " I "
            << format6(r.result.eve_info ? r.result.eve_info->value : 0.0) << " dev "
            << format6(r.rate_deviation) << '\n';
  }

  dir.write("ranked.json", reports_to_json(ranked));
  std::ostringstream csv;
  write_reports_csv(csv, ranked);
  dir.write("ranked.csv", csv.str());
  std::ostringstream csv_all;
  write_reports_csv(csv_all, all);
  dir.write("evaluated.csv", csv_all.str());
  write_manifest(dir, ctx, cfg,
                 {{"wavelength", ctx.opt.wavelength},
                  {"combinations", all.size()},
                  {"rate_tolerance", opt_json(cfg.rate_tolerance)}});
  return ranked.empty() ? exit_code::no_breach : exit_code::ok;
}

// ---- histogram ----------------------------------------------------------

int cmd_histogram(Context& ctx) {
  OutputDir dir(default_out(ctx.opt, "histogram"), ctx.opt.force);
  if (ctx.opt.normalize_display) {
    dir.claim({"corrected.csv", "histogram.json", "display.csv", "manifest.json"});
  } else {
    dir.claim({"corrected.csv", "histogram.json", "manifest.json"});
  }
  CountHistogram raw = read_histogram_csv_file(ctx.opt.input);
  if (ctx.opt.trials) raw.trials = *ctx.opt.trials;
  raw.validate();
  const CountHistogram corrected = raw.trials ? saturation_correct(raw) : raw;
  const std::size_t n = corrected.counts.size();
  const std::size_t tail = ctx.opt.tail_start.value_or(n / 2);
  const SplitCounts split = split_counts(corrected, tail);

  const auto peak = std::max_element(corrected.counts.begin(), corrected.counts.end());
  const std::size_t first = ctx.opt.fit_from.value_or(
      static_cast<std::size_t>(peak - corrected.counts.begin()));
  const DecayFit fit = fit_two_exponential(corrected, first);

  auto& out = ctx.out;
  out << "bins " << n << " x " << format6(corrected.bin_width_s) << " s, raw total "
      << format6(raw.total()) << ", corrected total " << format6(corrected.total()) << '\n';
  if (!raw.trials) out << "note: no trial count given, saturation correction skipped\n";
  out << "ApC " << format6(split.afterpulse) << "  DC " << format6(split.dark) << "  tail level "
      << format6(split.tail_level) << " per bin\n";
  if (fit.degenerate) {
    out << "fit: degenerate (no decay above the floor)\n";
  } else {
    out << "fit: floor " << format6(fit.floor);
    for (const auto& c : fit.components) {
      out << "  A " << format6(c.amplitude) << " tau " << format6(c.lifetime_s) << " s";
    }
    out << "  rms residual " << format6(fit.rms_residual)
        << (fit.converged ? "" : "  (not converged)") << '\n';
  }

  std::ostringstream csv;
  write_histogram_csv(csv, corrected);
  dir.write("corrected.csv", csv.str());

  ordered j;
  j["input"] = ctx.opt.input;
  j["trials"] = opt_json(raw.trials);
  j["bin_width_s"] = corrected.bin_width_s;
  j["start_s"] = corrected.start_s;
  j["raw_counts"] = raw.counts;
  j["corrected_counts"] = corrected.counts;
  j["tail_start"] = tail;
  j["split"] = {{"afterpulse", split.afterpulse},
                {"dark", split.dark},
                {"tail_level", split.tail_level},
                {"no_afterpulse_signal", split.no_afterpulse_signal}};
  ordered comps = ordered::array();
  for (const auto& c : fit.components) {
    comps.push_back({{"amplitude", c.amplitude}, {"lifetime_s", c.lifetime_s}});
  }
  j["fit"] = {{"first_bin", first},       {"floor", fit.floor},
              {"components", comps},      {"chi2", fit.chi2},
              {"rms_residual", fit.rms_residual}, {"converged", fit.converged},
              {"degenerate", fit.degenerate},     {"residuals", fit.residuals}};
  if (ctx.opt.normalize_display) {
    const std::vector<double> norm = normalize_for_display(corrected, split.tail_level);
    j["display"] = norm;
    std::ostringstream d;
    d << std::setprecision(6) << "bin_start_s,normalized\n";
    for (std::size_t i = 0; i < norm.size(); ++i) d << corrected.bin_start(i) << ',' << norm[i] << '\n';
    dir.write("display.csv", d.str());
  }
  dir.write("histogram.json", j.dump(2) + "\n");
  write_manifest(dir, ctx, std::nullopt,
                 {{"input", fs::absolute(ctx.opt.input).string()},
                  {"trials", opt_json(ctx.opt.trials)},
                  {"tail_start", tail},
                  {"normalize_display", ctx.opt.normalize_display}});
  return exit_code::ok;
}

void add_common(CLI::App* sub, Options& o, bool simulation) {
  sub->add_option("--config", o.config, "JSON configuration file (default: shipped config)");
  sub->add_option("--out", o.out, "output directory (default: thpsim_out/<command>)");
  sub->add_flag("--force", o.force, "overwrite existing output files");
  if (simulation) {
    sub->add_option("--seed", o.seed, "RNG seed (overrides the config)");
    sub->add_option("--frames", o.frames, "number of frames (overrides the config)");
    sub->add_option("--workers", o.workers, "worker threads, 0 = available parallelism")
        ->capture_default_str();
    sub->add_option("--wavelength", o.wavelength, "probe wavelength: attack or signal")
        ->check(CLI::IsMember({"attack", "signal"}))
        ->capture_default_str();
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Long-wavelength Trojan-horse attack simulator for a Clavis2-type receiver"};
  app.name("thpsim");
  app.footer(
      "Exit codes (simulate, optimize): 0 breach, 2 no breach, 3 QBER at or above q_abort\n"
      "(simulate only), 1 runtime error, 64 usage error.");
  app.require_subcommand(1);
  app.set_version_flag("--version", THPSIM_VERSION);

  Options opt;
  auto* budget = app.add_subcommand("budget", "optical path losses and rho");
  add_common(budget, opt, false);
  auto* factors = app.add_subcommand("factors", "theta_l, nu, gamma, delta0, delta1");
  add_common(factors, opt, false);
  auto* simulate = app.add_subcommand("simulate", "run one attack combination");
  add_common(simulate, opt, true);
  auto* optimize_cmd = app.add_subcommand("optimize", "grid search over attack combinations");
  add_common(optimize_cmd, opt, true);
  auto* histogram = app.add_subcommand("histogram", "afterpulse histogram analysis");
  histogram->add_option("input", opt.input, "histogram CSV (bin_start_s,counts)")->required();
  histogram->add_option("--trials", opt.trials, "THP injections, enables saturation correction");
  histogram->add_option("--tail-start", opt.tail_start, "first bin of the dark tail (default: n/2)");
  histogram->add_option("--fit-from", opt.fit_from, "first bin of the decay fit (default: peak)");
  histogram->add_flag("--normalize-display", opt.normalize_display,
                      "also emit floor-to-peak normalized counts");
  histogram->add_option("--out", opt.out, "output directory (default: thpsim_out/histogram)");
  histogram->add_flag("--force", opt.force, "overwrite existing output files");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_code::ok : exit_code::usage;
  }

  if (opt.frames && *opt.frames < 1) {
    err << "usage error: --frames must be >= 1\n";
    return exit_code::usage;
  }

  Context ctx{"", args, opt, out};
  try {
    if (*budget) {
      ctx.command = "budget";
      return cmd_budget(ctx);
    }
    if (*factors) {
      ctx.command = "factors";
      return cmd_factors(ctx);
    }
    if (*simulate) {
      ctx.command = "simulate";
      return cmd_simulate(ctx);
    }
    if (*optimize_cmd) {
      ctx.command = "optimize";
      return cmd_optimize(ctx);
    }
    ctx.command = "histogram";
    return cmd_histogram(ctx);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return exit_code::usage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::error;
  }
}

}  // namespace thpsim::cli
