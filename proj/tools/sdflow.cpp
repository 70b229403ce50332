// Batch driver for the coupled Stokes/Darcy time-stepping suite: fixed and
// adaptive runs, convergence sweeps, coefficient checks, and field export.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "sd/fieldio.hpp"
#include "sd/verification.hpp"

namespace {

namespace fs = std::filesystem;
using sd::format_double;

struct Mode {
  sd::Coupling coupling = sd::Coupling::Coupled;
  bool filtered = true;
};

Mode parse_mode(const std::string& text) {
  if (text == "coupled-filtered") return {sd::Coupling::Coupled, true};
  if (text == "coupled-unfiltered") return {sd::Coupling::Coupled, false};
  if (text == "decoupled-filtered") return {sd::Coupling::Decoupled, true};
  if (text == "decoupled-unfiltered") return {sd::Coupling::Decoupled, false};
  throw std::invalid_argument(
      "unknown --mode '" + text +
      "' (expected coupled-filtered, coupled-unfiltered, decoupled-filtered "
      "or decoupled-unfiltered)");
}

const sd::ManufacturedCase& parse_case(const std::string& text) {
  if (text == "test1") return sd::test1_case();
  if (text == "test2") return sd::test2_case();
  throw std::invalid_argument("unknown --case '" + text +
                              "' (expected test1 or test2)");
}

sd::ThetaConfig theta_config_for(double theta, const Mode& mode) {
  sd::ThetaConfig cfg;
  cfg.theta = theta;
  cfg.extrapolation_order = mode.filtered ? 2 : 1;
  cfg.validate();
  return cfg;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  for (double v : parse_double_list(text)) out.push_back(static_cast<int>(v));
  return out;
}

// Flat config file support: values become defaults, flags override.
const std::vector<std::string> kKnownKeys = {
    "case", "mode", "theta", "h", "dt", "schedule", "steps", "eps", "k0", "T",
    "out", "jobs", "seed", "samples", "grid", "tau-min", "tau-max", "k-min",
    "k-max", "max-rejects", "ref-steps"};

std::map<std::string, std::string> load_config(int argc, char** argv) {
  std::string path;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) path = argv[i + 1];
    else if (arg.rfind("--config=", 0) == 0) path = arg.substr(9);
  }
  if (path.empty()) return {};
  auto cfg = sd::parse_config_file(path);
  for (const auto& [key, value] : cfg)
    if (std::find(kKnownKeys.begin(), kKnownKeys.end(), key) == kKnownKeys.end())
      throw std::invalid_argument("config key '" + key + "' is not recognized");
  return cfg;
}

struct ConfigDefaults {
  const std::map<std::string, std::string>& cfg;

  void str(const char* key, std::string& target) const {
    if (auto it = cfg.find(key); it != cfg.end()) target = it->second;
  }
  void num(const char* key, double& target) const {
    if (auto it = cfg.find(key); it != cfg.end()) target = std::stod(it->second);
  }
  void num(const char* key, int& target) const {
    if (auto it = cfg.find(key); it != cfg.end()) target = std::stoi(it->second);
  }
};

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

std::vector<double> schedule_sizes(sd::ScheduleId id, int steps) {
  std::vector<double> ks;
  double t = 0.0;
  for (int m = 0; m < steps; ++m) {
    const double k = sd::schedule_step(id, m, t);
    ks.push_back(k);
    t += k;
  }
  return ks;
}

void print_errors(const char* label,
                  const sd::ManufacturedProblem::VariableErrors& e) {
  std::printf("%s  u=%.6e  p=%.6e  phi=%.6e\n", label, e.u, e.p, e.phi);
}

std::string orders_cell(const std::vector<double>& errs,
                        const std::vector<double>& scales, size_t row,
                        size_t col) {
  if (row == 0) return "";
  return format_double(
      sd::convergence_order(errs[row - 1], errs[row], scales[row - 1], scales[row]));
}

int cmd_run_fixed(const std::map<std::string, std::string>& cfg,
                  std::vector<std::string>& args) {
  CLI::App app{"fixed-step run"};
  app.set_help_flag("--help", "print usage");
  std::string case_name, mode_name = "coupled-filtered", schedule, out;
  double theta = 0.3, dt = 0.0, T = 1.0;
  int h = 8, steps = 40;
  ConfigDefaults d{cfg};
  d.str("case", case_name); d.str("mode", mode_name); d.str("schedule", schedule);
  d.str("out", out); d.num("theta", theta); d.num("dt", dt); d.num("T", T);
  d.num("h", h); d.num("steps", steps);

  app.add_option("--case", case_name);
  app.add_option("--mode", mode_name);
  app.add_option("--theta", theta);
  app.add_option("--h", h);
  app.add_option("--dt", dt);
  app.add_option("--schedule", schedule);
  app.add_option("--steps", steps);
  app.add_option("--T", T);
  app.add_option("--out", out);
  std::string ignored;
  app.add_option("--config", ignored);
  app.parse(std::vector<std::string>(args.rbegin(), args.rend()));

  require(!case_name.empty(), "missing --case (test1 or test2)");
  require((dt > 0.0) != !schedule.empty(),
          "exactly one of --dt and --schedule must be given");

  const Mode mode = parse_mode(mode_name);
  const auto& mc = parse_case(case_name);
  const auto theta_cfg = theta_config_for(theta, mode);
  sd::ManufacturedProblem problem(mc, h);

  sd::FixedRunResult run;
  if (!schedule.empty()) {
    const auto ks = schedule_sizes(sd::schedule_from_name(schedule), steps);
    run = sd::run_fixed(problem, theta_cfg, mode.coupling, mode.filtered, 0.0, ks);
  } else {
    run = sd::run_fixed_dt(problem, theta_cfg, mode.coupling, mode.filtered, 0.0,
                           dt, T);
  }

  std::printf("steps=%zu  t_final=%s  seconds=%.3f\n", run.trajectory.size() - 1,
              format_double(run.trajectory.back().t).c_str(), run.seconds);
  print_errors("final L2 errors   ", problem.final_errors(run.trajectory.back()));
  print_errors("accumulated errors", problem.accumulated_errors(run.trajectory));
  if (!out.empty()) {
    fs::create_directories(out);
    sd::export_fields(run.trajectory.back(), problem.velocity_space(),
                      problem.pressure_space(), problem.head_space(), out);
  }
  return 0;
}

int cmd_run_adaptive(const std::map<std::string, std::string>& cfg,
                     std::vector<std::string>& args) {
  CLI::App app{"adaptive run"};
  app.set_help_flag("--help", "print usage");
  std::string case_name, mode_name = "coupled-filtered", out;
  double theta = 0.3, eps = 0.0, k0 = 0.0, T = 1.0;
  double tau_min = 0.1, tau_max = 2.0, k_min = 1e-8, k_max = 0.5;
  int h = 8, max_rejects = 25;
  ConfigDefaults d{cfg};
  d.str("case", case_name); d.str("mode", mode_name); d.str("out", out);
  d.num("theta", theta); d.num("eps", eps); d.num("k0", k0); d.num("T", T);
  d.num("h", h); d.num("tau-min", tau_min); d.num("tau-max", tau_max);
  d.num("k-min", k_min); d.num("k-max", k_max); d.num("max-rejects", max_rejects);

  app.add_option("--case", case_name);
  app.add_option("--mode", mode_name);
  app.add_option("--theta", theta);
  app.add_option("--h", h);
  app.add_option("--eps", eps);
  app.add_option("--k0", k0);
  app.add_option("--T", T);
  app.add_option("--out", out);
  app.add_option("--tau-min", tau_min);
  app.add_option("--tau-max", tau_max);
  app.add_option("--k-min", k_min);
  app.add_option("--k-max", k_max);
  app.add_option("--max-rejects", max_rejects);
  std::string ignored;
  app.add_option("--config", ignored);
  app.parse(std::vector<std::string>(args.rbegin(), args.rend()));

  require(!case_name.empty(), "missing --case (test1 or test2)");
  require(eps > 0.0, "missing --eps (adaptive tolerance)");

  const Mode mode = parse_mode(mode_name);
  const auto& mc = parse_case(case_name);
  const auto theta_cfg = theta_config_for(theta, mode);
  sd::ManufacturedProblem problem(mc, h);

  sd::ControllerConfig controller;
  controller.epsilon = eps;
  controller.order_exponent = mode.filtered ? 1.0 / 3.0 : 0.5;
  controller.tau_min = tau_min;
  controller.tau_max = tau_max;
  controller.k_min = k_min;
  controller.k_max = k_max;
  controller.max_consecutive_rejections = max_rejects;
  if (k0 <= 0.0) k0 = sd::default_initial_step(eps, controller.order_exponent);

  const auto run = sd::run_adaptive(problem, theta_cfg, mode.coupling,
                                    mode.filtered, controller, 0.0, k0, T);

  const int n_steps = static_cast<int>(run.trajectory.size()) - 1;
  std::printf("steps=%d  rejects=%d  avg_dt=%s  seconds=%.3f\n", n_steps,
              run.rejections, format_double(T / n_steps).c_str(), run.seconds);
  print_errors("final L2 errors   ", problem.final_errors(run.trajectory.back()));
  print_errors("accumulated errors", problem.accumulated_errors(run.trajectory));
  if (!out.empty()) {
    fs::create_directories(out);
    sd::write_file_atomic((fs::path(out) / "step_log.csv").string(),
                          sd::step_log_csv(run.log));
  }
  return 0;
}

int cmd_sweep_time(const std::map<std::string, std::string>& cfg,
                   std::vector<std::string>& args) {
  CLI::App app{"temporal convergence sweep"};
  app.set_help_flag("--help", "print usage");
  std::string case_name, mode_name = "decoupled-filtered", eps_text, out = ".";
  double theta = 0.3, T = 1.0;
  int h = 32, jobs = 1, ref_steps = 600;
  ConfigDefaults d{cfg};
  d.str("case", case_name); d.str("mode", mode_name); d.str("eps", eps_text);
  d.str("out", out); d.num("theta", theta); d.num("T", T); d.num("h", h);
  d.num("jobs", jobs); d.num("ref-steps", ref_steps);

  app.add_option("--case", case_name);
  app.add_option("--mode", mode_name);
  app.add_option("--theta", theta);
  app.add_option("--h", h);
  app.add_option("--eps", eps_text);
  app.add_option("--T", T);
  app.add_option("--out", out);
  app.add_option("--jobs", jobs);
  app.add_option("--ref-steps", ref_steps);
  std::string ignored;
  app.add_option("--config", ignored);
  app.parse(std::vector<std::string>(args.rbegin(), args.rend()));

  require(!case_name.empty(), "missing --case (test1 or test2)");
  require(!eps_text.empty(), "missing --eps (comma-separated tolerances)");

  const Mode mode = parse_mode(mode_name);
  const auto& mc = parse_case(case_name);
  const auto theta_cfg = theta_config_for(theta, mode);
  const auto epsilons = parse_double_list(eps_text);

  sd::ManufacturedProblem problem(mc, h);
  sd::ReferenceTrajectory reference(problem, theta, 0.0, T, ref_steps);
  const auto points =
      sd::run_time_sweep(problem, reference, theta_cfg, mode.coupling,
                         mode.filtered, epsilons, T, sd::ControllerConfig{}, jobs);

  std::vector<double> eu, ep, ephi, scales;
  for (const auto& pt : points) {
    eu.push_back(pt.err_u);
    ep.push_back(pt.err_p);
    ephi.push_back(pt.err_phi);
    scales.push_back(pt.avg_dt);
  }

  std::string csv =
      "epsilon,avg_dt,n_steps,n_rejects,err_u,err_p,err_phi,order_u,order_p,"
      "order_phi,seconds\n";
  for (size_t i = 0; i < points.size(); ++i) {
    const auto& pt = points[i];
    csv += format_double(pt.epsilon) + ',' + format_double(pt.avg_dt) + ',' +
           std::to_string(pt.n_steps) + ',' + std::to_string(pt.n_rejects) + ',' +
           format_double(pt.err_u) + ',' + format_double(pt.err_p) + ',' +
           format_double(pt.err_phi) + ',' + orders_cell(eu, scales, i, 0) + ',' +
           orders_cell(ep, scales, i, 0) + ',' + orders_cell(ephi, scales, i, 0) +
           ',' + format_double(pt.seconds) + '\n';
  }
  fs::create_directories(out);
  sd::write_file_atomic((fs::path(out) / "sweep_time.csv").string(), csv);
  for (size_t i = 0; i < points.size(); ++i)
    sd::write_file_atomic(
        (fs::path(out) / ("step_log_eps" + std::to_string(i) + ".csv")).string(),
        sd::step_log_csv(points[i].log));
  std::fputs(csv.c_str(), stdout);
  if (points.size() >= 2) {
    std::printf("fitted orders: u=%.3f p=%.3f phi=%.3f\n",
                sd::fit_order(eu, scales), sd::fit_order(ep, scales),
                sd::fit_order(ephi, scales));
  }
  return 0;
}

int cmd_sweep_space(const std::map<std::string, std::string>& cfg,
                    std::vector<std::string>& args) {
  CLI::App app{"spatial convergence sweep"};
  app.set_help_flag("--help", "print usage");
  std::string case_name, mode_name = "coupled-filtered", h_text, out = ".";
  double theta = 0.3, dt = 0.01, T = 1.0;
  int jobs = 1;
  ConfigDefaults d{cfg};
  d.str("case", case_name); d.str("mode", mode_name); d.str("h", h_text);
  d.str("out", out); d.num("theta", theta); d.num("dt", dt); d.num("T", T);
  d.num("jobs", jobs);

  app.add_option("--case", case_name);
  app.add_option("--mode", mode_name);
  app.add_option("--theta", theta);
  app.add_option("--dt", dt);
  app.add_option("--h", h_text);
  app.add_option("--T", T);
  app.add_option("--out", out);
  app.add_option("--jobs", jobs);
  std::string ignored;
  app.add_option("--config", ignored);
  app.parse(std::vector<std::string>(args.rbegin(), args.rend()));

  require(!case_name.empty(), "missing --case (test1 or test2)");
  require(!h_text.empty(), "missing --h (comma-separated mesh densities)");

  const Mode mode = parse_mode(mode_name);
  const auto& mc = parse_case(case_name);
  const auto theta_cfg = theta_config_for(theta, mode);
  const auto h_dens = parse_int_list(h_text);

  const auto points = sd::run_space_sweep(mc, theta_cfg, mode.coupling,
                                          mode.filtered, dt, h_dens, T, jobs);

  std::vector<double> eu, ep, ephi, scales;
  for (const auto& pt : points) {
    eu.push_back(pt.err_u);
    ep.push_back(pt.err_p);
    ephi.push_back(pt.err_phi);
    scales.push_back(1.0 / pt.h_den);
  }
  std::string csv = "h,err_u,err_p,err_phi,order_u,order_p,order_phi,seconds\n";
  for (size_t i = 0; i < points.size(); ++i) {
    const auto& pt = points[i];
    csv += format_double(1.0 / pt.h_den) + ',' + format_double(pt.err_u) + ',' +
           format_double(pt.err_p) + ',' + format_double(pt.err_phi) + ',' +
           orders_cell(eu, scales, i, 0) + ',' + orders_cell(ep, scales, i, 0) +
           ',' + orders_cell(ephi, scales, i, 0) + ',' +
           format_double(pt.seconds) + '\n';
  }
  fs::create_directories(out);
  sd::write_file_atomic((fs::path(out) / "sweep_space.csv").string(), csv);
  std::fputs(csv.c_str(), stdout);
  return 0;
}

int cmd_check_theory(const std::map<std::string, std::string>& cfg,
                     std::vector<std::string>& args) {
  CLI::App app{"coefficient identity checks"};
  app.set_help_flag("--help", "print usage");
  int samples = 100000, grid = 50;
  int seed = 7;
  ConfigDefaults d{cfg};
  d.num("samples", samples); d.num("grid", grid); d.num("seed", seed);
  app.add_option("--samples", samples);
  app.add_option("--grid", grid);
  app.add_option("--seed", seed);
  std::string ignored;
  app.add_option("--config", ignored);
  app.parse(std::vector<std::string>(args.rbegin(), args.rend()));

  const auto report = sd::run_theory_checks(grid, samples,
                                            static_cast<std::uint64_t>(seed));
  std::fputs(sd::theory_report_table(report).c_str(), stdout);
  return report.all_pass() ? 0 : 2;
}

int cmd_export_fields(const std::map<std::string, std::string>& cfg,
                      std::vector<std::string>& args) {
  CLI::App app{"run and export final fields"};
  app.set_help_flag("--help", "print usage");
  std::string case_name, mode_name = "coupled-filtered", out;
  double theta = 0.3, dt = 0.01, T = 1.0;
  int h = 8;
  ConfigDefaults d{cfg};
  d.str("case", case_name); d.str("mode", mode_name); d.str("out", out);
  d.num("theta", theta); d.num("dt", dt); d.num("T", T); d.num("h", h);

  app.add_option("--case", case_name);
  app.add_option("--mode", mode_name);
  app.add_option("--theta", theta);
  app.add_option("--h", h);
  app.add_option("--dt", dt);
  app.add_option("--T", T);
  app.add_option("--out", out);
  std::string ignored;
  app.add_option("--config", ignored);
  app.parse(std::vector<std::string>(args.rbegin(), args.rend()));

  require(!case_name.empty(), "missing --case (test1 or test2)");
  require(!out.empty(), "missing --out (export directory)");

  const Mode mode = parse_mode(mode_name);
  const auto& mc = parse_case(case_name);
  const auto theta_cfg = theta_config_for(theta, mode);
  sd::ManufacturedProblem problem(mc, h);
  const auto run = sd::run_fixed_dt(problem, theta_cfg, mode.coupling,
                                    mode.filtered, 0.0, dt, T);
  sd::export_fields(run.trajectory.back(), problem.velocity_space(),
                    problem.pressure_space(), problem.head_space(), out);
  std::printf("exported fields at t=%s to %s\n",
              format_double(run.trajectory.back().t).c_str(), out.c_str());
  return 0;
}

void print_usage() {
  std::fputs(
      "usage: sdflow <subcommand> [flags]\n"
      "subcommands:\n"
      "  run-fixed     --case .. --mode .. --theta .. --h .. (--dt | --schedule k1|k2|k3 --steps N) [--T] [--out]\n"
      "  run-adaptive  --case .. --mode .. --theta .. --h .. --eps .. [--k0] [--T] [--out]\n"
      "  sweep-time    --case .. --mode .. --theta .. --h .. --eps e1,e2,.. [--T] [--out] [--jobs] [--ref-steps]\n"
      "  sweep-space   --case .. --mode .. --theta .. --dt .. --h n1,n2,.. [--T] [--out] [--jobs]\n"
      "  check-theory  [--samples] [--seed] [--grid]\n"
      "  export-fields --case .. --mode .. --theta .. --h .. --dt .. --T .. --out ..\n"
      "Any flag may also appear as `key = value` in a file passed via --config;\n"
      "command-line flags take precedence.\n",
      stderr);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    print_usage();
    return 1;
  }
  const std::string sub = argv[1];
  std::vector<std::string> rest(argv + 2, argv + argc);
  try {
    const auto cfg = load_config(argc, argv);
    if (sub == "run-fixed") return cmd_run_fixed(cfg, rest);
    if (sub == "run-adaptive") return cmd_run_adaptive(cfg, rest);
    if (sub == "sweep-time") return cmd_sweep_time(cfg, rest);
    if (sub == "sweep-space") return cmd_sweep_space(cfg, rest);
    if (sub == "check-theory") return cmd_check_theory(cfg, rest);
    if (sub == "export-fields") return cmd_export_fields(cfg, rest);
    std::fprintf(stderr, "unknown subcommand '%s'\n", sub.c_str());
    print_usage();
    return 1;
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "argument error: %s\n", e.what());
    return 1;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "failure: %s\n", e.what());
    return 2;
  }
}
