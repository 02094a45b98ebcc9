#pragma once

// apkin run|cfl|convergence|energy-audit|limit-check|verify-lemmas
//       [--config PATH] [--out DIR] [--seed U64] [--resolutions LIST]
//
// Exit codes: 0 all assertions passed, 1 an assertion failed, 2 numerical
// failure, 3 configuration or usage error.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "apkin/ap_scheme.hpp"
#include "apkin/config.hpp"
#include "apkin/diagnostics.hpp"
#include "apkin/errors.hpp"
#include "apkin/lemmas.hpp"
#include "apkin/output.hpp"
#include "apkin/reference_solvers.hpp"

namespace apkin {

enum ExitCode : int { kExitOk = 0, kExitAssertion = 1, kExitNumerical = 2, kExitConfig = 3 };

struct CliOptions {
  std::string command;
  std::optional<std::string> config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> resolutions;
};

namespace cli_detail {

struct Context {
  RunConfig config;
  std::filesystem::path out;
  std::uint64_t hash = 0;
  std::ostream& out_stream;
  std::ostream& err_stream;

  bool csv() const {
    return std::find(config.formats.begin(), config.formats.end(), "csv") != config.formats.end();
  }
  bool json() const {
    return std::find(config.formats.begin(), config.formats.end(), "json") != config.formats.end();
  }

  void write_json(const std::string& name, nlohmann::ordered_json j) const {
    if (!json()) return;
    j["config_hash"] = provenance_line(hash).substr(std::string("# config_hash=").size(), 18);
    j["version"] = kVersion;
    write_atomic(out / name, j.dump(2) + "\n");
  }
};

inline bool source_free(const RunConfig& c) {
  return c.source.mean == 0.0 && c.source.amplitude == 0.0;
}

// Asserts and reports one named invariant; returns whether it held.
inline bool check(std::ostream& os, const std::string& name, bool ok, const std::string& detail) {
  os << (ok ? "PASS " : "FAIL ") << name << ": " << detail << '\n';
  return ok;
}

inline std::string fmt(double x) { return detail::format_double(x); }

inline CsvTable energy_table(const std::vector<EnergyRecord>& records) {
  CsvTable t({"step", "time", "rho_norm_sq", "g_norm_sq", "energy"});
  for (const EnergyRecord& r : records)
    t.add_row({static_cast<std::uint64_t>(r.step_index), r.time, r.rho_norm_sq, r.g_norm_sq, r.energy});
  return t;
}

inline InitialData initial_data(const RunConfig& c) {
  const Coefficient rho = c.initial_rho.function(c.length);
  if (c.initial_kind == InitialKind::anisotropic) {
    const double w = 2.0 * std::numbers::pi / c.length;
    const double a = c.initial_g;
    return [rho, a, w](double x, double v) { return rho(x) + a * v * std::cos(w * x); };
  }
  if (c.initial_kind == InitialKind::random)
    throw ConfigError(0, "initial.kind", "random data has no grid-independent form; use "
                                         "well-prepared or anisotropic for this command");
  return [rho](double x, double) { return rho(x); };
}

inline int cmd_run(const Context& ctx) {
  const RunConfig& c = ctx.config;
  const ApScheme scheme(make_problem(c));
  const MicroMacroState initial = make_initial_state(c, scheme);
  RunOptions opts;
  opts.snapshot_times = c.snapshot_times;
  const DtPolicy policy = c.fixed_dt ? DtPolicy(FixedDt{c.dt}) : DtPolicy(AutoCfl{});
  const RunResult r = run(scheme, initial, c.final_time, policy, opts);
  const DiagnosticsReport d = diagnose(r, source_free(c));

  std::ostream& os = ctx.out_stream;
  os << "steps = " << r.steps << "\ndt = " << fmt(r.dt) << "\ndt_max = " << fmt(r.dt_max)
     << "\nexceeds_cfl = " << (r.exceeds_cfl ? "true" : "false")
     << "\ninitial_layer = " << (r.initial_layer ? "true" : "false") << '\n';

  if (ctx.csv()) {
    energy_table(r.energy).write(ctx.out / "energy.csv", ctx.hash);
    CsvTable density({"time", "x", "rho"});
    auto add = [&](const MicroMacroState& s) {
      for (std::size_t i = 0; i < scheme.grid().cells(); ++i)
        density.add_row({s.time, scheme.grid().node(i), s.rho(i)});
    };
    for (const MicroMacroState& s : r.snapshots) add(s);
    add(r.final_state);
    density.write(ctx.out / "density.csv", ctx.hash);
  }

  bool ok = true;
  const double defect_tol = kZeroAverageTolerance * std::max(1.0, initial.g.max_abs());
  ok &= check(os, "zero-average preservation", r.max_zero_average_defect <= defect_tol,
              "max |<g>| = " + fmt(r.max_zero_average_defect) + ", tolerance " + fmt(defect_tol));
  if (source_free(c) && !r.exceeds_cfl) {
    ok &= check(os, "energy monotonicity", d.energy.monotone,
                "max relative increase " + fmt(d.energy.max_violation));
  } else {
    os << "INFO energy: " << (source_free(c) ? "dt above the stability bound" : "source present")
       << ", not asserted (max relative increase " << fmt(d.energy.max_violation)
       << ", growth fit " << fmt(d.energy.growth_fit) << ")\n";
  }

  nlohmann::ordered_json j;
  j["command"] = "run";
  j["steps"] = r.steps;
  j["final_time"] = c.final_time;
  j["dt"] = r.dt;
  j["dt_max"] = r.dt_max;
  j["exceeds_cfl"] = r.exceeds_cfl;
  j["initial_layer"] = r.initial_layer;
  j["max_zero_average_defect"] = r.max_zero_average_defect;
  j["energy_monotone"] = d.energy.monotone;
  j["energy_max_violation"] = d.energy.max_violation;
  j["energy_initial"] = r.energy.front().energy;
  j["energy_final"] = r.energy.back().energy;
  j["passed"] = ok;
  ctx.write_json("run.json", j);
  return ok ? kExitOk : kExitAssertion;
}

inline int cmd_cfl(const Context& ctx) {
  const RunConfig& c = ctx.config;
  const ApScheme scheme(make_problem(c));
  const CflReport rep = scheme.cfl();
  std::ostream& os = ctx.out_stream;
  os << "dt_max = " << fmt(rep.dt_max) << "\nsigma_tilde = " << fmt(rep.sigma_tilde)
     << "\nmode = " << to_string(rep.mode) << "\nbinding_term = " << to_string(rep.binding_term)
     << "\nerror_estimate_dt = " << fmt(error_estimate_dt(scheme.problem())) << '\n';

  nlohmann::ordered_json j;
  j["command"] = "cfl";
  j["dt_max"] = rep.dt_max;
  j["sigma_tilde"] = rep.sigma_tilde;
  j["mode"] = to_string(rep.mode);
  j["binding_term"] = to_string(rep.binding_term);

  bool ok = true;
  if (!c.sweep_multipliers.empty()) {
    const std::vector<SweepRow> rows =
        cfl_sweep(scheme, make_initial_state(c, scheme), c.sweep_multipliers, c.sweep_steps);
    CsvTable t({"multiplier", "monotone", "growth_rate"});
    for (const SweepRow& r : rows) {
      t.add_row({r.multiplier, r.monotone, r.growth_rate});
      os << "multiplier " << fmt(r.multiplier) << ": monotone = " << (r.monotone ? "true" : "false")
         << ", growth_rate = " << fmt(r.growth_rate) << (r.diverged ? " (diverged)" : "") << '\n';
    }
    if (ctx.csv()) t.write(ctx.out / "cfl.csv", ctx.hash);
    ok = check(os, "energy monotone at multipliers <= 1", sweep_within_bound_monotone(rows),
               std::to_string(rows.size()) + " multipliers swept over " +
                   std::to_string(c.sweep_steps) + " steps");
    nlohmann::ordered_json sweep = nlohmann::ordered_json::array();
    for (const SweepRow& r : rows)
      sweep.push_back({{"multiplier", r.multiplier},
                       {"monotone", r.monotone},
                       {"growth_rate", std::isfinite(r.growth_rate) ? nlohmann::ordered_json(r.growth_rate)
                                                                    : nlohmann::ordered_json("inf")}});
    j["sweep"] = sweep;
  }
  j["passed"] = ok;
  ctx.write_json("cfl.json", j);
  return ok ? kExitOk : kExitAssertion;
}

inline int cmd_convergence(const Context& ctx, const std::vector<std::size_t>& resolutions) {
  const RunConfig& c = ctx.config;
  const ProblemFamily family = [c](std::size_t cells) {
    RunConfig copy = c;
    copy.cells = cells;
    return make_problem(copy);
  };
  const ConvergenceTable table =
      convergence_study(family, initial_data(c), c.final_time, resolutions, c.cfl_mode);

  std::ostream& os = ctx.out_stream;
  CsvTable t({"dx", "dt", "epsilon", "err_rho", "err_g", "order_rho", "order_g"});
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const ConvergenceRow& r : table.rows) {
    t.add_row({r.dx, r.dt, r.epsilon, r.err_rho, r.err_g, r.order_rho, r.order_g});
    os << "cells " << r.cells << ": err_rho = " << fmt(r.err_rho) << ", err_g = " << fmt(r.err_g)
       << ", order_rho = " << fmt(r.order_rho) << ", order_g = " << fmt(r.order_g) << '\n';
    auto num = [](double x) {
      return std::isfinite(x) ? nlohmann::ordered_json(x) : nlohmann::ordered_json(nullptr);
    };
    rows.push_back({{"cells", r.cells}, {"dx", r.dx}, {"dt", r.dt}, {"epsilon", r.epsilon},
                    {"err_rho", r.err_rho}, {"err_g", r.err_g},
                    {"order_rho", num(r.order_rho)}, {"order_g", num(r.order_g)}});
  }
  if (ctx.csv()) t.write(ctx.out / "convergence.csv", ctx.hash);

  bool ok = true;
  const double order = table.finest_order_rho();
  if (c.order_min || c.order_max) {
    const double lo = c.order_min.value_or(-std::numeric_limits<double>::infinity());
    const double hi = c.order_max.value_or(std::numeric_limits<double>::infinity());
    ok = check(os, "finest-pair order for rho", order >= lo && order <= hi,
               fmt(order) + " against [" + fmt(lo) + ", " + fmt(hi) + "]");
  }
  nlohmann::ordered_json j;
  j["command"] = "convergence";
  j["cfl_mode"] = to_string(table.mode);
  j["reference_cells"] = table.reference_cells;
  j["rows"] = rows;
  j["passed"] = ok;
  ctx.write_json("convergence.json", j);
  return ok ? kExitOk : kExitAssertion;
}

inline int cmd_energy_audit(const Context& ctx) {
  const RunConfig& c = ctx.config;
  const ApScheme scheme(make_problem(c));
  const MicroMacroState initial = make_initial_state(c, scheme);
  const DtPolicy policy = c.fixed_dt ? DtPolicy(FixedDt{c.dt}) : DtPolicy(AutoCfl{});
  const RunResult r = run(scheme, initial, c.final_time, policy);
  const DiagnosticsReport d = diagnose(r, source_free(c));
  if (ctx.csv()) energy_table(r.energy).write(ctx.out / "energy.csv", ctx.hash);

  std::ostream& os = ctx.out_stream;
  os << "steps = " << r.steps << ", dt = " << fmt(r.dt) << ", dt_max = " << fmt(r.dt_max) << '\n';
  bool ok = true;
  const double defect_tol = kZeroAverageTolerance * std::max(1.0, initial.g.max_abs());
  ok &= check(os, "zero-average preservation", r.max_zero_average_defect <= defect_tol,
              "max |<g>| = " + fmt(r.max_zero_average_defect));
  if (d.energy.linear_growth_mode) {
    os << "INFO linear-growth mode: E^n <= E^0 + t_n * " << fmt(d.energy.growth_fit) << '\n';
  } else if (r.exceeds_cfl) {
    os << "INFO dt exceeds the stability bound; monotone = " << (d.energy.monotone ? "true" : "false")
       << " (not asserted)\n";
  } else {
    ok &= check(os, "energy monotonicity", d.energy.monotone,
                "max relative increase " + fmt(d.energy.max_violation) + " over " +
                    std::to_string(r.steps) + " steps");
  }
  nlohmann::ordered_json j;
  j["command"] = "energy-audit";
  j["seed"] = c.seed;
  j["steps"] = r.steps;
  j["dt"] = r.dt;
  j["monotone"] = d.energy.monotone;
  j["max_violation"] = d.energy.max_violation;
  j["linear_growth_mode"] = d.energy.linear_growth_mode;
  j["growth_fit"] = d.energy.growth_fit;
  j["max_zero_average_defect"] = r.max_zero_average_defect;
  j["passed"] = ok;
  ctx.write_json("energy-audit.json", j);
  return ok ? kExitOk : kExitAssertion;
}

inline int cmd_limit_check(const Context& ctx) {
  const RunConfig& c = ctx.config;
  const ApScheme scheme(make_problem(c));
  const DiffusionProblem dp = make_diffusion_problem(scheme);
  const double dt = c.fixed_dt ? c.dt : std::min(scheme.cfl().dt_max, diffusion_stable_dt(dp));
  RunOptions opts;
  opts.record_energy = false;
  const RunResult r = run(scheme, make_initial_state(c, scheme), c.final_time, FixedDt{dt}, opts);
  const DiffusionRun d = run_diffusion(dp, r.initial.rho, dt, c.final_time);

  double diff = 0.0;
  CsvTable t({"x", "rho_ap", "rho_diffusion"});
  for (std::size_t i = 0; i < scheme.grid().cells(); ++i) {
    diff = std::max(diff, std::abs(r.final_state.rho(i) - d.final_state()(i)));
    t.add_row({scheme.grid().node(i), r.final_state.rho(i), d.final_state()(i)});
  }
  if (ctx.csv()) t.write(ctx.out / "limit.csv", ctx.hash);

  std::ostream& os = ctx.out_stream;
  os << "epsilon = " << fmt(c.epsilon) << ", dt = " << fmt(dt) << ", steps = " << r.steps
     << ", kappa = " << fmt(dp.kappa_faces.front()) << '\n';
  const bool ok = check(os, "AP limit agreement", diff <= c.limit_tolerance,
                        "max |rho_AP - rho_diffusion| = " + fmt(diff) + ", tolerance " +
                            fmt(c.limit_tolerance));
  nlohmann::ordered_json j;
  j["command"] = "limit-check";
  j["epsilon"] = c.epsilon;
  j["dt"] = dt;
  j["steps"] = r.steps;
  j["max_difference"] = diff;
  j["tolerance"] = c.limit_tolerance;
  j["passed"] = ok;
  ctx.write_json("limit-check.json", j);
  return ok ? kExitOk : kExitAssertion;
}

inline int cmd_verify_lemmas(std::ostream& os, std::optional<std::uint64_t> seed) {
  LemmaSuiteOptions o;
  if (seed) o.seed = *seed;
  const std::vector<LemmaCheck> checks = lemma_suite(o);
  for (const LemmaCheck& c : checks)
    check(os, c.name, c.passed,
          "worst " + fmt(c.worst) + (c.detail.empty() ? "" : " (" + c.detail + ")"));
  return all_passed(checks) ? kExitOk : kExitAssertion;
}

inline std::vector<std::size_t> parse_resolutions(const std::string& text) {
  std::vector<std::size_t> out;
  for (const std::string& item : detail::split(text, ',')) {
    std::uint64_t n = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), n);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size())
      throw ConfigError(0, "--resolutions", "cannot parse '" + item + "' as a cell count");
    out.push_back(n);
  }
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(0, "--config", "cannot read '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace cli_detail

/// Executes one parsed command; all errors are mapped to exit codes.
inline int execute(const CliOptions& o, std::ostream& out, std::ostream& err) {
  using namespace cli_detail;
  try {
    if (o.command == "verify-lemmas") return cmd_verify_lemmas(out, o.seed);
    if (!o.config_path) throw ConfigError(0, "--config", "this command needs a configuration file");
    RunConfig config = parse_config(read_file(*o.config_path));
    if (o.seed) config.seed = *o.seed;
    if (o.out_dir) config.output_dir = *o.out_dir;
    Context ctx{config, config.output_dir, config_hash(config), out, err};
    if (o.command == "run") return cmd_run(ctx);
    if (o.command == "cfl") return cmd_cfl(ctx);
    if (o.command == "convergence")
      return cmd_convergence(ctx, o.resolutions ? parse_resolutions(*o.resolutions) : config.resolutions);
    if (o.command == "energy-audit") return cmd_energy_audit(ctx);
    if (o.command == "limit-check") return cmd_limit_check(ctx);
    throw ConfigError(0, "", "unknown command '" + o.command + "'");
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.message();
    if (e.face()) err << " [face " << *e.face() << "]";
    if (e.step()) err << " [step " << *e.step() << "]";
    err << '\n';
    return kExitNumerical;
  } catch (const InvalidKernel& e) {
    err << "error: invalid kernel: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"Micro-macro asymptotic-preserving solver for 1D linear kinetic transport", "apkin"};
  app.fallthrough();
  app.require_subcommand(1);
  CliOptions o;
  std::string config;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::string resolutions;
  auto* config_opt = app.add_option("--config", config, "configuration file");
  auto* out_opt = app.add_option("--out", out_dir, "output directory (overrides output.dir)");
  auto* seed_opt = app.add_option("--seed", seed, "seed for random initial data");
  auto* res_opt = app.add_option("--resolutions", resolutions, "comma-separated cell counts");
  const std::pair<const char*, const char*> commands[] = {
      {"run", "advance the configured problem and write energy and density artifacts"},
      {"cfl", "print the stability bound; sweep dt multipliers when cfl.multipliers is set"},
      {"convergence", "self-convergence study against a 4x finer run"},
      {"energy-audit", "audit energy monotonicity of the configured run"},
      {"limit-check", "compare against the limit diffusion scheme"},
      {"verify-lemmas", "check discrete identities and finite-difference bounds"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfig;
  }
  o.command = app.get_subcommands().front()->get_name();
  if (*config_opt) o.config_path = config;
  if (*out_opt) o.out_dir = out_dir;
  if (*seed_opt) o.seed = seed;
  if (*res_opt) o.resolutions = resolutions;
  return execute(o, out, err);
}

}  // namespace apkin
