#pragma once

// Flat `section.key = value` run configuration with `#` comments.
//
//   problem.epsilon          required, >= 1e-12
//   problem.sigma            number | sine(mean, amp, k) | cosine(mean, amp, k)   default 1
//   problem.sigma_a          same forms, non-negative                            default 0
//   problem.source           same forms                                          default 0
//   problem.kernel           isotropic | constant(c) | linear-anisotropic(b) | custom-table
//   problem.kernel_table     rows separated by ';', entries by spaces (custom-table only)
//   problem.kernel_min/max   bounds asserted for the custom table
//   problem.velocity_nodes   even, >= 2                                          default 16
//   problem.velocity_rule    gauss-legendre | two-point-telegraph  (default: telegraph for 2 nodes)
//   problem.absorption_mode  implicit | explicit                                 default implicit
//   grid.cells               required, >= 4
//   grid.length              default 1
//   time.final               required, >= 0
//   time.dt_policy           auto | fixed                                        default auto
//   time.dt                  required when dt_policy = fixed
//   initial.kind             well-prepared | anisotropic | random                default well-prepared
//   initial.rho              coefficient form for the density profile            default sine(1, 0.5, 1)
//   initial.g                amplitude a of the anisotropic part a v cos(2 pi x / L)   default 0.3
//   initial.seed             random data seed                                    default 1
//   output.dir, output.formats (csv, json), output.snapshot_times
//   convergence.cfl_mode     parabolic | hyperbolic | error-cfl                   default error-cfl
//   convergence.resolutions  cell counts                                         default 32, 64, 128
//   convergence.order_min/max  accepted finest-pair order for rho (optional)
//   limit.tolerance          default 1e-6
//   cfl.multipliers, cfl.steps   optional dt sweep
//
// f = mean + amp sin(2 pi k x / L) for sine(...), cos for cosine(...).

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "apkin/ap_scheme.hpp"
#include "apkin/diagnostics.hpp"
#include "apkin/errors.hpp"
#include "apkin/random.hpp"
#include "apkin/velocity.hpp"

namespace apkin {

struct CoefficientSpec {
  enum class Kind { constant, sine, cosine };
  Kind kind = Kind::constant;
  double mean = 0.0;
  double amplitude = 0.0;
  double wavenumber = 1.0;

  static CoefficientSpec constant(double c) { return {Kind::constant, c, 0.0, 1.0}; }
  static CoefficientSpec sine(double mean, double amp, double k) { return {Kind::sine, mean, amp, k}; }

  double min() const { return mean - std::abs(amplitude); }
  double max() const { return mean + std::abs(amplitude); }

  Coefficient function(double length) const {
    const double w = 2.0 * std::numbers::pi * wavenumber / length;
    switch (kind) {
      case Kind::constant: return constant_coefficient(mean);
      case Kind::sine: return [m = mean, a = amplitude, w](double x) { return m + a * std::sin(w * x); };
      case Kind::cosine: return [m = mean, a = amplitude, w](double x) { return m + a * std::cos(w * x); };
    }
    return constant_coefficient(mean);
  }

  friend bool operator==(const CoefficientSpec&, const CoefficientSpec&) = default;
};

struct KernelSpec {
  enum class Kind { isotropic, constant, linear_anisotropic, custom_table };
  Kind kind = Kind::isotropic;
  double parameter = 0.0;
  std::vector<double> table;
  double table_min = 0.0;
  double table_max = 0.0;

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

enum class InitialKind { well_prepared, anisotropic, random };

struct RunConfig {
  double epsilon = 1.0;
  CoefficientSpec sigma = CoefficientSpec::constant(1.0);
  CoefficientSpec sigma_a = CoefficientSpec::constant(0.0);
  CoefficientSpec source = CoefficientSpec::constant(0.0);
  KernelSpec kernel;
  std::size_t velocity_nodes = 16;
  QuadratureRule velocity_rule = QuadratureRule::gauss_legendre;
  AbsorptionMode absorption_mode = AbsorptionMode::implicit;

  std::size_t cells = 64;
  double length = 1.0;

  double final_time = 0.1;
  bool fixed_dt = false;
  double dt = 0.0;

  InitialKind initial_kind = InitialKind::well_prepared;
  CoefficientSpec initial_rho = CoefficientSpec::sine(1.0, 0.5, 1.0);
  double initial_g = 0.3;
  std::uint64_t seed = 1;

  std::string output_dir = "out";
  std::vector<std::string> formats = {"csv", "json"};
  std::vector<double> snapshot_times;

  CflMode cfl_mode = CflMode::error_estimate;
  std::vector<std::size_t> resolutions = {32, 64, 128};
  std::optional<double> order_min;
  std::optional<double> order_max;

  double limit_tolerance = 1e-6;

  std::vector<double> sweep_multipliers;
  std::size_t sweep_steps = 200;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class ConfigReader {
 public:
  struct Entry {
    std::size_t line;
    std::string value;
  };

  explicit ConfigReader(std::map<std::string, Entry> entries) : entries_(std::move(entries)) {}

  bool has(const std::string& key) const { return entries_.count(key) > 0; }
  std::size_t line(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? 0 : it->second.line;
  }
  const std::string& raw(const std::string& key) const { return entries_.at(key).value; }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ConfigError(line(key), key, what);
  }

  void require(const std::string& key) const {
    if (!has(key)) throw ConfigError(0, key, "missing required key");
  }

  double number_from(const std::string& key, const std::string& text) const {
    const std::string t = trim(text);
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(x))
      fail(key, "cannot parse '" + t + "' as a number");
    return x;
  }

  double number(const std::string& key) const { return number_from(key, raw(key)); }

  std::uint64_t unsigned_from(const std::string& key, const std::string& text) const {
    const std::string t = trim(text);
    std::uint64_t x = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
      fail(key, "cannot parse '" + t + "' as a non-negative integer");
    return x;
  }

  std::uint64_t integer(const std::string& key) const { return unsigned_from(key, raw(key)); }

  std::vector<double> numbers(const std::string& key) const {
    std::vector<double> out;
    if (trim(raw(key)).empty()) return out;
    for (const std::string& item : split(raw(key), ',')) out.push_back(number_from(key, item));
    return out;
  }

  CoefficientSpec coefficient(const std::string& key) const {
    const std::string v = trim(raw(key));
    for (auto [prefix, kind] : {std::pair{"sine(", CoefficientSpec::Kind::sine},
                                std::pair{"cosine(", CoefficientSpec::Kind::cosine}}) {
      const std::string_view p(prefix);
      if (v.rfind(p, 0) == 0) {
        if (v.back() != ')') fail(key, "missing ')' in '" + v + "'");
        const auto args = split(std::string_view(v).substr(p.size(), v.size() - p.size() - 1), ',');
        if (args.size() != 3) fail(key, std::string(prefix) + "mean, amplitude, wavenumber) expects 3 arguments");
        return {kind, number_from(key, args[0]), number_from(key, args[1]), number_from(key, args[2])};
      }
    }
    return CoefficientSpec::constant(number_from(key, v));
  }

 private:
  std::map<std::string, Entry> entries_;
};

inline const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "problem.epsilon",       "problem.sigma",          "problem.sigma_a",
      "problem.source",        "problem.kernel",         "problem.kernel_table",
      "problem.kernel_min",    "problem.kernel_max",     "problem.velocity_nodes",
      "problem.velocity_rule", "problem.absorption_mode", "grid.cells",
      "grid.length",           "time.final",             "time.dt_policy",
      "time.dt",               "initial.kind",           "initial.rho",
      "initial.g",             "initial.seed",           "output.dir",
      "output.formats",        "output.snapshot_times",  "convergence.cfl_mode",
      "convergence.resolutions", "convergence.order_min", "convergence.order_max",
      "limit.tolerance",       "cfl.multipliers",        "cfl.steps"};
  return keys;
}

inline std::string render_coefficient(const CoefficientSpec& c) {
  switch (c.kind) {
    case CoefficientSpec::Kind::constant: return format_double(c.mean);
    case CoefficientSpec::Kind::sine:
    case CoefficientSpec::Kind::cosine:
      return std::string(c.kind == CoefficientSpec::Kind::sine ? "sine(" : "cosine(") +
             format_double(c.mean) + ", " + format_double(c.amplitude) + ", " +
             format_double(c.wavenumber) + ")";
  }
  return {};
}

template <class T, class F>
std::string join(const std::vector<T>& items, F&& fmt) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += fmt(items[i]);
  }
  return out;
}

}  // namespace detail

/// Resolves the kernel spec against a velocity grid.
inline CollisionKernel make_kernel(const KernelSpec& spec, const VelocityGrid& vgrid) {
  switch (spec.kind) {
    case KernelSpec::Kind::isotropic: return CollisionKernel::isotropic();
    case KernelSpec::Kind::constant: return CollisionKernel::constant(spec.parameter);
    case KernelSpec::Kind::linear_anisotropic: return CollisionKernel::linear_anisotropic(spec.parameter);
    case KernelSpec::Kind::custom_table:
      return CollisionKernel::tabulated(vgrid, spec.table, spec.table_min, spec.table_max);
  }
  return CollisionKernel::isotropic();
}

inline TransportProblem make_problem(const RunConfig& c) {
  TransportProblem p(StaggeredGrid(c.cells, c.length),
                     build_velocity_grid(c.velocity_nodes, c.velocity_rule), c.epsilon);
  p.sigma = c.sigma.function(c.length);
  p.sigma_min = c.sigma.min();
  p.sigma_max = c.sigma.max();
  p.sigma_a = c.sigma_a.function(c.length);
  p.sigma_a_max = c.sigma_a.max();
  p.source = c.source.function(c.length);
  p.kernel = make_kernel(c.kernel, p.vgrid);
  p.absorption_mode = c.absorption_mode;
  return p;
}

/// Initial data of the configured kind. Random data is a seeded well-prepared
/// state with rho in [0.5, 1.5) and mean-zero g in [-1, 1).
inline MicroMacroState make_initial_state(const RunConfig& c, const ApScheme& scheme) {
  const Coefficient rho = c.initial_rho.function(c.length);
  switch (c.initial_kind) {
    case InitialKind::well_prepared:
      return scheme.decompose([rho](double x, double) { return rho(x); });
    case InitialKind::anisotropic: {
      const double w = 2.0 * std::numbers::pi / c.length;
      const double a = c.initial_g;
      return scheme.decompose(
          [rho, a, w](double x, double v) { return rho(x) + a * v * std::cos(w * x); });
    }
    case InitialKind::random: {
      Lcg64 rng(c.seed);
      return random_state(scheme.grid(), scheme.vgrid(), rng);
    }
  }
  return scheme.decompose([rho](double x, double) { return rho(x); });
}

inline RunConfig parse_config(std::string_view text) {
  std::map<std::string, detail::ConfigReader::Entry> entries;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    std::string_view line = text.substr(pos, end == std::string_view::npos ? text.npos : end - pos);
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string content = detail::trim(line);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) throw ConfigError(lineno, "", "expected 'section.key = value'");
    const std::string key = detail::trim(std::string_view(content).substr(0, eq));
    const std::string value = detail::trim(std::string_view(content).substr(eq + 1));
    if (key.find('.') == std::string::npos)
      throw ConfigError(lineno, key, "keys must have the form section.key");
    if (!detail::known_keys().count(key)) throw ConfigError(lineno, key, "unknown key");
    if (entries.count(key))
      throw ConfigError(lineno, key, "duplicate key (first set on line " +
                                         std::to_string(entries[key].line) + ")");
    entries[key] = {lineno, value};
  }

  const detail::ConfigReader r(std::move(entries));
  RunConfig c;

  r.require("problem.epsilon");
  c.epsilon = r.number("problem.epsilon");
  if (c.epsilon < kMinEpsilon)
    r.fail("problem.epsilon", "epsilon must be at least 1e-12 (the smallest supported epsilon), got " +
                                  detail::format_double(c.epsilon));

  if (r.has("problem.sigma")) c.sigma = r.coefficient("problem.sigma");
  if (!(c.sigma.min() > 0.0))
    r.fail("problem.sigma", "cross section must satisfy 0 < sigma_m <= sigma(x), got sigma_m = " +
                                detail::format_double(c.sigma.min()));
  if (r.has("problem.sigma_a")) c.sigma_a = r.coefficient("problem.sigma_a");
  if (c.sigma_a.min() < 0.0)
    r.fail("problem.sigma_a", "absorption must satisfy 0 <= sigma_A(x), got minimum " +
                                  detail::format_double(c.sigma_a.min()));
  if (r.has("problem.source")) c.source = r.coefficient("problem.source");

  if (r.has("problem.velocity_nodes")) {
    c.velocity_nodes = r.integer("problem.velocity_nodes");
    if (c.velocity_nodes < 2 || c.velocity_nodes % 2 != 0)
      r.fail("problem.velocity_nodes", "velocity node count must be even and at least 2");
  }
  c.velocity_rule = c.velocity_nodes == 2 ? QuadratureRule::two_point_telegraph
                                          : QuadratureRule::gauss_legendre;
  if (r.has("problem.velocity_rule")) {
    const std::string v = r.raw("problem.velocity_rule");
    if (v == "gauss-legendre") {
      c.velocity_rule = QuadratureRule::gauss_legendre;
    } else if (v == "two-point-telegraph") {
      if (c.velocity_nodes != 2)
        r.fail("problem.velocity_rule", "two-point-telegraph requires problem.velocity_nodes = 2");
      c.velocity_rule = QuadratureRule::two_point_telegraph;
    } else {
      r.fail("problem.velocity_rule", "expected gauss-legendre or two-point-telegraph");
    }
  }

  if (r.has("problem.kernel")) {
    const std::string k = r.raw("problem.kernel");
    auto argument = [&](std::string_view prefix) {
      return r.number_from("problem.kernel", k.substr(prefix.size(), k.size() - prefix.size() - 1));
    };
    if (k == "isotropic") {
      c.kernel.kind = KernelSpec::Kind::isotropic;
    } else if (k.rfind("constant(", 0) == 0 && k.back() == ')') {
      c.kernel.kind = KernelSpec::Kind::constant;
      c.kernel.parameter = argument("constant(");
    } else if (k.rfind("linear-anisotropic(", 0) == 0 && k.back() == ')') {
      c.kernel.kind = KernelSpec::Kind::linear_anisotropic;
      c.kernel.parameter = argument("linear-anisotropic(");
      if (!(std::abs(c.kernel.parameter) < 1.0))
        r.fail("problem.kernel", "linear-anisotropic(b) requires |b| < 1");
    } else if (k == "custom-table") {
      c.kernel.kind = KernelSpec::Kind::custom_table;
      for (const char* key : {"problem.kernel_table", "problem.kernel_min", "problem.kernel_max"})
        if (!r.has(key)) throw ConfigError(r.line("problem.kernel"), key, "required for custom-table kernels");
      for (const std::string& row : detail::split(r.raw("problem.kernel_table"), ';')) {
        std::istringstream in(row);
        std::string item;
        while (in >> item) c.kernel.table.push_back(r.number_from("problem.kernel_table", item));
      }
      c.kernel.table_min = r.number("problem.kernel_min");
      c.kernel.table_max = r.number("problem.kernel_max");
    } else {
      r.fail("problem.kernel",
             "expected isotropic, constant(c), linear-anisotropic(b) or custom-table");
    }
  }
  for (const char* key : {"problem.kernel_table", "problem.kernel_min", "problem.kernel_max"})
    if (r.has(key) && c.kernel.kind != KernelSpec::Kind::custom_table)
      r.fail(key, "only valid with problem.kernel = custom-table");

  if (r.has("problem.absorption_mode")) {
    const std::string m = r.raw("problem.absorption_mode");
    if (m == "implicit") c.absorption_mode = AbsorptionMode::implicit;
    else if (m == "explicit") c.absorption_mode = AbsorptionMode::explicit_absorption;
    else r.fail("problem.absorption_mode", "expected implicit or explicit");
  }

  r.require("grid.cells");
  c.cells = r.integer("grid.cells");
  if (c.cells < 4) r.fail("grid.cells", "need at least 4 cells");
  if (r.has("grid.length")) {
    c.length = r.number("grid.length");
    if (!(c.length > 0.0)) r.fail("grid.length", "length must be positive");
  }

  r.require("time.final");
  c.final_time = r.number("time.final");
  if (c.final_time < 0.0) r.fail("time.final", "final time must be non-negative");
  if (r.has("time.dt_policy")) {
    const std::string p = r.raw("time.dt_policy");
    if (p == "auto") c.fixed_dt = false;
    else if (p == "fixed") c.fixed_dt = true;
    else r.fail("time.dt_policy", "expected auto or fixed");
  }
  if (r.has("time.dt")) {
    c.dt = r.number("time.dt");
    if (!(c.dt > 0.0)) r.fail("time.dt", "dt must be positive");
  }
  if (c.fixed_dt && !r.has("time.dt"))
    throw ConfigError(r.line("time.dt_policy"), "time.dt", "required when time.dt_policy = fixed");

  if (r.has("initial.kind")) {
    const std::string k = r.raw("initial.kind");
    if (k == "well-prepared") c.initial_kind = InitialKind::well_prepared;
    else if (k == "anisotropic") c.initial_kind = InitialKind::anisotropic;
    else if (k == "random") c.initial_kind = InitialKind::random;
    else r.fail("initial.kind", "expected well-prepared, anisotropic or random");
  }
  if (r.has("initial.rho")) c.initial_rho = r.coefficient("initial.rho");
  if (r.has("initial.g")) c.initial_g = r.number("initial.g");
  if (r.has("initial.seed")) c.seed = r.integer("initial.seed");

  if (r.has("output.dir")) {
    c.output_dir = r.raw("output.dir");
    if (c.output_dir.empty()) r.fail("output.dir", "output directory must not be empty");
  }
  if (r.has("output.formats")) {
    c.formats.clear();
    if (!r.raw("output.formats").empty()) c.formats = detail::split(r.raw("output.formats"), ',');
    for (const std::string& f : c.formats)
      if (f != "csv" && f != "json") r.fail("output.formats", "unknown format '" + f + "'");
  }
  if (r.has("output.snapshot_times")) {
    c.snapshot_times = r.numbers("output.snapshot_times");
    for (double t : c.snapshot_times)
      if (t < 0.0) r.fail("output.snapshot_times", "snapshot times must be non-negative");
  }

  if (r.has("convergence.cfl_mode")) {
    const std::string m = r.raw("convergence.cfl_mode");
    if (m == "parabolic") c.cfl_mode = CflMode::parabolic;
    else if (m == "hyperbolic") c.cfl_mode = CflMode::hyperbolic;
    else if (m == "error-cfl") c.cfl_mode = CflMode::error_estimate;
    else r.fail("convergence.cfl_mode", "expected parabolic, hyperbolic or error-cfl");
  }
  if (r.has("convergence.resolutions")) {
    c.resolutions.clear();
    for (const std::string& item : detail::split(r.raw("convergence.resolutions"), ','))
      c.resolutions.push_back(r.unsigned_from("convergence.resolutions", item));
  }
  if (r.has("convergence.order_min")) c.order_min = r.number("convergence.order_min");
  if (r.has("convergence.order_max")) c.order_max = r.number("convergence.order_max");

  if (r.has("limit.tolerance")) {
    c.limit_tolerance = r.number("limit.tolerance");
    if (!(c.limit_tolerance > 0.0)) r.fail("limit.tolerance", "tolerance must be positive");
  }
  if (r.has("cfl.multipliers")) {
    c.sweep_multipliers = r.numbers("cfl.multipliers");
    for (double m : c.sweep_multipliers)
      if (!(m > 0.0)) r.fail("cfl.multipliers", "multipliers must be positive");
  }
  if (r.has("cfl.steps")) {
    c.sweep_steps = r.integer("cfl.steps");
    if (c.sweep_steps < 2) r.fail("cfl.steps", "need at least 2 steps");
  }

  // Cross-checks that need the assembled problem: kernel bounds and symmetry,
  // coefficient ranges at the grid nodes.
  try {
    const TransportProblem p = make_problem(c);
    build_collision_operator(p.vgrid, p.kernel);
    validate(p);
  } catch (const InvalidKernel& e) {
    r.fail("problem.kernel", e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(0, "", e.what());
  }
  return c;
}

/// Canonical text form; parse_config(render(c)) == c.
inline std::string render(const RunConfig& c) {
  using detail::format_double;
  std::ostringstream o;
  o << "problem.epsilon = " << format_double(c.epsilon) << '\n';
  o << "problem.sigma = " << detail::render_coefficient(c.sigma) << '\n';
  o << "problem.sigma_a = " << detail::render_coefficient(c.sigma_a) << '\n';
  o << "problem.source = " << detail::render_coefficient(c.source) << '\n';
  switch (c.kernel.kind) {
    case KernelSpec::Kind::isotropic: o << "problem.kernel = isotropic\n"; break;
    case KernelSpec::Kind::constant:
      o << "problem.kernel = constant(" << format_double(c.kernel.parameter) << ")\n";
      break;
    case KernelSpec::Kind::linear_anisotropic:
      o << "problem.kernel = linear-anisotropic(" << format_double(c.kernel.parameter) << ")\n";
      break;
    case KernelSpec::Kind::custom_table: {
      o << "problem.kernel = custom-table\nproblem.kernel_table = ";
      const std::size_t n = c.velocity_nodes;
      for (std::size_t i = 0; i < c.kernel.table.size(); ++i) {
        if (i > 0) o << (n > 0 && i % n == 0 ? "; " : " ");
        o << format_double(c.kernel.table[i]);
      }
      o << "\nproblem.kernel_min = " << format_double(c.kernel.table_min)
        << "\nproblem.kernel_max = " << format_double(c.kernel.table_max) << '\n';
      break;
    }
  }
  o << "problem.velocity_nodes = " << c.velocity_nodes << '\n';
  o << "problem.velocity_rule = " << to_string(c.velocity_rule) << '\n';
  o << "problem.absorption_mode = " << to_string(c.absorption_mode) << '\n';
  o << "grid.cells = " << c.cells << '\n';
  o << "grid.length = " << format_double(c.length) << '\n';
  o << "time.final = " << format_double(c.final_time) << '\n';
  o << "time.dt_policy = " << (c.fixed_dt ? "fixed" : "auto") << '\n';
  if (c.dt > 0.0) o << "time.dt = " << format_double(c.dt) << '\n';
  o << "initial.kind = "
    << (c.initial_kind == InitialKind::well_prepared ? "well-prepared"
        : c.initial_kind == InitialKind::anisotropic ? "anisotropic"
                                                      : "random")
    << '\n';
  o << "initial.rho = " << detail::render_coefficient(c.initial_rho) << '\n';
  o << "initial.g = " << format_double(c.initial_g) << '\n';
  o << "initial.seed = " << c.seed << '\n';
  o << "output.dir = " << c.output_dir << '\n';
  o << "output.formats = " << detail::join(c.formats, [](const std::string& s) { return s; }) << '\n';
  o << "output.snapshot_times = " << detail::join(c.snapshot_times, format_double) << '\n';
  o << "convergence.cfl_mode = " << to_string(c.cfl_mode) << '\n';
  o << "convergence.resolutions = "
    << detail::join(c.resolutions, [](std::size_t n) { return std::to_string(n); }) << '\n';
  if (c.order_min) o << "convergence.order_min = " << format_double(*c.order_min) << '\n';
  if (c.order_max) o << "convergence.order_max = " << format_double(*c.order_max) << '\n';
  o << "limit.tolerance = " << format_double(c.limit_tolerance) << '\n';
  o << "cfl.multipliers = " << detail::join(c.sweep_multipliers, format_double) << '\n';
  o << "cfl.steps = " << c.sweep_steps << '\n';
  return o.str();
}

/// 64-bit FNV-1a of the rendered configuration. output.dir does not affect
/// results and is left out.
inline std::uint64_t config_hash(const RunConfig& c) {
  RunConfig key = c;
  key.output_dir = RunConfig{}.output_dir;
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : render(key)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace apkin
