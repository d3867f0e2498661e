#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <ostream>

#include <CLI11.hpp>

#include "codimctl/codim_analysis.hpp"
#include "codimctl/control_synthesis.hpp"
#include "codimctl/errors.hpp"
#include "codimctl/finite_dim_oracle.hpp"
#include "codimctl/gramian.hpp"
#include "codimctl/serialization.hpp"
#include "codimctl/spectral_basis.hpp"

namespace codimctl::cli {

namespace {

using io::Json;

constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

struct Output {
  Json json;
  std::string csv;
};

// Parameters shared by every PDE command.
struct Problem {
  std::string kind;
  int N = 0;
  double T = kUnset;
  std::vector<double> omega;
  double c = 0.0;

  CLI::Option* kind_opt = nullptr;
  CLI::Option* T_opt = nullptr;
  CLI::Option* omega_opt = nullptr;
  CLI::Option* c_opt = nullptr;

  SystemKind system() const {
    require(!kind.empty(), "--kind is required (heat or wave)");
    return system_kind_from_string(kind);
  }
  ControlRegion region() const {
    require(omega.size() == 2, "--omega expects two numbers a b");
    return ControlRegion(omega[0], omega[1]);
  }
  double horizon() const {
    require(std::isfinite(T) && T > 0.0, "--T must be a positive number");
    return T;
  }
  void validate_N() const { require(N >= 1, "--N must be positive"); }

  Json config() const {
    return Json{{"kind", kind}, {"N", N}, {"T", T}, {"omega", omega}, {"c", c}};
  }
};

void add_problem_options(CLI::App* sub, Problem& p, int default_N) {
  p.N = default_N;
  p.kind_opt = sub->add_option("--kind", p.kind, "heat or wave");
  sub->add_option("--N", p.N, "spectral truncation")->capture_default_str();
  p.T_opt = sub->add_option("--T", p.T, "control horizon");
  p.omega_opt = sub->add_option("--omega", p.omega, "control interval a b")->expected(2);
  p.c_opt = sub->add_option("--c", p.c, "potential (wave only)")->capture_default_str();
}

struct IoPaths {
  std::string out;
  std::string csv;
};

void add_io_options(CLI::App* sub, IoPaths& io, bool with_csv) {
  sub->add_option("--out", io.out, "JSON output file (stdout when omitted)");
  if (with_csv) sub->add_option("--csv", io.csv, "CSV output file for plotting");
}

// Target descriptors: mode:k | bump | step | poly | zero.
Eigen::VectorXd target_coefficients(const std::string& descriptor, int N) {
  if (descriptor == "zero") return Eigen::VectorXd::Zero(N);
  if (descriptor == "bump") return project_function(Bump{}, N);
  if (descriptor == "step") return project_function(Step{}, N);
  if (descriptor == "poly") return project_function(Parabola{}, N);
  if (descriptor.rfind("mode:", 0) == 0) {
    int k = 0;
    try {
      std::size_t used = 0;
      k = std::stoi(descriptor.substr(5), &used);
      require(used == descriptor.size() - 5, "");
    } catch (const std::exception&) {
      throw ValidationError("--target mode:k needs an integer k");
    }
    require(k >= 1 && k <= N, "--target mode:k needs 1 <= k <= N");
    return Eigen::VectorXd::Unit(N, k - 1);
  }
  throw ValidationError("unknown --target '" + descriptor + "' (mode:k, bump, step, poly, zero)");
}

struct Preset {
  SystemKind kind;
  double T;
  double a, b;
};

Preset preset_by_name(const std::string& name) {
  if (name == "prop31-wave") return {SystemKind::Wave, 1.0, 0.25, 0.75};
  if (name == "prop32-heat") return {SystemKind::Heat, 0.1, 0.2, 0.8};
  if (name == "gcc-violated-wave") return {SystemKind::Wave, 0.2, 0.0, 0.3};
  if (name == "identity-wave") return {SystemKind::Wave, 2.0, 0.0, 1.0};
  throw ValidationError("unknown --preset '" + name + "' (prop31-wave, prop32-heat, gcc-violated-wave, identity-wave)");
}

// Preset values fill every problem parameter not given explicitly.
void apply_preset(const std::string& name, Problem& p) {
  const Preset preset = preset_by_name(name);
  if (p.kind_opt->count() == 0) p.kind = to_string(preset.kind);
  if (p.T_opt->count() == 0) p.T = preset.T;
  if (p.omega_opt->count() == 0) p.omega = {preset.a, preset.b};
  if (p.c_opt->count() == 0) p.c = 0.0;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot open '" + path + "'");
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  require(static_cast<bool>(f), "cannot write '" + path + "'");
  f << content;
  require(static_cast<bool>(f), "failed writing '" + path + "'");
}

Json parse_json_file(const std::string& path) {
  try {
    return Json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("'" + path + "' is not valid JSON: " + e.what());
  }
}

// ---------------------------------------------------------------------------

Output cmd_gramian(const Problem& p) {
  p.validate_N();
  const GramianMatrix G = assemble_gramian(p.system(), p.N, p.horizon(), p.region(), p.c);
  check_gramian_invariants(G);
  return {io::envelope("gramian", p.config(), io::to_json(G)), ""};
}

struct ScanArgs {
  std::string preset;
  std::vector<int> Ns{16, 32, 64, 128};
  double tau_rel = 1e-8;
  double tau_abs = kUnset;
};

Output cmd_codim_scan(Problem p, const ScanArgs& s) {
  if (!s.preset.empty()) apply_preset(s.preset, p);
  TauRule rule;
  rule.relative = s.tau_rel;
  if (!std::isnan(s.tau_abs)) rule.absolute = s.tau_abs;
  require(rule.relative > 0.0, "--tau-rel must be positive");
  const LadderVerdict v = ladder_scan(p.system(), p.horizon(), p.region(), p.c, s.Ns, rule);
  Json config = p.config();
  config.erase("N");
  config["preset"] = s.preset;
  config["Ns"] = s.Ns;
  config["tau_rel"] = s.tau_rel;
  config["tau_abs"] = rule.absolute ? Json(*rule.absolute) : Json(nullptr);
  return {io::envelope("codim-scan", config, io::to_json(v)), io::eigenvalue_csv(v)};
}

struct HumArgs {
  std::string target = "mode:1";
  double eps = 1e-4;
  double cg_tol = 1e-10;
  double certify_tol = 1e-5;
  int steps_per_unit = 200;
};

Output cmd_hum(const Problem& p, const HumArgs& h) {
  p.validate_N();
  const SystemKind kind = p.system();
  const double T = p.horizon();
  const Eigen::VectorXd coeffs = target_coefficients(h.target, p.N);
  const int intervals = lq_intervals(T, h.steps_per_unit);
  Json config = p.config();
  config["target"] = h.target;
  config["steps_per_unit"] = h.steps_per_unit;
  if (kind == SystemKind::Wave) {
    config["cg_tol"] = h.cg_tol;
    config["certify_tol"] = h.certify_tol;
    const WaveModel model(p.N, p.region(), p.c);
    HumWaveOptions options;
    options.cg_tol = h.cg_tol;
    options.certify_tol = h.certify_tol;
    const HumSolution s = hum_wave(model, WaveState::from_raw(coeffs, Eigen::VectorXd::Zero(p.N)),
                                   WaveState::zero(p.N), T, options);
    const SampledControl u = sample_control(model, s.control, T, intervals);
    return {io::envelope("hum", config, io::to_json(s, u)), io::control_csv(u)};
  }
  config["eps"] = h.eps;
  require(h.eps > 0.0, "--eps must be positive for the heat equation");
  const HeatModel model(p.N, p.region());
  const HumSolution s = hum_heat_regularized(model, HeatState{coeffs}, HeatState{Eigen::VectorXd::Zero(p.N)}, T, h.eps);
  const SampledControl u = sample_control(model, s.control, T, intervals);
  return {io::envelope("hum", config, io::to_json(s, u)), io::control_csv(u)};
}

struct LqArgs {
  std::string target = "mode:1";
  LqOptions options;
};

Output cmd_lq(const Problem& p, const LqArgs& a) {
  p.validate_N();
  const SystemKind kind = p.system();
  const double T = p.horizon();
  const Eigen::VectorXd coeffs = target_coefficients(a.target, p.N);
  Json config = p.config();
  config["target"] = a.target;
  config["alpha"] = a.options.alpha;
  config["beta"] = a.options.beta;
  config["steps_per_unit"] = a.options.steps_per_unit;
  LqSolution s;
  if (kind == SystemKind::Wave) {
    const WaveModel model(p.N, p.region(), p.c);
    s = lq_endpoint(model, WaveState::from_raw(coeffs, Eigen::VectorXd::Zero(p.N)), WaveState::zero(p.N), T,
                    a.options);
  } else {
    config["relaxation"] = a.options.relaxation;
    const HeatModel model(p.N, p.region());
    s = lq_endpoint(model, HeatState{coeffs}, HeatState{Eigen::VectorXd::Zero(p.N)}, T, a.options);
  }
  return {io::envelope("lq", config, io::to_json(s)), io::control_csv(s.control)};
}

struct OracleArgs {
  std::vector<int> random;
  std::uint64_t seed = 0;
  std::string A_path, B_path;
  double T = 1.0;
  double tol = 1e-6;
};

Output cmd_oracle(const OracleArgs& o) {
  std::vector<LtiSystem> systems;
  Json config{{"tol", o.tol}};
  if (!o.random.empty()) {
    require(o.random.size() == 3, "--random expects n m count");
    require(o.A_path.empty() && o.B_path.empty(), "--random cannot be combined with --A/--B");
    systems = random_systems(o.random[0], o.random[1], o.random[2], o.seed);
    config["random"] = {{"n", o.random[0]}, {"m", o.random[1]}, {"count", o.random[2]}};
    config["seed"] = o.seed;
  } else {
    require(!o.A_path.empty() && !o.B_path.empty(), "oracle needs --random n m count or both --A and --B");
    LtiSystem sys;
    sys.A = io::matrix_from_json(parse_json_file(o.A_path));
    sys.B = io::matrix_from_json(parse_json_file(o.B_path));
    sys.T = o.T;
    sys.validate();
    systems.push_back(sys);
    config["system"] = io::to_json(sys);
  }
  Json reports = Json::array();
  int consistent = 0, inconclusive = 0;
  for (const LtiSystem& sys : systems) {
    const EquivalenceReport r = check_equivalences(sys, o.tol);
    const bool ok = r.consistent(o.tol);
    consistent += ok;
    inconclusive += r.inconclusive;
    Json entry = io::to_json(r);
    entry["consistent"] = ok;
    entry["system"] = io::to_json(sys);
    reports.push_back(std::move(entry));
  }
  const int count = static_cast<int>(systems.size());
  Json result{{"summary",
               {{"count", count},
                {"consistent", consistent},
                {"inconsistent", count - consistent},
                {"inconclusive", inconclusive},
                {"all_consistent", consistent == count}}},
              {"reports", std::move(reports)}};
  return {io::envelope("oracle", config, std::move(result)), ""};
}

// Expands `--config file` into flags for every key not already given on the command line.
std::vector<std::string> merge_config_file(const std::vector<std::string>& args) {
  std::vector<std::string> merged;
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      merged.push_back(args[i]);
    }
  }
  if (path.empty()) return merged;
  std::ifstream in(path);
  if (!in) throw CLI::FileError::Missing(path);
  for (const CLI::ConfigItem& item : CLI::ConfigINI().from_config(in)) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    const std::string flag = "--" + item.name;
    bool given = false;
    for (const std::string& a : merged) given = given || a == flag || a.rfind(flag + "=", 0) == 0;
    if (given) continue;
    merged.push_back(flag);
    merged.insert(merged.end(), item.inputs.begin(), item.inputs.end());
  }
  return merged;
}

void report_error(std::ostream& err, const std::string& type, const std::string& message,
                  const nlohmann::json& diagnostics = nlohmann::json::object()) {
  nlohmann::ordered_json j{{"error", type}, {"message", message}};
  if (!diagnostics.empty()) j["diagnostics"] = diagnostics;
  err << j.dump() << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectral experiments on finite codimensional controllability of heat and wave equations", "codimctl"};
  app.require_subcommand(1, 1);

  IoPaths paths;
  std::function<Output()> action;

  std::string config_path;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key = value file mirroring the flags; flags take precedence");
  };

  Problem gramian_p;
  auto* gramian = app.add_subcommand("gramian", "Assemble the truncated controllability Gramian");
  add_problem_options(gramian, gramian_p, 16);
  add_io_options(gramian, paths, false);
  add_config(gramian);
  gramian->callback([&] { action = [&] { return cmd_gramian(gramian_p); }; });

  Problem scan_p;
  ScanArgs scan_a;
  auto* scan = app.add_subcommand("codim-scan", "Defect counts along a ladder of truncations");
  add_problem_options(scan, scan_p, 0);
  scan->add_option("--preset", scan_a.preset, "prop31-wave, prop32-heat, gcc-violated-wave or identity-wave");
  scan->add_option("--Ns", scan_a.Ns, "ladder of truncations")->capture_default_str();
  scan->add_option("--tau-rel", scan_a.tau_rel, "tau relative to the largest eigenvalue at the smallest N")
      ->capture_default_str();
  scan->add_option("--tau-abs", scan_a.tau_abs, "fixed absolute tau (overrides --tau-rel)");
  add_io_options(scan, paths, true);
  add_config(scan);
  scan->callback([&] { action = [&] { return cmd_codim_scan(scan_p, scan_a); }; });

  Problem hum_p;
  HumArgs hum_a;
  auto* hum = app.add_subcommand("hum", "Minimal-norm control by the Hilbert Uniqueness Method");
  add_problem_options(hum, hum_p, 64);
  hum->add_option("--target", hum_a.target, "mode:k, bump, step, poly or zero")->capture_default_str();
  hum->add_option("--eps", hum_a.eps, "heat regularization")->capture_default_str();
  hum->add_option("--cg-tol", hum_a.cg_tol, "wave CG relative tolerance")->capture_default_str();
  hum->add_option("--certify-tol", hum_a.certify_tol, "wave endpoint certification tolerance")->capture_default_str();
  hum->add_option("--steps-per-unit", hum_a.steps_per_unit, "export grid density")->capture_default_str();
  add_io_options(hum, paths, true);
  add_config(hum);
  hum->callback([&] { action = [&] { return cmd_hum(hum_p, hum_a); }; });

  Problem lq_p;
  LqArgs lq_a;
  auto* lq = app.add_subcommand("lq", "Endpoint-constrained linear-quadratic control");
  add_problem_options(lq, lq_p, 16);
  lq->add_option("--target", lq_a.target, "mode:k, bump, step, poly or zero")->capture_default_str();
  lq->add_option("--alpha", lq_a.options.alpha, "state weight")->capture_default_str();
  lq->add_option("--beta", lq_a.options.beta, "control weight")->capture_default_str();
  lq->add_option("--relaxation", lq_a.options.relaxation, "heat endpoint radius relative to |target|")
      ->capture_default_str();
  lq->add_option("--steps-per-unit", lq_a.options.steps_per_unit, "time grid density")->capture_default_str();
  add_io_options(lq, paths, true);
  add_config(lq);
  lq->callback([&] { action = [&] { return cmd_lq(lq_p, lq_a); }; });

  OracleArgs oracle_a;
  auto* oracle = app.add_subcommand("oracle", "Finite-dimensional equivalence checks");
  oracle->add_option("--random", oracle_a.random, "n m count")->expected(3);
  oracle->add_option("--seed", oracle_a.seed, "random seed")->capture_default_str();
  oracle->add_option("--A", oracle_a.A_path, "JSON file with A as an array of rows");
  oracle->add_option("--B", oracle_a.B_path, "JSON file with B as an array of rows");
  oracle->add_option("--T", oracle_a.T, "horizon for --A/--B")->capture_default_str();
  oracle->add_option("--tol", oracle_a.tol, "principal angle tolerance")->capture_default_str();
  add_io_options(oracle, paths, false);
  add_config(oracle);
  oracle->callback([&] { action = [&] { return cmd_oracle(oracle_a); }; });

  try {
    std::vector<std::string> merged = merge_config_file(args);
    std::vector<std::string> reversed(merged.rbegin(), merged.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    report_error(err, "usage", e.what());
    return kExitValidation;
  }

  try {
    const Output result = action();
    const std::string text = io::dump(result.json);
    if (paths.out.empty()) {
      out << text;
    } else {
      write_file(paths.out, text);
    }
    if (!paths.csv.empty()) write_file(paths.csv, result.csv);
  } catch (const ValidationError& e) {
    report_error(err, "validation", e.what());
    return kExitValidation;
  } catch (const NumericalError& e) {
    report_error(err, "numerical", e.what(), e.diagnostics());
    return kExitNumerical;
  } catch (const nlohmann::json::exception& e) {
    report_error(err, "validation", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    report_error(err, "numerical", e.what());
    return kExitNumerical;
  }
  return kExitOk;
}

}  // namespace codimctl::cli
