#pragma once

// Command-line driver for the benchmark problems. Kept header-only so the
// test suites can drive exactly the code path the executable uses.

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fpcross/models.hpp"
#include "fpcross/solver.hpp"

namespace fpcross::cli {

enum ExitCode : int { kSuccess = 0, kConfigError = 1, kSolverFailure = 2 };

inline const std::vector<std::string>& problem_names() {
  static const std::vector<std::string> names{"oup1d", "oup3d", "oup5d", "dumbbell"};
  return names;
}

struct RunConfig {
  std::string problem = "oup1d";
  Index grid_points = 50;
  Index time_points = 1000;
  double eps = 1e-4;
  double t_final = 10.0;
  std::uint64_t seed = 42;
  std::string output_path = "fpcross_run.csv";

  void validate() const {
    if (std::find(problem_names().begin(), problem_names().end(), problem) == problem_names().end())
      throw std::invalid_argument("unknown problem '" + problem + "'");
    if (grid_points < 2) throw std::invalid_argument("grid_points must be >= 2");
    if (time_points < 2) throw std::invalid_argument("time_points must be >= 2");
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    if (!(t_final > 0.0)) throw std::invalid_argument("t_final must be positive");
  }
};

/// Published settings for each benchmark.
inline RunConfig defaults_for(const std::string& problem) {
  RunConfig c;
  c.problem = problem;
  if (problem == "oup1d") {
    c.grid_points = 50;
    c.time_points = 1000;
    c.t_final = 10.0;
    c.eps = 1e-4;
  } else if (problem == "oup3d" || problem == "oup5d") {
    c.grid_points = 30;
    c.time_points = 100;
    c.t_final = 5.0;
    c.eps = 1e-4;
  } else if (problem == "dumbbell") {
    c.grid_points = 60;
    c.time_points = 100;
    c.t_final = 10.0;
    c.eps = 1e-5;
  }
  return c;
}

inline nlohmann::json to_json(const RunConfig& c) {
  return nlohmann::json{{"problem", c.problem}, {"grid_points", c.grid_points}, {"time_points", c.time_points},
                        {"eps", c.eps},         {"t_final", c.t_final},         {"seed", c.seed},
                        {"output_path", c.output_path}};
}

// ---------------------------------------------------------------------------
// Benchmark assembly

struct Benchmark {
  ProblemDef problem;
  std::vector<Index> sizes;
  std::vector<Observer> observers;
  /// Which report column is the headline error, if any.
  enum class Headline { kNone, kAnalytic, kStationary } headline = Headline::kNone;
};

namespace detail {

inline TTTensor nodal_1d(const ChebGrid& grid, const VectorXd& values) {
  return TTTensor({TTCore(1, grid.size(0), 1, values)});
}

inline TTTensor reference_on_grid(const DensityMap& density, const ChebGrid& grid, double eps, std::uint64_t seed) {
  CrossConfig cfg;
  cfg.eps_ca = eps;
  cfg.seed = seed;
  const CrossResult res = cross_on_cheb_grid(density, grid, tt_rank1_random(grid.sizes(), seed), cfg);
  return tt_round(res.tensor, eps);
}

}  // namespace detail

inline Benchmark make_benchmark(const RunConfig& c) {
  c.validate();
  Benchmark b;
  if (c.problem == "oup1d" || c.problem == "oup3d" || c.problem == "oup5d") {
    const OUParams prm = c.problem == "oup1d" ? ou1d_params() : c.problem == "oup3d" ? ou3d_params() : ou5d_params();
    b.problem = ou_problem(prm, c.t_final);
    b.sizes.assign(static_cast<std::size_t>(prm.dims()), c.grid_points);
    const ChebGrid grid(b.sizes, b.problem.domain);
    const DensityMap stationary = ou_stationary(prm);
    if (prm.dims() == 1) {
      b.headline = Benchmark::Headline::kAnalytic;
      const VectorXd x = grid.nodes(0);
      const TTTensor stat = detail::nodal_1d(grid, stationary(x));
      b.observers.push_back([prm, x, stat, grid](const Stepper& s, StepRecord& rec) {
        const TTTensor exact = detail::nodal_1d(grid, ou_analytic_1d(prm, x, rec.t));
        rec.err_analytic = tt_relative_error(s.state, exact);
        rec.err_stationary = tt_relative_error(s.state, stat);
      });
    } else {
      b.headline = Benchmark::Headline::kStationary;
      const TTTensor stat = detail::reference_on_grid(stationary, grid, 1e-10, c.seed + 7919);
      b.observers.push_back(
          [stat](const Stepper& s, StepRecord& rec) { rec.err_stationary = tt_relative_error(s.state, stat); });
    }
  } else {
    DumbbellParams prm;
    prm.horizon = c.t_final;
    b.problem = dumbbell_problem(prm);
    b.sizes.assign(3, c.grid_points);
    CrossConfig kcfg;
    kcfg.eps_ca = std::min(c.eps, 1e-6);
    kcfg.seed = c.seed + 104729;
    b.observers.push_back([prm, kcfg](const Stepper& s, StepRecord& rec) {
      const KramerObservables k = kramer_observables(s.state, s.grid, prm, kcfg);
      rec.psi = k.psi;
      rec.eta = k.eta;
    });
  }
  return b;
}

// ---------------------------------------------------------------------------
// Report files

inline const char* csv_header() {
  return "step,t,erank,err_analytic,err_stationary,psi,eta,mass,min_nodal,wall_seconds";
}

/// Shortest decimal string that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string format_optional(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

inline std::string csv_row(const StepRecord& r) {
  std::ostringstream os;
  os << r.step << ',' << format_double(r.t) << ',' << format_double(r.erank) << ',' << format_optional(r.err_analytic)
     << ',' << format_optional(r.err_stationary) << ',' << format_optional(r.psi) << ',' << format_optional(r.eta)
     << ',' << format_double(r.mass) << ',' << format_double(r.min_nodal) << ',' << format_double(r.wall_seconds);
  return os.str();
}

/// Summary JSON lives next to the CSV: "run.csv" -> "run.json".
inline std::string summary_path(const std::string& csv_path) {
  std::filesystem::path p(csv_path);
  if (p.extension() == ".csv") return p.replace_extension(".json").string();
  return csv_path + ".json";
}

inline nlohmann::json summary_json(const RunConfig& c, const Benchmark& b, const SolveResult& res, double seconds) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  nlohmann::json j;
  j["config"] = to_json(c);
  j["total_seconds"] = seconds;
  j["steps_completed"] = res.report.size();
  j["all_cross_converged"] = res.all_converged;
  j["failure"] = res.failure ? nlohmann::json(*res.failure) : nlohmann::json(nullptr);
  if (res.report.empty()) {
    j["final_error"] = nullptr;
    j["final_erank"] = nullptr;
    return j;
  }
  const StepRecord& last = res.report.back();
  switch (b.headline) {
    case Benchmark::Headline::kAnalytic: j["final_error"] = opt(last.err_analytic); break;
    case Benchmark::Headline::kStationary: j["final_error"] = opt(last.err_stationary); break;
    case Benchmark::Headline::kNone: j["final_error"] = nullptr; break;
  }
  j["final_erank"] = last.erank;
  j["final_t"] = last.t;
  j["err_analytic"] = opt(last.err_analytic);
  j["err_stationary"] = opt(last.err_stationary);
  j["psi"] = opt(last.psi);
  j["eta"] = opt(last.eta);
  j["mass"] = last.mass;
  j["min_nodal"] = last.min_nodal;
  j["max_nodal"] = last.max_nodal;
  double max_erank = 0.0;
  for (const auto& r : res.report) max_erank = std::max(max_erank, r.erank);
  j["max_erank"] = max_erank;
  return j;
}

/// Runs one benchmark, streaming the CSV as steps finish and writing the JSON
/// summary at the end. Returns the process exit code.
inline int run(const RunConfig& c, std::ostream& log = std::cerr) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  Benchmark bench;
  try {
    bench = make_benchmark(c);
  } catch (const std::invalid_argument& e) {
    log << "fpcross: invalid configuration: " << e.what() << '\n';
    return kConfigError;
  }

  std::ofstream csv(c.output_path);
  if (!csv) {
    log << "fpcross: cannot open " << c.output_path << " for writing\n";
    return kConfigError;
  }
  csv << csv_header() << '\n' << std::flush;

  SolveOptions opts;
  opts.observers = bench.observers;
  opts.on_record = [&csv](const StepRecord& r) { csv << csv_row(r) << '\n' << std::flush; };

  SolveResult res;
  try {
    res = solve(bench.problem, bench.sizes, c.time_points, c.eps, CrossConfig{}, c.seed, opts);
  } catch (const std::exception& e) {
    res.failure = std::string("setup: ") + e.what();
  }
  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();

  std::ofstream js(summary_path(c.output_path));
  js << summary_json(c, bench, res, seconds).dump(2) << '\n';

  if (res.failure) {
    log << "fpcross: solver failure: " << *res.failure << '\n';
    return kSolverFailure;
  }
  return kSuccess;
}

// ---------------------------------------------------------------------------
// Argument parsing

struct ParseOutcome {
  std::optional<RunConfig> config;  ///< empty when the process should exit
  int exit_code = kSuccess;
};

/// Merges, in increasing precedence: problem defaults, --config JSON file,
/// command-line flags.
inline ParseOutcome parse_args(int argc, const char* const* argv, std::ostream& out = std::cout,
                               std::ostream& err = std::cerr) {
  CLI::App app{"Fokker-Planck solver in the tensor-train format", "fpcross"};
  app.require_subcommand(1);
  CLI::App* solve_cmd = app.add_subcommand("solve", "run a benchmark problem");

  std::string problem;
  Index grid = 0;
  Index steps = 0;
  double eps = 0.0;
  double t_final = 0.0;
  std::uint64_t seed = 0;
  std::string output;
  std::string config_file;

  auto* o_problem = solve_cmd->add_option("--problem", problem, "benchmark problem")
                        ->check(CLI::IsMember(problem_names()));
  auto* o_grid = solve_cmd->add_option("--grid", grid, "grid points per dimension")->check(CLI::Range(Index{2}, Index{1} << 20));
  auto* o_steps = solve_cmd->add_option("--steps,--time-points", steps, "number of time points M")
                      ->check(CLI::Range(Index{2}, Index{1} << 30));
  auto* o_eps = solve_cmd->add_option("--eps", eps, "solver accuracy")->check(CLI::PositiveNumber);
  auto* o_tfinal = solve_cmd->add_option("--t-final", t_final, "final time")->check(CLI::PositiveNumber);
  auto* o_seed = solve_cmd->add_option("--seed", seed, "random seed");
  auto* o_output = solve_cmd->add_option("--output", output, "CSV report path (summary goes to .json)");
  solve_cmd->add_option("--config", config_file, "JSON configuration file")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return ParseOutcome{std::nullopt, code == 0 ? kSuccess : kConfigError};
  }

  nlohmann::json file = nlohmann::json::object();
  if (!config_file.empty()) {
    try {
      std::ifstream in(config_file);
      file = nlohmann::json::parse(in);
    } catch (const std::exception& e) {
      err << "fpcross: cannot read config " << config_file << ": " << e.what() << '\n';
      return ParseOutcome{std::nullopt, kConfigError};
    }
  }

  try {
    std::string chosen = o_problem->count() ? problem : file.value("problem", std::string("oup1d"));
    RunConfig c = defaults_for(chosen);
    if (file.contains("grid_points")) c.grid_points = file.at("grid_points").get<Index>();
    if (file.contains("time_points")) c.time_points = file.at("time_points").get<Index>();
    if (file.contains("eps")) c.eps = file.at("eps").get<double>();
    if (file.contains("t_final")) c.t_final = file.at("t_final").get<double>();
    if (file.contains("seed")) c.seed = file.at("seed").get<std::uint64_t>();
    if (file.contains("output_path")) c.output_path = file.at("output_path").get<std::string>();
    if (o_grid->count()) c.grid_points = grid;
    if (o_steps->count()) c.time_points = steps;
    if (o_eps->count()) c.eps = eps;
    if (o_tfinal->count()) c.t_final = t_final;
    if (o_seed->count()) c.seed = seed;
    if (o_output->count()) c.output_path = output;
    c.validate();
    return ParseOutcome{c, kSuccess};
  } catch (const std::exception& e) {
    err << "fpcross: invalid configuration: " << e.what() << '\n' << app.help();
    return ParseOutcome{std::nullopt, kConfigError};
  }
}

inline int main(int argc, const char* const* argv) {
  const ParseOutcome parsed = parse_args(argc, argv);
  if (!parsed.config) return parsed.exit_code;
  return run(*parsed.config);
}

}  // namespace fpcross::cli
