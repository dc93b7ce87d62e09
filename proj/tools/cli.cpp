#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "netcvx/admm.hpp"
#include "netcvx/error.hpp"
#include "netcvx/io.hpp"

namespace netcvx::cli {

namespace {

struct SolveFlags {
  std::string graph;
  std::string node_data;
  std::string node_objective;
  std::string edge_objective;
  std::string edge_data;
  double rho = 1.0;
  std::string rho_policy = "fixed";
  double mu = 10.0;
  double tau = 2.0;
  StoppingCriteria criteria;
  int threads = 0;
  bool verbose = false;
  std::string output = "-";
  std::string summary;
};

struct BenchFlags {
  BenchmarkConfig config;
};

int exit_code(SolveStatus status) { return status == SolveStatus::Converged ? kExitConverged : kExitMaxIters; }

int run_solve(const SolveFlags& f, std::ostream& out, std::ostream& err) {
  const ProblemGraph g =
      load_problem(f.graph, f.node_data, f.node_objective, f.edge_objective,
                   f.edge_data.empty() ? std::nullopt : std::optional<std::filesystem::path>(f.edge_data));

  SolveOptions options;
  options.criteria = f.criteria;
  options.rho = f.rho;
  options.threads = f.threads;
  options.verbose = f.verbose;
  options.trace = &err;
  if (f.rho_policy == "balance") options.policy = ResidualBalance{f.mu, f.tau, f.tau};

  const SolveResult result = admm::solve(g, options);

  if (f.output == "-") {
    write_solution(out, result.x_star);
  } else {
    std::ofstream file(f.output);
    if (!file) throw Error(ErrorCode::ParseError, "cannot write " + f.output);
    write_solution(file, result.x_star);
  }
  if (!f.summary.empty()) {
    std::ofstream file(f.summary);
    if (!file) throw Error(ErrorCode::ParseError, "cannot write " + f.summary);
    write_summary(file, result);
  }
  err << "status=" << to_string(result.status) << " iters=" << result.iters << " objective=" << result.objective
      << '\n';
  return exit_code(result.status);
}

}  // namespace

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Graph-structured convex optimization by ADMM", "netcvx"};
  app.require_subcommand(1);

  SolveFlags sf;
  CLI::App* solve = app.add_subcommand("solve", "Load a problem from files and solve it");
  solve->add_option("--graph", sf.graph, "Edge list file")->required();
  solve->add_option("--node-data", sf.node_data, "Node data CSV")->required();
  solve->add_option("--node-objective", sf.node_objective, "Node objective template")->required();
  solve->add_option("--edge-objective", sf.edge_objective, "Edge objective template")->required();
  solve->add_option("--edge-data", sf.edge_data, "Edge data CSV");
  solve->add_option("--rho", sf.rho, "Initial penalty parameter")->capture_default_str();
  solve->add_option("--rho-policy", sf.rho_policy, "Penalty update rule")
      ->check(CLI::IsMember({"fixed", "balance"}))
      ->capture_default_str();
  solve->add_option("--mu", sf.mu, "Residual ratio that triggers a rho change")->capture_default_str();
  solve->add_option("--tau", sf.tau, "Rho scaling factor")->capture_default_str();
  solve->add_option("--eps-abs", sf.criteria.eps_abs, "Absolute tolerance")->capture_default_str();
  solve->add_option("--eps-rel", sf.criteria.eps_rel, "Relative tolerance")->capture_default_str();
  solve->add_option("--max-iters", sf.criteria.max_iters, "Iteration limit")->capture_default_str();
  solve->add_option("--threads", sf.threads, "Worker threads (0 = all cores)")->capture_default_str();
  solve->add_flag("--verbose", sf.verbose, "Print one residual line per iteration");
  solve->add_option("--output", sf.output, "Solution CSV path ('-' for stdout)")->capture_default_str();
  solve->add_option("--summary", sf.summary, "Summary JSON path");

  BenchFlags bf;
  CLI::App* bench = app.add_subcommand("bench", "Solve a random 3-regular Huber / network-lasso instance");
  bench->add_option("--nodes", bf.config.nodes, "Node count (even, >= 4)")->capture_default_str();
  bench->add_option("--dim", bf.config.dim, "Variable size per node")->capture_default_str();
  bench->add_option("--seed", bf.config.seed, "Random seed")->capture_default_str();
  bench->add_option("--threads", bf.config.threads, "Worker threads (0 = all cores)")->capture_default_str();
  bench->add_option("--edge-weight", bf.config.edge_weight, "Network lasso weight")->capture_default_str();
  bench->add_option("--eps-abs", bf.config.criteria.eps_abs, "Absolute tolerance")->capture_default_str();
  bench->add_option("--eps-rel", bf.config.criteria.eps_rel, "Relative tolerance")->capture_default_str();
  bench->add_option("--max-iters", bf.config.criteria.max_iters, "Iteration limit")->capture_default_str();

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitConverged;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitConverged;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const CLI::App* failing = solve->parsed() ? solve : (bench->parsed() ? bench : &app);
    err << failing->help();
    return kExitError;
  }

  try {
    if (solve->parsed()) return run_solve(sf, out, err);
    const BenchmarkReport report = run_benchmark(bf.config);
    out << format_report(report) << '\n';
    return exit_code(report.status);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace netcvx::cli
