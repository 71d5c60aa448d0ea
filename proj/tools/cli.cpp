#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <numeric>
#include <ostream>
#include <sstream>

#include "pipekrylov/errors.hpp"
#include "pipekrylov/perfmodel.hpp"
#include "pipekrylov/preconditioner.hpp"
#include "pipekrylov/problems.hpp"
#include "pipekrylov/solver.hpp"
#include "pipekrylov/trace_io.hpp"

namespace pipekrylov::cli {

namespace {

struct ProblemOpts {
  std::string kind = "poisson2d";
  std::size_t n = 16;
  double cond = 5.0;
  double contrast = 100.0;
  std::string symmetry = "symmetric";
};

struct PcOpts {
  std::string kind = "jacobi";
  double eta = 1e-4;
  std::size_t blocks = 4;
  int inner = 5;
};

struct SolverOpts {
  double rtol = 1e-8;
  double atol = 0.0;
  int max_it = 10000;
  int numax = 30;
  std::string truncation = "notay_mod";
  int restart = 30;
  double sigma = 0.0;
  int sigma_power = 0;
  std::string theta;
  bool no_true_residual = false;
  bool diag_scale = false;
  int stagnation_window = 50;
};

struct PerfOpts {
  std::vector<std::uint64_t> nodes;
  std::uint64_t min_nodes = std::uint64_t{1} << 10;
  std::uint64_t max_nodes = std::uint64_t{1} << 22;
  std::uint64_t factor = 2;
  std::vector<std::string> methods;
  std::string crossover;
  perf::MachineSpec machine;
  perf::CostModelParams params;
};

const std::vector<std::string> kProblems{"identity", "toy-diag", "poisson2d", "poisson3d", "sinker"};
const std::vector<std::string> kPcs{"identity", "jacobi", "block-jacobi", "nested-krylov", "noisy"};

void add_problem_options(CLI::App* app, ProblemOpts& p) {
  app->add_option("--problem", p.kind, "identity | toy-diag | poisson2d | poisson3d | sinker")
      ->check(CLI::IsMember(kProblems))
      ->capture_default_str();
  app->add_option("--n", p.n, "size (toy-diag) or grid points per side")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--cond", p.cond, "toy-diag condition number")->capture_default_str();
  app->add_option("--contrast", p.contrast, "sinker coefficient contrast")->capture_default_str();
  app->add_option("--symmetry", p.symmetry, "operator flag: symmetric | general")
      ->check(CLI::IsMember({"symmetric", "general"}))
      ->capture_default_str();
}

void add_pc_options(CLI::App* app, PcOpts& p) {
  app->add_option("--pc", p.kind, "identity | jacobi | block-jacobi | nested-krylov | noisy")
      ->check(CLI::IsMember(kPcs))
      ->capture_default_str();
  app->add_option("--eta", p.eta, "noise magnitude of the noisy preconditioner")->capture_default_str();
  app->add_option("--blocks", p.blocks, "block-jacobi block count")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--inner", p.inner, "inner CG iterations (block-jacobi, nested-krylov)")->capture_default_str();
}

void add_solver_options(CLI::App* app, SolverOpts& s) {
  app->add_option("--rtol", s.rtol)->capture_default_str();
  app->add_option("--atol", s.atol)->capture_default_str();
  app->add_option("--max-it", s.max_it)->capture_default_str();
  app->add_option("--numax", s.numax)->capture_default_str();
  app->add_option("--truncation", s.truncation, "notay_mod | standard")->capture_default_str();
  app->add_option("--restart", s.restart, "GMRES restart length")->capture_default_str();
  app->add_option("--sigma", s.sigma, "PIPEFGMRES/CGFGMRES shift")->capture_default_str();
  app->add_option("--sigma-power", s.sigma_power, "estimate sigma with this many power iterations")
      ->capture_default_str();
  app->add_option("--theta", s.theta, "zero | one | exact (pipelined FCG/GCR)");
  app->add_flag("--no-true-residual", s.no_true_residual, "skip ||b - Ax|| in the trace");
  app->add_flag("--diag-scale", s.diag_scale, "solve the symmetrically Jacobi-scaled system");
  app->add_option("--stagnation-window", s.stagnation_window, "0 disables the stagnation stop")
      ->capture_default_str();
}

ProblemInstance build_problem(const ProblemOpts& p, std::uint64_t seed) {
  ProblemInstance inst = [&] {
    if (p.kind == "identity") {
      const Vector b(p.n, 1.0 / std::sqrt(static_cast<double>(p.n)));
      return ProblemInstance{SparseMatrix::identity(p.n), b, b, "identity"};
    }
    if (p.kind == "toy-diag") return make_toy_diagonal(p.n, p.cond);
    if (p.kind == "poisson2d") return make_poisson(2, p.n, seed);
    if (p.kind == "poisson3d") return make_poisson(3, p.n, seed);
    return make_sinker(p.n, p.contrast);
  }();
  if (p.symmetry == "general") inst.A = inst.A.with_symmetry(Symmetry::general);
  return inst;
}

PcKind pc_kind(const std::string& s) {
  if (s == "identity") return PcKind::identity;
  if (s == "jacobi") return PcKind::jacobi;
  if (s == "block-jacobi") return PcKind::block_jacobi;
  if (s == "nested-krylov") return PcKind::nested_krylov;
  return PcKind::noisy;
}

std::unique_ptr<Preconditioner> build_pc(const PcOpts& p, const SparseMatrix& A, std::uint64_t seed) {
  return make_preconditioner(pc_kind(p.kind), A, p.eta, seed, p.blocks, p.inner);
}

Method method_or_throw(const std::string& s, const char* key) {
  const auto m = parse_method(s);
  if (!m) throw ConfigError(std::string("invalid value for ") + key + ": unknown method '" + s + "'");
  return *m;
}

SolverConfig build_config(const SolverOpts& s, Method method, std::uint64_t seed) {
  SolverConfig cfg;
  cfg.method = method;
  cfg.rtol = s.rtol;
  cfg.atol = s.atol;
  cfg.max_it = s.max_it;
  cfg.numax = s.numax;
  const auto trunc = parse_truncation(s.truncation);
  if (!trunc) throw ConfigError("invalid value for --truncation: '" + s.truncation + "'");
  cfg.truncation = *trunc;
  cfg.restart = s.restart;
  cfg.sigma.value = s.sigma;
  cfg.sigma.power_iters = s.sigma_power;
  cfg.sigma.seed = seed;
  if (!s.theta.empty()) {
    const auto theta = parse_theta_mode(s.theta);
    if (!theta) throw ConfigError("invalid value for --theta: '" + s.theta + "'");
    cfg.theta_mode = *theta;
  }
  cfg.monitor_true_residual = !s.no_true_residual;
  cfg.diagonal_scaling = s.diag_scale;
  cfg.stagnation_window = s.stagnation_window;
  validate(cfg);
  return cfg;
}

std::string opt_str(const std::optional<double>& v) { return v ? io::format_double(*v) : "na"; }

void print_summary(std::ostream& out, Method m, const SolveResult& res) {
  const IterationRecord& last = res.trace.back();
  out << to_string(m) << " iterations=" << res.iterations << " stop_reason=" << to_string(res.stop_reason)
      << " converged=" << (res.converged ? "true" : "false") << " restarts=" << res.restarts
      << " rnorm_natural=" << io::format_double(last.rnorm_natural) << " rnorm_true=" << opt_str(last.rnorm_true)
      << " relerr=" << opt_str(last.relerr) << '\n';
}

bool failed(const SolveResult& res) {
  return res.stop_reason == StopReason::breakdown_unrecoverable || res.stop_reason == StopReason::max_it;
}

template <class Writer>
void write_output(const std::string& path, std::ostream& fallback, Writer&& write) {
  if (path.empty()) {
    write(fallback);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open output file '" + path + "'");
  write(f);
  if (!f) throw ConfigError("failed writing '" + path + "'");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

// Appends `--key=value` for every config-file entry whose flag is not already
// on the command line. Keys must name an option of the chosen subcommand.
std::vector<std::string> with_config(CLI::App& app, const std::vector<std::string>& args) {
  auto it = std::find(args.begin(), args.end(), "--config");
  std::string path;
  if (it != args.end()) {
    if (std::next(it) == args.end()) return args;
    path = *std::next(it);
  } else {
    it = std::find_if(args.begin(), args.end(), [](const std::string& a) { return a.rfind("--config=", 0) == 0; });
    if (it == args.end()) return args;
    path = it->substr(9);
  }
  if (args.empty()) return args;
  CLI::App* sub = app.get_subcommand_no_throw(args.front());
  if (sub == nullptr) return args;

  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file '" + path + "'");
  std::vector<std::string> extended = args;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    const std::string flag = "--" + key;
    const CLI::Option* opt = sub->get_option_no_throw(flag);
    if (key.empty() || key == "config" || opt == nullptr) {
      throw ConfigError("unknown config key '" + key + "' in " + path);
    }
    const bool on_cli = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
    if (on_cli) continue;
    extended.push_back(flag + "=" + value);
  }
  return extended;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pipelined and flexible Krylov solvers with an analytic cost model", "pkrylov"};
  app.require_subcommand(1);

  ProblemOpts problem;
  PcOpts pc;
  SolverOpts solver;
  PerfOpts perf_opts;
  std::uint64_t seed = 0;
  std::string out_path;
  std::string method_name = "fcg";
  std::vector<std::string> method_list;
  bool strict = false;
  int samples = 20;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--config", "key = value file; command-line flags take precedence");
    sub->add_option("--seed", seed, "problem, preconditioner and sigma seed")->capture_default_str();
  };

  CLI::App* solve_cmd = app.add_subcommand("solve", "run one method and write its trace");
  common(solve_cmd);
  add_problem_options(solve_cmd, problem);
  add_pc_options(solve_cmd, pc);
  add_solver_options(solve_cmd, solver);
  solve_cmd->add_option("--solver", method_name, "method, e.g. pipefcg")->capture_default_str();
  solve_cmd->add_option("--out", out_path, "trace CSV (stdout when omitted)");
  solve_cmd->add_flag("--strict", strict, "exit 2 on max_it or unrecoverable breakdown");

  CLI::App* compare_cmd = app.add_subcommand("compare", "run several methods on one problem");
  common(compare_cmd);
  add_problem_options(compare_cmd, problem);
  add_pc_options(compare_cmd, pc);
  add_solver_options(compare_cmd, solver);
  compare_cmd->add_option("--solvers", method_list, "comma-separated methods")->delimiter(',')->required();
  compare_cmd->add_option("--out", out_path, "long-format trace CSV (stdout when omitted)");
  compare_cmd->add_flag("--strict", strict, "exit 2 when any method fails");

  CLI::App* perf_cmd = app.add_subcommand("perfmodel", "evaluate the iteration cost model over node counts");
  perf_cmd->add_option("--config", "key = value file; command-line flags take precedence");
  perf_cmd->add_option("--nodes", perf_opts.nodes, "explicit node counts")->delimiter(',');
  perf_cmd->add_option("--min-nodes", perf_opts.min_nodes)->capture_default_str();
  perf_cmd->add_option("--max-nodes", perf_opts.max_nodes)->capture_default_str();
  perf_cmd->add_option("--factor", perf_opts.factor, "geometric grid factor")->capture_default_str();
  perf_cmd->add_option("--methods", perf_opts.methods, "comma-separated methods (default: all modelled)")
      ->delimiter(',');
  perf_cmd->add_option("--crossover", perf_opts.crossover, "standard,pipelined pair to report");
  perf_cmd->add_option("--cores-per-node", perf_opts.machine.cores_per_node)->capture_default_str();
  perf_cmd->add_option("--word-bytes", perf_opts.machine.word_bytes)->capture_default_str();
  perf_cmd->add_option("--bandwidth", perf_opts.machine.bandwidth, "bytes/s")->capture_default_str();
  perf_cmd->add_option("--radix", perf_opts.machine.radix)->capture_default_str();
  perf_cmd->add_option("--ts", perf_opts.machine.t_s, "latency in s")->capture_default_str();
  perf_cmd->add_option("--tc", perf_opts.machine.t_c, "time per flop in s")->capture_default_str();
  perf_cmd->add_option("--N", perf_opts.params.N, "total unknowns")->capture_default_str();
  perf_cmd->add_option("--nz", perf_opts.params.nz)->capture_default_str();
  perf_cmd->add_option("--numax", perf_opts.params.numax)->capture_default_str();
  perf_cmd->add_option("--kavg", perf_opts.params.kavg)->capture_default_str();
  perf_cmd->add_option("--restart", perf_opts.params.restart)->capture_default_str();
  perf_cmd->add_option("--pc-iters", perf_opts.params.pc_inner_iters)->capture_default_str();
  perf_cmd->add_option("--out", out_path, "model CSV (stdout when omitted)");

  CLI::App* probe_cmd = app.add_subcommand("probe", "estimate the faithfulness constant of a preconditioner");
  common(probe_cmd);
  add_problem_options(probe_cmd, problem);
  add_pc_options(probe_cmd, pc);
  probe_cmd->add_option("--samples", samples)->check(CLI::PositiveNumber)->capture_default_str();

  try {
    const std::vector<std::string> full = with_config(app, args);
    std::vector<std::string> rev(full.rbegin(), full.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }

  try {
    if (solve_cmd->parsed()) {
      const Method method = method_or_throw(method_name, "--solver");
      const SolverConfig cfg = build_config(solver, method, seed);
      const ProblemInstance inst = build_problem(problem, seed);
      auto B = build_pc(pc, inst.A, seed);
      SolveOptions opts;
      opts.x_true = inst.x_true;
      const SolveResult res = solve(cfg, inst.A, *B, inst.b, Vector(inst.A.cols()), opts);
      write_output(out_path, out, [&](std::ostream& os) { io::write_trace_csv(os, res.trace); });
      print_summary(out_path.empty() ? err : out, method, res);
      return strict && failed(res) ? kSolverFailure : kOk;
    }

    if (compare_cmd->parsed()) {
      std::vector<Method> methods;
      for (const auto& name : method_list) {
        const Method m = method_or_throw(name, "--solvers");
        if (std::find(methods.begin(), methods.end(), m) != methods.end()) {
          err << "warning: duplicate method '" << name << "' ignored\n";
          continue;
        }
        methods.push_back(m);
      }
      const ProblemInstance inst = build_problem(problem, seed);
      std::vector<io::LabelledTrace> runs;
      bool any_failed = false;
      std::ostream& summary = out_path.empty() ? err : out;
      for (const Method m : methods) {
        const SolverConfig cfg = build_config(solver, m, seed);
        auto B = build_pc(pc, inst.A, seed);
        SolveOptions opts;
        opts.x_true = inst.x_true;
        SolveResult res = solve(cfg, inst.A, *B, inst.b, Vector(inst.A.cols()), opts);
        print_summary(summary, m, res);
        any_failed = any_failed || failed(res);
        runs.push_back({std::string(to_string(m)), std::move(res.trace)});
      }
      write_output(out_path, out, [&](std::ostream& os) { io::write_compare_csv(os, runs); });
      return strict && any_failed ? kSolverFailure : kOk;
    }

    if (perf_cmd->parsed()) {
      std::vector<Method> methods;
      if (perf_opts.methods.empty()) {
        for (const Method m : {Method::FCG, Method::PIPEFCG, Method::GCR, Method::PIPEGCR, Method::PIPEGCR_W,
                               Method::FGMRES, Method::PIPEFGMRES}) {
          methods.push_back(m);
        }
      } else {
        for (const auto& name : perf_opts.methods) {
          const Method m = method_or_throw(name, "--methods");
          if (!perf::is_modelled(m)) throw ConfigError("invalid value for --methods: no cost model for " + name);
          if (std::find(methods.begin(), methods.end(), m) == methods.end()) methods.push_back(m);
        }
      }
      std::vector<std::uint64_t> grid = perf_opts.nodes;
      if (grid.empty()) {
        grid = perf::geometric_grid(perf_opts.min_nodes, perf_opts.max_nodes, perf_opts.factor);
      } else {
        std::sort(grid.begin(), grid.end());
        grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
      }
      const auto rows = perf::sweep(methods, perf_opts.machine, perf_opts.params, grid);
      write_output(out_path, out, [&](std::ostream& os) { io::write_perf_csv(os, rows); });
      if (!perf_opts.crossover.empty()) {
        const auto pair = split_list(perf_opts.crossover);
        if (pair.size() != 2) throw ConfigError("invalid value for --crossover: expected two methods");
        const Method a = method_or_throw(pair[0], "--crossover");
        const Method b = method_or_throw(pair[1], "--crossover");
        const auto x = perf::find_crossover(a, b, perf_opts.machine, perf_opts.params, grid);
        out << "crossover " << to_string(a) << ' ' << to_string(b) << ' '
            << (x ? std::to_string(*x) : std::string("none")) << '\n';
      }
      return kOk;
    }

    if (probe_cmd->parsed()) {
      const ProblemInstance inst = build_problem(problem, seed);
      auto B = build_pc(pc, inst.A, seed);
      const FaithfulnessEstimate est = probe_faithfulness(*B, inst.A, samples, seed);
      const auto [lo, hi] = std::minmax_element(est.ratios.begin(), est.ratios.end());
      const double mean = std::accumulate(est.ratios.begin(), est.ratios.end(), 0.0) / est.samples;
      out << "preconditioner=" << B->name() << " samples=" << est.samples
          << " c_hat=" << io::format_double(est.c_hat) << " min=" << io::format_double(*lo)
          << " mean=" << io::format_double(mean) << " max=" << io::format_double(*hi) << '\n';
      return kOk;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }
  return kUsageError;
}

}  // namespace pipekrylov::cli
