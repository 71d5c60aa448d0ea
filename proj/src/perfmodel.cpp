#include "pipekrylov/perfmodel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pipekrylov/errors.hpp"

namespace pipekrylov::perf {

void validate(const MachineSpec& spec) {
  if (spec.nodes < 1 || spec.cores_per_node < 1) throw ParameterError("machine: node and core counts must be >= 1");
  if (spec.radix < 2) throw ParameterError("machine: tree radix must be >= 2");
  if (!(spec.word_bytes > 0.0) || !(spec.bandwidth > 0.0) || !(spec.t_s >= 0.0) || !(spec.t_c > 0.0)) {
    throw ParameterError("machine: word size, bandwidth and t_c must be positive, t_s >= 0");
  }
}

void validate(const CostModelParams& params) {
  if (!(params.N > 0.0) || params.nz < 1) throw ParameterError("model: N and nz must be positive");
  if (params.numax < 1 || params.restart < 1) throw ParameterError("model: numax and restart must be >= 1");
  if (!(params.kavg > 0.0 && params.kavg <= 1.0)) throw ParameterError("model: kavg must lie in (0, 1]");
  if (params.pc_inner_iters < 0) throw ParameterError("model: pc_inner_iters must be >= 0");
}

int tree_depth(std::uint64_t nodes, std::uint64_t radix) {
  int depth = 0;
  std::uint64_t reach = 1;
  while (reach < nodes) {
    reach *= radix;
    ++depth;
  }
  return depth;
}

double n_local(const MachineSpec& spec, const CostModelParams& params) { return params.N / spec.cores(); }

double t_red_comm(const MachineSpec& spec, double n_words) {
  return 2.0 * tree_depth(spec.nodes, spec.radix) * (spec.t_s + n_words * spec.t_w());
}

double t_red_calc(const MachineSpec& spec, double n_loc) {
  return (2.0 * n_loc + tree_depth(spec.nodes, spec.radix)) * spec.t_c;
}

double t_axpy(const MachineSpec& spec, double n_loc) { return 2.0 * n_loc * spec.t_c; }

double t_maxpy(const MachineSpec& spec, double m, double n_loc) { return 2.0 * m * n_loc * spec.t_c; }

double t_spmv_calc(const MachineSpec& spec, const CostModelParams& params) {
  return 2.0 * params.nz * n_local(spec, params) * spec.t_c;
}

double t_spmv_comm(const MachineSpec& spec, const CostModelParams& params) {
  const double face = std::pow(params.N / static_cast<double>(spec.nodes), 2.0 / 3.0);
  return 6.0 * (spec.t_s + face * spec.t_w());
}

double t_spmv(const MachineSpec& spec, const CostModelParams& params) {
  return std::max(t_spmv_calc(spec, params), t_spmv_comm(spec, params));
}

// Per inner CG step: local SpMV (2 nz), two AXPYs (4), two local dots (4) and
// the Jacobi scaling (1), plus one neighbour exchange shaped like an SpMV.
double t_pc(const MachineSpec& spec, const CostModelParams& params) {
  const double inner = params.pc_inner_iters * (2.0 * params.nz + 9.0) * n_local(spec, params) * spec.t_c;
  return inner + t_spmv_comm(spec, params);
}

bool is_modelled(Method m) {
  switch (m) {
    case Method::FCG:
    case Method::PIPEFCG:
    case Method::GCR:
    case Method::PIPEGCR:
    case Method::PIPEGCR_W:
    case Method::FGMRES:
    case Method::PIPEFGMRES: return true;
    default: return false;
  }
}

IterationCost iteration_cost(Method method, const MachineSpec& spec, const CostModelParams& params) {
  validate(spec);
  validate(params);
  const double n = n_local(spec, params);
  const double nu = params.nu_avg();
  const double axpy = t_axpy(spec, n);
  const double maxpy = t_maxpy(spec, nu, n);
  const double redcalc = t_red_calc(spec, n);
  const double spmv = t_spmv(spec, params);
  const double pc = t_pc(spec, params);
  const double local = 2.0 * n * spec.t_c;

  IterationCost c;
  switch (method) {
    case Method::FCG:
      c.t_calc = 2.0 * axpy + maxpy + (nu + 2.0) * redcalc + spmv + pc;
      c.t_red = t_red_comm(spec, nu + 1.0) + t_red_comm(spec, 1.0);
      break;
    case Method::PIPEFCG:
    case Method::PIPEGCR_W:
      c.t_calc = 4.0 * axpy + 4.0 * maxpy + (nu + 2.0) * redcalc + spmv + pc + local;
      c.t_red = std::max(0.0, t_red_comm(spec, nu + 2.0) - (spmv + pc + local));
      break;
    case Method::GCR:
      c.t_calc = 2.0 * axpy + maxpy + (nu + 2.0) * redcalc + spmv + pc;
      c.t_red = t_red_comm(spec, nu) + t_red_comm(spec, 2.0);
      break;
    case Method::PIPEGCR:
      c.t_calc = 3.0 * axpy + 3.0 * maxpy + (nu + 2.0) * redcalc + spmv + pc + local;
      c.t_red = std::max(0.0, t_red_comm(spec, nu + 2.0) - (pc + local));
      break;
    case Method::FGMRES:
      c.t_calc = maxpy + spec.t_c * n + (nu + 1.0) * redcalc + spmv + pc;
      c.t_red = t_red_comm(spec, nu) + t_red_comm(spec, 1.0);
      break;
    case Method::PIPEFGMRES:
      c.t_calc = nu * axpy + 3.0 * maxpy + (nu + 5.0) * spec.t_c * n + (nu + 2.0) * redcalc + spmv + pc;
      c.t_red = std::max(0.0, t_red_comm(spec, nu + 2.0) - (spmv + pc));
      break;
    default:
      throw ParameterError("no cost model for method " + std::string(to_string(method)));
  }
  return c;
}

std::vector<SweepRow> sweep(std::span<const Method> methods, const MachineSpec& base,
                            const CostModelParams& params, std::span<const std::uint64_t> node_counts) {
  std::vector<SweepRow> rows;
  rows.reserve(methods.size() * node_counts.size());
  for (const std::uint64_t nodes : node_counts) {
    MachineSpec spec = base;
    spec.nodes = nodes;
    for (const Method m : methods) rows.push_back({nodes, m, iteration_cost(m, spec, params)});
  }
  return rows;
}

std::vector<std::uint64_t> geometric_grid(std::uint64_t lo, std::uint64_t hi, std::uint64_t factor) {
  if (lo < 1 || hi < lo || factor < 2) throw ParameterError("geometric_grid: need 1 <= lo <= hi and factor >= 2");
  std::vector<std::uint64_t> grid;
  for (std::uint64_t v = lo; v <= hi; v *= factor) {
    grid.push_back(v);
    if (v > hi / factor) break;
  }
  return grid;
}

std::optional<std::uint64_t> find_crossover(Method standard, Method pipelined, const MachineSpec& base,
                                            const CostModelParams& params,
                                            std::span<const std::uint64_t> grid) {
  std::optional<std::uint64_t> found;
  for (const std::uint64_t nodes : grid) {
    MachineSpec spec = base;
    spec.nodes = nodes;
    const bool ahead = iteration_cost(pipelined, spec, params).total() < iteration_cost(standard, spec, params).total();
    if (!ahead) {
      found.reset();
    } else if (!found) {
      found = nodes;
    }
  }
  return found;
}

}  // namespace pipekrylov::perf
