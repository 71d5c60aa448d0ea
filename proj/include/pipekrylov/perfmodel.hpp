#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pipekrylov/solver.hpp"

namespace pipekrylov::perf {

/// Machine constants. Defaults describe the hypothesized exascale machine.
struct MachineSpec {
  std::uint64_t nodes = std::uint64_t{1} << 20;
  std::uint64_t cores_per_node = std::uint64_t{1} << 10;
  double word_bytes = 32.0;
  double bandwidth = 1e11;  // bytes / s
  std::uint64_t radix = 8;
  double t_s = 1e-6;
  double t_c = 1073741824.0 / 1e18;  // 2^30 / 10^18 s per flop

  double cores() const { return static_cast<double>(nodes) * static_cast<double>(cores_per_node); }
  double t_w() const { return word_bytes / bandwidth; }
};

struct CostModelParams {
  double N = 8e9;  // 2000^3
  int nz = 7;
  int numax = 30;
  double kavg = 0.8;
  int restart = 30;
  int pc_inner_iters = 5;

  double nu_avg() const { return kavg * numax; }
};

struct IterationCost {
  double t_calc = 0.0;
  double t_red = 0.0;
  double total() const { return t_calc + t_red; }
};

/// Throws ParameterError on non-positive constants or kavg outside (0, 1].
void validate(const MachineSpec& spec);
void validate(const CostModelParams& params);

/// ceil(log_radix(nodes)) by repeated multiplication; 0 for a single node.
int tree_depth(std::uint64_t nodes, std::uint64_t radix);

double n_local(const MachineSpec& spec, const CostModelParams& params);

double t_red_comm(const MachineSpec& spec, double n_words);
double t_red_calc(const MachineSpec& spec, double n_loc);
double t_axpy(const MachineSpec& spec, double n_loc);
double t_maxpy(const MachineSpec& spec, double m, double n_loc);
double t_spmv_calc(const MachineSpec& spec, const CostModelParams& params);
double t_spmv_comm(const MachineSpec& spec, const CostModelParams& params);
double t_spmv(const MachineSpec& spec, const CostModelParams& params);
double t_pc(const MachineSpec& spec, const CostModelParams& params);

/// Modelled methods: FCG, PIPEFCG, GCR, PIPEGCR, PIPEGCR_W, FGMRES, PIPEFGMRES.
bool is_modelled(Method m);
/// Throws ParameterError for methods without a cost row.
IterationCost iteration_cost(Method method, const MachineSpec& spec, const CostModelParams& params);

struct SweepRow {
  std::uint64_t nodes = 0;
  Method method = Method::FCG;
  IterationCost cost;
};

/// Rows ordered by node count, then by the order of `methods`.
std::vector<SweepRow> sweep(std::span<const Method> methods, const MachineSpec& base,
                            const CostModelParams& params, std::span<const std::uint64_t> node_counts);

/// lo, lo*factor, ... up to and including hi when hit exactly.
std::vector<std::uint64_t> geometric_grid(std::uint64_t lo, std::uint64_t hi, std::uint64_t factor = 2);

/// Smallest grid point from which the pipelined total stays strictly below
/// the standard one for every larger grid point.
std::optional<std::uint64_t> find_crossover(Method standard, Method pipelined, const MachineSpec& base,
                                            const CostModelParams& params,
                                            std::span<const std::uint64_t> grid);

}  // namespace pipekrylov::perf
