#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pipekrylov/linalg.hpp"
#include "pipekrylov/preconditioner.hpp"

namespace pipekrylov {

enum class Method {
  PCG,
  CGCG,
  PIPECG,
  FCG,
  CGFCG,
  PIPEFCG_NAIVE,
  PIPEFCG,
  GCR,
  PCR,
  PIPEGCR,
  PIPEGCR_W,
  FGMRES,
  CGFGMRES,
  PIPEFGMRES,
};

enum class MethodFamily { cg, fcg, cr, gmres };

enum class Truncation { notay_mod, standard };

/// How the pipelined FCG/GCR variants form m_i from the recurred u~_i.
///   zero:  m = B(w)                     (naive unrolling)
///   one:   m = u~ + B(w - r)            (stabilized, theta fixed at 1)
///   exact: m = theta u~ + B(w - theta r), theta = <r, w> / ||r||^2
enum class ThetaMode { zero, one, exact };

enum class StopReason { rtol, atol, max_it, stagnation, breakdown_unrecoverable };

std::string_view to_string(Method m);
std::string_view to_string(Truncation t);
std::string_view to_string(ThetaMode t);
std::string_view to_string(StopReason r);
/// Case-insensitive; accepts the enumerator spelling (e.g. "pipefcg", "PIPEGCR_W").
std::optional<Method> parse_method(std::string_view s);
std::optional<Truncation> parse_truncation(std::string_view s);
std::optional<ThetaMode> parse_theta_mode(std::string_view s);

MethodFamily family_of(Method m);
bool is_pipelined(Method m);

/// Shift for the GMRES family. A positive `power_iters` replaces `value`
/// with estimate_sigma(A, B, power_iters, seed) at solve start.
struct ShiftSpec {
  double value = 0.0;
  int power_iters = 0;
  std::uint64_t seed = 0;
};

struct SolverConfig {
  Method method = Method::FCG;
  double rtol = 1e-8;
  double atol = 0.0;
  int max_it = 10000;
  int numax = 30;
  Truncation truncation = Truncation::notay_mod;
  int restart = 30;
  ShiftSpec sigma;
  /// Unset means the method default: one for PIPEFCG/PIPEGCR/PIPEGCR_W,
  /// zero for PIPEFCG_NAIVE (which cannot be overridden).
  std::optional<ThetaMode> theta_mode;
  bool monitor_true_residual = true;
  /// Solve D^{-1/2} A D^{-1/2} y = D^{-1/2} b instead; the preconditioner then
  /// acts on the scaled system and trace norms refer to it.
  bool diagonal_scaling = false;
  /// Stop with `stagnation` when the best natural norm of the last
  /// `stagnation_window` iterations is not below (1 - stagnation_decrease)
  /// times the best one before them. A window of 0 disables the test.
  int stagnation_window = 50;
  double stagnation_decrease = 1e-4;
};

/// Throws ConfigError on out-of-range fields.
void validate(const SolverConfig& cfg);
ThetaMode effective_theta_mode(const SolverConfig& cfg);

struct OverlapTags {
  bool local = false;
  bool pc = false;
  bool spmv = false;

  bool empty() const { return !local && !pc && !spmv; }
  /// '+'-joined in alphabetical order, e.g. "pc+spmv"; empty when none.
  std::string to_string() const;
  static std::optional<OverlapTags> parse(std::string_view s);
  bool operator==(const OverlapTags&) const = default;
};

/// Reduction phases a method issues per iteration.
struct ReductionLedger {
  int blocking = 0;
  int overlapped = 0;
  OverlapTags tags;
  bool operator==(const ReductionLedger&) const = default;
};

struct IterationRecord {
  int iter = 0;
  double rnorm_natural = 0.0;
  std::optional<double> rnorm_true;
  std::optional<double> relerr;
  int nu_used = 0;
  int red_blocking = 0;
  int red_overlapped = 0;
  OverlapTags overlap_tags;
  bool breakdown = false;
  bool restarted = false;

  bool operator==(const IterationRecord&) const = default;
};

using IterationTrace = std::vector<IterationRecord>;

struct SolveResult {
  Vector x;
  bool converged = false;
  int iterations = 0;
  StopReason stop_reason = StopReason::max_it;
  IterationTrace trace;
  int restarts = 0;
  double sigma = 0.0;
  /// estimate_sigma hit a zero vector.
  bool sigma_warning = false;
};

/// Optional taps into solver internals, used by diagnostics and tests.
/// Indices are global iteration numbers. Vectors are only valid during the call.
struct SolveObserver {
  /// CG/FCG/CR families: direction p_i, its transform s_i (recurred where the
  /// method recurs it) and the eta_i the method divides by.
  std::function<void(int iter, const Vector& p, const Vector& s, double eta)> on_direction;
  /// CG/FCG/CR families: the recurred residual r_i.
  std::function<void(int iter, const Vector& r)> on_residual;
  /// theta_i from the exact projection mode.
  std::function<void(int iter, double theta)> on_theta;
  /// GMRES family: basis vector p_k and its preconditioned image u_k (or u~_k)
  /// within restart cycle `cycle`.
  std::function<void(int cycle, int k, const Vector& p, const Vector& u)> on_basis;
  std::function<void(int iter)> on_restart;
};

struct SolveOptions {
  std::optional<Vector> x_true;
  SolveObserver observer;
};

/// Runs cfg.method on A x = b from x0.
///
/// Throws DimensionError on size mismatch and ConfigError when the method
/// requires a symmetric-flagged operator (CG/FCG families, PCR) or a linear
/// preconditioner (PCG, CGCG, PIPECG, PCR) and does not get one.
SolveResult solve(const SolverConfig& cfg, const SparseMatrix& A, Preconditioner& B, const Vector& b,
                  const Vector& x0, const SolveOptions& options = {});

/// Number of previous directions used at iteration i >= 1 (counted from the
/// last restart), before clamping to the stored history.
///   notay_mod: min(i, mod(i, numax) + 1)
///   standard:  min(i, numax)
int truncation_window(int i, int numax, Truncation strategy);

struct MUpdate {
  Vector m;
  /// Projection weight actually used (0 or 1 for the fixed modes).
  double theta = 0.0;
  /// exact mode with r = 0: theta is undefined and m is not formed.
  bool theta_undefined = false;
};

MUpdate stabilized_m_update(ThetaMode mode, Preconditioner& B, const Vector& u_tilde, const Vector& w,
                            const Vector& r);

struct SigmaEstimate {
  double sigma = 0.0;
  bool zero_vector = false;
};

/// k power-iteration steps on v -> A B(v) from a seeded random start; returns
/// ||A B(v)|| / ||v|| of the last step.
SigmaEstimate estimate_sigma(const SparseMatrix& A, Preconditioner& B, int k, std::uint64_t seed);

/// Per-iteration reduction ledger of a method in steady state.
ReductionLedger steady_state_ledger(Method m, ThetaMode theta);

}  // namespace pipekrylov
