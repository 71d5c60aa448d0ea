#pragma once

#include <deque>
#include <vector>

#include "pipekrylov/solver.hpp"

namespace pipekrylov::detail {

struct SolveContext {
  const SolverConfig& cfg;
  const SparseMatrix& A;
  Preconditioner& B;
  const Vector& b;
  const Vector& x0;
  const SolveOptions& options;
  ThetaMode theta;
};

/// Owns the trace and all stopping decisions shared by every method.
///
/// Usage per method: start() once with the initial natural norm, step() after
/// each x_i update, breakdown() when a recurred norm turns non-positive and
/// resume() after the restart has re-initialized the recurrences.
class Monitor {
 public:
  explicit Monitor(const SolveContext& ctx);

  /// Records iteration 0; true when x0 already satisfies the tolerance.
  bool start(const Vector& x, double natural);
  /// Records the next iteration; true when the solve must stop.
  bool step(const Vector& x, double natural, int nu);
  /// Flags the latest record. True when the breakdown is unrecoverable.
  bool breakdown();
  /// The method has re-initialized after a breakdown. `natural` is the fresh
  /// natural norm; true when it already meets the tolerance.
  bool resume(double natural);
  /// Regular end of a GMRES cycle; the next record carries the restart flag.
  void restart_cycle() { pending_restart_ = true; }

  int iteration() const { return trace_.empty() ? 0 : trace_.back().iter; }
  int restarts() const { return restarts_; }
  const SolveObserver& observer() const { return ctx_.options.observer; }

  SolveResult finish(Vector x);

 private:
  bool stagnated() const;
  IterationRecord make_record(const Vector& x, double natural, int nu) const;
  void stop(StopReason reason);

  const SolveContext& ctx_;
  ReductionLedger steady_;
  ReductionLedger init_;
  IterationTrace trace_;
  double tol_ = 0.0;
  bool pending_restart_ = false;
  bool progress_since_breakdown_ = true;
  int restarts_ = 0;
  bool stopped_ = false;
  StopReason reason_ = StopReason::max_it;
  double xtrue_norm_ = 0.0;
};

/// Sliding window of previous directions for the truncated Gram-Schmidt
/// process. Unused members stay empty for methods that do not carry them.
struct Direction {
  Vector p;
  Vector s;
  Vector q;
  Vector z;
  double eta = 0.0;
};

class DirectionHistory {
 public:
  explicit DirectionHistory(int capacity) : capacity_(static_cast<std::size_t>(capacity)) {}

  void push(Direction d) {
    if (dirs_.size() == capacity_) dirs_.pop_front();
    dirs_.push_back(std::move(d));
  }
  void clear() { dirs_.clear(); }
  std::size_t size() const { return dirs_.size(); }
  /// k = 0 is the most recent direction.
  const Direction& recent(std::size_t k) const { return dirs_[dirs_.size() - 1 - k]; }

 private:
  std::size_t capacity_;
  std::deque<Direction> dirs_;
};

/// Window size for the next step, clamped to what is stored.
int window(const SolverConfig& cfg, int local_iter, const DirectionHistory& h);

/// base + sum_k beta[k] * member(recent(k)), accumulated from the oldest
/// direction to the newest.
template <class Member>
Vector combine(const Vector& base, const std::vector<double>& beta, const DirectionHistory& h,
               Member member) {
  Vector out = base;
  for (std::size_t k = beta.size(); k-- > 0;) out.add_scaled(beta[k], h.recent(k).*member);
  return out;
}

ReductionLedger init_ledger(Method m);

SolveResult run_cg_family(const SolveContext& ctx);
SolveResult run_fcg_family(const SolveContext& ctx);
SolveResult run_cr_family(const SolveContext& ctx);
SolveResult run_gmres_family(const SolveContext& ctx);

}  // namespace pipekrylov::detail
