#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <string>
#include <utility>

#include "pipekrylov/problems.hpp"
#include "pipekrylov/rng.hpp"
#include "solver_detail.hpp"

namespace pipekrylov {

namespace {

constexpr std::array<std::pair<Method, std::string_view>, 14> kMethodNames{{
    {Method::PCG, "PCG"},
    {Method::CGCG, "CGCG"},
    {Method::PIPECG, "PIPECG"},
    {Method::FCG, "FCG"},
    {Method::CGFCG, "CGFCG"},
    {Method::PIPEFCG_NAIVE, "PIPEFCG_NAIVE"},
    {Method::PIPEFCG, "PIPEFCG"},
    {Method::GCR, "GCR"},
    {Method::PCR, "PCR"},
    {Method::PIPEGCR, "PIPEGCR"},
    {Method::PIPEGCR_W, "PIPEGCR_W"},
    {Method::FGMRES, "FGMRES"},
    {Method::CGFGMRES, "CGFGMRES"},
    {Method::PIPEFGMRES, "PIPEFGMRES"},
}};

std::string normalize(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) out.push_back(c == '-' ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool requires_linear_pc(Method m) {
  return m == Method::PCG || m == Method::CGCG || m == Method::PIPECG || m == Method::PCR;
}

bool requires_symmetric(Method m) {
  const MethodFamily f = family_of(m);
  return f == MethodFamily::cg || f == MethodFamily::fcg || m == Method::PCR;
}

}  // namespace

std::string_view to_string(Method m) {
  for (const auto& [method, name] : kMethodNames) {
    if (method == m) return name;
  }
  return "?";
}

std::string_view to_string(Truncation t) { return t == Truncation::notay_mod ? "notay_mod" : "standard"; }

std::string_view to_string(ThetaMode t) {
  switch (t) {
    case ThetaMode::zero: return "zero";
    case ThetaMode::one: return "one";
    case ThetaMode::exact: return "exact";
  }
  return "?";
}

std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::rtol: return "rtol";
    case StopReason::atol: return "atol";
    case StopReason::max_it: return "max_it";
    case StopReason::stagnation: return "stagnation";
    case StopReason::breakdown_unrecoverable: return "breakdown_unrecoverable";
  }
  return "?";
}

std::optional<Method> parse_method(std::string_view s) {
  const std::string key = normalize(s);
  for (const auto& [method, name] : kMethodNames) {
    if (normalize(name) == key) return method;
  }
  return std::nullopt;
}

std::optional<Truncation> parse_truncation(std::string_view s) {
  const std::string key = normalize(s);
  if (key == "notay_mod" || key == "notay") return Truncation::notay_mod;
  if (key == "standard") return Truncation::standard;
  return std::nullopt;
}

std::optional<ThetaMode> parse_theta_mode(std::string_view s) {
  const std::string key = lower(s);
  if (key == "zero" || key == "0") return ThetaMode::zero;
  if (key == "one" || key == "1") return ThetaMode::one;
  if (key == "exact") return ThetaMode::exact;
  return std::nullopt;
}

MethodFamily family_of(Method m) {
  switch (m) {
    case Method::PCG:
    case Method::CGCG:
    case Method::PIPECG: return MethodFamily::cg;
    case Method::FCG:
    case Method::CGFCG:
    case Method::PIPEFCG_NAIVE:
    case Method::PIPEFCG: return MethodFamily::fcg;
    case Method::GCR:
    case Method::PCR:
    case Method::PIPEGCR:
    case Method::PIPEGCR_W: return MethodFamily::cr;
    case Method::FGMRES:
    case Method::CGFGMRES:
    case Method::PIPEFGMRES: return MethodFamily::gmres;
  }
  return MethodFamily::fcg;
}

bool is_pipelined(Method m) {
  return m == Method::PIPECG || m == Method::PIPEFCG_NAIVE || m == Method::PIPEFCG || m == Method::PIPEGCR ||
         m == Method::PIPEGCR_W || m == Method::PIPEFGMRES;
}

void validate(const SolverConfig& cfg) {
  if (!(cfg.rtol > 0.0 && cfg.rtol < 1.0)) throw ConfigError("rtol must lie in (0, 1)");
  if (!(cfg.atol >= 0.0)) throw ConfigError("atol must be >= 0");
  if (cfg.max_it < 1) throw ConfigError("max_it must be >= 1");
  if (cfg.numax < 1) throw ConfigError("numax must be >= 1");
  if (cfg.restart < 1) throw ConfigError("restart must be >= 1");
  if (cfg.sigma.power_iters < 0) throw ConfigError("sigma power iterations must be >= 0");
  if (!std::isfinite(cfg.sigma.value)) throw ConfigError("sigma must be finite");
  if (cfg.stagnation_window < 0) throw ConfigError("stagnation window must be >= 0");
  if (cfg.method == Method::PIPEFCG_NAIVE && cfg.theta_mode && *cfg.theta_mode != ThetaMode::zero) {
    throw ConfigError("PIPEFCG_NAIVE fixes theta_mode = zero");
  }
}

ThetaMode effective_theta_mode(const SolverConfig& cfg) {
  if (cfg.method == Method::PIPEFCG_NAIVE) return ThetaMode::zero;
  return cfg.theta_mode.value_or(ThetaMode::one);
}

std::string OverlapTags::to_string() const {
  std::string out;
  const auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += '+';
    out += name;
  };
  add(local, "local");
  add(pc, "pc");
  add(spmv, "spmv");
  return out;
}

std::optional<OverlapTags> OverlapTags::parse(std::string_view s) {
  OverlapTags tags;
  while (!s.empty()) {
    const auto cut = s.find('+');
    const std::string_view tok = s.substr(0, cut);
    if (tok == "local") {
      tags.local = true;
    } else if (tok == "pc") {
      tags.pc = true;
    } else if (tok == "spmv") {
      tags.spmv = true;
    } else {
      return std::nullopt;
    }
    if (cut == std::string_view::npos) break;
    s.remove_prefix(cut + 1);
    if (s.empty()) return std::nullopt;
  }
  return tags;
}

int truncation_window(int i, int numax, Truncation strategy) {
  if (i < 1) throw ParameterError("truncation_window: iteration index must be >= 1");
  if (numax < 1) throw ParameterError("truncation_window: numax must be >= 1");
  if (strategy == Truncation::standard) return std::min(i, numax);
  return std::min(i, i % numax + 1);
}

MUpdate stabilized_m_update(ThetaMode mode, Preconditioner& B, const Vector& u_tilde, const Vector& w,
                            const Vector& r) {
  if (u_tilde.size() != w.size() || w.size() != r.size()) {
    throw DimensionError("stabilized_m_update: length mismatch");
  }
  switch (mode) {
    case ThetaMode::zero: return {B.apply(w), 0.0, false};
    case ThetaMode::one: return {axpy(B.apply(axpy(w, -1.0, r)), 1.0, u_tilde), 1.0, false};
    case ThetaMode::exact: {
      const double rr = dot(r, r);
      if (rr == 0.0) return {Vector(), 0.0, true};
      const double theta = dot(r, w) / rr;
      Vector m = B.apply(axpy(w, -theta, r));
      m.add_scaled(theta, u_tilde);
      return {std::move(m), theta, false};
    }
  }
  throw ParameterError("stabilized_m_update: unknown mode");
}

SigmaEstimate estimate_sigma(const SparseMatrix& A, Preconditioner& B, int k, std::uint64_t seed) {
  if (k < 1) throw ParameterError("estimate_sigma: k must be >= 1");
  GaussianSampler gauss(seed);
  Vector v = gauss.unit_vector(A.cols());
  double ratio = 0.0;
  for (int step = 0; step < k; ++step) {
    Vector w = apply(A, B.apply(v));
    const double nw = norm2(w);
    const double nv = norm2(v);
    if (nw == 0.0 || nv == 0.0) return {0.0, true};
    ratio = nw / nv;
    v = std::move(w.scale(1.0 / nw));
  }
  return {ratio, false};
}

ReductionLedger steady_state_ledger(Method m, ThetaMode theta) {
  const ReductionLedger two{2, 0, {}};
  const ReductionLedger one{1, 0, {}};
  switch (m) {
    case Method::PCG:
    case Method::FCG:
    case Method::GCR:
    case Method::PCR:
    case Method::FGMRES: return two;
    case Method::CGCG:
    case Method::CGFCG:
    case Method::CGFGMRES: return one;
    case Method::PIPECG:
    case Method::PIPEFGMRES: return {0, 1, {false, true, true}};
    case Method::PIPEFCG_NAIVE:
    case Method::PIPEFCG:
    case Method::PIPEGCR:
    case Method::PIPEGCR_W: {
      if (m == Method::PIPEFCG_NAIVE) theta = ThetaMode::zero;
      ReductionLedger led{0, 1, {}};
      led.tags.pc = true;
      led.tags.spmv = m != Method::PIPEGCR;
      // The u~ + B(w - r) form adds 2n local flops to the overlap window.
      led.tags.local = theta != ThetaMode::zero;
      // Exact theta needs <r, w> and ||r||^2 before B can be applied.
      if (theta == ThetaMode::exact) led.blocking = 1;
      return led;
    }
  }
  return two;
}

namespace detail {

ReductionLedger init_ledger(Method m) {
  switch (m) {
    case Method::PCG:
    case Method::FCG:
    case Method::GCR:
    case Method::PCR: return {2, 0, {}};
    default: return {1, 0, {}};
  }
}

int window(const SolverConfig& cfg, int local_iter, const DirectionHistory& h) {
  const int nu = truncation_window(local_iter, cfg.numax, cfg.truncation);
  return std::min(nu, static_cast<int>(h.size()));
}

Monitor::Monitor(const SolveContext& ctx)
    : ctx_(ctx), steady_(steady_state_ledger(ctx.cfg.method, ctx.theta)), init_(init_ledger(ctx.cfg.method)) {
  if (ctx.options.x_true) xtrue_norm_ = norm2(*ctx.options.x_true);
}

IterationRecord Monitor::make_record(const Vector& x, double natural, int nu) const {
  IterationRecord rec;
  rec.iter = trace_.empty() ? 0 : trace_.back().iter + 1;
  rec.rnorm_natural = natural;
  rec.nu_used = nu;
  if (ctx_.cfg.monitor_true_residual) rec.rnorm_true = norm2(axpy(ctx_.b, -1.0, apply(ctx_.A, x)));
  if (ctx_.options.x_true) {
    const double err = norm2(axpy(*ctx_.options.x_true, -1.0, x));
    rec.relerr = xtrue_norm_ > 0.0 ? err / xtrue_norm_ : err;
  }
  return rec;
}

void Monitor::stop(StopReason reason) {
  stopped_ = true;
  reason_ = reason;
}

bool Monitor::start(const Vector& x, double natural) {
  IterationRecord rec = make_record(x, natural, 0);
  rec.red_blocking = init_.blocking;
  rec.red_overlapped = init_.overlapped;
  rec.overlap_tags = init_.tags;
  trace_.push_back(rec);
  if (!std::isfinite(natural)) {
    stop(StopReason::breakdown_unrecoverable);
    return true;
  }
  tol_ = std::max(ctx_.cfg.rtol * natural, ctx_.cfg.atol);
  if (natural <= tol_) {
    stop(ctx_.cfg.rtol * natural >= ctx_.cfg.atol ? StopReason::rtol : StopReason::atol);
    return true;
  }
  return false;
}

bool Monitor::step(const Vector& x, double natural, int nu) {
  if (stopped_) return true;
  if (!std::isfinite(natural) || !all_finite(x)) {
    stop(StopReason::breakdown_unrecoverable);
    return true;
  }
  IterationRecord rec = make_record(x, natural, nu);
  rec.red_blocking = steady_.blocking;
  rec.red_overlapped = steady_.overlapped;
  rec.overlap_tags = steady_.tags;
  if (pending_restart_) {
    rec.restarted = true;
    rec.red_blocking += init_.blocking;
    rec.red_overlapped += init_.overlapped;
    pending_restart_ = false;
  }
  trace_.push_back(rec);
  progress_since_breakdown_ = true;

  if (natural <= tol_) {
    stop(natural <= ctx_.cfg.rtol * trace_.front().rnorm_natural ? StopReason::rtol : StopReason::atol);
  } else if (rec.iter >= ctx_.cfg.max_it) {
    stop(StopReason::max_it);
  } else if (stagnated()) {
    stop(StopReason::stagnation);
  }
  return stopped_;
}

bool Monitor::breakdown() {
  if (!trace_.empty()) trace_.back().breakdown = true;
  if (!progress_since_breakdown_ || stopped_) {
    stop(StopReason::breakdown_unrecoverable);
    return true;
  }
  progress_since_breakdown_ = false;
  pending_restart_ = true;
  ++restarts_;
  if (ctx_.options.observer.on_restart) ctx_.options.observer.on_restart(iteration());
  return false;
}

bool Monitor::resume(double natural) {
  if (!std::isfinite(natural)) {
    stop(StopReason::breakdown_unrecoverable);
    return true;
  }
  if (natural <= tol_) {
    stop(natural <= ctx_.cfg.rtol * trace_.front().rnorm_natural ? StopReason::rtol : StopReason::atol);
    return true;
  }
  return false;
}

bool Monitor::stagnated() const {
  const int w = ctx_.cfg.stagnation_window;
  if (w <= 0 || static_cast<int>(trace_.size()) <= w) return false;
  const auto split = trace_.end() - w;
  double best_before = trace_.front().rnorm_natural;
  for (auto it = trace_.begin(); it != split; ++it) best_before = std::min(best_before, it->rnorm_natural);
  double best_recent = split->rnorm_natural;
  for (auto it = split; it != trace_.end(); ++it) best_recent = std::min(best_recent, it->rnorm_natural);
  return best_recent > (1.0 - ctx_.cfg.stagnation_decrease) * best_before;
}

SolveResult Monitor::finish(Vector x) {
  SolveResult res;
  res.x = std::move(x);
  res.stop_reason = stopped_ ? reason_ : StopReason::max_it;
  res.converged = res.stop_reason == StopReason::rtol || res.stop_reason == StopReason::atol;
  res.iterations = iteration();
  res.trace = std::move(trace_);
  res.restarts = restarts_;
  return res;
}

}  // namespace detail

SolveResult solve(const SolverConfig& cfg, const SparseMatrix& A, Preconditioner& B, const Vector& b,
                  const Vector& x0, const SolveOptions& options) {
  validate(cfg);
  if (A.rows() != A.cols()) throw DimensionError("solve: operator must be square");
  if (b.size() != A.rows() || x0.size() != A.cols()) throw DimensionError("solve: b/x0 length mismatch");
  if (options.x_true && options.x_true->size() != A.cols()) throw DimensionError("solve: x_true length mismatch");
  const std::string name(to_string(cfg.method));
  if (requires_symmetric(cfg.method) && !A.is_symmetric_flagged()) {
    throw ConfigError(name + " requires a symmetric-flagged operator");
  }
  if (requires_linear_pc(cfg.method) && !B.is_linear()) {
    throw ConfigError(name + " requires a linear preconditioner (got " + B.name() + ")");
  }

  if (cfg.diagonal_scaling) {
    const ProblemInstance scaled = scale_symmetric({A, b, options.x_true, ""});
    // x = D^{-1/2} y, so y0 = D^{1/2} x0.
    const Vector d = A.diagonal_values();
    Vector y0(x0.size());
    for (std::size_t i = 0; i < y0.size(); ++i) y0[i] = x0[i] * std::sqrt(d[i]);
    SolverConfig inner = cfg;
    inner.diagonal_scaling = false;
    SolveOptions inner_opts = options;
    inner_opts.x_true = scaled.x_true;
    SolveResult res = solve(inner, scaled.A, B, scaled.b, y0, inner_opts);
    for (std::size_t i = 0; i < res.x.size(); ++i) res.x[i] /= std::sqrt(d[i]);
    return res;
  }

  const detail::SolveContext ctx{cfg, A, B, b, x0, options, effective_theta_mode(cfg)};
  switch (family_of(cfg.method)) {
    case MethodFamily::cg: return detail::run_cg_family(ctx);
    case MethodFamily::fcg: return detail::run_fcg_family(ctx);
    case MethodFamily::cr: return detail::run_cr_family(ctx);
    case MethodFamily::gmres: return detail::run_gmres_family(ctx);
  }
  throw ConfigError("unknown method");
}

}  // namespace pipekrylov
