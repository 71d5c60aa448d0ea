#include <cmath>

#include "solver_detail.hpp"

namespace pipekrylov::detail {

namespace {

// u is u_i for GCR/PCR and the recurred u~_i for the pipelined variants.
// w is A u_i, explicit or recurred.
struct CrState {
  Vector r, u, w;
  double gamma = 0.0;
};

bool pipelined(Method m) { return m == Method::PIPEGCR || m == Method::PIPEGCR_W; }

CrState cr_init(const SolveContext& ctx, const Vector& x, DirectionHistory& hist) {
  const Method method = ctx.cfg.method;
  CrState st;
  st.r = axpy(ctx.b, -1.0, apply(ctx.A, x));
  st.u = ctx.B.apply(st.r);

  Direction d;
  d.p = st.u;
  d.s = apply(ctx.A, d.p);
  st.gamma = dot(st.r, d.s);
  d.eta = dot(d.s, d.s);
  if (pipelined(method)) {
    st.w = d.s;
    d.q = ctx.B.apply(d.s);
    if (method == Method::PIPEGCR_W) d.z = apply(ctx.A, d.q);
  }
  hist.clear();
  hist.push(std::move(d));
  return st;
}

}  // namespace

SolveResult run_cr_family(const SolveContext& ctx) {
  const Method method = ctx.cfg.method;
  Monitor mon(ctx);
  const SolveObserver& obs = mon.observer();
  Vector x = ctx.x0;
  DirectionHistory hist(method == Method::PCR ? 1 : ctx.cfg.numax);
  int local = 0;

  CrState st = cr_init(ctx, x, hist);
  const auto natural = [&] { return norm2(st.r); };
  const auto broken = [&] { return !(hist.recent(0).eta > 0.0); };
  const auto restart = [&] {
    do {
      if (mon.breakdown()) return true;
      st = cr_init(ctx, x, hist);
      local = 0;
      if (mon.resume(natural())) return true;
    } while (broken());
    return false;
  };
  const auto emit = [&] {
    if (!obs.on_direction) return;
    const Direction& d = hist.recent(0);
    obs.on_direction(mon.iteration(), d.p, d.s, d.eta);
  };

  if (mon.start(x, natural())) return mon.finish(std::move(x));
  if (broken() && restart()) return mon.finish(std::move(x));
  emit();

  while (true) {
    ++local;
    {
      const Direction& last = hist.recent(0);
      const double alpha = st.gamma / last.eta;
      x.add_scaled(alpha, last.p);
      st.r.add_scaled(-alpha, last.s);
      if (pipelined(method)) {
        st.u.add_scaled(-alpha, last.q);
        if (method == Method::PIPEGCR_W) {
          st.w.add_scaled(-alpha, last.z);
        } else {
          st.w = apply(ctx.A, st.u);
        }
      } else {
        st.u = ctx.B.apply(st.r);
        st.w = apply(ctx.A, st.u);
      }
    }

    const double gamma_prev = st.gamma;
    std::vector<double> beta;
    if (method == Method::PCR) {
      st.gamma = dot(st.r, st.w);
      beta.push_back(st.gamma / gamma_prev);
    } else {
      const int nu = window(ctx.cfg, local, hist);
      beta.resize(static_cast<std::size_t>(nu));
      for (int k = 0; k < nu; ++k) {
        const Direction& d = hist.recent(static_cast<std::size_t>(k));
        beta[static_cast<std::size_t>(k)] = -dot(st.w, d.s) / d.eta;
      }
    }
    if (obs.on_residual) obs.on_residual(mon.iteration() + 1, st.r);
    if (mon.step(x, natural(), static_cast<int>(beta.size()))) break;

    Direction d;
    d.p = combine(st.u, beta, hist, &Direction::p);
    if (pipelined(method)) {
      st.gamma = dot(st.r, st.w);
      double eta = dot(st.w, st.w);
      for (std::size_t k = beta.size(); k-- > 0;) eta -= beta[k] * beta[k] * hist.recent(k).eta;
      d.eta = eta;
      d.s = combine(st.w, beta, hist, &Direction::s);
    } else {
      d.s = apply(ctx.A, d.p);
      d.eta = dot(d.s, d.s);
      if (method == Method::GCR) st.gamma = dot(st.r, d.s);
    }
    if (!(d.eta > 0.0)) {
      if (restart()) break;
      emit();
      continue;
    }
    if (pipelined(method)) {
      MUpdate mu = stabilized_m_update(ctx.theta, ctx.B, st.u, st.w, st.r);
      if (mu.theta_undefined) mu.m = ctx.B.apply(st.w);
      if (ctx.theta == ThetaMode::exact && obs.on_theta) obs.on_theta(mon.iteration(), mu.theta);
      d.q = combine(mu.m, beta, hist, &Direction::q);
      if (method == Method::PIPEGCR_W) d.z = combine(apply(ctx.A, mu.m), beta, hist, &Direction::z);
    }
    hist.push(std::move(d));
    emit();
  }
  return mon.finish(std::move(x));
}

}  // namespace pipekrylov::detail
