#include <cmath>

#include "solver_detail.hpp"

namespace pipekrylov::detail {

namespace {

// u is u_i for FCG/CGFCG and the recurred u~_i for the pipelined variants.
struct FcgState {
  Vector r, u, w;
  double gamma = 0.0;
};

bool pipelined(Method m) { return m == Method::PIPEFCG || m == Method::PIPEFCG_NAIVE; }

FcgState fcg_init(const SolveContext& ctx, const Vector& x, DirectionHistory& hist) {
  const Method method = ctx.cfg.method;
  FcgState st;
  st.r = axpy(ctx.b, -1.0, apply(ctx.A, x));
  st.u = ctx.B.apply(st.r);
  st.gamma = dot(st.u, st.r);

  Direction d;
  d.p = st.u;
  if (method == Method::FCG) {
    d.s = apply(ctx.A, d.p);
    d.eta = dot(d.p, d.s);
  } else {
    st.w = apply(ctx.A, d.p);
    d.s = st.w;
    d.eta = dot(st.u, st.w);
    if (pipelined(method)) {
      d.q = ctx.B.apply(st.w);
      d.z = apply(ctx.A, d.q);
    }
  }
  hist.clear();
  hist.push(std::move(d));
  return st;
}

}  // namespace

SolveResult run_fcg_family(const SolveContext& ctx) {
  const Method method = ctx.cfg.method;
  Monitor mon(ctx);
  const SolveObserver& obs = mon.observer();
  Vector x = ctx.x0;
  DirectionHistory hist(ctx.cfg.numax);
  int local = 0;

  FcgState st = fcg_init(ctx, x, hist);
  const auto natural = [&] { return std::sqrt(std::abs(st.gamma)); };
  const auto broken = [&] { return !(hist.recent(0).eta > 0.0); };
  const auto restart = [&] {
    do {
      if (mon.breakdown()) return true;
      st = fcg_init(ctx, x, hist);
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
        st.w.add_scaled(-alpha, last.z);
      } else {
        st.u = ctx.B.apply(st.r);
        if (method == Method::CGFCG) st.w = apply(ctx.A, st.u);
      }
    }
    st.gamma = dot(st.u, st.r);
    const int nu = window(ctx.cfg, local, hist);
    std::vector<double> beta(static_cast<std::size_t>(nu));
    for (int k = 0; k < nu; ++k) {
      const Direction& d = hist.recent(static_cast<std::size_t>(k));
      beta[static_cast<std::size_t>(k)] = -dot(st.u, d.s) / d.eta;
    }
    if (obs.on_residual) obs.on_residual(mon.iteration() + 1, st.r);
    if (mon.step(x, natural(), nu)) break;

    Direction d;
    d.p = combine(st.u, beta, hist, &Direction::p);
    if (method == Method::FCG) {
      d.s = apply(ctx.A, d.p);
      d.eta = dot(d.p, d.s);
    } else {
      d.s = combine(st.w, beta, hist, &Direction::s);
      double eta = dot(st.u, st.w);
      for (int k = nu; k-- > 0;) {
        const double b = beta[static_cast<std::size_t>(k)];
        eta -= b * b * hist.recent(static_cast<std::size_t>(k)).eta;
      }
      d.eta = eta;
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
      const Vector n = apply(ctx.A, mu.m);
      d.q = combine(mu.m, beta, hist, &Direction::q);
      d.z = combine(n, beta, hist, &Direction::z);
    }
    hist.push(std::move(d));
    emit();
  }
  return mon.finish(std::move(x));
}

}  // namespace pipekrylov::detail
