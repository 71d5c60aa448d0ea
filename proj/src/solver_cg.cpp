#include <cmath>

#include "solver_detail.hpp"

namespace pipekrylov::detail {

namespace {

struct CgState {
  Vector r, u, w, m, n;
  Vector p, s, q, z;
  double gamma = 0.0;
  double eta = 0.0;
};

bool cg_breakdown(const CgState& st) { return !(st.gamma > 0.0) || !(st.eta > 0.0); }

// Fresh start from x: the listing's initialization block.
CgState cg_init(const SolveContext& ctx, const Vector& x) {
  const Method method = ctx.cfg.method;
  CgState st;
  st.r = axpy(ctx.b, -1.0, apply(ctx.A, x));
  st.u = ctx.B.apply(st.r);
  st.p = st.u;
  st.gamma = dot(st.u, st.r);
  if (method == Method::PCG) {
    st.s = apply(ctx.A, st.p);
    st.eta = dot(st.s, st.p);
    return st;
  }
  st.w = apply(ctx.A, st.u);
  st.eta = dot(st.u, st.w);
  st.s = st.w;
  if (method == Method::PIPECG) {
    st.m = ctx.B.apply(st.w);
    st.n = apply(ctx.A, st.m);
    st.q = st.m;
    st.z = st.n;
  }
  return st;
}

}  // namespace

SolveResult run_cg_family(const SolveContext& ctx) {
  const Method method = ctx.cfg.method;
  Monitor mon(ctx);
  const SolveObserver& obs = mon.observer();
  Vector x = ctx.x0;

  CgState st = cg_init(ctx, x);
  const auto natural = [&] { return std::sqrt(std::abs(st.gamma)); };
  // Flush and re-initialize from the current x; true when the solve must stop.
  const auto restart = [&] {
    do {
      if (mon.breakdown()) return true;
      st = cg_init(ctx, x);
      if (mon.resume(natural())) return true;
    } while (cg_breakdown(st));
    return false;
  };

  if (mon.start(x, natural())) return mon.finish(std::move(x));
  if (cg_breakdown(st) && restart()) return mon.finish(std::move(x));
  if (obs.on_direction) obs.on_direction(mon.iteration(), st.p, st.s, st.eta);
  double alpha = st.gamma / st.eta;

  while (true) {
    x.add_scaled(alpha, st.p);
    st.r.add_scaled(-alpha, st.s);
    const double gamma_prev = st.gamma;
    if (method == Method::PIPECG) {
      st.u.add_scaled(-alpha, st.q);
      st.w.add_scaled(-alpha, st.z);
    } else {
      st.u = ctx.B.apply(st.r);
      if (method == Method::CGCG) st.w = apply(ctx.A, st.u);
    }
    st.gamma = dot(st.u, st.r);
    const double beta = st.gamma / gamma_prev;
    if (method != Method::PCG) st.eta = dot(st.u, st.w) - beta * beta * st.eta;
    if (obs.on_residual) obs.on_residual(mon.iteration() + 1, st.r);
    if (mon.step(x, natural(), 1)) break;

    if (!(st.gamma > 0.0) || !(st.eta > 0.0)) {
      if (restart()) break;
    } else {
      st.p = axpy(st.u, beta, st.p);
      if (method == Method::PCG) {
        st.s = apply(ctx.A, st.p);
        st.eta = dot(st.s, st.p);
      } else {
        st.s = axpy(st.w, beta, st.s);
      }
      if (method == Method::PIPECG) {
        st.m = ctx.B.apply(st.w);
        st.n = apply(ctx.A, st.m);
        st.q = axpy(st.m, beta, st.q);
        st.z = axpy(st.n, beta, st.z);
      }
      if (cg_breakdown(st) && restart()) break;
    }
    if (obs.on_direction) obs.on_direction(mon.iteration(), st.p, st.s, st.eta);
    alpha = st.gamma / st.eta;
  }
  return mon.finish(std::move(x));
}

}  // namespace pipekrylov::detail
