#include <cmath>
#include <vector>

#include "solver_detail.hpp"

namespace pipekrylov::detail {

namespace {

// Upper-triangular factor of the Hessenberg matrix built column by column
// with Givens rotations, plus the rotated right-hand side g.
class GivensLsq {
 public:
  explicit GivensLsq(double beta) : g_{beta} {}

  // Appends column h (length k + 2 for the k-th column). False when the
  // rotated diagonal is zero and the column cannot be used.
  bool push(std::vector<double> h) {
    const std::size_t k = cols_.size();
    for (std::size_t j = 0; j < k; ++j) {
      const double a = h[j];
      const double b = h[j + 1];
      h[j] = c_[j] * a + s_[j] * b;
      h[j + 1] = -s_[j] * a + c_[j] * b;
    }
    const double rho = std::hypot(h[k], h[k + 1]);
    if (rho == 0.0) return false;
    const double c = h[k] / rho;
    const double s = h[k + 1] / rho;
    c_.push_back(c);
    s_.push_back(s);
    h[k] = rho;
    h.resize(k + 1);
    cols_.push_back(std::move(h));
    g_.push_back(-s * g_[k]);
    g_[k] *= c;
    return true;
  }

  std::size_t size() const { return cols_.size(); }
  double residual() const { return std::abs(g_.back()); }

  std::vector<double> solve() const {
    const std::size_t n = cols_.size();
    std::vector<double> y(n);
    for (std::size_t i = n; i-- > 0;) {
      double acc = g_[i];
      for (std::size_t j = i + 1; j < n; ++j) acc -= cols_[j][i] * y[j];
      y[i] = acc / cols_[i][i];
    }
    return y;
  }

 private:
  std::vector<std::vector<double>> cols_;
  std::vector<double> c_, s_;
  std::vector<double> g_;
};

enum class CycleEnd { stop, restart, breakdown };

}  // namespace

SolveResult run_gmres_family(const SolveContext& ctx) {
  const Method method = ctx.cfg.method;
  const int m = ctx.cfg.restart;
  Monitor mon(ctx);
  const SolveObserver& obs = mon.observer();
  Vector x = ctx.x0;

  double sigma = 0.0;
  bool sigma_warning = false;
  if (method != Method::FGMRES) {
    sigma = ctx.cfg.sigma.value;
    if (ctx.cfg.sigma.power_iters > 0) {
      const SigmaEstimate est = estimate_sigma(ctx.A, ctx.B, ctx.cfg.sigma.power_iters, ctx.cfg.sigma.seed);
      sigma = est.sigma;
      sigma_warning = est.zero_vector;
    }
  }

  // One restart cycle from x. Records every inner step through the monitor.
  const auto cycle = [&](int cycle_no, const Vector& r0, double beta) -> CycleEnd {
    const Vector x0 = x;
    GivensLsq lsq(beta);
    std::vector<Vector> P;
    std::vector<Vector> U;
    std::vector<Vector> Zbar;
    P.push_back(r0);
    P.back().scale(1.0 / beta);
    U.push_back(ctx.B.apply(P[0]));
    if (obs.on_basis) obs.on_basis(cycle_no, 0, P[0], U[0]);
    Vector z = apply(ctx.A, U[0]);
    Vector qbar, wbar;
    if (method != Method::FGMRES) {
      z.add_scaled(-sigma, P[0]);
      if (method == Method::PIPEFGMRES) {
        qbar = ctx.B.apply(z);
        wbar = apply(ctx.A, qbar);
      }
    }

    for (int i = 1; i <= m; ++i) {
      const std::size_t im1 = static_cast<std::size_t>(i - 1);
      std::vector<double> h(static_cast<std::size_t>(i) + 1, 0.0);
      Vector pnext;
      double hnext = 0.0;
      bool happy = false;
      if (method == Method::FGMRES) {
        pnext = z;
        for (std::size_t j = 0; j <= im1; ++j) {
          h[j] = dot(P[j], pnext);
          pnext.add_scaled(-h[j], P[j]);
        }
        hnext = norm2(pnext);
        happy = hnext == 0.0;
      } else {
        double t = dot(z, z);
        for (std::size_t j = 0; j <= im1; ++j) {
          h[j] = dot(P[j], z);
          t -= h[j] * h[j];
        }
        if (t < 0.0) return CycleEnd::breakdown;
        hnext = std::sqrt(t);
        happy = t == 0.0;
        if (!happy) {
          pnext = z;
          for (std::size_t j = 0; j <= im1; ++j) pnext.add_scaled(-h[j], P[j]);
        }
      }
      h[static_cast<std::size_t>(i)] = hnext;

      std::vector<double> hcol = h;
      if (method != Method::FGMRES) hcol[im1] += sigma;
      if (!lsq.push(std::move(hcol))) return CycleEnd::breakdown;

      const std::vector<double> y = lsq.solve();
      Vector xi = x0;
      for (std::size_t k = 0; k < y.size(); ++k) xi.add_scaled(y[k], U[k]);
      x = std::move(xi);
      if (mon.step(x, lsq.residual(), i)) return CycleEnd::stop;
      if (happy || i == m) return CycleEnd::restart;

      pnext.scale(1.0 / hnext);
      if (method == Method::PIPEFGMRES) {
        Vector u = qbar;
        for (std::size_t k = 0; k <= im1; ++k) u.add_scaled(-h[k], U[k]);
        u.scale(1.0 / hnext);
        Zbar.push_back(z);
        Vector zn = wbar;
        for (std::size_t k = 0; k <= im1; ++k) {
          zn.add_scaled(-h[k], Zbar[k]);
          zn.add_scaled(-h[k] * sigma, P[k]);
        }
        zn.scale(1.0 / hnext);
        zn.add_scaled(-sigma, pnext);
        P.push_back(std::move(pnext));
        U.push_back(std::move(u));
        z = std::move(zn);
        qbar = ctx.B.apply(z);
        wbar = apply(ctx.A, qbar);
      } else {
        P.push_back(std::move(pnext));
        U.push_back(ctx.B.apply(P.back()));
        z = apply(ctx.A, U.back());
        if (method == Method::CGFGMRES) z.add_scaled(-sigma, P.back());
      }
      if (obs.on_basis) obs.on_basis(cycle_no, i, P.back(), U.back());
    }
    return CycleEnd::restart;
  };

  Vector r = axpy(ctx.b, -1.0, apply(ctx.A, x));
  double beta = norm2(r);
  bool stop = mon.start(x, beta);
  for (int cycle_no = 0; !stop; ++cycle_no) {
    const CycleEnd end = cycle(cycle_no, r, beta);
    if (end == CycleEnd::stop) break;
    if (end == CycleEnd::breakdown) {
      if (mon.breakdown()) break;
    } else {
      mon.restart_cycle();
    }
    r = axpy(ctx.b, -1.0, apply(ctx.A, x));
    beta = norm2(r);
    stop = mon.resume(beta);
  }

  SolveResult res = mon.finish(std::move(x));
  res.sigma = sigma;
  res.sigma_warning = sigma_warning;
  return res;
}

}  // namespace pipekrylov::detail
