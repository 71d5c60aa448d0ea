// Acceptance checks. One PASS/FAIL line per criterion; exit status is the
// number of failed criteria (capped at 1).

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "pipekrylov/perfmodel.hpp"
#include "pipekrylov/preconditioner.hpp"
#include "pipekrylov/problems.hpp"
#include "pipekrylov/solver.hpp"
#include "pipekrylov/trace_io.hpp"
#include "test_support.hpp"

using namespace pipekrylov;
using pipekrylov::testing::dense;
using pipekrylov::testing::rel_diff;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
  void note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SolveResult run(const SolverConfig& cfg, const ProblemInstance& p, Preconditioner& B, SolveObserver obs = {}) {
  SolveOptions opt;
  opt.x_true = p.x_true;
  opt.observer = std::move(obs);
  return solve(cfg, p.A, B, p.b, Vector(p.A.rows()), opt);
}

// Toy problem with the reference solution attached so relerr is traced.
ProblemInstance toy() {
  ProblemInstance p = make_toy_diagonal(100, 5.0);
  const Eigen::VectorXd x = dense(p.A).diagonal().cwiseInverse().cwiseProduct(dense(p.b));
  p.x_true = pipekrylov::testing::from_dense(x);
  return p;
}

SolverConfig fixed_budget(Method m) {
  SolverConfig cfg;
  cfg.method = m;
  cfg.numax = 100;
  cfg.max_it = 300;
  cfg.rtol = 1e-300;
  cfg.stagnation_window = 0;
  return cfg;
}

Verdict criterion1() {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  const ProblemInstance p = toy();
  for (double eta : {1e-4, 1e-8}) {
    for (Method m : {Method::FCG, Method::PIPEFCG}) {
      auto B = make_noisy(eta, 1);
      const SolveResult res = run(fixed_budget(m), p, *B);
      double best = 1.0;
      for (const auto& r : res.trace) best = std::min(best, r.relerr.value_or(1.0));
      const std::string tag = std::string(to_string(m)) + " eta=" + fmt(eta);
      v.require(best <= eta * 1e-2, tag + " best relerr " + fmt(best));
      if (best <= eta * 1e-2) {
        v.note(tag + " best " + fmt(best) + " final " + fmt(res.trace.back().relerr.value_or(NAN)));
      }
    }
    auto B = make_noisy(eta, 1);
    const SolveResult res = run(fixed_budget(Method::PIPEFCG_NAIVE), p, *B);
    double lo = INFINITY, hi = 0.0;
    int lo_it = -1, hi_it = -1;
    for (const auto& r : res.trace) {
      if (r.iter < 100 || r.iter > 300 || !r.relerr) continue;
      if (*r.relerr < lo) { lo = *r.relerr; lo_it = r.iter; }
      if (*r.relerr > hi) { hi = *r.relerr; hi_it = r.iter; }
    }
    const bool ok = lo >= eta * 1e-1 && hi <= eta * 1e2;
    v.require(ok, "PIPEFCG_NAIVE eta=" + fmt(eta) + " relerr over 100-300 in [" + fmt(lo) + " @" + std::to_string(lo_it) +
                      ", " + fmt(hi) + " @" + std::to_string(hi_it) + "], restarts=" + std::to_string(res.restarts));
    if (ok) v.note("PIPEFCG_NAIVE eta=" + fmt(eta) + " plateau [" + fmt(lo) + ", " + fmt(hi) + "]");
  }
  const double secs = seconds_since(t0);
  v.require(secs < 1.0, "runtime " + fmt(secs) + " s");
  return v;
}

double history_deviation(const IterationTrace& a, const IterationTrace& b) {
  double worst = 0.0;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, rel_diff(a[i].rnorm_natural, b[i].rnorm_natural));
  if (a.size() != b.size()) worst = INFINITY;
  return worst;
}

Verdict criterion2() {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  const ProblemInstance p = make_poisson(2, 32, 0);
  const std::vector<std::vector<Method>> suites{
      {Method::PCG, Method::CGCG, Method::PIPECG},
      {Method::FCG, Method::CGFCG, Method::PIPEFCG},
      {Method::GCR, Method::PCR, Method::PIPEGCR, Method::PIPEGCR_W},
      {Method::FGMRES, Method::CGFGMRES, Method::PIPEFGMRES}};
  double overall = 0.0;
  for (const auto& suite : suites) {
    std::vector<IterationTrace> traces;
    for (Method m : suite) {
      auto J = make_jacobi(p.A);
      SolverConfig cfg;
      cfg.method = m;
      cfg.max_it = 30;
      cfg.rtol = 1e-300;
      cfg.restart = 30;
      traces.push_back(run(cfg, p, *J).trace);
    }
    for (std::size_t i = 0; i < suite.size(); ++i) {
      for (std::size_t j = i + 1; j < suite.size(); ++j) {
        const double d = history_deviation(traces[i], traces[j]);
        overall = std::max(overall, d);
        v.require(d <= 1e-6, std::string(to_string(suite[i])) + " vs " + std::string(to_string(suite[j])) + " " + fmt(d));
      }
    }
  }
  const double secs = seconds_since(t0);
  v.require(secs < 5.0, "runtime " + fmt(secs) + " s");
  if (v.pass) v.note("max deviation " + fmt(overall));
  return v;
}

struct OrthStats {
  double fcg_conj = 0.0;
  double fcg_orth = 0.0;
  double gcr = 0.0;
  double fgmres = 0.0;
};

// Worst normalized deviations over the first `max_it` iterations.
OrthStats orthogonality(const ProblemInstance& p, int max_it) {
  OrthStats st;
  const Eigen::MatrixXd A = dense(p.A);
  SolverConfig full;
  full.numax = 1000;
  full.restart = 1000;
  full.truncation = Truncation::standard;
  full.max_it = max_it;

  {
    SolverConfig cfg = full;
    cfg.method = Method::FCG;
    auto J = make_jacobi(p.A);
    std::vector<Eigen::VectorXd> P;
    std::map<int, Eigen::VectorXd> R;
    SolveObserver obs;
    obs.on_direction = [&](int, const Vector& pv, const Vector&, double) { P.push_back(dense(pv)); };
    obs.on_residual = [&](int i, const Vector& r) { R.emplace(i, dense(r)); };
    run(cfg, p, *J, obs);
    for (std::size_t i = 0; i < P.size(); ++i) {
      const Eigen::VectorXd Api = A * P[i];
      for (std::size_t j = 0; j < i; ++j) {
        st.fcg_conj = std::max(st.fcg_conj, std::abs(P[j].dot(Api)) / std::sqrt(P[j].dot(A * P[j]) * P[i].dot(Api)));
      }
    }
    for (const auto& [i, r] : R) {
      for (int j = 0; j < i && j < static_cast<int>(P.size()); ++j) {
        const Eigen::VectorXd& pj = P[static_cast<std::size_t>(j)];
        st.fcg_orth = std::max(st.fcg_orth, std::abs(r.dot(pj)) / (r.norm() * pj.norm()));
      }
    }
  }
  {
    SolverConfig cfg = full;
    cfg.method = Method::GCR;
    auto J = make_jacobi(p.A);
    std::vector<Eigen::VectorXd> S;
    SolveObserver obs;
    obs.on_direction = [&](int, const Vector&, const Vector& s, double) { S.push_back(dense(s)); };
    run(cfg, p, *J, obs);
    for (std::size_t i = 0; i < S.size(); ++i)
      for (std::size_t j = 0; j < i; ++j) st.gcr = std::max(st.gcr, std::abs(S[i].dot(S[j])) / (S[i].norm() * S[j].norm()));
  }
  {
    SolverConfig cfg = full;
    cfg.method = Method::FGMRES;
    auto J = make_jacobi(p.A);
    std::vector<Eigen::VectorXd> Pb;
    SolveObserver obs;
    obs.on_basis = [&](int cycle, int, const Vector& pv, const Vector&) {
      if (cycle == 0) Pb.push_back(dense(pv));
    };
    run(cfg, p, *J, obs);
    Eigen::MatrixXd Q(A.rows(), static_cast<Eigen::Index>(Pb.size()));
    for (std::size_t k = 0; k < Pb.size(); ++k) Q.col(static_cast<Eigen::Index>(k)) = Pb[k];
    st.fgmres = (Q.transpose() * Q - Eigen::MatrixXd::Identity(Q.cols(), Q.cols())).cwiseAbs().maxCoeff();
  }
  return st;
}

// Checked over the same 30-iteration budget as the equivalence suites. The
// values for a solve run down to rtol 1e-8 are reported alongside.
Verdict criterion3() {
  Verdict v;
  const ProblemInstance p = make_poisson(2, 16, 0);
  const OrthStats st = orthogonality(p, 30);
  v.require(st.fcg_conj <= 1e-8, "FCG A-conjugacy " + fmt(st.fcg_conj));
  v.require(st.fcg_orth <= 1e-8, "FCG residual/direction " + fmt(st.fcg_orth));
  v.require(st.gcr <= 1e-8, "GCR s orthogonality " + fmt(st.gcr));
  v.require(st.fgmres <= 1e-8, "FGMRES basis orthonormality " + fmt(st.fgmres));
  v.note("30 its: conj " + fmt(st.fcg_conj) + " orth " + fmt(st.fcg_orth) + " gcr " + fmt(st.gcr) + " fgmres " +
         fmt(st.fgmres));
  const OrthStats conv = orthogonality(p, 10000);
  v.note("to rtol 1e-8: conj " + fmt(conv.fcg_conj) + " orth " + fmt(conv.fcg_orth) + " gcr " + fmt(conv.gcr) +
         " fgmres " + fmt(conv.fgmres));
  return v;
}

Verdict criterion4() {
  Verdict v;
  const ProblemInstance p = make_poisson(2, 32, 0);
  for (Method m : {Method::CGFCG, Method::PIPEFCG}) {
    SolverConfig cfg;
    cfg.method = m;
    cfg.max_it = 30;
    cfg.rtol = 1e-300;
    auto J = make_jacobi(p.A);
    double worst = 0.0;
    int count = 0;
    SolveObserver obs;
    obs.on_direction = [&](int, const Vector& pv, const Vector&, double eta) {
      worst = std::max(worst, rel_diff(eta, dot(pv, apply(p.A, pv))));
      ++count;
    };
    run(cfg, p, *J, obs);
    v.require(worst <= 1e-8 && count >= 30, std::string(to_string(m)) + " eta deviation " + fmt(worst));
    v.note(std::string(to_string(m)) + " " + fmt(worst) + " over " + std::to_string(count));
  }
  return v;
}

// min ||b - A V c|| over the columns of V.
double lsq_residual(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const std::vector<Eigen::VectorXd>& V) {
  if (V.empty()) return b.norm();
  Eigen::MatrixXd M(A.rows(), static_cast<Eigen::Index>(V.size()));
  for (std::size_t k = 0; k < V.size(); ++k) M.col(static_cast<Eigen::Index>(k)) = A * V[k];
  const Eigen::VectorXd c = M.colPivHouseholderQr().solve(b);
  return (b - M * c).norm();
}

Verdict criterion5() {
  Verdict v;
  const SparseMatrix A = pipekrylov::testing::random_dense_matrix(12, 2024);
  const Eigen::MatrixXd Ad = dense(A);
  const Vector b = pipekrylov::testing::random_vector(12, 77);
  const Eigen::VectorXd bd = dense(b);
  for (Method m : {Method::GCR, Method::FGMRES}) {
    SolverConfig cfg;
    cfg.method = m;
    cfg.numax = 100;
    cfg.restart = 100;
    cfg.truncation = Truncation::standard;
    cfg.rtol = 1e-13;
    auto J = make_jacobi(A);
    std::vector<Eigen::VectorXd> dirs;
    SolveOptions opt;
    if (m == Method::GCR) {
      opt.observer.on_direction = [&](int, const Vector& pv, const Vector&, double) { dirs.push_back(dense(pv)); };
    } else {
      opt.observer.on_basis = [&](int, int, const Vector&, const Vector& u) { dirs.push_back(dense(u)); };
    }
    const SolveResult res = solve(cfg, A, *J, b, Vector(12), opt);
    double worst = 0.0;
    for (const auto& rec : res.trace) {
      const std::vector<Eigen::VectorXd> space(dirs.begin(), dirs.begin() + rec.iter);
      const double oracle = lsq_residual(Ad, bd, space);
      worst = std::max(worst, std::abs(rec.rnorm_true.value_or(INFINITY) - oracle));
      worst = std::max(worst, std::abs(rec.rnorm_natural - oracle));
    }
    const double tol = 1e-10 * bd.norm();
    v.require(worst <= tol && res.iterations >= 1,
              std::string(to_string(m)) + " deviation " + fmt(worst) + " over " + std::to_string(res.iterations) + " its");
    if (worst <= tol) v.note(std::string(to_string(m)) + " " + fmt(worst) + " over " + std::to_string(res.iterations) + " its");
  }
  return v;
}

Verdict criterion6() {
  Verdict v;
  struct Expect {
    Method m;
    int blocking, overlapped;
    bool spmv;
  };
  const std::vector<Expect> table{
      {Method::PCG, 2, 0, false},          {Method::FCG, 2, 0, false},      {Method::GCR, 2, 0, false},
      {Method::FGMRES, 2, 0, false},       {Method::CGCG, 1, 0, false},     {Method::CGFCG, 1, 0, false},
      {Method::CGFGMRES, 1, 0, false},     {Method::PIPECG, 0, 1, true},    {Method::PIPEFCG_NAIVE, 0, 1, true},
      {Method::PIPEFCG, 0, 1, true},       {Method::PIPEGCR, 0, 1, false},  {Method::PIPEGCR_W, 0, 1, true},
      {Method::PIPEFGMRES, 0, 1, true}};
  const ProblemInstance p = make_poisson(2, 12, 0);
  for (const auto& e : table) {
    SolverConfig cfg;
    cfg.method = e.m;
    const ReductionLedger led = steady_state_ledger(e.m, effective_theta_mode(cfg));
    const std::string name(to_string(e.m));
    v.require(led.blocking == e.blocking && led.overlapped == e.overlapped, name + " ledger counts");
    if (e.overlapped > 0) {
      v.require(led.tags.pc, name + " missing pc tag");
      v.require(led.tags.spmv == e.spmv, name + " spmv tag");
    } else {
      v.require(led.tags.empty(), name + " unexpected tags");
    }
    cfg.max_it = 5;
    auto J = make_jacobi(p.A);
    const SolveResult res = run(cfg, p, *J);
    for (std::size_t i = 1; i < res.trace.size(); ++i) {
      const auto& r = res.trace[i];
      if (r.restarted) continue;
      v.require(r.red_blocking == led.blocking && r.red_overlapped == led.overlapped && r.overlap_tags == led.tags,
                name + " trace record " + std::to_string(i) + " disagrees with ledger");
    }
  }
  return v;
}

Verdict criterion7() {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  const perf::MachineSpec machine;
  const perf::CostModelParams params;
  const auto grid = perf::geometric_grid(1024, std::uint64_t{1} << 22);
  const auto cross = perf::find_crossover(Method::FCG, Method::PIPEFCG, machine, params, grid);
  v.require(cross && *cross >= 40000 && *cross <= 160000,
            "crossover " + (cross ? std::to_string(*cross) : std::string("none")));
  if (cross) v.note("crossover " + std::to_string(*cross));

  std::optional<std::uint64_t> first_exposed;
  for (std::uint64_t n : grid) {
    perf::MachineSpec m = machine;
    m.nodes = n;
    if (perf::iteration_cost(Method::PIPEFCG, m, params).t_red > 0.0) {
      first_exposed = n;
      break;
    }
  }
  const bool in_band = first_exposed && *first_exposed >= 200000 && *first_exposed <= 1000000;
  const std::string exposed = first_exposed ? std::to_string(*first_exposed) : std::string("never");
  v.require(in_band, "PIPEFCG t_red first positive at " + exposed + " nodes");
  if (in_band) v.note("PIPEFCG t_red first positive at " + exposed);
  const double secs = seconds_since(t0);
  v.require(secs < 1.0, "runtime " + fmt(secs) + " s");
  return v;
}

Verdict criterion8() {
  Verdict v;
  const ProblemInstance p = toy();
  SolverConfig cfg;
  cfg.method = Method::PIPEFCG;
  cfg.numax = 100;
  cfg.rtol = 1e-300;  // far below what the recurrences can resolve
  cfg.max_it = 2000;
  auto B = make_noisy(1e-4, 1);
  const SolveResult res = run(cfg, p, *B);
  bool finite = true;
  bool flagged = false;
  for (const auto& r : res.trace) {
    finite = finite && std::isfinite(r.rnorm_natural) && std::isfinite(r.rnorm_true.value_or(0.0)) &&
             std::isfinite(r.relerr.value_or(0.0));
    flagged = flagged || r.breakdown || r.restarted;
  }
  v.require(res.restarts >= 1 && flagged, "no breakdown restart logged");
  v.require(res.stop_reason == StopReason::rtol || res.stop_reason == StopReason::stagnation,
            "stop reason " + std::string(to_string(res.stop_reason)));
  v.require(finite && all_finite(res.x), "non-finite trace entry");
  v.note("restarts=" + std::to_string(res.restarts) + " stop=" + std::string(to_string(res.stop_reason)) +
         " its=" + std::to_string(res.iterations));
  return v;
}

Verdict criterion9() {
  Verdict v;
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "pkrylov_acceptance";
  fs::create_directories(dir);
  const auto slurp = [](const fs::path& f) {
    std::ifstream in(f, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  };
  for (const char* eta : {"1e-4", "1e-8"}) {
    for (const char* method : {"fcg", "pipefcg", "pipefcg_naive"}) {
      std::string bytes[2];
      for (int rep = 0; rep < 2; ++rep) {
        const fs::path out = dir / (std::string(method) + "_" + eta + "_" + std::to_string(rep) + ".csv");
        std::ostringstream so, se;
        const int code = cli::run({"solve", "--problem", "toy-diag", "--n", "100", "--cond", "5", "--pc", "noisy",
                                   "--eta", eta, "--solver", method, "--numax", "100", "--max-it", "300", "--rtol",
                                   "1e-300", "--stagnation-window", "0", "--seed", "1", "--out", out.string()},
                                  so, se);
        v.require(code == 0, std::string(method) + " exit " + std::to_string(code) + " " + se.str());
        bytes[rep] = slurp(out);
      }
      v.require(!bytes[0].empty() && bytes[0] == bytes[1], std::string(method) + " eta=" + eta + " CSV differs");
    }
  }
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"noisy-preconditioner plateau (toy diagonal)", criterion1},
      {"exact-arithmetic equivalence suites", criterion2},
      {"orthogonality invariants", criterion3},
      {"eta recurrence consistency", criterion4},
      {"minimal-residual oracle", criterion5},
      {"reduction ledger constants", criterion6},
      {"performance-model crossover", criterion7},
      {"breakdown restart", criterion8},
      {"deterministic CSV output", criterion9}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    if (!v.pass) ++failed;
    std::printf("%s criterion %zu: %s%s%s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                v.detail.empty() ? "" : " | ", v.detail.c_str());
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
