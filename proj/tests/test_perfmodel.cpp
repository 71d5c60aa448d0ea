#include <doctest.h>

#include <cmath>

#include "pipekrylov/errors.hpp"
#include "pipekrylov/perfmodel.hpp"

using namespace pipekrylov;
using namespace pipekrylov::perf;

TEST_CASE("tree depth by repeated multiplication") {
  CHECK(tree_depth(1, 8) == 0);
  CHECK(tree_depth(2, 8) == 1);
  CHECK(tree_depth(8, 8) == 1);
  CHECK(tree_depth(9, 8) == 2);
  CHECK(tree_depth(64, 8) == 2);
  CHECK(tree_depth(std::uint64_t{1} << 20, 8) == 7);
  CHECK(tree_depth(1000, 10) == 3);
  CHECK(tree_depth(1001, 10) == 4);
}

TEST_CASE("machine defaults") {
  const MachineSpec m;
  CHECK(m.t_w() == doctest::Approx(3.2e-10));
  CHECK(m.t_c == doctest::Approx(1.073741824e-9));
  CHECK(m.cores() == doctest::Approx(std::pow(2.0, 30)));
  const CostModelParams p;
  CHECK(p.nu_avg() == doctest::Approx(24.0));
}

TEST_CASE("cost terms evaluated by hand") {
  MachineSpec m;
  m.nodes = 64;  // depth 2
  const CostModelParams p;
  const double nl = n_local(m, p);
  CHECK(nl == doctest::Approx(8e9 / (64.0 * 1024.0)));
  CHECK(t_red_comm(m, 1.0) == doctest::Approx(2.0 * 2.0 * (1e-6 + 3.2e-10)));
  CHECK(t_red_calc(m, 100.0) == doctest::Approx(202.0 * m.t_c));
  CHECK(t_axpy(m, 100.0) == doctest::Approx(200.0 * m.t_c));
  CHECK(t_maxpy(m, 3.0, 100.0) == doctest::Approx(600.0 * m.t_c));
  CHECK(t_spmv_calc(m, p) == doctest::Approx(14.0 * nl * m.t_c));
  // the halo term uses the per-node share N / nodes
  const double comm = 6.0 * (1e-6 + std::pow(8e9 / 64.0, 2.0 / 3.0) * m.t_w());
  CHECK(t_spmv_comm(m, p) == doctest::Approx(comm));
  CHECK(t_spmv(m, p) == doctest::Approx(std::max(14.0 * nl * m.t_c, comm)));
  CHECK(t_pc(m, p) == doctest::Approx(5.0 * 23.0 * nl * m.t_c + comm));
}

TEST_CASE("cost rows are positive and ordered sensibly") {
  const MachineSpec m;
  const CostModelParams p;
  for (Method method : {Method::FCG, Method::PIPEFCG, Method::GCR, Method::PIPEGCR, Method::PIPEGCR_W,
                        Method::FGMRES, Method::PIPEFGMRES}) {
    CHECK(is_modelled(method));
    const IterationCost c = iteration_cost(method, m, p);
    CHECK(c.t_calc > 0.0);
    CHECK(c.t_red >= 0.0);
    CHECK(c.total() == doctest::Approx(c.t_calc + c.t_red));
  }
  CHECK_FALSE(is_modelled(Method::PCG));
  CHECK_THROWS_AS(iteration_cost(Method::PCG, m, p), ParameterError);
  CHECK(iteration_cost(Method::PIPEFCG, m, p).t_calc > iteration_cost(Method::FCG, m, p).t_calc);
}

TEST_CASE("standard methods expose two reductions") {
  MachineSpec m;
  m.nodes = 4096;
  const CostModelParams p;
  const double one = t_red_comm(m, 1.0) + t_red_calc(m, n_local(m, p));
  CHECK(iteration_cost(Method::FCG, m, p).t_red == doctest::Approx(2.0 * one).epsilon(0.05));
}

TEST_CASE("validation") {
  MachineSpec m;
  m.bandwidth = 0.0;
  CHECK_THROWS_AS(validate(m), ParameterError);
  CostModelParams p;
  p.kavg = 1.5;
  CHECK_THROWS_AS(validate(p), ParameterError);
}

TEST_CASE("geometric grid and sweep layout") {
  CHECK(geometric_grid(1, 8) == std::vector<std::uint64_t>{1, 2, 4, 8});
  CHECK(geometric_grid(3, 20, 3) == std::vector<std::uint64_t>{3, 9});
  const Method ms[] = {Method::FCG, Method::PIPEFCG};
  const std::uint64_t nodes[] = {16, 32};
  const auto rows = sweep(ms, MachineSpec{}, CostModelParams{}, nodes);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].nodes == 16);
  CHECK(rows[1].method == Method::PIPEFCG);
  CHECK(rows[2].nodes == 32);
}

TEST_CASE("crossover is monotone in the grid") {
  const auto grid = geometric_grid(1024, std::uint64_t{1} << 22);
  const auto c = find_crossover(Method::FCG, Method::PIPEFCG, MachineSpec{}, CostModelParams{}, grid);
  REQUIRE(c);
  for (std::uint64_t n : grid) {
    MachineSpec m;
    m.nodes = n;
    const bool cheaper =
        iteration_cost(Method::PIPEFCG, m, CostModelParams{}).total() < iteration_cost(Method::FCG, m, CostModelParams{}).total();
    if (n >= *c) CHECK(cheaper);
  }
  const std::uint64_t small[] = {1, 2};
  CHECK_FALSE(find_crossover(Method::FCG, Method::PIPEFCG, MachineSpec{}, CostModelParams{}, small));
}
