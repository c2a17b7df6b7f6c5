#include <doctest.h>

#include <random>

#include "gridcascade/lp.hpp"
#include "support.hpp"

using namespace gridcascade::lp;

namespace {

Solution solve(const LinearProgram& p) { return DenseSimplex{}.solve(p); }

}  // namespace

TEST_CASE("textbook maximization") {
  // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18  ->  (2, 6), 36
  LinearProgram p;
  const auto x = p.add_variable(0, kInfinity, -3, "x");
  const auto y = p.add_variable(0, kInfinity, -5, "y");
  p.add_constraint({{x, 1}}, Sense::less_equal, 4);
  p.add_constraint({{y, 2}}, Sense::less_equal, 12);
  p.add_constraint({{x, 3}, {y, 2}}, Sense::less_equal, 18);
  const auto s = solve(p);
  REQUIRE(s.status == Status::optimal);
  CHECK(s.objective == doctest::Approx(-36).epsilon(1e-12));
  CHECK(s.x[x] == doctest::Approx(2).epsilon(1e-12));
  CHECK(s.x[y] == doctest::Approx(6).epsilon(1e-12));
  CHECK(s.dual_infeasibility <= 1e-9);
}

TEST_CASE("infeasible and unbounded programs are reported") {
  LinearProgram bad;
  const auto x = bad.add_variable(0, 1, 1);
  bad.add_constraint({{x, 1}}, Sense::greater_equal, 2);
  CHECK(solve(bad).status == Status::infeasible);

  LinearProgram open;
  const auto y = open.add_variable(-kInfinity, kInfinity, -1);
  const auto z = open.add_variable(0, kInfinity, 0);
  open.add_constraint({{y, 1}, {z, -1}}, Sense::less_equal, 3);
  CHECK(solve(open).status == Status::unbounded);
}

TEST_CASE("bounds of every shape") {
  LinearProgram p;
  const auto a = p.add_variable(-2, 5, 1, "shifted");
  const auto b = p.add_variable(-kInfinity, 3, -1, "upper only");
  const auto c = p.add_variable(-kInfinity, kInfinity, 0, "free");
  const auto d = p.add_variable(1.5, 1.5, 2, "fixed");
  p.add_constraint({{a, 1}, {b, 1}, {c, 1}}, Sense::equal, 0);
  p.add_constraint({{c, 1}}, Sense::greater_equal, -10);
  const auto s = solve(p);
  REQUIRE(s.status == Status::optimal);
  CHECK(s.x[a] == doctest::Approx(-2));
  CHECK(s.x[b] == doctest::Approx(3));
  CHECK(s.x[d] == 1.5);
  CHECK(s.objective == doctest::Approx(-2 - 3 + 3));
  CHECK(p.max_violation(s.x) < 1e-9);
  CHECK_THROWS_AS(p.add_variable(2, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(p.add_constraint({{99, 1}}, Sense::equal, 0), std::out_of_range);
}

TEST_CASE("redundant equalities are dropped") {
  LinearProgram p;
  const auto x = p.add_variable(0, kInfinity, 1);
  const auto y = p.add_variable(0, kInfinity, 2);
  p.add_constraint({{x, 1}, {y, 1}}, Sense::equal, 4);
  p.add_constraint({{x, 2}, {y, 2}}, Sense::equal, 8);
  p.add_constraint({{x, 1}}, Sense::less_equal, 3);
  const auto s = solve(p);
  REQUIRE(s.status == Status::optimal);
  CHECK(s.objective == doctest::Approx(5));
}

TEST_CASE("degenerate cycling example terminates under Bland's rule") {
  // Beale's classic cycling instance
  LinearProgram p;
  const auto x1 = p.add_variable(0, kInfinity, -0.75);
  const auto x2 = p.add_variable(0, kInfinity, 150);
  const auto x3 = p.add_variable(0, kInfinity, -0.02);
  const auto x4 = p.add_variable(0, kInfinity, 6);
  p.add_constraint({{x1, 0.25}, {x2, -60}, {x3, -0.04}, {x4, 9}}, Sense::less_equal, 0);
  p.add_constraint({{x1, 0.5}, {x2, -90}, {x3, -0.02}, {x4, 3}}, Sense::less_equal, 0);
  p.add_constraint({{x3, 1}}, Sense::less_equal, 1);
  const auto s = solve(p);
  REQUIRE(s.status == Status::optimal);
  CHECK(s.objective == doctest::Approx(-0.05).epsilon(1e-12));
}

TEST_CASE("random bounded programs agree with vertex enumeration") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> coef(-3, 3), rhs(-2, 8);
  int optimal = 0, infeasible = 0;
  for (int trial = 0; trial < 300; ++trial) {
    LinearProgram p;
    const auto n = std::uniform_int_distribution<int>(1, 6)(rng);
    for (int j = 0; j < n; ++j) {
      const auto kind = rng() % 4;
      const double lo = kind == 0 ? -5.0 : 0.0;
      p.add_variable(lo, kind == 3 ? 4.0 : 10.0, coef(rng));
    }
    const auto m = std::uniform_int_distribution<int>(1, 5)(rng);
    for (int i = 0; i < m; ++i) {
      std::vector<Term> terms;
      for (int j = 0; j < n; ++j) {
        if (rng() % 3 != 0) terms.push_back({static_cast<std::size_t>(j), coef(rng)});
      }
      const auto sense = static_cast<Sense>(rng() % 3);
      p.add_constraint(std::move(terms), sense, rhs(rng));
    }
    const auto s = solve(p);
    const auto oracle = testing::vertex_enumeration_optimum(p);
    if (!oracle) {
      CHECK(s.status == Status::infeasible);
      ++infeasible;
      continue;
    }
    REQUIRE(s.status == Status::optimal);
    ++optimal;
    CHECK(std::abs(s.objective - *oracle) < 1e-6);
    CHECK(p.max_violation(s.x) < 1e-7);
    CHECK(s.dual_infeasibility < 1e-6);
  }
  CHECK(optimal > 50);
  CHECK(infeasible > 5);
}

TEST_CASE("larger random programs end with an optimality certificate") {
  std::mt19937_64 rng(91);
  std::uniform_real_distribution<double> coef(-2, 2), pos(0.5, 3);
  for (int trial = 0; trial < 30; ++trial) {
    LinearProgram p;
    const int n = 40, m = 30;
    // a known feasible point keeps every instance feasible
    std::vector<double> x0(n);
    for (int j = 0; j < n; ++j) {
      const bool free = rng() % 4 == 0;
      x0[static_cast<std::size_t>(j)] = free ? coef(rng) : pos(rng);
      p.add_variable(free ? -kInfinity : 0.0, free ? kInfinity : 5.0, coef(rng));
    }
    for (int i = 0; i < m; ++i) {
      std::vector<Term> terms;
      double lhs = 0;
      for (int j = 0; j < n; ++j) {
        if (rng() % 4 != 0) continue;
        const double a = coef(rng);
        terms.push_back({static_cast<std::size_t>(j), a});
        lhs += a * x0[static_cast<std::size_t>(j)];
      }
      const auto sense = static_cast<Sense>(rng() % 3);
      p.add_constraint(std::move(terms), sense, sense == Sense::equal ? lhs : lhs + (sense == Sense::less_equal ? 1 : -1));
    }
    // bound the free variables so the optimum is finite
    for (int j = 0; j < n; ++j) {
      if (p.variables[static_cast<std::size_t>(j)].lower == -kInfinity) {
        p.add_constraint({{static_cast<std::size_t>(j), 1.0}}, Sense::less_equal, 10);
        p.add_constraint({{static_cast<std::size_t>(j), 1.0}}, Sense::greater_equal, -10);
      }
    }
    const auto s = solve(p);
    REQUIRE(s.status == Status::optimal);
    CHECK(p.max_violation(s.x) < 1e-7);
    CHECK(s.dual_infeasibility < 1e-7);
    CHECK(s.objective <= p.objective(x0) + 1e-9);
  }
}
