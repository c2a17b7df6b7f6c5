#include <doctest.h>

#include <filesystem>
#include <random>
#include <set>

#include "gridcascade/fixtures.hpp"
#include "gridcascade/grid.hpp"
#include "support.hpp"

using namespace gridcascade;

namespace {

const char* kTwoNode = R"(# tiny
node 0 0 0 supply 1
node 1 3 4 demand 1   # 5 km away
line 0 0 1 u=2
)";

}  // namespace

TEST_CASE("parse reads nodes, lines and defaults reactance to length") {
  const auto g = parse_grid(kTwoNode);
  REQUIRE(g.node_count() == 2);
  REQUIRE(g.line_count() == 1);
  CHECK(g.node(0).role == NodeRole::supply(1));
  CHECK(g.node(1).role == NodeRole::demand(1));
  CHECK(g.line(0).reactance == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(g.line(0).capacity == 2.0);
}

TEST_CASE("zero supply or demand is normalized to neutral") {
  const auto g = parse_grid("node 0 0 0 supply 0\nnode 1 1 0 demand 0\nline 0 0 1\n");
  CHECK(g.node(0).role.kind == NodeKind::neutral);
  CHECK(g.node(1).role.kind == NodeKind::neutral);
}

TEST_CASE("parse errors carry source and line number") {
  SUBCASE("missing node") {
    CHECK_THROWS_AS(parse_grid("node 0 0 0 neutral\nline 0 0 7\n"), ValidationError);
  }
  SUBCASE("duplicate id") {
    try {
      parse_grid("node 0 0 0 neutral\nnode 0 1 1 neutral\n", "dup.grid");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line_number() == 2);
      CHECK(std::string(e.what()).find("dup.grid:2") != std::string::npos);
    }
  }
  SUBCASE("malformed number") {
    CHECK_THROWS_AS(parse_grid("node 0 0 zero neutral\n"), ParseError);
  }
  SUBCASE("unknown record") {
    CHECK_THROWS_AS(parse_grid("bus 0 0 0\n"), ParseError);
  }
  SUBCASE("non-positive reactance") {
    CHECK_THROWS_AS(parse_grid("node 0 0 0 neutral\nnode 1 1 0 neutral\nline 0 0 1 x=0\n"), ValidationError);
  }
  SUBCASE("unbalanced when balance is required") {
    CHECK_THROWS_AS(parse_grid("node 0 0 0 supply 2\nnode 1 1 0 demand 1\nline 0 0 1\n", "g",
                               {.require_balanced = true}),
                    BalanceError);
  }
}

TEST_CASE("M-ring of 4 areas has 12 nodes and 20 lines") {
  const auto g = fixtures::make_mring(4);
  CHECK(g.node_count() == 12);
  CHECK(g.line_count() == 20);
  const auto balance = balance_check(g);
  REQUIRE(balance.size() == 1);
  CHECK(balance[0].supply == 8.0);
  CHECK(balance[0].demand == 8.0);
}

TEST_CASE("Q_4 carries unit supply and demand") {
  const auto balance = balance_check(fixtures::make_qgraph(4));
  REQUIRE(balance.size() == 1);
  CHECK(balance[0].supply == 1.0);
  CHECK(balance[0].demand == 1.0);
}

TEST_CASE("empty grid has an empty balance report") {
  CHECK(balance_check(Grid{}).empty());
}

TEST_CASE("components of the M-ring") {
  const auto g = fixtures::make_mring(4);
  const fixtures::MRingIndex idx(4, true);
  CHECK(connected_components(g, g.all_alive()).count == 1);

  const auto area = idx.area_failure(0);
  CHECK(area.size() == 6);
  const auto comps = connected_components(g, area);
  CHECK(comps.count == 4);
  const auto& of = comps.component_of;
  CHECK(of[idx.generator(0)] != of[idx.even_demand(0)]);
  CHECK(of[idx.generator(0)] != of[idx.odd_demand(0)]);
  CHECK(of[idx.even_demand(0)] != of[idx.odd_demand(0)]);
  for (std::size_t a = 1; a < 4; ++a) {
    CHECK(of[idx.generator(a)] == of[idx.generator(1)]);
    CHECK(of[idx.even_demand(a)] == of[idx.generator(1)]);
  }

  std::vector<LineId> all(g.line_count());
  for (std::size_t k = 0; k < all.size(); ++k) all[k] = k;
  CHECK(connected_components(g, all).count == g.node_count());
}

TEST_CASE("components partition the nodes and refine under more removals") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const auto g = testing::random_grid(rng, {.max_nodes = 30});
    std::vector<LineId> removed;
    LineMask alive = g.all_alive();
    auto previous = connected_components(g, alive);
    std::vector<LineId> order(g.line_count());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::shuffle(order.begin(), order.end(), rng);
    for (auto id : order) {
      alive[id] = false;
      const auto next = connected_components(g, alive);
      REQUIRE(next.component_of.size() == g.node_count());
      std::size_t members = 0;
      for (const auto& group : next.groups()) members += group.size();
      CHECK(members == g.node_count());
      // nodes together now were together before
      for (NodeId a = 0; a < g.node_count(); ++a) {
        for (NodeId b = a + 1; b < g.node_count(); ++b) {
          if (next.component_of[a] == next.component_of[b]) {
            CHECK(previous.component_of[a] == previous.component_of[b]);
          }
        }
      }
      previous = next;
    }
  }
}

TEST_CASE("serialization round-trips exactly and is byte-stable") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    auto g = testing::random_grid(rng, {.max_nodes = 40});
    std::vector<double> caps(g.line_count());
    std::uniform_real_distribution<double> u(0.0, 3.0);
    for (auto& c : caps) c = u(rng);
    g = g.with_capacities(caps);
    const auto text = serialize_grid(g);
    const auto back = parse_grid(text);
    CHECK(back == g);
    CHECK(serialize_grid(back) == text);
  }
}

TEST_CASE("save and load through a file") {
  const auto path = std::filesystem::temp_directory_path() / "gridcore_roundtrip.grid";
  const auto g = fixtures::make_qgraph(5);
  save_grid(g, path);
  CHECK(load_grid(path) == g);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_grid(path), GridError);
}

TEST_CASE("line removal helpers") {
  const auto g = fixtures::make_mring(3);
  const LineSet removed{0, 4};
  const auto alive = g.alive_except(removed);
  CHECK(!alive[0]);
  CHECK(!alive[4]);
  CHECK(alive[1]);
  CHECK_THROWS_AS(g.alive_except(std::vector<LineId>{99}), ValidationError);
  CHECK_THROWS_AS(g.capacities(), ValidationError);
}
