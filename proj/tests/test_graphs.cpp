#include <catch_amalgamated.hpp>

#include "fedmod/graphs.hpp"
#include "fedmod/rng.hpp"

using namespace fedmod;

namespace {

struct Tag {
  int v = 0;
};

ConflictGraph<Tag> make_graph(const std::vector<double>& weights,
                              const std::vector<std::pair<int, int>>& edges) {
  ConflictGraph<Tag> g;
  for (std::size_t i = 0; i < weights.size(); ++i) g.add_vertex(Tag{static_cast<int>(i)}, weights[i]);
  for (auto [a, b] : edges) g.add_edge(a, b);
  return g;
}

ConflictGraph<Tag> random_graph(Rng& rng, int max_n) {
  int n = static_cast<int>(rng.uniform_int(1, max_n));
  ConflictGraph<Tag> g;
  for (int i = 0; i < n; ++i) g.add_vertex(Tag{i}, rng.uniform(0.1, 10.0));
  double p = rng.uniform(0.1, 0.7);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (rng.bernoulli(p)) g.add_edge(a, b);
  return g;
}

}  // namespace

TEST_CASE("brute force on a triangle picks the single heaviest vertex") {
  auto g = make_graph({3, 2, 1}, {{0, 1}, {1, 2}, {0, 2}});
  auto best = brute_force_best(g, Objective::max_weight);
  REQUIRE(best.ids == std::vector<int>{0});
  REQUIRE(best.total_weight == 3.0);
}

TEST_CASE("brute force on a path prefers the heavy middle") {
  auto g = make_graph({1, 5, 1}, {{0, 1}, {1, 2}});
  auto best = brute_force_best(g, Objective::max_weight);
  REQUIRE(best.ids == std::vector<int>{1});
  REQUIRE(best.total_weight == 5.0);
}

TEST_CASE("edgeless graph: every vertex is in the maximum set") {
  auto g = make_graph({1, 2, 3, 4}, {});
  auto best = brute_force_best(g, Objective::max_weight);
  REQUIRE(best.ids == std::vector<int>{0, 1, 2, 3});
  auto greedy = greedy_mwis(g);
  REQUIRE(greedy.ids == best.ids);
}

TEST_CASE("brute force enforces the size bound") {
  ConflictGraph<Tag> g;
  for (int i = 0; i < 26; ++i) g.add_vertex(Tag{i}, 1.0);
  REQUIRE_THROWS_AS(brute_force_best(g, Objective::max_weight), error);
}

TEST_CASE("self loops are rejected") {
  auto g = make_graph({1, 1}, {});
  REQUIRE_THROWS_AS(g.add_edge(0, 0), error);
}

TEST_CASE("greedy mwis on empty graph") {
  ConflictGraph<Tag> g;
  auto sel = greedy_mwis(g);
  REQUIRE(sel.ids.empty());
  REQUIRE(sel.total_weight == 0.0);
}

TEST_CASE("greedy mwis takes the star center when it dominates") {
  // center 0 weight 10, leaves weight 1
  auto g = make_graph({10, 1, 1, 1}, {{0, 1}, {0, 2}, {0, 3}});
  auto sel = greedy_mwis(g);
  REQUIRE(sel.ids == std::vector<int>{0});
  auto best = brute_force_best(g, Objective::max_weight);
  REQUIRE(sel.total_weight == best.total_weight);
}

TEST_CASE("greedy min wis picks both isolated vertices smallest first") {
  auto g = make_graph({4, 1}, {});
  auto sel = greedy_min_wis(g, 2);
  REQUIRE(sel.ids == std::vector<int>{0, 1});
  REQUIRE(sel.total_weight == 5.0);
}

TEST_CASE("greedy min wis on a path takes the light endpoints") {
  auto g = make_graph({1, 5, 1}, {{0, 1}, {1, 2}});
  auto sel = greedy_min_wis(g, 3);
  REQUIRE(sel.ids == std::vector<int>{0, 2});
  REQUIRE(sel.total_weight == 2.0);
}

TEST_CASE("greedy min wis honors the size cap") {
  auto g = make_graph({1, 2, 3, 4, 5}, {});
  auto sel = greedy_min_wis(g, 3);
  REQUIRE(sel.ids.size() == 3);
  REQUIRE(sel.total_weight == 1.0 + 2.0 + 3.0);
}

TEST_CASE("solver outputs are independent and maximal over random graphs") {
  Rng rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    auto g = random_graph(rng, 15);
    auto mx = greedy_mwis(g);
    REQUIRE(is_independent(g, mx.ids));
    REQUIRE(is_maximal(g, mx.ids));
    auto mn = greedy_min_wis(g, g.size());
    REQUIRE(is_independent(g, mn.ids));
    REQUIRE(is_maximal(g, mn.ids));
    auto best = brute_force_best(g, Objective::max_weight);
    REQUIRE(mx.total_weight <= best.total_weight + 1e-12);
    auto best_min = brute_force_best(g, Objective::min_weight_maximal);
    REQUIRE(mn.total_weight >= best_min.total_weight - 1e-12);
  }
}

TEST_CASE("greedy equals exact optimum on stars, cliques and edgeless graphs") {
  Rng rng(7);
  for (int trial = 0; trial < 60; ++trial) {
    int n = static_cast<int>(rng.uniform_int(2, 12));
    std::vector<double> w;
    for (int i = 0; i < n; ++i) w.push_back(rng.uniform(0.5, 9.5));

    // star: center must beat the leaf sum or lose to it; greedy handles both
    std::vector<std::pair<int, int>> star_edges;
    for (int i = 1; i < n; ++i) star_edges.emplace_back(0, i);
    std::vector<double> star_w = w;
    star_w[0] = 100.0;  // center dominates
    auto star = make_graph(star_w, star_edges);
    REQUIRE(greedy_mwis(star).total_weight ==
            brute_force_best(star, Objective::max_weight).total_weight);

    std::vector<std::pair<int, int>> clique_edges;
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) clique_edges.emplace_back(a, b);
    auto clique = make_graph(w, clique_edges);
    REQUIRE(greedy_mwis(clique).total_weight ==
            brute_force_best(clique, Objective::max_weight).total_weight);

    auto edgeless = make_graph(w, {});
    REQUIRE(greedy_mwis(edgeless).total_weight ==
            brute_force_best(edgeless, Objective::max_weight).total_weight);
  }
}

TEST_CASE("determinism: identical graph yields identical selection") {
  Rng rng(99);
  auto g1 = random_graph(rng, 12);
  Rng rng2(99);
  auto g2 = random_graph(rng2, 12);
  REQUIRE(greedy_mwis(g1).ids == greedy_mwis(g2).ids);
  REQUIRE(greedy_min_wis(g1, g1.size()).ids == greedy_min_wis(g2, g2.size()).ids);
}

TEST_CASE("edge list dump round trips the counts") {
  auto g = make_graph({1, 2, 3}, {{0, 1}, {1, 2}});
  std::ostringstream os;
  g.dump_edge_list(os);
  REQUIRE(os.str().substr(0, 3) == "3 2");
}

TEST_CASE("greedy min wis rejects a nonpositive cap") {
  auto g = make_graph({1.0}, {});
  REQUIRE_THROWS_AS(greedy_min_wis(g, 0), error);
}
