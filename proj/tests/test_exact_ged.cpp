#include <catch2/catch_amalgamated.hpp>

#include "support/test_support.hpp"

using namespace emba;

TEST_CASE("paths with one extra vertex") {
  Graph p3 = support::path_of({0, 1, 0});
  Graph p2 = support::path_of({0, 1});
  CostModel c;
  auto r = exact_ged(p3, p2, c);
  REQUIRE_FALSE(r.exceeded);
  REQUIRE(r.distance == Catch::Approx(2.0));
  REQUIRE(r.path.total == Catch::Approx(2.0));
  REQUIRE(brute_force_ged(p3, p2, c) == Catch::Approx(2.0));
}

TEST_CASE("identical graphs cost nothing") {
  Graph g = support::triangle_pendant();
  CostModel c;
  auto r = exact_ged(g, g, c);
  REQUIRE(r.distance == 0.0);
  REQUIRE(r.path.ops.empty());
  REQUIRE(r.map == std::vector<int32_t>{0, 1, 2, 3});
}

TEST_CASE("edits against the empty graph") {
  Graph g = support::triangle_pendant();
  Graph empty;
  CostModel c;
  c.vertex_indel = 2.0;
  c.edge_indel = 0.5;
  REQUIRE(exact_ged(g, empty, c).distance == Catch::Approx(4 * 2.0 + 4 * 0.5));
  REQUIRE(exact_ged(empty, g, c).distance == Catch::Approx(4 * 2.0 + 4 * 0.5));
  REQUIRE(exact_ged(empty, empty, c).distance == 0.0);
}

TEST_CASE("search agrees with the exhaustive oracle") {
  support::Rng rng(601);
  CostModel uniform;
  CostModel scaled;
  scaled.vertex_indel = 1.5;
  scaled.edge_indel = 0.75;
  scaled.vertex_relabel = 2.0;
  scaled.edge_relabel = 0.5;
  for (int it = 0; it < 90; ++it) {
    Graph g = support::random_graph(rng, 1 + static_cast<int>(rng.below(6)), 3, 45);
    Graph h = support::random_graph(rng, 1 + static_cast<int>(rng.below(6)), 3, 45);
    const CostModel& c = (it % 2 == 0) ? uniform : scaled;
    auto r = exact_ged(g, h, c);
    REQUIRE_FALSE(r.exceeded);
    REQUIRE(r.distance == Catch::Approx(brute_force_ged(g, h, c)).margin(1e-9));
    REQUIRE(r.path.total == Catch::Approx(r.distance).margin(1e-9));
    REQUIRE(realize_edit_cost(g, h, r.map, c) ==
            Catch::Approx(r.distance).margin(1e-9));
  }
}

TEST_CASE("search agrees with the oracle under label cost tables") {
  support::Rng rng(602);
  for (int it = 0; it < 40; ++it) {
    int L = 2 + static_cast<int>(rng.below(3));
    LabelCostTable tab = support::random_label_table(rng, L);
    CostModel c;
    c.label_costs = tab;
    c.vertex_indel = 2.0;
    Graph g = support::random_graph(rng, 1 + static_cast<int>(rng.below(6)), L, 45);
    Graph h = support::random_graph(rng, 1 + static_cast<int>(rng.below(6)), L, 45);
    auto r = exact_ged(g, h, c);
    REQUIRE(r.distance == Catch::Approx(brute_force_ged(g, h, c)).margin(1e-9));
  }
}

TEST_CASE("search agrees with the oracle when the table is not embeddable") {
  // one pair far cheaper than the rest: the subdominant ultrametric would
  // demand a dummy radius below vertex_indel, so the label bound drops out
  LabelCostTable tab;
  tab.labels = {0, 1, 2};
  tab.cost = {0, 0.1, 3, 0.1, 0, 3, 3, 3, 0};
  CostModel c;
  c.label_costs = tab;
  c.vertex_indel = 1.0;  // dendrogram radius is 1.5 > 1.0
  REQUIRE_THROWS_AS(build_ultrametric_tree(tab, c), DeletionTooCheapError);
  support::Rng rng(603);
  for (int it = 0; it < 25; ++it) {
    Graph g = support::random_graph(rng, 1 + static_cast<int>(rng.below(5)), 3, 50);
    Graph h = support::random_graph(rng, 1 + static_cast<int>(rng.below(5)), 3, 50);
    auto r = exact_ged(g, h, c);
    REQUIRE(r.distance == Catch::Approx(brute_force_ged(g, h, c)).margin(1e-9));
  }
}

TEST_CASE("edge labels enter the distance") {
  support::Rng rng(604);
  CostModel c;
  c.edge_relabel = 0.25;
  for (int it = 0; it < 30; ++it) {
    Graph g = support::random_graph(rng, 2 + static_cast<int>(rng.below(4)), 2, 60);
    Graph h = support::random_graph(rng, 2 + static_cast<int>(rng.below(4)), 2, 60);
    g.edge_labels.assign(g.edges.size(), 0);
    h.edge_labels.assign(h.edges.size(), 0);
    for (auto& l : g.edge_labels) l = static_cast<int32_t>(rng.below(2));
    for (auto& l : h.edge_labels) l = static_cast<int32_t>(rng.below(2));
    auto r = exact_ged(g, h, c);
    REQUIRE(r.distance == Catch::Approx(brute_force_ged(g, h, c)).margin(1e-9));
    Graph rebuilt = apply_edit_path(g, r.path);
    REQUIRE(support::labeled_isomorphic(rebuilt, h));
  }
}

TEST_CASE("the returned path transforms g into h") {
  support::Rng rng(605);
  CostModel c;
  for (int it = 0; it < 50; ++it) {
    Graph g = support::random_graph(rng, 1 + static_cast<int>(rng.below(6)), 3, 40);
    Graph h = support::random_graph(rng, 1 + static_cast<int>(rng.below(6)), 3, 40);
    auto r = exact_ged(g, h, c);
    Graph rebuilt = apply_edit_path(g, r.path);
    REQUIRE(support::labeled_isomorphic(rebuilt, h));
  }
}

TEST_CASE("thresholded search reports exceeded strictly above the threshold") {
  Graph p3 = support::path_of({0, 1, 0});
  Graph p2 = support::path_of({0, 1});
  CostModel c;
  ExactGedOptions opts;
  opts.threshold = 2.0;
  auto hit = exact_ged(p3, p2, c, opts);
  REQUIRE_FALSE(hit.exceeded);
  REQUIRE(hit.distance == Catch::Approx(2.0));
  opts.threshold = 1.999;
  auto miss = exact_ged(p3, p2, c, opts);
  REQUIRE(miss.exceeded);
  REQUIRE(std::isinf(miss.distance));
  opts.threshold = 0.0;
  REQUIRE(exact_ged(p3, p2, c, opts).exceeded);
  REQUIRE_FALSE(exact_ged(p3, p3, c, opts).exceeded);
}

TEST_CASE("thresholded results agree with the oracle across radii") {
  support::Rng rng(606);
  CostModel c;
  for (int it = 0; it < 40; ++it) {
    Graph g = support::random_graph(rng, 1 + static_cast<int>(rng.below(6)), 2, 40);
    Graph h = support::random_graph(rng, 1 + static_cast<int>(rng.below(6)), 2, 40);
    double exact = brute_force_ged(g, h, c);
    for (double tau : {0.0, 1.0, 2.0, 3.0, 5.0, 8.0}) {
      ExactGedOptions opts;
      opts.threshold = tau;
      auto r = exact_ged(g, h, c, opts);
      if (exact <= tau + 1e-9) {
        REQUIRE_FALSE(r.exceeded);
        REQUIRE(r.distance == Catch::Approx(exact).margin(1e-9));
      } else {
        REQUIRE(r.exceeded);
      }
    }
  }
}

TEST_CASE("size cap only applies without a threshold") {
  Graph big;
  for (int i = 0; i < 21; ++i) big.add_vertex(0);
  CostModel c;
  REQUIRE_THROWS_AS(exact_ged(big, big, c), SizeCapError);
  ExactGedOptions opts;
  opts.threshold = 0.5;
  REQUIRE_NOTHROW(exact_ged(big, big, c, opts));
  REQUIRE(exact_ged(big, big, c, opts).distance == 0.0);
}

TEST_CASE("brute force respects its own cap and limit") {
  Graph big;
  for (int i = 0; i < 13; ++i) big.add_vertex(0);
  CostModel c;
  REQUIRE_THROWS_AS(brute_force_ged(big, big, c), SizeCapError);
  REQUIRE_NOTHROW(brute_force_ged(big, big, c, 1.0, 13));
  Graph p3 = support::path_of({0, 1, 0});
  Graph p2 = support::path_of({0, 1});
  REQUIRE(std::isinf(brute_force_ged(p3, p2, c, 1.0)));
  REQUIRE(brute_force_ged(p3, p2, c, 2.0) == Catch::Approx(2.0));
}

TEST_CASE("results are deterministic") {
  support::Rng rng(607);
  Graph g = support::random_graph(rng, 6, 3, 40);
  Graph h = support::random_graph(rng, 6, 3, 40);
  CostModel c;
  auto a = exact_ged(g, h, c);
  auto b = exact_ged(g, h, c);
  REQUIRE(a.distance == b.distance);
  REQUIRE(a.map == b.map);
  REQUIRE(a.path.ops.size() == b.path.ops.size());
}

TEST_CASE("apply_edit_path validates operations") {
  Graph g = support::path_of({0, 1});
  EditPath bad;
  bad.ops.push_back({EditOp::vertex_delete, 0, -1, -1, 1.0});
  REQUIRE_THROWS_AS(apply_edit_path(g, bad), Error);  // incident edge remains

  EditPath missing;
  missing.ops.push_back({EditOp::edge_delete, 0, 5, -1, 1.0});
  REQUIRE_THROWS_AS(apply_edit_path(g, missing), Error);

  EditPath dup;
  dup.ops.push_back({EditOp::vertex_insert, 0, -1, 1, 1.0});
  REQUIRE_THROWS_AS(apply_edit_path(g, dup), Error);

  EditPath ok;
  ok.ops.push_back({EditOp::edge_delete, 0, 1, -1, 1.0});
  ok.ops.push_back({EditOp::vertex_delete, 1, -1, -1, 1.0});
  Graph out = apply_edit_path(g, ok);
  REQUIRE(out.n() == 1);
  REQUIRE(out.m() == 0);
  REQUIRE(out.labels == std::vector<int32_t>{0});
}

TEST_CASE("edit paths order operations applicably") {
  // forcing deletions, relabels, insertions in one path
  Graph g;
  g.add_vertex(0);
  g.add_vertex(1);
  g.add_vertex(2);
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  Graph h;
  h.add_vertex(0);
  h.add_vertex(3);
  h.add_vertex(4);
  h.add_edge(0, 1);
  h.add_edge(0, 2);
  CostModel c;
  auto r = exact_ged(g, h, c);
  Graph rebuilt = apply_edit_path(g, r.path);
  REQUIRE(support::labeled_isomorphic(rebuilt, h));
  double sum = 0.0;
  for (const auto& op : r.path.ops) sum += op.cost;
  REQUIRE(sum == Catch::Approx(r.path.total));
}
