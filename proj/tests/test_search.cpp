#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "support/test_support.hpp"

using namespace emba;
namespace fs = std::filesystem;

namespace {

std::vector<Graph> small_db(support::Rng& rng, int count, int max_n) {
  std::vector<Graph> db;
  for (int i = 0; i < count; ++i) {
    db.push_back(support::random_graph(
        rng, 1 + static_cast<int>(rng.below(max_n)), 3, 40));
    db.back().id = i;
  }
  return db;
}

// Exhaustive reference for range queries; limit pruning keeps it fast.
std::vector<std::pair<int64_t, double>> linear_range_oracle(
    const std::vector<Graph>& db, const Graph& q, double r, const CostModel& c) {
  std::vector<std::pair<int64_t, double>> out;
  for (std::size_t i = 0; i < db.size(); ++i) {
    double d = brute_force_ged(q, db[i], c, r);
    if (!std::isinf(d)) out.push_back({static_cast<int64_t>(i), d});
  }
  return out;
}

}  // namespace

TEST_CASE("index build produces one tree per composite part") {
  support::Rng rng(801);
  auto db = small_db(rng, 20, 8);
  CostModel c;
  SearchIndex clb_idx = build_index(db, c, BoundKind::clb);
  REQUIRE(clb_idx.trees.size() == 2);
  REQUIRE(clb_idx.trees[0].kind() == TreeKind::labels);
  REQUIRE(clb_idx.trees[1].kind() == TreeKind::degrees);
  REQUIRE(clb_idx.size() == db.size());
  SearchIndex llb_idx = build_index(db, c, BoundKind::llb);
  REQUIRE(llb_idx.trees.size() == 1);
  REQUIRE(llb_idx.trees[0].kind() == TreeKind::labels);
  SearchIndex dlb_idx = build_index(db, c, BoundKind::dlb);
  REQUIRE(dlb_idx.trees.size() == 1);
  REQUIRE(dlb_idx.trees[0].kind() == TreeKind::degrees);
  REQUIRE(clb_idx.cover.has_value());
  REQUIRE(clb_idx.cover->check_invariants());
}

TEST_CASE("index points equal per-graph embeddings") {
  support::Rng rng(802);
  auto db = small_db(rng, 25, 8);
  CostModel c;
  SearchIndex idx = build_index(db, c, BoundKind::clb);
  for (std::size_t i = 0; i < db.size(); ++i) {
    CompositeEmbedding e = idx.embed(db[i]);
    REQUIRE(e.parts.size() == idx.points[i].parts.size());
    for (std::size_t p = 0; p < e.parts.size(); ++p)
      REQUIRE(e.parts[p].entries == idx.points[i].parts[p].entries);
  }
  // threaded build produces the same points
  SearchIndex threaded = build_index(db, c, BoundKind::clb, 4);
  for (std::size_t i = 0; i < db.size(); ++i)
    for (std::size_t p = 0; p < idx.points[i].parts.size(); ++p)
      REQUIRE(threaded.points[i].parts[p].entries == idx.points[i].parts[p].entries);
}

TEST_CASE("filter-only range query equals a linear l1 scan") {
  support::Rng rng(803);
  auto db = small_db(rng, 40, 9);
  CostModel c;
  SearchIndex idx = build_index(db, c, BoundKind::clb);
  RangeOptions opts;
  opts.verify = Verify::none;
  for (int it = 0; it < 25; ++it) {
    Graph q = support::random_graph(rng, 1 + static_cast<int>(rng.below(9)), 3, 40);
    opts.radius = static_cast<double>(rng.below(5));
    QueryResult res = range_query(idx, db, q, opts);
    CompositeEmbedding qe = idx.embed(q);
    std::vector<int64_t> want;
    for (std::size_t i = 0; i < db.size(); ++i)
      if (l1_distance(qe, idx.points[i]) <= opts.radius)
        want.push_back(static_cast<int64_t>(i));
    REQUIRE(res.candidates == static_cast<int64_t>(want.size()));
    std::vector<int64_t> got;
    for (const auto& a : res.answers) got.push_back(a.id);
    std::sort(got.begin(), got.end());
    REQUIRE(got == want);
    for (const auto& a : res.answers) REQUIRE_FALSE(a.exact);
    REQUIRE(res.exact_computations == 0);
  }
}

TEST_CASE("verified range query equals the exhaustive oracle") {
  support::Rng rng(804);
  auto db = small_db(rng, 30, 7);
  CostModel c;
  SearchIndex idx = build_index(db, c, BoundKind::clb);
  for (int it = 0; it < 12; ++it) {
    Graph q = support::random_graph(rng, 1 + static_cast<int>(rng.below(7)), 3, 40);
    for (double r : {0.0, 1.0, 2.0, 3.0}) {
      RangeOptions opts;
      opts.radius = r;
      QueryResult res = range_query(idx, db, q, opts);
      auto want = linear_range_oracle(db, q, r, c);
      REQUIRE(res.answers.size() == want.size());
      std::vector<std::pair<int64_t, double>> got;
      for (const auto& a : res.answers) {
        REQUIRE(a.exact);
        got.push_back({a.id, a.distance});
      }
      std::sort(got.begin(), got.end());
      std::sort(want.begin(), want.end());
      for (std::size_t i = 0; i < want.size(); ++i) {
        REQUIRE(got[i].first == want[i].first);
        REQUIRE(got[i].second == Catch::Approx(want[i].second).margin(1e-9));
      }
    }
  }
}

TEST_CASE("branch pre-filter keeps the answer set") {
  support::Rng rng(805);
  auto db = small_db(rng, 30, 7);
  CostModel c;
  SearchIndex idx = build_index(db, c, BoundKind::clb);
  for (int it = 0; it < 10; ++it) {
    Graph q = support::random_graph(rng, 1 + static_cast<int>(rng.below(7)), 3, 40);
    RangeOptions plain;
    plain.radius = 2.0;
    RangeOptions branch = plain;
    branch.extra = ExtraFilter::branch;
    QueryResult a = range_query(idx, db, q, plain);
    QueryResult b = range_query(idx, db, q, branch);
    std::vector<int64_t> ia, ib;
    for (const auto& x : a.answers) ia.push_back(x.id);
    for (const auto& x : b.answers) ib.push_back(x.id);
    std::sort(ia.begin(), ia.end());
    std::sort(ib.begin(), ib.end());
    REQUIRE(ia == ib);
    REQUIRE(b.exact_computations <= a.exact_computations);
    for (const auto& x : b.answers) {
      REQUIRE(x.distance <= plain.radius + 1e-9);
      if (!x.exact) {
        double exact = brute_force_ged(q, db[x.id], c);
        REQUIRE(x.distance >= exact - 1e-9);
      }
    }
  }
}

TEST_CASE("range query input validation") {
  support::Rng rng(806);
  auto db = small_db(rng, 5, 5);
  CostModel c;
  SearchIndex idx = build_index(db, c, BoundKind::clb);
  Graph q = db[0];
  RangeOptions opts;
  opts.radius = -1.0;
  REQUIRE_THROWS_AS(range_query(idx, db, q, opts), Error);
  opts.radius = 1.0;
  std::vector<Graph> wrong(db.begin(), db.begin() + 3);
  REQUIRE_THROWS_AS(range_query(idx, wrong, q, opts), TreeMismatchError);
  REQUIRE_THROWS_AS(knn_query(idx, db, q, 0), Error);
  REQUIRE_THROWS_AS(knn_query(idx, wrong, q, 1), TreeMismatchError);
}

TEST_CASE("incremental ranking yields ascending lower bounds over the whole set") {
  support::Rng rng(807);
  auto db = small_db(rng, 35, 8);
  CostModel c;
  SearchIndex idx = build_index(db, c, BoundKind::clb);
  Graph q = support::random_graph(rng, 6, 3, 40);
  CompositeEmbedding qe = idx.embed(q);
  RankingStream stream = incremental_ranking(idx, qe);
  std::vector<std::pair<double, int32_t>> want;
  for (std::size_t i = 0; i < db.size(); ++i)
    want.push_back({l1_distance(qe, idx.points[i]), static_cast<int32_t>(i)});
  std::sort(want.begin(), want.end());
  for (std::size_t i = 0; i < want.size(); ++i) {
    auto nx = stream.next();
    REQUIRE(nx.has_value());
    REQUIRE(nx->first == want[i].second);
    REQUIRE(nx->second == Catch::Approx(want[i].first));
  }
  REQUIRE_FALSE(stream.next().has_value());

  SECTION("foreign embeddings are rejected") {
    MetricTree other_label = build_label_tree({0, 1, 2}, c);
    MetricTree other_degree = build_degree_tree(8, c);
    CompositeEmbedding foreign =
        concat({compute_vector(q, other_label), compute_vector(q, other_degree)});
    REQUIRE_THROWS_AS(incremental_ranking(idx, foreign), TreeMismatchError);
    CompositeEmbedding short_parts = concat({qe.parts[0]});
    REQUIRE_THROWS_AS(incremental_ranking(idx, short_parts), TreeMismatchError);
  }
}

TEST_CASE("knn equals the exhaustive oracle including ties") {
  support::Rng rng(808);
  auto db = small_db(rng, 30, 7);
  CostModel c;
  SearchIndex idx = build_index(db, c, BoundKind::clb);
  for (int it = 0; it < 8; ++it) {
    Graph q = support::random_graph(rng, 1 + static_cast<int>(rng.below(7)), 3, 40);
    std::vector<double> exact(db.size());
    for (std::size_t i = 0; i < db.size(); ++i)
      exact[i] = brute_force_ged(q, db[i], c);
    for (int k = 1; k <= 4; ++k) {
      QueryResult res = knn_query(idx, db, q, k);
      std::vector<double> sorted = exact;
      std::sort(sorted.begin(), sorted.end());
      double cut = sorted[static_cast<std::size_t>(k) - 1];
      std::vector<std::pair<double, int64_t>> want;
      for (std::size_t i = 0; i < db.size(); ++i)
        if (exact[i] <= cut + 1e-9)
          want.push_back({exact[i], static_cast<int64_t>(i)});
      std::sort(want.begin(), want.end());
      REQUIRE(res.answers.size() == want.size());
      for (std::size_t i = 0; i < want.size(); ++i) {
        REQUIRE(res.answers[i].id == want[i].second);
        REQUIRE(res.answers[i].distance == Catch::Approx(want[i].first).margin(1e-9));
        REQUIRE(res.answers[i].exact);
      }
      // refinement counter never exceeds the bound-threshold population
      int64_t population = 0;
      CompositeEmbedding qe = idx.embed(q);
      for (std::size_t i = 0; i < db.size(); ++i)
        if (l1_distance(qe, idx.points[i]) <= cut + 1e-9) ++population;
      REQUIRE(res.exact_computations <= population);
    }
  }
}

TEST_CASE("knn with k at or beyond the database size returns everything") {
  support::Rng rng(809);
  auto db = small_db(rng, 6, 5);
  CostModel c;
  SearchIndex idx = build_index(db, c, BoundKind::clb);
  Graph q = db[2];
  QueryResult res = knn_query(idx, db, q, 10);
  REQUIRE(res.answers.size() == db.size());
  bool found_self = false;
  for (const auto& a : res.answers)
    if (a.id == 2) {
      found_self = true;
      REQUIRE(a.distance == 0.0);
    }
  REQUIRE(found_self);
}

TEST_CASE("empty database") {
  std::vector<Graph> db;
  CostModel c;
  SearchIndex idx = build_index(db, c, BoundKind::clb);
  Graph q = support::path_of({0});
  RangeOptions opts;
  opts.radius = 5.0;
  REQUIRE(range_query(idx, db, q, opts).answers.empty());
  REQUIRE(knn_query(idx, db, q, 3).answers.empty());
}

TEST_CASE("index persistence round trip") {
  support::Rng rng(810);
  auto db = small_db(rng, 25, 8);
  CostModel c;
  c.vertex_indel = 1.5;
  c.edge_indel = 0.5;
  c.vertex_relabel = 2.0;
  c.edge_relabel = 0.75;
  SearchIndex idx = build_index(db, c, BoundKind::clb);
  fs::path p = fs::temp_directory_path() / "emba_test_index.bin";
  save_index(idx, p.string());
  SearchIndex back = load_index(p.string());

  REQUIRE(back.bound == idx.bound);
  REQUIRE(back.cover_base == idx.cover_base);
  REQUIRE(back.cost_model.vertex_indel == c.vertex_indel);
  REQUIRE(back.cost_model.edge_relabel == c.edge_relabel);
  REQUIRE(back.trees.size() == idx.trees.size());
  REQUIRE(back.ids == idx.ids);
  REQUIRE(back.points.size() == idx.points.size());
  for (std::size_t i = 0; i < idx.points.size(); ++i)
    for (std::size_t pi = 0; pi < idx.points[i].parts.size(); ++pi)
      REQUIRE(back.points[i].parts[pi].entries == idx.points[i].parts[pi].entries);
  for (std::size_t t = 0; t < idx.trees.size(); ++t) {
    REQUIRE(back.trees[t].node_count() == idx.trees[t].node_count());
    REQUIRE(back.trees[t].kind() == idx.trees[t].kind());
    REQUIRE(back.trees[t].extended() == idx.trees[t].extended());
    for (int32_t n = 0; n < idx.trees[t].node_count(); ++n) {
      REQUIRE(back.trees[t].node(n).parent == idx.trees[t].node(n).parent);
      REQUIRE(back.trees[t].node(n).weight == idx.trees[t].node(n).weight);
    }
    REQUIRE(back.trees[t].anchors().size() == idx.trees[t].anchors().size());
  }
  REQUIRE(back.cover.has_value());
  REQUIRE(back.cover->check_invariants());

  // queries through the restored index behave identically
  for (int it = 0; it < 6; ++it) {
    Graph q = support::random_graph(rng, 1 + static_cast<int>(rng.below(8)), 3, 40);
    RangeOptions opts;
    opts.radius = 2.0;
    QueryResult a = range_query(idx, db, q, opts);
    QueryResult b = range_query(back, db, q, opts);
    REQUIRE(a.answers.size() == b.answers.size());
    for (std::size_t i = 0; i < a.answers.size(); ++i) {
      REQUIRE(a.answers[i].id == b.answers[i].id);
      REQUIRE(a.answers[i].distance == b.answers[i].distance);
    }
    REQUIRE(a.candidates == b.candidates);
  }

  SECTION("serialization is byte-stable") {
    fs::path p2 = fs::temp_directory_path() / "emba_test_index2.bin";
    save_index(back, p2.string());
    std::ifstream f1(p, std::ios::binary), f2(p2, std::ios::binary);
    std::string b1((std::istreambuf_iterator<char>(f1)),
                   std::istreambuf_iterator<char>());
    std::string b2((std::istreambuf_iterator<char>(f2)),
                   std::istreambuf_iterator<char>());
    REQUIRE(b1 == b2);
  }
}

TEST_CASE("index persistence with a label cost table") {
  support::Rng rng(811);
  LabelCostTable tab = support::random_label_table(rng, 4);
  CostModel c;
  c.label_costs = tab;
  c.vertex_indel = 2.0;
  std::vector<Graph> db;
  for (int i = 0; i < 15; ++i)
    db.push_back(support::random_graph(rng, 2 + static_cast<int>(rng.below(6)), 4, 40));
  SearchIndex idx = build_index(db, c, BoundKind::clb);
  fs::path p = fs::temp_directory_path() / "emba_test_index_tab.bin";
  save_index(idx, p.string());
  SearchIndex back = load_index(p.string());
  REQUIRE(back.cost_model.label_costs.has_value());
  REQUIRE(back.cost_model.label_costs->labels == tab.labels);
  REQUIRE(back.cost_model.label_costs->cost == tab.cost);
  Graph q = db[3];
  QueryResult a = knn_query(idx, db, q, 2);
  QueryResult b = knn_query(back, db, q, 2);
  REQUIRE(a.answers.size() == b.answers.size());
  for (std::size_t i = 0; i < a.answers.size(); ++i)
    REQUIRE(a.answers[i].id == b.answers[i].id);
}

TEST_CASE("index files reject corruption") {
  support::Rng rng(812);
  auto db = small_db(rng, 10, 6);
  CostModel c;
  SearchIndex idx = build_index(db, c, BoundKind::clb);
  fs::path p = fs::temp_directory_path() / "emba_test_corrupt.bin";
  save_index(idx, p.string());
  auto slurp = [&]() {
    std::ifstream f(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(f)),
                       std::istreambuf_iterator<char>());
  };
  auto spit = [&](const std::string& bytes, const fs::path& to) {
    std::ofstream f(to, std::ios::binary | std::ios::trunc);
    f << bytes;
  };
  std::string good = slurp();

  fs::path bad = fs::temp_directory_path() / "emba_test_bad.bin";
  std::string wrong_magic = good;
  wrong_magic[0] = 'X';
  spit(wrong_magic, bad);
  REQUIRE_THROWS_AS(load_index(bad.string()), IoError);

  std::string wrong_version = good;
  wrong_version[4] = static_cast<char>(0x7f);
  spit(wrong_version, bad);
  REQUIRE_THROWS_AS(load_index(bad.string()), IoError);

  std::string flipped = good;
  flipped[good.size() / 2] ^= 0x01;
  spit(flipped, bad);
  REQUIRE_THROWS_AS(load_index(bad.string()), IoError);

  std::string truncated = good.substr(0, good.size() - 5);
  spit(truncated, bad);
  REQUIRE_THROWS_AS(load_index(bad.string()), IoError);

  spit("short", bad);
  REQUIRE_THROWS_AS(load_index(bad.string()), IoError);

  REQUIRE_THROWS_AS(load_index("/nonexistent/emba.bin"), IoError);
  REQUIRE_NOTHROW(load_index(p.string()));
}

TEST_CASE("single-part indexes answer filter queries") {
  support::Rng rng(813);
  auto db = small_db(rng, 20, 7);
  CostModel c;
  for (BoundKind bk : {BoundKind::llb, BoundKind::dlb}) {
    SearchIndex idx = build_index(db, c, bk);
    Graph q = support::random_graph(rng, 5, 3, 40);
    CompositeEmbedding qe = idx.embed(q);
    RangeOptions opts;
    opts.verify = Verify::none;
    opts.radius = 2.0;
    QueryResult res = range_query(idx, db, q, opts);
    std::vector<int64_t> want;
    for (std::size_t i = 0; i < db.size(); ++i)
      if (l1_distance(qe, idx.points[i]) <= opts.radius)
        want.push_back(static_cast<int64_t>(i));
    std::vector<int64_t> got;
    for (const auto& a : res.answers) got.push_back(a.id);
    std::sort(got.begin(), got.end());
    REQUIRE(got == want);
  }
}

TEST_CASE("bound kind names") {
  REQUIRE(std::string(to_string(BoundKind::llb)) == "llb");
  REQUIRE(std::string(to_string(BoundKind::dlb)) == "dlb");
  REQUIRE(std::string(to_string(BoundKind::clb)) == "clb");
}
