#pragma once

// Similarity search over a graph database: embeddings per graph, a cover
// tree over their composite l1 metric for the filter step, and exact edit
// distance for verification. The index stores cost model, trees and points;
// it does not keep the graphs, so queries that verify take the database
// alongside. Persistence writes points and trees only and rebuilds the
// cover tree deterministically on load.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "bounds.hpp"
#include "core.hpp"
#include "cover_tree.hpp"
#include "embedding.hpp"
#include "exact_ged.hpp"
#include "metric_tree.hpp"
#include "ultrametric.hpp"

namespace emba {

enum class BoundKind : uint8_t { llb = 0, dlb = 1, clb = 2 };

inline const char* to_string(BoundKind b) {
  switch (b) {
    case BoundKind::llb: return "llb";
    case BoundKind::dlb: return "dlb";
    case BoundKind::clb: return "clb";
  }
  return "?";
}

struct CompositeL1 {
  double operator()(const CompositeEmbedding& a, const CompositeEmbedding& b) const {
    return l1_distance(a, b);
  }
};

using EmbeddingCoverTree = CoverTree<CompositeEmbedding, CompositeL1>;

namespace detail {

template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::size_t workers = std::min<std::size_t>(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  for (auto& t : pool) t.join();
}

inline double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                   t0)
      .count();
}

}  // namespace detail

struct SearchIndex {
  CostModel cost_model;
  BoundKind bound = BoundKind::clb;
  double cover_base = 2.0;
  std::vector<MetricTree> trees;  // one per composite part, in part order
  std::vector<int64_t> ids;       // positional graph ids
  std::vector<CompositeEmbedding> points;
  std::optional<EmbeddingCoverTree> cover;

  std::size_t size() const { return points.size(); }

  CompositeEmbedding embed(const Graph& g, EmbeddingWorkspace& ws) const {
    CompositeEmbedding e;
    e.parts.reserve(trees.size());
    for (const auto& t : trees) e.parts.push_back(compute_vector(g, t, ws));
    return e;
  }

  CompositeEmbedding embed(const Graph& g) const {
    thread_local EmbeddingWorkspace ws;
    return embed(g, ws);
  }

  void rebuild_cover_tree() {
    cover.emplace(std::span<const CompositeEmbedding>(points), CompositeL1{},
                  cover_base);
  }
};

inline SearchIndex build_index(std::span<const Graph> db, const CostModel& c,
                               BoundKind bound, int threads = 1,
                               double cover_base = 2.0) {
  validate_cost_model(c);
  SearchIndex idx;
  idx.cost_model = c;
  idx.bound = bound;
  idx.cover_base = cover_base;
  if (bound == BoundKind::llb || bound == BoundKind::clb) {
    if (c.label_costs) {
      idx.trees.push_back(build_ultrametric_tree(*c.label_costs, c));
    } else {
      std::vector<int32_t> labels;
      for (const auto& g : db)
        labels.insert(labels.end(), g.labels.begin(), g.labels.end());
      idx.trees.push_back(build_label_tree(std::move(labels), c));
    }
  }
  if (bound == BoundKind::dlb || bound == BoundKind::clb)
    idx.trees.push_back(build_degree_tree(dataset_max_degree(db), c));

  idx.ids.resize(db.size());
  for (std::size_t i = 0; i < db.size(); ++i) idx.ids[i] = static_cast<int64_t>(i);
  idx.points.resize(db.size());
  detail::parallel_for(db.size(), threads, [&](std::size_t i) {
    thread_local EmbeddingWorkspace ws;
    idx.points[i] = idx.embed(db[i], ws);
  });
  idx.rebuild_cover_tree();
  return idx;
}

enum class Verify : uint8_t { none = 0, exact = 1 };
enum class ExtraFilter : uint8_t { none = 0, branch = 1 };

struct QueryResult {
  struct Answer {
    int64_t id;
    double distance;
    bool exact;  // false: distance is a bound (filter-only or branch accept)
  };
  std::vector<Answer> answers;  // sorted by distance, ties by id
  int64_t candidates = 0;
  int64_t exact_computations = 0;
  double filter_ms = 0.0;
  double verify_ms = 0.0;
};

struct RangeOptions {
  double radius = 0.0;
  Verify verify = Verify::exact;
  ExtraFilter extra = ExtraFilter::none;
  int threads = 1;
};

inline QueryResult range_query(const SearchIndex& idx, std::span<const Graph> db,
                               const Graph& q, const RangeOptions& opts) {
  if (opts.radius < 0) throw Error("negative query radius");
  if (db.size() != idx.size())
    throw TreeMismatchError("database size does not match the index");
  QueryResult res;
  if (idx.size() == 0) return res;
  CompositeEmbedding qe = idx.embed(q);

  auto t0 = std::chrono::steady_clock::now();
  std::vector<int32_t> cand = idx.cover->range(qe, opts.radius);
  res.filter_ms = detail::ms_since(t0);
  res.candidates = static_cast<int64_t>(cand.size());

  if (opts.verify == Verify::none) {
    for (int32_t o : cand)
      res.answers.push_back({idx.ids[o], l1_distance(qe, idx.points[o]), false});
  } else {
    auto t1 = std::chrono::steady_clock::now();
    std::vector<std::optional<QueryResult::Answer>> slot(cand.size());
    std::vector<int64_t> exact_count(cand.size(), 0);
    detail::parallel_for(cand.size(), opts.threads, [&](std::size_t i) {
      int32_t o = cand[i];
      const Graph& other = db[o];
      if (opts.extra == ExtraFilter::branch) {
        auto a = branch_assignment(q, other, idx.cost_model);
        if (a.cost > opts.radius + kCostEps) return;
        double ub = realize_edit_cost(q, other,
                                      matching_to_map(a, q.n(), other.n()),
                                      idx.cost_model);
        if (ub <= opts.radius + kCostEps) {
          slot[i] = {idx.ids[o], ub, false};
          return;
        }
      }
      ExactGedOptions ego;
      ego.threshold = opts.radius;
      auto r = exact_ged(q, other, idx.cost_model, ego);
      ++exact_count[i];
      if (!r.exceeded) slot[i] = {idx.ids[o], r.distance, true};
    });
    for (std::size_t i = 0; i < cand.size(); ++i) {
      res.exact_computations += exact_count[i];
      if (slot[i]) res.answers.push_back(*slot[i]);
    }
    res.verify_ms = detail::ms_since(t1);
  }
  std::sort(res.answers.begin(), res.answers.end(),
            [](const QueryResult::Answer& a, const QueryResult::Answer& b) {
              if (a.distance != b.distance) return a.distance < b.distance;
              return a.id < b.id;
            });
  return res;
}

// Lazy ascending stream of (graph id, lower bound) for a query embedding.
class RankingStream {
 public:
  RankingStream(const SearchIndex& idx, CompositeEmbedding qe)
      : stream_(idx.cover->rank(std::move(qe))) {}

  std::optional<std::pair<int32_t, double>> next() { return stream_.next(); }

 private:
  EmbeddingCoverTree::RankStream stream_;
};

inline RankingStream incremental_ranking(const SearchIndex& idx,
                                         const CompositeEmbedding& qe) {
  if (qe.parts.size() != idx.trees.size())
    throw TreeMismatchError("query embedding does not match the index bound");
  for (std::size_t i = 0; i < qe.parts.size(); ++i)
    if (qe.parts[i].tree_version != idx.trees[i].version())
      throw TreeMismatchError("query embedding bound to a different tree");
  return RankingStream(idx, qe);
}

// Optimal multi-step kNN: pull candidates in ascending lower-bound order,
// verify each, stop once the next bound exceeds the current k-th exact
// distance. Never verifies an object whose bound exceeds the final k-th
// distance; returns every tie at that distance.
inline QueryResult knn_query(const SearchIndex& idx, std::span<const Graph> db,
                             const Graph& q, int k) {
  if (k <= 0) throw Error("k must be positive");
  if (db.size() != idx.size())
    throw TreeMismatchError("database size does not match the index");
  QueryResult res;
  if (idx.size() == 0) return res;
  CompositeEmbedding qe = idx.embed(q);
  auto t0 = std::chrono::steady_clock::now();
  RankingStream stream = incremental_ranking(idx, qe);

  std::vector<QueryResult::Answer> verified;
  std::vector<double> heap;  // max-heap of the k smallest exact distances
  constexpr double inf = std::numeric_limits<double>::infinity();
  auto kth = [&] { return heap.size() < static_cast<std::size_t>(k) ? inf : heap.front(); };

  for (;;) {
    auto nx = stream.next();
    if (!nx) break;
    auto [o, lb] = *nx;
    if (lb > kth()) break;
    res.candidates += 1;
    ExactGedOptions ego;
    ego.threshold = kth();
    auto t1 = std::chrono::steady_clock::now();
    auto r = exact_ged(q, db[o], idx.cost_model, ego);
    res.verify_ms += detail::ms_since(t1);
    res.exact_computations += 1;
    if (r.exceeded) continue;
    verified.push_back({idx.ids[o], r.distance, true});
    if (heap.size() < static_cast<std::size_t>(k)) {
      heap.push_back(r.distance);
      std::push_heap(heap.begin(), heap.end());
    } else if (r.distance < heap.front()) {
      std::pop_heap(heap.begin(), heap.end());
      heap.back() = r.distance;
      std::push_heap(heap.begin(), heap.end());
    }
  }
  double cut = kth();
  for (const auto& a : verified)
    if (a.distance <= cut) res.answers.push_back(a);
  std::sort(res.answers.begin(), res.answers.end(),
            [](const QueryResult::Answer& a, const QueryResult::Answer& b) {
              if (a.distance != b.distance) return a.distance < b.distance;
              return a.id < b.id;
            });
  res.filter_ms = detail::ms_since(t0) - res.verify_ms;
  return res;
}

// ---- persistence ----------------------------------------------------------

namespace detail {

inline constexpr char kIndexMagic[4] = {'E', 'M', 'B', 'A'};
inline constexpr uint32_t kIndexVersion = 1;

struct ByteWriter {
  std::vector<uint8_t> buf;
  void u8(uint8_t v) { buf.push_back(v); }
  void u32(uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void u64(uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void i32(int32_t v) { u32(static_cast<uint32_t>(v)); }
  void i64(int64_t v) { u64(static_cast<uint64_t>(v)); }
  void f64(double v) { u64(std::bit_cast<uint64_t>(v)); }
};

struct ByteReader {
  const uint8_t* p;
  std::size_t n;
  std::size_t pos = 0;
  void need(std::size_t k) const {
    if (pos + k > n) throw IoError("index file truncated");
  }
  uint8_t u8() {
    need(1);
    return p[pos++];
  }
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(p[pos++]) << (8 * i);
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[pos++]) << (8 * i);
    return v;
  }
  int32_t i32() { return static_cast<int32_t>(u32()); }
  int64_t i64() { return static_cast<int64_t>(u64()); }
  double f64() { return std::bit_cast<double>(u64()); }
};

inline uint64_t fnv1a(const uint8_t* p, std::size_t n) {
  uint64_t h = 14695981039346656037ull;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

inline void write_tree(ByteWriter& w, const MetricTree& t) {
  w.u8(static_cast<uint8_t>(t.kind()));
  w.u8(t.extended() ? 1 : 0);
  w.f64(t.extended() ? t.weight_of(t.node_count()) : 0.0);
  w.u32(static_cast<uint32_t>(t.node_count()));
  for (int32_t i = 0; i < t.node_count(); ++i) {
    w.i32(t.node(i).parent);
    w.f64(t.node(i).weight);
  }
  std::vector<std::pair<int64_t, int32_t>> anchors(t.anchors().begin(),
                                                   t.anchors().end());
  std::sort(anchors.begin(), anchors.end());
  w.u32(static_cast<uint32_t>(anchors.size()));
  for (auto [key, node] : anchors) {
    w.i64(key);
    w.i32(node);
  }
}

inline MetricTree read_tree(ByteReader& r) {
  MetricTree t;
  auto kind = static_cast<TreeKind>(r.u8());
  bool extended = r.u8() != 0;
  double ext_weight = r.f64();
  uint32_t nodes = r.u32();
  for (uint32_t i = 0; i < nodes; ++i) {
    int32_t parent = r.i32();
    double weight = r.f64();
    if (i == 0) {
      if (parent != -1) throw IoError("index file corrupt: bad tree root");
      t.add_node(-1, 0.0);
    } else {
      if (parent < 0 || parent >= static_cast<int32_t>(i))
        throw IoError("index file corrupt: tree nodes out of order");
      t.add_node(parent, weight);
    }
  }
  uint32_t anchors = r.u32();
  for (uint32_t i = 0; i < anchors; ++i) {
    int64_t key = r.i64();
    int32_t node = r.i32();
    if (node < 0 || node >= t.node_count())
      throw IoError("index file corrupt: anchor out of range");
    t.set_anchor(key, node);
  }
  if (extended) t.enable_path_extension(ext_weight);
  t.set_kind(kind);
  return t;
}

}  // namespace detail

inline void save_index(const SearchIndex& idx, const std::string& path) {
  detail::ByteWriter w;
  for (char c : detail::kIndexMagic) w.u8(static_cast<uint8_t>(c));
  w.u32(detail::kIndexVersion);
  w.f64(idx.cost_model.vertex_indel);
  w.f64(idx.cost_model.edge_indel);
  w.f64(idx.cost_model.vertex_relabel);
  w.f64(idx.cost_model.edge_relabel);
  w.u8(idx.cost_model.label_costs ? 1 : 0);
  if (idx.cost_model.label_costs) {
    const auto& t = *idx.cost_model.label_costs;
    w.u32(static_cast<uint32_t>(t.labels.size()));
    for (int32_t l : t.labels) w.i32(l);
    for (double v : t.cost) w.f64(v);
  }
  w.u8(static_cast<uint8_t>(idx.bound));
  w.f64(idx.cover_base);
  w.u8(static_cast<uint8_t>(idx.trees.size()));
  for (const auto& t : idx.trees) detail::write_tree(w, t);
  w.u64(idx.points.size());
  for (std::size_t i = 0; i < idx.points.size(); ++i) {
    w.i64(idx.ids[i]);
    w.u8(static_cast<uint8_t>(idx.points[i].parts.size()));
    for (const auto& part : idx.points[i].parts) {
      w.u32(static_cast<uint32_t>(part.entries.size()));
      for (auto [key, value] : part.entries) {
        w.i32(key);
        w.f64(value);
      }
    }
  }
  w.u64(detail::fnv1a(w.buf.data(), w.buf.size()));
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(w.buf.data()),
            static_cast<std::streamsize>(w.buf.size()));
  if (!out) throw IoError("short write to " + path);
}

inline SearchIndex load_index(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<uint8_t> buf((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
  if (buf.size() < 12) throw IoError("not an index file: " + path);
  detail::ByteReader r{buf.data(), buf.size()};
  for (char c : detail::kIndexMagic)
    if (r.u8() != static_cast<uint8_t>(c))
      throw IoError("not an index file: " + path);
  uint32_t version = r.u32();
  if (version != detail::kIndexVersion)
    throw IoError("unsupported index version " + std::to_string(version));
  uint64_t computed = detail::fnv1a(buf.data(), buf.size() - 8);
  detail::ByteReader tail{buf.data(), buf.size()};
  tail.pos = buf.size() - 8;
  if (tail.u64() != computed) throw IoError("index file corrupt: checksum mismatch");
  r.n = buf.size() - 8;  // body only; the checksum is not part of the payload

  SearchIndex idx;
  idx.cost_model.vertex_indel = r.f64();
  idx.cost_model.edge_indel = r.f64();
  idx.cost_model.vertex_relabel = r.f64();
  idx.cost_model.edge_relabel = r.f64();
  if (r.u8()) {
    LabelCostTable t;
    uint32_t L = r.u32();
    t.labels.resize(L);
    for (auto& l : t.labels) l = r.i32();
    t.cost.resize(static_cast<std::size_t>(L) * L);
    for (auto& v : t.cost) v = r.f64();
    idx.cost_model.label_costs = std::move(t);
  }
  idx.bound = static_cast<BoundKind>(r.u8());
  idx.cover_base = r.f64();
  uint8_t tree_count = r.u8();
  for (uint8_t i = 0; i < tree_count; ++i) idx.trees.push_back(detail::read_tree(r));
  uint64_t points = r.u64();
  idx.ids.reserve(points);
  idx.points.reserve(points);
  for (uint64_t i = 0; i < points; ++i) {
    idx.ids.push_back(r.i64());
    CompositeEmbedding e;
    uint8_t parts = r.u8();
    if (parts != tree_count) throw IoError("index file corrupt: part count mismatch");
    for (uint8_t pi = 0; pi < parts; ++pi) {
      Embedding part;
      part.tree_version = idx.trees[pi].version();
      uint32_t entries = r.u32();
      part.entries.reserve(entries);
      int64_t prev = std::numeric_limits<int64_t>::min();
      for (uint32_t ei = 0; ei < entries; ++ei) {
        int32_t key = r.i32();
        double value = r.f64();
        if (key <= prev) throw IoError("index file corrupt: entry keys not ascending");
        prev = key;
        part.entries.push_back({key, value});
      }
      e.parts.push_back(std::move(part));
    }
    idx.points.push_back(std::move(e));
  }
  if (r.pos != r.n) throw IoError("index file corrupt: trailing bytes");
  idx.rebuild_cover_tree();
  return idx;
}

}  // namespace emba
