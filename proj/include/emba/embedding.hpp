#pragma once

// Sparse l1 embeddings of anchored multisets. For every tree edge, the
// entry holds (number of elements anchored strictly below the edge) times
// the edge weight; the l1 distance between two such vectors equals the
// optimal assignment cost under the tree metric. Entries are keyed by the
// child node id of their edge and kept sorted; elements anchored on the
// root (the dummy, degree-0 vertices) contribute to no entry.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "core.hpp"
#include "metric_tree.hpp"

namespace emba {

struct Embedding {
  std::vector<std::pair<int32_t, double>> entries;  // keys ascending
  uint64_t tree_version = 0;

  double norm1() const {
    double s = 0;
    for (auto& [k, v] : entries) s += v;
    return s;
  }
};

// Scratch space for compute_vector; resettable in O(1) via a generation
// counter so embedding a whole dataset never re-clears per-node arrays.
// One workspace per thread; a single call is reentrant across workspaces.
class EmbeddingWorkspace {
 public:
  void begin(int32_t node_hint) {
    if (static_cast<int32_t>(stamp_.size()) < node_hint) {
      stamp_.resize(node_hint, 0);
      count_.resize(node_hint, 0);
    }
    ++gen_;
    touched_.clear();
  }

  void add(int32_t node, int64_t delta) {
    grow(node);
    if (stamp_[node] != gen_) {
      stamp_[node] = gen_;
      count_[node] = 0;
      touched_.push_back(node);
    }
    count_[node] += delta;
  }

  int64_t count(int32_t node) const {
    return stamp_[node] == gen_ ? count_[node] : 0;
  }

  std::vector<int32_t>& touched() { return touched_; }

 private:
  void grow(int32_t node) {
    if (node >= static_cast<int32_t>(stamp_.size())) {
      stamp_.resize(node + 1, 0);
      count_.resize(node + 1, 0);
    }
  }

  std::vector<uint32_t> stamp_;
  std::vector<int64_t> count_;
  std::vector<int32_t> touched_;
  uint32_t gen_ = 0;
};

// Counts per anchor, then propagates leaf-to-root through the relevant
// subtree only. Runs in O(k) plus the root paths of the k distinct anchors.
inline Embedding compute_vector_keys(std::span<const int64_t> keys,
                                     const MetricTree& t,
                                     EmbeddingWorkspace& ws) {
  ws.begin(t.node_count());
  for (int64_t key : keys) ws.add(t.anchor(key), 1);
  // close the touched set under parents so propagation never misses a hop
  auto& nodes = ws.touched();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    int32_t n = nodes[i];
    if (n != 0) ws.add(t.parent_of(n), 0);
  }
  std::sort(nodes.begin(), nodes.end(), [&](int32_t a, int32_t b) {
    return t.depth_of(a) > t.depth_of(b);
  });
  Embedding e;
  e.tree_version = t.version();
  e.entries.reserve(nodes.size());
  for (int32_t n : nodes) {
    if (n == 0) continue;
    int64_t cnt = ws.count(n);
    ws.add(t.parent_of(n), cnt);
    double value = static_cast<double>(cnt) * t.weight_of(n);
    if (value != 0.0) e.entries.push_back({n, value});
  }
  std::sort(e.entries.begin(), e.entries.end());
  return e;
}

inline std::vector<int64_t> anchor_keys(const Graph& g, const MetricTree& t) {
  std::vector<int64_t> keys;
  keys.reserve(g.labels.size());
  switch (t.kind()) {
    case TreeKind::labels:
      for (int32_t l : g.labels) keys.push_back(l);
      break;
    case TreeKind::degrees:
      for (int32_t d : g.degrees()) keys.push_back(d);
      break;
    case TreeKind::generic:
      throw Error("generic trees need explicit anchor keys");
  }
  return keys;
}

inline Embedding compute_vector(const Graph& g, const MetricTree& t,
                                EmbeddingWorkspace& ws) {
  auto keys = anchor_keys(g, t);
  return compute_vector_keys(keys, t, ws);
}

inline Embedding compute_vector(const Graph& g, const MetricTree& t) {
  thread_local EmbeddingWorkspace ws;
  return compute_vector(g, t, ws);
}

inline double l1_distance(const Embedding& a, const Embedding& b) {
  if (a.tree_version != b.tree_version)
    throw TreeMismatchError("embeddings come from different trees");
  double d = 0;
  std::size_t i = 0, j = 0;
  while (i < a.entries.size() && j < b.entries.size()) {
    auto [ka, va] = a.entries[i];
    auto [kb, vb] = b.entries[j];
    if (ka == kb) {
      d += std::abs(va - vb);
      ++i;
      ++j;
    } else if (ka < kb) {
      d += std::abs(va);
      ++i;
    } else {
      d += std::abs(vb);
      ++j;
    }
  }
  for (; i < a.entries.size(); ++i) d += std::abs(a.entries[i].second);
  for (; j < b.entries.size(); ++j) d += std::abs(b.entries[j].second);
  return d;
}

// Vectors from independent trees laid side by side; distances add up, which
// is exactly how summed cost functions compose.
struct CompositeEmbedding {
  std::vector<Embedding> parts;
};

inline CompositeEmbedding concat(std::vector<Embedding> parts) {
  return CompositeEmbedding{std::move(parts)};
}

inline double l1_distance(const CompositeEmbedding& a, const CompositeEmbedding& b) {
  if (a.parts.size() != b.parts.size())
    throw TreeMismatchError("composite embeddings have different part counts");
  double d = 0;
  for (std::size_t i = 0; i < a.parts.size(); ++i)
    d += l1_distance(a.parts[i], b.parts[i]);
  return d;
}

}  // namespace emba
