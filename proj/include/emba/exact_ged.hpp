#pragma once

// Exact graph edit distance by depth-first branch and bound over vertex
// maps. Vertices of g are assigned to vertices of h or deleted; every edge
// between two decided endpoints is priced immediately, so partial costs only
// grow and pruning against an incumbent or a caller threshold is safe. Open
// branches are additionally cut with the tree-metric bounds of the
// still-unmapped remainders. A cost-limited brute-force variant without any
// of that machinery serves as the independent oracle.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <vector>

#include "bounds.hpp"
#include "core.hpp"

namespace emba {

inline constexpr double kCostEps = 1e-9;

struct EditOp {
  enum Kind : uint8_t {
    vertex_delete,
    vertex_insert,
    vertex_relabel,
    edge_delete,
    edge_insert,
    edge_relabel
  };
  Kind kind;
  int32_t u = -1;      // vertex handle, or first edge endpoint
  int32_t v = -1;      // second edge endpoint
  int32_t label = -1;  // new label for inserts and relabels
  double cost = 0.0;
};

struct EditPath {
  std::vector<EditOp> ops;
  double total = 0.0;
};

struct ExactGedResult {
  bool exceeded = false;
  double distance = 0.0;
  EditPath path;
  std::vector<int32_t> map;  // g vertex -> h vertex, -1 for deleted
};

// Edit path induced by a vertex map, in apply order: edge deletions, vertex
// deletions, relabels, vertex insertions, edge insertions, edge relabels.
// Inserted vertices get fresh handles n(g), n(g)+1, ...
inline EditPath edit_path_from_map(const Graph& g, const Graph& h,
                                   const std::vector<int32_t>& map,
                                   const CostModel& c) {
  EditPath p;
  std::vector<int32_t> preimage(h.n(), -1);
  for (int u = 0; u < g.n(); ++u)
    if (map[u] >= 0) preimage[map[u]] = u;
  std::vector<int32_t> handle(h.n(), -1);
  int32_t next = g.n();
  for (int v = 0; v < h.n(); ++v)
    handle[v] = preimage[v] >= 0 ? preimage[v] : next++;

  auto push = [&](EditOp op) {
    p.ops.push_back(op);
    p.total += op.cost;
  };
  auto preserved = [&](std::size_t e) {
    auto [u1, u2] = g.edges[e];
    return map[u1] >= 0 && map[u2] >= 0 && h.has_edge(map[u1], map[u2]);
  };
  for (std::size_t e = 0; e < g.edges.size(); ++e)
    if (!preserved(e))
      push({EditOp::edge_delete, g.edges[e].first, g.edges[e].second, -1,
            c.edge_indel});
  for (int u = 0; u < g.n(); ++u)
    if (map[u] < 0) push({EditOp::vertex_delete, u, -1, -1, c.vertex_indel});
  for (int u = 0; u < g.n(); ++u)
    if (map[u] >= 0 && g.labels[u] != h.labels[map[u]])
      push({EditOp::vertex_relabel, u, -1, h.labels[map[u]],
            c.vertex_relabel_cost(g.labels[u], h.labels[map[u]])});
  for (int v = 0; v < h.n(); ++v)
    if (preimage[v] < 0)
      push({EditOp::vertex_insert, handle[v], -1, h.labels[v], c.vertex_indel});
  for (std::size_t e = 0; e < h.edges.size(); ++e) {
    auto [v1, v2] = h.edges[e];
    int32_t u1 = preimage[v1], u2 = preimage[v2];
    int32_t lab = e < h.edge_labels.size() ? h.edge_labels[e] : -1;
    if (u1 < 0 || u2 < 0 || !g.has_edge(u1, u2))
      push({EditOp::edge_insert, handle[v1], handle[v2], lab, c.edge_indel});
  }
  for (std::size_t e = 0; e < g.edges.size(); ++e)
    if (preserved(e)) {
      auto [u1, u2] = g.edges[e];
      int32_t gl = e < g.edge_labels.size() ? g.edge_labels[e] : -1;
      int32_t hl = h.edge_label(map[u1], map[u2]);
      if (gl != hl) push({EditOp::edge_relabel, u1, u2, hl, c.edge_relabel});
    }
  return p;
}

// Replays a path on g. Vertex handles stay stable while ops run; the result
// is compacted to 0..n-1 in ascending handle order.
inline Graph apply_edit_path(const Graph& g, const EditPath& p) {
  std::map<int32_t, int32_t> labels;
  std::map<std::pair<int32_t, int32_t>, int32_t> edges;
  for (int u = 0; u < g.n(); ++u) labels[u] = g.labels[u];
  for (std::size_t e = 0; e < g.edges.size(); ++e)
    edges[g.edges[e]] = e < g.edge_labels.size() ? g.edge_labels[e] : -1;
  auto ek = [](int32_t a, int32_t b) {
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
  };
  for (const auto& op : p.ops) {
    switch (op.kind) {
      case EditOp::edge_delete:
        if (!edges.erase(ek(op.u, op.v))) throw Error("deleting a missing edge");
        break;
      case EditOp::vertex_delete: {
        for (const auto& [key, lab] : edges)
          if (key.first == op.u || key.second == op.u)
            throw Error("deleting a vertex with incident edges");
        if (!labels.erase(op.u)) throw Error("deleting a missing vertex");
        break;
      }
      case EditOp::vertex_relabel:
        labels.at(op.u) = op.label;
        break;
      case EditOp::vertex_insert:
        if (labels.count(op.u)) throw Error("inserting an existing vertex");
        labels[op.u] = op.label;
        break;
      case EditOp::edge_insert:
        if (!labels.count(op.u) || !labels.count(op.v))
          throw Error("edge insertion on missing vertex");
        if (edges.count(ek(op.u, op.v))) throw Error("inserting an existing edge");
        edges[ek(op.u, op.v)] = op.label;
        break;
      case EditOp::edge_relabel:
        edges.at(ek(op.u, op.v)) = op.label;
        break;
    }
  }
  Graph out;
  std::map<int32_t, int32_t> compact;
  for (const auto& [handle, lab] : labels) {
    compact[handle] = out.n();
    out.add_vertex(lab);
  }
  bool any_label = false;
  for (const auto& [key, lab] : edges) any_label |= lab >= 0;
  for (const auto& [key, lab] : edges)
    out.add_edge(compact.at(key.first), compact.at(key.second),
                 any_label ? lab : -1);
  return out;
}

namespace detail {

// Edge cost of deciding `u -> v` (v may be -1) after the vertices listed in
// `decided` were fixed. Every g-edge and h-edge between two decided
// endpoints is priced exactly once, when its second endpoint falls.
inline double settle_edges(const Graph& g, const Graph& h,
                           const std::vector<int32_t>& map,
                           const std::vector<int32_t>& decided, int32_t u,
                           int32_t v, const CostModel& c) {
  double cost = 0.0;
  for (int32_t w : decided) {
    bool ge = g.has_edge(u, w);
    if (v >= 0 && map[w] >= 0) {
      bool he = h.has_edge(v, map[w]);
      if (ge && he) {
        if (g.edge_label(u, w) != h.edge_label(v, map[w])) cost += c.edge_relabel;
      } else if (ge != he) {
        cost += c.edge_indel;
      }
    } else if (ge) {
      cost += c.edge_indel;
    }
  }
  return cost;
}

struct SearchState {
  const Graph* g;
  const Graph* h;
  const CostModel* cost;
  std::vector<int32_t> order;    // g vertices, most constrained first
  std::vector<int32_t> map;      // by g vertex id
  std::vector<char> used;        // by h vertex id
  std::vector<int32_t> decided;  // g vertices already fixed, in visit order
  std::vector<int32_t> deg_g, deg_h;
  const MetricTree* label_tree = nullptr;
  const MetricTree* degree_tree = nullptr;
  EmbeddingWorkspace ws;
  std::vector<int64_t> key_buf_g, key_buf_h;
  double limit = std::numeric_limits<double>::infinity();
  double best = std::numeric_limits<double>::infinity();
  std::vector<int32_t> best_map;

  // assignment-style bound on finishing the open remainder: label part plus
  // half-degree part, both as l1 distances over the shared trees
  double remainder_bound(std::size_t depth) {
    if (!degree_tree) return 0.0;
    double bound = 0.0;
    key_buf_g.clear();
    key_buf_h.clear();
    for (std::size_t i = depth; i < order.size(); ++i)
      key_buf_g.push_back(deg_g[order[i]]);
    for (int32_t v = 0; v < h->n(); ++v)
      if (!used[v]) key_buf_h.push_back(deg_h[v]);
    bound += solve_tree_metric(key_buf_g, key_buf_h, *degree_tree, ws);
    if (label_tree) {
      key_buf_g.clear();
      key_buf_h.clear();
      for (std::size_t i = depth; i < order.size(); ++i)
        key_buf_g.push_back(g->labels[order[i]]);
      for (int32_t v = 0; v < h->n(); ++v)
        if (!used[v]) key_buf_h.push_back(h->labels[v]);
      bound += solve_tree_metric(key_buf_g, key_buf_h, *label_tree, ws);
    }
    return bound;
  }

  double leaf_completion() const {
    double cost = 0.0;
    for (int32_t v = 0; v < h->n(); ++v)
      if (!used[v]) cost += this->cost->vertex_indel;
    for (auto [v1, v2] : h->edges)
      if (!used[v1] || !used[v2]) cost += this->cost->edge_indel;
    return cost;
  }

  void dfs(std::size_t depth, double cost_so_far) {
    if (cost_so_far + remainder_bound(depth) >= std::min(best, limit + kCostEps))
      return;
    if (depth == order.size()) {
      double total = cost_so_far + leaf_completion();
      if (total < best) {
        best = total;
        best_map = map;
      }
      return;
    }
    int32_t u = order[depth];
    struct Cand {
      double delta;
      int32_t v;  // -1 for deletion
    };
    std::vector<Cand> cands;
    cands.reserve(h->n() + 1);
    for (int32_t v = 0; v < h->n(); ++v) {
      if (used[v]) continue;
      double delta = cost->vertex_relabel_cost(g->labels[u], h->labels[v]) +
                     settle_edges(*g, *h, map, decided, u, v, *cost);
      cands.push_back({delta, v});
    }
    cands.push_back({cost->vertex_indel +
                         settle_edges(*g, *h, map, decided, u, -1, *cost),
                     -1});
    std::stable_sort(cands.begin(), cands.end(),
                     [](const Cand& a, const Cand& b) { return a.delta < b.delta; });
    for (const auto& cand : cands) {
      map[u] = cand.v;
      if (cand.v >= 0) used[cand.v] = 1;
      decided.push_back(u);
      dfs(depth + 1, cost_so_far + cand.delta);
      decided.pop_back();
      if (cand.v >= 0) used[cand.v] = 0;
      map[u] = -1;
    }
  }
};

inline std::vector<int32_t> search_order(const Graph& g) {
  auto deg = g.degrees();
  std::map<int32_t, int32_t> freq;
  for (int32_t l : g.labels) ++freq[l];
  std::vector<int32_t> order(g.n());
  for (int i = 0; i < g.n(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int32_t a, int32_t b) {
    if (deg[a] != deg[b]) return deg[a] > deg[b];
    if (freq[g.labels[a]] != freq[g.labels[b]])
      return freq[g.labels[a]] < freq[g.labels[b]];
    return a < b;
  });
  return order;
}

}  // namespace detail

struct ExactGedOptions {
  std::optional<double> threshold;
  int combined_size_cap = 40;  // enforced only without a threshold
};

inline ExactGedResult exact_ged(const Graph& g, const Graph& h,
                                const CostModel& c,
                                const ExactGedOptions& opts = {}) {
  if (!opts.threshold && g.n() + h.n() > opts.combined_size_cap)
    throw SizeCapError("combined size " + std::to_string(g.n() + h.n()) +
                       " exceeds the cap of " +
                       std::to_string(opts.combined_size_cap) +
                       "; pass a threshold to search anyway");
  detail::SearchState st;
  st.g = &g;
  st.h = &h;
  st.cost = &c;
  st.order = detail::search_order(g);
  st.map.assign(g.n(), -1);
  st.used.assign(h.n(), 0);
  st.deg_g = g.degrees();
  st.deg_h = h.degrees();
  if (opts.threshold) st.limit = *opts.threshold;

  MetricTree degree_tree =
      build_degree_tree(std::max(g.max_degree(), h.max_degree()), c);
  st.degree_tree = &degree_tree;
  MetricTree label_tree;
  bool have_label_tree = true;
  try {
    if (c.label_costs)
      label_tree = build_ultrametric_tree(*c.label_costs, c);
    else {
      std::vector<int32_t> labels(g.labels);
      labels.insert(labels.end(), h.labels.begin(), h.labels.end());
      label_tree = build_label_tree(std::move(labels), c);
    }
  } catch (const CostModelError&) {
    have_label_tree = false;  // label costs not embeddable; degree bound only
  }
  if (have_label_tree) st.label_tree = &label_tree;

  // seed the incumbent with the realized branch matching so deep branches
  // die early; it is a valid witness if nothing better turns up
  auto seed = branch_assignment(g, h, c);
  auto seed_map = matching_to_map(seed, g.n(), h.n());
  st.best = realize_edit_cost(g, h, seed_map, c);
  st.best_map = seed_map;

  st.dfs(0, 0.0);

  ExactGedResult r;
  if (st.best > st.limit + kCostEps) {
    r.exceeded = true;
    r.distance = std::numeric_limits<double>::infinity();
    return r;
  }
  r.distance = st.best;
  r.map = st.best_map;
  r.path = edit_path_from_map(g, h, r.map, c);
  return r;
}

// Independent oracle: exhaustive DFS over all vertex maps with incremental
// cost only. No embeddings, no assignment bounds; prunes solely against the
// incumbent and the caller's cost limit (partial costs never decrease).
// Returns infinity when every map costs more than `limit`.
inline double brute_force_ged(const Graph& g, const Graph& h, const CostModel& c,
                              double limit = std::numeric_limits<double>::infinity(),
                              int size_cap = 12) {
  if (g.n() > size_cap || h.n() > size_cap)
    throw SizeCapError("brute force is capped at " + std::to_string(size_cap) +
                       " vertices per graph");
  std::vector<int32_t> map(g.n(), -1);
  std::vector<char> used(h.n(), 0);
  std::vector<int32_t> decided;
  double best = std::numeric_limits<double>::infinity();

  auto leaf = [&]() {
    double cost = 0.0;
    for (int32_t v = 0; v < h.n(); ++v)
      if (!used[v]) cost += c.vertex_indel;
    for (auto [v1, v2] : h.edges)
      if (!used[v1] || !used[v2]) cost += c.edge_indel;
    return cost;
  };
  auto dfs = [&](auto&& self, int32_t u, double cost) -> void {
    if (cost >= best || cost > limit + kCostEps) return;
    if (u == g.n()) {
      best = std::min(best, cost + leaf());
      return;
    }
    struct Cand {
      double delta;
      int32_t v;
    };
    std::vector<Cand> cands;
    for (int32_t v = 0; v < h.n(); ++v) {
      if (used[v]) continue;
      cands.push_back({c.vertex_relabel_cost(g.labels[u], h.labels[v]) +
                           detail::settle_edges(g, h, map, decided, u, v, c),
                       v});
    }
    cands.push_back(
        {c.vertex_indel + detail::settle_edges(g, h, map, decided, u, -1, c), -1});
    std::stable_sort(cands.begin(), cands.end(),
                     [](const Cand& a, const Cand& b) { return a.delta < b.delta; });
    for (const auto& cand : cands) {
      map[u] = cand.v;
      if (cand.v >= 0) used[cand.v] = 1;
      decided.push_back(u);
      self(self, u + 1, cost + cand.delta);
      decided.pop_back();
      if (cand.v >= 0) used[cand.v] = 0;
      map[u] = -1;
    }
  };
  dfs(dfs, 0, 0.0);
  return best > limit + kCostEps ? std::numeric_limits<double>::infinity() : best;
}

}  // namespace emba
