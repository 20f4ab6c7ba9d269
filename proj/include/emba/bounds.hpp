#pragma once

// Lower and upper bounds on graph edit distance. The tree-metric bounds
// (llb over labels, dlb over degrees, their sum clb) come from l1 distances
// between embeddings; branch_lb solves the full assignment over combined
// label and half-degree costs, and branch_ub prices the edit path that the
// branch matching induces. Under uniform costs they line up as
// slf <= clb <= branch_lb <= exact <= branch_ub.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "assignment.hpp"
#include "core.hpp"
#include "embedding.hpp"
#include "metric_tree.hpp"
#include "ultrametric.hpp"

namespace emba {

// Label mismatch count plus edge count difference; assumes unit costs.
// Every vertex beyond the best same-label pairing needs at least one unit
// operation, as does every edge of the size difference.
inline double slf(const Graph& g, const Graph& h) {
  std::map<int32_t, int64_t> counts;
  for (int32_t l : g.labels) ++counts[l];
  int64_t common = 0;
  for (int32_t l : h.labels) {
    auto it = counts.find(l);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  int64_t vertex_part = std::max<int64_t>(g.n(), h.n()) - common;
  int64_t edge_part = std::abs(static_cast<int64_t>(g.m()) - h.m());
  return static_cast<double>(vertex_part + edge_part);
}

// Shared trees for one cost model and one pair's (or dataset's) alphabet.
struct PairContext {
  CostModel cost;
  MetricTree label_tree;
  MetricTree degree_tree;

  static PairContext make(const Graph& g, const Graph& h, const CostModel& c) {
    PairContext ctx;
    ctx.cost = c;
    if (c.label_costs) {
      ctx.label_tree = build_ultrametric_tree(*c.label_costs, c);
    } else {
      std::vector<int32_t> labels(g.labels);
      labels.insert(labels.end(), h.labels.begin(), h.labels.end());
      ctx.label_tree = build_label_tree(std::move(labels), c);
    }
    ctx.degree_tree = build_degree_tree(std::max(g.max_degree(), h.max_degree()), c);
    return ctx;
  }
};

inline double llb(const Embedding& a, const Embedding& b) { return l1_distance(a, b); }
inline double dlb(const Embedding& a, const Embedding& b) { return l1_distance(a, b); }

inline double llb(const Graph& g, const Graph& h, const MetricTree& label_tree) {
  thread_local EmbeddingWorkspace ws;
  return l1_distance(compute_vector(g, label_tree, ws),
                     compute_vector(h, label_tree, ws));
}

inline double dlb(const Graph& g, const Graph& h, const MetricTree& degree_tree) {
  thread_local EmbeddingWorkspace ws;
  return l1_distance(compute_vector(g, degree_tree, ws),
                     compute_vector(h, degree_tree, ws));
}

inline double llb(const Graph& g, const Graph& h, const CostModel& c) {
  auto ctx = PairContext::make(g, h, c);
  return llb(g, h, ctx.label_tree);
}

inline double dlb(const Graph& g, const Graph& h, const CostModel& c) {
  auto ctx = PairContext::make(g, h, c);
  return dlb(g, h, ctx.degree_tree);
}

inline double clb(const Graph& g, const Graph& h, const PairContext& ctx) {
  return llb(g, h, ctx.label_tree) + dlb(g, h, ctx.degree_tree);
}

inline double clb(const Graph& g, const Graph& h, const CostModel& c) {
  return clb(g, h, PairContext::make(g, h, c));
}

// Combined vertex cost for the branch assignment: label relabel cost plus
// half the degree difference priced at edge operations. Not a tree metric,
// so this one really pays for the cubic solver.
inline std::vector<std::vector<double>> branch_instance(const Graph& g,
                                                        const Graph& h,
                                                        const CostModel& c) {
  auto dg = g.degrees();
  auto dh = h.degrees();
  return padded_instance(g.n(), h.n(), [&](int32_t u, int32_t v) {
    double du = u >= 0 ? dg[u] : 0.0;
    double dv = v >= 0 ? dh[v] : 0.0;
    double label_cost;
    if (u < 0 && v < 0)
      label_cost = 0.0;
    else if (u < 0 || v < 0)
      label_cost = c.vertex_indel;
    else
      label_cost = c.vertex_relabel_cost(g.labels[u], h.labels[v]);
    return label_cost + 0.5 * c.edge_indel * std::abs(du - dv);
  });
}

inline AssignmentResult branch_assignment(const Graph& g, const Graph& h,
                                          const CostModel& c) {
  return solve_hungarian(branch_instance(g, h, c));
}

inline double branch_lb(const Graph& g, const Graph& h, const CostModel& c) {
  return branch_assignment(g, h, c).cost;
}

// Vertex map induced by a padded matching: h-index per g-vertex, -1 for
// deleted; h-vertices without a preimage are insertions.
inline std::vector<int32_t> matching_to_map(const AssignmentResult& a, int n, int m) {
  std::vector<int32_t> map(n, -1);
  for (int u = 0; u < n; ++u)
    if (a.matching[u] < m) map[u] = a.matching[u];
  return map;
}

// Cost of the full edit path realized from a vertex map.
inline double realize_edit_cost(const Graph& g, const Graph& h,
                                const std::vector<int32_t>& map,
                                const CostModel& c) {
  std::vector<int32_t> preimage(h.n(), -1);
  double cost = 0.0;
  for (int u = 0; u < g.n(); ++u) {
    if (map[u] < 0) {
      cost += c.vertex_indel;
    } else {
      preimage[map[u]] = u;
      cost += c.vertex_relabel_cost(g.labels[u], h.labels[map[u]]);
    }
  }
  for (int v = 0; v < h.n(); ++v)
    if (preimage[v] < 0) cost += c.vertex_indel;
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    auto [u1, u2] = g.edges[e];
    int32_t v1 = map[u1], v2 = map[u2];
    if (v1 >= 0 && v2 >= 0 && h.has_edge(v1, v2)) {
      int32_t gl = e < g.edge_labels.size() ? g.edge_labels[e] : -1;
      if (gl != h.edge_label(v1, v2)) cost += c.edge_relabel;
    } else {
      cost += c.edge_indel;
    }
  }
  for (auto [v1, v2] : h.edges) {
    int32_t u1 = preimage[v1], u2 = preimage[v2];
    if (u1 < 0 || u2 < 0 || !g.has_edge(u1, u2)) cost += c.edge_indel;
  }
  return cost;
}

inline double branch_ub(const Graph& g, const Graph& h, const CostModel& c) {
  auto a = branch_assignment(g, h, c);
  return realize_edit_cost(g, h, matching_to_map(a, g.n(), h.n()), c);
}

struct BoundReport {
  std::optional<double> slf;  // unit costs only
  double llb = 0.0;
  double dlb = 0.0;
  double clb = 0.0;
  double branch_lb = 0.0;
  std::optional<double> branch_ub;
  std::optional<double> exact;
};

struct BoundOptions {
  bool with_branch_ub = true;
};

inline BoundReport compute_bounds(const Graph& g, const Graph& h,
                                  const CostModel& c,
                                  const BoundOptions& opts = {}) {
  BoundReport r;
  if (c.uniform() && c.vertex_indel == 1.0 && c.edge_indel == 1.0 &&
      c.vertex_relabel == 1.0)
    r.slf = slf(g, h);
  auto ctx = PairContext::make(g, h, c);
  r.llb = llb(g, h, ctx.label_tree);
  r.dlb = dlb(g, h, ctx.degree_tree);
  r.clb = r.llb + r.dlb;
  auto a = branch_assignment(g, h, c);
  r.branch_lb = a.cost;
  if (opts.with_branch_ub)
    r.branch_ub = realize_edit_cost(g, h, matching_to_map(a, g.n(), h.n()), c);
  return r;
}

}  // namespace emba
