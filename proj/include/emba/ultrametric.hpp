#pragma once

// Non-uniform relabel costs are rarely tree metrics themselves, so we embed
// their subdominant ultrametric instead: the pointwise largest ultrametric
// below the cost table. Single linkage over the table produces exactly that;
// the dendrogram, with merge heights halved into node elevations, becomes a
// tree whose leaf-to-leaf distances realize it. The dummy sits above the
// dendrogram root so every label keeps deletion cost c_v.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "core.hpp"
#include "metric_tree.hpp"

namespace emba {
namespace detail {

struct SlinkMerge {
  double height;
  int32_t element;  // merges into the cluster of its pointer
  int32_t pointer;
};

// Sibson's pointer-representation pass, O(L^2) time, O(L) extra space.
inline std::vector<SlinkMerge> single_linkage(const LabelCostTable& t) {
  int32_t L = static_cast<int32_t>(t.size());
  std::vector<double> lambda(L, std::numeric_limits<double>::infinity());
  std::vector<int32_t> pi(L);
  std::vector<double> M(L);
  for (int32_t n = 0; n < L; ++n) {
    pi[n] = n;
    lambda[n] = std::numeric_limits<double>::infinity();
    for (int32_t i = 0; i < n; ++i) M[i] = t.cost[static_cast<std::size_t>(i) * L + n];
    for (int32_t i = 0; i < n; ++i) {
      if (lambda[i] >= M[i]) {
        M[pi[i]] = std::min(M[pi[i]], lambda[i]);
        lambda[i] = M[i];
        pi[i] = n;
      } else {
        M[pi[i]] = std::min(M[pi[i]], M[i]);
      }
    }
    for (int32_t i = 0; i < n; ++i)
      if (lambda[i] >= lambda[pi[i]]) pi[i] = n;
  }
  std::vector<SlinkMerge> merges;
  merges.reserve(L > 0 ? L - 1 : 0);
  for (int32_t i = 0; i < L - 1; ++i) merges.push_back({lambda[i], i, pi[i]});
  std::sort(merges.begin(), merges.end(), [](const SlinkMerge& a, const SlinkMerge& b) {
    if (a.height != b.height) return a.height < b.height;
    return a.element < b.element;  // ties: lowest label id first
  });
  return merges;
}

}  // namespace detail

// Dendrogram converted to a metric tree rooted at the dummy. A merge at
// single-linkage height h places the merged clusters under a node at
// elevation h/2, so two labels meeting there are 2 * h/2 = h apart. All
// leaves share the weighted depth u = (final merge height) / 2; the dummy
// attaches above the dendrogram root at weight c_v - u, which requires
// c_v >= u.
inline MetricTree build_ultrametric_tree(const LabelCostTable& table,
                                         const CostModel& c) {
  CostModel checked = c;
  checked.label_costs = table;
  validate_cost_model(checked);

  int32_t L = static_cast<int32_t>(table.size());
  auto merges = detail::single_linkage(table);

  // dendrogram scaffolding: leaves 0..L-1, internal nodes appended per merge
  struct DNode {
    double elevation;
    int32_t left = -1, right = -1;
  };
  std::vector<DNode> dn(L, DNode{0.0});
  std::vector<int32_t> cluster_root(L);
  std::vector<int32_t> uf(L);
  std::iota(cluster_root.begin(), cluster_root.end(), 0);
  std::iota(uf.begin(), uf.end(), 0);
  auto find = [&](int32_t x) {
    while (uf[x] != x) x = uf[x] = uf[uf[x]];
    return x;
  };
  int32_t top = L > 0 ? 0 : -1;
  for (const auto& mg : merges) {
    int32_t a = find(mg.element), b = find(mg.pointer);
    if (a == b) continue;
    int32_t node = static_cast<int32_t>(dn.size());
    dn.push_back({mg.height / 2.0, cluster_root[a], cluster_root[b]});
    uf[b] = a;
    cluster_root[a] = node;
    top = node;
  }
  if (L > 0) top = cluster_root[find(0)];

  double u = L > 0 ? dn[top].elevation : 0.0;
  if (u > c.vertex_indel + 1e-12)
    throw DeletionTooCheapError(
        "vertex insert/delete cost " + std::to_string(c.vertex_indel) +
        " is below the subdominant ultrametric radius " + std::to_string(u));

  MetricTree tree;
  int32_t root = tree.add_node(-1, 0.0);
  tree.set_anchor(MetricTree::kDummyKey, root);
  if (L > 0) {
    // parent-before-child; the dendrogram root hangs off the dummy at
    // weight c_v - u, every other edge spans the elevation difference
    struct Frame {
      int32_t dnode;
      int32_t parent;
      double parent_elev;
    };
    std::vector<Frame> frames{{top, root, c.vertex_indel}};
    while (!frames.empty()) {
      Frame f = frames.back();
      frames.pop_back();
      double w = f.parent_elev - dn[f.dnode].elevation;
      if (w < 0) w = 0;  // fp slack from halved heights
      int32_t node = tree.add_node(f.parent, w);
      if (f.dnode < L) {
        tree.set_anchor(table.labels[f.dnode], node);
      } else {
        frames.push_back({dn[f.dnode].right, node, dn[f.dnode].elevation});
        frames.push_back({dn[f.dnode].left, node, dn[f.dnode].elevation});
      }
    }
  }
  tree.set_kind(TreeKind::labels);
  return tree;
}

}  // namespace emba
