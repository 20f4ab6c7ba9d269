#pragma once

// Core types shared by every other header: graphs, edit cost models and the
// error hierarchy. Everything lives in namespace emba and is header-only.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace emba {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input files. line is 1-based, 0 when the position is unknown.
struct ParseError : Error {
  ParseError(const std::string& msg, std::size_t line_no = 0)
      : Error(line_no ? msg + " (line " + std::to_string(line_no) + ")" : msg),
        line(line_no) {}
  std::size_t line;
};

struct IoError : Error {
  using Error::Error;
};

// Cost model rejected; the two named conditions get their own types so
// callers can tell them apart.
struct CostModelError : Error {
  using Error::Error;
};
struct RelabelTooExpensiveError : CostModelError {
  using CostModelError::CostModelError;
};
struct DeletionTooCheapError : CostModelError {
  using CostModelError::CostModelError;
};

struct UnanchoredVertexError : Error {
  using Error::Error;
};
struct TreeMismatchError : Error {
  using Error::Error;
};
struct SizeCapError : Error {
  using Error::Error;
};

// Undirected labeled graph. Vertices are 0..n-1, labels are interned ids
// (see Dataset for the symbol table). Edges are stored once, u < v, sorted.
// edge_labels is either empty (unlabeled dataset) or parallel to edges.
struct Graph {
  int64_t id = 0;
  std::vector<int32_t> labels;
  std::vector<std::pair<int32_t, int32_t>> edges;
  std::vector<int32_t> edge_labels;

  int n() const { return static_cast<int>(labels.size()); }
  int m() const { return static_cast<int>(edges.size()); }

  int add_vertex(int32_t label) {
    labels.push_back(label);
    return n() - 1;
  }

  void add_edge(int32_t u, int32_t v, int32_t label = -1) {
    if (u == v) throw Error("self-loop rejected on vertex " + std::to_string(u));
    if (u < 0 || v < 0 || u >= n() || v >= n())
      throw Error("edge endpoint out of range");
    if (u > v) std::swap(u, v);
    auto it = std::lower_bound(edges.begin(), edges.end(), std::make_pair(u, v));
    if (it != edges.end() && *it == std::make_pair(u, v))
      throw Error("duplicate edge (" + std::to_string(u) + "," + std::to_string(v) + ")");
    auto pos = it - edges.begin();
    edges.insert(it, {u, v});
    if (label >= 0 || !edge_labels.empty()) {
      if (edge_labels.size() + 1 < edges.size())
        edge_labels.resize(edges.size() - 1, -1);
      edge_labels.insert(edge_labels.begin() + pos, label);
    }
  }

  bool has_edge(int32_t u, int32_t v) const {
    if (u > v) std::swap(u, v);
    return std::binary_search(edges.begin(), edges.end(), std::make_pair(u, v));
  }

  // -1 when the edge is unlabeled or absent.
  int32_t edge_label(int32_t u, int32_t v) const {
    if (u > v) std::swap(u, v);
    auto it = std::lower_bound(edges.begin(), edges.end(), std::make_pair(u, v));
    if (it == edges.end() || *it != std::make_pair(u, v)) return -1;
    auto pos = static_cast<std::size_t>(it - edges.begin());
    return pos < edge_labels.size() ? edge_labels[pos] : -1;
  }

  std::vector<int32_t> degrees() const {
    std::vector<int32_t> deg(labels.size(), 0);
    for (auto [u, v] : edges) {
      ++deg[u];
      ++deg[v];
    }
    return deg;
  }

  int32_t max_degree() const {
    auto deg = degrees();
    return deg.empty() ? 0 : *std::max_element(deg.begin(), deg.end());
  }

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.id == b.id && a.labels == b.labels && a.edges == b.edges &&
           a.edge_labels == b.edge_labels;
  }
};

// Vertex degree multiset of one graph, kept sorted ascending.
struct DegreeProfile {
  std::vector<int32_t> degrees;
  int32_t max_degree = 0;
};

inline DegreeProfile degree_profile(const Graph& g) {
  DegreeProfile p;
  p.degrees = g.degrees();
  std::sort(p.degrees.begin(), p.degrees.end());
  p.max_degree = p.degrees.empty() ? 0 : p.degrees.back();
  // handshake: degree sum is twice the edge count
  return p;
}

template <class GraphRange>
int32_t dataset_max_degree(const GraphRange& graphs) {
  int32_t d = 0;
  for (const auto& g : graphs) d = std::max(d, g.max_degree());
  return d;
}

// Symmetric per-label-pair relabel costs, zero diagonal. labels holds the
// interned ids covered by the table; cost is dense row-major over them.
struct LabelCostTable {
  std::vector<int32_t> labels;
  std::vector<double> cost;

  std::size_t size() const { return labels.size(); }

  int index_of(int32_t label) const {
    auto it = std::lower_bound(labels.begin(), labels.end(), label);
    if (it == labels.end() || *it != label) return -1;
    return static_cast<int>(it - labels.begin());
  }

  double at(int32_t l1, int32_t l2) const {
    int i = index_of(l1), j = index_of(l2);
    if (i < 0 || j < 0)
      throw UnanchoredVertexError("label id " + std::to_string(i < 0 ? l1 : l2) +
                                  " not covered by the label cost table");
    return cost[static_cast<std::size_t>(i) * labels.size() + j];
  }
};

// Edit operation costs. The scalar vertex_relabel is ignored when a
// label_costs table is present; the table then supplies all relabel costs.
struct CostModel {
  double vertex_indel = 1.0;
  double edge_indel = 1.0;
  double vertex_relabel = 1.0;
  double edge_relabel = 1.0;
  std::optional<LabelCostTable> label_costs;

  bool uniform() const { return !label_costs.has_value(); }

  double vertex_relabel_cost(int32_t l1, int32_t l2) const {
    if (l1 == l2) return 0.0;
    if (label_costs) return label_costs->at(l1, l2);
    return vertex_relabel;
  }
};

// Accepts iff all costs are nonnegative and, for uniform relabel costs,
// relabeling is never cheaper than a delete-insert pair would allow
// (vertex_relabel <= 2 * vertex_indel). With a table the corresponding check
// happens later, against the subdominant ultrametric in build_ultrametric_tree.
inline const CostModel& validate_cost_model(const CostModel& c) {
  if (c.vertex_indel < 0 || c.edge_indel < 0 || c.vertex_relabel < 0 ||
      c.edge_relabel < 0)
    throw CostModelError("edit costs must be nonnegative");
  if (c.label_costs) {
    const auto& t = *c.label_costs;
    std::size_t L = t.labels.size();
    if (t.cost.size() != L * L)
      throw CostModelError("label cost table is not square");
    if (!std::is_sorted(t.labels.begin(), t.labels.end()) ||
        std::adjacent_find(t.labels.begin(), t.labels.end()) != t.labels.end())
      throw CostModelError("label cost table ids must be sorted and unique");
    for (std::size_t i = 0; i < L; ++i) {
      if (t.cost[i * L + i] != 0.0)
        throw CostModelError("label cost table diagonal must be zero");
      for (std::size_t j = 0; j < L; ++j) {
        double v = t.cost[i * L + j];
        if (v < 0) throw CostModelError("label cost table entries must be nonnegative");
        if (v != t.cost[j * L + i])
          throw CostModelError("label cost table must be symmetric");
      }
    }
  } else if (c.vertex_relabel > 2.0 * c.vertex_indel) {
    throw RelabelTooExpensiveError(
        "vertex relabel cost exceeds twice the vertex insert/delete cost; "
        "the label distance is not a tree metric");
  }
  return c;
}

}  // namespace emba
