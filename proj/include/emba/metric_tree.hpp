#pragma once

// Weighted rooted trees realizing vertex-level cost functions. Elements
// (labels, degrees, the dummy) are anchored on tree nodes; the induced
// distance is the weighted path length between anchors. Zero edge weights
// are allowed, so the result is a pseudometric in general.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "core.hpp"

namespace emba {

enum class TreeKind : uint8_t { generic = 0, labels = 1, degrees = 2 };

class MetricTree {
 public:
  // anchor key for the dummy element; real keys are nonnegative
  static constexpr int64_t kDummyKey = -1;

  struct Node {
    int32_t parent;  // -1 for the root
    double weight;   // edge weight to parent, 0 for the root
    int32_t depth;
  };

  MetricTree() : version_(next_version()) {}

  int32_t add_node(int32_t parent, double weight) {
    if (nodes_.empty()) {
      nodes_.push_back({-1, 0.0, 0});
      return 0;
    }
    if (parent < 0 || parent >= static_cast<int32_t>(nodes_.size()))
      throw Error("metric tree parent out of range");
    if (weight < 0) throw Error("metric tree edge weights must be nonnegative");
    nodes_.push_back({parent, weight, nodes_[parent].depth + 1});
    return static_cast<int32_t>(nodes_.size() - 1);
  }

  void set_anchor(int64_t key, int32_t node) {
    if (node < 0 || node >= static_cast<int32_t>(nodes_.size()))
      throw Error("anchor node out of range");
    anchors_[key] = node;
  }

  // Degree trees are paths with node id == depth == degree; anchor lookups
  // beyond the built maximum continue the path logically with this weight,
  // so a query with a larger degree needs no tree rebuild.
  void enable_path_extension(double weight) {
    for (std::size_t i = 1; i < nodes_.size(); ++i)
      if (nodes_[i].parent != static_cast<int32_t>(i) - 1)
        throw Error("path extension requires a path-shaped tree");
    extension_weight_ = weight;
    extended_ = true;
  }

  bool extended() const { return extended_; }
  TreeKind kind() const { return kind_; }
  void set_kind(TreeKind k) { kind_ = k; }
  uint64_t version() const { return version_; }
  void set_version(uint64_t v) { version_ = v; }
  int32_t node_count() const { return static_cast<int32_t>(nodes_.size()); }
  const Node& node(int32_t i) const { return nodes_[i]; }
  const std::unordered_map<int64_t, int32_t>& anchors() const { return anchors_; }

  int32_t anchor(int64_t key) const {
    auto it = anchors_.find(key);
    if (it != anchors_.end()) return it->second;
    if (extended_ && key >= node_count())
      return static_cast<int32_t>(key);  // virtual path node
    throw UnanchoredVertexError("no anchor for key " + std::to_string(key));
  }

  int32_t parent_of(int32_t n) const {
    if (n >= node_count()) return n - 1;
    return nodes_[n].parent;
  }

  double weight_of(int32_t n) const {
    if (n >= node_count()) return extension_weight_;
    return nodes_[n].weight;
  }

  int32_t depth_of(int32_t n) const {
    if (n >= node_count()) return n;  // path trees have depth == id
    return nodes_[n].depth;
  }

  // weighted path length between the anchors of two keys
  double distance(int64_t key_a, int64_t key_b) const {
    int32_t a = anchor(key_a), b = anchor(key_b);
    double d = 0.0;
    while (depth_of(a) > depth_of(b)) {
      d += weight_of(a);
      a = parent_of(a);
    }
    while (depth_of(b) > depth_of(a)) {
      d += weight_of(b);
      b = parent_of(b);
    }
    while (a != b) {
      d += weight_of(a) + weight_of(b);
      a = parent_of(a);
      b = parent_of(b);
    }
    return d;
  }

 private:
  static uint64_t next_version() {
    static std::atomic<uint64_t> counter{1};
    return counter.fetch_add(1);
  }

  std::vector<Node> nodes_;
  std::unordered_map<int64_t, int32_t> anchors_;
  bool extended_ = false;
  double extension_weight_ = 0.0;
  TreeKind kind_ = TreeKind::generic;
  uint64_t version_ = 0;
};

// Star over the label alphabet: the dummy root, a hub below it at weight
// c_v - c_vl/2, and one leaf per label at weight c_vl/2. Realizes distance
// c_vl between distinct labels and c_v between any label and the dummy.
inline MetricTree build_label_tree(std::vector<int32_t> labels,
                                   const CostModel& c) {
  validate_cost_model(c);
  if (c.label_costs)
    throw CostModelError(
        "label tree covers uniform relabel costs; use build_ultrametric_tree "
        "for a label cost table");
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  MetricTree t;
  int32_t root = t.add_node(-1, 0.0);
  t.set_anchor(MetricTree::kDummyKey, root);
  if (!labels.empty()) {
    int32_t hub = t.add_node(root, c.vertex_indel - c.vertex_relabel / 2.0);
    for (int32_t l : labels) t.set_anchor(l, t.add_node(hub, c.vertex_relabel / 2.0));
  }
  t.set_kind(TreeKind::labels);
  return t;
}

// Path over degrees 0..max_degree with every edge weighing c_e/2; node id
// equals the degree it anchors. Degree 0 and the dummy share the root.
inline MetricTree build_degree_tree(int32_t max_degree, const CostModel& c) {
  validate_cost_model(c);
  if (max_degree < 0) throw Error("negative maximum degree");
  MetricTree t;
  int32_t root = t.add_node(-1, 0.0);
  t.set_anchor(MetricTree::kDummyKey, root);
  t.set_anchor(0, root);
  for (int32_t d = 1; d <= max_degree; ++d)
    t.set_anchor(d, t.add_node(d - 1, c.edge_indel / 2.0));
  t.enable_path_extension(c.edge_indel / 2.0);
  t.set_kind(TreeKind::degrees);
  return t;
}

inline double tree_distance(const MetricTree& t, int64_t key_a, int64_t key_b) {
  return t.distance(key_a, key_b);
}

}  // namespace emba
