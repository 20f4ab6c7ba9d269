#pragma once

// Cover tree over an arbitrary metric, used here for l1 embeddings. Every
// point owns exactly one node; children sit one level below their parent,
// within the parent's covering radius base^level, and siblings keep at
// least the child-level scale between them. Queries prune whole subtrees
// with the geometric bound on descendant distance, so range search and the
// lazy best-first ranking are exact for any metric.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <vector>

#include "core.hpp"

namespace emba {

template <class Point, class Metric>
class CoverTree {
 public:
  struct Node {
    int32_t point;
    int32_t level;
    std::vector<int32_t> children;
  };

  CoverTree(std::span<const Point> points, Metric metric, double base = 2.0)
      : points_(points), metric_(std::move(metric)), base_(base) {
    // the re-rooting step moves a leaf one level above the old root, which
    // stays covering only while base/(base-1) <= base
    if (base_ < 2.0) throw Error("cover tree base must be at least 2");
    for (std::size_t i = 0; i < points_.size(); ++i)
      insert(static_cast<int32_t>(i));
  }

  int32_t size() const { return static_cast<int32_t>(nodes_.size()); }
  const std::vector<Node>& nodes() const { return nodes_; }
  int32_t root() const { return root_; }

  // ids with d(q, p) <= radius, ascending
  std::vector<int32_t> range(const Point& q, double radius) const {
    std::vector<int32_t> out;
    if (root_ < 0) return out;
    std::vector<int32_t> stack{root_};
    while (!stack.empty()) {
      int32_t ni = stack.back();
      stack.pop_back();
      const Node& nd = nodes_[ni];
      double d = metric_(q, points_[nd.point]);
      if (d <= radius) out.push_back(nd.point);
      for (int32_t ci : nd.children) {
        double dc = metric_(q, points_[nodes_[ci].point]);
        if (dc - subtree_bound(nodes_[ci].level) <= radius) stack.push_back(ci);
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  // Lazy stream of (point id, distance) in ascending distance order, ties by
  // ascending id. Node entries carry an optimistic bound; a point surfaces
  // only once no unexplored subtree could still beat it.
  class RankStream {
   public:
    RankStream(const CoverTree* tree, Point query)
        : tree_(tree), q_(std::move(query)) {
      if (tree_->root_ >= 0) push_node(tree_->root_);
    }

    std::optional<std::pair<int32_t, double>> next() {
      while (!pq_.empty()) {
        Entry e = pq_.top();
        pq_.pop();
        if (e.is_point) return std::make_pair(e.id, e.key);
        const Node& nd = tree_->nodes_[e.id];
        pq_.push({e.point_dist, true, nd.point, 0.0});
        for (int32_t ci : nd.children) push_node(ci);
      }
      return std::nullopt;
    }

   private:
    struct Entry {
      double key;
      bool is_point;
      int32_t id;          // point id or node index
      double point_dist;   // nodes: exact distance to the node's own point
    };
    struct Order {
      bool operator()(const Entry& a, const Entry& b) const {
        if (a.key != b.key) return a.key > b.key;
        if (a.is_point != b.is_point) return a.is_point;  // nodes first
        return a.id > b.id;
      }
    };

    void push_node(int32_t ni) {
      const Node& nd = tree_->nodes_[ni];
      double d = tree_->metric_(q_, tree_->points_[nd.point]);
      double key = std::max(0.0, d - tree_->subtree_bound(nd.level));
      pq_.push({key, false, ni, d});
    }

    const CoverTree* tree_;
    Point q_;
    std::priority_queue<Entry, std::vector<Entry>, Order> pq_;
  };

  RankStream rank(Point query) const { return RankStream(this, std::move(query)); }

  // covering and separation at every node
  bool check_invariants() const {
    for (std::size_t ni = 0; ni < nodes_.size(); ++ni) {
      const Node& nd = nodes_[ni];
      for (int32_t ci : nd.children) {
        if (nodes_[ci].level != nd.level - 1) return false;
        if (metric_(points_[nd.point], points_[nodes_[ci].point]) >
            covdist(nd.level) + 1e-12)
          return false;
      }
      for (std::size_t a = 0; a < nd.children.size(); ++a)
        for (std::size_t b = a + 1; b < nd.children.size(); ++b) {
          double sep = metric_(points_[nodes_[nd.children[a]].point],
                               points_[nodes_[nd.children[b]].point]);
          if (sep <= covdist(nd.level - 1) - 1e-12) return false;
        }
    }
    return true;
  }

 private:
  double covdist(int32_t level) const { return std::pow(base_, level); }

  // descendants lie within sum_{j<=level} base^j < base^level * base/(base-1)
  double subtree_bound(int32_t level) const {
    return covdist(level) * base_ / (base_ - 1.0);
  }

  int32_t new_node(int32_t point, int32_t level) {
    nodes_.push_back({point, level, {}});
    return static_cast<int32_t>(nodes_.size() - 1);
  }

  void insert(int32_t point) {
    if (root_ < 0) {
      root_ = new_node(point, 0);
      return;
    }
    double d = metric_(points_[point], points_[nodes_[root_].point]);
    if (d > covdist(nodes_[root_].level)) {
      if (nodes_[root_].children.empty()) {
        // a lone root can float to whatever level covers the newcomer
        nodes_[root_].level = level_for(d);
      } else {
        // raise the root by promoting leaves until the newcomer fits one
        // level above; the distance is to the current root, so recompute
        // after every promotion
        for (;;) {
          d = metric_(points_[point], points_[nodes_[root_].point]);
          if (d <= covdist(nodes_[root_].level + 1)) break;
          int32_t leaf = detach_any_leaf(root_);
          nodes_[leaf].level = nodes_[root_].level + 1;
          nodes_[leaf].children.push_back(root_);
          root_ = leaf;
        }
        int32_t nr = new_node(point, nodes_[root_].level + 1);
        nodes_[nr].children.push_back(root_);
        root_ = nr;
        return;
      }
    }
    insert_under(root_, point);
  }

  // precondition: d(parent, point) <= covdist(parent)
  void insert_under(int32_t ni, int32_t point) {
    for (;;) {
      const Node& nd = nodes_[ni];
      int32_t next = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int32_t ci : nd.children) {
        double dc = metric_(points_[point], points_[nodes_[ci].point]);
        if (dc <= covdist(nodes_[ci].level) && dc < best) {
          best = dc;
          next = ci;
        }
      }
      if (next < 0) {
        int32_t child = new_node(point, nd.level - 1);
        nodes_[ni].children.push_back(child);
        return;
      }
      ni = next;
    }
  }

  int32_t detach_any_leaf(int32_t ni) {
    while (!nodes_[ni].children.empty()) {
      int32_t last = nodes_[ni].children.back();
      if (nodes_[last].children.empty()) {
        nodes_[ni].children.pop_back();
        return last;
      }
      ni = last;
    }
    throw Error("detach_any_leaf on a childless node");
  }

  int32_t level_for(double d) const {
    int32_t level = 0;
    while (covdist(level) < d) ++level;
    while (level > 0 && covdist(level - 1) >= d) --level;
    return level;
  }

  std::vector<Node> nodes_;
  int32_t root_ = -1;
  std::span<const Point> points_;
  Metric metric_;
  double base_;
};

}  // namespace emba
