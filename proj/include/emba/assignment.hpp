#pragma once

// Dense linear sum assignment via shortest augmenting paths with potentials,
// O(n^3). Rows are processed in order and column scans go left to right, so
// equal-cost optima resolve to the same matching on every run.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "core.hpp"
#include "embedding.hpp"
#include "metric_tree.hpp"

namespace emba {

inline constexpr int kAssignmentSizeCap = 4096;

struct AssignmentResult {
  double cost = 0.0;
  std::vector<int32_t> matching;  // row -> column
};

inline AssignmentResult solve_hungarian(const std::vector<std::vector<double>>& cost) {
  std::size_t n = cost.size();
  if (n > kAssignmentSizeCap)
    throw SizeCapError("assignment instance of size " + std::to_string(n) +
                       " exceeds the dense cap of " + std::to_string(kAssignmentSizeCap));
  for (const auto& row : cost)
    if (row.size() != n) throw Error("assignment cost matrix must be square");
  if (n == 0) return {};

  constexpr double inf = std::numeric_limits<double>::infinity();
  // 1-based arrays; p[j] is the row matched to column j, p[0] the active row
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int32_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = static_cast<int32_t>(i);
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      std::size_t i0 = p[j0], j1 = 0;
      double delta = inf;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = static_cast<int32_t>(j0);
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  AssignmentResult r;
  r.matching.assign(n, -1);
  for (std::size_t j = 1; j <= n; ++j)
    if (p[j] > 0) r.matching[p[j] - 1] = static_cast<int32_t>(j - 1);
  for (std::size_t i = 0; i < n; ++i) r.cost += cost[i][r.matching[i]];
  return r;
}

// Square instance over V(g) + |V(h)| dummies against V(h) + |V(g)| dummies.
// ground(u, v) sees -1 for a dummy on either side.
inline std::vector<std::vector<double>> padded_instance(
    int n, int m, const std::function<double(int32_t, int32_t)>& ground) {
  std::size_t size = static_cast<std::size_t>(n) + m;
  if (size > kAssignmentSizeCap)
    throw SizeCapError("padded assignment instance of size " + std::to_string(size) +
                       " exceeds the dense cap of " + std::to_string(kAssignmentSizeCap));
  std::vector<std::vector<double>> cost(size, std::vector<double>(size, 0.0));
  for (std::size_t i = 0; i < size; ++i) {
    int32_t ui = i < static_cast<std::size_t>(n) ? static_cast<int32_t>(i) : -1;
    for (std::size_t j = 0; j < size; ++j) {
      int32_t vj = j < static_cast<std::size_t>(m) ? static_cast<int32_t>(j) : -1;
      cost[i][j] = ground(ui, vj);
    }
  }
  return cost;
}

// Optimal assignment cost between two multisets under a tree metric, with
// implicit dummy padding. Computed through the embeddings, so it runs in
// linear time instead of cubic; dummies anchor on the root and vanish.
inline double solve_tree_metric(std::span<const int64_t> left,
                                std::span<const int64_t> right,
                                const MetricTree& t, EmbeddingWorkspace& ws) {
  Embedding a = compute_vector_keys(left, t, ws);
  Embedding b = compute_vector_keys(right, t, ws);
  return l1_distance(a, b);
}

inline double solve_tree_metric(std::span<const int64_t> left,
                                std::span<const int64_t> right,
                                const MetricTree& t) {
  thread_local EmbeddingWorkspace ws;
  return solve_tree_metric(left, right, t, ws);
}

}  // namespace emba
