#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rhino/array.hpp"
#include "rhino/error.hpp"

namespace rhino {

/// One node per vehicle; nonnegative pairwise weights with self-loops.
struct AgentGraph {
  int64_t n_agents = 0;
  DenseArray features;   // [N x C]
  DenseArray adjacency;  // [N x N], unit diagonal

  static AgentGraph fully_connected(DenseArray features) {
    AgentGraph g;
    g.n_agents = features.dim(0);
    g.adjacency = DenseArray::ones({g.n_agents, g.n_agents});
    g.features = std::move(features);
    return g;
  }

  void validate() const {
    if (adjacency.ndim() != 2 || adjacency.dim(0) != n_agents || adjacency.dim(1) != n_agents)
      throw StructuralError("agent graph adjacency must be " + std::to_string(n_agents) + " square");
    if (features.dim(0) != n_agents)
      throw StructuralError("agent graph features row count != n_agents");
    for (int64_t i = 0; i < n_agents; ++i)
      if (adjacency(i, i) != 1.0) throw StructuralError("agent graph requires unit self-loops");
  }
};

/// Correlation between behavior modes of interacting agents.
struct BehaviorCorrelation {
  int64_t modes = 0;
  DenseArray lambda;  // [M x M], symmetric, entries in [0, 1]

  static BehaviorCorrelation all_ones(int64_t m) { return BehaviorCorrelation{m, DenseArray::ones({m, m})}; }

  void validate() const {
    if (lambda.ndim() != 2 || lambda.dim(0) != modes || lambda.dim(1) != modes)
      throw StructuralError("behavior correlation must be modes x modes");
    for (int64_t i = 0; i < modes; ++i)
      for (int64_t j = 0; j < modes; ++j) {
        if (lambda(i, j) < 0.0 || lambda(i, j) > 1.0)
          throw StructuralError("behavior correlation entries must lie in [0, 1]");
        if (lambda(i, j) != lambda(j, i)) throw StructuralError("behavior correlation must be symmetric");
      }
  }
};

/// Expansion of an agent graph: one node per (agent, mode) pair,
/// adjacency with Kronecker structure A^a x Lambda. Rows are agent-major:
/// node_index(i, m) = i * M + m.
struct AgentBehaviorGraph {
  int64_t n_agents = 0;
  int64_t modes = 0;
  DenseArray features;   // [M*N x C]
  DenseArray adjacency;  // [M*N x M*N]

  int64_t n_nodes() const { return n_agents * modes; }
  int64_t node_index(int64_t agent, int64_t mode) const { return agent * modes + mode; }
};

/// Kronecker expansion of every agent node into `modes` behavior nodes.
/// per_mode_features is [N x M x C]: the feature row of node (i, m).
inline AgentBehaviorGraph expand_graph(const AgentGraph& g, const BehaviorCorrelation& corr,
                                       const DenseArray& per_mode_features) {
  g.validate();
  corr.validate();
  const int64_t n = g.n_agents;
  const int64_t m = corr.modes;
  if (per_mode_features.ndim() != 3 || per_mode_features.dim(0) != n || per_mode_features.dim(1) != m)
    throw DimensionError("expand_graph: per-mode features must be [N=" + std::to_string(n) + " x M=" +
                         std::to_string(m) + " x C], got " + shape_str(per_mode_features.shape()));
  const int64_t c = per_mode_features.dim(2);

  AgentBehaviorGraph out;
  out.n_agents = n;
  out.modes = m;
  out.features = DenseArray({n * m, c});
  for (int64_t i = 0; i < n; ++i)
    for (int64_t mm = 0; mm < m; ++mm)
      for (int64_t k = 0; k < c; ++k) out.features(i * m + mm, k) = per_mode_features(i, mm, k);

  out.adjacency = DenseArray({n * m, n * m});
  for (int64_t i = 0; i < n; ++i)
    for (int64_t j = 0; j < n; ++j)
      for (int64_t mm = 0; mm < m; ++mm)
        for (int64_t nn = 0; nn < m; ++nn)
          out.adjacency(i * m + mm, j * m + nn) = g.adjacency(i, j) * corr.lambda(mm, nn);
  return out;
}

struct BehaviorEdge {
  int64_t agent_i, mode_m, agent_j, mode_n;
  double weight;
};

/// Exactly the nonzero entries of the expanded adjacency.
inline std::vector<BehaviorEdge> edge_list(const AgentBehaviorGraph& g) {
  std::vector<BehaviorEdge> edges;
  for (int64_t i = 0; i < g.n_agents; ++i)
    for (int64_t mm = 0; mm < g.modes; ++mm)
      for (int64_t j = 0; j < g.n_agents; ++j)
        for (int64_t nn = 0; nn < g.modes; ++nn) {
          double w = g.adjacency(g.node_index(i, mm), g.node_index(j, nn));
          if (w != 0.0) edges.push_back(BehaviorEdge{i, mm, j, nn, w});
        }
  return edges;
}

}  // namespace rhino
