#pragma once

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "rhino/array.hpp"
#include "rhino/error.hpp"
#include "rhino/graph.hpp"

namespace rhino {

enum class NodeKind { Agent, AgentBehavior };

using NodeSet = std::vector<int64_t>;

/// Binary incidence structure over a node set. Member lists are kept in
/// sorted form alongside the incidence matrix.
struct Hypergraph {
  int64_t n_nodes = 0;
  DenseArray incidence;  // [n_nodes x n_edges], entries in {0, 1}
  DenseArray features;   // [n_nodes x C]
  NodeKind node_kind = NodeKind::Agent;
  int64_t modes = 1;
  std::vector<NodeSet> edges;

  int64_t n_hyperedges() const { return static_cast<int64_t>(edges.size()); }
};

namespace detail {

inline NodeSet normalize_node_set(NodeSet s, int64_t n_nodes) {
  std::sort(s.begin(), s.end());
  if (std::adjacent_find(s.begin(), s.end()) != s.end())
    throw StructuralError("hyperedge contains a duplicate node");
  if (s.size() < 2) throw StructuralError("hyperedge must connect at least two nodes");
  if (s.front() < 0 || s.back() >= n_nodes)
    throw StructuralError("hyperedge node out of range [0, " + std::to_string(n_nodes) + ")");
  return s;
}

inline DenseArray incidence_from_sets(int64_t n_nodes, const std::vector<NodeSet>& sets) {
  DenseArray h({n_nodes, static_cast<int64_t>(sets.size())});
  for (size_t j = 0; j < sets.size(); ++j)
    for (int64_t v : sets[j]) h(v, static_cast<int64_t>(j)) = 1.0;
  return h;
}

}  // namespace detail

/// Drops later hyperedges whose membership set repeats an earlier one.
inline std::vector<NodeSet> dedupe_hyperedges(const std::vector<NodeSet>& sets) {
  std::vector<NodeSet> out;
  std::set<NodeSet> seen;
  for (const NodeSet& s : sets)
    if (seen.insert(s).second) out.push_back(s);
  return out;
}

inline Hypergraph build_hypergraph(int64_t n_nodes, DenseArray features, std::vector<NodeSet> sets,
                                   NodeKind kind, int64_t modes) {
  Hypergraph h;
  h.n_nodes = n_nodes;
  h.node_kind = kind;
  h.modes = modes;
  for (NodeSet& s : sets) s = detail::normalize_node_set(std::move(s), n_nodes);
  h.edges = std::move(sets);
  h.incidence = detail::incidence_from_sets(n_nodes, h.edges);
  h.features = std::move(features);
  return h;
}

/// Pairwise graph -> hypergraph: nodes and features carry over, the
/// given node groups become incidence columns.
inline Hypergraph transform_graph(const AgentGraph& g, const std::vector<NodeSet>& hyperedges) {
  g.validate();
  return build_hypergraph(g.n_agents, g.features, hyperedges, NodeKind::Agent, 1);
}

inline Hypergraph transform_graph(const AgentBehaviorGraph& g, const std::vector<NodeSet>& hyperedges) {
  return build_hypergraph(g.n_nodes(), g.features, hyperedges, NodeKind::AgentBehavior, g.modes);
}

enum class ExpandStyle {
  Collective,  // one expanded hyperedge per original (all participating modes)
  ModePairs,   // one hyperedge per (m, n) pair with nonzero correlation
};

/// Decomposes each agent node of an agent hypergraph into behavior
/// nodes. In Collective style an original hyperedge u becomes a single
/// column over {(i, m) : i in u, mode m correlated with any mode}; in
/// ModePairs style one column per correlated (m, n) pair.
inline Hypergraph expand_hypergraph(const Hypergraph& h, const BehaviorCorrelation& corr,
                                    const DenseArray& per_mode_features,
                                    ExpandStyle style = ExpandStyle::Collective) {
  if (h.node_kind != NodeKind::Agent)
    throw StructuralError("expand_hypergraph expects an agent hypergraph");
  corr.validate();
  const int64_t n = h.n_nodes;
  const int64_t m = corr.modes;
  if (per_mode_features.ndim() != 3 || per_mode_features.dim(0) != n || per_mode_features.dim(1) != m)
    throw DimensionError("expand_hypergraph: per-mode features must be [N=" + std::to_string(n) +
                         " x M=" + std::to_string(m) + " x C], got " + shape_str(per_mode_features.shape()));
  const int64_t c = per_mode_features.dim(2);

  std::vector<bool> mode_active(static_cast<size_t>(m), false);
  for (int64_t mm = 0; mm < m; ++mm)
    for (int64_t nn = 0; nn < m; ++nn)
      if (corr.lambda(mm, nn) != 0.0) mode_active[static_cast<size_t>(mm)] = true;

  std::vector<NodeSet> expanded;
  for (const NodeSet& u : h.edges) {
    if (style == ExpandStyle::Collective) {
      NodeSet s;
      for (int64_t i : u)
        for (int64_t mm = 0; mm < m; ++mm)
          if (mode_active[static_cast<size_t>(mm)]) s.push_back(i * m + mm);
      expanded.push_back(std::move(s));
    } else {
      for (int64_t mm = 0; mm < m; ++mm)
        for (int64_t nn = 0; nn < m; ++nn) {
          if (corr.lambda(mm, nn) == 0.0) continue;
          NodeSet s;
          for (int64_t i : u) {
            s.push_back(i * m + mm);
            if (nn != mm) s.push_back(i * m + nn);
          }
          std::sort(s.begin(), s.end());
          expanded.push_back(std::move(s));
        }
    }
  }
  expanded = dedupe_hyperedges(expanded);

  DenseArray features({n * m, c});
  for (int64_t i = 0; i < n; ++i)
    for (int64_t mm = 0; mm < m; ++mm)
      for (int64_t k = 0; k < c; ++k) features(i * m + mm, k) = per_mode_features(i, mm, k);

  return build_hypergraph(n * m, std::move(features), std::move(expanded), NodeKind::AgentBehavior, m);
}

/// Row sums of the incidence matrix.
inline DenseArray node_degree(const Hypergraph& h) {
  DenseArray deg({h.n_nodes});
  for (int64_t i = 0; i < h.n_nodes; ++i)
    for (int64_t j = 0; j < h.n_hyperedges(); ++j) deg[i] += h.incidence(i, j);
  return deg;
}

/// Per-scale hypergraphs; scale 0 holds pairwise links, scales >= 1 hold
/// fixed-size groups with strictly increasing sizes.
struct MultiScaleHypergraph {
  struct Entry {
    int scale_id;
    int64_t group_size;
    Hypergraph hypergraph;
  };
  std::vector<Entry> scales;

  void validate() const {
    int64_t prev = 0;
    for (const Entry& e : scales) {
      if (e.scale_id == 0 && e.group_size != 2)
        throw StructuralError("scale 0 must hold pairwise links");
      if (e.scale_id >= 1) {
        if (e.group_size <= prev && prev > 0)
          throw StructuralError("group sizes must strictly increase with scale");
        for (const NodeSet& s : e.hypergraph.edges)
          if (static_cast<int64_t>(s.size()) != e.group_size)
            throw StructuralError("scale " + std::to_string(e.scale_id) + " hyperedge size != " +
                                  std::to_string(e.group_size));
      }
      prev = e.group_size;
    }
  }
};

/// Fig. 9-style data exports.
inline void write_incidence_csv(std::ostream& os, const Hypergraph& h) {
  os << "node_id,edge_id,member\n";
  for (int64_t i = 0; i < h.n_nodes; ++i)
    for (int64_t j = 0; j < h.n_hyperedges(); ++j)
      os << i << "," << j << "," << static_cast<int>(h.incidence(i, j)) << "\n";
}

inline void write_affinity_csv(std::ostream& os, const DenseArray& affinity) {
  os << "i,j,affinity\n";
  char buf[64];
  for (int64_t i = 0; i < affinity.dim(0); ++i)
    for (int64_t j = 0; j < affinity.dim(1); ++j) {
      std::snprintf(buf, sizeof(buf), "%.9f", affinity(i, j));
      os << i << "," << j << "," << buf << "\n";
    }
}

}  // namespace rhino
