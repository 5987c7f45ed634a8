#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ramc/label.hpp"

namespace ramc {

using NodeId = int;

struct Edge {
  NodeId src;
  NodeId tgt;
  Label label;

  bool operator==(const Edge& other) const = default;
};

/// Directed multigraph with labeled nodes and edges. Parallel edges are
/// permitted; node ids are arbitrary non-negative integers.
class LabeledGraph {
 public:
  std::map<NodeId, Label> nodes;  // ordered for deterministic iteration
  std::vector<Edge> edges;

  void add_node(NodeId id, Label label = {});
  /// Endpoints must already exist; throws std::invalid_argument otherwise.
  void add_edge(NodeId src, NodeId tgt, Label label = {});

  bool has_node(NodeId id) const { return nodes.count(id) != 0; }
  std::size_t node_count() const { return nodes.size(); }
  std::size_t edge_count() const { return edges.size(); }
  bool empty() const { return nodes.empty(); }

  bool operator==(const LabeledGraph& other) const = default;
};

/// Weakly connected components ordered by the smallest contained node id.
/// Each component keeps original node ids, labels, and induced edges.
std::vector<LabeledGraph> weakly_connected_components(const LabeledGraph& g);

/// Same structure, labels reduced per projection.
LabeledGraph project(const LabeledGraph& g, LabelProjection p);

/// Copy with attribute ids stripped from all node labels (fresh-id abstraction).
LabeledGraph without_attribute_ids(const LabeledGraph& g);

/// Weisfeiler-Lehman hash under a label projection. Isomorphic graphs (under
/// the projection) always hash equal; deterministic across runs and platforms.
std::uint64_t wl_hash(const LabeledGraph& g, LabelProjection p, int iterations = 3);

/// Exact label-preserving isomorphism test (backtracking, WL fast-reject).
/// `anchors` pins g1 nodes onto g2 nodes; the bijection must extend the map.
bool is_isomorphic(const LabeledGraph& g1, const LabeledGraph& g2, LabelProjection p,
                   const std::map<NodeId, NodeId>& anchors = {});

/// True iff an injective mapping embeds `small` into `large`: every node maps
/// to a node with an equal projected label and every edge (multiset-aware) maps
/// to a distinct equally-labeled edge. `anchors` pins small nodes onto large
/// ones. On success `mapping_out` (if non-null) receives one witness mapping.
bool find_embedding(const LabeledGraph& small, const LabeledGraph& large, LabelProjection p,
                    const std::map<NodeId, NodeId>& anchors = {},
                    std::map<NodeId, NodeId>* mapping_out = nullptr);

}  // namespace ramc
