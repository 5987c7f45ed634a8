#pragma once

#include <cstdint>
#include <vector>

#include "ramc/change_graph.hpp"
#include "ramc/model.hpp"

namespace ramc {

/// Structural model difference via id-equality matching. Preserve nodes are
/// unified; attribute modifications become extra Change nodes attached to
/// their Preserve owner. Deterministic for fixed inputs; throws on duplicate
/// object ids within a revision.
DifferenceGraph diff(const Model& oldModel, const Model& newModel);

/// The changed nodes/edges plus changed-edge-adjacent Preserve nodes; nothing else.
SimpleChangeGraph extract_scg(const DifferenceGraph& d);

/// Weakly connected components; provenance carries the component index.
std::vector<SimpleChangeGraph> scg_components(const SimpleChangeGraph& scg);

/// An evaluation task: a partial change graph obtained by removing edges from
/// a full one, with the full graph as ground truth.
struct CompletionTask {
  SimpleChangeGraph partial;
  SimpleChangeGraph groundTruth;
  int removedEdgeCount = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> removedEdgeIndices;  // indices into groundTruth.graph.edges
};

/// Removes `removeCount` uniformly chosen edges (clipped to the edge count).
/// Changed nodes left isolated by the removal are dropped from the partial
/// (they must be regenerated); Preserve anchors are always retained. Throws
/// when removeCount < 1, the SCG has no edge, or the partial would be empty.
CompletionTask make_task(const SimpleChangeGraph& scg, int removeCount, std::uint64_t seed);

/// Drops isomorphic duplicates (under the projection), keeping the first
/// occurrence; order otherwise stable.
std::vector<SimpleChangeGraph> dedup_corpus(const std::vector<SimpleChangeGraph>& scgs,
                                            LabelProjection p = LabelProjection::Full);

}  // namespace ramc
