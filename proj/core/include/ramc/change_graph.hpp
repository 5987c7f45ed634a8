#pragma once

#include <string>

#include "ramc/graph.hpp"

namespace ramc {

/// A difference graph is a labeled graph whose node/edge labels all carry a
/// changeType of Add, Preserve, Remove, or Change (attribute apparatus).
using DifferenceGraph = LabeledGraph;

struct Provenance {
  std::string repository;
  std::string revisionPair;
  int componentIndex = -1;

  std::string to_string() const;
  bool operator==(const Provenance&) const = default;
};

/// The minimal changed subgraph of a difference graph plus preserved nodes
/// adjacent to a changed edge. Unit of training and completion.
struct SimpleChangeGraph {
  LabeledGraph graph;
  Provenance provenance;

  bool operator==(const SimpleChangeGraph&) const = default;
};

inline std::string change_type_of(const Label& label) {
  return label.get_or(key::kChangeType, "");
}

inline bool is_changed(const Label& label) {
  const std::string ct = change_type_of(label);
  return !ct.empty() && ct != change::kPreserve;
}

/// SCG invariant: every element is changed, or is a Preserve node adjacent to
/// a changed edge; no Preserve-Preserve edges; no non-changed isolated nodes.
bool scg_is_well_formed(const LabeledGraph& g);

}  // namespace ramc
