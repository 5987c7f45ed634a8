#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "ramc/diff.hpp"
#include "ramc/model.hpp"

namespace ramc {

struct SyntheticConfig {
  int opsPerRevision = 11;        // 11, 31, 51, 81 are the studied settings
  int revisions = 10;             // 10 or 20
  double perturbationProbability = 0.0;  // 0.0, 0.5, 1.0
  std::uint64_t seed = 7;
};

/// Component metamodel: Component, Implementation, Port, Connector,
/// Requirement with ports/implementedBy/src/tgt/satisfies/subcomponents.
Metamodel component_metamodel();

/// A reusable edit operation: an SCG pattern with placeholder ids plus a query
/// enumerating the anchor assignments (pattern node -> object id) applicable
/// to a model. Anchors cover the pattern's Preserve and Remove nodes.
struct EditOpTemplate {
  std::string name;
  SimpleChangeGraph pattern;
  std::function<std::vector<std::map<NodeId, std::string>>(const Model&)> findAnchors;
};

/// Twelve templates spanning add-only, remove-only, and mixed patterns, all
/// pairwise distinct under the TYPE projection.
const std::vector<EditOpTemplate>& edit_op_catalog();

const EditOpTemplate& catalog_template(const std::string& name);

/// Deterministic base model: 20 components with ports, implementations,
/// requirements, a few subcomponent links and connectors.
Model seed_model(std::uint64_t seed);

/// Writes metamodel.json, r000.json..rNNN.json and manifest.json into `dir`.
/// Each revision applies opsPerRevision catalog templates at uniformly random
/// applicable anchors (disjoint within a revision); with the configured
/// probability an additional overlapping template follows an application.
/// Fully deterministic given the seed. Returns warnings (e.g. off-grid
/// parameter values).
std::vector<std::string> generate_repo(const SyntheticConfig& cfg,
                                       const std::filesystem::path& dir);

}  // namespace ramc
