#include "ramc/diff.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "ramc/rng.hpp"

namespace ramc {

std::string Provenance::to_string() const {
  std::string out = repository.empty() ? "?" : repository;
  out += ":";
  out += revisionPair.empty() ? "?" : revisionPair;
  out += ":";
  out += std::to_string(componentIndex);
  return out;
}

bool scg_is_well_formed(const LabeledGraph& g) {
  std::set<NodeId> touched;
  for (const auto& e : g.edges) {
    if (!is_changed(e.label)) return false;  // only changed edges belong to an SCG
    touched.insert(e.src);
    touched.insert(e.tgt);
  }
  for (const auto& [id, label] : g.nodes) {
    if (is_changed(label)) continue;
    if (!touched.count(id)) return false;  // non-changed node without a changed edge
  }
  return true;
}

namespace {

Label diff_object_label(const ModelObject& o, const char* changeType) {
  Label label;
  label.set(key::kChangeType, changeType);
  label.set(key::kType, element::kObject);
  label.set(key::kClassName, o.className);
  Label::Dict attrs;
  attrs.emplace_back(key::kId, o.id);
  for (const auto& [k, v] : o.attributes) attrs.emplace_back(k, v);
  label.set_dict(key::kAttributes, std::move(attrs));
  return label;
}

Label diff_reference_label(const std::string& refType, const char* changeType) {
  Label label;
  label.set(key::kChangeType, changeType);
  label.set(key::kType, element::kReference);
  label.set(key::kReferenceTypeName, refType);
  return label;
}

void check_unique_ids(const Model& m, const char* side) {
  std::set<std::string> seen;
  for (const auto& o : m.objects)
    if (!seen.insert(o.id).second)
      throw std::invalid_argument(std::string("duplicate object id in ") + side + " revision: " +
                                  o.id);
}

}  // namespace

DifferenceGraph diff(const Model& oldModel, const Model& newModel) {
  check_unique_ids(oldModel, "old");
  check_unique_ids(newModel, "new");

  // Union of object ids, sorted: stable node numbering.
  std::set<std::string> allIds;
  for (const auto& o : oldModel.objects) allIds.insert(o.id);
  for (const auto& o : newModel.objects) allIds.insert(o.id);

  DifferenceGraph g;
  std::map<std::string, NodeId> index;
  NodeId next = 0;
  for (const auto& id : allIds) {
    const ModelObject* oldObj = oldModel.find_object(id);
    const ModelObject* newObj = newModel.find_object(id);
    Label label;
    if (oldObj && newObj)
      label = diff_object_label(*oldObj, change::kPreserve);
    else if (oldObj)
      label = diff_object_label(*oldObj, change::kRemove);
    else
      label = diff_object_label(*newObj, change::kAdd);
    index[id] = next;
    g.add_node(next, std::move(label));
    ++next;
  }

  // References matched as (src, tgt, type) triples with multiplicity.
  std::map<std::tuple<std::string, std::string, std::string>, std::pair<int, int>> counts;
  for (const auto& r : oldModel.references)
    counts[{r.src, r.tgt, r.referenceTypeName}].first++;
  for (const auto& r : newModel.references)
    counts[{r.src, r.tgt, r.referenceTypeName}].second++;
  for (const auto& [triple, c] : counts) {
    const auto& [src, tgt, ref] = triple;
    NodeId s = index.at(src);
    NodeId t = index.at(tgt);
    int preserved = std::min(c.first, c.second);
    for (int i = 0; i < preserved; ++i)
      g.add_edge(s, t, diff_reference_label(ref, change::kPreserve));
    for (int i = preserved; i < c.first; ++i)
      g.add_edge(s, t, diff_reference_label(ref, change::kRemove));
    for (int i = preserved; i < c.second; ++i)
      g.add_edge(s, t, diff_reference_label(ref, change::kAdd));
  }

  // Attribute modifications on preserved objects: one Change node per
  // modified attribute, attached to the Preserve owner. An attribute present
  // on only one side diffs against the empty string.
  for (const auto& id : allIds) {
    const ModelObject* oldObj = oldModel.find_object(id);
    const ModelObject* newObj = newModel.find_object(id);
    if (!oldObj || !newObj) continue;
    std::vector<std::pair<std::string, std::pair<std::string, std::string>>> changes;
    for (const auto& [name, before] : oldObj->attributes) {
      const std::string* after = newObj->attribute(name);
      const std::string afterValue = after ? *after : "";
      if (afterValue != before) changes.push_back({name, {before, afterValue}});
    }
    for (const auto& [name, after] : newObj->attributes) {
      // An empty value is indistinguishable from absence (mirrors the
      // old-side handling, keeping the diff direction-symmetric).
      if (!oldObj->attribute(name) && !after.empty()) changes.push_back({name, {"", after}});
    }
    for (const auto& [name, values] : changes) {
      Label cl;
      cl.set(key::kChangeType, change::kChange);
      cl.set(key::kType, element::kAttributeValueChange);
      cl.set(key::kAttributeName, name);
      cl.set(key::kValueBefore, values.first);
      cl.set(key::kValueAfter, values.second);
      NodeId changeNode = next++;
      g.add_node(changeNode, std::move(cl));
      Label el;
      el.set(key::kChangeType, change::kChange);
      el.set(key::kType, element::kAttributeChange);
      g.add_edge(index.at(id), changeNode, std::move(el));
    }
  }
  return g;
}

SimpleChangeGraph extract_scg(const DifferenceGraph& d) {
  std::set<NodeId> keep;
  for (const auto& [id, label] : d.nodes)
    if (is_changed(label)) keep.insert(id);
  for (const auto& e : d.edges) {
    if (!is_changed(e.label)) continue;
    keep.insert(e.src);  // Preserve nodes adjacent to a changed edge
    keep.insert(e.tgt);
  }
  SimpleChangeGraph scg;
  for (NodeId id : keep) scg.graph.add_node(id, d.nodes.at(id));
  for (const auto& e : d.edges)
    if (is_changed(e.label)) scg.graph.add_edge(e.src, e.tgt, e.label);
  return scg;
}

std::vector<SimpleChangeGraph> scg_components(const SimpleChangeGraph& scg) {
  std::vector<SimpleChangeGraph> out;
  int index = 0;
  for (auto& comp : weakly_connected_components(scg.graph)) {
    SimpleChangeGraph part;
    part.graph = std::move(comp);
    part.provenance = scg.provenance;
    part.provenance.componentIndex = index++;
    out.push_back(std::move(part));
  }
  return out;
}

CompletionTask make_task(const SimpleChangeGraph& scg, int removeCount, std::uint64_t seed) {
  const std::size_t edgeCount = scg.graph.edge_count();
  if (edgeCount == 0) throw std::invalid_argument("make_task: SCG has no removable edge");
  if (removeCount < 1) throw std::invalid_argument("make_task: a task must hide something");
  const std::size_t k = std::min<std::size_t>(removeCount, edgeCount);

  Rng rng(seed);
  std::vector<std::size_t> removed = rng.sample_indices(edgeCount, k);
  std::sort(removed.begin(), removed.end());
  std::set<std::size_t> removedSet(removed.begin(), removed.end());

  CompletionTask task;
  task.groundTruth = scg;
  task.removedEdgeCount = static_cast<int>(k);
  task.seed = seed;
  task.removedEdgeIndices = removed;

  std::set<NodeId> hadEdge, stillHasEdge;
  for (std::size_t i = 0; i < scg.graph.edges.size(); ++i) {
    const Edge& e = scg.graph.edges[i];
    hadEdge.insert(e.src);
    hadEdge.insert(e.tgt);
    if (!removedSet.count(i)) {
      stillHasEdge.insert(e.src);
      stillHasEdge.insert(e.tgt);
    }
  }
  for (const auto& [id, label] : scg.graph.nodes) {
    const bool isolatedByRemoval = hadEdge.count(id) && !stillHasEdge.count(id);
    if (isolatedByRemoval && is_changed(label)) continue;  // must be regenerated
    task.partial.graph.add_node(id, label);
  }
  for (std::size_t i = 0; i < scg.graph.edges.size(); ++i) {
    if (removedSet.count(i)) continue;
    const Edge& e = scg.graph.edges[i];
    task.partial.graph.add_edge(e.src, e.tgt, e.label);
  }
  task.partial.provenance = scg.provenance;
  if (task.partial.graph.empty())
    throw std::invalid_argument("make_task: partial would be empty");
  return task;
}

std::vector<SimpleChangeGraph> dedup_corpus(const std::vector<SimpleChangeGraph>& scgs,
                                            LabelProjection p) {
  std::vector<SimpleChangeGraph> kept;
  std::vector<std::uint64_t> hashes;
  for (const auto& scg : scgs) {
    const std::uint64_t h = wl_hash(scg.graph, p);
    bool duplicate = false;
    for (std::size_t i = 0; i < kept.size(); ++i) {
      if (hashes[i] != h) continue;  // WL fast path
      if (is_isomorphic(scg.graph, kept[i].graph, p)) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) {
      kept.push_back(scg);
      hashes.push_back(h);
    }
  }
  return kept;
}

}  // namespace ramc
