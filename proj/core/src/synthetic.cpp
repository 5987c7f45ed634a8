#include "ramc/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <stdexcept>

#include "nlohmann/json.hpp"
#include "ramc/rng.hpp"

namespace ramc {

using ordered_json = nlohmann::ordered_json;

Metamodel component_metamodel() {
  Metamodel mm;
  for (const char* cls : {"Component", "Implementation", "Port", "Connector", "Requirement"})
    mm.classes[cls] = {"name"};
  mm.references = {
      {"ports", "Component", "Port"},
      {"implementedBy", "Component", "Implementation"},
      {"src", "Connector", "Port"},
      {"tgt", "Connector", "Port"},
      {"satisfies", "Component", "Requirement"},
      {"subcomponents", "Component", "Component"},
  };
  return mm;
}

namespace {

struct PatternBuilder {
  SimpleChangeGraph scg;
  NodeId next = 0;

  NodeId node(const char* changeType, const char* className) {
    Label label;
    label.set(key::kChangeType, changeType);
    label.set(key::kType, element::kObject);
    label.set(key::kClassName, className);
    Label::Dict attrs;
    attrs.emplace_back(key::kId, "$" + std::to_string(next));
    label.set_dict(key::kAttributes, std::move(attrs));
    NodeId id = next++;
    scg.graph.add_node(id, std::move(label));
    return id;
  }

  void edge(NodeId s, NodeId t, const char* changeType, const char* refType) {
    Label label;
    label.set(key::kChangeType, changeType);
    label.set(key::kType, element::kReference);
    label.set(key::kReferenceTypeName, refType);
    scg.graph.add_edge(s, t, std::move(label));
  }
};

/// Reference adjacency index over a model.
struct ModelIndex {
  std::map<std::string, std::vector<const ModelObject*>> byClass;
  std::map<std::string, std::vector<const ModelReference*>> out;
  std::map<std::string, std::vector<const ModelReference*>> in;

  explicit ModelIndex(const Model& m) {
    for (const auto& o : m.objects) byClass[o.className].push_back(&o);
    for (const auto& r : m.references) {
      out[r.src].push_back(&r);
      in[r.tgt].push_back(&r);
    }
  }

  std::vector<const ModelReference*> out_of(const std::string& id, const std::string& ref) const {
    std::vector<const ModelReference*> res;
    auto it = out.find(id);
    if (it == out.end()) return res;
    for (const auto* r : it->second)
      if (r->referenceTypeName == ref) res.push_back(r);
    return res;
  }

  std::vector<const ModelReference*> in_of(const std::string& id, const std::string& ref) const {
    std::vector<const ModelReference*> res;
    auto it = in.find(id);
    if (it == in.end()) return res;
    for (const auto* r : it->second)
      if (r->referenceTypeName == ref) res.push_back(r);
    return res;
  }

  std::size_t degree(const std::string& id) const {
    std::size_t n = 0;
    auto o = out.find(id);
    if (o != out.end()) n += o->second.size();
    auto i = in.find(id);
    if (i != in.end()) n += i->second.size();
    return n;
  }
};

using Assignment = std::map<NodeId, std::string>;
using Assignments = std::vector<Assignment>;

std::vector<EditOpTemplate> build_catalog() {
  std::vector<EditOpTemplate> catalog;

  {  // add-component-with-port: parent gains a subcomponent that owns a port
    PatternBuilder b;
    NodeId parent = b.node(change::kPreserve, "Component");
    NodeId comp = b.node(change::kAdd, "Component");
    NodeId port = b.node(change::kAdd, "Port");
    b.edge(parent, comp, change::kAdd, "subcomponents");
    b.edge(comp, port, change::kAdd, "ports");
    catalog.push_back({"add-component-with-port", b.scg, [parent](const Model& m) {
                         ModelIndex idx(m);
                         Assignments out;
                         for (const auto* c : idx.byClass["Component"])
                           out.push_back({{parent, c->id}});
                         return out;
                       }});
  }

  {  // add-implementation
    PatternBuilder b;
    NodeId comp = b.node(change::kPreserve, "Component");
    NodeId impl = b.node(change::kAdd, "Implementation");
    b.edge(comp, impl, change::kAdd, "implementedBy");
    catalog.push_back({"add-implementation", b.scg, [comp](const Model& m) {
                         ModelIndex idx(m);
                         Assignments out;
                         for (const auto* c : idx.byClass["Component"])
                           out.push_back({{comp, c->id}});
                         return out;
                       }});
  }

  {  // add-requirement-to-component
    PatternBuilder b;
    NodeId comp = b.node(change::kPreserve, "Component");
    NodeId req = b.node(change::kAdd, "Requirement");
    b.edge(comp, req, change::kAdd, "satisfies");
    catalog.push_back({"add-requirement-to-component", b.scg, [comp](const Model& m) {
                         ModelIndex idx(m);
                         Assignments out;
                         for (const auto* c : idx.byClass["Component"])
                           out.push_back({{comp, c->id}});
                         return out;
                       }});
  }

  {  // connect-two-ports
    PatternBuilder b;
    NodeId conn = b.node(change::kAdd, "Connector");
    NodeId p1 = b.node(change::kPreserve, "Port");
    NodeId p2 = b.node(change::kPreserve, "Port");
    b.edge(conn, p1, change::kAdd, "src");
    b.edge(conn, p2, change::kAdd, "tgt");
    catalog.push_back({"connect-two-ports", b.scg, [p1, p2](const Model& m) {
                         ModelIndex idx(m);
                         Assignments out;
                         const auto& ports = idx.byClass["Port"];
                         for (const auto* a : ports)
                           for (const auto* z : ports)
                             if (a != z) out.push_back({{p1, a->id}, {p2, z->id}});
                         return out;
                       }});
  }

  {  // remove-connector
    PatternBuilder b;
    NodeId conn = b.node(change::kRemove, "Connector");
    NodeId p1 = b.node(change::kPreserve, "Port");
    NodeId p2 = b.node(change::kPreserve, "Port");
    b.edge(conn, p1, change::kRemove, "src");
    b.edge(conn, p2, change::kRemove, "tgt");
    catalog.push_back({"remove-connector", b.scg, [conn, p1, p2](const Model& m) {
                         ModelIndex idx(m);
                         Assignments out;
                         for (const auto* k : idx.byClass["Connector"]) {
                           auto src = idx.out_of(k->id, "src");
                           auto tgt = idx.out_of(k->id, "tgt");
                           if (src.size() != 1 || tgt.size() != 1) continue;
                           if (src[0]->tgt == tgt[0]->tgt) continue;  // pattern has two ports
                           out.push_back({{conn, k->id}, {p1, src[0]->tgt}, {p2, tgt[0]->tgt}});
                         }
                         return out;
                       }});
  }

  {  // remove-component-cascade: child with port, implementation and
     // requirement link disappears entirely
    PatternBuilder b;
    NodeId parent = b.node(change::kPreserve, "Component");
    NodeId comp = b.node(change::kRemove, "Component");
    NodeId port = b.node(change::kRemove, "Port");
    NodeId impl = b.node(change::kRemove, "Implementation");
    NodeId req = b.node(change::kPreserve, "Requirement");
    b.edge(parent, comp, change::kRemove, "subcomponents");
    b.edge(comp, port, change::kRemove, "ports");
    b.edge(comp, impl, change::kRemove, "implementedBy");
    b.edge(comp, req, change::kRemove, "satisfies");
    catalog.push_back(
        {"remove-component-cascade", b.scg, [parent, comp, port, impl, req](const Model& m) {
           ModelIndex idx(m);
           Assignments out;
           for (const auto* c : idx.byClass["Component"]) {
             auto parents = idx.in_of(c->id, "subcomponents");
             auto ports = idx.out_of(c->id, "ports");
             auto impls = idx.out_of(c->id, "implementedBy");
             auto reqs = idx.out_of(c->id, "satisfies");
             if (parents.size() != 1 || ports.size() != 1 || impls.size() != 1 || reqs.size() != 1)
               continue;
             // The exact-shape requirement: nothing else touches the child,
             // its port, or its implementation.
             if (idx.degree(c->id) != 4) continue;
             if (idx.degree(ports[0]->tgt) != 1) continue;
             if (idx.degree(impls[0]->tgt) != 1) continue;
             out.push_back({{parent, parents[0]->src},
                            {comp, c->id},
                            {port, ports[0]->tgt},
                            {impl, impls[0]->tgt},
                            {req, reqs[0]->tgt}});
           }
           return out;
         }});
  }

  {  // add-subcomponent
    PatternBuilder b;
    NodeId parent = b.node(change::kPreserve, "Component");
    NodeId comp = b.node(change::kAdd, "Component");
    b.edge(parent, comp, change::kAdd, "subcomponents");
    catalog.push_back({"add-subcomponent", b.scg, [parent](const Model& m) {
                         ModelIndex idx(m);
                         Assignments out;
                         for (const auto* c : idx.byClass["Component"])
                           out.push_back({{parent, c->id}});
                         return out;
                       }});
  }

  {  // move-port: re-parent a port from one component to another
    PatternBuilder b;
    NodeId oldOwner = b.node(change::kPreserve, "Component");
    NodeId newOwner = b.node(change::kPreserve, "Component");
    NodeId port = b.node(change::kPreserve, "Port");
    b.edge(oldOwner, port, change::kRemove, "ports");
    b.edge(newOwner, port, change::kAdd, "ports");
    catalog.push_back(
        {"move-port", b.scg, [oldOwner, newOwner, port](const Model& m) {
           ModelIndex idx(m);
           Assignments out;
           for (const auto& r : m.references) {
             if (r.referenceTypeName != "ports") continue;
             for (const auto* c : idx.byClass["Component"]) {
               if (c->id == r.src) continue;
               bool already = false;
               for (const auto* other : idx.out_of(c->id, "ports"))
                 if (other->tgt == r.tgt) already = true;
               if (already) continue;
               out.push_back({{oldOwner, r.src}, {newOwner, c->id}, {port, r.tgt}});
             }
           }
           return out;
         }});
  }

  {  // add-full-component: subcomponent with port, implementation, requirement
    PatternBuilder b;
    NodeId parent = b.node(change::kPreserve, "Component");
    NodeId comp = b.node(change::kAdd, "Component");
    NodeId port = b.node(change::kAdd, "Port");
    NodeId impl = b.node(change::kAdd, "Implementation");
    NodeId req = b.node(change::kAdd, "Requirement");
    b.edge(parent, comp, change::kAdd, "subcomponents");
    b.edge(comp, port, change::kAdd, "ports");
    b.edge(comp, impl, change::kAdd, "implementedBy");
    b.edge(comp, req, change::kAdd, "satisfies");
    catalog.push_back({"add-full-component", b.scg, [parent](const Model& m) {
                         ModelIndex idx(m);
                         Assignments out;
                         for (const auto* c : idx.byClass["Component"])
                           out.push_back({{parent, c->id}});
                         return out;
                       }});
  }

  {  // add-requirement-pair
    PatternBuilder b;
    NodeId comp = b.node(change::kPreserve, "Component");
    NodeId r1 = b.node(change::kAdd, "Requirement");
    NodeId r2 = b.node(change::kAdd, "Requirement");
    b.edge(comp, r1, change::kAdd, "satisfies");
    b.edge(comp, r2, change::kAdd, "satisfies");
    catalog.push_back({"add-requirement-pair", b.scg, [comp](const Model& m) {
                         ModelIndex idx(m);
                         Assignments out;
                         for (const auto* c : idx.byClass["Component"])
                           out.push_back({{comp, c->id}});
                         return out;
                       }});
  }

  {  // swap-implementation
    PatternBuilder b;
    NodeId comp = b.node(change::kPreserve, "Component");
    NodeId oldImpl = b.node(change::kRemove, "Implementation");
    NodeId newImpl = b.node(change::kAdd, "Implementation");
    b.edge(comp, oldImpl, change::kRemove, "implementedBy");
    b.edge(comp, newImpl, change::kAdd, "implementedBy");
    catalog.push_back({"swap-implementation", b.scg, [comp, oldImpl](const Model& m) {
                         ModelIndex idx(m);
                         Assignments out;
                         for (const auto* c : idx.byClass["Component"]) {
                           for (const auto* r : idx.out_of(c->id, "implementedBy")) {
                             if (idx.degree(r->tgt) != 1) continue;  // exclusively owned
                             out.push_back({{comp, c->id}, {oldImpl, r->tgt}});
                           }
                         }
                         return out;
                       }});
  }

  {  // reparent-component
    PatternBuilder b;
    NodeId oldParent = b.node(change::kPreserve, "Component");
    NodeId newParent = b.node(change::kPreserve, "Component");
    NodeId child = b.node(change::kPreserve, "Component");
    b.edge(oldParent, child, change::kRemove, "subcomponents");
    b.edge(newParent, child, change::kAdd, "subcomponents");
    catalog.push_back(
        {"reparent-component", b.scg, [oldParent, newParent, child](const Model& m) {
           ModelIndex idx(m);
           Assignments out;
           for (const auto& r : m.references) {
             if (r.referenceTypeName != "subcomponents") continue;
             for (const auto* c : idx.byClass["Component"]) {
               if (c->id == r.src || c->id == r.tgt) continue;
               bool already = false;
               for (const auto* other : idx.out_of(c->id, "subcomponents"))
                 if (other->tgt == r.tgt) already = true;
               if (already) continue;
               out.push_back({{oldParent, r.src}, {newParent, c->id}, {child, r.tgt}});
             }
           }
           return out;
         }});
  }

  return catalog;
}

}  // namespace

const std::vector<EditOpTemplate>& edit_op_catalog() {
  static const std::vector<EditOpTemplate> catalog = build_catalog();
  return catalog;
}

const EditOpTemplate& catalog_template(const std::string& name) {
  for (const auto& t : edit_op_catalog())
    if (t.name == name) return t;
  throw std::invalid_argument("unknown catalog template: " + name);
}

Model seed_model(std::uint64_t seed) {
  Rng rng(hash_combine(seed, fnv1a("seed-model")));
  Model m;
  auto add = [&](const std::string& id, const std::string& cls) {
    m.objects.push_back({id, cls, {}});
    return id;
  };

  constexpr int kComponents = 20;
  for (int i = 0; i < kComponents; ++i) {
    add("c" + std::to_string(i), "Component");
    add("p" + std::to_string(i), "Port");
    m.references.push_back({"c" + std::to_string(i), "p" + std::to_string(i), "ports"});
  }
  // Implementations for a random half of the first twelve components.
  for (int i = 0; i < 12; ++i) {
    if (rng.chance(0.5)) {
      add("i" + std::to_string(i), "Implementation");
      m.references.push_back({"c" + std::to_string(i), "i" + std::to_string(i), "implementedBy"});
    }
  }
  // Requirements satisfied by random components.
  for (int j = 0; j < 6; ++j) {
    add("r" + std::to_string(j), "Requirement");
    const int c = static_cast<int>(rng.below(kComponents));
    m.references.push_back({"c" + std::to_string(c), "r" + std::to_string(j), "satisfies"});
  }
  // Shallow containment tree over the first components.
  for (int i = 0; i < 6; ++i)
    m.references.push_back(
        {"c" + std::to_string(i), "c" + std::to_string(10 + i), "subcomponents"});
  // Cascade-eligible children: dedicated parent link, port, implementation,
  // requirement, nothing else attached.
  for (int i = 0; i < 4; ++i) {
    const std::string comp = add("fc" + std::to_string(i), "Component");
    const std::string port = add("fp" + std::to_string(i), "Port");
    const std::string impl = add("fi" + std::to_string(i), "Implementation");
    const std::string req = add("fr" + std::to_string(i), "Requirement");
    m.references.push_back({"c" + std::to_string(i), comp, "subcomponents"});
    m.references.push_back({comp, port, "ports"});
    m.references.push_back({comp, impl, "implementedBy"});
    m.references.push_back({comp, req, "satisfies"});
  }
  // A few connectors over distinct port pairs.
  for (int k = 0; k < 3; ++k) {
    const std::string conn = add("k" + std::to_string(k), "Connector");
    const int a = static_cast<int>(rng.below(kComponents));
    int z = static_cast<int>(rng.below(kComponents));
    while (z == a) z = static_cast<int>(rng.below(kComponents));
    m.references.push_back({conn, "p" + std::to_string(a), "src"});
    m.references.push_back({conn, "p" + std::to_string(z), "tgt"});
  }
  return m;
}

namespace {

std::string rev_name(int rev) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "r%03d", rev);
  return buf;
}

std::set<std::string> object_ids(const Model& m) {
  std::set<std::string> ids;
  for (const auto& o : m.objects) ids.insert(o.id);
  return ids;
}

struct AppliedOp {
  std::string templateName;
  Assignment anchors;
  std::vector<std::string> created;
  std::vector<std::string> deleted;
  std::set<std::string> touched;  // anchor values + created + deleted
};

ordered_json app_json(const AppliedOp& op) {
  ordered_json j;
  j["template"] = op.templateName;
  ordered_json anchors = ordered_json::object();
  for (const auto& [node, id] : op.anchors) anchors[std::to_string(node)] = id;
  j["anchors"] = anchors;
  j["created"] = op.created;
  j["deleted"] = op.deleted;
  return j;
}

}  // namespace

std::vector<std::string> generate_repo(const SyntheticConfig& cfg,
                                       const std::filesystem::path& dir) {
  if (cfg.opsPerRevision < 1 || cfg.revisions < 1)
    throw std::invalid_argument("generate_repo: counts must be positive");
  if (cfg.perturbationProbability < 0.0 || cfg.perturbationProbability > 1.0)
    throw std::invalid_argument("generate_repo: perturbation probability must lie in [0, 1]");

  std::vector<std::string> warnings;
  const std::set<int> opsGrid{11, 31, 51, 81};
  const std::set<int> revGrid{10, 20};
  if (!opsGrid.count(cfg.opsPerRevision))
    warnings.push_back("opsPerRevision " + std::to_string(cfg.opsPerRevision) +
                       " is outside the studied grid {11, 31, 51, 81}");
  if (!revGrid.count(cfg.revisions))
    warnings.push_back("revisions " + std::to_string(cfg.revisions) +
                       " is outside the studied grid {10, 20}");
  if (cfg.perturbationProbability != 0.0 && cfg.perturbationProbability != 0.5 &&
      cfg.perturbationProbability != 1.0)
    warnings.push_back("perturbationProbability outside the studied grid {0, 0.5, 1}");

  std::filesystem::create_directories(dir);
  save_metamodel(component_metamodel(), dir / "metamodel.json");

  Model model = seed_model(cfg.seed);
  save_model(model, dir / (rev_name(0) + ".json"));

  const auto& catalog = edit_op_catalog();
  Rng rng(hash_combine(cfg.seed, fnv1a("evolution")));

  ordered_json manifest;
  manifest["config"] = {{"opsPerRevision", cfg.opsPerRevision},
                        {"revisions", cfg.revisions},
                        {"perturbationProbability", cfg.perturbationProbability},
                        {"seed", cfg.seed}};
  manifest["revisions"] = ordered_json::array();

  for (int rev = 1; rev <= cfg.revisions; ++rev) {
    IdGenerator ids(rev_name(rev));
    std::set<std::string> touchedThisRev;
    ordered_json revJson;
    revJson["revision"] = rev;
    revJson["applications"] = ordered_json::array();
    std::vector<std::set<std::string>> groupTouched;

    auto try_apply = [&](const std::set<std::string>& mustShare,
                         const std::set<std::string>& mustAvoid,
                         int retries) -> std::optional<AppliedOp> {
      for (int attempt = 0; attempt < retries; ++attempt) {
        const EditOpTemplate& tpl = catalog[rng.below(catalog.size())];
        Assignments assignments = tpl.findAnchors(model);
        Assignments eligible;
        for (auto& a : assignments) {
          bool shares = mustShare.empty();
          bool clashes = false;
          for (const auto& [node, id] : a) {
            if (mustShare.count(id)) shares = true;
            if (mustAvoid.count(id)) clashes = true;
          }
          if (shares && !clashes) eligible.push_back(std::move(a));
        }
        if (eligible.empty()) continue;
        const Assignment& anchors = eligible[rng.below(eligible.size())];

        const std::set<std::string> before = object_ids(model);
        model = apply_scg(model, tpl.pattern, anchors, ids);
        const std::set<std::string> after = object_ids(model);

        AppliedOp op;
        op.templateName = tpl.name;
        op.anchors = anchors;
        for (const auto& id : after)
          if (!before.count(id)) op.created.push_back(id);
        for (const auto& id : before)
          if (!after.count(id)) op.deleted.push_back(id);
        for (const auto& [node, id] : anchors) op.touched.insert(id);
        op.touched.insert(op.created.begin(), op.created.end());
        op.touched.insert(op.deleted.begin(), op.deleted.end());
        return op;
      }
      return std::nullopt;
    };

    for (int i = 0; i < cfg.opsPerRevision; ++i) {
      auto op = try_apply({}, touchedThisRev, 50);
      ordered_json entry;
      if (!op) {
        entry["skipped"] = true;  // no applicable anchor after bounded retries
        revJson["applications"].push_back(entry);
        continue;
      }
      entry = app_json(*op);
      entry["skipped"] = false;
      std::set<std::string> group = op->touched;

      if (rng.chance(cfg.perturbationProbability)) {
        std::set<std::string> avoid;
        for (const auto& id : touchedThisRev)
          if (!group.count(id)) avoid.insert(id);
        auto pert = try_apply(group, avoid, 200);
        if (pert) {
          entry["perturbation"] = app_json(*pert);
          group.insert(pert->touched.begin(), pert->touched.end());
        } else {
          entry["perturbation"] = nullptr;
          entry["perturbationSkipped"] = true;
        }
      } else {
        entry["perturbation"] = nullptr;
      }

      touchedThisRev.insert(group.begin(), group.end());
      groupTouched.push_back(group);
      revJson["applications"].push_back(entry);
    }

    // Merged flag: groups whose touched sets intersect would fuse into one
    // SCG component. Disjoint drawing keeps this false, but compute honestly.
    std::size_t entryIdx = 0;
    for (auto& entry : revJson["applications"]) {
      if (entry.value("skipped", false)) continue;
      const auto& mine = groupTouched[entryIdx];
      bool merged = false;
      for (std::size_t j = 0; j < groupTouched.size(); ++j) {
        if (j == entryIdx) continue;
        for (const auto& id : groupTouched[j])
          if (mine.count(id)) merged = true;
      }
      entry["merged"] = merged;
      ++entryIdx;
    }

    save_model(model, dir / (rev_name(rev) + ".json"));
    manifest["revisions"].push_back(std::move(revJson));
  }

  std::ofstream out(dir / "manifest.json", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write manifest.json");
  out << manifest.dump(2) << "\n";
  return warnings;
}

}  // namespace ramc
