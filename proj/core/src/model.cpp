#include "ramc/model.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "nlohmann/json.hpp"

namespace ramc {

using ordered_json = nlohmann::ordered_json;

const Metamodel::Reference* Metamodel::find_reference(const std::string& name) const {
  for (const auto& r : references)
    if (r.name == name) return &r;
  return nullptr;
}

bool Metamodel::declares_reference(const std::string& name, const std::string& srcClass,
                                   const std::string& tgtClass) const {
  for (const auto& r : references)
    if (r.name == name && r.src == srcClass && r.tgt == tgtClass) return true;
  return false;
}

const std::string* ModelObject::attribute(const std::string& name) const {
  for (const auto& [k, v] : attributes)
    if (k == name) return &v;
  return nullptr;
}

const ModelObject* Model::find_object(const std::string& id) const {
  for (const auto& o : objects)
    if (o.id == id) return &o;
  return nullptr;
}

ModelObject* Model::find_object(const std::string& id) {
  for (auto& o : objects)
    if (o.id == id) return &o;
  return nullptr;
}

ValidationReport validate_model(const Model& model, const Metamodel& mm) {
  ValidationReport report;
  std::set<std::string> seen;
  for (const auto& o : model.objects) {
    if (!seen.insert(o.id).second)
      report.push_back({Violation::Kind::DuplicateObjectId, "duplicate object id: " + o.id});
    auto cls = mm.classes.find(o.className);
    if (cls == mm.classes.end()) {
      report.push_back(
          {Violation::Kind::UndeclaredClass, "object " + o.id + ": undeclared class " + o.className});
      continue;
    }
    for (const auto& [name, value] : o.attributes) {
      if (!cls->second.count(name))
        report.push_back({Violation::Kind::UndeclaredAttribute,
                          "object " + o.id + ": undeclared attribute " + name + " on class " +
                              o.className});
    }
  }
  for (const auto& r : model.references) {
    const ModelObject* src = model.find_object(r.src);
    const ModelObject* tgt = model.find_object(r.tgt);
    if (!src || !tgt) {
      report.push_back({Violation::Kind::DanglingEndpoint,
                        "reference " + r.referenceTypeName + ": dangling endpoint " +
                            (src ? r.tgt : r.src)});
      continue;
    }
    if (!mm.find_reference(r.referenceTypeName)) {
      report.push_back({Violation::Kind::UndeclaredReference,
                        "undeclared reference type " + r.referenceTypeName});
      continue;
    }
    if (!mm.declares_reference(r.referenceTypeName, src->className, tgt->className))
      report.push_back({Violation::Kind::MistypedReference,
                        "reference " + r.referenceTypeName + " not declared between " +
                            src->className + " and " + tgt->className});
  }
  return report;
}

namespace {

Label object_label(const ModelObject& o) {
  Label label;
  label.set(key::kType, element::kObject);
  label.set(key::kClassName, o.className);
  Label::Dict attrs;
  attrs.emplace_back(key::kId, o.id);
  for (const auto& [k, v] : o.attributes) attrs.emplace_back(k, v);
  label.set_dict(key::kAttributes, std::move(attrs));
  return label;
}

Label reference_label(const ModelReference& r) {
  Label label;
  label.set(key::kType, element::kReference);
  label.set(key::kReferenceTypeName, r.referenceTypeName);
  return label;
}

}  // namespace

LabeledGraph to_labeled_graph(const Model& model) {
  LabeledGraph g;
  std::map<std::string, NodeId> index;
  NodeId next = 0;
  for (const auto& o : model.objects) {
    if (index.count(o.id)) throw std::invalid_argument("duplicate object id: " + o.id);
    index[o.id] = next;
    g.add_node(next, object_label(o));
    ++next;
  }
  for (const auto& r : model.references) {
    auto s = index.find(r.src);
    auto t = index.find(r.tgt);
    if (s == index.end() || t == index.end())
      throw std::invalid_argument("reference endpoint missing: " + r.src + "->" + r.tgt);
    g.add_edge(s->second, t->second, reference_label(r));
  }
  return g;
}

Model model_from_labeled_graph(const LabeledGraph& g) {
  Model model;
  std::map<NodeId, std::string> ids;
  for (const auto& [node, label] : g.nodes) {
    if (label.get_or(key::kType, "") != element::kObject)
      throw std::invalid_argument("node " + std::to_string(node) + " is not an object node");
    const Label::Dict* attrs = label.get_dict(key::kAttributes);
    ModelObject o;
    o.className = label.get_or(key::kClassName, "");
    if (attrs) {
      for (const auto& [k, v] : *attrs) {
        if (k == key::kId)
          o.id = v;
        else
          o.attributes.emplace_back(k, v);
      }
    }
    if (o.id.empty()) throw std::invalid_argument("object node without id attribute");
    ids[node] = o.id;
    model.objects.push_back(std::move(o));
  }
  for (const auto& e : g.edges) {
    ModelReference r;
    r.src = ids.at(e.src);
    r.tgt = ids.at(e.tgt);
    r.referenceTypeName = e.label.get_or(key::kReferenceTypeName, "");
    model.references.push_back(std::move(r));
  }
  return model;
}

std::map<NodeId, std::string> anchoring_from_labels(const SimpleChangeGraph& scg) {
  std::map<NodeId, std::string> anchoring;
  for (const auto& [node, label] : scg.graph.nodes) {
    const std::string ct = change_type_of(label);
    if (ct != change::kPreserve && ct != change::kRemove) continue;
    if (const Label::Dict* attrs = label.get_dict(key::kAttributes)) {
      for (const auto& [k, v] : *attrs)
        if (k == key::kId) anchoring[node] = v;
    }
  }
  return anchoring;
}

Model apply_scg(const Model& model, const SimpleChangeGraph& scg,
                const std::map<NodeId, std::string>& anchoring, IdGenerator& ids) {
  const LabeledGraph& g = scg.graph;

  // Anchor validation: every Preserve/Remove object node is anchored onto an
  // existing object of the right class.
  for (const auto& [node, label] : g.nodes) {
    const std::string ct = change_type_of(label);
    const std::string type = label.get_or(key::kType, element::kObject);
    if (type != element::kObject) continue;
    if (ct != change::kPreserve && ct != change::kRemove) continue;
    auto it = anchoring.find(node);
    if (it == anchoring.end())
      throw std::invalid_argument("unanchored " + ct + " node " + std::to_string(node));
    const ModelObject* obj = model.find_object(it->second);
    if (!obj) throw std::invalid_argument("anchored object missing: " + it->second);
    const std::string cls = label.get_or(key::kClassName, "");
    if (!cls.empty() && obj->className != cls)
      throw std::invalid_argument("anchor class mismatch for " + it->second + ": expected " + cls +
                                  ", found " + obj->className);
  }

  Model result = model;

  // Attribute changes on anchored Preserve owners.
  for (const auto& e : g.edges) {
    if (e.label.get_or(key::kType, "") != element::kAttributeChange) continue;
    // The change node is the endpoint carrying the attributeValueChange label.
    NodeId changeNode = e.tgt, owner = e.src;
    if (g.nodes.at(changeNode).get_or(key::kType, "") != element::kAttributeValueChange)
      std::swap(changeNode, owner);
    const Label& cl = g.nodes.at(changeNode);
    if (cl.get_or(key::kType, "") != element::kAttributeValueChange)
      throw std::invalid_argument("attributeChange edge without attributeValueChange node");
    auto it = anchoring.find(owner);
    if (it == anchoring.end())
      throw std::invalid_argument("unanchored attribute-change owner " + std::to_string(owner));
    ModelObject* obj = result.find_object(it->second);
    if (!obj) throw std::invalid_argument("anchored object missing: " + it->second);
    const std::string name = cl.get_or(key::kAttributeName, "");
    const std::string before = cl.get_or(key::kValueBefore, "");
    const std::string after = cl.get_or(key::kValueAfter, "");
    const std::string* current = obj->attribute(name);
    const std::string current_value = current ? *current : "";
    if (current_value != before)
      throw std::invalid_argument("attribute " + name + " of " + obj->id + ": valueBefore mismatch (" +
                                  current_value + " != " + before + ")");
    if (after.empty()) {
      auto& attrs = obj->attributes;
      attrs.erase(std::remove_if(attrs.begin(), attrs.end(),
                                 [&](const auto& kv) { return kv.first == name; }),
                  attrs.end());
    } else if (current) {
      for (auto& [k, v] : obj->attributes)
        if (k == name) v = after;
    } else {
      obj->attributes.emplace_back(name, after);
    }
  }

  auto resolve = [&](NodeId node, const std::map<NodeId, std::string>& added) -> std::string {
    auto a = anchoring.find(node);
    if (a != anchoring.end()) return a->second;
    auto n = added.find(node);
    if (n != added.end()) return n->second;
    throw std::invalid_argument("unresolvable edge endpoint node " + std::to_string(node));
  };

  // Explicit Remove edges first (so they are distinguished from dangle cleanup).
  for (const auto& e : g.edges) {
    if (change_type_of(e.label) != change::kRemove) continue;
    if (e.label.get_or(key::kType, "") != element::kReference) continue;
    const std::string srcId = resolve(e.src, {});
    const std::string tgtId = resolve(e.tgt, {});
    const std::string ref = e.label.get_or(key::kReferenceTypeName, "");
    auto it = std::find_if(result.references.begin(), result.references.end(),
                           [&](const ModelReference& r) {
                             return r.src == srcId && r.tgt == tgtId && r.referenceTypeName == ref;
                           });
    if (it == result.references.end())
      throw std::invalid_argument("removed reference not found: " + srcId + " -" + ref + "-> " +
                                  tgtId);
    result.references.erase(it);
  }

  // Remove nodes, then drop dangling references.
  std::set<std::string> removedIds;
  for (const auto& [node, label] : g.nodes) {
    if (change_type_of(label) != change::kRemove) continue;
    if (label.get_or(key::kType, element::kObject) != element::kObject) continue;
    removedIds.insert(anchoring.at(node));
  }
  if (!removedIds.empty()) {
    auto& objs = result.objects;
    objs.erase(std::remove_if(objs.begin(), objs.end(),
                              [&](const ModelObject& o) { return removedIds.count(o.id) != 0; }),
               objs.end());
    auto& refs = result.references;
    refs.erase(std::remove_if(refs.begin(), refs.end(),
                              [&](const ModelReference& r) {
                                return !result.find_object(r.src) || !result.find_object(r.tgt);
                              }),
               refs.end());
  }

  // Add nodes (fresh ids, deterministic by node id order), then Add edges.
  std::map<NodeId, std::string> added;
  for (const auto& [node, label] : g.nodes) {
    if (change_type_of(label) != change::kAdd) continue;
    if (label.get_or(key::kType, element::kObject) != element::kObject) continue;
    ModelObject o;
    o.id = ids.fresh();
    o.className = label.get_or(key::kClassName, "");
    if (const Label::Dict* attrs = label.get_dict(key::kAttributes)) {
      for (const auto& [k, v] : *attrs)
        if (k != key::kId) o.attributes.emplace_back(k, v);
    }
    added[node] = o.id;
    result.objects.push_back(std::move(o));
  }
  for (const auto& e : g.edges) {
    if (change_type_of(e.label) != change::kAdd) continue;
    if (e.label.get_or(key::kType, "") != element::kReference) continue;
    ModelReference r;
    r.src = resolve(e.src, added);
    r.tgt = resolve(e.tgt, added);
    r.referenceTypeName = e.label.get_or(key::kReferenceTypeName, "");
    result.references.push_back(std::move(r));
  }
  return result;
}

// --- JSON formats -----------------------------------------------------------

namespace {

ordered_json model_json(const Model& model) {
  ordered_json objs = ordered_json::array();
  for (const auto& o : model.objects) {
    ordered_json attrs = ordered_json::object();
    for (const auto& [k, v] : o.attributes) attrs[k] = v;
    objs.push_back({{"id", o.id}, {"className", o.className}, {"attributes", attrs}});
  }
  ordered_json refs = ordered_json::array();
  for (const auto& r : model.references)
    refs.push_back({{"src", r.src}, {"tgt", r.tgt}, {"referenceTypeName", r.referenceTypeName}});
  return {{"objects", objs}, {"references", refs}};
}

}  // namespace

std::string model_to_json(const Model& model) { return model_json(model).dump(2) + "\n"; }

Model model_from_json(const std::string& text) {
  ordered_json j = ordered_json::parse(text);
  Model model;
  for (const auto& jo : j.at("objects")) {
    ModelObject o;
    o.id = jo.at("id").get<std::string>();
    o.className = jo.at("className").get<std::string>();
    if (jo.contains("attributes"))
      for (const auto& [k, v] : jo.at("attributes").items())
        o.attributes.emplace_back(k, v.get<std::string>());
    model.objects.push_back(std::move(o));
  }
  for (const auto& jr : j.at("references")) {
    model.references.push_back({jr.at("src").get<std::string>(), jr.at("tgt").get<std::string>(),
                                jr.at("referenceTypeName").get<std::string>()});
  }
  return model;
}

std::string metamodel_to_json(const Metamodel& mm) {
  ordered_json classes = ordered_json::array();
  for (const auto& [name, attrs] : mm.classes) {
    ordered_json a = ordered_json::array();
    for (const auto& attr : attrs) a.push_back(attr);
    classes.push_back({{"name", name}, {"attributes", a}});
  }
  ordered_json refs = ordered_json::array();
  for (const auto& r : mm.references)
    refs.push_back({{"name", r.name}, {"src", r.src}, {"tgt", r.tgt}});
  ordered_json j = {{"classes", classes}, {"references", refs}};
  return j.dump(2) + "\n";
}

Metamodel metamodel_from_json(const std::string& text) {
  ordered_json j = ordered_json::parse(text);
  Metamodel mm;
  for (const auto& jc : j.at("classes")) {
    std::set<std::string> attrs;
    if (jc.contains("attributes"))
      for (const auto& a : jc.at("attributes")) attrs.insert(a.get<std::string>());
    mm.classes[jc.at("name").get<std::string>()] = std::move(attrs);
  }
  for (const auto& jr : j.at("references"))
    mm.references.push_back({jr.at("name").get<std::string>(), jr.at("src").get<std::string>(),
                             jr.at("tgt").get<std::string>()});
  return mm;
}

namespace {

std::string read_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << text;
}

}  // namespace

void save_model(const Model& model, const std::filesystem::path& file) {
  write_file(file, model_to_json(model));
}

Model load_model(const std::filesystem::path& file) { return model_from_json(read_file(file)); }

void save_metamodel(const Metamodel& mm, const std::filesystem::path& file) {
  write_file(file, metamodel_to_json(mm));
}

Metamodel load_metamodel(const std::filesystem::path& file) {
  return metamodel_from_json(read_file(file));
}

Repository load_repository(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw std::runtime_error("not a repository directory: " + dir.string());
  Repository repo;
  repo.name = dir.filename().string();
  if (repo.name.empty()) repo.name = dir.parent_path().filename().string();
  repo.metamodel = load_metamodel(dir / "metamodel.json");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.size() > 5 && name[0] == 'r' && name.ends_with(".json") &&
        std::isdigit(static_cast<unsigned char>(name[1])))
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) repo.revisions.push_back(load_model(f));
  return repo;
}

}  // namespace ramc
