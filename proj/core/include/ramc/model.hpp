#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ramc/change_graph.hpp"
#include "ramc/graph.hpp"

namespace ramc {

/// The simplified type system: named classes with declared attribute names,
/// and named reference types between classes.
struct Metamodel {
  struct Reference {
    std::string name;
    std::string src;
    std::string tgt;
    bool operator==(const Reference&) const = default;
  };

  std::map<std::string, std::set<std::string>> classes;  // class name -> attribute names
  std::vector<Reference> references;

  bool declares_class(const std::string& name) const { return classes.count(name) != 0; }
  const Reference* find_reference(const std::string& name) const;
  bool declares_reference(const std::string& name, const std::string& srcClass,
                          const std::string& tgtClass) const;

  bool operator==(const Metamodel&) const = default;
};

struct ModelObject {
  std::string id;
  std::string className;
  std::vector<std::pair<std::string, std::string>> attributes;  // insertion order kept

  const std::string* attribute(const std::string& name) const;
  bool operator==(const ModelObject&) const = default;
};

struct ModelReference {
  std::string src;
  std::string tgt;
  std::string referenceTypeName;
  bool operator==(const ModelReference&) const = default;
};

struct Model {
  std::vector<ModelObject> objects;
  std::vector<ModelReference> references;

  const ModelObject* find_object(const std::string& id) const;
  ModelObject* find_object(const std::string& id);
  bool operator==(const Model&) const = default;
};

struct Violation {
  enum class Kind {
    DuplicateObjectId,
    UndeclaredClass,
    UndeclaredAttribute,
    UndeclaredReference,
    MistypedReference,
    DanglingEndpoint,
  };
  Kind kind;
  std::string message;
};

using ValidationReport = std::vector<Violation>;

/// Violations are data, not failures; an empty report means valid.
ValidationReport validate_model(const Model& model, const Metamodel& mm);

/// One node per object, one edge per reference. Node label
/// {type, className, attributes{id,...}}, edge label {type, referenceTypeName}.
/// Node ids are assigned by object list order. Throws on duplicate object ids.
LabeledGraph to_labeled_graph(const Model& model);

/// Inverse of to_labeled_graph (object order follows node id order).
Model model_from_labeled_graph(const LabeledGraph& g);

/// Deterministic generator for fresh object ids: "<tag>_<counter>".
class IdGenerator {
 public:
  explicit IdGenerator(std::string tag, int start = 0) : tag_(std::move(tag)), next_(start) {}
  std::string fresh() { return tag_ + "_" + std::to_string(next_++); }

 private:
  std::string tag_;
  int next_;
};

/// Applies a completed change graph onto a model. `anchoring` maps every
/// Preserve and Remove node of the SCG onto an existing object id. Add nodes
/// become new objects with fresh ids, Add edges become references, Remove
/// nodes/edges are deleted (plus dangling references), attribute-change nodes
/// rewrite the anchored object's attribute from valueBefore to valueAfter.
/// Throws std::invalid_argument on unanchored nodes, missing anchored
/// elements, class mismatches, or valueBefore mismatches.
Model apply_scg(const Model& model, const SimpleChangeGraph& scg,
                const std::map<NodeId, std::string>& anchoring, IdGenerator& ids);

/// Anchoring derived from the SCG labels' attributes.id entries (usable when
/// the SCG was extracted from a diff of the same repository).
std::map<NodeId, std::string> anchoring_from_labels(const SimpleChangeGraph& scg);

// --- on-disk formats -------------------------------------------------------

void save_model(const Model& model, const std::filesystem::path& file);
Model load_model(const std::filesystem::path& file);
void save_metamodel(const Metamodel& mm, const std::filesystem::path& file);
Metamodel load_metamodel(const std::filesystem::path& file);

std::string model_to_json(const Model& model);
Model model_from_json(const std::string& text);
std::string metamodel_to_json(const Metamodel& mm);
Metamodel metamodel_from_json(const std::string& text);

/// A repository directory: metamodel.json plus revisions r000.json, r001.json,
/// ... in history order.
struct Repository {
  std::string name;
  Metamodel metamodel;
  std::vector<Model> revisions;
};

Repository load_repository(const std::filesystem::path& dir);

}  // namespace ramc
