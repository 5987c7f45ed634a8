#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ramc/change_graph.hpp"

namespace ramc {

/// One serialized graph. `text` holds the exact bytes (LF endings, no
/// trailing newline); local node ids are assigned in first-appearance order
/// starting at 0.
struct EdgeListDocument {
  long graphId = 0;
  std::string text;
  std::vector<NodeId> localToGraph;  // local id (vector index) -> source-graph node id
};

struct ParseError {
  enum class Kind { BadHeader, MalformedEdge, UnbalancedQuote, BadLabelMap, DuplicateNodeConflict };
  Kind kind = Kind::MalformedEdge;
  int lineNumber = 0;  // 1-based into the offending document
  std::string message;
};

const char* to_string(ParseError::Kind kind);

class SerializeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Attribute values (and valueBefore/valueAfter) longer than 200 characters
/// are cut and `...` appended. Applied by serialize.
Label truncate_label_values(const Label& label);
LabeledGraph truncate_label_values(const LabeledGraph& g);

/// Serializes an SCG. Edge line format:
///   e <src_id> <tgt_id> "<edge_label>" "<src_label>" "<tgt_label>"
/// DFS edge order starting from the node with the lexicographically smallest
/// TYPE-projected label; an already-emitted node label is replaced by `_`.
/// Throws SerializeError on empty or edgeless SCGs (the format cannot express
/// isolated nodes).
EdgeListDocument serialize(const SimpleChangeGraph& scg, long graphId);

/// Prompt-side variant: isolated nodes are dropped (the format cannot carry
/// them); a graph left without edges serializes as the bare header line.
EdgeListDocument serialize_for_prompt(const LabeledGraph& g, long graphId);

/// A parsed document; node ids are the document's local ids.
struct ParsedDocument {
  long graphId = 0;
  LabeledGraph graph;
};

struct ParseResult {
  std::optional<ParsedDocument> doc;
  std::optional<ParseError> error;
  bool ok() const { return doc.has_value(); }
};

ParseResult parse(const std::string& text);

/// Continuation edges generated against an existing document's node table.
struct Continuation {
  std::vector<Edge> newEdges;        // local-id space
  std::map<NodeId, Label> newNodes;  // nodes the continuation introduced
};

struct ContinuationResult {
  std::optional<Continuation> continuation;
  std::optional<ParseError> error;
  bool ok() const { return continuation.has_value(); }
};

/// Interprets `generated` as zero or more continuation edge lines. The first
/// line may lack the leading `e `; parsing stops at a blank-line stop marker.
ContinuationResult parse_continuation(const ParsedDocument& partial, const std::string& generated);

/// Renders continuation edge lines (with `e ` prefixes and `\n` terminators).
/// Node labels are written on first introduction, `_` afterwards.
std::string write_continuation(const ParsedDocument& partial, const std::vector<Edge>& newEdges,
                               const std::map<NodeId, Label>& newNodes);

/// The graph after applying a continuation: partial plus new nodes and edges.
LabeledGraph completed_graph(const ParsedDocument& partial, const Continuation& cont);

}  // namespace ramc
