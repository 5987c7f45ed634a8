#include "ramc/edgelist.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace ramc {

const char* to_string(ParseError::Kind kind) {
  switch (kind) {
    case ParseError::Kind::BadHeader: return "bad-header";
    case ParseError::Kind::MalformedEdge: return "malformed-edge";
    case ParseError::Kind::UnbalancedQuote: return "unbalanced-quote";
    case ParseError::Kind::BadLabelMap: return "bad-label-map";
    case ParseError::Kind::DuplicateNodeConflict: return "duplicate-node-conflict";
  }
  return "?";
}

namespace {

constexpr std::size_t kMaxValueLength = 200;

std::string truncate_value(const std::string& v) {
  if (v.size() <= kMaxValueLength) return v;
  return v.substr(0, kMaxValueLength) + "...";
}

std::string quote_segment(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

Label truncate_label_values(const Label& label) {
  Label out;
  for (const auto& [k, v] : label.entries()) {
    if (const auto* s = std::get_if<std::string>(&v)) {
      if (k == key::kValueBefore || k == key::kValueAfter)
        out.set(k, truncate_value(*s));
      else
        out.set(k, *s);
    } else {
      Label::Dict dict;
      for (const auto& [dk, dv] : std::get<Label::Dict>(v)) dict.emplace_back(dk, truncate_value(dv));
      out.set_dict(k, std::move(dict));
    }
  }
  return out;
}

LabeledGraph truncate_label_values(const LabeledGraph& g) {
  LabeledGraph out;
  for (const auto& [id, label] : g.nodes) out.add_node(id, truncate_label_values(label));
  for (const auto& e : g.edges) out.add_edge(e.src, e.tgt, truncate_label_values(e.label));
  return out;
}

namespace {

EdgeListDocument serialize_graph(const LabeledGraph& input, long graphId) {
  if (input.empty()) throw SerializeError("cannot serialize an empty SCG");
  if (input.edge_count() == 0)
    throw SerializeError("cannot serialize an edgeless SCG (the format carries nodes on edges)");

  const LabeledGraph g = truncate_label_values(input);

  struct Incident {
    std::size_t edge;  // index into g.edges
    NodeId other;
    bool outgoing;
  };
  std::map<NodeId, std::vector<Incident>> incident;
  std::map<NodeId, std::string> fullText;
  std::map<NodeId, std::string> typeText;
  for (const auto& [id, label] : g.nodes) {
    incident[id];
    fullText[id] = label.to_text();
    typeText[id] = project(label, LabelProjection::Type).to_text();
  }
  std::vector<std::string> edgeText(g.edges.size());
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    const Edge& e = g.edges[i];
    edgeText[i] = e.label.to_text();
    incident[e.src].push_back({i, e.tgt, true});
    if (e.tgt != e.src) incident[e.tgt].push_back({i, e.src, false});
  }
  for (auto& [id, inc] : incident) {
    if (inc.empty())
      throw SerializeError("cannot serialize an SCG with isolated node " + std::to_string(id));
    std::sort(inc.begin(), inc.end(), [&](const Incident& a, const Incident& b) {
      if (edgeText[a.edge] != edgeText[b.edge]) return edgeText[a.edge] < edgeText[b.edge];
      if (fullText.at(a.other) != fullText.at(b.other))
        return fullText.at(a.other) < fullText.at(b.other);
      if (a.outgoing != b.outgoing) return a.outgoing;  // out before in
      return a.edge < b.edge;
    });
  }

  // DFS start: lexicographically smallest TYPE-projected label, ties by id.
  std::vector<NodeId> starts;
  for (const auto& [id, label] : g.nodes) starts.push_back(id);
  std::sort(starts.begin(), starts.end(), [&](NodeId a, NodeId b) {
    if (typeText.at(a) != typeText.at(b)) return typeText.at(a) < typeText.at(b);
    return a < b;
  });

  EdgeListDocument doc;
  doc.graphId = graphId;
  doc.text = "t # " + std::to_string(graphId);

  std::vector<bool> emitted(g.edges.size(), false);
  std::map<NodeId, int> localId;

  auto local = [&](NodeId node) {
    auto it = localId.find(node);
    if (it != localId.end()) return std::pair<int, bool>{it->second, false};
    int id = static_cast<int>(doc.localToGraph.size());
    localId[node] = id;
    doc.localToGraph.push_back(node);
    return std::pair<int, bool>{id, true};
  };

  auto emit = [&](std::size_t edgeIdx) {
    const Edge& e = g.edges[edgeIdx];
    auto [srcLocal, srcFirst] = local(e.src);
    auto [tgtLocal, tgtFirst] = local(e.tgt);
    if (e.src == e.tgt) tgtFirst = false;
    std::string line = "e " + std::to_string(srcLocal) + " " + std::to_string(tgtLocal) + " " +
                       quote_segment(edgeText[edgeIdx]) + " " +
                       (srcFirst ? quote_segment(fullText.at(e.src)) : std::string("_")) + " " +
                       (tgtFirst ? quote_segment(fullText.at(e.tgt)) : std::string("_"));
    doc.text += "\n" + line;
    emitted[edgeIdx] = true;
  };

  for (NodeId start : starts) {
    std::vector<NodeId> stack{start};
    while (!stack.empty()) {
      NodeId v = stack.back();
      const Incident* next = nullptr;
      for (const Incident& inc : incident.at(v)) {
        if (!emitted[inc.edge]) {
          next = &inc;
          break;
        }
      }
      if (!next) {
        stack.pop_back();
        continue;
      }
      emit(next->edge);
      stack.push_back(next->other);
    }
  }
  return doc;
}

}  // namespace

EdgeListDocument serialize(const SimpleChangeGraph& scg, long graphId) {
  return serialize_graph(scg.graph, graphId);
}

EdgeListDocument serialize_for_prompt(const LabeledGraph& g, long graphId) {
  LabeledGraph connected;
  std::set<NodeId> touched;
  for (const auto& e : g.edges) {
    touched.insert(e.src);
    touched.insert(e.tgt);
  }
  for (const auto& [id, label] : g.nodes)
    if (touched.count(id)) connected.add_node(id, label);
  for (const auto& e : g.edges) connected.add_edge(e.src, e.tgt, e.label);

  if (connected.edge_count() == 0) {
    EdgeListDocument doc;
    doc.graphId = graphId;
    doc.text = "t # " + std::to_string(graphId);
    return doc;
  }
  return serialize_graph(connected, graphId);
}

// --- parsing ----------------------------------------------------------------

namespace {

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string current;
  for (char c : text) {
    if (c == '\n') {
      if (!current.empty() && current.back() == '\r') current.pop_back();
      lines.push_back(std::move(current));
      current.clear();
    } else {
      current += c;
    }
  }
  if (!current.empty() && current.back() == '\r') current.pop_back();
  lines.push_back(std::move(current));
  return lines;
}

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

struct Segment {
  enum class Kind { Labeled, BackRef, EmptyOrBackRef } kind;
  std::string text;  // label text for Kind::Labeled
};

struct LineCursor {
  const std::string& line;
  std::size_t pos = 0;

  void skip_spaces() {
    while (pos < line.size() && line[pos] == ' ') ++pos;
  }
  bool done() {
    skip_spaces();
    return pos >= line.size();
  }
};

std::optional<long> parse_int(LineCursor& cur) {
  cur.skip_spaces();
  std::size_t start = cur.pos;
  while (cur.pos < cur.line.size() && std::isdigit(static_cast<unsigned char>(cur.line[cur.pos])))
    ++cur.pos;
  if (cur.pos == start || cur.pos - start > 9) return std::nullopt;  // node ids stay small
  if (cur.pos < cur.line.size() && cur.line[cur.pos] != ' ') return std::nullopt;
  return std::stol(cur.line.substr(start, cur.pos - start));
}

/// A quoted label segment, a bare `_`, or a bare `{}`.
std::optional<Segment> parse_segment(LineCursor& cur, ParseError::Kind& errKind) {
  cur.skip_spaces();
  if (cur.pos >= cur.line.size()) {
    errKind = ParseError::Kind::MalformedEdge;
    return std::nullopt;
  }
  char c = cur.line[cur.pos];
  if (c == '"') {
    ++cur.pos;
    std::string out;
    while (cur.pos < cur.line.size()) {
      char d = cur.line[cur.pos];
      if (d == '\\' && cur.pos + 1 < cur.line.size() && cur.line[cur.pos + 1] == '"') {
        out += '"';
        cur.pos += 2;
        continue;
      }
      if (d == '"') {
        ++cur.pos;
        if (cur.pos < cur.line.size() && cur.line[cur.pos] != ' ') {
          errKind = ParseError::Kind::MalformedEdge;
          return std::nullopt;
        }
        return Segment{Segment::Kind::Labeled, std::move(out)};
      }
      out += d;
      ++cur.pos;
    }
    errKind = ParseError::Kind::UnbalancedQuote;
    return std::nullopt;
  }
  // Bare token up to the next space.
  std::size_t start = cur.pos;
  while (cur.pos < cur.line.size() && cur.line[cur.pos] != ' ') ++cur.pos;
  std::string token = cur.line.substr(start, cur.pos - start);
  if (token == "_") return Segment{Segment::Kind::BackRef, {}};
  if (token == "{}") return Segment{Segment::Kind::EmptyOrBackRef, {}};
  errKind = ParseError::Kind::MalformedEdge;
  return std::nullopt;
}

struct EdgeLine {
  long src = 0;
  long tgt = 0;
  Segment edgeLabel;
  Segment srcLabel;
  Segment tgtLabel;
};

std::optional<EdgeLine> parse_edge_line(const std::string& line, bool allowMissingPrefix,
                                        ParseError& err) {
  LineCursor cur{line};
  cur.skip_spaces();
  if (cur.pos + 1 < line.size() && line[cur.pos] == 'e' && line[cur.pos + 1] == ' ') {
    cur.pos += 2;
  } else if (!allowMissingPrefix) {
    err = {ParseError::Kind::MalformedEdge, 0, "edge line must begin with 'e '"};
    return std::nullopt;
  }
  EdgeLine out;
  auto src = parse_int(cur);
  auto tgt = src ? parse_int(cur) : std::nullopt;
  if (!src || !tgt) {
    err = {ParseError::Kind::MalformedEdge, 0, "expected two non-negative node ids"};
    return std::nullopt;
  }
  out.src = *src;
  out.tgt = *tgt;
  ParseError::Kind kind = ParseError::Kind::MalformedEdge;
  auto el = parse_segment(cur, kind);
  if (!el) {
    err = {kind, 0, "bad edge label segment"};
    return std::nullopt;
  }
  auto sl = parse_segment(cur, kind);
  if (!sl) {
    err = {kind, 0, "bad source label segment"};
    return std::nullopt;
  }
  auto tl = parse_segment(cur, kind);
  if (!tl) {
    err = {kind, 0, "bad target label segment"};
    return std::nullopt;
  }
  if (!cur.done()) {
    err = {ParseError::Kind::MalformedEdge, 0, "trailing tokens after the three label segments"};
    return std::nullopt;
  }
  out.edgeLabel = std::move(*el);
  out.srcLabel = std::move(*sl);
  out.tgtLabel = std::move(*tl);
  return out;
}

/// Shared node-table state for full documents and continuations.
struct NodeTable {
  std::map<NodeId, Label> defined;
  std::map<NodeId, int> firstUseLine;  // ids seen only via back-references so far

  std::optional<ParseError> apply(NodeId id, const Segment& seg, int lineNo) {
    switch (seg.kind) {
      case Segment::Kind::Labeled: {
        auto parsed = Label::parse(seg.text);
        if (!parsed)
          return ParseError{ParseError::Kind::BadLabelMap, lineNo,
                            "cannot parse label map: " + seg.text};
        auto it = defined.find(id);
        if (it == defined.end()) {
          defined.emplace(id, std::move(*parsed));
          firstUseLine.erase(id);
        } else if (!(it->second == *parsed)) {
          return ParseError{ParseError::Kind::DuplicateNodeConflict, lineNo,
                            "node " + std::to_string(id) + " redefined with a different label"};
        }
        return std::nullopt;
      }
      case Segment::Kind::BackRef:
        if (!defined.count(id) && !firstUseLine.count(id)) firstUseLine[id] = lineNo;
        return std::nullopt;
      case Segment::Kind::EmptyOrBackRef:
        if (!defined.count(id)) {
          defined.emplace(id, Label{});
          firstUseLine.erase(id);
        }
        return std::nullopt;
    }
    return std::nullopt;
  }

  /// A node only ever referenced via `_` was never given a label anywhere.
  std::optional<ParseError> finish() const {
    for (const auto& [id, line] : firstUseLine) {
      if (!defined.count(id))
        return ParseError{ParseError::Kind::DuplicateNodeConflict, line,
                          "node " + std::to_string(id) + " referenced via _ but never defined"};
    }
    return std::nullopt;
  }
};

Label edge_label_of(const Segment& seg, int lineNo, std::optional<ParseError>& err) {
  if (seg.kind == Segment::Kind::Labeled) {
    auto parsed = Label::parse(seg.text);
    if (!parsed) {
      err = ParseError{ParseError::Kind::BadLabelMap, lineNo,
                       "cannot parse edge label map: " + seg.text};
      return {};
    }
    return std::move(*parsed);
  }
  return {};  // `_` / `{}` in the edge slot: empty label
}

}  // namespace

ParseResult parse(const std::string& text) {
  ParseResult result;
  std::vector<std::string> lines = split_lines(text);
  if (lines.empty() || is_blank(lines[0])) {
    result.error = ParseError{ParseError::Kind::BadHeader, 1, "missing 't # <graph_id>' header"};
    return result;
  }
  std::string header = lines[0];
  while (!header.empty() && (header.back() == ' ' || header.back() == '\t')) header.pop_back();
  if (header.rfind("t # ", 0) != 0) {
    result.error = ParseError{ParseError::Kind::BadHeader, 1, "header must be 't # <graph_id>'"};
    return result;
  }
  const std::string idPart = header.substr(4);
  if (idPart.empty() || idPart.size() > 18 ||
      !std::all_of(idPart.begin(), idPart.end(),
                   [](unsigned char c) { return std::isdigit(c) != 0; })) {
    result.error = ParseError{ParseError::Kind::BadHeader, 1, "graph id must be an integer"};
    return result;
  }

  ParsedDocument doc;
  doc.graphId = std::stol(idPart);
  NodeTable table;
  struct PendingEdge {
    NodeId src, tgt;
    Label label;
  };
  std::vector<PendingEdge> pending;

  for (std::size_t i = 1; i < lines.size(); ++i) {
    const int lineNo = static_cast<int>(i + 1);
    if (is_blank(lines[i])) continue;
    ParseError err;
    auto edge = parse_edge_line(lines[i], /*allowMissingPrefix=*/false, err);
    if (!edge) {
      err.lineNumber = lineNo;
      result.error = err;
      return result;
    }
    std::optional<ParseError> e;
    Label edgeLabel = edge_label_of(edge->edgeLabel, lineNo, e);
    if (e) {
      result.error = e;
      return result;
    }
    if ((e = table.apply(static_cast<NodeId>(edge->src), edge->srcLabel, lineNo))) {
      result.error = e;
      return result;
    }
    if ((e = table.apply(static_cast<NodeId>(edge->tgt), edge->tgtLabel, lineNo))) {
      result.error = e;
      return result;
    }
    pending.push_back({static_cast<NodeId>(edge->src), static_cast<NodeId>(edge->tgt),
                       std::move(edgeLabel)});
  }
  if (auto e = table.finish()) {
    result.error = e;
    return result;
  }
  for (const auto& [id, label] : table.defined) doc.graph.add_node(id, label);
  for (auto& pe : pending) doc.graph.add_edge(pe.src, pe.tgt, std::move(pe.label));
  result.doc = std::move(doc);
  return result;
}

ContinuationResult parse_continuation(const ParsedDocument& partial, const std::string& generated) {
  ContinuationResult result;
  NodeTable table;
  for (const auto& [id, label] : partial.graph.nodes) table.defined.emplace(id, label);

  Continuation cont;
  struct PendingEdge {
    NodeId src, tgt;
    Label label;
  };
  std::vector<PendingEdge> pending;

  std::vector<std::string> lines = split_lines(generated);
  bool first = true;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const int lineNo = static_cast<int>(i + 1);
    if (is_blank(lines[i])) break;  // stop marker
    ParseError err;
    auto edge = parse_edge_line(lines[i], /*allowMissingPrefix=*/first, err);
    first = false;
    if (!edge) {
      err.lineNumber = lineNo;
      result.error = err;
      return result;
    }
    std::optional<ParseError> e;
    Label edgeLabel = edge_label_of(edge->edgeLabel, lineNo, e);
    if (e) {
      result.error = e;
      return result;
    }
    if ((e = table.apply(static_cast<NodeId>(edge->src), edge->srcLabel, lineNo))) {
      result.error = e;
      return result;
    }
    if ((e = table.apply(static_cast<NodeId>(edge->tgt), edge->tgtLabel, lineNo))) {
      result.error = e;
      return result;
    }
    pending.push_back({static_cast<NodeId>(edge->src), static_cast<NodeId>(edge->tgt),
                       std::move(edgeLabel)});
  }
  if (auto e = table.finish()) {
    result.error = e;
    return result;
  }
  for (const auto& [id, label] : table.defined)
    if (!partial.graph.has_node(id)) cont.newNodes.emplace(id, label);
  for (auto& pe : pending) cont.newEdges.push_back({pe.src, pe.tgt, std::move(pe.label)});
  result.continuation = std::move(cont);
  return result;
}

std::string write_continuation(const ParsedDocument& partial, const std::vector<Edge>& newEdges,
                               const std::map<NodeId, Label>& newNodes) {
  std::set<NodeId> introduced;
  for (const auto& [id, label] : partial.graph.nodes) introduced.insert(id);
  std::string out;
  for (const Edge& e : newEdges) {
    auto slot = [&](NodeId node) -> std::string {
      if (introduced.count(node)) return "_";
      introduced.insert(node);
      auto it = newNodes.find(node);
      return quote_segment(it != newNodes.end() ? it->second.to_text() : Label{}.to_text());
    };
    out += "e " + std::to_string(e.src) + " " + std::to_string(e.tgt) + " " +
           quote_segment(e.label.to_text()) + " " + slot(e.src) + " " + slot(e.tgt) + "\n";
  }
  return out;
}

LabeledGraph completed_graph(const ParsedDocument& partial, const Continuation& cont) {
  LabeledGraph g = partial.graph;
  for (const auto& [id, label] : cont.newNodes) g.add_node(id, label);
  for (const auto& e : cont.newEdges) g.add_edge(e.src, e.tgt, e.label);
  return g;
}

}  // namespace ramc
