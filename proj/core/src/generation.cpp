#include "ramc/generation.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <mutex>
#include <thread>

#include "nlohmann/json.hpp"

namespace ramc {

namespace {

bool check_metamodel(const Metamodel& mm, const LabeledGraph& completed,
                     const std::vector<Edge>& newEdges, const std::map<NodeId, Label>& newNodes) {
  for (const auto& [id, label] : newNodes) {
    const std::string type = label.get_or(key::kType, "");
    if (type == element::kAttributeValueChange) continue;
    const std::string cls = label.get_or(key::kClassName, "");
    if (cls.empty() || !mm.declares_class(cls)) return false;
  }
  for (const Edge& e : newEdges) {
    const std::string type = e.label.get_or(key::kType, "");
    if (type == element::kAttributeChange) continue;  // attribute apparatus, not a reference
    const std::string ref = e.label.get_or(key::kReferenceTypeName, "");
    const std::string srcCls = completed.nodes.at(e.src).get_or(key::kClassName, "");
    const std::string tgtCls = completed.nodes.at(e.tgt).get_or(key::kClassName, "");
    if (!mm.declares_reference(ref, srcCls, tgtCls)) return false;
  }
  return true;
}

struct BeamItem {
  std::string continuation;
  double score = 1.0;
  std::vector<double> edgeProbs;
  bool stopped = false;
  Continuation parsed;
  LabeledGraph completed;
  std::uint64_t graphHash = 0;
};

struct SampledExtension {
  std::string delta;  // one full edge line, empty for a stop
  double probability;
  bool stop;
};

constexpr int kMaxTokensPerEdge = 64;

void explore_tokens(const TokenBackend& backend, const std::string& base,
                    const std::string& delta, double prob, int depth, const BeamConfig& cfg,
                    std::vector<SampledExtension>& out) {
  auto options = backend.next_token_distribution(base + delta);
  std::vector<TokenOption> kept;
  for (const auto& opt : options) {
    if (opt.probability >= cfg.tokenThreshold) kept.push_back(opt);
    if (static_cast<int>(kept.size()) >= cfg.beamWidth) break;
  }
  if (kept.empty()) {
    if (delta.empty()) out.push_back({"", prob, true});  // silence at line start: stop
    return;
  }
  for (const auto& opt : kept) {
    const double p = prob * opt.probability;
    if (delta.empty() && opt.token == "\n") {
      out.push_back({"", p, true});  // blank line sampled: explicit stop marker
      continue;
    }
    const std::string next = delta + opt.token;
    if (next.find('\n') != std::string::npos) {
      out.push_back({next, p, false});
    } else if (depth < kMaxTokensPerEdge) {
      explore_tokens(backend, base, next, p, depth + 1, cfg, out);
    }
  }
}

bool is_complete(const BeamItem& item, const BeamConfig& cfg) {
  if (item.stopped) return true;
  if (item.score < cfg.minTotalProb) return true;
  const std::size_t n = item.edgeProbs.size();
  if (n >= 2 && item.edgeProbs[n - 1] < cfg.edgeProbDropRatio * item.edgeProbs[n - 2]) return true;
  if (static_cast<int>(n) >= cfg.maxEdges) return true;
  return false;
}

}  // namespace

std::vector<CompletionCandidate> generate_candidates_beam(const EdgeListDocument& partialDoc,
                                                          const TokenBackend& backend,
                                                          const Metamodel& mm,
                                                          const BeamConfig& cfg,
                                                          BeamStats* stats) {
  BeamStats local;
  BeamStats& st = stats ? *stats : local;
  auto parsedDoc = parse(partialDoc.text);
  if (!parsedDoc.ok())
    throw std::invalid_argument("generate_candidates_beam: partial does not parse (" +
                                parsedDoc.error->message + ")");
  const ParsedDocument& partial = *parsedDoc.doc;
  const std::string base = partialDoc.text + "\n";

  std::vector<BeamItem> incomplete(1);
  std::vector<BeamItem> complete;

  auto isomorphic_to_any = [&](const BeamItem& item, const std::vector<BeamItem>& xs) {
    for (const auto& other : xs) {
      if (other.graphHash != item.graphHash) continue;
      if (is_isomorphic(item.completed, other.completed, LabelProjection::Full)) return true;
    }
    return false;
  };

  while (!incomplete.empty()) {
    std::vector<BeamItem> kept;
    for (const BeamItem& item : incomplete) {
      std::vector<SampledExtension> extensions;
      explore_tokens(backend, base + item.continuation, "", 1.0, 0, cfg, extensions);
      for (const SampledExtension& ext : extensions) {
        BeamItem next = item;
        next.score *= ext.probability;
        if (ext.stop) {
          next.stopped = true;
        } else {
          next.continuation += ext.delta;
          next.edgeProbs.push_back(ext.probability);
          // checkCorrectSCG: the continuation must parse and every generated
          // edge must itself be a change.
          auto parsedCont = parse_continuation(partial, next.continuation);
          if (!parsedCont.ok()) {
            st.syntaxRejected++;
            continue;
          }
          bool allChanged = true;
          for (const Edge& e : parsedCont.continuation->newEdges)
            if (!is_changed(e.label)) allChanged = false;
          if (!allChanged) {
            st.syntaxRejected++;
            continue;
          }
          next.parsed = std::move(*parsedCont.continuation);
          next.completed = completed_graph(partial, next.parsed);
          if (!check_metamodel(mm, next.completed, next.parsed.newEdges, next.parsed.newNodes)) {
            st.metamodelRejected++;
            continue;
          }
          next.graphHash = wl_hash(next.completed, LabelProjection::Full);
          if (isomorphic_to_any(next, kept) || isomorphic_to_any(next, complete)) {
            st.isoPruned++;
            continue;
          }
        }
        kept.push_back(std::move(next));
      }
    }
    incomplete.clear();
    for (BeamItem& item : kept) {
      if (item.completed.nodes.empty()) item.completed = partial.graph;
      if (item.graphHash == 0) item.graphHash = wl_hash(item.completed, LabelProjection::Full);
      if (is_complete(item, cfg))
        complete.push_back(std::move(item));
      else
        incomplete.push_back(std::move(item));
    }
  }

  std::stable_sort(complete.begin(), complete.end(),
                   [](const BeamItem& a, const BeamItem& b) { return a.score > b.score; });
  std::vector<CompletionCandidate> out;
  out.reserve(complete.size());
  for (BeamItem& item : complete) {
    CompletionCandidate c;
    c.newEdges = std::move(item.parsed.newEdges);
    c.newNodes = std::move(item.parsed.newNodes);
    c.completedGraph = std::move(item.completed);
    c.score = item.score;
    c.rawText = std::move(item.continuation);
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<ChatMessage> to_messages(const AssembledPrompt& prompt, bool systemInstruction) {
  if (systemInstruction)
    return {{"system", prompt.instructionText}, {"user", prompt.bodyText}};
  return {{"user", prompt.text}};
}

std::vector<CompletionCandidate> generate_candidates_chat(const AssembledPrompt& prompt,
                                                          const ParsedDocument& partial,
                                                          ChatBackend& backend, double temperature,
                                                          int numSamples, int maxTokens,
                                                          bool systemInstruction) {
  if (numSamples < 1) throw std::invalid_argument("generate_candidates_chat: numSamples >= 1");
  const auto messages = to_messages(prompt, systemInstruction);

  std::vector<CompletionCandidate> out;
  for (int i = 0; i < numSamples; ++i) {
    const std::string text = backend.complete(messages, temperature, maxTokens);
    CompletionCandidate c;
    c.rawText = text;
    auto parsed = parse_continuation(partial, text);
    if (!parsed.ok()) {
      c.formatFailure = true;
      out.push_back(std::move(c));
      continue;
    }
    c.newEdges = parsed.continuation->newEdges;
    c.newNodes = parsed.continuation->newNodes;
    c.completedGraph = completed_graph(partial, *parsed.continuation);
    bool duplicate = false;
    for (const auto& prev : out) {
      if (prev.formatFailure) continue;
      if (is_isomorphic(c.completedGraph, prev.completedGraph, LabelProjection::Full)) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) out.push_back(std::move(c));
  }
  return out;
}

// --- deterministic backends -------------------------------------------------

std::vector<TokenOption> ScriptedTokenBackend::next_token_distribution(
    const std::string& prefix) const {
  std::string suffix = prefix;
  if (prefix.rfind(basePrefix_, 0) == 0) suffix = prefix.substr(basePrefix_.size());
  auto it = script_.find(suffix);
  if (it == script_.end()) return {};
  return it->second;
}

std::string ScriptedChatBackend::complete(const std::vector<ChatMessage>&, double, int) {
  if (responses_.empty()) return "\n";
  const std::string& r = responses_[next_ % responses_.size()];
  ++next_;
  return r;
}

std::string EchoGtBackend::complete(const std::vector<ChatMessage>&, double, int) {
  return continuation_ + "\n";
}

namespace {

/// Splits the prompt body into graph documents and parses them. The last part
/// is the to-be-completed partial.
struct PromptGraphs {
  std::vector<ParsedDocument> fewShots;
  std::optional<ParsedDocument> partial;
};

PromptGraphs parse_prompt_graphs(const std::vector<ChatMessage>& messages) {
  PromptGraphs out;
  if (messages.empty()) return out;
  std::string body = messages.back().content;
  // Strip a trailing completion cue if present.
  if (body.size() >= 3 && body.compare(body.size() - 3, 3, "\ne ") == 0)
    body.resize(body.size() - 3);

  std::vector<std::string> parts;
  const std::string sep = kGraphSeparator;
  std::size_t pos = 0;
  for (;;) {
    std::size_t next = body.find(sep, pos);
    if (next == std::string::npos) {
      parts.push_back(body.substr(pos));
      break;
    }
    parts.push_back(body.substr(pos, next - pos));
    pos = next + sep.size();
  }
  // The instruction precedes the first graph; cut everything before the last
  // "t #" in the first part.
  if (!parts.empty()) {
    std::size_t t = parts.front().rfind("t # ");
    if (t != std::string::npos) parts.front() = parts.front().substr(t);
  }
  for (std::size_t i = 0; i < parts.size(); ++i) {
    auto res = parse(parts[i]);
    if (!res.ok()) continue;
    if (i + 1 == parts.size())
      out.partial = std::move(*res.doc);
    else
      out.fewShots.push_back(std::move(*res.doc));
  }
  return out;
}

}  // namespace

std::string CopySimilarBackend::complete(const std::vector<ChatMessage>& messages, double, int) {
  PromptGraphs graphs = parse_prompt_graphs(messages);
  if (!graphs.partial) return "\n";
  const LabeledGraph& partial = graphs.partial->graph;

  for (const ParsedDocument& fs : graphs.fewShots) {
    if (fs.graph.edge_count() <= partial.edge_count()) continue;  // nothing left to emit
    std::map<NodeId, NodeId> mapping;
    if (!find_embedding(partial, fs.graph, LabelProjection::Type, {}, &mapping)) continue;

    // Consume one few-shot edge per partial edge (TYPE labels, count-aware).
    std::vector<bool> used(fs.graph.edges.size(), false);
    bool consistent = true;
    for (const Edge& pe : partial.edges) {
      const Label want = project(pe.label, LabelProjection::Type);
      bool found = false;
      for (std::size_t i = 0; i < fs.graph.edges.size(); ++i) {
        if (used[i]) continue;
        const Edge& fe = fs.graph.edges[i];
        if (fe.src != mapping.at(pe.src) || fe.tgt != mapping.at(pe.tgt)) continue;
        if (project(fe.label, LabelProjection::Type) != want) continue;
        used[i] = true;
        found = true;
        break;
      }
      if (!found) {
        consistent = false;
        break;
      }
    }
    if (!consistent) continue;

    // Remaining edges, with node ids substituted into the partial's id space.
    std::map<NodeId, NodeId> back;  // few-shot node -> output id
    NodeId nextId = 0;
    for (const auto& [id, label] : partial.nodes) nextId = std::max(nextId, id + 1);
    for (const auto& [p, f] : mapping) back[f] = p;

    std::vector<Edge> newEdges;
    std::map<NodeId, Label> newNodes;
    auto substituted = [&](NodeId fsNode) {
      auto it = back.find(fsNode);
      if (it != back.end()) return it->second;
      NodeId fresh = nextId++;
      back[fsNode] = fresh;
      newNodes[fresh] = fs.graph.nodes.at(fsNode);
      return fresh;
    };
    for (std::size_t i = 0; i < fs.graph.edges.size(); ++i) {
      if (used[i]) continue;
      const Edge& fe = fs.graph.edges[i];
      NodeId s = substituted(fe.src);
      NodeId t = substituted(fe.tgt);
      newEdges.push_back({s, t, fe.label});
    }
    if (newEdges.empty()) continue;
    return write_continuation(*graphs.partial, newEdges, newNodes) + "\n";
  }
  return "\n";  // no matching pattern: stop
}

std::string MutateBackend::complete(const std::vector<ChatMessage>& messages, double temperature,
                                    int maxTokens) {
  const std::string inner = inner_->complete(messages, temperature, maxTokens);
  if (level_ == Level::Format) return "this is not an edge list\n";

  PromptGraphs graphs = parse_prompt_graphs(messages);
  if (!graphs.partial) return inner;
  auto parsed = parse_continuation(*graphs.partial, inner);
  if (!parsed.ok() || parsed.continuation->newEdges.empty()) return inner;

  std::vector<Edge> edges = parsed.continuation->newEdges;
  std::map<NodeId, Label> nodes = parsed.continuation->newNodes;
  Edge& first = edges.front();
  switch (level_) {
    case Level::Format:
      break;
    case Level::Structure:
      // One extra self-loop: parses fine, never matches the ground truth shape.
      edges.push_back({first.src, first.src, first.label});
      break;
    case Level::Change: {
      const std::string ct = first.label.get_or(key::kChangeType, "");
      first.label.set(key::kChangeType, ct == change::kAdd ? change::kRemove : change::kAdd);
      break;
    }
    case Level::Type: {
      if (first.label.has(key::kReferenceTypeName))
        first.label.set(key::kReferenceTypeName, "mutatedReference");
      else
        first.label.set(key::kType, "mutatedType");
      break;
    }
  }
  return write_continuation(*graphs.partial, edges, nodes) + "\n";
}

// --- live backend -------------------------------------------------------------

namespace {
std::mutex g_rateMutex;
std::chrono::steady_clock::time_point g_lastRequest{};
}  // namespace

ApiChatBackend::ApiChatBackend(std::string baseUrl, std::string apiKey, std::string model,
                               int requestsPerMinute)
    : baseUrl_(std::move(baseUrl)),
      apiKey_(std::move(apiKey)),
      model_(std::move(model)),
      requestsPerMinute_(requestsPerMinute) {}

std::shared_ptr<ApiChatBackend> ApiChatBackend::from_env() {
  const char* base = std::getenv("LLM_API_BASE");
  const char* key = std::getenv("LLM_API_KEY");
  const char* model = std::getenv("LLM_MODEL");
  if (!base || !model)
    throw std::runtime_error("LLM_API_BASE and LLM_MODEL must be set for the api backend");
  return std::make_shared<ApiChatBackend>(base, key ? key : "", model);
}

std::string ApiChatBackend::complete(const std::vector<ChatMessage>& messages, double temperature,
                                     int maxTokens) {
  if (requestsPerMinute_ > 0) {
    std::lock_guard<std::mutex> lock(g_rateMutex);
    const auto interval = std::chrono::milliseconds(60000 / requestsPerMinute_);
    const auto now = std::chrono::steady_clock::now();
    if (g_lastRequest.time_since_epoch().count() != 0 && now - g_lastRequest < interval)
      std::this_thread::sleep_for(interval - (now - g_lastRequest));
    g_lastRequest = std::chrono::steady_clock::now();
  }
  nlohmann::json body;
  body["model"] = model_;
  body["temperature"] = temperature;
  body["max_tokens"] = maxTokens;
  body["messages"] = nlohmann::json::array();
  for (const auto& m : messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});
  const std::string response = http_post_json(baseUrl_, "/v1/chat/completions", apiKey_, body.dump());
  nlohmann::json j = nlohmann::json::parse(response);
  return j.at("choices").at(0).at("message").at("content").get<std::string>();
}

const std::map<std::string, ChatBackendFactory>& mock_backends() {
  static const std::map<std::string, ChatBackendFactory> catalog = [] {
    std::map<std::string, ChatBackendFactory> m;
    m["echo-gt"] = [](const TaskFixture* fixture) -> std::shared_ptr<ChatBackend> {
      if (!fixture) throw std::invalid_argument("echo-gt requires a task fixture");
      return std::make_shared<EchoGtBackend>(fixture->groundTruthContinuation);
    };
    m["copy-similar"] = [](const TaskFixture*) -> std::shared_ptr<ChatBackend> {
      return std::make_shared<CopySimilarBackend>();
    };
    auto mutate = [](MutateBackend::Level level) {
      return [level](const TaskFixture* fixture) -> std::shared_ptr<ChatBackend> {
        if (!fixture) throw std::invalid_argument("mutate wrappers require a task fixture");
        auto inner = std::make_shared<EchoGtBackend>(fixture->groundTruthContinuation);
        return std::make_shared<MutateBackend>(level, inner);
      };
    };
    m["mutate(format)"] = mutate(MutateBackend::Level::Format);
    m["mutate(structure)"] = mutate(MutateBackend::Level::Structure);
    m["mutate(change)"] = mutate(MutateBackend::Level::Change);
    m["mutate(type)"] = mutate(MutateBackend::Level::Type);
    return m;
  }();
  return catalog;
}

ChatBackendFactory resolve_chat_backend(const std::string& spec) {
  if (spec.rfind("mock:", 0) == 0) {
    const std::string name = spec.substr(5);
    auto it = mock_backends().find(name);
    if (it == mock_backends().end())
      throw std::invalid_argument("unknown mock backend: " + name);
    return it->second;
  }
  if (spec == "api") {
    auto backend = ApiChatBackend::from_env();
    return [backend](const TaskFixture*) -> std::shared_ptr<ChatBackend> { return backend; };
  }
  throw std::invalid_argument("unknown backend spec: " + spec + " (use mock:<name> or api)");
}

}  // namespace ramc
