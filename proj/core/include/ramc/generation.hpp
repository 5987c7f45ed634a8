#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ramc/edgelist.hpp"
#include "ramc/http.hpp"
#include "ramc/model.hpp"
#include "ramc/prompting.hpp"

namespace ramc {

struct TokenOption {
  std::string token;
  double probability;  // in (0, 1], listed descending
};

/// Completion-style capability: next-token distributions over a text prefix.
class TokenBackend {
 public:
  virtual ~TokenBackend() = default;
  virtual std::vector<TokenOption> next_token_distribution(const std::string& prefix) const = 0;
};

struct ChatMessage {
  std::string role;
  std::string content;
};

/// Chat capability: whole completions for a message list.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string complete(const std::vector<ChatMessage>& messages, double temperature,
                               int maxTokens) = 0;
};

struct BeamConfig {
  double tokenThreshold = 0.05;   // p_min per sampled token
  int beamWidth = 5;              // branching cap per token step
  double edgeProbDropRatio = 0.1; // completion on a drop vs the previous edge
  double minTotalProb = 1e-4;     // completion when the candidate gets unlikely
  int maxEdges = 10;
};

struct CompletionCandidate {
  std::vector<Edge> newEdges;        // local-id space of the partial document
  std::map<NodeId, Label> newNodes;
  LabeledGraph completedGraph;       // partial plus the generated edges
  double score = 1.0;                // product of sampled probabilities (1.0 in chat mode)
  std::string rawText;
  bool formatFailure = false;        // unparseable chat response, kept for grading
};

struct BeamStats {
  int syntaxRejected = 0;
  int metamodelRejected = 0;
  int isoPruned = 0;
};

/// Token-wise candidate generation: extend every incomplete candidate by each
/// next-edge continuation whose token path stays above the threshold, reject
/// extensions that do not parse or violate the metamodel, prune isomorphic
/// duplicates, and move candidates to the output on a stop marker, probability
/// floor, edge-probability drop, or the edge cap. Sorted by score descending.
/// The backend sees prefixes of the form `partialDoc.text + "\n" + generated`.
/// Throws std::invalid_argument when the partial document does not parse.
std::vector<CompletionCandidate> generate_candidates_beam(const EdgeListDocument& partialDoc,
                                                          const TokenBackend& backend,
                                                          const Metamodel& mm,
                                                          const BeamConfig& cfg = {},
                                                          BeamStats* stats = nullptr);

/// Chat messages for an assembled prompt. With `systemInstruction` the
/// instruction travels as a system message, otherwise everything is one user
/// message.
std::vector<ChatMessage> to_messages(const AssembledPrompt& prompt, bool systemInstruction = true);

/// Samples whole completions and parses each as a continuation; unparseable
/// responses are kept as flagged format failures, isomorphic duplicates are
/// pruned, arrival order is preserved. TransportError propagates to the caller
/// (counted as an infrastructure failure, not a wrong completion).
std::vector<CompletionCandidate> generate_candidates_chat(const AssembledPrompt& prompt,
                                                          const ParsedDocument& partial,
                                                          ChatBackend& backend, double temperature,
                                                          int numSamples, int maxTokens = 1024,
                                                          bool systemInstruction = true);

// --- deterministic backends -------------------------------------------------

/// Token backend scripted as a map from generated-so-far suffix to the next
/// token options. A missing entry at the start of a line acts as a stop.
class ScriptedTokenBackend : public TokenBackend {
 public:
  ScriptedTokenBackend(std::string basePrefix,
                       std::map<std::string, std::vector<TokenOption>> script)
      : basePrefix_(std::move(basePrefix)), script_(std::move(script)) {}

  std::vector<TokenOption> next_token_distribution(const std::string& prefix) const override;

 private:
  std::string basePrefix_;
  std::map<std::string, std::vector<TokenOption>> script_;
};

/// Chat backend cycling through a fixed list of responses.
class ScriptedChatBackend : public ChatBackend {
 public:
  explicit ScriptedChatBackend(std::vector<std::string> responses)
      : responses_(std::move(responses)) {}
  std::string complete(const std::vector<ChatMessage>&, double, int) override;

 private:
  std::vector<std::string> responses_;
  std::size_t next_ = 0;
};

/// Oracle information a test-only backend may consult.
struct TaskFixture {
  std::string groundTruthContinuation;  // edge lines in the partial document's id space
};

/// Emits the hidden ground-truth continuation verbatim. Test-only.
class EchoGtBackend : public ChatBackend {
 public:
  explicit EchoGtBackend(std::string continuation) : continuation_(std::move(continuation)) {}
  std::string complete(const std::vector<ChatMessage>&, double, int) override;

 private:
  std::string continuation_;
};

/// Pattern completion: finds a few-shot graph in the prompt whose structure
/// properly embeds the partial (TYPE projection) and emits its remaining edges
/// with node-id substitution; emits a stop when nothing matches.
class CopySimilarBackend : public ChatBackend {
 public:
  std::string complete(const std::vector<ChatMessage>& messages, double, int) override;
};

/// Corrupts another backend's output at a stated correctness-ladder level.
class MutateBackend : public ChatBackend {
 public:
  enum class Level { Format, Structure, Change, Type };

  MutateBackend(Level level, std::shared_ptr<ChatBackend> inner)
      : level_(level), inner_(std::move(inner)) {}

  std::string complete(const std::vector<ChatMessage>& messages, double temperature,
                       int maxTokens) override;

 private:
  Level level_;
  std::shared_ptr<ChatBackend> inner_;
};

/// Live chat-completions client (LLM_API_BASE/LLM_API_KEY/LLM_MODEL), with an
/// optional requests-per-minute limiter shared across threads.
class ApiChatBackend : public ChatBackend {
 public:
  ApiChatBackend(std::string baseUrl, std::string apiKey, std::string model,
                 int requestsPerMinute = 0);
  static std::shared_ptr<ApiChatBackend> from_env();

  std::string complete(const std::vector<ChatMessage>& messages, double temperature,
                       int maxTokens) override;

 private:
  std::string baseUrl_;
  std::string apiKey_;
  std::string model_;
  int requestsPerMinute_;
};

/// Factory for per-task chat backends. Mock factories may consult the task
/// fixture (echo-gt requires one); the live factory ignores it.
using ChatBackendFactory = std::function<std::shared_ptr<ChatBackend>(const TaskFixture*)>;

/// Catalog of deterministic mock backends: echo-gt, copy-similar, and
/// mutate(format|structure|change|type) wrappers over echo-gt.
const std::map<std::string, ChatBackendFactory>& mock_backends();

/// Resolves "mock:<name>" via the catalog and "api" via environment variables.
ChatBackendFactory resolve_chat_backend(const std::string& spec);

}  // namespace ramc
