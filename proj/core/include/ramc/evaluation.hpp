#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nlohmann/json.hpp"
#include "ramc/diff.hpp"
#include "ramc/edgelist.hpp"
#include "ramc/embedding.hpp"
#include "ramc/generation.hpp"
#include "ramc/prompting.hpp"

namespace ramc {

enum class CorrectnessLevel {
  FormatIncorrect = 0,
  Format = 1,
  Structure = 2,
  ChangeStructure = 3,
  TypeStructure = 4,
  ExactMatch = 5,
};

const char* to_string(CorrectnessLevel level);
std::optional<CorrectnessLevel> correctness_level_from_string(const std::string& name);

/// Everything needed to prompt and grade one task.
struct TaskContext {
  std::string taskId;
  CompletionTask task;
  EdgeListDocument partialDoc;            // prompt-side serialization
  ParsedDocument partialParsed;           // local-id space
  std::map<NodeId, NodeId> anchors;       // doc-local node -> ground-truth node
  TaskFixture fixture;                    // hidden ground-truth continuation
};

TaskContext make_task_context(const CompletionTask& task, const std::string& taskId, long graphId);

struct Assessment {
  CorrectnessLevel level = CorrectnessLevel::FormatIncorrect;
  bool anyCorrectEdge = false;
};

/// Grades a candidate on the ladder: parse, then anchored isomorphism against
/// the ground truth under NONE/CHANGE/TYPE projections, then FULL with
/// fresh-id abstraction. anyCorrectEdge is true when at least one generated
/// edge maps (TYPE labels, anchor-consistent) onto a removed ground-truth
/// edge.
Assessment assess(const CompletionCandidate& candidate, const TaskContext& ctx);

/// Deterministic per-repository split: every repository with at least two
/// samples contributes to both sides; single-sample repositories go to train.
std::pair<std::vector<SimpleChangeGraph>, std::vector<SimpleChangeGraph>> split_train_test(
    const std::vector<SimpleChangeGraph>& samples, double ratio, std::uint64_t seed);

enum class RetrievalMode { Semantic, Random };
enum class CompletionMode { SingleEdge, MultiEdge };

struct ExperimentConfig {
  double trainRatio = 0.75;
  int maxFewShots = 12;
  RetrievalMode retrieval = RetrievalMode::Semantic;
  CompletionMode completion = CompletionMode::MultiEdge;
  std::string backendSpec = "mock:echo-gt";
  std::string embedderSpec = "hash";  // "hash" or "api:<model>"
  std::uint64_t seed = 0;
  int sampleCap = -1;  // < 0: no cap
  int promptBudget = 8000;
  int numSamples = 1;
  double temperature = 0.0;
  int gradeBestOf = 1;
  int jobs = 1;
  bool systemInstruction = true;
  bool keepTranscripts = false;
  std::string logDir;  // when set, prompt/response transcripts per task

  /// Test hook: replaces retrieval for both modes when set.
  std::function<std::vector<FewShot>(const std::string& taskId, const std::string& queryText)>
      retrievalOverride;
};

struct EvaluationRecord {
  std::string taskId;
  int candidateRank = 0;
  CorrectnessLevel level = CorrectnessLevel::FormatIncorrect;
  bool anyCorrectEdge = false;
  int removedEdgeCount = 0;
  int scgSize = 0;  // ground-truth nodes + edges
  int fewShotCount = 0;
  bool similarPatternInContext = false;
  double retrievalMs = 0.0;
  double generationMs = 0.0;
  double gradingMs = 0.0;
  std::optional<bool> semantic;  // imported manual judgment
};

struct ExperimentReport {
  std::vector<EvaluationRecord> records;
  int infraFailures = 0;
  int oversizedSkipped = 0;
  nlohmann::ordered_json configEcho;
  std::map<std::string, std::string> transcripts;  // taskId -> prompt text (optional)

  /// Percentage of records graded at or above the level, in [0, 100].
  double level_percent(CorrectnessLevel level) const;
  double any_correct_edge_percent() const;
  std::optional<double> semantic_percent() const;

  /// Rendered table mirroring the per-level layout.
  std::string table() const;

  nlohmann::ordered_json to_json() const;
  static ExperimentReport from_json(const nlohmann::ordered_json& j);
  /// Writes the summary document to `file` and the line-delimited records to
  /// the sibling `<stem>.records.jsonl`.
  void save(const std::filesystem::path& file) const;
  static ExperimentReport load(const std::filesystem::path& file);
};

std::filesystem::path report_records_path(const std::filesystem::path& file);

struct Dataset {
  std::vector<Repository> repositories;
};

Dataset load_dataset(const std::vector<std::filesystem::path>& dirs);

/// Diffs consecutive revisions and returns the SCG components that carry at
/// least one edge (the serialization cannot express edgeless graphs).
/// Throws when a repository has fewer than two revisions.
std::vector<SimpleChangeGraph> collect_samples(const Dataset& dataset);

struct IngestStats {
  int revisionPairs = 0;
  int components = 0;
  int edgelessSkipped = 0;
  int deduped = 0;  // kept after duplicate filtering
};

/// Serializes, embeds, and stores samples (duplicate SCGs dropped first).
VectorStore build_store(const std::vector<SimpleChangeGraph>& samples, const Embedder& embedder,
                        IngestStats* stats = nullptr);

std::unique_ptr<Embedder> make_embedder(const std::string& spec);

/// The full retrieval-augmented run: split, build the store from the train
/// side, prompt and grade every eligible test task (components with >= 2
/// edges), and aggregate per-level percentages. Infrastructure failures are
/// counted separately, never silently dropped.
ExperimentReport run_experiment(const Dataset& dataset, const ExperimentConfig& cfg);

/// Merges manual semantic labels (line-delimited {taskId, semantic, note}
/// records) into the report. Unknown task ids and conflicting duplicates are
/// errors.
void import_semantic_labels(ExperimentReport& report, const std::filesystem::path& annotations);

}  // namespace ramc
