#include "ramc/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "ramc/rng.hpp"

namespace ramc {

using ordered_json = nlohmann::ordered_json;

const char* to_string(CorrectnessLevel level) {
  switch (level) {
    case CorrectnessLevel::FormatIncorrect: return "FORMAT_INCORRECT";
    case CorrectnessLevel::Format: return "FORMAT";
    case CorrectnessLevel::Structure: return "STRUCTURE";
    case CorrectnessLevel::ChangeStructure: return "CHANGE_STRUCTURE";
    case CorrectnessLevel::TypeStructure: return "TYPE_STRUCTURE";
    case CorrectnessLevel::ExactMatch: return "EXACT_MATCH";
  }
  return "?";
}

std::optional<CorrectnessLevel> correctness_level_from_string(const std::string& name) {
  for (CorrectnessLevel l :
       {CorrectnessLevel::FormatIncorrect, CorrectnessLevel::Format, CorrectnessLevel::Structure,
        CorrectnessLevel::ChangeStructure, CorrectnessLevel::TypeStructure,
        CorrectnessLevel::ExactMatch})
    if (name == to_string(l)) return l;
  return std::nullopt;
}

TaskContext make_task_context(const CompletionTask& task, const std::string& taskId, long graphId) {
  TaskContext ctx;
  ctx.taskId = taskId;
  ctx.task = task;
  ctx.partialDoc = serialize_for_prompt(task.partial.graph, graphId);
  auto parsed = parse(ctx.partialDoc.text);
  if (!parsed.ok())
    throw std::logic_error("partial document does not re-parse: " + parsed.error->message);
  ctx.partialParsed = std::move(*parsed.doc);

  // Partial nodes keep their ground-truth ids, so the doc table anchors the
  // local ids directly onto ground-truth nodes.
  for (std::size_t local = 0; local < ctx.partialDoc.localToGraph.size(); ++local)
    ctx.anchors[static_cast<NodeId>(local)] = ctx.partialDoc.localToGraph[local];

  // Ground-truth continuation: the removed edges, in ground-truth order,
  // expressed in the document's id space.
  std::map<NodeId, NodeId> gtToLocal;
  for (std::size_t local = 0; local < ctx.partialDoc.localToGraph.size(); ++local)
    gtToLocal[ctx.partialDoc.localToGraph[local]] = static_cast<NodeId>(local);
  NodeId nextLocal = static_cast<NodeId>(ctx.partialDoc.localToGraph.size());

  std::vector<Edge> newEdges;
  std::map<NodeId, Label> newNodes;
  const LabeledGraph& gt = task.groundTruth.graph;
  auto localOf = [&](NodeId gtNode) {
    auto it = gtToLocal.find(gtNode);
    if (it != gtToLocal.end()) return it->second;
    NodeId fresh = nextLocal++;
    gtToLocal[gtNode] = fresh;
    newNodes[fresh] = truncate_label_values(gt.nodes.at(gtNode));
    return fresh;
  };
  for (std::size_t idx : task.removedEdgeIndices) {
    const Edge& e = gt.edges[idx];
    NodeId s = localOf(e.src);
    NodeId t = localOf(e.tgt);
    newEdges.push_back({s, t, truncate_label_values(e.label)});
  }
  ctx.fixture.groundTruthContinuation = write_continuation(ctx.partialParsed, newEdges, newNodes);
  return ctx;
}

Assessment assess(const CompletionCandidate& candidate, const TaskContext& ctx) {
  Assessment out;
  if (candidate.formatFailure) return out;
  out.level = CorrectnessLevel::Format;

  const LabeledGraph& cand = candidate.completedGraph;
  const LabeledGraph& gt = ctx.task.groundTruth.graph;
  const auto& anchors = ctx.anchors;

  if (is_isomorphic(cand, gt, LabelProjection::None, anchors)) {
    out.level = CorrectnessLevel::Structure;
    if (is_isomorphic(cand, gt, LabelProjection::Change, anchors)) {
      out.level = CorrectnessLevel::ChangeStructure;
      if (is_isomorphic(cand, gt, LabelProjection::Type, anchors)) {
        out.level = CorrectnessLevel::TypeStructure;
        if (is_isomorphic(without_attribute_ids(truncate_label_values(cand)),
                          without_attribute_ids(truncate_label_values(gt)), LabelProjection::Full,
                          anchors))
          out.level = CorrectnessLevel::ExactMatch;
      }
    }
  }

  // A generated edge counts as correct when it maps onto a removed
  // ground-truth edge with matching TYPE labels on the edge and both
  // endpoints, consistently with the anchor map.
  for (const Edge& e : candidate.newEdges) {
    const Label el = project(e.label, LabelProjection::Type);
    const Label sl = project(cand.nodes.at(e.src), LabelProjection::Type);
    const Label tl = project(cand.nodes.at(e.tgt), LabelProjection::Type);
    for (std::size_t idx : ctx.task.removedEdgeIndices) {
      const Edge& f = gt.edges[idx];
      if (project(f.label, LabelProjection::Type) != el) continue;
      if (project(gt.nodes.at(f.src), LabelProjection::Type) != sl) continue;
      if (project(gt.nodes.at(f.tgt), LabelProjection::Type) != tl) continue;
      auto as = anchors.find(e.src);
      if (as != anchors.end() && as->second != f.src) continue;
      auto at = anchors.find(e.tgt);
      if (at != anchors.end() && at->second != f.tgt) continue;
      out.anyCorrectEdge = true;
      break;
    }
    if (out.anyCorrectEdge) break;
  }
  return out;
}

std::pair<std::vector<SimpleChangeGraph>, std::vector<SimpleChangeGraph>> split_train_test(
    const std::vector<SimpleChangeGraph>& samples, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0))
    throw std::invalid_argument("split_train_test: ratio must lie strictly between 0 and 1");

  std::map<std::string, std::vector<std::size_t>> byRepo;
  for (std::size_t i = 0; i < samples.size(); ++i)
    byRepo[samples[i].provenance.repository].push_back(i);

  std::vector<SimpleChangeGraph> train, test;
  std::vector<std::size_t> trainIdx, testIdx;
  for (auto& [repo, indices] : byRepo) {
    Rng rng(hash_combine(seed, fnv1a(repo)));
    rng.shuffle(indices);
    std::size_t n = indices.size();
    std::size_t take = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n)));
    if (take == 0) take = 1;           // single-sample repositories go to train
    if (n >= 2 && take == n) take = n - 1;  // both sides represented
    for (std::size_t i = 0; i < n; ++i)
      (i < take ? trainIdx : testIdx).push_back(indices[i]);
  }
  std::sort(trainIdx.begin(), trainIdx.end());
  std::sort(testIdx.begin(), testIdx.end());
  for (std::size_t i : trainIdx) train.push_back(samples[i]);
  for (std::size_t i : testIdx) test.push_back(samples[i]);
  return {std::move(train), std::move(test)};
}

Dataset load_dataset(const std::vector<std::filesystem::path>& dirs) {
  Dataset ds;
  for (const auto& dir : dirs) ds.repositories.push_back(load_repository(dir));
  return ds;
}

std::vector<SimpleChangeGraph> collect_samples(const Dataset& dataset) {
  std::vector<SimpleChangeGraph> out;
  for (const auto& repo : dataset.repositories) {
    if (repo.revisions.size() < 2)
      throw std::runtime_error("repository " + repo.name + " needs >= 2 revisions");
    for (std::size_t i = 0; i + 1 < repo.revisions.size(); ++i) {
      DifferenceGraph d = diff(repo.revisions[i], repo.revisions[i + 1]);
      SimpleChangeGraph scg = extract_scg(d);
      char pair[32];
      std::snprintf(pair, sizeof pair, "r%03zu-r%03zu", i, i + 1);
      scg.provenance.repository = repo.name;
      scg.provenance.revisionPair = pair;
      for (auto& comp : scg_components(scg)) {
        if (comp.graph.edge_count() == 0) continue;  // not expressible as EdgeList
        out.push_back(std::move(comp));
      }
    }
  }
  return out;
}

VectorStore build_store(const std::vector<SimpleChangeGraph>& samples, const Embedder& embedder,
                        IngestStats* stats) {
  std::vector<SimpleChangeGraph> kept = dedup_corpus(samples);
  VectorStore store(embedder.tag(), embedder.dimension());
  long graphId = 0;
  for (const auto& scg : kept) {
    EdgeListDocument doc = serialize(scg, graphId++);
    StoredExample e;
    e.exampleId = scg.provenance.to_string();
    e.text = doc.text;
    e.vector = embedder.embed(doc.text);
    e.meta = scg.provenance;
    store.add(std::move(e));
  }
  if (stats) {
    stats->components = static_cast<int>(samples.size());
    stats->deduped = static_cast<int>(kept.size());
  }
  return store;
}

std::unique_ptr<Embedder> make_embedder(const std::string& spec) {
  if (spec == "hash") return std::make_unique<HashEmbedder>();
  if (spec.rfind("api:", 0) == 0)
    return ApiEmbedder::from_env(spec.substr(4), HashEmbedder::kDimension);
  if (spec == "api") return ApiEmbedder::from_env("default", HashEmbedder::kDimension);
  throw std::invalid_argument("unknown embedder spec: " + spec + " (use hash or api:<model>)");
}

double ExperimentReport::level_percent(CorrectnessLevel level) const {
  if (records.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& r : records)
    if (static_cast<int>(r.level) >= static_cast<int>(level)) ++hits;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(records.size());
}

double ExperimentReport::any_correct_edge_percent() const {
  if (records.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& r : records)
    if (r.anyCorrectEdge) ++hits;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(records.size());
}

std::optional<double> ExperimentReport::semantic_percent() const {
  bool any = false;
  std::size_t hits = 0;
  for (const auto& r : records) {
    if (!r.semantic.has_value()) continue;
    any = true;
    if (*r.semantic) ++hits;
  }
  if (!any || records.empty()) return std::nullopt;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(records.size());
}

namespace {

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string ExperimentReport::table() const {
  std::ostringstream out;
  const std::vector<std::pair<std::string, std::string>> cols = {
      {"Format", fmt2(level_percent(CorrectnessLevel::Format))},
      {"Structure", fmt2(level_percent(CorrectnessLevel::Structure))},
      {"Change Structure", fmt2(level_percent(CorrectnessLevel::ChangeStructure))},
      {"Type Structure", fmt2(level_percent(CorrectnessLevel::TypeStructure))},
      {"Exact Match", fmt2(level_percent(CorrectnessLevel::ExactMatch))},
      {"Correct Edge(s)", fmt2(any_correct_edge_percent())},
      {"Semantic", semantic_percent() ? fmt2(*semantic_percent()) : std::string("--")},
      {"Total Count", std::to_string(records.size())},
  };
  std::string header, row;
  for (const auto& [name, value] : cols) {
    const std::size_t width = std::max(name.size(), value.size()) + 2;
    header += name + std::string(width - name.size(), ' ');
    row += value + std::string(width - value.size(), ' ');
  }
  out << header << "\n" << row << "\n";
  if (infraFailures > 0) out << "infrastructure failures (excluded): " << infraFailures << "\n";
  if (oversizedSkipped > 0) out << "oversized partials skipped: " << oversizedSkipped << "\n";
  return out.str();
}

ordered_json ExperimentReport::to_json() const {
  ordered_json j;
  j["config"] = configEcho;
  ordered_json summary;
  summary["format"] = level_percent(CorrectnessLevel::Format);
  summary["structure"] = level_percent(CorrectnessLevel::Structure);
  summary["changeStructure"] = level_percent(CorrectnessLevel::ChangeStructure);
  summary["typeStructure"] = level_percent(CorrectnessLevel::TypeStructure);
  summary["exactMatch"] = level_percent(CorrectnessLevel::ExactMatch);
  summary["anyCorrectEdge"] = any_correct_edge_percent();
  if (auto s = semantic_percent()) summary["semantic"] = *s;
  summary["totalCount"] = records.size();
  summary["infraFailures"] = infraFailures;
  summary["oversizedSkipped"] = oversizedSkipped;

  // Breakdowns by few-shot count and similar-pattern-in-context.
  std::map<int, std::pair<int, int>> byFewShots;  // count -> (records, type-correct)
  std::map<bool, std::pair<int, int>> bySimilar;
  for (const auto& r : records) {
    auto& f = byFewShots[r.fewShotCount];
    f.first++;
    auto& s = bySimilar[r.similarPatternInContext];
    s.first++;
    if (static_cast<int>(r.level) >= static_cast<int>(CorrectnessLevel::TypeStructure)) {
      f.second++;
      s.second++;
    }
  }
  ordered_json fs = ordered_json::object();
  for (const auto& [k, v] : byFewShots)
    fs[std::to_string(k)] = {{"count", v.first}, {"typeStructureCorrect", v.second}};
  summary["byFewShotCount"] = fs;
  ordered_json sim = ordered_json::object();
  for (const auto& [k, v] : bySimilar)
    sim[k ? "similarInContext" : "noSimilarInContext"] = {{"count", v.first},
                                                          {"typeStructureCorrect", v.second}};
  summary["bySimilarPattern"] = sim;
  j["summary"] = summary;

  ordered_json recs = ordered_json::array();
  for (const auto& r : records) {
    ordered_json jr;
    jr["taskId"] = r.taskId;
    jr["candidateRank"] = r.candidateRank;
    jr["level"] = to_string(r.level);
    jr["anyCorrectEdge"] = r.anyCorrectEdge;
    jr["removedEdgeCount"] = r.removedEdgeCount;
    jr["scgSize"] = r.scgSize;
    jr["fewShotCount"] = r.fewShotCount;
    jr["similarPatternInContext"] = r.similarPatternInContext;
    jr["timings"] = {{"retrievalMs", r.retrievalMs},
                     {"generationMs", r.generationMs},
                     {"gradingMs", r.gradingMs}};
    if (r.semantic.has_value()) jr["semantic"] = *r.semantic;
    recs.push_back(std::move(jr));
  }
  j["records"] = recs;
  return j;
}

ExperimentReport ExperimentReport::from_json(const ordered_json& j) {
  ExperimentReport report;
  report.configEcho = j.value("config", ordered_json::object());
  const auto& summary = j.at("summary");
  report.infraFailures = summary.value("infraFailures", 0);
  report.oversizedSkipped = summary.value("oversizedSkipped", 0);
  for (const auto& jr : j.at("records")) {
    EvaluationRecord r;
    r.taskId = jr.at("taskId").get<std::string>();
    r.candidateRank = jr.value("candidateRank", 0);
    auto level = correctness_level_from_string(jr.at("level").get<std::string>());
    if (!level) throw std::runtime_error("unknown correctness level in report");
    r.level = *level;
    r.anyCorrectEdge = jr.value("anyCorrectEdge", false);
    r.removedEdgeCount = jr.value("removedEdgeCount", 0);
    r.scgSize = jr.value("scgSize", 0);
    r.fewShotCount = jr.value("fewShotCount", 0);
    r.similarPatternInContext = jr.value("similarPatternInContext", false);
    if (jr.contains("timings")) {
      r.retrievalMs = jr["timings"].value("retrievalMs", 0.0);
      r.generationMs = jr["timings"].value("generationMs", 0.0);
      r.gradingMs = jr["timings"].value("gradingMs", 0.0);
    }
    if (jr.contains("semantic")) r.semantic = jr.at("semantic").get<bool>();
    report.records.push_back(std::move(r));
  }
  return report;
}

std::filesystem::path report_records_path(const std::filesystem::path& file) {
  std::filesystem::path records = file;
  records.replace_extension(".records.jsonl");
  return records;
}

void ExperimentReport::save(const std::filesystem::path& file) const {
  // Summary document plus line-delimited records next to it.
  ordered_json j = to_json();
  ordered_json records = std::move(j["records"]);
  j.erase("records");
  j["table"] = table();

  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write report file " + file.string());
  out << j.dump(2) << "\n";

  std::ofstream recs(report_records_path(file), std::ios::binary);
  if (!recs) throw std::runtime_error("cannot write records next to " + file.string());
  for (const auto& r : records) recs << r.dump() << "\n";
}

ExperimentReport ExperimentReport::load(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read report file " + file.string());
  ordered_json j;
  in >> j;
  j["records"] = ordered_json::array();
  std::ifstream recs(report_records_path(file), std::ios::binary);
  if (recs) {
    std::string line;
    while (std::getline(recs, line)) {
      if (line.empty()) continue;
      j["records"].push_back(ordered_json::parse(line));
    }
  }
  return from_json(j);
}

namespace {

struct TaskOutcome {
  EvaluationRecord record;
  bool infraFailure = false;
  bool oversized = false;
  std::string transcript;
};

double ms_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace

ExperimentReport run_experiment(const Dataset& dataset, const ExperimentConfig& cfg) {
  std::vector<SimpleChangeGraph> samples = collect_samples(dataset);
  auto [train, test] = split_train_test(samples, cfg.trainRatio, cfg.seed);

  std::unique_ptr<Embedder> embedder = make_embedder(cfg.embedderSpec);
  VectorStore store = build_store(train, *embedder);
  ChatBackendFactory backendFactory = resolve_chat_backend(cfg.backendSpec);

  // Task pool: test components with >= 2 edges, so a task always keeps at
  // least one edge to condition on. Order is deterministic in the seed.
  std::vector<const SimpleChangeGraph*> pool;
  for (const auto& scg : test)
    if (scg.graph.edge_count() >= 2) pool.push_back(&scg);
  {
    Rng rng(hash_combine(cfg.seed, fnv1a("task-order")));
    rng.shuffle(pool);
  }
  if (cfg.sampleCap >= 0 && static_cast<int>(pool.size()) > cfg.sampleCap)
    pool.resize(static_cast<std::size_t>(cfg.sampleCap));

  // Few-shot texts are needed for the similar-pattern flag; parse lazily.
  const PromptTemplate& tpl = cfg.completion == CompletionMode::SingleEdge
                                  ? single_edge_template()
                                  : multi_edge_template();

  std::vector<TaskOutcome> outcomes(pool.size());
  std::atomic<std::size_t> cursor{0};

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= pool.size()) return;
      const SimpleChangeGraph& scg = *pool[i];
      const std::string taskId = scg.provenance.to_string();
      const std::uint64_t taskSeed = hash_combine(cfg.seed, fnv1a(taskId));
      TaskOutcome& outcome = outcomes[i];

      try {
        int removeCount = 1;
        if (cfg.completion == CompletionMode::MultiEdge) {
          Rng rng(hash_combine(taskSeed, fnv1a("remove-count")));
          const int maxRemove = std::max<int>(
              1, static_cast<int>((scg.graph.edge_count() + 1) / 2));
          removeCount = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(maxRemove)));
        }
        CompletionTask task = make_task(scg, removeCount, taskSeed);
        TaskContext ctx = make_task_context(task, taskId, static_cast<long>(i));

        auto tRetrieval = std::chrono::steady_clock::now();
        std::vector<FewShot> fewShots;
        if (cfg.retrievalOverride) {
          fewShots = cfg.retrievalOverride(taskId, ctx.partialDoc.text);
        } else if (cfg.retrieval == RetrievalMode::Semantic) {
          for (const StoredExample* e :
               retrieve_few_shots(store, *embedder, ctx.partialDoc.text, cfg.maxFewShots,
                                  {taskId}))
            fewShots.push_back({e->exampleId, e->text});
        } else {
          Rng rng(hash_combine(taskSeed, fnv1a("random-retrieval")));
          const std::size_t k =
              std::min<std::size_t>(static_cast<std::size_t>(std::max(0, cfg.maxFewShots)),
                                    store.size());
          for (std::size_t idx : rng.sample_indices(store.size(), k)) {
            const StoredExample& e = store.examples()[idx];
            fewShots.push_back({e.exampleId, e.text});
          }
        }
        outcome.record.retrievalMs = ms_since(tRetrieval);

        AssembledPrompt prompt;
        try {
          prompt = build_prompt(tpl, fewShots, ctx.partialDoc.text, cfg.promptBudget,
                                PromptStyle::Chat);
        } catch (const PromptError&) {
          outcome.oversized = true;  // too large to fit: sample filtered
          continue;
        }

        auto tGen = std::chrono::steady_clock::now();
        std::shared_ptr<ChatBackend> backend = backendFactory(&ctx.fixture);
        std::vector<CompletionCandidate> candidates;
        try {
          candidates = generate_candidates_chat(prompt, ctx.partialParsed, *backend,
                                                cfg.temperature, cfg.numSamples, 1024,
                                                cfg.systemInstruction);
        } catch (const TransportError&) {
          outcome.infraFailure = true;
          continue;
        }
        outcome.record.generationMs = ms_since(tGen);

        auto tGrade = std::chrono::steady_clock::now();
        Assessment best;
        int bestRank = 0;
        const int considered =
            std::min<int>(std::max(1, cfg.gradeBestOf), static_cast<int>(candidates.size()));
        for (int rank = 0; rank < considered; ++rank) {
          Assessment a = assess(candidates[static_cast<std::size_t>(rank)], ctx);
          if (rank == 0 || static_cast<int>(a.level) > static_cast<int>(best.level) ||
              (static_cast<int>(a.level) == static_cast<int>(best.level) && a.anyCorrectEdge &&
               !best.anyCorrectEdge)) {
            best = a;
            bestRank = rank;
          }
        }
        outcome.record.gradingMs = ms_since(tGrade);

        bool similar = false;
        for (const FewShot& fs : fewShots) {
          auto parsed = parse(fs.text);
          if (!parsed.ok()) continue;
          if (is_isomorphic(parsed.doc->graph, scg.graph, LabelProjection::Type)) {
            similar = true;
            break;
          }
        }

        outcome.record.taskId = taskId;
        outcome.record.candidateRank = bestRank;
        outcome.record.level = best.level;
        outcome.record.anyCorrectEdge = best.anyCorrectEdge;
        outcome.record.removedEdgeCount = task.removedEdgeCount;
        outcome.record.scgSize =
            static_cast<int>(scg.graph.node_count() + scg.graph.edge_count());
        outcome.record.fewShotCount = static_cast<int>(prompt.fewShotIdsUsed.size());
        outcome.record.similarPatternInContext = similar;
        if (cfg.keepTranscripts) outcome.transcript = prompt.text;
        if (!cfg.logDir.empty()) {
          std::filesystem::create_directories(cfg.logDir);
          std::string safe = taskId;
          for (char& c : safe)
            if (c == '/' || c == ':') c = '_';
          std::ofstream log(std::filesystem::path(cfg.logDir) / (safe + ".txt"),
                            std::ios::binary);
          log << prompt.text << "\n--- response ---\n"
              << (candidates.empty() ? "" : candidates.front().rawText) << "\n";
        }
      } catch (const TransportError&) {
        outcome.infraFailure = true;
      } catch (const std::exception&) {
        // Never let a worker thread terminate the process; the task counts as
        // an infrastructure failure rather than a silent drop.
        outcome.infraFailure = true;
      }
    }
  };

  const int jobs = std::max(1, cfg.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int t = 0; t < jobs; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  ExperimentReport report;
  report.configEcho = {{"trainRatio", cfg.trainRatio},
                       {"maxFewShots", cfg.maxFewShots},
                       {"retrieval", cfg.retrieval == RetrievalMode::Semantic ? "semantic" : "random"},
                       {"completion", cfg.completion == CompletionMode::SingleEdge ? "single" : "multi"},
                       {"backend", cfg.backendSpec},
                       {"embedder", cfg.embedderSpec},
                       {"seed", cfg.seed},
                       {"sampleCap", cfg.sampleCap},
                       {"promptBudget", cfg.promptBudget},
                       {"numSamples", cfg.numSamples},
                       {"temperature", cfg.temperature},
                       {"gradeBestOf", cfg.gradeBestOf}};
  std::vector<TaskOutcome*> done;
  for (auto& o : outcomes) {
    if (o.infraFailure) {
      report.infraFailures++;
      continue;
    }
    if (o.oversized) {
      report.oversizedSkipped++;
      continue;
    }
    if (o.record.taskId.empty()) continue;  // defensive: worker never filled it
    done.push_back(&o);
  }
  std::sort(done.begin(), done.end(), [](const TaskOutcome* a, const TaskOutcome* b) {
    return a->record.taskId < b->record.taskId;
  });
  for (TaskOutcome* o : done) {
    if (!o->transcript.empty()) report.transcripts[o->record.taskId] = o->transcript;
    report.records.push_back(o->record);
  }
  return report;
}

void import_semantic_labels(ExperimentReport& report, const std::filesystem::path& annotations) {
  std::ifstream in(annotations, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read annotations file " + annotations.string());
  std::map<std::string, EvaluationRecord*> byId;
  for (auto& r : report.records) byId[r.taskId] = &r;
  std::map<std::string, bool> seen;
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (line.empty()) continue;
    ordered_json j = ordered_json::parse(line);
    const std::string taskId = j.at("taskId").get<std::string>();
    const bool semantic = j.at("semantic").get<bool>();
    auto it = byId.find(taskId);
    if (it == byId.end())
      throw std::runtime_error("annotation line " + std::to_string(lineNo) +
                               ": unknown task id " + taskId);
    auto prev = seen.find(taskId);
    if (prev != seen.end() && prev->second != semantic)
      throw std::runtime_error("annotation line " + std::to_string(lineNo) +
                               ": conflicting duplicate for " + taskId);
    seen[taskId] = semantic;
    it->second->semantic = semantic;
  }
}

}  // namespace ramc
