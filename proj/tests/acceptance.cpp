// Acceptance suite: runs every criterion at its stated tolerance and prints
// one pass/fail line per criterion. Exits non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <vector>

#include "oracles.hpp"
#include "ramc/diff.hpp"
#include "ramc/edgelist.hpp"
#include "ramc/embedding.hpp"
#include "ramc/evaluation.hpp"
#include "ramc/generation.hpp"
#include "ramc/prompting.hpp"
#include "ramc/synthetic.hpp"

using namespace ramc;
namespace fs = std::filesystem;

namespace {

struct Criterion {
  bool pass = true;
  std::string detail;
  double seconds = 0.0;

  void fail(const std::string& why) {
    pass = false;
    if (!detail.empty()) detail += "; ";
    detail += why;
  }
};

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

fs::path temp_repo(const std::string& name, const SyntheticConfig& cfg) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  generate_repo(cfg, dir);
  return dir;
}

// --- 1. EdgeList round-trip --------------------------------------------------

Criterion criterion_roundtrip() {
  Criterion c;
  Timer t;
  Rng rng(101);
  int failures = 0;
  for (int i = 0; i < 1000; ++i) {
    SimpleChangeGraph scg = testing::random_scg(rng, 15, 300);
    EdgeListDocument doc = serialize(scg, i);
    auto parsed = parse(doc.text);
    if (!parsed.ok()) {
      ++failures;
      continue;
    }
    std::map<NodeId, NodeId> anchors;
    for (std::size_t local = 0; local < doc.localToGraph.size(); ++local)
      anchors[static_cast<NodeId>(local)] = doc.localToGraph[local];
    // Values beyond 200 characters legitimately truncate on the way out, so
    // the identity is up to that normalization.
    if (!is_isomorphic(parsed.doc->graph, truncate_label_values(scg.graph), LabelProjection::Full,
                       anchors))
      ++failures;
  }
  c.seconds = t.seconds();
  c.detail = "1000 fuzzed SCGs, " + std::to_string(failures) + " failures, " + fmt(c.seconds) + "s";
  if (failures != 0) c.fail("round-trip must hold for 100%");
  if (c.seconds >= 10.0) c.fail("exceeded 10s budget");
  return c;
}

// --- 2. SCG/pi inversion -----------------------------------------------------

Criterion criterion_inversion() {
  Criterion c;
  Timer t;
  const auto& catalog = edit_op_catalog();
  int failures = 0, done = 0;
  for (std::uint64_t seed = 0; seed < 5 && done < 500; ++seed) {
    Model m = seed_model(seed);
    Rng rng(hash_combine(seed, 0xA11CE));
    IdGenerator ids("acc" + std::to_string(seed));
    for (int round = 0; round < 160 && done < 500; ++round) {
      const EditOpTemplate& tpl = catalog[rng.below(catalog.size())];
      auto assignments = tpl.findAnchors(m);
      if (assignments.empty()) continue;
      const auto& anchors = assignments[rng.below(assignments.size())];
      Model next = apply_scg(m, tpl.pattern, anchors, ids);
      SimpleChangeGraph scg = extract_scg(diff(m, next));
      if (!is_isomorphic(without_attribute_ids(scg.graph),
                         without_attribute_ids(tpl.pattern.graph), LabelProjection::Full))
        ++failures;
      ++done;
      m = std::move(next);  // keep evolving so anchors diversify
    }
  }
  c.seconds = t.seconds();
  c.detail = std::to_string(done) + " applications, " + std::to_string(failures) + " failures, " +
             fmt(c.seconds) + "s";
  if (done < 500) c.fail("fewer than 500 applications executed");
  if (failures != 0) c.fail("inversion must hold for 100%");
  if (c.seconds >= 30.0) c.fail("exceeded 30s budget");
  return c;
}

// --- 3. WL soundness and practical sharpness ----------------------------------

Criterion criterion_wl() {
  Criterion c;
  Timer t;
  Rng rng(33);
  std::vector<LabeledGraph> graphs;
  for (int i = 0; i < 200; ++i) graphs.push_back(testing::random_labeled_graph(rng, 7));
  std::vector<std::uint64_t> hashes;
  hashes.reserve(graphs.size());
  for (const auto& g : graphs) hashes.push_back(wl_hash(g, LabelProjection::Full));

  int soundnessViolations = 0, equalHashPairs = 0, confirmedMerges = 0, collisions = 0,
      disagreements = 0;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    for (std::size_t j = i + 1; j < graphs.size(); ++j) {
      const bool bruteIso =
          testing::brute_force_isomorphic(graphs[i], graphs[j], LabelProjection::Full);
      if (bruteIso && hashes[i] != hashes[j]) ++soundnessViolations;
      if (hashes[i] == hashes[j]) {
        ++equalHashPairs;
        // Every equal-hash pair must go through the exact backtracking check
        // before any merge; the check must agree with brute force.
        const bool exact = is_isomorphic(graphs[i], graphs[j], LabelProjection::Full);
        if (exact != bruteIso) ++disagreements;
        if (exact)
          ++confirmedMerges;
        else
          ++collisions;
      }
    }
  }
  c.seconds = t.seconds();
  c.detail = std::to_string(equalHashPairs) + " equal-hash pairs (" +
             std::to_string(confirmedMerges) + " confirmed isomorphic, " +
             std::to_string(collisions) + " collisions rejected by the exact check), " +
             fmt(c.seconds) + "s";
  if (soundnessViolations != 0)
    c.fail(std::to_string(soundnessViolations) + " isomorphic pairs with unequal hashes");
  if (disagreements != 0)
    c.fail(std::to_string(disagreements) + " exact-check disagreements (silent false merges)");
  if (c.seconds >= 20.0) c.fail("exceeded 20s budget");
  return c;
}

// --- 4. Ladder monotonicity and mutation discrimination ------------------------

Criterion criterion_mutations() {
  Criterion c;
  Timer t;
  const fs::path dir = temp_repo("ramc_acc_mutations", {11, 6, 0.0, 404});
  Dataset ds = load_dataset({dir});
  std::vector<SimpleChangeGraph> samples = collect_samples(ds);

  std::vector<TaskContext> tasks;
  std::uint64_t taskSeed = 1;
  while (tasks.size() < 200) {
    bool added = false;
    for (const auto& scg : samples) {
      if (tasks.size() >= 200) break;
      if (scg.graph.edge_count() < 2) continue;
      Rng rng(hash_combine(taskSeed, fnv1a(scg.provenance.to_string())));
      const int maxRemove = std::max<int>(1, static_cast<int>((scg.graph.edge_count() + 1) / 2));
      const int removeCount = 1 + static_cast<int>(rng.below(maxRemove));
      CompletionTask task = make_task(scg, removeCount, taskSeed);
      tasks.push_back(make_task_context(task, scg.provenance.to_string() + "#" +
                                                  std::to_string(taskSeed),
                                        static_cast<long>(tasks.size())));
      added = true;
    }
    ++taskSeed;
    if (!added) break;
  }

  struct MutationCase {
    const char* name;
    MutateBackend::Level level;
    CorrectnessLevel ceiling;
  };
  const MutationCase cases[] = {
      {"mutate(format)", MutateBackend::Level::Format, CorrectnessLevel::FormatIncorrect},
      {"mutate(structure)", MutateBackend::Level::Structure, CorrectnessLevel::Format},
      {"mutate(change)", MutateBackend::Level::Change, CorrectnessLevel::Structure},
      {"mutate(type)", MutateBackend::Level::Type, CorrectnessLevel::ChangeStructure},
  };

  std::ostringstream exceptions;
  for (const MutationCase& mc : cases) {
    int exact = 0;
    for (const TaskContext& ctx : tasks) {
      AssembledPrompt prompt = build_prompt(multi_edge_template(), {}, ctx.partialDoc.text);
      MutateBackend backend(mc.level,
                            std::make_shared<EchoGtBackend>(ctx.fixture.groundTruthContinuation));
      auto candidates = generate_candidates_chat(prompt, ctx.partialParsed, backend, 0.0, 1);
      Assessment a = assess(candidates.front(), ctx);
      if (a.level == mc.ceiling) {
        ++exact;
      } else {
        exceptions << "  " << mc.name << " on " << ctx.taskId << ": graded "
                   << to_string(a.level) << ", intended " << to_string(mc.ceiling) << "\n";
      }
    }
    const double rate = 100.0 * exact / static_cast<double>(tasks.size());
    c.detail += std::string(mc.name) + " " + fmt(rate) + "% ";
    if (rate < 99.0) c.fail(std::string(mc.name) + " below 99%");
  }
  c.seconds = t.seconds();
  c.detail += "over " + std::to_string(tasks.size()) + " tasks, " + fmt(c.seconds) + "s";
  const std::string logged = exceptions.str();
  if (!logged.empty()) std::cout << "  accidental-equivalence log:\n" << logged;
  if (tasks.size() < 200) c.fail("fewer than 200 tasks");
  if (c.seconds >= 60.0) c.fail("exceeded 60s budget");
  fs::remove_all(dir);
  return c;
}

// --- 5. Oracle end-to-end ------------------------------------------------------

Criterion criterion_oracle_end_to_end() {
  Criterion c;
  Timer t;
  const fs::path dir = temp_repo("ramc_acc_oracle", {11, 6, 0.0, 505});
  Dataset ds = load_dataset({dir});

  ExperimentConfig cfg;
  cfg.backendSpec = "mock:echo-gt";
  cfg.seed = 42;
  ExperimentReport echo = run_experiment(ds, cfg);
  if (echo.infraFailures != 0) c.fail("echo-gt run had infrastructure failures");
  for (CorrectnessLevel l : {CorrectnessLevel::Format, CorrectnessLevel::Structure,
                             CorrectnessLevel::ChangeStructure, CorrectnessLevel::TypeStructure,
                             CorrectnessLevel::ExactMatch}) {
    if (std::abs(echo.level_percent(l) - 100.0) > 1e-9)
      c.fail(std::string("echo-gt ") + to_string(l) + " = " + fmt(echo.level_percent(l)));
  }

  cfg.backendSpec = "mock:mutate(format)";
  ExperimentReport broken = run_experiment(ds, cfg);
  if (std::abs(broken.level_percent(CorrectnessLevel::Format)) > 1e-9)
    c.fail("mutate(format) FORMAT column = " + fmt(broken.level_percent(CorrectnessLevel::Format)));

  c.seconds = t.seconds();
  c.detail = "echo-gt all-100 over " + std::to_string(echo.records.size()) +
             " tasks; mutate(format) FORMAT " +
             fmt(broken.level_percent(CorrectnessLevel::Format)) + "; " + fmt(c.seconds) + "s";
  fs::remove_all(dir);
  return c;
}

// --- 6. Offline retrieval-augmented completion proxy ----------------------------

Criterion criterion_offline_proxy() {
  Criterion c;
  Timer t;
  const fs::path dir = temp_repo("ramc_acc_proxy", {11, 10, 0.0, 606});
  Dataset ds = load_dataset({dir});

  // Pattern-presence oracle: over the same split the experiment will use,
  // at least 95% of test tasks must have a TYPE-isomorphic train component.
  std::vector<SimpleChangeGraph> samples = collect_samples(ds);
  auto [train, test] = split_train_test(samples, 0.75, 13);
  int eligible = 0, present = 0;
  for (const auto& scg : test) {
    if (scg.graph.edge_count() < 2) continue;
    ++eligible;
    for (const auto& tr : train) {
      if (testing::brute_force_isomorphic(scg.graph, tr.graph, LabelProjection::Type)) {
        ++present;
        break;
      }
    }
  }
  const double presence = eligible ? 100.0 * present / eligible : 0.0;
  if (presence < 95.0)
    c.fail("pattern-presence precondition " + fmt(presence) + "% < 95%");

  ExperimentConfig cfg;
  cfg.backendSpec = "mock:copy-similar";
  cfg.retrieval = RetrievalMode::Semantic;
  cfg.maxFewShots = 12;
  cfg.seed = 13;
  ExperimentReport report = run_experiment(ds, cfg);
  const double typeCorrect = report.level_percent(CorrectnessLevel::TypeStructure);
  c.seconds = t.seconds();
  c.detail = "pattern presence " + fmt(presence) + "% (" + std::to_string(present) + "/" +
             std::to_string(eligible) + "), TYPE_STRUCTURE " + fmt(typeCorrect) + "% over " +
             std::to_string(report.records.size()) + " tasks, " + fmt(c.seconds) + "s";
  if (typeCorrect < 90.0) c.fail("TYPE_STRUCTURE " + fmt(typeCorrect) + "% < 90%");
  if (c.seconds >= 120.0) c.fail("exceeded 2min budget");
  fs::remove_all(dir);
  return c;
}

// --- 7. Retrieval ablation direction --------------------------------------------

Criterion criterion_ablation() {
  Criterion c;
  Timer t;
  if (edit_op_catalog().size() < 12) c.fail("catalog holds fewer than 12 templates");

  int semanticWins = 0;
  std::string perSeed;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const fs::path dir =
        temp_repo("ramc_acc_ablation_" + std::to_string(seed), {11, 10, 1.0, 700 + seed});
    Dataset ds = load_dataset({dir});
    ExperimentConfig cfg;
    cfg.backendSpec = "mock:copy-similar";
    cfg.maxFewShots = 12;
    cfg.seed = seed;

    cfg.retrieval = RetrievalMode::Semantic;
    const double semantic =
        run_experiment(ds, cfg).level_percent(CorrectnessLevel::TypeStructure);
    cfg.retrieval = RetrievalMode::Random;
    const double random = run_experiment(ds, cfg).level_percent(CorrectnessLevel::TypeStructure);
    if (semantic >= random) ++semanticWins;
    perSeed += " s" + std::to_string(seed) + ":" + fmt(semantic) + "/" + fmt(random);
    fs::remove_all(dir);
  }
  c.seconds = t.seconds();
  c.detail = "semantic/random TYPE_STRUCTURE" + perSeed + "; semantic >= random in " +
             std::to_string(semanticWins) + "/5 seeds, " + fmt(c.seconds) + "s";
  if (semanticWins < 4) c.fail("semantic retrieval must win in at least 4 of 5 seeds");
  return c;
}

// --- 8. Diversity selection -----------------------------------------------------

Criterion criterion_diversity() {
  Criterion c;
  Timer t;
  HashEmbedder embedder;
  Rng material(808);
  VectorStore store(embedder.tag(), embedder.dimension());
  for (int i = 0; i < 200; ++i) {
    std::string text;
    const int words = 4 + static_cast<int>(material.below(6));
    for (int w = 0; w < words; ++w) text += "tok" + std::to_string(material.below(60)) + " ";
    store.add({"e" + std::to_string(i), text, embedder.embed(text), {}});
  }
  std::vector<const StoredExample*> pool;
  for (const auto& e : store.examples()) pool.push_back(&e);

  int wins = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::vector<std::vector<double>> chosen;
    for (const auto* e : diversify(pool, 12, 36, seed)) chosen.push_back(e->vector);

    Rng baselineRng(hash_combine(seed, 0xBA5E));  // independent uniform baseline
    std::vector<std::vector<double>> baseline;
    for (std::size_t idx : baselineRng.sample_indices(pool.size(), 12))
      baseline.push_back(pool[idx]->vector);

    if (testing::min_pairwise_distance(chosen) >= testing::min_pairwise_distance(baseline))
      ++wins;
  }
  c.seconds = t.seconds();
  c.detail = "diversify beat or matched the uniform baseline in " + std::to_string(wins) +
             "/100 seeds, " + fmt(c.seconds) + "s";
  if (wins < 95) c.fail("fewer than 95 winning seeds");
  if (c.seconds >= 30.0) c.fail("exceeded 30s budget");
  return c;
}

// --- 9. Prompt budget invariant ---------------------------------------------------

Criterion criterion_prompt_budget() {
  Criterion c;
  Timer t;
  const std::string sep(kGraphSeparator);
  if (sep != std::string("\n\n$$\n---\n")) c.fail("separator bytes differ from the contract");

  Rng rng(909);
  const std::string partial = "t # 0\ne 0 1 \"{}\" \"{}\" \"{}\"";
  int builds = 0;
  for (int round = 0; round < 500; ++round) {
    std::vector<FewShot> shots;
    const int n = static_cast<int>(rng.below(16));
    for (int i = 0; i < n; ++i) {
      std::string text = "t # " + std::to_string(i);
      const int lines = 1 + static_cast<int>(rng.below(6));
      for (int l = 0; l < lines; ++l) text += "\ne 0 1 \"{}\" \"{}\" \"{}\"";
      shots.push_back({"fs" + std::to_string(i), text});
    }
    const int budget = 20 + static_cast<int>(rng.below(400));
    AssembledPrompt p;
    try {
      p = build_prompt(multi_edge_template(), shots, partial, budget);
    } catch (const PromptError&) {
      continue;  // oversized-partial escape hatch
    }
    ++builds;
    if (p.estimatedTokens > budget) c.fail("prompt over budget");
    if (p.fewShotIdsUsed.size() > shots.size()) c.fail("used more few-shots than offered");
    for (std::size_t i = 0; i < p.fewShotIdsUsed.size(); ++i)
      if (p.fewShotIdsUsed[i] != shots[i].id) c.fail("drop order was not a suffix removal");
    if (static_cast<int>(shots.size() - p.fewShotIdsUsed.size()) != p.droppedCount)
      c.fail("droppedCount inconsistent");
    if (!p.fewShotIdsUsed.empty() &&
        p.text.find(shots[0].text + sep) == std::string::npos)
      c.fail("separator bytes not found between graphs");
  }
  c.seconds = t.seconds();
  c.detail = std::to_string(builds) + " in-budget builds of 500 fuzzed, " + fmt(c.seconds) + "s";
  return c;
}

// --- 10. Beam determinism ----------------------------------------------------------

Criterion criterion_beam() {
  Criterion c;
  Timer t;
  const char* partialText =
      "t # 3\n"
      "e 0 1 \"{'changeType': 'Add', 'type': 'reference', 'referenceTypeName': 'ports'}\" "
      "\"{'changeType': 'Preserve', 'type': 'object', 'className': 'Component', "
      "'attributes': {'id': 'c1'}}\" "
      "\"{'changeType': 'Add', 'type': 'object', 'className': 'Port', "
      "'attributes': {'id': 'p1'}}\"";
  EdgeListDocument doc;
  doc.graphId = 3;
  doc.text = partialText;
  const std::string base = std::string(partialText) + "\n";
  const std::string implLine =
      "e 0 2 \"{'changeType': 'Add', 'type': 'reference', 'referenceTypeName': "
      "'implementedBy'}\" _ \"{'changeType': 'Add', 'type': 'object', 'className': "
      "'Implementation', 'attributes': {'id': 'i1'}}\"\n";
  const std::string reqLine =
      "e 0 2 \"{'changeType': 'Add', 'type': 'reference', 'referenceTypeName': 'satisfies'}\" _ "
      "\"{'changeType': 'Add', 'type': 'object', 'className': 'Requirement', "
      "'attributes': {'id': 'r1'}}\"\n";
  const std::string bogusLine =
      "e 0 2 \"{'changeType': 'Add', 'type': 'reference', 'referenceTypeName': 'bogusRef'}\" _ "
      "\"{'changeType': 'Add', 'type': 'object', 'className': 'Implementation', "
      "'attributes': {'id': 'i1'}}\"\n";
  const Metamodel mm = component_metamodel();

  {  // (a) one edge at probability 1.0, then stop: one candidate, score 1.0
    ScriptedTokenBackend backend(base, {{"", {{implLine, 1.0}}}, {implLine, {{"\n", 1.0}}}});
    auto out = generate_candidates_beam(doc, backend, mm);
    if (out.size() != 1 || std::abs(out[0].score - 1.0) > 1e-12)
      c.fail("(a) expected one candidate with score 1.0");
  }
  {  // (b) branches at 0.6/0.4: two candidates, 0.6 first
    ScriptedTokenBackend backend(base, {{"", {{implLine, 0.6}, {reqLine, 0.4}}},
                                        {implLine, {{"\n", 1.0}}},
                                        {reqLine, {{"\n", 1.0}}}});
    auto out = generate_candidates_beam(doc, backend, mm);
    if (out.size() != 2 || std::abs(out[0].score - 0.6) > 1e-12 ||
        std::abs(out[1].score - 0.4) > 1e-12 ||
        out[0].newEdges[0].label.get_or(key::kReferenceTypeName, "") != "implementedBy")
      c.fail("(b) expected candidates ordered 0.6 then 0.4");
  }
  {  // (c) undeclared referenceTypeName: zero candidates, one metamodel rejection
    ScriptedTokenBackend backend(base, {{"", {{bogusLine, 1.0}}}});
    BeamStats stats;
    auto out = generate_candidates_beam(doc, backend, mm, {}, &stats);
    if (!out.empty() || stats.metamodelRejected != 1)
      c.fail("(c) expected zero candidates and one metamodel rejection");
  }
  c.seconds = t.seconds();
  c.detail = "three scripted examples reproduced hand-computed values, " + fmt(c.seconds) + "s";
  return c;
}

}  // namespace

int main() {
  struct Entry {
    const char* name;
    Criterion (*run)();
  };
  const Entry entries[] = {
      {"1 EdgeList round-trip", criterion_roundtrip},
      {"2 SCG/pi inversion", criterion_inversion},
      {"3 WL soundness and sharpness", criterion_wl},
      {"4 ladder mutation discrimination", criterion_mutations},
      {"5 oracle end-to-end", criterion_oracle_end_to_end},
      {"6 offline retrieval-augmented proxy", criterion_offline_proxy},
      {"7 retrieval ablation direction", criterion_ablation},
      {"8 diversity selection", criterion_diversity},
      {"9 prompt budget invariant", criterion_prompt_budget},
      {"10 beam determinism", criterion_beam},
  };

  int failed = 0;
  for (const Entry& e : entries) {
    Criterion c;
    try {
      c = e.run();
    } catch (const std::exception& ex) {
      c.pass = false;
      c.detail = std::string("exception: ") + ex.what();
    }
    std::cout << (c.pass ? "PASS" : "FAIL") << " criterion " << e.name << ": " << c.detail
              << std::endl;
    if (!c.pass) ++failed;
  }
  if (failed != 0) {
    std::cout << failed << " criterion(s) failed" << std::endl;
    return 1;
  }
  std::cout << "all 10 criteria passed" << std::endl;
  return 0;
}
