#include "ramc/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "nlohmann/json.hpp"
#include "ramc/evaluation.hpp"
#include "ramc/synthetic.hpp"

namespace ramc::cli {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitEnvironment = 2;
constexpr int kExitUsage = 64;

/// Values from --config FILE become defaults; explicit flags override them by
/// being injected only when the flag is absent from argv.
std::vector<std::string> apply_config_file(const std::vector<std::string>& args,
                                           std::ostream& err, bool& ok) {
  ok = true;
  std::string configFile;
  for (std::size_t i = 0; i + 1 < args.size(); ++i)
    if (args[i] == "--config") configFile = args[i + 1];
  if (configFile.empty()) return args;

  std::ifstream in(configFile, std::ios::binary);
  if (!in) {
    err << "cannot read config file " << configFile << "\n";
    ok = false;
    return args;
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    err << "config file " << configFile << " is not valid JSON: " << e.what() << "\n";
    ok = false;
    return args;
  }
  std::vector<std::string> out = args;
  for (const auto& [key, value] : j.items()) {
    const std::string flag = "--" + key;
    if (std::find(out.begin(), out.end(), flag) != out.end()) continue;  // flag wins
    if (value.is_boolean()) {
      if (value.get<bool>()) out.push_back(flag);
    } else {
      out.push_back(flag);
      out.push_back(value.is_string() ? value.get<std::string>() : value.dump());
    }
  }
  return out;
}

std::vector<std::filesystem::path> split_repo_list(const std::vector<std::string>& specs) {
  std::vector<std::filesystem::path> dirs;
  for (const auto& spec : specs) {
    std::stringstream ss(spec);
    std::string part;
    while (std::getline(ss, part, ','))
      if (!part.empty()) dirs.push_back(part);
  }
  return dirs;
}

int cmd_synth(const SyntheticConfig& cfg, const std::string& outDir, std::ostream& out,
              std::ostream& err) {
  try {
    for (const auto& warning : generate_repo(cfg, outDir)) err << "warning: " << warning << "\n";
  } catch (const std::invalid_argument& e) {
    err << "synth: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "synth: " << e.what() << "\n";
    return kExitEnvironment;
  }
  out << "wrote repository with " << cfg.revisions + 1 << " revision files to " << outDir << "\n";
  return kExitOk;
}

int cmd_ingest(const std::string& repoDir, const std::string& storeFile,
               const std::string& embedderSpec, std::ostream& out, std::ostream& err) {
  try {
    std::unique_ptr<Embedder> embedder = make_embedder(embedderSpec);
    if (std::filesystem::exists(storeFile)) {
      VectorStore existing = VectorStore::load(storeFile);
      if (existing.embedder_tag() != embedder->tag()) {
        err << "ingest: store " << storeFile << " was built with embedder '"
            << existing.embedder_tag() << "', requested '" << embedder->tag() << "'\n";
        return kExitEnvironment;
      }
    }
    Dataset ds = load_dataset({repoDir});
    std::vector<SimpleChangeGraph> samples = collect_samples(ds);
    IngestStats stats;
    stats.revisionPairs = static_cast<int>(ds.repositories.front().revisions.size()) - 1;
    VectorStore store = build_store(samples, *embedder, &stats);
    store.save(storeFile);
    out << "pairs: " << stats.revisionPairs << "\n"
        << "components: " << stats.components << "\n"
        << "deduped: " << stats.deduped << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    err << "ingest: " << e.what() << "\n";
    return kExitEnvironment;
  }
}

struct CompleteOptions {
  std::string storeFile;
  std::string partialFile;
  int k = 12;
  std::string mode = "chat";
  std::string backend = "mock:copy-similar";
  int nCandidates = 1;
  int budget = 8000;
  bool singleEdge = false;
  std::string scriptFile;  // token script for beam mode
  double temperature = 0.0;
};

int cmd_complete(const CompleteOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    std::ifstream in(opt.partialFile, std::ios::binary);
    if (!in) {
      err << "complete: cannot read partial file " << opt.partialFile << "\n";
      return kExitEnvironment;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string partialText = ss.str();

    // A task fixture file carries the partial plus test-only oracle data.
    TaskFixture fixture;
    bool haveFixture = false;
    if (!partialText.empty() && partialText.front() == '{') {
      nlohmann::json j = nlohmann::json::parse(partialText);
      partialText = j.at("partial").get<std::string>();
      fixture.groundTruthContinuation = j.value("groundTruthContinuation", "");
      haveFixture = true;
    }
    while (!partialText.empty() && partialText.back() == '\n') partialText.pop_back();

    auto parsed = parse(partialText);
    if (!parsed.ok()) {
      err << "complete: partial does not parse (line " << parsed.error->lineNumber << ", "
          << to_string(parsed.error->kind) << ": " << parsed.error->message << ")\n";
      return kExitEnvironment;
    }

    std::vector<CompletionCandidate> candidates;
    if (opt.mode == "beam") {
      if (opt.backend.rfind("mock:scripted", 0) != 0) {
        err << "complete: beam mode needs a TOKEN-capable backend; '" << opt.backend
            << "' offers chat only (token-wise sampling is unavailable for it)\n";
        return kExitEnvironment;
      }
      if (opt.scriptFile.empty()) {
        err << "complete: beam mode with mock:scripted requires --script FILE\n";
        return kExitEnvironment;
      }
      std::ifstream sf(opt.scriptFile, std::ios::binary);
      if (!sf) {
        err << "complete: cannot read script file " << opt.scriptFile << "\n";
        return kExitEnvironment;
      }
      nlohmann::json js;
      sf >> js;
      std::map<std::string, std::vector<TokenOption>> script;
      for (const auto& [suffix, options] : js.items())
        for (const auto& o : options)
          script[suffix].push_back({o.at(0).get<std::string>(), o.at(1).get<double>()});
      EdgeListDocument doc;
      doc.graphId = parsed.doc->graphId;
      doc.text = partialText;
      ScriptedTokenBackend backend(partialText + "\n", std::move(script));
      candidates = generate_candidates_beam(doc, backend, component_metamodel());
    } else {
      std::vector<FewShot> fewShots;
      if (!opt.storeFile.empty()) {
        VectorStore store = VectorStore::load(opt.storeFile);
        std::unique_ptr<Embedder> embedder = make_embedder(
            store.embedder_tag() == "hash-384" ? "hash" : store.embedder_tag());
        for (const StoredExample* e :
             retrieve_few_shots(store, *embedder, partialText, opt.k))
          fewShots.push_back({e->exampleId, e->text});
      }
      const PromptTemplate& tpl = opt.singleEdge ? single_edge_template() : multi_edge_template();
      AssembledPrompt prompt = build_prompt(tpl, fewShots, partialText, opt.budget);
      ChatBackendFactory factory = resolve_chat_backend(opt.backend);
      std::shared_ptr<ChatBackend> backend = factory(haveFixture ? &fixture : nullptr);
      candidates = generate_candidates_chat(prompt, *parsed.doc, *backend, opt.temperature,
                                            opt.nCandidates);
    }

    int printed = 0;
    for (const auto& c : candidates) {
      if (c.formatFailure) {
        err << "candidate (unparseable, kept for diagnostics): " << c.rawText << "\n";
        continue;
      }
      out << "# candidate " << printed << " score " << c.score << "\n";
      out << write_continuation(*parsed.doc, c.newEdges, c.newNodes);
      ++printed;
    }
    if (printed == 0) err << "no parseable candidates were generated\n";
    return kExitOk;
  } catch (const std::invalid_argument& e) {
    err << "complete: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "complete: " << e.what() << "\n";
    return kExitEnvironment;
  }
}

struct EvaluateOptions {
  std::vector<std::string> repos;
  double split = 0.75;
  std::string retrieval = "semantic";
  std::string backend = "mock:echo-gt";
  std::string embedder = "hash";
  std::string report;
  std::string annotations;
  std::string mode = "multi";
  int sampleCap = -1;
  int k = 12;
  int budget = 8000;
  int nSamples = 1;
  double temperature = 0.0;
  std::uint64_t seed = 0;
  int gradeBestOf = 1;
  int jobs = static_cast<int>(std::thread::hardware_concurrency());
  std::string logDir;
};

int cmd_evaluate(const EvaluateOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    ExperimentConfig cfg;
    cfg.trainRatio = opt.split;
    cfg.maxFewShots = opt.k;
    cfg.retrieval = opt.retrieval == "random" ? RetrievalMode::Random : RetrievalMode::Semantic;
    cfg.completion = opt.mode == "single" ? CompletionMode::SingleEdge : CompletionMode::MultiEdge;
    cfg.backendSpec = opt.backend;
    cfg.embedderSpec = opt.embedder;
    cfg.seed = opt.seed;
    cfg.sampleCap = opt.sampleCap;
    cfg.promptBudget = opt.budget;
    cfg.numSamples = opt.nSamples;
    cfg.temperature = opt.temperature;
    cfg.gradeBestOf = opt.gradeBestOf;
    cfg.jobs = std::max(1, opt.jobs);
    cfg.logDir = opt.logDir;

    Dataset ds = load_dataset(split_repo_list(opt.repos));
    ExperimentReport report = run_experiment(ds, cfg);
    if (!opt.annotations.empty()) import_semantic_labels(report, opt.annotations);
    if (!opt.report.empty()) report.save(opt.report);
    out << report.table();
    return kExitOk;
  } catch (const std::invalid_argument& e) {
    err << "evaluate: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "evaluate: " << e.what() << "\n";
    return kExitEnvironment;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  bool configOk = true;
  const std::vector<std::string> expanded = apply_config_file(args, err, configOk);
  if (!configOk) return kExitEnvironment;

  CLI::App app{"retrieval-augmented software model completion"};
  app.require_subcommand(1);
  std::string configFile, logLevel = "info";
  app.add_option("--config", configFile, "JSON config file; flags override its values");
  app.add_option("--log-level", logLevel, "trace|debug|info|warn|error");

  // synth
  auto* synth = app.add_subcommand("synth", "generate a simulated model repository");
  synth->fallthrough();
  SyntheticConfig scfg;
  std::string synthOut = "synthetic-repo";
  synth->add_option("--ops", scfg.opsPerRevision, "edit operations per revision")
      ->check(CLI::PositiveNumber);
  synth->add_option("--revisions", scfg.revisions, "number of evolution steps")
      ->check(CLI::PositiveNumber);
  synth->add_option("--perturbation", scfg.perturbationProbability,
                    "probability of an overlapping follow-up operation")
      ->check(CLI::Range(0.0, 1.0));
  synth->add_option("--seed", scfg.seed, "generator seed");
  synth->add_option("--out", synthOut, "output directory");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "diff a repository into a vector store");
  ingest->fallthrough();
  std::string ingestRepo, ingestStore = "store.jsonl", ingestEmbedder = "hash";
  ingest->add_option("--repo", ingestRepo, "repository directory")->required();
  ingest->add_option("--store", ingestStore, "store file to write");
  ingest->add_option("--embedder", ingestEmbedder, "hash or api:<model>");

  // complete
  auto* complete = app.add_subcommand("complete", "complete one partial change graph");
  complete->fallthrough();
  CompleteOptions copt;
  complete->add_option("--store", copt.storeFile, "vector store for few-shot retrieval");
  complete->add_option("--partial", copt.partialFile, "EdgeList document or task fixture JSON")
      ->required();
  complete->add_option("--k", copt.k, "few-shot budget")->check(CLI::NonNegativeNumber);
  complete->add_option("--mode", copt.mode, "chat or beam")
      ->check(CLI::IsMember({"chat", "beam"}));
  complete->add_option("--backend", copt.backend, "mock:<name> or api");
  complete->add_option("--n-candidates", copt.nCandidates, "chat samples to draw")
      ->check(CLI::PositiveNumber);
  complete->add_option("--budget", copt.budget, "prompt token budget");
  complete->add_flag("--single-edge", copt.singleEdge, "use the single-edge instruction");
  complete->add_option("--script", copt.scriptFile, "token script for beam mode");
  complete->add_option("--temperature", copt.temperature, "sampling temperature");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "run the experiment harness");
  evaluate->fallthrough();
  EvaluateOptions eopt;
  evaluate->add_option("--repo", eopt.repos, "repository directory (repeat or comma-list)")
      ->required();
  evaluate->add_option("--split", eopt.split, "train ratio")
      ->check(CLI::Range(0.0, 1.0).description("(0..1)"));
  evaluate->add_option("--retrieval", eopt.retrieval, "semantic or random")
      ->check(CLI::IsMember({"semantic", "random"}));
  evaluate->add_option("--backend", eopt.backend, "mock:<name> or api");
  evaluate->add_option("--embedder", eopt.embedder, "hash or api:<model>");
  evaluate->add_option("--report", eopt.report, "report file to write");
  evaluate->add_option("--annotations", eopt.annotations, "semantic labels to merge");
  evaluate->add_option("--mode", eopt.mode, "multi or single edge completion")
      ->check(CLI::IsMember({"multi", "single"}));
  evaluate->add_option("--sample-cap", eopt.sampleCap, "max number of test tasks");
  evaluate->add_option("--k", eopt.k, "few-shot budget")->check(CLI::NonNegativeNumber);
  evaluate->add_option("--budget", eopt.budget, "prompt token budget");
  evaluate->add_option("--n-samples", eopt.nSamples, "chat samples per task");
  evaluate->add_option("--temperature", eopt.temperature, "sampling temperature");
  evaluate->add_option("--seed", eopt.seed, "experiment seed");
  evaluate->add_option("--grade-best-of", eopt.gradeBestOf, "grade the best of N candidates");
  evaluate->add_option("--jobs", eopt.jobs, "parallel task evaluation");
  evaluate->add_option("--log-llm", eopt.logDir, "directory for prompt/response transcripts");

  std::vector<std::string> argv(expanded.rbegin(), expanded.rend());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << e.what() << "\n";
    return kExitUsage;
  }

  if (synth->parsed()) return cmd_synth(scfg, synthOut, out, err);
  if (ingest->parsed()) return cmd_ingest(ingestRepo, ingestStore, ingestEmbedder, out, err);
  if (complete->parsed()) return cmd_complete(copt, out, err);
  if (evaluate->parsed()) return cmd_evaluate(eopt, out, err);
  err << "no subcommand given\n";
  return kExitUsage;
}

}  // namespace ramc::cli
