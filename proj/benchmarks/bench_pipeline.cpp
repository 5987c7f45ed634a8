#include <benchmark/benchmark.h>

#include <filesystem>

#include "ramc/diff.hpp"
#include "ramc/edgelist.hpp"
#include "ramc/embedding.hpp"
#include "ramc/evaluation.hpp"
#include "ramc/rng.hpp"
#include "ramc/synthetic.hpp"

namespace {

using namespace ramc;

SimpleChangeGraph fixture_scg(int nodes) {
  SimpleChangeGraph scg;
  Label nl;
  nl.set(key::kChangeType, change::kAdd);
  nl.set(key::kType, element::kObject);
  nl.set(key::kClassName, "Component");
  for (int i = 0; i < nodes; ++i) {
    Label l = nl;
    l.set_dict(key::kAttributes, {{key::kId, "n" + std::to_string(i)}});
    scg.graph.add_node(i, l);
  }
  Label el;
  el.set(key::kChangeType, change::kAdd);
  el.set(key::kType, element::kReference);
  el.set(key::kReferenceTypeName, "subcomponents");
  for (int i = 1; i < nodes; ++i) scg.graph.add_edge(i - 1, i, el);
  return scg;
}

void BM_wl_hash(benchmark::State& state) {
  SimpleChangeGraph scg = fixture_scg(static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(wl_hash(scg.graph, LabelProjection::Full));
}
BENCHMARK(BM_wl_hash)->Arg(8)->Arg(32);

void BM_serialize_parse_roundtrip(benchmark::State& state) {
  SimpleChangeGraph scg = fixture_scg(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    EdgeListDocument doc = serialize(scg, 1);
    benchmark::DoNotOptimize(parse(doc.text));
  }
}
BENCHMARK(BM_serialize_parse_roundtrip)->Arg(8)->Arg(32);

void BM_diff_extract(benchmark::State& state) {
  Model base = seed_model(7);
  const EditOpTemplate& tpl = catalog_template("add-full-component");
  IdGenerator ids("bench");
  Model next = apply_scg(base, tpl.pattern, tpl.findAnchors(base).front(), ids);
  for (auto _ : state) {
    SimpleChangeGraph scg = extract_scg(diff(base, next));
    benchmark::DoNotOptimize(scg);
  }
}
BENCHMARK(BM_diff_extract);

void BM_hash_embed(benchmark::State& state) {
  HashEmbedder embedder;
  EdgeListDocument doc = serialize(fixture_scg(16), 1);
  for (auto _ : state) benchmark::DoNotOptimize(embedder.embed(doc.text));
}
BENCHMARK(BM_hash_embed);

void BM_retrieve_few_shots(benchmark::State& state) {
  HashEmbedder embedder;
  VectorStore store(embedder.tag(), embedder.dimension());
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    std::string text;
    for (int w = 0; w < 8; ++w) text += "tok" + std::to_string(rng.below(60)) + " ";
    store.add({"e" + std::to_string(i), text, embedder.embed(text), {}});
  }
  for (auto _ : state)
    benchmark::DoNotOptimize(retrieve_few_shots(store, embedder, "tok1 tok2 tok3 tok4", 12));
}
BENCHMARK(BM_retrieve_few_shots);

void BM_is_isomorphic(benchmark::State& state) {
  SimpleChangeGraph a = fixture_scg(static_cast<int>(state.range(0)));
  SimpleChangeGraph b = a;
  for (auto _ : state)
    benchmark::DoNotOptimize(is_isomorphic(a.graph, b.graph, LabelProjection::Full));
}
BENCHMARK(BM_is_isomorphic)->Arg(8)->Arg(16);

}  // namespace

BENCHMARK_MAIN();
