#include <map>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "ramc/diff.hpp"

using namespace ramc;

namespace {

Model brake_model(const std::string& name) {
  Model m;
  m.objects.push_back({"c1", "Component", {{"name", name}}});
  return m;
}

int count_change_type(const LabeledGraph& g, const char* ct) {
  int n = 0;
  for (const auto& [id, label] : g.nodes)
    if (change_type_of(label) == ct) ++n;
  return n;
}

}  // namespace

TEST_CASE("diff basics") {
  SUBCASE("diff of a model with itself is all Preserve") {
    Model m;
    m.objects.push_back({"c1", "Component", {}});
    m.objects.push_back({"p1", "Port", {}});
    m.references.push_back({"c1", "p1", "ports"});
    DifferenceGraph d = diff(m, m);
    CHECK(count_change_type(d, change::kPreserve) == 2);
    CHECK(count_change_type(d, change::kChange) == 0);
    for (const auto& e : d.edges) CHECK(change_type_of(e.label) == change::kPreserve);
  }

  SUBCASE("diff(empty, one object) is a single Add node") {
    Model m;
    m.objects.push_back({"c1", "Component", {}});
    DifferenceGraph d = diff({}, m);
    CHECK(d.node_count() == 1);
    CHECK(count_change_type(d, change::kAdd) == 1);
    CHECK(d.edge_count() == 0);
  }

  SUBCASE("attribute rename produces one attributeValueChange node") {
    DifferenceGraph d = diff(brake_model("Brake"), brake_model("BrakeCtrl"));
    REQUIRE(d.node_count() == 2);
    REQUIRE(d.edge_count() == 1);
    const Label& cl = d.nodes.at(1);
    CHECK(cl.get_or(key::kType, "") == element::kAttributeValueChange);
    CHECK(cl.get_or(key::kAttributeName, "") == "name");
    CHECK(cl.get_or(key::kValueBefore, "") == "Brake");
    CHECK(cl.get_or(key::kValueAfter, "") == "BrakeCtrl");
    CHECK(d.edges[0].label.get_or(key::kType, "") == element::kAttributeChange);
  }

  SUBCASE("duplicate ids in a revision are an error") {
    Model bad;
    bad.objects.push_back({"c1", "Component", {}});
    bad.objects.push_back({"c1", "Port", {}});
    CHECK_THROWS_AS(diff(bad, {}), std::invalid_argument);
  }
}

TEST_CASE("diff is symmetric-dual: swapping inputs swaps Add/Remove and before/after") {
  Rng rng(17);
  auto normalized = [](const LabeledGraph& g, bool flip) {
    LabeledGraph out;
    auto fix = [&](Label l) {
      if (flip) {
        const std::string ct = change_type_of(l);
        if (ct == change::kAdd)
          l.set(key::kChangeType, change::kRemove);
        else if (ct == change::kRemove)
          l.set(key::kChangeType, change::kAdd);
        if (l.has(key::kValueBefore)) {
          const std::string before = l.get_or(key::kValueBefore, "");
          l.set(key::kValueBefore, l.get_or(key::kValueAfter, ""));
          l.set(key::kValueAfter, before);
        }
      }
      // Preserve-node attribute payloads come from the respective old side;
      // the duality claim is about structure, changeTypes, and before/after.
      l.erase(key::kAttributes);
      return l;
    };
    for (const auto& [id, label] : g.nodes) out.add_node(id, fix(label));
    for (const auto& e : g.edges) out.add_edge(e.src, e.tgt, fix(e.label));
    return out;
  };
  for (int i = 0; i < 100; ++i) {
    Model a = testing::random_model(rng, 6);
    Model b = testing::random_model(rng, 6);
    DifferenceGraph ab = diff(a, b);
    DifferenceGraph ba = diff(b, a);
    REQUIRE(ab.node_count() == ba.node_count());
    REQUIRE(ab.edge_count() == ba.edge_count());
    CHECK(is_isomorphic(normalized(ab, false), normalized(ba, true), LabelProjection::Full));
  }
}

TEST_CASE("extract_scg") {
  Model m;
  m.objects.push_back({"c1", "Component", {}});
  m.objects.push_back({"p1", "Port", {}});
  m.objects.push_back({"q1", "Port", {}});
  m.references.push_back({"c1", "p1", "ports"});

  SUBCASE("all-Preserve difference yields an empty SCG") {
    CHECK(extract_scg(diff(m, m)).graph.empty());
  }

  SUBCASE("Add edge between two Preserve nodes keeps both anchors, nothing else") {
    Model n = m;
    n.references.push_back({"c1", "q1", "ports"});
    SimpleChangeGraph scg = extract_scg(diff(m, n));
    CHECK(scg.graph.node_count() == 2);  // c1 and q1; p1 has only a Preserve edge
    CHECK(scg.graph.edge_count() == 1);
    CHECK(change_type_of(scg.graph.edges[0].label) == change::kAdd);
    for (const auto& [id, label] : scg.graph.nodes)
      CHECK(change_type_of(label) == change::kPreserve);
    CHECK(scg_is_well_formed(scg.graph));
  }

  SUBCASE("idempotence: extracting from an SCG-as-difference-graph is the identity") {
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
      SimpleChangeGraph scg = testing::random_scg(rng, 6);
      SimpleChangeGraph again = extract_scg(scg.graph);
      CHECK(again.graph == scg.graph);
    }
  }

  SUBCASE("minimality: dropping any edge breaks the invariant or shrinks the extraction") {
    Rng rng(13);
    for (int i = 0; i < 50; ++i) {
      SimpleChangeGraph scg = testing::random_scg(rng, 5);
      REQUIRE(scg_is_well_formed(scg.graph));
      for (std::size_t e = 0; e < scg.graph.edges.size(); ++e) {
        LabeledGraph smaller;
        for (const auto& [id, label] : scg.graph.nodes) smaller.add_node(id, label);
        for (std::size_t j = 0; j < scg.graph.edges.size(); ++j)
          if (j != e)
            smaller.add_edge(scg.graph.edges[j].src, scg.graph.edges[j].tgt,
                             scg.graph.edges[j].label);
        CHECK((!scg_is_well_formed(smaller) || extract_scg(smaller).graph != scg.graph));
      }
    }
  }
}

TEST_CASE("scg_components carries provenance and the component index") {
  Model a, b;
  a.objects.push_back({"c1", "Component", {}});
  a.objects.push_back({"c2", "Component", {}});
  b = a;
  b.objects.push_back({"p1", "Port", {}});
  b.objects.push_back({"p2", "Port", {}});
  b.references.push_back({"c1", "p1", "ports"});
  b.references.push_back({"c2", "p2", "ports"});

  SimpleChangeGraph scg = extract_scg(diff(a, b));
  scg.provenance.repository = "repo";
  scg.provenance.revisionPair = "r000-r001";
  auto comps = scg_components(scg);
  REQUIRE(comps.size() == 2);
  CHECK(comps[0].provenance.componentIndex == 0);
  CHECK(comps[1].provenance.componentIndex == 1);
  CHECK(comps[0].provenance.repository == "repo");
  CHECK(comps[0].provenance.to_string() == "repo:r000-r001:0");
}

TEST_CASE("make_task") {
  Rng rng(29);
  SimpleChangeGraph oneEdge;
  {
    Label pl;
    pl.set(key::kChangeType, change::kPreserve);
    pl.set(key::kType, element::kObject);
    pl.set(key::kClassName, "Component");
    oneEdge.graph.add_node(0, pl);
    Label al;
    al.set(key::kChangeType, change::kAdd);
    al.set(key::kType, element::kObject);
    al.set(key::kClassName, "Port");
    oneEdge.graph.add_node(1, al);
    Label el;
    el.set(key::kChangeType, change::kAdd);
    el.set(key::kType, element::kReference);
    el.set(key::kReferenceTypeName, "ports");
    oneEdge.graph.add_edge(0, 1, el);
  }

  SUBCASE("single-edge SCG with a Preserve source leaves the anchor alone") {
    CompletionTask task = make_task(oneEdge, 1, 5);
    CHECK(task.groundTruth.graph == oneEdge.graph);
    CHECK(task.removedEdgeCount == 1);
    CHECK(task.partial.graph.node_count() == 1);  // the Preserve anchor
    CHECK(task.partial.graph.edge_count() == 0);
    CHECK(task.partial.graph.has_node(0));
  }

  SUBCASE("removeCount = 0 is rejected: a task must hide something") {
    CHECK_THROWS_AS(make_task(oneEdge, 0, 5), std::invalid_argument);
  }

  SUBCASE("an edgeless SCG has nothing to remove") {
    SimpleChangeGraph empty;
    Label al;
    al.set(key::kChangeType, change::kAdd);
    empty.graph.add_node(0, al);
    CHECK_THROWS_AS(make_task(empty, 1, 5), std::invalid_argument);
  }

  SUBCASE("removeCount above the edge count is clipped") {
    CompletionTask task = make_task(oneEdge, 99, 5);
    CHECK(task.removedEdgeCount == 1);
  }

  SUBCASE("task soundness: partial plus removed edges reconstructs the ground truth") {
    for (int i = 0; i < 200; ++i) {
      SimpleChangeGraph scg = testing::random_scg(rng, 7);
      const int removeCount = 1 + static_cast<int>(rng.below(scg.graph.edge_count()));
      CompletionTask task;
      try {
        task = make_task(scg, removeCount, rng.next_u64());
      } catch (const std::invalid_argument&) {
        continue;  // empty-partial corner, allowed
      }
      CHECK(task.partial.graph.edge_count() + task.removedEdgeIndices.size() ==
            task.groundTruth.graph.edge_count());
      for (const auto& [id, label] : task.partial.graph.nodes) {
        REQUIRE(task.groundTruth.graph.has_node(id));
        CHECK(task.groundTruth.graph.nodes.at(id) == label);
      }
      for (const auto& [id, label] : task.groundTruth.graph.nodes)
        if (change_type_of(label) == change::kPreserve) CHECK(task.partial.graph.has_node(id));
    }
  }

  SUBCASE("uniform pair frequencies on a 6-edge SCG with removeCount 2") {
    // C(6,2) = 15 pairs; each should appear with frequency 1/15 +- 0.02.
    SimpleChangeGraph scg;
    Label nl;
    nl.set(key::kChangeType, change::kPreserve);
    nl.set(key::kType, element::kObject);
    nl.set(key::kClassName, "Component");
    for (int i = 0; i < 4; ++i) scg.graph.add_node(i, nl);
    Label el;
    el.set(key::kChangeType, change::kAdd);
    el.set(key::kType, element::kReference);
    el.set(key::kReferenceTypeName, "ports");
    scg.graph.add_edge(0, 1, el);
    scg.graph.add_edge(1, 2, el);
    scg.graph.add_edge(2, 3, el);
    scg.graph.add_edge(3, 0, el);
    scg.graph.add_edge(0, 2, el);
    scg.graph.add_edge(1, 3, el);

    std::map<std::pair<std::size_t, std::size_t>, int> freq;
    const int trials = 3000;
    for (int t = 0; t < trials; ++t) {
      CompletionTask task = make_task(scg, 2, 1000 + t);
      REQUIRE(task.removedEdgeIndices.size() == 2);
      freq[{task.removedEdgeIndices[0], task.removedEdgeIndices[1]}]++;
    }
    CHECK(freq.size() == 15);
    const double expected = 1.0 / 15.0;
    for (const auto& [pair, count] : freq) {
      const double f = static_cast<double>(count) / trials;
      CHECK(std::abs(f - expected) <= 0.02);
    }
  }
}

TEST_CASE("dedup_corpus") {
  SUBCASE("two isomorphic SCGs collapse to one") {
    Rng rng(7);
    SimpleChangeGraph a = testing::random_scg(rng, 5);
    SimpleChangeGraph b = a;
    b.provenance.componentIndex = 42;  // provenance must not matter
    CHECK(dedup_corpus({a, b}).size() == 1);
  }

  SUBCASE("empty list stays empty") { CHECK(dedup_corpus({}).empty()); }

  SUBCASE("agreement with pairwise brute-force duplicate detection") {
    Rng rng(53);
    std::vector<SimpleChangeGraph> corpus;
    for (int i = 0; i < 200; ++i) {
      if (!corpus.empty() && rng.chance(0.3)) {
        corpus.push_back(corpus[rng.below(corpus.size())]);  // planted duplicate
      } else {
        corpus.push_back(testing::random_scg(rng, 5));
      }
    }
    auto kept = dedup_corpus(corpus);
    std::vector<SimpleChangeGraph> expected;
    for (const auto& scg : corpus) {
      bool dup = false;
      for (const auto& seen : expected)
        if (testing::brute_force_isomorphic(scg.graph, seen.graph, LabelProjection::Full)) {
          dup = true;
          break;
        }
      if (!dup) expected.push_back(scg);
    }
    REQUIRE(kept.size() == expected.size());
    for (std::size_t i = 0; i < kept.size(); ++i) CHECK(kept[i].graph == expected[i].graph);
  }
}
