#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "ramc/graph.hpp"
#include "ramc/rng.hpp"

using namespace ramc;

namespace {

Label nl(const char* changeType, const char* cls = "Component") {
  Label l;
  l.set(key::kChangeType, changeType);
  l.set(key::kType, element::kObject);
  l.set(key::kClassName, cls);
  return l;
}

Label el(const char* changeType, const char* ref = "ports") {
  Label l;
  l.set(key::kChangeType, changeType);
  l.set(key::kType, element::kReference);
  l.set(key::kReferenceTypeName, ref);
  return l;
}

}  // namespace

TEST_CASE("weakly connected components") {
  SUBCASE("empty graph") { CHECK(weakly_connected_components({}).empty()); }

  SUBCASE("two disjoint edges give two 2-node components") {
    LabeledGraph g;
    for (int i = 0; i < 4; ++i) g.add_node(i, nl("Add"));
    g.add_edge(0, 1, el("Add"));
    g.add_edge(3, 2, el("Add"));
    auto comps = weakly_connected_components(g);
    REQUIRE(comps.size() == 2);
    CHECK(comps[0].node_count() == 2);
    CHECK(comps[1].node_count() == 2);
    // ordered by smallest contained node id
    CHECK(comps[0].has_node(0));
    CHECK(comps[1].has_node(2));
  }

  SUBCASE("a path of four nodes is one component") {
    LabeledGraph g;
    for (int i = 0; i < 4; ++i) g.add_node(i, nl("Preserve"));
    g.add_edge(0, 1, el("Add"));
    g.add_edge(2, 1, el("Add"));  // direction must not matter
    g.add_edge(2, 3, el("Add"));
    CHECK(weakly_connected_components(g).size() == 1);
  }

  SUBCASE("components preserve induced edges and labels") {
    Rng rng(7);
    for (int i = 0; i < 50; ++i) {
      LabeledGraph g = testing::random_labeled_graph(rng, 8);
      auto comps = weakly_connected_components(g);
      std::size_t nodes = 0, edges = 0;
      for (const auto& c : comps) {
        nodes += c.node_count();
        edges += c.edge_count();
      }
      CHECK(nodes == g.node_count());
      CHECK(edges == g.edge_count());
    }
  }
}

TEST_CASE("graph projection") {
  LabeledGraph g;
  Label full = nl("Add");
  full.set_dict(key::kAttributes, {{"id", "c1"}, {"name", "x"}});
  g.add_node(0, full);
  g.add_node(1, nl("Preserve"));
  g.add_edge(0, 1, el("Add"));

  SUBCASE("FULL projection is the identity") { CHECK(project(g, LabelProjection::Full) == g); }

  SUBCASE("TYPE projection drops attributes") {
    LabeledGraph p = project(g, LabelProjection::Type);
    CHECK_FALSE(p.nodes.at(0).has(key::kAttributes));
    CHECK(p.nodes.at(0).get_or(key::kClassName, "") == "Component");
  }

  SUBCASE("NONE projection equates structurally equal graphs with different labels") {
    LabeledGraph h;
    h.add_node(0, nl("Remove", "Widget"));
    h.add_node(1, nl("Add", "Port"));
    h.add_edge(0, 1, el("Remove", "owns"));
    CHECK(project(g, LabelProjection::None) == project(h, LabelProjection::None));
  }
}

TEST_CASE("wl_hash is invariant under node renumbering") {
  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    LabeledGraph g = testing::random_labeled_graph(rng, 7);
    // Renumber ids by an offset-and-reverse permutation.
    std::map<NodeId, NodeId> perm;
    const int n = static_cast<int>(g.node_count());
    for (const auto& [id, lbl] : g.nodes) perm[id] = 1000 + (n - 1 - id);
    LabeledGraph h;
    for (auto it = g.nodes.rbegin(); it != g.nodes.rend(); ++it) h.add_node(perm[it->first], it->second);
    for (const auto& e : g.edges) h.add_edge(perm[e.src], perm[e.tgt], e.label);
    for (LabelProjection p : {LabelProjection::None, LabelProjection::Change,
                              LabelProjection::Type, LabelProjection::Full})
      CHECK(wl_hash(g, p) == wl_hash(h, p));
  }
}

TEST_CASE("wl_hash separates triangle from path (confirmed non-isomorphic by brute force)") {
  LabeledGraph triangle, path;
  for (int i = 0; i < 3; ++i) {
    triangle.add_node(i, {});
    path.add_node(i, {});
  }
  triangle.add_edge(0, 1, {});
  triangle.add_edge(1, 2, {});
  triangle.add_edge(2, 0, {});
  path.add_edge(0, 1, {});
  path.add_edge(1, 2, {});
  path.add_edge(2, 1, {});  // same edge count, different shape
  REQUIRE_FALSE(testing::brute_force_isomorphic(triangle, path, LabelProjection::None));
  CHECK(wl_hash(triangle, LabelProjection::None) != wl_hash(path, LabelProjection::None));
}

TEST_CASE("wl_hash soundness: isomorphic implies equal hash on random graphs") {
  Rng rng(23);
  std::vector<LabeledGraph> graphs;
  for (int i = 0; i < 60; ++i) graphs.push_back(testing::random_labeled_graph(rng, 5));
  for (std::size_t i = 0; i < graphs.size(); ++i)
    for (std::size_t j = i + 1; j < graphs.size(); ++j) {
      if (testing::brute_force_isomorphic(graphs[i], graphs[j], LabelProjection::Full))
        CHECK(wl_hash(graphs[i], LabelProjection::Full) ==
              wl_hash(graphs[j], LabelProjection::Full));
    }
}

TEST_CASE("wl_hash rejects iterations < 1") {
  CHECK_THROWS_AS(wl_hash({}, LabelProjection::Full, 0), std::invalid_argument);
}

TEST_CASE("is_isomorphic basics") {
  LabeledGraph g;
  g.add_node(0, nl("Add"));
  g.add_node(1, nl("Preserve"));
  g.add_edge(0, 1, el("Add"));

  SUBCASE("a graph is isomorphic to itself") {
    CHECK(is_isomorphic(g, g, LabelProjection::Full));
  }

  SUBCASE("swapped changeTypes break CHANGE-projected isomorphism") {
    LabeledGraph h;
    h.add_node(0, nl("Preserve"));
    h.add_node(1, nl("Add"));
    h.add_edge(0, 1, el("Add"));
    CHECK_FALSE(is_isomorphic(g, h, LabelProjection::Change));
    CHECK(is_isomorphic(g, h, LabelProjection::None));
  }
}

TEST_CASE("anchored isomorphism can forbid an otherwise existing bijection") {
  // Two Preserve nodes with symmetric structure; anchoring one onto the
  // "wrong" counterpart must fail even though a free isomorphism exists.
  LabeledGraph g, h;
  for (int i = 0; i < 3; ++i) {
    g.add_node(i, i == 0 ? nl("Add", "Port") : nl("Preserve"));
    h.add_node(i, i == 0 ? nl("Add", "Port") : nl("Preserve"));
  }
  g.add_edge(1, 0, el("Add"));
  h.add_edge(1, 0, el("Add"));

  CHECK(is_isomorphic(g, h, LabelProjection::Full));
  CHECK(testing::brute_force_isomorphic(g, h, LabelProjection::Full,
                                        {{1, 1}, {2, 2}}));
  // Force the edge-bearing Preserve node onto the isolated one.
  CHECK_FALSE(is_isomorphic(g, h, LabelProjection::Full, {{1, 2}}));
  CHECK_FALSE(testing::brute_force_isomorphic(g, h, LabelProjection::Full, {{1, 2}}));
}

TEST_CASE("is_isomorphic agrees with the brute-force oracle on random pairs") {
  Rng rng(31);
  for (int i = 0; i < 300; ++i) {
    LabeledGraph a = testing::random_labeled_graph(rng, 5);
    LabeledGraph b = testing::random_labeled_graph(rng, 5);
    for (LabelProjection p : {LabelProjection::None, LabelProjection::Type,
                              LabelProjection::Full})
      CHECK(is_isomorphic(a, b, p) == testing::brute_force_isomorphic(a, b, p));
  }
}

TEST_CASE("projection monotonicity of isomorphism") {
  Rng rng(37);
  int checked = 0;
  for (int i = 0; i < 400; ++i) {
    LabeledGraph a = testing::random_labeled_graph(rng, 5);
    LabeledGraph b;
    if (rng.chance(0.5)) {
      // Renumbered copy: guarantees FULL-isomorphic pairs occur in the fuzz.
      const int n = static_cast<int>(a.node_count());
      for (auto it = a.nodes.rbegin(); it != a.nodes.rend(); ++it)
        b.add_node(n - 1 - it->first + 50, it->second);
      for (const auto& e : a.edges)
        b.add_edge(n - 1 - e.src + 50, n - 1 - e.tgt + 50, e.label);
    } else {
      b = testing::random_labeled_graph(rng, 5);
    }
    if (is_isomorphic(a, b, LabelProjection::Full)) {
      CHECK(is_isomorphic(a, b, LabelProjection::Type));
      ++checked;
    }
    if (is_isomorphic(a, b, LabelProjection::Type))
      CHECK(is_isomorphic(a, b, LabelProjection::Change));
    if (is_isomorphic(a, b, LabelProjection::Change))
      CHECK(is_isomorphic(a, b, LabelProjection::None));
  }
  CHECK(checked > 0);  // the fuzz actually hit isomorphic pairs
}

TEST_CASE("is_isomorphic is an equivalence relation on a fuzzed set") {
  Rng rng(41);
  std::vector<LabeledGraph> graphs;
  for (int i = 0; i < 25; ++i) graphs.push_back(testing::random_labeled_graph(rng, 4));
  const LabelProjection p = LabelProjection::Full;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    CHECK(is_isomorphic(graphs[i], graphs[i], p));  // reflexive
    for (std::size_t j = 0; j < graphs.size(); ++j) {
      const bool ij = is_isomorphic(graphs[i], graphs[j], p);
      CHECK(ij == is_isomorphic(graphs[j], graphs[i], p));  // symmetric
      if (!ij) continue;
      for (std::size_t k = 0; k < graphs.size(); ++k)
        if (is_isomorphic(graphs[j], graphs[k], p))
          CHECK(is_isomorphic(graphs[i], graphs[k], p));  // transitive
    }
  }
}

TEST_CASE("find_embedding locates proper subgraphs and respects labels") {
  LabeledGraph small, large;
  small.add_node(0, nl("Preserve"));
  small.add_node(1, nl("Add", "Port"));
  small.add_edge(0, 1, el("Add"));

  large.add_node(10, nl("Preserve"));
  large.add_node(11, nl("Add", "Port"));
  large.add_node(12, nl("Add", "Requirement"));
  large.add_edge(10, 11, el("Add"));
  large.add_edge(10, 12, el("Add", "satisfies"));

  std::map<NodeId, NodeId> mapping;
  REQUIRE(find_embedding(small, large, LabelProjection::Type, {}, &mapping));
  CHECK(mapping.at(0) == 10);
  CHECK(mapping.at(1) == 11);

  LabeledGraph wrong = small;
  wrong.nodes.at(1).set(key::kClassName, "Widget");
  CHECK_FALSE(find_embedding(wrong, large, LabelProjection::Type));
}

TEST_CASE("parallel edges are distinguished by multiplicity") {
  LabeledGraph one, two;
  one.add_node(0, nl("Preserve"));
  one.add_node(1, nl("Preserve", "Port"));
  two = one;
  one.add_edge(0, 1, el("Add"));
  two.add_edge(0, 1, el("Add"));
  two.add_edge(0, 1, el("Add"));
  CHECK_FALSE(is_isomorphic(one, two, LabelProjection::Full));
  CHECK(wl_hash(one, LabelProjection::Full) != wl_hash(two, LabelProjection::Full));
}
