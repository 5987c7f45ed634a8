#include "ramc/graph.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "ramc/rng.hpp"

namespace ramc {

void LabeledGraph::add_node(NodeId id, Label label) {
  auto [it, inserted] = nodes.emplace(id, std::move(label));
  if (!inserted) throw std::invalid_argument("duplicate node id " + std::to_string(id));
}

void LabeledGraph::add_edge(NodeId src, NodeId tgt, Label label) {
  if (!has_node(src) || !has_node(tgt))
    throw std::invalid_argument("edge endpoint not in graph: " + std::to_string(src) + "->" +
                                std::to_string(tgt));
  edges.push_back(Edge{src, tgt, std::move(label)});
}

std::vector<LabeledGraph> weakly_connected_components(const LabeledGraph& g) {
  std::map<NodeId, NodeId> parent;
  for (const auto& [id, label] : g.nodes) parent[id] = id;

  auto find = [&](NodeId x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  auto unite = [&](NodeId a, NodeId b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent[b] = a;  // smaller id wins, keeps roots minimal
  };
  for (const auto& e : g.edges) unite(e.src, e.tgt);

  std::map<NodeId, LabeledGraph> by_root;  // keyed by smallest contained node id
  for (const auto& [id, label] : g.nodes) by_root[find(id)].add_node(id, label);
  for (const auto& e : g.edges) by_root[find(e.src)].add_edge(e.src, e.tgt, e.label);

  std::vector<LabeledGraph> out;
  out.reserve(by_root.size());
  for (auto& [root, comp] : by_root) out.push_back(std::move(comp));
  return out;
}

LabeledGraph project(const LabeledGraph& g, LabelProjection p) {
  if (p == LabelProjection::Full) return g;
  LabeledGraph out;
  for (const auto& [id, label] : g.nodes) out.add_node(id, project(label, p));
  for (const auto& e : g.edges) out.add_edge(e.src, e.tgt, project(e.label, p));
  return out;
}

LabeledGraph without_attribute_ids(const LabeledGraph& g) {
  LabeledGraph out;
  for (const auto& [id, label] : g.nodes) out.add_node(id, without_attribute_id(label));
  for (const auto& e : g.edges) out.add_edge(e.src, e.tgt, e.label);
  return out;
}

namespace {

std::uint64_t label_hash(const Label& label, LabelProjection p) {
  return fnv1a(project(label, p).to_text());
}

struct WlState {
  std::map<NodeId, std::uint64_t> color;
};

WlState wl_colors(const LabeledGraph& g, LabelProjection p, int iterations) {
  WlState st;
  for (const auto& [id, label] : g.nodes) st.color[id] = label_hash(label, p);

  // Precompute incident edge signatures (direction tag + projected edge label hash).
  struct Incident {
    NodeId other;
    std::uint64_t edge_sig;
  };
  std::map<NodeId, std::vector<Incident>> incident;
  for (const auto& e : g.edges) {
    std::uint64_t lh = label_hash(e.label, p);
    incident[e.src].push_back({e.tgt, hash_combine(0x6f757400u, lh)});  // "out"
    incident[e.tgt].push_back({e.src, hash_combine(0x696e0000u, lh)});  // "in"
  }

  for (int round = 0; round < iterations; ++round) {
    std::map<NodeId, std::uint64_t> next;
    for (const auto& [id, c] : st.color) {
      std::vector<std::uint64_t> sigs;
      auto it = incident.find(id);
      if (it != incident.end()) {
        sigs.reserve(it->second.size());
        for (const Incident& inc : it->second)
          sigs.push_back(hash_combine(inc.edge_sig, st.color.at(inc.other)));
      }
      std::sort(sigs.begin(), sigs.end());
      std::uint64_t h = c;
      for (std::uint64_t s : sigs) h = hash_combine(h, s);
      next[id] = mix64(h);
    }
    st.color = std::move(next);
  }
  return st;
}

}  // namespace

std::uint64_t wl_hash(const LabeledGraph& g, LabelProjection p, int iterations) {
  if (iterations < 1) throw std::invalid_argument("wl_hash: iterations must be >= 1");
  WlState st = wl_colors(g, p, iterations);
  std::vector<std::uint64_t> colors;
  colors.reserve(st.color.size());
  for (const auto& [id, c] : st.color) colors.push_back(c);
  std::sort(colors.begin(), colors.end());
  std::uint64_t h = hash_combine(g.node_count(), g.edge_count());
  for (std::uint64_t c : colors) h = hash_combine(h, c);
  return h;
}

namespace {

// Multiset of projected edge-label hashes per ordered node pair.
using PairEdges = std::map<std::pair<NodeId, NodeId>, std::vector<std::uint64_t>>;

PairEdges pair_edges(const LabeledGraph& g, LabelProjection p) {
  PairEdges out;
  for (const auto& e : g.edges) out[{e.src, e.tgt}].push_back(label_hash(e.label, p));
  for (auto& [k, v] : out) std::sort(v.begin(), v.end());
  return out;
}

struct Degrees {
  int in = 0;
  int out = 0;
  bool operator==(const Degrees&) const = default;
};

std::map<NodeId, Degrees> degrees(const LabeledGraph& g) {
  std::map<NodeId, Degrees> d;
  for (const auto& [id, label] : g.nodes) d[id] = {};
  for (const auto& e : g.edges) {
    d[e.src].out++;
    d[e.tgt].in++;
  }
  return d;
}

struct IsoMatcher {
  const LabeledGraph& g1;
  const LabeledGraph& g2;
  LabelProjection p;
  PairEdges pe1, pe2;
  std::map<NodeId, NodeId> mapping;          // g1 -> g2
  std::map<NodeId, NodeId> reverse;          // g2 -> g1
  std::vector<NodeId> order;                 // unmapped g1 nodes in search order
  std::map<NodeId, std::vector<NodeId>> cands;

  bool edges_consistent(NodeId v, NodeId w) const {
    // Compare edge multisets between v and every mapped node (both directions,
    // including self-loops) against their images.
    auto probe = [&](NodeId a, NodeId b, NodeId ia, NodeId ib) {
      auto it1 = pe1.find({a, b});
      auto it2 = pe2.find({ia, ib});
      const bool has1 = it1 != pe1.end();
      const bool has2 = it2 != pe2.end();
      if (has1 != has2) return false;
      if (has1 && it1->second != it2->second) return false;
      return true;
    };
    if (!probe(v, v, w, w)) return false;
    for (const auto& [u, iu] : mapping) {
      if (!probe(v, u, w, iu)) return false;
      if (!probe(u, v, iu, w)) return false;
    }
    return true;
  }

  bool search(std::size_t idx) {
    if (idx == order.size()) return true;
    NodeId v = order[idx];
    for (NodeId w : cands.at(v)) {
      if (reverse.count(w)) continue;
      if (!edges_consistent(v, w)) continue;
      mapping[v] = w;
      reverse[w] = v;
      if (search(idx + 1)) return true;
      mapping.erase(v);
      reverse.erase(w);
    }
    return false;
  }
};

}  // namespace

bool is_isomorphic(const LabeledGraph& g1, const LabeledGraph& g2, LabelProjection p,
                   const std::map<NodeId, NodeId>& anchors) {
  if (g1.node_count() != g2.node_count() || g1.edge_count() != g2.edge_count()) return false;

  // Anchor sanity: nodes exist, map injective, labels agree under projection.
  std::set<NodeId> anchor_images;
  for (const auto& [a, b] : anchors) {
    if (!g1.has_node(a) || !g2.has_node(b)) return false;
    if (!anchor_images.insert(b).second) return false;
    if (project(g1.nodes.at(a), p) != project(g2.nodes.at(b), p)) return false;
  }

  if (wl_hash(g1, p) != wl_hash(g2, p)) return false;  // fast reject, sound by construction

  WlState c1 = wl_colors(g1, p, 3);
  WlState c2 = wl_colors(g2, p, 3);
  auto d1 = degrees(g1);
  auto d2 = degrees(g2);

  IsoMatcher m{g1, g2, p, pair_edges(g1, p), pair_edges(g2, p), {}, {}, {}, {}};
  for (const auto& [a, b] : anchors) {
    m.mapping[a] = b;
    m.reverse[b] = a;
  }
  // Anchored pairs must themselves be structurally consistent.
  for (const auto& [a, b] : anchors) {
    m.mapping.erase(a);
    m.reverse.erase(b);
    if (!m.edges_consistent(a, b)) return false;
    m.mapping[a] = b;
    m.reverse[b] = a;
  }

  for (const auto& [v, label] : g1.nodes) {
    if (anchors.count(v)) continue;
    std::vector<NodeId> cand;
    for (const auto& [w, wl] : g2.nodes) {
      if (anchor_images.count(w)) continue;
      if (c1.color.at(v) != c2.color.at(w)) continue;
      if (d1.at(v) != d2.at(w)) continue;
      if (project(label, p) != project(wl, p)) continue;
      cand.push_back(w);
    }
    if (cand.empty()) return false;
    m.cands[v] = std::move(cand);
    m.order.push_back(v);
  }
  std::stable_sort(m.order.begin(), m.order.end(), [&](NodeId a, NodeId b) {
    return m.cands.at(a).size() < m.cands.at(b).size();
  });
  return m.search(0);
}

namespace {

struct EmbedMatcher {
  const LabeledGraph& small;
  const LabeledGraph& large;
  LabelProjection p;
  PairEdges pe_small, pe_large;
  std::map<NodeId, NodeId> mapping;
  std::map<NodeId, NodeId> reverse;
  std::vector<NodeId> order;
  std::map<NodeId, std::vector<NodeId>> cands;

  bool edges_embeddable(NodeId v, NodeId w) const {
    // Every small edge multiset must be contained in the large counterpart.
    auto contained = [&](NodeId a, NodeId b, NodeId ia, NodeId ib) {
      auto it1 = pe_small.find({a, b});
      if (it1 == pe_small.end()) return true;
      auto it2 = pe_large.find({ia, ib});
      if (it2 == pe_large.end()) return false;
      return std::includes(it2->second.begin(), it2->second.end(), it1->second.begin(),
                           it1->second.end());
    };
    if (!contained(v, v, w, w)) return false;
    for (const auto& [u, iu] : mapping) {
      if (!contained(v, u, w, iu)) return false;
      if (!contained(u, v, iu, w)) return false;
    }
    return true;
  }

  bool search(std::size_t idx, std::map<NodeId, NodeId>* out) {
    if (idx == order.size()) {
      if (out) *out = mapping;
      return true;
    }
    NodeId v = order[idx];
    for (NodeId w : cands.at(v)) {
      if (reverse.count(w)) continue;
      if (!edges_embeddable(v, w)) continue;
      mapping[v] = w;
      reverse[w] = v;
      if (search(idx + 1, out)) return true;
      mapping.erase(v);
      reverse.erase(w);
    }
    return false;
  }
};

}  // namespace

bool find_embedding(const LabeledGraph& small, const LabeledGraph& large, LabelProjection p,
                    const std::map<NodeId, NodeId>& anchors,
                    std::map<NodeId, NodeId>* mapping_out) {
  if (small.node_count() > large.node_count() || small.edge_count() > large.edge_count())
    return false;

  std::set<NodeId> anchor_images;
  for (const auto& [a, b] : anchors) {
    if (!small.has_node(a) || !large.has_node(b)) return false;
    if (!anchor_images.insert(b).second) return false;
    if (project(small.nodes.at(a), p) != project(large.nodes.at(b), p)) return false;
  }

  auto ds = degrees(small);
  auto dl = degrees(large);

  EmbedMatcher m{small, large, p, pair_edges(small, p), pair_edges(large, p), {}, {}, {}, {}};
  for (const auto& [a, b] : anchors) {
    m.mapping[a] = b;
    m.reverse[b] = a;
  }
  for (const auto& [a, b] : anchors) {
    m.mapping.erase(a);
    m.reverse.erase(b);
    if (!m.edges_embeddable(a, b)) return false;
    m.mapping[a] = b;
    m.reverse[b] = a;
  }

  for (const auto& [v, label] : small.nodes) {
    if (anchors.count(v)) continue;
    std::vector<NodeId> cand;
    for (const auto& [w, wl] : large.nodes) {
      if (anchor_images.count(w)) continue;
      if (dl.at(w).in < ds.at(v).in || dl.at(w).out < ds.at(v).out) continue;
      if (project(label, p) != project(wl, p)) continue;
      cand.push_back(w);
    }
    if (cand.empty()) return false;
    m.cands[v] = std::move(cand);
    m.order.push_back(v);
  }
  std::stable_sort(m.order.begin(), m.order.end(), [&](NodeId a, NodeId b) {
    return m.cands.at(a).size() < m.cands.at(b).size();
  });
  if (m.order.empty() && mapping_out) *mapping_out = m.mapping;
  return m.search(0, mapping_out);
}

}  // namespace ramc
