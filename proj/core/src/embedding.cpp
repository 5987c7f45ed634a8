#include "ramc/embedding.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

#include "nlohmann/json.hpp"
#include "ramc/http.hpp"
#include "ramc/rng.hpp"

namespace ramc {

std::vector<double> HashEmbedder::embed(const std::string& text) const {
  std::vector<double> v(kDimension, 0.0);
  std::string token;
  bool any = false;
  auto flush = [&] {
    if (token.empty()) return;
    any = true;
    const std::uint64_t h = fnv1a(token);
    const std::size_t bucket = static_cast<std::size_t>(h % kDimension);
    const double sign = (mix64(h ^ 0x5349474eull) & 1) ? 1.0 : -1.0;  // "SIGN" salt
    v[bucket] += sign;
    token.clear();
  };
  for (unsigned char c : text) {
    if (std::isalnum(c))
      token += static_cast<char>(std::tolower(c));
    else
      flush();
  }
  flush();
  if (!any) throw std::invalid_argument("hash_embed: empty text");
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm == 0.0) throw std::invalid_argument("hash_embed: token signs cancelled out");
  for (double& x : v) x /= norm;
  return v;
}

ApiEmbedder::ApiEmbedder(std::string baseUrl, std::string apiKey, std::string model, int dimension)
    : baseUrl_(std::move(baseUrl)),
      apiKey_(std::move(apiKey)),
      model_(std::move(model)),
      dimension_(dimension) {}

std::unique_ptr<ApiEmbedder> ApiEmbedder::from_env(const std::string& model, int dimension) {
  const char* base = std::getenv("EMBED_API_BASE");
  const char* key = std::getenv("EMBED_API_KEY");
  if (!base) throw std::runtime_error("EMBED_API_BASE is not set");
  return std::make_unique<ApiEmbedder>(base, key ? key : "", model, dimension);
}

std::vector<double> ApiEmbedder::embed(const std::string& text) const {
  if (text.empty()) throw std::invalid_argument("embed: empty text");
  nlohmann::json body = {{"model", model_}, {"input", text}};
  const std::string response =
      http_post_json(baseUrl_, "/v1/embeddings", apiKey_, body.dump());
  nlohmann::json j = nlohmann::json::parse(response);
  std::vector<double> v = j.at("data").at(0).at("embedding").get<std::vector<double>>();
  if (static_cast<int>(v.size()) != dimension_)
    throw std::runtime_error("embedding dimension mismatch: got " + std::to_string(v.size()));
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm > 0)
    for (double& x : v) x /= norm;
  return v;
}

void VectorStore::add(StoredExample example) {
  if (static_cast<int>(example.vector.size()) != dimension_)
    throw std::invalid_argument("vector dimension mismatch for example " + example.exampleId);
  for (const auto& e : examples_)
    if (e.exampleId == example.exampleId)
      throw std::invalid_argument("duplicate example id: " + example.exampleId);
  examples_.push_back(std::move(example));
}

void VectorStore::save(const std::filesystem::path& file) const {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write store file " + file.string());
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  nlohmann::json header = {
      {"embedder", embedderTag_},
      {"dimension", dimension_},
      {"created", std::chrono::duration_cast<std::chrono::seconds>(now).count()}};
  out << header.dump() << "\n";
  for (const auto& e : examples_) {
    nlohmann::json record = {{"id", e.exampleId},
                             {"text", e.text},
                             {"vector", e.vector},
                             {"meta",
                              {{"repository", e.meta.repository},
                               {"revisionPair", e.meta.revisionPair},
                               {"componentIndex", e.meta.componentIndex}}}};
    out << record.dump() << "\n";
  }
}

VectorStore VectorStore::load(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read store file " + file.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("store file is empty: " + file.string());
  nlohmann::json header = nlohmann::json::parse(line);
  VectorStore store(header.at("embedder").get<std::string>(), header.at("dimension").get<int>());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    StoredExample e;
    e.exampleId = j.at("id").get<std::string>();
    e.text = j.at("text").get<std::string>();
    e.vector = j.at("vector").get<std::vector<double>>();
    if (j.contains("meta")) {
      const auto& m = j.at("meta");
      e.meta.repository = m.value("repository", "");
      e.meta.revisionPair = m.value("revisionPair", "");
      e.meta.componentIndex = m.value("componentIndex", -1);
    }
    store.add(std::move(e));
  }
  return store;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("cosine: dimension mismatch");
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  return dot;  // vectors are unit-norm
}

namespace {

std::vector<const StoredExample*> ranked(const VectorStore& store,
                                         const std::vector<double>& queryVector,
                                         const std::set<std::string>& excludeIds) {
  std::vector<std::pair<double, const StoredExample*>> scored;
  scored.reserve(store.size());
  for (const auto& e : store.examples()) {
    if (excludeIds.count(e.exampleId)) continue;
    scored.emplace_back(cosine(queryVector, e.vector), &e);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second->exampleId < b.second->exampleId;
  });
  std::vector<const StoredExample*> out;
  out.reserve(scored.size());
  for (const auto& [sim, e] : scored) out.push_back(e);
  return out;
}

}  // namespace

std::vector<const StoredExample*> query(const VectorStore& store,
                                        const std::vector<double>& queryVector, int n) {
  if (n < 1) throw std::invalid_argument("query: n must be >= 1");
  if (store.empty()) throw std::invalid_argument("query: empty store");
  auto all = ranked(store, queryVector, {});
  if (static_cast<int>(all.size()) > n) all.resize(n);
  return all;
}

std::vector<const StoredExample*> diversify(const std::vector<const StoredExample*>& pool, int k,
                                            int iterations, std::uint64_t seed) {
  if (k > static_cast<int>(pool.size()))
    throw std::invalid_argument("diversify: k exceeds pool size");
  if (k <= 0) return {};

  Rng rng(seed);
  std::vector<std::size_t> slots = rng.sample_indices(pool.size(), static_cast<std::size_t>(k));
  std::set<std::size_t> inSet(slots.begin(), slots.end());

  auto dist = [&](std::size_t a, std::size_t b) {
    return 1.0 - cosine(pool[a]->vector, pool[b]->vector);
  };
  auto min_dist_to_rest = [&](std::size_t candidate, std::size_t excludedSlot) {
    double best = 2.0;  // distances on unit vectors lie in [0, 2]
    bool any = false;
    for (std::size_t s = 0; s < slots.size(); ++s) {
      if (s == excludedSlot) continue;
      best = std::min(best, dist(candidate, slots[s]));
      any = true;
    }
    return any ? best : 0.0;
  };

  // Visit every initial slot once (seeded order), then random slots.
  std::vector<std::size_t> firstVisits(slots.size());
  for (std::size_t i = 0; i < firstVisits.size(); ++i) firstVisits[i] = i;
  rng.shuffle(firstVisits);

  for (int it = 0; it < iterations; ++it) {
    const std::size_t slot = (it < static_cast<int>(firstVisits.size()))
                                 ? firstVisits[static_cast<std::size_t>(it)]
                                 : static_cast<std::size_t>(rng.below(slots.size()));
    const std::size_t current = slots[slot];
    std::size_t best = current;
    double bestVal = min_dist_to_rest(current, slot);
    for (std::size_t c = 0; c < pool.size(); ++c) {
      if (inSet.count(c) && c != current) continue;
      const double val = min_dist_to_rest(c, slot);
      if (val > bestVal ||
          (val == bestVal && pool[c]->exampleId < pool[best]->exampleId)) {
        best = c;
        bestVal = val;
      }
    }
    if (best != current) {
      inSet.erase(current);
      inSet.insert(best);
      slots[slot] = best;
    }
  }

  std::vector<std::size_t> chosen(inSet.begin(), inSet.end());
  std::sort(chosen.begin(), chosen.end());  // pool order = similarity order
  std::vector<const StoredExample*> out;
  out.reserve(chosen.size());
  for (std::size_t i : chosen) out.push_back(pool[i]);
  return out;
}

std::vector<const StoredExample*> retrieve_few_shots(const VectorStore& store,
                                                     const Embedder& embedder,
                                                     const std::string& queryText, int k,
                                                     const std::set<std::string>& excludeIds) {
  if (k <= 0 || store.empty()) return {};
  const std::vector<double> qv = embedder.embed(queryText);
  auto pool = ranked(store, qv, excludeIds);
  // Pool of 2k: the similarity stage must constrain the pool, or the
  // diversification below evicts the query's own pattern cluster on small
  // stores. Keeps the retrieved set similar first, diverse second.
  const std::size_t poolSize = std::min<std::size_t>(pool.size(), 2u * static_cast<unsigned>(k));
  pool.resize(poolSize);
  if (pool.empty()) return {};
  const int kk = std::min<int>(k, static_cast<int>(pool.size()));
  return diversify(pool, kk, 3 * k, fnv1a(queryText));
}

}  // namespace ramc
