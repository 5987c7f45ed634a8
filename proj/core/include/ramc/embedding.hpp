#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "ramc/change_graph.hpp"

namespace ramc {

/// Text embedding contract: unit-norm vectors of a fixed dimension,
/// deterministic for fixed input and configuration.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual int dimension() const = 0;
  /// Unit-norm embedding. Throws std::invalid_argument on empty text.
  virtual std::vector<double> embed(const std::string& text) const = 0;
  /// Identifies the embedding configuration ("hash-384" or "api:<model>").
  virtual std::string tag() const = 0;
};

/// Deterministic bag-of-tokens embedding: lowercase alphanumeric tokens hashed
/// into 384 signed buckets, counts accumulated, L2-normalized.
class HashEmbedder : public Embedder {
 public:
  static constexpr int kDimension = 384;
  int dimension() const override { return kDimension; }
  std::vector<double> embed(const std::string& text) const override;
  std::string tag() const override { return "hash-384"; }
};

/// HTTP embedding backend (EMBED_API_BASE/EMBED_API_KEY), OpenAI-style
/// /v1/embeddings wire format.
class ApiEmbedder : public Embedder {
 public:
  ApiEmbedder(std::string baseUrl, std::string apiKey, std::string model, int dimension);
  static std::unique_ptr<ApiEmbedder> from_env(const std::string& model, int dimension);

  int dimension() const override { return dimension_; }
  std::vector<double> embed(const std::string& text) const override;
  std::string tag() const override { return "api:" + model_; }

 private:
  std::string baseUrl_;
  std::string apiKey_;
  std::string model_;
  int dimension_;
};

struct StoredExample {
  std::string exampleId;
  std::string text;  // EdgeList serialization
  std::vector<double> vector;
  Provenance meta;
};

/// In-memory store of embedded examples, persisted as line-delimited records
/// behind a header identifying the embedder. Stores built with different
/// embedders are never mixed.
class VectorStore {
 public:
  VectorStore() = default;
  VectorStore(std::string embedderTag, int dimension)
      : embedderTag_(std::move(embedderTag)), dimension_(dimension) {}

  const std::string& embedder_tag() const { return embedderTag_; }
  int dimension() const { return dimension_; }
  const std::vector<StoredExample>& examples() const { return examples_; }
  bool empty() const { return examples_.empty(); }
  std::size_t size() const { return examples_.size(); }

  /// Rejects duplicate example ids and dimension mismatches.
  void add(StoredExample example);

  void save(const std::filesystem::path& file) const;
  static VectorStore load(const std::filesystem::path& file);

 private:
  std::string embedderTag_;
  int dimension_ = 0;
  std::vector<StoredExample> examples_;
};

double cosine(const std::vector<double>& a, const std::vector<double>& b);

/// Exact top-n by cosine similarity, descending, ties by exampleId.
/// Throws on an empty store or n < 1.
std::vector<const StoredExample*> query(const VectorStore& store,
                                        const std::vector<double>& queryVector, int n);

/// Swap-based diversity selection: start from k random pool elements, then
/// repeatedly replace one by the candidate maximizing the minimum distance
/// (1 - cosine) to the rest; each initial slot is visited at least once.
/// Deterministic given the seed; result keeps pool order. Throws if k > |pool|.
std::vector<const StoredExample*> diversify(const std::vector<const StoredExample*>& pool, int k,
                                            int iterations, std::uint64_t seed);

/// Similarity pool of size 4k followed by diversification down to k, seeded
/// from the query text. Returns at most k examples, most similar first; an
/// empty store yields an empty list (callers may proceed zero-shot).
std::vector<const StoredExample*> retrieve_few_shots(const VectorStore& store,
                                                     const Embedder& embedder,
                                                     const std::string& queryText, int k,
                                                     const std::set<std::string>& excludeIds = {});

}  // namespace ramc
