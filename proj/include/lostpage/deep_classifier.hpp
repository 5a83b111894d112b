#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lostpage/naive_bayes.hpp"
#include "lostpage/ontology.hpp"
#include "lostpage/resources.hpp"
#include "lostpage/tokenize.hpp"

namespace lostpage {

enum class GramScheme { ThreeGram, AllGram };

std::string_view to_string(GramScheme g);
/// "3", "three", "3gram", "all", "allgram", "all-gram". Throws ConfigError.
GramScheme parse_gram_scheme(std::string_view name);
TokenMethod gram_method(GramScheme g);

/// Features of a bare URI (TLD stripped) in the given gram space.
TokenBag deep_query_features(std::string_view uri, GramScheme grams, const Resources& resources);
/// URI features plus title and description words expanded the same way.
TokenBag deep_entry_features(const OntologyEntry& entry, GramScheme grams, const Resources& resources);

/// Cosine similarity of the term-frequency vectors of two bags.
double cosine_similarity(const TokenBag& a, const TokenBag& b);

struct CandidateCategory {
  CategoryPath path;
  double score = 0.0;  // mean cosine over the category's entry vectors
};

/// One TF vector per ontology entry, grouped by full category path, with an
/// inverted index for scoring. Immutable after build; scoring is
/// thread-safe.
class CategoryVectorIndex {
 public:
  /// Throws ConfigError for an empty index. Entries without features are
  /// excluded and counted.
  static CategoryVectorIndex build(const CategoryIndex& index, GramScheme grams, const Resources& resources,
                                   unsigned threads = 0);

  GramScheme grams() const { return grams_; }
  const std::vector<CategoryPath>& categories() const { return categories_; }
  size_t vector_count(size_t category) const { return norms_.at(category).size(); }
  size_t total_vectors() const;
  size_t excluded_entries() const { return excluded_; }

  /// Every category with a positive score, in category order. Restricted to
  /// one top-level label when `within_top_level` is given.
  std::vector<CandidateCategory> score(const TokenBag& query,
                                       const std::optional<std::string>& within_top_level = std::nullopt) const;

  void save(std::ostream& out) const;
  static CategoryVectorIndex load(std::istream& in);
  void save(const std::string& path) const;
  static CategoryVectorIndex load(const std::string& path);

 private:
  struct Posting {
    uint32_t category;
    uint32_t entry;
    uint32_t tf;
  };
  void add_vector(uint32_t category, const std::map<std::string, uint32_t>& tf);

  GramScheme grams_ = GramScheme::AllGram;
  std::vector<CategoryPath> categories_;
  std::vector<std::vector<double>> norms_;  // per category, per entry vector
  std::unordered_map<std::string, std::vector<Posting>> postings_;
  size_t excluded_ = 0;
};

/// Highest-scoring categories, score descending with ties by serialized path;
/// at most n. Empty when the query shares no feature with any vector.
std::vector<CandidateCategory> top_candidates(const CategoryVectorIndex& vindex, const TokenBag& query,
                                              size_t n = 10,
                                              const std::optional<std::string>& within_top_level = std::nullopt);

/// Candidate categories arranged in the hierarchy. A candidate that shares no
/// ancestor below its top-level label with any other candidate keeps its
/// whole ancestor chain; all other internal nodes are dropped.
struct PrunedTree {
  std::vector<CategoryPath> candidates;  // input order, duplicates removed
  std::set<CategoryPath> nodes;          // candidates plus retained ancestors

  bool is_candidate(const CategoryPath& p) const;
  std::vector<CategoryPath> retained_ancestors() const;
};

/// Throws ConfigError if `candidates` is empty.
PrunedTree prune_tree(std::span<const CategoryPath> candidates);

/// Per-category training documents for deep classification, featurized on
/// first use. Thread-safe.
class DeepDocumentCache {
 public:
  DeepDocumentCache(const CategoryIndex& index, GramScheme grams, const Resources& resources)
      : index_(index), grams_(grams), resources_(resources) {}
  /// Non-empty feature bags of the entries filed exactly under `path`.
  std::shared_ptr<const std::vector<TokenBag>> documents(const CategoryPath& path) const;
  GramScheme grams() const { return grams_; }

 private:
  const CategoryIndex& index_;
  GramScheme grams_;
  const Resources& resources_;
  mutable std::shared_mutex mutex_;
  mutable std::map<std::string, std::shared_ptr<const std::vector<TokenBag>>> cache_;
};

struct DeepResult {
  CategoryPath path;
  std::vector<ClassPosterior> ranking;  // empty when no classifier was needed
  std::vector<CategoryPath> removed;    // candidates without usable documents
  bool oov_fallback = false;            // query shared nothing with the documents
};

/// Trains Naive Bayes over the tree's candidate paths (documents: entries
/// filed under each candidate) and classifies the query. When the query has
/// no in-vocabulary feature the most similar remaining candidate is
/// returned. Throws DeepClassificationError if no candidate has documents.
DeepResult classify_deep(const PrunedTree& tree, const DeepDocumentCache& documents, const TokenBag& query,
                         double alpha = 1.0);
DeepResult classify_deep(const PrunedTree& tree, const CategoryIndex& index, const TokenBag& query,
                         GramScheme grams, const Resources& resources, double alpha = 1.0);

/// True iff the first `level` labels of both paths agree (a path shorter
/// than `level` is compared whole). Throws ConfigError for level < 1.
bool evaluate_levels(const CategoryPath& truth, const CategoryPath& predicted, int level);

}  // namespace lostpage
