#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "lostpage/archive.hpp"
#include "lostpage/config.hpp"
#include "lostpage/deep_classifier.hpp"
#include "lostpage/naive_bayes.hpp"
#include "lostpage/ontology.hpp"
#include "lostpage/ranker.hpp"
#include "lostpage/resources.hpp"
#include "lostpage/timeutil.hpp"

namespace lostpage {

/// First-level feature configuration: all-grams over the URI, TLD and
/// digits stripped.
inline constexpr TokenMethod kL1Method = TokenMethod::AllGramsFromUri;
inline constexpr TokenVariants kL1Variants{.strip_tld = true, .strip_numbers = true, .strip_stopwords = false};

/// One labeled bag per index entry, labeled with its top-level category.
/// Entries whose URI does not tokenize (or yields nothing) are skipped.
std::vector<LabeledBag> l1_corpus(const CategoryIndex& index, TokenMethod method, TokenVariants variants,
                                  const Resources& resources);
NaiveBayesModel train_l1(const CategoryIndex& index, const Resources& resources, double alpha = 1.0,
                         TokenMethod method = kL1Method, TokenVariants variants = kL1Variants);

enum class PathTaken {
  OntologyPrimary,    // requested URI found in the ontology index
  OntologySecondary,  // found through the secondary ontology
  ClassifiedDeep,     // first-level plus deep classification
  ClassifiedShallow,  // deep classification failed; first-level category entries
  Unclassifiable,     // no ontology hit and no first-level label
};
std::string_view to_string(PathTaken p);

struct RecommendationRequest {
  std::string uri;
  std::optional<Timestamp> datetime;  // defaults to `now`
  size_t top_n = 10;
  RankWeights weights;
  std::optional<Timestamp> now;  // current time; pinned for reproducible output
  nlohmann::json config = nlohmann::json::object();  // resolved configuration snapshot
};

struct RecommenderOptions {
  GramScheme grams = GramScheme::AllGram;
  size_t deep_candidates = 10;
  size_t max_candidates = 200;  // cap for the shallow fallback
  double alpha = 1.0;
  bool temporal_literal = false;
  Timestamp earliest = default_earliest_datetime();
};

struct RecommendationResult {
  std::string uri;  // normalized request
  Timestamp requested;
  Timestamp now;
  PathTaken path = PathTaken::Unclassifiable;
  std::optional<std::string> l1_label;
  std::optional<CategoryPath> category;
  std::vector<std::string> candidates;  // before archive filtering, request excluded
  std::vector<std::string> unarchived;
  std::vector<std::string> failed;
  std::vector<Recommendation> recommendations;
  std::string reason;  // empty on success; "unclassifiable", "no candidates", "no archived candidates"
  std::vector<std::string> trace;
  std::vector<std::string> warnings;
  nlohmann::json config = nlohmann::json::object();

  bool empty() const { return recommendations.empty(); }
  nlohmann::json to_json() const;
};

/// Candidate set for a request (Algorithm steps 0 to 2), before archive
/// filtering.
struct CandidateSet {
  PathTaken path = PathTaken::Unclassifiable;
  std::optional<std::string> l1_label;
  std::optional<CategoryPath> category;
  std::vector<std::string> uris;  // deduplicated by SURT, request excluded
  std::vector<std::string> trace;
  std::vector<std::string> warnings;
};

/// Runs the recommendation pipeline: ontology lookup, first-level and deep
/// classification, archive filtering and ranking. Thread-safe.
class Recommender {
 public:
  Recommender(std::shared_ptr<const CategoryIndex> index, std::shared_ptr<const NaiveBayesModel> l1,
              std::shared_ptr<const CategoryVectorIndex> vectors, std::shared_ptr<const OntologyProvider> secondary,
              std::shared_ptr<const ArchiveGateway> gateway, RecommenderOptions options = {},
              const Resources& resources = Resources::bundled());

  /// Throws ParseError for an unparseable URI and ConfigError for invalid
  /// weights or top_n. Empty results carry a reason.
  RecommendationResult recommend(const RecommendationRequest& request) const;
  CandidateSet candidates(std::string_view uri) const;

  const RecommenderOptions& options() const { return options_; }

 private:
  void collect(CandidateSet& set, const std::string& request_surt,
               const std::vector<const OntologyEntry*>& entries, size_t cap) const;

  std::shared_ptr<const CategoryIndex> index_;
  std::shared_ptr<const NaiveBayesModel> l1_;
  std::shared_ptr<const CategoryVectorIndex> vectors_;
  std::shared_ptr<const OntologyProvider> secondary_;
  std::shared_ptr<const ArchiveGateway> gateway_;
  RecommenderOptions options_;
  const Resources& resources_;
  std::unique_ptr<DeepDocumentCache> documents_;
};

RecommenderOptions recommender_options(const Settings& settings);
GatewayConfig gateway_config(const Settings& settings);

/// Ontology index from `index`, else `<fixtures>/ontology.tsv`. Throws
/// ConfigError when neither is configured.
std::shared_ptr<const CategoryIndex> load_configured_index(const Settings& settings);

/// Wires a recommender from configuration. The first-level model and the
/// vector index are loaded when configured and built from the index
/// otherwise. Evidence comes from the fixtures directory when set, else
/// from the aggregator and damage service. Notes describe what was loaded.
std::shared_ptr<Recommender> make_recommender(const Settings& settings, const Resources& resources,
                                              std::vector<std::string>* notes = nullptr);

}  // namespace lostpage
