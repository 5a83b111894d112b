#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lostpage/metrics.hpp"
#include "lostpage/resources.hpp"
#include "lostpage/tokenize.hpp"

namespace lostpage {

struct LabeledBag {
  TokenBag bag;
  std::string label;
};

struct ClassPosterior {
  std::string label;
  double posterior = 0.0;
  double log_score = 0.0;  // unnormalized joint log-probability
};

struct Classification {
  std::string label;
  std::vector<ClassPosterior> ranking;  // posterior descending, ties in class order
  size_t used_features = 0;             // in-vocabulary features that were scored
};

/// Multinomial Naive Bayes with add-alpha smoothing over the training
/// vocabulary. Immutable after training; classify() is thread-safe.
class NaiveBayesModel {
 public:
  /// Throws TrainingError for an empty corpus, a declared class without
  /// documents, a label outside `declared_classes`, mixed method/variant
  /// bags, or alpha <= 0. Classes are ordered lexicographically.
  static NaiveBayesModel train(std::span<const LabeledBag> corpus, double alpha = 1.0,
                               std::span<const std::string> declared_classes = {});

  const std::vector<std::string>& classes() const { return classes_; }
  TokenMethod method() const { return method_; }
  TokenVariants variants() const { return variants_; }
  double alpha() const { return alpha_; }
  size_t vocabulary_size() const { return counts_.size(); }
  bool in_vocabulary(std::string_view feature) const;
  /// Sorted vocabulary.
  std::vector<std::string> vocabulary() const;
  size_t document_count(size_t cls) const { return doc_counts_.at(cls); }

  double class_log_prior(size_t cls) const { return log_prior_.at(cls); }
  /// log P(feature | class); the feature must be in the vocabulary.
  double feature_log_likelihood(size_t cls, std::string_view feature) const;

  /// Per-class unnormalized log scores; out-of-vocabulary features are ignored.
  std::vector<double> log_scores(const TokenBag& bag, size_t* used = nullptr) const;
  /// nullopt when no feature of the bag is in the vocabulary (unclassifiable).
  /// Throws ConfigError if the bag's method/variants differ from training.
  std::optional<Classification> classify(const TokenBag& bag) const;

  void save(std::ostream& out) const;
  static NaiveBayesModel load(std::istream& in);
  void save(const std::string& path) const;
  static NaiveBayesModel load(const std::string& path);

 private:
  void finalize();

  TokenMethod method_ = TokenMethod::Tokens;
  TokenVariants variants_;
  double alpha_ = 1.0;
  std::vector<std::string> classes_;
  std::vector<uint64_t> doc_counts_;
  std::vector<uint64_t> totals_;  // feature occurrences per class
  // feature -> (class index, count), class indices ascending
  std::unordered_map<std::string, std::vector<std::pair<uint32_t, uint64_t>>> counts_;
  std::vector<double> log_prior_;
  std::vector<double> log_denominator_;  // log(total_c + alpha * |V|)
};

struct LabeledUri {
  std::string uri;
  std::string label;
};

enum class OovPolicy {
  DropTestItem,    // skip test URIs with any feature unseen in training
  IgnoreFeatures,  // score only the seen features
};

struct CrossValidationOptions {
  int folds = 10;
  uint64_t seed = 42;
  double alpha = 1.0;
  OovPolicy oov = OovPolicy::DropTestItem;
  unsigned threads = 0;  // 0: hardware concurrency
};

/// k-fold cross-validation: the corpus is shuffled with a seeded
/// Fisher-Yates pass and item i goes to fold i mod k. Throws ConfigError if
/// folds < 2 or the corpus is smaller than folds.
EvalReport cross_validate(std::span<const LabeledBag> corpus, const CrossValidationOptions& options = {});
/// Tokenizes first; URIs that fail to parse are counted as unparseable.
EvalReport cross_validate(std::span<const LabeledUri> corpus, TokenMethod method, TokenVariants variants,
                          const CrossValidationOptions& options, const Resources& resources);

}  // namespace lostpage
