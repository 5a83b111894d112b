#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lostpage/deep_classifier.hpp"
#include "lostpage/ontology.hpp"
#include "lostpage/resources.hpp"

namespace lostpage {

struct DeepEvalOptions {
  double holdout_fraction = 0.1;
  GramScheme grams = GramScheme::AllGram;
  uint64_t seed = 42;
  size_t candidates = 10;
  double alpha = 1.0;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct DeepEvalItem {
  std::string uri;
  CategoryPath truth;
  CategoryPath predicted;
  bool shallow = false;  // deep classification gave up; prediction is the first-level label
};

/// Correct counts per level over a group of items. Mi-F1 at level k is
/// correct[k-1] / items: every item counts at every level, so the values
/// never increase with the level.
struct LevelScores {
  size_t items = 0;
  std::vector<size_t> correct;

  double f1(size_t level) const;
};

struct DeepEvalReport {
  size_t train_size = 0;
  size_t test_size = 0;
  size_t shallow = 0;
  int max_level = 0;
  LevelScores overall;
  std::map<std::string, LevelScores> by_depth;       // "0", "1", ..., "5+"
  std::map<std::string, LevelScores> by_dictionary;  // dictionary-only / dictionary-any / no-dictionary
  std::map<std::string, LevelScores> by_long_strings;
  std::map<std::string, LevelScores> by_delimiter;
  std::map<std::string, LevelScores> by_category;  // first-level label
  /// Categories whose entries were too few to hold any out; all their
  /// entries stay in training.
  std::vector<std::string> skipped_categories;
  std::vector<DeepEvalItem> items;

  nlohmann::json to_json(bool include_items = false) const;
  std::string to_text() const;
};

/// Per-category seeded holdout; each held-out URI is classified from its
/// URI alone with the true first-level label given, then scored per level.
/// Throws ConfigError for a fraction outside (0, 1) or an index that leaves
/// nothing to test.
DeepEvalReport evaluate_deep(const CategoryIndex& index, const DeepEvalOptions& options,
                             const Resources& resources);

/// Scores hand-made predictions; no classification involved.
LevelScores score_levels(const std::vector<CategoryPath>& truth, const std::vector<CategoryPath>& predicted,
                         int max_level);

}  // namespace lostpage
