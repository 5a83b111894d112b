#include "lostpage/deep_eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <random>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "lostpage/corpus_stats.hpp"
#include "lostpage/error.hpp"

namespace lostpage {
namespace {

void add_item(LevelScores& s, const CategoryPath& truth, const CategoryPath& predicted, int max_level) {
  if (s.correct.size() < static_cast<size_t>(max_level)) s.correct.resize(max_level, 0);
  ++s.items;
  for (int level = 1; level <= max_level; ++level) {
    if (evaluate_levels(truth, predicted, level)) ++s.correct[level - 1];
  }
}

DeepEvalItem classify_one(const OntologyEntry& e, const CategoryVectorIndex& vectors,
                          const DeepDocumentCache& documents, const DeepEvalOptions& options,
                          const Resources& resources) {
  DeepEvalItem item{e.uri, e.category, CategoryPath({e.category.top_level()}), true};
  TokenBag query;
  try {
    query = deep_query_features(e.uri, options.grams, resources);
  } catch (const ParseError&) {
    return item;
  }
  auto top = top_candidates(vectors, query, options.candidates, e.category.top_level());
  if (top.empty()) return item;
  std::vector<CategoryPath> paths;
  for (const auto& c : top) paths.push_back(c.path);
  try {
    DeepResult r = classify_deep(prune_tree(paths), documents, query, options.alpha);
    item.predicted = r.path;
    item.shallow = false;
  } catch (const DeepClassificationError&) {
  }
  return item;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

nlohmann::json scores_json(const LevelScores& s, int max_level) {
  nlohmann::json f1 = nlohmann::json::array();
  for (int l = 1; l <= max_level; ++l) f1.push_back(s.f1(l));
  return {{"items", s.items}, {"mi_f1", f1}};
}

nlohmann::json group_json(const std::map<std::string, LevelScores>& g, int max_level) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [k, s] : g) out[k] = scores_json(s, max_level);
  return out;
}

void group_text(std::ostringstream& out, const std::string& title, const std::map<std::string, LevelScores>& g,
                int max_level) {
  out << "\n" << title << "\n";
  for (const auto& [k, s] : g) {
    out << "  " << k << " (" << s.items << ")";
    for (int l = 1; l <= max_level; ++l) out << "\t" << fmt(s.f1(l));
    out << "\n";
  }
}

}  // namespace

double LevelScores::f1(size_t level) const {
  if (items == 0 || level == 0 || level > correct.size()) return 0.0;
  return static_cast<double>(correct[level - 1]) / static_cast<double>(items);
}

LevelScores score_levels(const std::vector<CategoryPath>& truth, const std::vector<CategoryPath>& predicted,
                         int max_level) {
  if (truth.size() != predicted.size()) throw ConfigError("truth and prediction counts differ");
  if (max_level < 1) throw ConfigError("max_level must be at least 1");
  LevelScores s;
  s.correct.assign(max_level, 0);
  for (size_t i = 0; i < truth.size(); ++i) add_item(s, truth[i], predicted[i], max_level);
  return s;
}

DeepEvalReport evaluate_deep(const CategoryIndex& index, const DeepEvalOptions& options, const Resources& resources) {
  if (!(options.holdout_fraction > 0.0 && options.holdout_fraction < 1.0)) {
    throw ConfigError("holdout fraction must lie in (0, 1)");
  }
  DeepEvalReport report;
  std::mt19937_64 rng(options.seed);
  std::vector<OntologyEntry> train;
  std::vector<OntologyEntry> test;
  for (const auto& [key, positions] : index.by_category()) {
    std::vector<size_t> order = positions;
    std::shuffle(order.begin(), order.end(), rng);
    auto n_test = static_cast<size_t>(std::floor(options.holdout_fraction * static_cast<double>(order.size()) + 0.5));
    n_test = std::min(n_test, order.size() - 1);
    if (n_test == 0) report.skipped_categories.push_back(key);
    for (size_t i = 0; i < order.size(); ++i) (i < n_test ? test : train).push_back(index.entries()[order[i]]);
  }
  if (test.empty()) throw ConfigError("holdout is empty: every category is too small");
  report.train_size = train.size();
  report.test_size = test.size();

  CategoryIndex train_index = CategoryIndex::from_entries(std::move(train));
  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  CategoryVectorIndex vectors = CategoryVectorIndex::build(train_index, options.grams, resources, threads);
  DeepDocumentCache documents(train_index, options.grams, resources);

  report.items.resize(test.size());
  size_t chunk = (test.size() + threads - 1) / threads;
  std::vector<std::future<void>> jobs;
  for (size_t begin = 0; begin < test.size(); begin += chunk) {
    size_t end = std::min(test.size(), begin + chunk);
    jobs.push_back(std::async(std::launch::async, [&, begin, end] {
      for (size_t i = begin; i < end; ++i) report.items[i] = classify_one(test[i], vectors, documents, options, resources);
    }));
  }
  for (auto& j : jobs) j.get();

  for (const auto& it : report.items) report.max_level = std::max(report.max_level, static_cast<int>(it.truth.depth()));
  int L = report.max_level;
  report.overall.correct.assign(L, 0);
  for (const auto& it : report.items) {
    if (it.shallow) ++report.shallow;
    add_item(report.overall, it.truth, it.predicted, L);
    UriProfile prof;
    try {
      prof = profile_uri(it.uri, resources);
    } catch (const ParseError&) {
      continue;
    }
    std::string d = prof.depth >= 5 ? "5+" : std::to_string(prof.depth);
    add_item(report.by_depth[d], it.truth, it.predicted, L);
    std::string dict = prof.dictionary_only ? "dictionary-only" : prof.dictionary_any ? "dictionary-any" : "no-dictionary";
    add_item(report.by_dictionary[dict], it.truth, it.predicted, L);
    bool long_strings = prof.patterns.in_host(UriPattern::LongStrings) || prof.patterns.in_path(UriPattern::LongStrings);
    add_item(report.by_long_strings[long_strings ? "long-strings" : "no-long-strings"], it.truth, it.predicted, L);
    bool delim = prof.delimiter_host || prof.delimiter_path;
    add_item(report.by_delimiter[delim ? "delimiter" : "no-delimiter"], it.truth, it.predicted, L);
    add_item(report.by_category[it.truth.top_level()], it.truth, it.predicted, L);
  }
  return report;
}

nlohmann::json DeepEvalReport::to_json(bool include_items) const {
  nlohmann::json j{{"train_size", train_size},
                   {"test_size", test_size},
                   {"shallow", shallow},
                   {"max_level", max_level},
                   {"overall", scores_json(overall, max_level)},
                   {"by_depth", group_json(by_depth, max_level)},
                   {"by_dictionary", group_json(by_dictionary, max_level)},
                   {"by_long_strings", group_json(by_long_strings, max_level)},
                   {"by_delimiter", group_json(by_delimiter, max_level)},
                   {"by_category", group_json(by_category, max_level)},
                   {"skipped_categories", skipped_categories}};
  if (include_items) {
    nlohmann::json items_json = nlohmann::json::array();
    for (const auto& it : items) {
      items_json.push_back(
          {{"uri", it.uri}, {"truth", it.truth.str()}, {"predicted", it.predicted.str()}, {"shallow", it.shallow}});
    }
    j["items"] = std::move(items_json);
  }
  return j;
}

std::string DeepEvalReport::to_text() const {
  std::ostringstream out;
  out << "train " << train_size << ", test " << test_size << ", shallow fallbacks " << shallow << ", skipped categories "
      << skipped_categories.size() << "\n";
  out << "level";
  for (int l = 1; l <= max_level; ++l) out << "\t" << l;
  out << "\n";
  out << "Mi-F1";
  for (int l = 1; l <= max_level; ++l) out << "\t" << fmt(overall.f1(l));
  out << "\n";
  group_text(out, "by depth", by_depth, max_level);
  group_text(out, "by dictionary words", by_dictionary, max_level);
  group_text(out, "by long strings", by_long_strings, max_level);
  group_text(out, "by delimiters", by_delimiter, max_level);
  group_text(out, "by first-level category", by_category, max_level);
  return out.str();
}

}  // namespace lostpage
