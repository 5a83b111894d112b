#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>

#include <nlohmann/json_fwd.hpp>

#include "lostpage/ontology.hpp"
#include "lostpage/resources.hpp"
#include "lostpage/uri.hpp"

namespace lostpage {

/// Lexical traits of one URI used by the corpus reports and the deep
/// evaluation breakdowns. Host words exclude `www` and the public suffix.
struct UriProfile {
  std::string tld;  // last host label; "(ip)" for IP hosts
  int depth = 0;
  UriPatternReport patterns;
  bool dictionary_only = false;  // every segmented piece is a lexicon word
  bool dictionary_any = false;   // some piece is a lexicon word of 3+ letters
  bool delimiter_host = false;   // letters joined by '-' or '_' in the host
  bool delimiter_path = false;   // letters joined by '-', '_' or '+' in the path
};

UriProfile profile_uri(std::string_view uri, const Resources& resources);

/// TLD, depth, pattern, dictionary and category counts over a URI corpus.
/// Ontology statistics and access-log analysis share this schema.
struct CorpusReport {
  size_t total = 0;
  size_t skipped = 0;  // inputs that failed to parse, not part of total
  std::map<std::string, size_t> tld_counts;
  std::map<int, size_t> depth_counts;
  std::array<size_t, kUriPatternCount> pattern_host{};
  std::array<size_t, kUriPatternCount> pattern_path{};
  size_t dictionary_only = 0;
  size_t dictionary_any = 0;
  size_t delimiter_host = 0;
  size_t delimiter_path = 0;
  std::map<std::string, size_t> category_counts;     // top-level label -> entries
  std::map<std::string, size_t> subcategory_counts;  // top-level label -> distinct sub-paths

  /// count / total * 100, or 0 for an empty report.
  double percent(size_t count) const;
  nlohmann::json to_json() const;
  /// Plain-text tables, one section per distribution.
  std::string to_text() const;
};

class CorpusStatsBuilder {
 public:
  explicit CorpusStatsBuilder(const Resources& resources) : resources_(resources) {}
  /// Returns false (and counts the input as skipped) if the URI does not parse.
  bool add(std::string_view uri, const CategoryPath* category = nullptr);
  CorpusReport finish() const;

 private:
  const Resources& resources_;
  CorpusReport report_;
  std::map<std::string, std::set<std::string>> subpaths_;
};

CorpusReport corpus_stats(const CategoryIndex& index, const Resources& resources);
CorpusReport corpus_stats(const CategoryIndex& index);

}  // namespace lostpage
