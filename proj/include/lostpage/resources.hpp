#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace lostpage {

/// Public-suffix rules (normal, wildcard and exception rules).
class PublicSuffixList {
 public:
  static PublicSuffixList parse(std::istream& in);
  static PublicSuffixList load(const std::filesystem::path& file);

  /// Effective TLD of a lowercase host, e.g. `co.uk` for `bbc.co.uk`.
  /// Hosts matching no rule fall back to their last label.
  std::string public_suffix(std::string_view host) const;

  /// Public suffix plus one label (`bbc.co.uk`). A host that is itself a
  /// public suffix is returned unchanged.
  std::string registered_domain(std::string_view host) const;

  size_t rule_count() const { return rules_.size() + wildcards_.size() + exceptions_.size(); }

 private:
  std::unordered_set<std::string> rules_;
  std::unordered_set<std::string> wildcards_;   // "*.ck" stored as "ck"
  std::unordered_set<std::string> exceptions_;  // "!www.ck" stored as "www.ck"
};

class StopWordList {
 public:
  static StopWordList parse(std::istream& in);
  static StopWordList load(const std::filesystem::path& file);

  bool contains(std::string_view word) const { return words_.count(std::string(word)) > 0; }
  size_t size() const { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

/// Frequency-ranked word list. A word's cost is log((rank + 1) * ln N), so
/// common words are cheap; segmentation minimises total cost.
class WordLexicon {
 public:
  static WordLexicon parse(std::istream& in);
  static WordLexicon load(const std::filesystem::path& file);
  static WordLexicon from_ranked(const std::vector<std::string>& words);

  bool contains(std::string_view word) const { return costs_.count(std::string(word)) > 0; }
  /// Cost of a known word; unknown words have no cost.
  const double* cost(std::string_view word) const;
  /// Cost charged per character that cannot be covered by a known word.
  double unknown_char_cost() const { return unknown_char_cost_; }
  size_t max_word_length() const { return max_len_; }
  size_t size() const { return costs_.size(); }

 private:
  std::unordered_map<std::string, double> costs_;
  size_t max_len_ = 0;
  double unknown_char_cost_ = 0.0;
};

/// Bundled data files, immutable after load.
struct Resources {
  PublicSuffixList suffixes;
  StopWordList stopwords;
  WordLexicon lexicon;

  /// Loads `public_suffix_list.dat`, `stopwords_en.txt` and `words_en.txt`.
  static Resources load(const std::filesystem::path& data_dir);

  /// Process-wide instance loaded from default_data_dir() on first use.
  static const Resources& bundled();
};

/// Directory holding the bundled data files. Resolution order: a directory
/// set with set_default_data_dir(), the LOSTPAGE_DATA_DIR environment
/// variable, then the source tree's data/ directory.
std::filesystem::path default_data_dir();

/// Must be called before the first Resources::bundled() to take effect.
void set_default_data_dir(std::filesystem::path dir);

}  // namespace lostpage
