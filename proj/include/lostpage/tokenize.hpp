#pragma once

#include <compare>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "lostpage/resources.hpp"

namespace lostpage {

/// How a URI is turned into features.
enum class TokenMethod {
  /// Lowercase, split on non-letters, drop http/https and tokens of length <= 2.
  Tokens,
  /// Character 4..8-grams inside each token; tokens shorter than 4 kept whole.
  AllGramsFromTokens,
  /// Character 4..8-grams over the URI with scheme, punctuation and digits removed.
  AllGramsFromUri,
  /// Character 3-grams inside each token (deep classification's 3-gram scheme).
  TrigramsFromTokens,
};

/// Pre-processing applied before features are generated.
struct TokenVariants {
  bool strip_tld = false;        // drop the effective TLD from the host
  bool strip_numbers = false;    // delete digits before splitting
  bool strip_stopwords = false;  // drop stop-list words (and features equal to one)

  friend auto operator<=>(const TokenVariants&, const TokenVariants&) = default;
};

/// Multiset of features produced by one method/variant configuration.
struct TokenBag {
  TokenMethod method = TokenMethod::Tokens;
  TokenVariants variants;
  std::vector<std::string> features;  // generation order, duplicates kept

  bool empty() const { return features.empty(); }
  std::set<std::string> distinct() const { return {features.begin(), features.end()}; }
};

std::string_view to_string(TokenMethod m);
/// Accepts "tokens", "all-grams-from-tokens", "all-grams-from-uri",
/// "trigrams-from-tokens" (and underscore spellings). Throws ConfigError.
TokenMethod parse_token_method(std::string_view name);

/// "none" or a comma list of "strip-tld", "strip-numbers", "strip-stopwords".
std::string to_string(TokenVariants v);
TokenVariants parse_token_variants(std::string_view text);

/// Tokenizes an absolute http(s) URI. Throws ParseError for malformed input;
/// a URI with nothing left after stripping yields an empty bag.
TokenBag tokenize(std::string_view uri, TokenMethod method, TokenVariants variants,
                  const Resources& resources);
TokenBag tokenize(std::string_view uri, TokenMethod method, TokenVariants variants = {});

/// Applies a token-based method to free text (titles, descriptions).
/// strip_tld is ignored. AllGramsFromUri concatenates the letter runs.
TokenBag tokenize_text(std::string_view text, TokenMethod method, TokenVariants variants,
                       const Resources& resources);

/// All character n-grams of `text` for n in [min_n, max_n], in order of
/// length then position.
std::vector<std::string> char_ngrams(std::string_view text, size_t min_n, size_t max_n);

}  // namespace lostpage
