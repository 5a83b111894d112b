#include <doctest.h>

#include <set>

#include "lostpage/error.hpp"
#include "lostpage/tokenize.hpp"
#include "test_support.hpp"

using namespace lostpage;

namespace {
std::set<std::string> S(std::initializer_list<const char*> xs) { return {xs.begin(), xs.end()}; }
}  // namespace

// Table 5 of the source publication, copied verbatim from paper.md.
TEST_CASE("Table 5 Tokens") {
  auto bag = tokenize("https://odu.edu/compsci", TokenMethod::Tokens);
  CHECK(bag.distinct() == S({"odu", "edu", "compsci"}));
  CHECK(bag.features.size() == 3);
}

TEST_CASE("Table 5 all-grams from tokens") {
  auto bag = tokenize("https://odu.edu/compsci", TokenMethod::AllGramsFromTokens);
  CHECK(bag.distinct() == S({"odu", "edu", "comp", "omps", "mpsc", "psci", "comps", "ompsc", "mpsci", "compsc",
                             "ompsci", "compsci"}));
  CHECK(bag.features.size() == 12);
}

TEST_CASE("Table 5 all-grams from URI") {
  auto bag = tokenize("https://odu.edu/compsci", TokenMethod::AllGramsFromUri);
  auto expected = S({"odue",     "dued",     "uedu",     "educ",     "duco",    "ucom",    "comp",    "omps",
                     "mpsc",     "psci",     "odued",    "duedu",    "ueduc",   "educo",   "ducom",   "ucomp",
                     "comps",    "ompsc",    "mpsci",    "oduedu",   "dueduc",  "ueduco",  "educom",  "ducomp",
                     "ucomps",   "compsc",   "ompsci",   "odueduc",  "dueduco", "ueducom", "educomp", "ducomps",
                     "ucompsc",  "compsci",  "odueduco", "dueducom", "ueducomp", "educomps", "ducompsc",
                     "ucompsci"});
  CHECK(expected.size() == 40);
  CHECK(bag.distinct() == expected);
  // "odueducompsci" has 13 letters: 10 + 9 + 8 + 7 + 6 grams of length 4..8.
  CHECK(bag.features.size() == testsupport::gram_count_formula(13, 4, 8));
  CHECK(bag.features.size() == 40);
}

TEST_CASE("all-grams from URI equal a sliding window over the cleaned string") {
  auto bag = tokenize("http://www.Mickey-Mantle99.com/base_ball/cards?id=7", TokenMethod::AllGramsFromUri);
  std::multiset<std::string> got(bag.features.begin(), bag.features.end());
  CHECK(got == testsupport::sliding_grams("wwwmickeymantlecombaseballcardsid", 4, 8));
}

TEST_CASE("variants") {
  TokenVariants tld{.strip_tld = true};
  CHECK(tokenize("https://odu.edu/compsci", TokenMethod::Tokens, tld).distinct() == S({"odu", "compsci"}));
  CHECK(tokenize("http://bbc.co.uk/news", TokenMethod::Tokens, tld).distinct() == S({"bbc", "news"}));

  TokenVariants num{.strip_numbers = true};
  // Digits are deleted before splitting, so letters around them join.
  CHECK(tokenize("http://abc123def.com/", TokenMethod::Tokens, num).distinct() == S({"abcdef", "com"}));

  TokenVariants stop{.strip_stopwords = true};
  auto bag = tokenize("http://theworld.com/about/the/and/news", TokenMethod::Tokens, stop);
  for (const auto& f : bag.features) CHECK(f != "the");
}

TEST_CASE("tokens drop short pieces and the scheme") {
  auto bag = tokenize("http://a.bc.example.com/x/yz/http", TokenMethod::Tokens);
  CHECK(bag.distinct() == S({"example", "com"}));
}

TEST_CASE("trigrams from tokens") {
  auto bag = tokenize("https://odu.edu/compsci", TokenMethod::TrigramsFromTokens, {.strip_tld = true});
  CHECK(bag.distinct() == S({"odu", "com", "omp", "mps", "psc", "sci"}));
}

TEST_CASE("empty after stripping yields an empty bag") {
  auto bag = tokenize("http://12.com/", TokenMethod::Tokens, {.strip_tld = true, .strip_numbers = true});
  CHECK(bag.empty());
}

TEST_CASE("malformed URIs throw") { CHECK_THROWS_AS(tokenize("not a uri", TokenMethod::Tokens), ParseError); }

TEST_CASE("method and variant names round-trip") {
  for (auto m : {TokenMethod::Tokens, TokenMethod::AllGramsFromTokens, TokenMethod::AllGramsFromUri,
                 TokenMethod::TrigramsFromTokens}) {
    CHECK(parse_token_method(to_string(m)) == m);
  }
  TokenVariants v{.strip_tld = true, .strip_numbers = true};
  CHECK(parse_token_variants(to_string(v)) == v);
  CHECK(parse_token_variants("none") == TokenVariants{});
  CHECK_THROWS_AS(parse_token_method("bogus"), ConfigError);
  CHECK_THROWS_AS(parse_token_variants("strip-everything"), ConfigError);
}

TEST_CASE("tokenize_text") {
  auto bag = tokenize_text("Old Dominion University", TokenMethod::Tokens, {}, Resources::bundled());
  CHECK(bag.distinct() == S({"old", "dominion", "university"}));
}

TEST_CASE("char_ngrams order") {
  auto g = char_ngrams("abcde", 4, 5);
  CHECK(g == std::vector<std::string>{"abcd", "bcde", "abcde"});
  CHECK(char_ngrams("abc", 4, 8).empty());
}
