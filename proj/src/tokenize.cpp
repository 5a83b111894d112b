#include "lostpage/tokenize.hpp"

#include <algorithm>

#include "lostpage/error.hpp"
#include "lostpage/uri.hpp"
#include "text_util.hpp"

namespace lostpage {
namespace {

using detail::alpha_runs;

std::string uri_body(const ParsedUri& p, bool strip_tld) {
  std::string host = p.host;
  if (strip_tld && !p.public_suffix.empty()) {
    if (host.size() <= p.public_suffix.size()) {
      host.clear();
    } else {
      host.resize(host.size() - p.public_suffix.size() - 1);
    }
  }
  std::string body = host;
  if (p.port) body += ":" + std::to_string(*p.port);
  body += p.path;
  if (p.query) body += "?" + *p.query;
  return body;
}

bool is_scheme_word(std::string_view w) { return w == "http" || w == "https"; }

std::vector<std::string> features_from(std::string_view raw_text, TokenMethod method,
                                       TokenVariants variants, const StopWordList& stopwords) {
  std::string text = detail::to_lower(raw_text);
  if (variants.strip_numbers) std::erase_if(text, detail::is_digit);

  std::vector<std::string_view> words;
  for (auto run : alpha_runs(text)) {
    if (is_scheme_word(run)) continue;
    if (variants.strip_stopwords && stopwords.contains(run)) continue;
    words.push_back(run);
  }

  std::vector<std::string> out;
  switch (method) {
    case TokenMethod::Tokens:
      for (auto w : words) {
        if (w.size() > 2) out.emplace_back(w);
      }
      break;
    case TokenMethod::AllGramsFromTokens:
      for (auto w : words) {
        if (w.size() <= 2) continue;
        if (w.size() < 4) {
          out.emplace_back(w);
        } else {
          auto grams = char_ngrams(w, 4, 8);
          out.insert(out.end(), grams.begin(), grams.end());
        }
      }
      break;
    case TokenMethod::TrigramsFromTokens:
      for (auto w : words) {
        if (w.size() <= 2) continue;
        auto grams = char_ngrams(w, 3, 3);
        out.insert(out.end(), grams.begin(), grams.end());
      }
      break;
    case TokenMethod::AllGramsFromUri: {
      std::string joined;
      for (auto w : words) joined += w;
      out = char_ngrams(joined, 4, 8);
      break;
    }
  }
  if (variants.strip_stopwords) {
    std::erase_if(out, [&](const std::string& f) { return stopwords.contains(f); });
  }
  return out;
}

}  // namespace

std::string_view to_string(TokenMethod m) {
  switch (m) {
    case TokenMethod::Tokens: return "tokens";
    case TokenMethod::AllGramsFromTokens: return "all-grams-from-tokens";
    case TokenMethod::AllGramsFromUri: return "all-grams-from-uri";
    case TokenMethod::TrigramsFromTokens: return "trigrams-from-tokens";
  }
  return "unknown";
}

TokenMethod parse_token_method(std::string_view name) {
  std::string n = detail::to_lower(detail::trim(name));
  std::replace(n.begin(), n.end(), '_', '-');
  if (n == "tokens") return TokenMethod::Tokens;
  if (n == "all-grams-from-tokens") return TokenMethod::AllGramsFromTokens;
  if (n == "all-grams-from-uri") return TokenMethod::AllGramsFromUri;
  if (n == "trigrams-from-tokens") return TokenMethod::TrigramsFromTokens;
  throw ConfigError("unknown token method '" + std::string(name) + "'");
}

std::string to_string(TokenVariants v) {
  std::vector<std::string> parts;
  if (v.strip_tld) parts.emplace_back("strip-tld");
  if (v.strip_numbers) parts.emplace_back("strip-numbers");
  if (v.strip_stopwords) parts.emplace_back("strip-stopwords");
  return parts.empty() ? "none" : detail::join(parts, ",");
}

TokenVariants parse_token_variants(std::string_view text) {
  TokenVariants v;
  std::string lowered = detail::to_lower(detail::trim(text));
  if (lowered.empty() || lowered == "none") return v;
  for (auto part : detail::split(lowered, ',')) {
    std::string p(detail::trim(part));
    std::replace(p.begin(), p.end(), '_', '-');
    if (p == "strip-tld") {
      v.strip_tld = true;
    } else if (p == "strip-numbers") {
      v.strip_numbers = true;
    } else if (p == "strip-stopwords") {
      v.strip_stopwords = true;
    } else {
      throw ConfigError("unknown token variant '" + p + "'");
    }
  }
  return v;
}

std::vector<std::string> char_ngrams(std::string_view text, size_t min_n, size_t max_n) {
  std::vector<std::string> out;
  for (size_t n = min_n; n <= max_n; ++n) {
    if (n == 0 || n > text.size()) continue;
    for (size_t i = 0; i + n <= text.size(); ++i) out.emplace_back(text.substr(i, n));
  }
  return out;
}

TokenBag tokenize(std::string_view uri, TokenMethod method, TokenVariants variants,
                  const Resources& resources) {
  ParsedUri parsed = parse_uri(uri, resources.suffixes);
  TokenBag bag{method, variants, {}};
  bag.features = features_from(uri_body(parsed, variants.strip_tld), method, variants, resources.stopwords);
  return bag;
}

TokenBag tokenize(std::string_view uri, TokenMethod method, TokenVariants variants) {
  return tokenize(uri, method, variants, Resources::bundled());
}

TokenBag tokenize_text(std::string_view text, TokenMethod method, TokenVariants variants,
                       const Resources& resources) {
  TokenBag bag{method, variants, {}};
  bag.features = features_from(text, method, variants, resources.stopwords);
  return bag;
}

}  // namespace lostpage
