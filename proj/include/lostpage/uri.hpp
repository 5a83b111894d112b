#pragma once

#include <bitset>
#include <optional>
#include <string>
#include <string_view>

#include "lostpage/resources.hpp"

namespace lostpage {

/// An absolute http(s) URI split into components.
struct ParsedUri {
  std::string scheme;  // "http" or "https", lowercase
  std::string host;    // lowercase, non-empty
  std::optional<int> port;
  std::string path;  // as written (case preserved), may be empty
  std::optional<std::string> query;
  std::string public_suffix;      // effective TLD, e.g. "co.uk"; empty for IP hosts
  std::string registered_domain;  // public suffix plus one label
  std::string tld;                // last host label, e.g. "uk"; empty for IP hosts

  bool is_ip() const;
  /// Port, or the scheme's default when none was given.
  int effective_port() const;
  /// scheme://host[:port]path[?query]. Fragments and user info are dropped.
  std::string to_string() const;
};

/// Parses an absolute http or https URI. Throws ParseError naming the
/// offending component.
ParsedUri parse_uri(std::string_view uri, const PublicSuffixList& suffixes);
ParsedUri parse_uri(std::string_view uri);

/// Prepends `http://` to scheme-less input such as `odu.edu/compsci`.
std::string normalize_input_uri(std::string_view text);

bool is_ipv4(std::string_view host);

/// Sort-friendly URI Reordering Transform: scheme dropped, host lowercased
/// with a leading `www`/`wwwN` label removed, labels reversed and
/// comma-joined, default port dropped, then `)` and the lowercased path and
/// sorted query. Used as the deduplication key for ontology entries.
std::string canonicalize_surt(std::string_view uri);

/// Inverse of canonicalize_surt up to information SURT discards; yields an
/// http URI whose SURT equals the input.
std::string surt_to_uri(std::string_view surt);

/// Number of non-empty path segments after canonicalization. A trailing
/// `index.html` or `home.html` segment is not counted.
int depth(std::string_view uri);

enum class UriPattern {
  LongStrings,
  LongSlugs,
  Numbers,
  CaseChange,
  Query,
  Port,
  IpAddress,
  PercentEncoding,
  Date,
};
inline constexpr int kUriPatternCount = 9;

std::string_view to_string(UriPattern p);
/// Whether the pattern is defined for the hostname / the path.
bool applies_to_host(UriPattern p);
bool applies_to_path(UriPattern p);

/// Which patterns occur in the hostname and which in the path (path
/// includes the query string).
class UriPatternReport {
 public:
  bool in_host(UriPattern p) const { return host_.test(static_cast<size_t>(p)); }
  bool in_path(UriPattern p) const { return path_.test(static_cast<size_t>(p)); }
  void set_host(UriPattern p, bool v = true);
  void set_path(UriPattern p, bool v = true);
  friend bool operator==(const UriPatternReport&, const UriPatternReport&) = default;

 private:
  std::bitset<kUriPatternCount> host_;
  std::bitset<kUriPatternCount> path_;
};

/// Flags URI patterns. Case change is judged on the URI as written; every
/// other pattern on its lowercase form.
UriPatternReport detect_patterns(std::string_view uri);

}  // namespace lostpage
