#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <istream>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lostpage/corpus_stats.hpp"
#include "lostpage/resources.hpp"
#include "lostpage/timeutil.hpp"

namespace lostpage {

struct AccessLogRecord {
  std::string client_ip;
  Timestamp access_time;
  std::string method;
  std::string uri;
  std::string protocol;
  int status = 0;
  std::optional<int64_t> bytes_sent;  // "-" means none
  std::string referrer;
  std::string user_agent;
};

/// Parses one line: either the nine whitespace-separated fields in schema
/// order (quoted or bracketed fields may contain spaces) or Apache combined
/// log format. Returns nullopt for malformed lines.
std::optional<AccessLogRecord> parse_access_log_line(std::string_view line);

/// `/web/<timestamp>[modifier]/<target>` becomes the target URI (with
/// `http://` added when missing); other input is returned unchanged.
std::string unwrap_wayback(std::string_view uri);

/// Reads a text or gzip-compressed file line by line.
void for_each_line(const std::filesystem::path& file, const std::function<void(std::string_view)>& fn);

/// English-speaking country code TLDs from `english_cctlds.txt`.
std::set<std::string> load_english_cctlds(const std::filesystem::path& file);
const std::set<std::string>& default_english_cctlds();
/// Final-segment extensions treated as HTML: "", html, htm, php, asp, aspx, jsp, cgi.
const std::set<std::string>& default_html_extensions();

struct AccessLogFilterOptions {
  std::set<std::string> english_cctlds = default_english_cctlds();
  std::set<std::string> html_extensions = default_html_extensions();
  /// Optional content-language check; returning false drops the URI. Off by default.
  std::function<bool(const std::string& uri)> language;
};

struct AccessLogFilterStats {
  size_t lines = 0;
  size_t malformed = 0;
  size_t non_200 = 0;
  size_t invalid_uri = 0;
  size_t non_html = 0;
  size_t ip_host = 0;
  size_t non_english_cctld = 0;
  size_t language_rejected = 0;
  size_t duplicates = 0;
  size_t kept = 0;

  nlohmann::json to_json() const;
};

/// Streaming filter. Rules in order: status 200, parseable http(s) URI,
/// HTML-like extension, no IP host, two-letter TLDs only if English, then
/// the optional language hook, then exact-URI deduplication.
class AccessLogFilter {
 public:
  explicit AccessLogFilter(AccessLogFilterOptions options = {}, const Resources& resources = Resources::bundled());

  /// The surviving URI, or nullopt if the record is dropped.
  std::optional<std::string> add(const AccessLogRecord& record);
  std::optional<std::string> add_line(std::string_view line);
  const AccessLogFilterStats& stats() const { return stats_; }

 private:
  AccessLogFilterOptions options_;
  const Resources& resources_;
  AccessLogFilterStats stats_;
  std::unordered_set<std::string> seen_;
};

std::vector<std::string> filter_access_log(std::istream& lines, const AccessLogFilterOptions& options = {},
                                           AccessLogFilterStats* stats = nullptr);

/// Corpus report over request URIs (same schema as ontology statistics).
CorpusReport analyze_requests(std::span<const std::string> uris, const Resources& resources);

}  // namespace lostpage
