#include "lostpage/access_log.hpp"

#include <fstream>

#include <nlohmann/json.hpp>
#include <zlib.h>

#include "lostpage/error.hpp"
#include "lostpage/uri.hpp"
#include "text_util.hpp"

namespace lostpage {
namespace {

/// Whitespace-separated fields; "..." and [...] group, their delimiters removed.
std::optional<std::vector<std::string>> log_fields(std::string_view line) {
  std::vector<std::string> out;
  size_t i = 0;
  while (true) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i >= line.size()) break;
    char open = line[i];
    if (open == '"' || open == '[') {
      char close = open == '"' ? '"' : ']';
      std::string field;
      ++i;
      bool closed = false;
      while (i < line.size()) {
        if (open == '"' && line[i] == '\\' && i + 1 < line.size()) {
          field += line[i + 1];
          i += 2;
          continue;
        }
        if (line[i] == close) {
          closed = true;
          ++i;
          break;
        }
        field += line[i++];
      }
      if (!closed) return std::nullopt;
      out.push_back(std::move(field));
    } else {
      size_t start = i;
      while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      out.emplace_back(line.substr(start, i - start));
    }
  }
  return out;
}

std::optional<int> parse_status(std::string_view s) {
  if (s.size() != 3 || !std::all_of(s.begin(), s.end(), detail::is_digit) || s[0] == '0') return std::nullopt;
  return std::stoi(std::string(s));
}

std::optional<std::optional<int64_t>> parse_bytes(std::string_view s) {
  if (s == "-") return std::optional<int64_t>{};
  if (s.empty() || !std::all_of(s.begin(), s.end(), detail::is_digit)) return std::nullopt;
  try {
    return std::optional<int64_t>{std::stoll(std::string(s))};
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::optional<Timestamp> parse_time_field(std::string_view s) {
  if (auto t = parse_clf_time(s)) return t;
  return parse_iso8601(s);
}

std::string extension_of(std::string_view path) {
  size_t slash = path.rfind('/');
  std::string_view last = slash == std::string_view::npos ? path : path.substr(slash + 1);
  size_t dot = last.rfind('.');
  if (dot == std::string_view::npos) return "";
  return detail::to_lower(last.substr(dot + 1));
}

}  // namespace

std::optional<AccessLogRecord> parse_access_log_line(std::string_view line) {
  auto fields = log_fields(line);
  if (!fields) return std::nullopt;
  auto& f = *fields;
  AccessLogRecord r;
  std::optional<Timestamp> time;
  std::optional<int> status;
  std::optional<std::optional<int64_t>> bytes;

  if (f.size() == 9 && detail::split(f[4], ' ').size() == 3) {
    // combined: ip ident user [time] "METHOD uri PROTO" status bytes "ref" "ua"
    auto req = detail::split(f[4], ' ');
    r.client_ip = f[0];
    time = parse_time_field(f[3]);
    r.method = std::string(req[0]);
    r.uri = std::string(req[1]);
    r.protocol = std::string(req[2]);
    status = parse_status(f[5]);
    bytes = parse_bytes(f[6]);
    r.referrer = f[7];
    r.user_agent = f[8];
  } else if (f.size() == 9) {
    r.client_ip = f[0];
    time = parse_time_field(f[1]);
    r.method = f[2];
    r.uri = f[3];
    r.protocol = f[4];
    status = parse_status(f[5]);
    bytes = parse_bytes(f[6]);
    r.referrer = f[7];
    r.user_agent = f[8];
  } else {
    return std::nullopt;
  }
  if (!time || !status || !bytes || r.uri.empty() || r.method.empty()) return std::nullopt;
  r.access_time = *time;
  r.status = *status;
  r.bytes_sent = *bytes;
  return r;
}

std::string unwrap_wayback(std::string_view uri) {
  std::string_view rest = uri;
  size_t web = rest.find("/web/");
  if (web == std::string_view::npos) return std::string(uri);
  // Accept both "/web/..." and "http://web.archive.org/web/...".
  if (web != 0 && rest.substr(0, web).find("://") == std::string_view::npos) return std::string(uri);
  rest.remove_prefix(web + 5);
  size_t i = 0;
  while (i < rest.size() && detail::is_digit(rest[i])) ++i;
  if (i == 0) return std::string(uri);
  while (i < rest.size() && rest[i] != '/') ++i;  // modifier such as id_ or im_
  if (i >= rest.size()) return std::string(uri);
  std::string target(rest.substr(i + 1));
  if (target.empty()) return std::string(uri);
  // Some servers collapse "http://" to "http:/".
  for (std::string_view scheme : {"http:/", "https:/"}) {
    if (target.starts_with(scheme) && !target.starts_with(std::string(scheme) + "/")) {
      target.insert(scheme.size(), "/");
    }
  }
  if (target.find("://") == std::string::npos) target = "http://" + target;
  return target;
}

void for_each_line(const std::filesystem::path& file, const std::function<void(std::string_view)>& fn) {
  gzFile gz = gzopen(file.string().c_str(), "rb");
  if (!gz) throw IoError("cannot open " + file.string());
  std::string line;
  char buf[8192];
  while (true) {
    char* got = gzgets(gz, buf, sizeof buf);
    if (!got) break;
    line += buf;
    if (!line.empty() && line.back() == '\n') {
      line.pop_back();
      if (!line.empty() && line.back() == '\r') line.pop_back();
      fn(line);
      line.clear();
    }
  }
  int err = 0;
  const char* msg = gzerror(gz, &err);
  std::string error = err != Z_OK && err != Z_STREAM_END ? msg : "";
  gzclose(gz);
  if (!error.empty()) throw IoError("read error in " + file.string() + ": " + error);
  if (!line.empty()) fn(line);
}

std::set<std::string> load_english_cctlds(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open " + file.string());
  std::set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    out.insert(detail::to_lower(t));
  }
  return out;
}

const std::set<std::string>& default_english_cctlds() {
  static const std::set<std::string> s = load_english_cctlds(default_data_dir() / "english_cctlds.txt");
  return s;
}

const std::set<std::string>& default_html_extensions() {
  static const std::set<std::string> s{"", "html", "htm", "php", "asp", "aspx", "jsp", "cgi"};
  return s;
}

nlohmann::json AccessLogFilterStats::to_json() const {
  return {{"lines", lines},
          {"malformed", malformed},
          {"non_200", non_200},
          {"invalid_uri", invalid_uri},
          {"non_html", non_html},
          {"ip_host", ip_host},
          {"non_english_cctld", non_english_cctld},
          {"language_rejected", language_rejected},
          {"duplicates", duplicates},
          {"kept", kept}};
}

AccessLogFilter::AccessLogFilter(AccessLogFilterOptions options, const Resources& resources)
    : options_(std::move(options)), resources_(resources) {}

std::optional<std::string> AccessLogFilter::add(const AccessLogRecord& record) {
  if (record.status != 200) {
    ++stats_.non_200;
    return std::nullopt;
  }
  std::string target = unwrap_wayback(record.uri);
  ParsedUri parsed;
  try {
    parsed = parse_uri(target, resources_.suffixes);
  } catch (const ParseError&) {
    ++stats_.invalid_uri;
    return std::nullopt;
  }
  if (!options_.html_extensions.count(extension_of(parsed.path))) {
    ++stats_.non_html;
    return std::nullopt;
  }
  if (parsed.is_ip()) {
    ++stats_.ip_host;
    return std::nullopt;
  }
  if (parsed.tld.size() == 2 && !options_.english_cctlds.count(parsed.tld)) {
    ++stats_.non_english_cctld;
    return std::nullopt;
  }
  if (options_.language && !options_.language(target)) {
    ++stats_.language_rejected;
    return std::nullopt;
  }
  if (!seen_.insert(target).second) {
    ++stats_.duplicates;
    return std::nullopt;
  }
  ++stats_.kept;
  return target;
}

std::optional<std::string> AccessLogFilter::add_line(std::string_view line) {
  if (detail::trim(line).empty() || detail::trim(line).front() == '#') return std::nullopt;
  ++stats_.lines;
  auto record = parse_access_log_line(line);
  if (!record) {
    ++stats_.malformed;
    return std::nullopt;
  }
  return add(*record);
}

std::vector<std::string> filter_access_log(std::istream& lines, const AccessLogFilterOptions& options,
                                           AccessLogFilterStats* stats) {
  AccessLogFilter filter(options);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(lines, line)) {
    if (auto uri = filter.add_line(line)) out.push_back(std::move(*uri));
  }
  if (stats) *stats = filter.stats();
  return out;
}

CorpusReport analyze_requests(std::span<const std::string> uris, const Resources& resources) {
  CorpusStatsBuilder builder(resources);
  for (const auto& u : uris) builder.add(u);
  return builder.finish();
}

}  // namespace lostpage
