#include "lostpage/uri.hpp"

#include <algorithm>
#include <charconv>
#include <vector>

#include "lostpage/error.hpp"
#include "text_util.hpp"
#include "uri_detail.hpp"

namespace lostpage {

namespace detail {

RawUri split_raw(std::string_view uri) {
  std::string_view s = trim(uri);
  RawUri raw;
  auto sep = s.find("://");
  if (sep == std::string_view::npos || sep == 0) {
    throw ParseError("scheme", "missing scheme in '" + std::string(s) + "'");
  }
  raw.scheme = s.substr(0, sep);
  for (char c : raw.scheme) {
    if (!is_alpha(c)) throw ParseError("scheme", "invalid scheme '" + std::string(raw.scheme) + "'");
  }
  std::string scheme = to_lower(raw.scheme);
  if (scheme != "http" && scheme != "https") {
    throw ParseError("scheme", "unsupported scheme '" + scheme + "'");
  }

  std::string_view rest = s.substr(sep + 3);
  size_t auth_end = rest.find_first_of("/?#");
  std::string_view authority = rest.substr(0, auth_end);
  rest = auth_end == std::string_view::npos ? std::string_view{} : rest.substr(auth_end);

  if (auto at = authority.rfind('@'); at != std::string_view::npos) authority.remove_prefix(at + 1);
  if (!authority.empty() && authority.front() == '[') {
    throw ParseError("host", "IP literal hosts are not supported");
  }
  if (auto colon = authority.rfind(':'); colon != std::string_view::npos) {
    raw.port = authority.substr(colon + 1);
    raw.host = authority.substr(0, colon);
    raw.has_port = !raw.port.empty();
  } else {
    raw.host = authority;
  }

  size_t frag = rest.find('#');
  if (frag != std::string_view::npos) rest = rest.substr(0, frag);
  size_t q = rest.find('?');
  if (q != std::string_view::npos) {
    raw.path = rest.substr(0, q);
    raw.query = rest.substr(q + 1);
    raw.has_query = true;
  } else {
    raw.path = rest;
  }
  return raw;
}

std::string remove_dot_segments(std::string_view path) {
  if (path.empty()) return {};
  std::vector<std::string_view> out;
  auto parts = split_keep(path, '/');
  // parts[0] is the empty string before the leading slash.
  for (size_t i = 1; i < parts.size(); ++i) {
    std::string_view seg = parts[i];
    bool last = i + 1 == parts.size();
    if (seg == ".") {
      if (last) out.emplace_back();
      continue;
    }
    if (seg == "..") {
      if (!out.empty()) out.pop_back();
      if (last) out.emplace_back();
      continue;
    }
    out.push_back(seg);
  }
  std::string result;
  for (auto seg : out) {
    result += '/';
    result += seg;
  }
  return result.empty() ? "/" : result;
}

std::string normalize_percent(std::string_view text) {
  // Unescape until stable, then escape control, space, non-ASCII, '#', '%'.
  std::string cur(text);
  for (int round = 0; round < 8; ++round) {
    std::string next;
    next.reserve(cur.size());
    for (size_t i = 0; i < cur.size(); ++i) {
      if (cur[i] == '%' && i + 2 < cur.size() && is_hex(cur[i + 1]) && is_hex(cur[i + 2])) {
        int v = 0;
        std::from_chars(cur.data() + i + 1, cur.data() + i + 3, v, 16);
        next += static_cast<char>(v);
        i += 2;
      } else {
        next += cur[i];
      }
    }
    if (next == cur) break;
    cur = std::move(next);
  }
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  out.reserve(cur.size());
  for (char ch : cur) {
    auto c = static_cast<unsigned char>(ch);
    if (c <= 0x20 || c >= 0x7f || c == '#' || c == '%') {
      out += '%';
      out += kHex[c >> 4];
      out += kHex[c & 0xf];
    } else {
      out += ch;
    }
  }
  return out;
}

std::string canonical_path(std::string_view path) {
  std::string p = remove_dot_segments(path.empty() ? std::string_view("/") : path);
  p = to_lower(normalize_percent(p));
  while (p.size() > 1 && p.back() == '/') p.pop_back();
  return p;
}

}  // namespace detail

namespace {

using namespace detail;

int parse_port(std::string_view digits) {
  int port = 0;
  if (digits.empty() || digits.size() > 5 || !std::all_of(digits.begin(), digits.end(), is_digit)) {
    throw ParseError("port", "invalid port '" + std::string(digits) + "'");
  }
  std::from_chars(digits.data(), digits.data() + digits.size(), port);
  if (port < 1 || port > 65535) throw ParseError("port", "port out of range: " + std::string(digits));
  return port;
}

std::string validate_host(std::string_view raw_host) {
  std::string host = to_lower(raw_host);
  if (!host.empty() && host.back() == '.') host.pop_back();
  if (host.empty()) throw ParseError("host", "empty host");
  for (char c : host) {
    if (!is_alnum(c) && c != '-' && c != '.' && c != '_') {
      throw ParseError("host", "invalid character in host '" + host + "'");
    }
  }
  for (auto label : split_keep(host, '.')) {
    if (label.empty()) throw ParseError("host", "empty label in host '" + host + "'");
  }
  return host;
}

void validate_chars(std::string_view text, const char* component) {
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (c <= 0x20 || c == 0x7f) {
      throw ParseError(component, "whitespace or control character in " + std::string(component));
    }
  }
}

std::string strip_www(std::string_view host) {
  // www., www1., www22. ...
  if (!host.starts_with("www")) return std::string(host);
  size_t i = 3;
  while (i < host.size() && is_digit(host[i])) ++i;
  if (i < host.size() && host[i] == '.') return std::string(host.substr(i + 1));
  return std::string(host);
}

bool has_date(std::string_view s) {
  auto two = [&](size_t pos, int lo, int hi) {
    if (pos + 2 > s.size() || !is_digit(s[pos]) || !is_digit(s[pos + 1])) return false;
    int v = (s[pos] - '0') * 10 + (s[pos + 1] - '0');
    return v >= lo && v <= hi;
  };
  auto year = [&](size_t pos) {
    if (pos + 4 > s.size()) return false;
    for (size_t k = pos; k < pos + 4; ++k) {
      if (!is_digit(s[k])) return false;
    }
    return (s[pos] == '1' && s[pos + 1] == '9') || (s[pos] == '2' && s[pos + 1] == '0');
  };
  for (size_t i = 0; i + 10 <= s.size(); ++i) {
    if (!year(i)) continue;
    bool left_ok = i == 0 || !is_digit(s[i - 1]);
    // /YYYY/MM/DD followed by '/' or the end.
    if (i > 0 && s[i - 1] == '/' && s[i + 4] == '/' && two(i + 5, 1, 12) && i + 7 < s.size() &&
        s[i + 7] == '/' && two(i + 8, 1, 31) && (i + 10 == s.size() || s[i + 10] == '/')) {
      return true;
    }
    // YYYY-MM-DD not embedded in a longer number.
    if (left_ok && s[i + 4] == '-' && two(i + 5, 1, 12) && s[i + 7] == '-' && two(i + 8, 1, 31) &&
        (i + 10 == s.size() || !is_digit(s[i + 10]))) {
      return true;
    }
  }
  return false;
}

size_t longest_alpha_run(std::string_view s) {
  size_t best = 0;
  for (auto run : alpha_runs(s)) best = std::max(best, run.size());
  return best;
}

bool has_long_slugs(std::string_view s) {
  int count = 0;
  size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && !is_alnum(s[i])) ++i;
    size_t start = i;
    bool letters_only = true;
    while (i < s.size() && is_alnum(s[i])) {
      letters_only = letters_only && is_alpha(s[i]);
      ++i;
    }
    if (i > start && letters_only && i - start >= 5) ++count;
  }
  return count >= 2;
}

bool has_case_change(std::string_view s) {
  for (size_t i = 0; i + 1 < s.size(); ++i) {
    if (is_lower(s[i]) && is_upper(s[i + 1])) return true;
  }
  return false;
}

bool has_percent_encoding(std::string_view s) {
  for (size_t i = 0; i + 2 < s.size(); ++i) {
    if (s[i] == '%' && is_hex(s[i + 1]) && is_hex(s[i + 2])) return true;
  }
  return false;
}

}  // namespace

bool is_ipv4(std::string_view host) {
  auto parts = split_keep(host, '.');
  if (parts.size() != 4) return false;
  for (auto part : parts) {
    if (part.empty() || part.size() > 3 || !std::all_of(part.begin(), part.end(), is_digit)) {
      return false;
    }
    int v = 0;
    std::from_chars(part.data(), part.data() + part.size(), v);
    if (v > 255) return false;
  }
  return true;
}

bool ParsedUri::is_ip() const { return is_ipv4(host); }

int ParsedUri::effective_port() const {
  if (port) return *port;
  return scheme == "https" ? 443 : 80;
}

std::string ParsedUri::to_string() const {
  std::string out = scheme + "://" + host;
  if (port) out += ":" + std::to_string(*port);
  out += path;
  if (query) out += "?" + *query;
  return out;
}

ParsedUri parse_uri(std::string_view uri, const PublicSuffixList& suffixes) {
  RawUri raw = split_raw(uri);
  ParsedUri p;
  p.scheme = to_lower(raw.scheme);
  p.host = validate_host(raw.host);
  if (raw.has_port) p.port = parse_port(raw.port);
  validate_chars(raw.path, "path");
  p.path = std::string(raw.path);
  if (!p.path.empty() && p.path.front() != '/') throw ParseError("path", "path must start with '/'");
  if (raw.has_query) {
    validate_chars(raw.query, "query");
    p.query = std::string(raw.query);
  }
  if (!p.is_ip()) {
    p.public_suffix = suffixes.public_suffix(p.host);
    p.registered_domain = suffixes.registered_domain(p.host);
    p.tld = p.host.substr(p.host.rfind('.') == std::string::npos ? 0 : p.host.rfind('.') + 1);
  } else {
    p.registered_domain = p.host;
  }
  return p;
}

ParsedUri parse_uri(std::string_view uri) { return parse_uri(uri, Resources::bundled().suffixes); }

std::string normalize_input_uri(std::string_view text) {
  std::string_view s = trim(text);
  if (s.find("://") != std::string_view::npos) return std::string(s);
  return "http://" + std::string(s);
}

std::string canonicalize_surt(std::string_view uri) {
  RawUri raw = split_raw(uri);
  std::string host = strip_www(validate_host(raw.host));
  std::string scheme = to_lower(raw.scheme);
  validate_chars(raw.path, "path");
  if (!raw.path.empty() && raw.path.front() != '/') throw ParseError("path", "path must start with '/'");

  std::vector<std::string_view> labels = split(host, '.');
  std::string out;
  for (size_t i = labels.size(); i-- > 0;) {
    out += labels[i];
    if (i) out += ',';
  }
  if (raw.has_port) {
    int port = parse_port(raw.port);
    int default_port = scheme == "https" ? 443 : 80;
    if (port != default_port) out += ":" + std::to_string(port);
  }
  out += ')';
  out += canonical_path(raw.path);

  if (raw.has_query) {
    validate_chars(raw.query, "query");
    std::string query = to_lower(normalize_percent(raw.query));
    std::vector<std::string> params;
    for (auto part : split(query, '&')) params.emplace_back(part);
    std::sort(params.begin(), params.end());
    if (!params.empty()) out += "?" + join(params, "&");
  }
  return out;
}

std::string surt_to_uri(std::string_view surt) {
  auto close = surt.find(')');
  if (close == std::string_view::npos) throw ParseError("surt", "missing ')' in '" + std::string(surt) + "'");
  std::string_view host_part = surt.substr(0, close);
  std::string_view rest = surt.substr(close + 1);
  std::string port;
  if (auto colon = host_part.find(':'); colon != std::string_view::npos) {
    port = std::string(host_part.substr(colon));
    host_part = host_part.substr(0, colon);
  }
  auto labels = split(host_part, ',');
  std::string host;
  for (size_t i = labels.size(); i-- > 0;) {
    host += labels[i];
    if (i) host += '.';
  }
  if (host.empty()) throw ParseError("surt", "empty host in '" + std::string(surt) + "'");
  return "http://" + host + port + (rest.empty() ? std::string("/") : std::string(rest));
}

int depth(std::string_view uri) {
  RawUri raw = split_raw(uri);
  validate_host(raw.host);
  validate_chars(raw.path, "path");
  std::string path = canonical_path(raw.path);
  auto segments = split(path, '/');
  int d = static_cast<int>(segments.size());
  if (!segments.empty() && (segments.back() == "index.html" || segments.back() == "home.html")) --d;
  return d;
}

std::string_view to_string(UriPattern p) {
  switch (p) {
    case UriPattern::LongStrings: return "long_strings";
    case UriPattern::LongSlugs: return "long_slugs";
    case UriPattern::Numbers: return "numbers";
    case UriPattern::CaseChange: return "case_change";
    case UriPattern::Query: return "query";
    case UriPattern::Port: return "port";
    case UriPattern::IpAddress: return "ip_host";
    case UriPattern::PercentEncoding: return "percent_encoding";
    case UriPattern::Date: return "date";
  }
  return "unknown";
}

bool applies_to_host(UriPattern p) {
  return p != UriPattern::Query && p != UriPattern::PercentEncoding && p != UriPattern::Date;
}

bool applies_to_path(UriPattern p) { return p != UriPattern::Port && p != UriPattern::IpAddress; }

void UriPatternReport::set_host(UriPattern p, bool v) {
  if (applies_to_host(p)) host_.set(static_cast<size_t>(p), v);
}

void UriPatternReport::set_path(UriPattern p, bool v) {
  if (applies_to_path(p)) path_.set(static_cast<size_t>(p), v);
}

UriPatternReport detect_patterns(std::string_view uri) {
  RawUri raw = split_raw(uri);
  std::string host = validate_host(raw.host);
  if (raw.has_port) parse_port(raw.port);
  validate_chars(raw.path, "path");

  std::string raw_path(raw.path);
  if (raw.has_query) raw_path += "?" + std::string(raw.query);
  std::string path = to_lower(raw_path);

  UriPatternReport r;
  r.set_host(UriPattern::LongStrings, longest_alpha_run(host) >= 10);
  r.set_host(UriPattern::LongSlugs, has_long_slugs(host));
  r.set_host(UriPattern::Numbers, std::any_of(host.begin(), host.end(), is_digit));
  r.set_host(UriPattern::CaseChange, has_case_change(raw.host));
  r.set_host(UriPattern::Port, raw.has_port);
  r.set_host(UriPattern::IpAddress, is_ipv4(host));

  r.set_path(UriPattern::LongStrings, longest_alpha_run(path) >= 10);
  r.set_path(UriPattern::LongSlugs, has_long_slugs(path));
  r.set_path(UriPattern::Numbers, std::any_of(path.begin(), path.end(), is_digit));
  r.set_path(UriPattern::CaseChange, has_case_change(raw_path));
  r.set_path(UriPattern::Query, raw.has_query);
  r.set_path(UriPattern::PercentEncoding, has_percent_encoding(path));
  r.set_path(UriPattern::Date, has_date(path));
  return r;
}

}  // namespace lostpage
