#include "lostpage/timeutil.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cstdio>

namespace lostpage {
namespace {

using namespace std::chrono;

bool read_int(std::string_view s, size_t pos, size_t len, int& out) {
  if (pos + len > s.size()) return false;
  for (size_t i = pos; i < pos + len; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  auto res = std::from_chars(s.data() + pos, s.data() + pos + len, out);
  return res.ec == std::errc{};
}

std::optional<Timestamp> make_time(int y, int mo, int d, int h, int mi, int sec) {
  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h < 0 || h > 23 || mi < 0 || mi > 59 || sec < 0 || sec > 60) return std::nullopt;
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{sec};
}

constexpr std::array<std::string_view, 12> kMonths = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                                      "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};

int month_index(std::string_view name) {
  for (size_t i = 0; i < kMonths.size(); ++i) {
    if (name.size() == 3 && std::tolower(static_cast<unsigned char>(name[0])) ==
                                std::tolower(static_cast<unsigned char>(kMonths[i][0])) &&
        std::tolower(static_cast<unsigned char>(name[1])) == kMonths[i][1] &&
        std::tolower(static_cast<unsigned char>(name[2])) == kMonths[i][2]) {
      return static_cast<int>(i) + 1;
    }
  }
  return 0;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Parses "+HH:MM", "-HHMM" or "Z"; returns the offset east of UTC.
std::optional<minutes> parse_offset(std::string_view s) {
  if (s.empty() || s == "Z" || s == "z") return minutes{0};
  if (s[0] != '+' && s[0] != '-') return std::nullopt;
  int hh = 0, mm = 0;
  std::string_view rest = s.substr(1);
  if (rest.size() == 5 && rest[2] == ':') {
    if (!read_int(rest, 0, 2, hh) || !read_int(rest, 3, 2, mm)) return std::nullopt;
  } else if (rest.size() == 4) {
    if (!read_int(rest, 0, 2, hh) || !read_int(rest, 2, 2, mm)) return std::nullopt;
  } else if (rest.size() == 2) {
    if (!read_int(rest, 0, 2, hh)) return std::nullopt;
  } else {
    return std::nullopt;
  }
  minutes off = hours{hh} + minutes{mm};
  return s[0] == '-' ? -off : off;
}

}  // namespace

std::optional<Timestamp> parse_iso8601(std::string_view text) {
  std::string_view s = trim(text);
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;

  if (s.size() == 14 && s.find_first_not_of("0123456789") == std::string_view::npos) {
    if (!read_int(s, 0, 4, y) || !read_int(s, 4, 2, mo) || !read_int(s, 6, 2, d) ||
        !read_int(s, 8, 2, h) || !read_int(s, 10, 2, mi) || !read_int(s, 12, 2, sec)) {
      return std::nullopt;
    }
    return make_time(y, mo, d, h, mi, sec);
  }

  if (!read_int(s, 0, 4, y) || s.size() < 10 || s[4] != '-' || !read_int(s, 5, 2, mo) ||
      s[7] != '-' || !read_int(s, 8, 2, d)) {
    return std::nullopt;
  }
  if (s.size() == 10) return make_time(y, mo, d, 0, 0, 0);
  if (s[10] != 'T' && s[10] != 't' && s[10] != ' ') return std::nullopt;
  size_t pos = 11;
  if (!read_int(s, pos, 2, h) || pos + 2 >= s.size() || s[pos + 2] != ':' ||
      !read_int(s, pos + 3, 2, mi)) {
    return std::nullopt;
  }
  pos += 5;
  if (pos < s.size() && s[pos] == ':') {
    if (!read_int(s, pos + 1, 2, sec)) return std::nullopt;
    pos += 3;
    // Fractional seconds are accepted and truncated.
    if (pos < s.size() && s[pos] == '.') {
      ++pos;
      while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
    }
  }
  auto off = parse_offset(s.substr(pos));
  if (!off) return std::nullopt;
  auto t = make_time(y, mo, d, h, mi, sec);
  if (!t) return std::nullopt;
  return *t - *off;
}

std::optional<Timestamp> parse_http_date(std::string_view text) {
  // "Wed, 26 Feb 2014 09:08:46 GMT"; the weekday is optional and unchecked.
  std::string_view s = trim(text);
  if (auto comma = s.find(','); comma != std::string_view::npos) s = trim(s.substr(comma + 1));
  int d = 0, y = 0, h = 0, mi = 0, sec = 0;
  size_t pos = 0;
  size_t day_len = (s.size() > 1 && std::isdigit(static_cast<unsigned char>(s[1]))) ? 2 : 1;
  if (!read_int(s, pos, day_len, d)) return std::nullopt;
  pos += day_len;
  if (pos >= s.size() || s[pos] != ' ') return std::nullopt;
  int mo = month_index(s.substr(pos + 1, 3));
  if (mo == 0) return std::nullopt;
  pos += 4;
  if (pos >= s.size() || s[pos] != ' ' || !read_int(s, pos + 1, 4, y)) return std::nullopt;
  pos += 5;
  if (pos >= s.size() || s[pos] != ' ' || !read_int(s, pos + 1, 2, h) ||
      pos + 3 >= s.size() || s[pos + 3] != ':' || !read_int(s, pos + 4, 2, mi) ||
      pos + 6 >= s.size() || s[pos + 6] != ':' || !read_int(s, pos + 7, 2, sec)) {
    return std::nullopt;
  }
  std::string_view zone = trim(s.substr(pos + 9));
  if (!zone.empty() && zone != "GMT" && zone != "UTC" && zone != "Z") {
    auto off = parse_offset(zone);
    if (!off) return std::nullopt;
    auto t = make_time(y, mo, d, h, mi, sec);
    if (!t) return std::nullopt;
    return *t - *off;
  }
  return make_time(y, mo, d, h, mi, sec);
}

std::optional<Timestamp> parse_clf_time(std::string_view text) {
  std::string_view s = trim(text);
  if (!s.empty() && s.front() == '[') s.remove_prefix(1);
  if (!s.empty() && s.back() == ']') s.remove_suffix(1);
  // 08/Feb/2012:00:00:01 +0000
  int d = 0, y = 0, h = 0, mi = 0, sec = 0;
  if (!read_int(s, 0, 2, d) || s.size() < 20 || s[2] != '/') return std::nullopt;
  int mo = month_index(s.substr(3, 3));
  if (mo == 0 || s[6] != '/' || !read_int(s, 7, 4, y) || s[11] != ':' || !read_int(s, 12, 2, h) ||
      s[14] != ':' || !read_int(s, 15, 2, mi) || s[17] != ':' || !read_int(s, 18, 2, sec)) {
    return std::nullopt;
  }
  auto t = make_time(y, mo, d, h, mi, sec);
  if (!t) return std::nullopt;
  std::string_view zone = trim(s.substr(20));
  auto off = parse_offset(zone);
  if (!off) return std::nullopt;
  return *t - *off;
}

std::string format_iso8601(Timestamp t) {
  auto days = floor<std::chrono::days>(t);
  year_month_day ymd{days};
  hh_mm_ss hms{t - days};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

Timestamp now_utc() { return floor<seconds>(system_clock::now()); }

}  // namespace lostpage
