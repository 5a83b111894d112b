#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace lostpage {

using Timestamp = std::chrono::sys_seconds;

/// Parses ISO-8601 UTC datetimes: `YYYY-MM-DD`, `YYYY-MM-DDTHH:MM[:SS][Z]`,
/// with an optional `+HH:MM` / `-HH:MM` offset. Also accepts 14-digit
/// archive timestamps (`YYYYMMDDhhmmss`).
std::optional<Timestamp> parse_iso8601(std::string_view text);

/// Parses the HTTP-date format used by Memento-Datetime
/// (`Wed, 26 Feb 2014 09:08:46 GMT`).
std::optional<Timestamp> parse_http_date(std::string_view text);

/// Parses a Common Log Format time (`08/Feb/2012:00:00:01 +0000`, brackets
/// optional).
std::optional<Timestamp> parse_clf_time(std::string_view text);

/// `2014-02-26T09:08:46Z`.
std::string format_iso8601(Timestamp t);

Timestamp now_utc();

}  // namespace lostpage
