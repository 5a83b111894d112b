#pragma once

#include <string>
#include <string_view>

namespace lostpage::detail {

/// URI components as written, before validation or case folding.
struct RawUri {
  std::string_view scheme;
  std::string_view host;
  std::string_view port;
  std::string_view path;
  std::string_view query;
  bool has_port = false;
  bool has_query = false;
};

RawUri split_raw(std::string_view uri);
std::string remove_dot_segments(std::string_view path);
std::string normalize_percent(std::string_view text);
/// Path as it appears in a SURT: dot segments resolved, percent-encoding
/// normalised, lowercased, trailing slash dropped unless the path is "/".
std::string canonical_path(std::string_view path);

}  // namespace lostpage::detail
