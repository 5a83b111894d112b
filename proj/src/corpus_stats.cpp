#include "lostpage/corpus_stats.hpp"

#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lostpage/error.hpp"
#include "lostpage/segment.hpp"
#include "text_util.hpp"

namespace lostpage {
namespace {

bool letters_joined(std::string_view s, std::string_view delimiters) {
  for (size_t i = 1; i + 1 < s.size(); ++i) {
    if (delimiters.find(s[i]) != std::string_view::npos && detail::is_alpha(s[i - 1]) &&
        detail::is_alpha(s[i + 1])) {
      return true;
    }
  }
  return false;
}

std::string host_words(const ParsedUri& p) {
  if (p.is_ip()) return {};
  std::string host = p.host;
  if (!p.public_suffix.empty() && host.size() > p.public_suffix.size()) {
    host.resize(host.size() - p.public_suffix.size() - 1);
  } else if (host == p.public_suffix) {
    host.clear();
  }
  if (host.starts_with("www")) {
    size_t i = 3;
    while (i < host.size() && detail::is_digit(host[i])) ++i;
    if (i == host.size()) {
      host.clear();
    } else if (host[i] == '.') {
      host.erase(0, i + 1);
    }
  }
  return host;
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", v);
  return buf;
}

}  // namespace

UriProfile profile_uri(std::string_view uri, const Resources& resources) {
  ParsedUri p = parse_uri(uri, resources.suffixes);
  UriProfile out;
  out.tld = p.is_ip() ? "(ip)" : p.tld;
  out.depth = depth(uri);
  out.patterns = detect_patterns(uri);

  std::string host = host_words(p);
  std::string path = detail::to_lower(p.path);
  if (p.query) path += "?" + detail::to_lower(*p.query);
  out.delimiter_host = letters_joined(host, "-_");
  out.delimiter_path = letters_joined(path, "-_+");

  std::string text = detail::to_lower(host) + "/" + path;
  size_t pieces = 0;
  bool all_known = true;
  for (auto run : detail::alpha_runs(text)) {
    for (const auto& piece : segment_words(run, resources.lexicon)) {
      ++pieces;
      if (!piece.in_lexicon) {
        all_known = false;
      } else if (piece.text.size() >= 3) {
        out.dictionary_any = true;
      }
    }
  }
  out.dictionary_only = pieces > 0 && all_known;
  return out;
}

bool CorpusStatsBuilder::add(std::string_view uri, const CategoryPath* category) {
  UriProfile prof;
  try {
    prof = profile_uri(uri, resources_);
  } catch (const ParseError&) {
    ++report_.skipped;
    return false;
  }
  ++report_.total;
  ++report_.tld_counts[prof.tld];
  ++report_.depth_counts[prof.depth];
  for (int i = 0; i < kUriPatternCount; ++i) {
    auto pattern = static_cast<UriPattern>(i);
    if (prof.patterns.in_host(pattern)) ++report_.pattern_host[i];
    if (prof.patterns.in_path(pattern)) ++report_.pattern_path[i];
  }
  report_.dictionary_only += prof.dictionary_only;
  report_.dictionary_any += prof.dictionary_any;
  report_.delimiter_host += prof.delimiter_host;
  report_.delimiter_path += prof.delimiter_path;
  if (category && !category->empty()) {
    ++report_.category_counts[category->top_level()];
    auto& subs = subpaths_[category->top_level()];
    for (size_t n = 2; n <= category->depth(); ++n) subs.insert(category->prefix(n).str());
  }
  return true;
}

CorpusReport CorpusStatsBuilder::finish() const {
  CorpusReport r = report_;
  for (const auto& [top, subs] : subpaths_) r.subcategory_counts[top] = subs.size();
  return r;
}

double CorpusReport::percent(size_t count) const {
  return total == 0 ? 0.0 : 100.0 * static_cast<double>(count) / static_cast<double>(total);
}

nlohmann::json CorpusReport::to_json() const {
  using nlohmann::json;
  auto dist = [&](const auto& counts) {
    json arr = json::array();
    for (const auto& [k, v] : counts) arr.push_back({{"key", k}, {"count", v}, {"percent", percent(v)}});
    return arr;
  };
  json patterns = json::object();
  for (int i = 0; i < kUriPatternCount; ++i) {
    auto p = static_cast<UriPattern>(i);
    json row;
    row["host"] = applies_to_host(p) ? json(percent(pattern_host[i])) : json(nullptr);
    row["path"] = applies_to_path(p) ? json(percent(pattern_path[i])) : json(nullptr);
    row["host_count"] = pattern_host[i];
    row["path_count"] = pattern_path[i];
    patterns[std::string(to_string(p))] = row;
  }
  json cats = json::array();
  for (const auto& [top, n] : category_counts) {
    auto it = subcategory_counts.find(top);
    cats.push_back({{"category", top},
                    {"entries", n},
                    {"subcategories", it == subcategory_counts.end() ? 0 : it->second}});
  }
  return json{{"total", total},
              {"skipped", skipped},
              {"tld", dist(tld_counts)},
              {"depth", dist(depth_counts)},
              {"patterns", patterns},
              {"dictionary",
               {{"only_words", percent(dictionary_only)},
                {"at_least_one", percent(dictionary_any)},
                {"only_words_count", dictionary_only},
                {"at_least_one_count", dictionary_any}}},
              {"delimiters",
               {{"host", percent(delimiter_host)},
                {"path", percent(delimiter_path)},
                {"host_count", delimiter_host},
                {"path_count", delimiter_path}}},
              {"categories", cats}};
}

std::string CorpusReport::to_text() const {
  std::ostringstream out;
  out << "entries\t" << total << "\n";
  if (skipped) out << "skipped\t" << skipped << "\n";
  out << "\n[tld]\n";
  std::vector<std::pair<std::string, size_t>> tlds(tld_counts.begin(), tld_counts.end());
  std::stable_sort(tlds.begin(), tlds.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  for (const auto& [k, v] : tlds) out << k << "\t" << v << "\t" << pct(percent(v)) << "\n";
  out << "\n[depth]\n";
  for (const auto& [k, v] : depth_counts) out << k << "\t" << v << "\t" << pct(percent(v)) << "\n";
  out << "\n[patterns]\tdomain\tpath\n";
  for (int i = 0; i < kUriPatternCount; ++i) {
    auto p = static_cast<UriPattern>(i);
    out << to_string(p) << "\t" << (applies_to_host(p) ? pct(percent(pattern_host[i])) : "-") << "\t"
        << (applies_to_path(p) ? pct(percent(pattern_path[i])) : "-") << "\n";
  }
  out << "\n[dictionary]\n"
      << "only-words\t" << pct(percent(dictionary_only)) << "\n"
      << "at-least-one\t" << pct(percent(dictionary_any)) << "\n";
  out << "\n[delimiters]\n"
      << "domain\t" << pct(percent(delimiter_host)) << "\n"
      << "path\t" << pct(percent(delimiter_path)) << "\n";
  if (!category_counts.empty()) {
    out << "\n[categories]\tentries\tsubcategories\n";
    for (const auto& [top, n] : category_counts) {
      auto it = subcategory_counts.find(top);
      out << top << "\t" << n << "\t" << (it == subcategory_counts.end() ? 0 : it->second) << "\n";
    }
  }
  return out.str();
}

CorpusReport corpus_stats(const CategoryIndex& index, const Resources& resources) {
  CorpusStatsBuilder builder(resources);
  for (const auto& e : index.entries()) builder.add(e.uri, &e.category);
  return builder.finish();
}

CorpusReport corpus_stats(const CategoryIndex& index) { return corpus_stats(index, Resources::bundled()); }

}  // namespace lostpage
