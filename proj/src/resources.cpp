#include "lostpage/resources.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <optional>

#include "lostpage/error.hpp"
#include "text_util.hpp"

#ifndef LOSTPAGE_DATA_DIR
#define LOSTPAGE_DATA_DIR "data"
#endif

namespace lostpage {
namespace {

std::ifstream open_or_throw(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open " + file.string());
  return in;
}

std::mutex& data_dir_mutex() {
  static std::mutex m;
  return m;
}

std::optional<std::filesystem::path>& configured_data_dir() {
  static std::optional<std::filesystem::path> dir;
  return dir;
}

}  // namespace

PublicSuffixList PublicSuffixList::parse(std::istream& in) {
  PublicSuffixList psl;
  std::string line;
  while (std::getline(in, line)) {
    std::string_view rule = detail::trim(line);
    if (rule.empty() || rule.starts_with("//")) continue;
    // Rules end at the first whitespace.
    rule = rule.substr(0, rule.find_first_of(" \t"));
    std::string lowered = detail::to_lower(rule);
    if (lowered.starts_with("!")) {
      psl.exceptions_.insert(lowered.substr(1));
    } else if (lowered.starts_with("*.")) {
      psl.wildcards_.insert(lowered.substr(2));
    } else {
      psl.rules_.insert(lowered);
    }
  }
  return psl;
}

PublicSuffixList PublicSuffixList::load(const std::filesystem::path& file) {
  auto in = open_or_throw(file);
  return parse(in);
}

std::string PublicSuffixList::public_suffix(std::string_view host) const {
  std::vector<std::string_view> labels = detail::split(host, '.');
  if (labels.empty()) return {};
  auto join_from = [&](size_t i) {
    std::string out;
    for (size_t k = i; k < labels.size(); ++k) {
      if (!out.empty()) out += '.';
      out += labels[k];
    }
    return out;
  };
  // Longest candidate first; exception rules win over everything else.
  for (size_t i = 0; i < labels.size(); ++i) {
    std::string candidate = join_from(i);
    if (exceptions_.count(candidate)) return join_from(i + 1);
    if (rules_.count(candidate)) return candidate;
    if (i + 1 < labels.size() && wildcards_.count(join_from(i + 1))) return candidate;
  }
  return std::string(labels.back());
}

std::string PublicSuffixList::registered_domain(std::string_view host) const {
  std::string suffix = public_suffix(host);
  if (suffix.size() >= host.size()) return std::string(host);
  std::string_view rest = host.substr(0, host.size() - suffix.size() - 1);
  auto dot = rest.rfind('.');
  std::string_view label = dot == std::string_view::npos ? rest : rest.substr(dot + 1);
  return std::string(label) + "." + suffix;
}

StopWordList StopWordList::parse(std::istream& in) {
  StopWordList list;
  std::string line;
  while (std::getline(in, line)) {
    std::string_view word = detail::trim(line);
    if (word.empty() || word.starts_with("#")) continue;
    list.words_.insert(detail::to_lower(word));
  }
  return list;
}

StopWordList StopWordList::load(const std::filesystem::path& file) {
  auto in = open_or_throw(file);
  return parse(in);
}

WordLexicon WordLexicon::from_ranked(const std::vector<std::string>& words) {
  WordLexicon lex;
  const double n = static_cast<double>(std::max<size_t>(words.size(), 2));
  const double log_n = std::log(n);
  for (size_t rank = 0; rank < words.size(); ++rank) {
    const std::string& w = words[rank];
    if (w.empty()) continue;
    // Keep the best (lowest) rank if a word repeats.
    lex.costs_.try_emplace(w, std::log(static_cast<double>(rank + 1) * log_n));
    lex.max_len_ = std::max(lex.max_len_, w.size());
  }
  lex.unknown_char_cost_ = std::log((n + 1.0) * log_n);
  return lex;
}

WordLexicon WordLexicon::parse(std::istream& in) {
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    std::string_view word = detail::trim(line);
    if (word.empty() || word.starts_with("#")) continue;
    words.push_back(detail::to_lower(word));
  }
  return from_ranked(words);
}

WordLexicon WordLexicon::load(const std::filesystem::path& file) {
  auto in = open_or_throw(file);
  return parse(in);
}

const double* WordLexicon::cost(std::string_view word) const {
  auto it = costs_.find(std::string(word));
  return it == costs_.end() ? nullptr : &it->second;
}

Resources Resources::load(const std::filesystem::path& data_dir) {
  return Resources{
      PublicSuffixList::load(data_dir / "public_suffix_list.dat"),
      StopWordList::load(data_dir / "stopwords_en.txt"),
      WordLexicon::load(data_dir / "words_en.txt"),
  };
}

const Resources& Resources::bundled() {
  static const Resources instance = load(default_data_dir());
  return instance;
}

std::filesystem::path default_data_dir() {
  {
    std::lock_guard lock(data_dir_mutex());
    if (configured_data_dir()) return *configured_data_dir();
  }
  if (const char* env = std::getenv("LOSTPAGE_DATA_DIR"); env && *env) return env;
  return LOSTPAGE_DATA_DIR;
}

void set_default_data_dir(std::filesystem::path dir) {
  std::lock_guard lock(data_dir_mutex());
  configured_data_dir() = std::move(dir);
}

}  // namespace lostpage
