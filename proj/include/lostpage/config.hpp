#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lostpage/deep_classifier.hpp"
#include "lostpage/ranker.hpp"

namespace lostpage {

/// A configuration key with its documentation, used for validation and
/// for `lostpage config --keys`.
struct ConfigKey {
  std::string name;
  std::string default_value;  // empty: unset
  std::string help;
};

/// Every recognised key. Flags use the same names with `_` written as `-`.
const std::vector<ConfigKey>& config_keys();
bool is_config_key(std::string_view name);

/// Raw key/value layers. Precedence: flags, then the config file, then
/// LOSTPAGE_<KEY> environment variables, then built-in defaults.
class ConfigLayers {
 public:
  enum class Origin { Default, Env, File, Flag };

  /// `key = value` lines; `#` starts a comment line; blank lines ignored.
  /// Unknown keys and lines without `=` throw ConfigError naming the line.
  void read_file(std::istream& in, const std::string& name = "<config>");
  void read_file(const std::filesystem::path& file);
  /// Reads LOSTPAGE_<UPPERCASE KEY> for every known key.
  void read_env();
  void set(std::string_view key, std::string value, Origin origin);

  std::optional<std::string> get(std::string_view key) const;
  Origin origin(std::string_view key) const;

 private:
  struct Value {
    std::string text;
    Origin origin;
  };
  std::map<std::string, Value, std::less<>> values_;
};

enum class OutputFormat { Table, Records };
OutputFormat parse_output_format(std::string_view name);
std::string_view to_string(OutputFormat f);

/// Typed, validated configuration.
struct Settings {
  std::optional<std::filesystem::path> data_dir;
  std::optional<std::filesystem::path> index;         // ontology TSV written by `ingest`
  std::optional<std::filesystem::path> model;         // first-level model written by `train`
  std::optional<std::filesystem::path> vector_index;  // deep vector index written by `train`
  std::optional<std::filesystem::path> fixtures;      // recorded evidence directory
  std::optional<std::filesystem::path> popularity;    // domain<TAB>rank file
  std::optional<std::filesystem::path> secondary;     // secondary ontology JSONL
  std::optional<std::filesystem::path> cache;
  std::optional<std::string> aggregator;
  std::optional<std::string> damage_service;
  std::chrono::milliseconds timeout{10'000};
  std::chrono::milliseconds budget{30'000};
  unsigned parallelism = 4;
  std::chrono::seconds cache_max_age{0};
  RankWeights weights;
  size_t top = 10;
  GramScheme grams = GramScheme::AllGram;
  size_t deep_candidates = 10;
  size_t max_candidates = 200;
  size_t max_pages = 5;
  int64_t rank_floor = kDefaultRankFloor;
  int64_t archive_ceiling = kDefaultArchiveCeiling;
  int retries = 1;
  bool temporal_literal = false;
  OutputFormat output = OutputFormat::Table;
  double alpha = 1.0;

  /// Throws ConfigError for malformed or out-of-range values.
  static Settings from(const ConfigLayers& layers);
  nlohmann::json to_json() const;
};

}  // namespace lostpage
