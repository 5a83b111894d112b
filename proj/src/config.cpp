#include "lostpage/config.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <fstream>

#include <nlohmann/json.hpp>

#include "lostpage/error.hpp"
#include "text_util.hpp"

namespace lostpage {
namespace {

std::string env_name(std::string_view key) {
  std::string out = "LOSTPAGE_";
  for (char c : key) out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

template <typename T>
T parse_integer(std::string_view key, const std::string& text, T min, T max) {
  try {
    size_t used = 0;
    long long v = std::stoll(text, &used);
    if (used != text.size() || v < static_cast<long long>(min) || v > static_cast<long long>(max)) {
      throw std::out_of_range(text);
    }
    return static_cast<T>(v);
  } catch (const std::exception&) {
    throw ConfigError(std::string(key) + ": expected an integer in [" + std::to_string(min) + ", " +
                      std::to_string(max) + "], got '" + text + "'");
  }
}

bool parse_bool(std::string_view key, const std::string& text) {
  std::string v = detail::to_lower(text);
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off" || v.empty()) return false;
  throw ConfigError(std::string(key) + ": expected a boolean, got '" + text + "'");
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys{
      {"data_dir", "", "directory with the public suffix list, stop words and lexicon"},
      {"index", "", "ontology index (TSV written by ingest)"},
      {"model", "", "first-level Naive Bayes model (written by train)"},
      {"vector_index", "", "deep-classification vector index (written by train)"},
      {"fixtures", "", "recorded evidence directory: timemaps/, popularity.tsv, damage.tsv, wikipedia.jsonl"},
      {"popularity", "", "domain<TAB>global-rank file"},
      {"secondary", "", "secondary ontology JSONL (official_uri, categories, members)"},
      {"aggregator", "", "Memento aggregator base URL, e.g. http://localhost:1208"},
      {"damage_service", "", "memento-damage service base URL"},
      {"cache", "", "evidence cache file (JSONL)"},
      {"cache_max_age", "0", "seconds before a cached record is refetched; 0 never expires"},
      {"timeout_ms", "10000", "per-request HTTP timeout"},
      {"budget_ms", "30000", "time budget for gathering evidence for one recommendation"},
      {"parallelism", "4", "concurrent evidence fetches"},
      {"retries", "1", "extra attempts after a transient evidence failure"},
      {"max_pages", "5", "TimeMap continuation pages to follow"},
      {"weights", "0.25,0.25,0.25,0.25", "ranking weights t,p,s,q (sum to 1)"},
      {"top", "10", "number of recommendations"},
      {"grams", "all", "deep-classification grams: 3 or all"},
      {"deep_candidates", "10", "categories kept by the similarity pre-selection"},
      {"max_candidates", "200", "cap on candidates drawn from a first-level category"},
      {"rank_floor", "30000000", "lowest global rank (x)"},
      {"archive_ceiling", "538300", "memento count of the most archived site (m)"},
      {"temporal_literal", "false", "use the raw temporal distance instead of 1 - distance"},
      {"output", "table", "table or records"},
      {"alpha", "1", "Naive Bayes smoothing"},
  };
  return keys;
}

bool is_config_key(std::string_view name) {
  for (const auto& k : config_keys()) {
    if (k.name == name) return true;
  }
  return false;
}

void ConfigLayers::read_file(std::istream& in, const std::string& name) {
  std::string line;
  size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    size_t eq = t.find('=');
    std::string where = name + ":" + std::to_string(number);
    if (eq == std::string_view::npos) throw ConfigError(where + ": expected key = value");
    std::string key(detail::trim(t.substr(0, eq)));
    std::replace(key.begin(), key.end(), '-', '_');
    if (!is_config_key(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    set(key, std::string(detail::trim(t.substr(eq + 1))), Origin::File);
  }
}

void ConfigLayers::read_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open config file " + file.string());
  read_file(in, file.string());
}

void ConfigLayers::read_env() {
  for (const auto& k : config_keys()) {
    if (const char* v = std::getenv(env_name(k.name).c_str())) set(k.name, v, Origin::Env);
  }
}

void ConfigLayers::set(std::string_view key, std::string value, Origin origin) {
  if (!is_config_key(key)) throw ConfigError("unknown configuration key '" + std::string(key) + "'");
  auto it = values_.find(key);
  if (it != values_.end() && it->second.origin > origin) return;
  values_[std::string(key)] = Value{std::move(value), origin};
}

std::optional<std::string> ConfigLayers::get(std::string_view key) const {
  auto it = values_.find(key);
  if (it != values_.end()) return it->second.text;
  for (const auto& k : config_keys()) {
    if (k.name == key && !k.default_value.empty()) return k.default_value;
  }
  return std::nullopt;
}

ConfigLayers::Origin ConfigLayers::origin(std::string_view key) const {
  auto it = values_.find(key);
  return it == values_.end() ? Origin::Default : it->second.origin;
}

OutputFormat parse_output_format(std::string_view name) {
  std::string n = detail::to_lower(name);
  if (n == "table") return OutputFormat::Table;
  if (n == "records" || n == "jsonl") return OutputFormat::Records;
  throw ConfigError("output must be table or records, got '" + std::string(name) + "'");
}

std::string_view to_string(OutputFormat f) { return f == OutputFormat::Table ? "table" : "records"; }

Settings Settings::from(const ConfigLayers& layers) {
  Settings s;
  auto text = [&](const char* key) { return layers.get(key); };
  auto path = [&](const char* key) -> std::optional<std::filesystem::path> {
    auto v = text(key);
    if (!v || v->empty()) return std::nullopt;
    return std::filesystem::path(*v);
  };
  auto str = [&](const char* key) -> std::optional<std::string> {
    auto v = text(key);
    if (!v || v->empty()) return std::nullopt;
    return v;
  };

  s.data_dir = path("data_dir");
  s.index = path("index");
  s.model = path("model");
  s.vector_index = path("vector_index");
  s.fixtures = path("fixtures");
  s.popularity = path("popularity");
  s.secondary = path("secondary");
  s.cache = path("cache");
  s.aggregator = str("aggregator");
  s.damage_service = str("damage_service");

  s.cache_max_age = std::chrono::seconds{parse_integer<int64_t>("cache_max_age", *text("cache_max_age"), 0, INT64_MAX)};
  s.timeout = std::chrono::milliseconds{parse_integer<int64_t>("timeout_ms", *text("timeout_ms"), 1, INT64_MAX)};
  s.budget = std::chrono::milliseconds{parse_integer<int64_t>("budget_ms", *text("budget_ms"), 1, INT64_MAX)};
  s.parallelism = parse_integer<unsigned>("parallelism", *text("parallelism"), 1, 256);
  s.retries = parse_integer<int>("retries", *text("retries"), 0, 10);
  s.max_pages = parse_integer<size_t>("max_pages", *text("max_pages"), 1, 10'000);
  s.weights = RankWeights::parse(*text("weights"));
  s.top = parse_integer<size_t>("top", *text("top"), 1, 1'000'000);
  s.grams = parse_gram_scheme(*text("grams"));
  s.deep_candidates = parse_integer<size_t>("deep_candidates", *text("deep_candidates"), 1, 10'000);
  s.max_candidates = parse_integer<size_t>("max_candidates", *text("max_candidates"), 1, 10'000'000);
  s.rank_floor = parse_integer<int64_t>("rank_floor", *text("rank_floor"), 2, INT64_MAX);
  s.archive_ceiling = parse_integer<int64_t>("archive_ceiling", *text("archive_ceiling"), 2, INT64_MAX);
  s.temporal_literal = parse_bool("temporal_literal", *text("temporal_literal"));
  s.output = parse_output_format(*text("output"));
  try {
    s.alpha = std::stod(*text("alpha"));
  } catch (const std::exception&) {
    throw ConfigError("alpha: expected a number, got '" + *text("alpha") + "'");
  }
  if (!(s.alpha > 0.0)) throw ConfigError("alpha must be positive");
  return s;
}

nlohmann::json Settings::to_json() const {
  auto opt = [](const auto& v) -> nlohmann::json {
    if (!v) return nullptr;
    if constexpr (std::is_same_v<std::decay_t<decltype(*v)>, std::filesystem::path>) {
      return v->string();
    } else {
      return *v;
    }
  };
  return {{"data_dir", opt(data_dir)},
          {"index", opt(index)},
          {"model", opt(model)},
          {"vector_index", opt(vector_index)},
          {"fixtures", opt(fixtures)},
          {"popularity", opt(popularity)},
          {"secondary", opt(secondary)},
          {"cache", opt(cache)},
          {"aggregator", opt(aggregator)},
          {"damage_service", opt(damage_service)},
          {"cache_max_age", cache_max_age.count()},
          {"timeout_ms", timeout.count()},
          {"budget_ms", budget.count()},
          {"parallelism", parallelism},
          {"retries", retries},
          {"max_pages", max_pages},
          {"weights", weights.str()},
          {"top", top},
          {"grams", std::string(to_string(grams))},
          {"deep_candidates", deep_candidates},
          {"max_candidates", max_candidates},
          {"rank_floor", rank_floor},
          {"archive_ceiling", archive_ceiling},
          {"temporal_literal", temporal_literal},
          {"output", std::string(to_string(output))},
          {"alpha", alpha}};
}

}  // namespace lostpage
