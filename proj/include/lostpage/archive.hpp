#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lostpage/timeutil.hpp"

namespace lostpage {

struct Memento {
  Timestamp datetime;
  std::string uri;

  friend bool operator==(const Memento&, const Memento&) = default;
};

struct ArchiveEvidence {
  std::string uri;
  bool archived = false;
  size_t memento_count = 0;
  std::vector<Memento> mementos;  // ascending datetime, then URI
  bool truncated = false;         // continuation pages were left unread
  std::optional<std::string> nearest_memento_uri;

  friend bool operator==(const ArchiveEvidence&, const ArchiveEvidence&) = default;
};

/// One link-value of an RFC 8288 link-format document.
struct LinkValue {
  std::string target;
  std::map<std::string, std::string> params;  // names lowercased, values unquoted

  /// Space-separated tokens of the rel parameter.
  std::vector<std::string> rels() const;
  bool has_rel(std::string_view rel) const;
};

/// Throws RetryableError on malformed input.
std::vector<LinkValue> parse_link_format(std::string_view body);

struct TimeMapPage {
  std::vector<Memento> mementos;
  std::optional<std::string> next;  // continuation page, if any
};

/// Entries whose rel includes "memento" become mementos; a rel including
/// "next" without "memento" names the continuation page. Throws
/// RetryableError for malformed link-format or memento datetimes.
TimeMapPage parse_timemap(std::string_view body);

/// Source of TimeMaps. nullopt means the aggregator answered 404 (not
/// archived). Transport problems throw RetryableError. Implementations are
/// safe for concurrent calls.
class TimeMapProvider {
 public:
  virtual ~TimeMapProvider() = default;
  virtual std::string name() const = 0;
  virtual std::optional<std::string> timemap(std::string_view uri) const = 0;
  virtual std::optional<std::string> page(std::string_view url) const = 0;
};

/// Recorded TimeMaps. `index.tsv` maps a key to a file in the same
/// directory: URI keys are matched by SURT for timemap(), page URLs
/// exactly for page(). The file names `!error` and `!404` simulate a
/// transport failure and an aggregator 404.
class FixtureTimeMapProvider : public TimeMapProvider {
 public:
  explicit FixtureTimeMapProvider(std::filesystem::path dir);
  std::string name() const override { return "timemap-fixture"; }
  std::optional<std::string> timemap(std::string_view uri) const override;
  std::optional<std::string> page(std::string_view url) const override;

 private:
  std::optional<std::string> read(const std::string& file) const;
  std::filesystem::path dir_;
  std::unordered_map<std::string, std::string> by_surt_;
  std::unordered_map<std::string, std::string> by_url_;
};

/// MemGator-style aggregator: GET <base>/timemap/link/<uri>.
class HttpTimeMapProvider : public TimeMapProvider {
 public:
  HttpTimeMapProvider(std::string base_url, std::chrono::milliseconds timeout);
  std::string name() const override { return "timemap:" + base_; }
  std::optional<std::string> timemap(std::string_view uri) const override;
  std::optional<std::string> page(std::string_view url) const override;

 private:
  std::string base_;
  std::chrono::milliseconds timeout_;
};

/// Follows up to `max_pages` continuation pages; later pages are left
/// unread and `truncated` is set.
ArchiveEvidence fetch_timemap(const TimeMapProvider& provider, std::string_view uri, size_t max_pages = 5);

/// Memento closest to `requested`; ties go to the earlier one. Throws
/// Error when the evidence holds no mementos.
Memento nearest_memento(const ArchiveEvidence& evidence, Timestamp requested);

inline constexpr int64_t kDefaultRankFloor = 30'000'000;      // x: lowest global rank
inline constexpr int64_t kDefaultArchiveCeiling = 538'300;    // m: mementos of the top-ranked site

struct PopularityEvidence {
  std::optional<int64_t> global_rank;  // a
  int64_t rank_floor = kDefaultRankFloor;
  int64_t archive_count = 0;  // n
  int64_t archive_count_ceiling = kDefaultArchiveCeiling;
  std::vector<std::string> warnings;

  friend bool operator==(const PopularityEvidence&, const PopularityEvidence&) = default;
};

class PopularityProvider {
 public:
  virtual ~PopularityProvider() = default;
  virtual std::string name() const = 0;
  /// Global rank of a registered domain, or nullopt if unranked.
  virtual std::optional<int64_t> rank(std::string_view domain) const = 0;
};

/// `domain<TAB>rank` lines; `#` comments.
class FixturePopularityProvider : public PopularityProvider {
 public:
  static std::shared_ptr<FixturePopularityProvider> load(const std::filesystem::path& tsv);
  std::string name() const override { return "popularity-fixture"; }
  std::optional<int64_t> rank(std::string_view domain) const override;

 private:
  std::unordered_map<std::string, int64_t> ranks_;
};

struct PopularityLimits {
  int64_t rank_floor = kDefaultRankFloor;
  int64_t archive_count_ceiling = kDefaultArchiveCeiling;
};

/// Looks the rank up by registered domain, then by full host. A rank above
/// the floor or a memento count above the ceiling is clamped with a warning.
PopularityEvidence fetch_popularity(const PopularityProvider& provider, std::string_view uri,
                                    const ArchiveEvidence& evidence, const PopularityLimits& limits = {});

enum class DamageSource { Provider, Fixture, DefaultMissing };
std::string_view to_string(DamageSource s);

inline constexpr double kDefaultDamage = 0.5;

struct DamageEvidence {
  double damage = kDefaultDamage;
  DamageSource source = DamageSource::DefaultMissing;

  friend bool operator==(const DamageEvidence&, const DamageEvidence&) = default;
};

class DamageProvider {
 public:
  virtual ~DamageProvider() = default;
  virtual std::string name() const = 0;
  virtual DamageSource source() const = 0;
  /// Damage of a memento in [0,1], nullopt when unknown. Hard failures
  /// throw RetryableError.
  virtual std::optional<double> damage(std::string_view memento_uri) const = 0;
};

/// `memento-uri<TAB>d` lines; `#` comments.
class FixtureDamageProvider : public DamageProvider {
 public:
  static std::shared_ptr<FixtureDamageProvider> load(const std::filesystem::path& tsv);
  std::string name() const override { return "damage-fixture"; }
  DamageSource source() const override { return DamageSource::Fixture; }
  std::optional<double> damage(std::string_view memento_uri) const override;

 private:
  std::unordered_map<std::string, double> scores_;
};

/// Memento-Damage style service: GET <base>/api/damage/<memento-uri>,
/// reading the `total_damage` field of the JSON reply.
class HttpDamageProvider : public DamageProvider {
 public:
  HttpDamageProvider(std::string base_url, std::chrono::milliseconds timeout);
  std::string name() const override { return "damage:" + base_; }
  DamageSource source() const override { return DamageSource::Provider; }
  std::optional<double> damage(std::string_view memento_uri) const override;

 private:
  std::string base_;
  std::chrono::milliseconds timeout_;
};

/// Missing scores become d = 0.5 flagged DefaultMissing. Out-of-range
/// provider values are clamped into [0,1].
DamageEvidence fetch_damage(const DamageProvider* provider, std::string_view memento_uri);

nlohmann::json to_json(const ArchiveEvidence& e);
ArchiveEvidence archive_evidence_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PopularityEvidence& e);
PopularityEvidence popularity_evidence_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DamageEvidence& e);
DamageEvidence damage_evidence_from_json(const nlohmann::json& j);

/// Append-only JSONL evidence store keyed by (kind, provider, key). Reads
/// are concurrent; writes are serialized. Records older than max_age are
/// ignored (and refetched by callers). A zero max_age never expires.
class EvidenceCache {
 public:
  EvidenceCache(std::filesystem::path file, std::chrono::seconds max_age = std::chrono::seconds{0});

  std::optional<nlohmann::json> get(std::string_view kind, std::string_view provider, std::string_view key) const;
  void put(std::string_view kind, std::string_view provider, std::string_view key, const nlohmann::json& value);
  size_t size() const;
  const std::filesystem::path& file() const { return file_; }

 private:
  struct Record;
  std::filesystem::path file_;
  std::chrono::seconds max_age_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, std::shared_ptr<Record>> records_;
};

struct GatewayConfig {
  size_t max_pages = 5;
  unsigned parallelism = 4;
  std::chrono::milliseconds budget{30'000};  // per gather_all call
  int retries = 1;                           // extra attempts after a retryable failure
  PopularityLimits limits;
};

struct CandidateEvidence {
  std::string uri;
  ArchiveEvidence archive;
  std::optional<Memento> nearest;
  PopularityEvidence popularity;
  DamageEvidence damage;
  bool failed = false;  // evidence could not be gathered; treat as unusable
  std::string error;
  std::vector<std::string> warnings;
};

/// Gathers TimeMap, popularity and damage evidence for candidates, with a
/// parallelism bound, a time budget and an optional persistent cache.
class ArchiveGateway {
 public:
  ArchiveGateway(std::shared_ptr<const TimeMapProvider> timemaps,
                 std::shared_ptr<const PopularityProvider> popularity,
                 std::shared_ptr<const DamageProvider> damage, GatewayConfig config = {},
                 std::shared_ptr<EvidenceCache> cache = nullptr);

  /// Damage is only fetched for archived candidates (for their nearest memento).
  CandidateEvidence gather(std::string_view uri, Timestamp requested) const;
  /// Results follow the input order. Candidates not started before the
  /// budget ran out are marked failed.
  std::vector<CandidateEvidence> gather_all(std::span<const std::string> uris, Timestamp requested) const;

  const GatewayConfig& config() const { return config_; }

 private:
  ArchiveEvidence timemap_for(std::string_view uri) const;
  PopularityEvidence popularity_for(std::string_view uri, const ArchiveEvidence& archive) const;
  DamageEvidence damage_for(std::string_view memento_uri) const;

  std::shared_ptr<const TimeMapProvider> timemaps_;
  std::shared_ptr<const PopularityProvider> popularity_;
  std::shared_ptr<const DamageProvider> damage_;
  GatewayConfig config_;
  std::shared_ptr<EvidenceCache> cache_;
};

}  // namespace lostpage
