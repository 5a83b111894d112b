#include "lostpage/archive.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>
#include <unordered_set>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "lostpage/error.hpp"
#include "lostpage/uri.hpp"
#include "text_util.hpp"

namespace lostpage {
namespace {

using nlohmann::json;

bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

[[noreturn]] void malformed(std::string_view why, size_t pos) {
  throw RetryableError("malformed link-format at offset " + std::to_string(pos) + ": " + std::string(why));
}

struct UrlParts {
  std::string origin;  // scheme://host[:port]
  std::string path;    // starts with '/'
};

UrlParts split_url(std::string_view url) {
  size_t scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) throw ConfigError("not an absolute URL: " + std::string(url));
  size_t path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string_view::npos) return {std::string(url), "/"};
  return {std::string(url.substr(0, path_start)), std::string(url.substr(path_start))};
}

std::string trim_slash(std::string s) {
  while (!s.empty() && s.back() == '/') s.pop_back();
  return s;
}

/// GET with 404 mapped to nullopt; anything else unexpected is retryable.
std::optional<std::string> http_get(const std::string& url, std::chrono::milliseconds timeout) {
  UrlParts parts = split_url(url);
  httplib::Client client(parts.origin);
  if (!client.is_valid()) throw RetryableError("unsupported URL (TLS unavailable?): " + url);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_follow_location(true);
  auto res = client.Get(parts.path);
  if (!res) throw RetryableError("request failed for " + url + ": " + httplib::to_string(res.error()));
  if (res->status == 404) return std::nullopt;
  if (res->status != 200) throw RetryableError("HTTP " + std::to_string(res->status) + " for " + url);
  return res->body;
}

std::vector<std::pair<std::string, std::string>> read_tsv_pairs(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open " + file.string());
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto f = detail::split_keep(line, '\t');
    if (f.size() < 2) throw IoError(file.string() + ":" + std::to_string(line_no) + ": expected 2 fields");
    out.emplace_back(std::string(detail::trim(f[0])), std::string(detail::trim(f[1])));
  }
  return out;
}

std::string domain_key(std::string_view host) {
  std::string h = detail::to_lower(detail::trim(host));
  if (h.starts_with("www.")) h.erase(0, 4);
  return h;
}

std::string surt_key(std::string_view uri) {
  try {
    return canonicalize_surt(normalize_input_uri(uri));
  } catch (const ParseError&) {
    return std::string(uri);
  }
}

template <typename F>
auto with_retries(int retries, F&& f) -> decltype(f()) {
  for (int attempt = 0;; ++attempt) {
    try {
      return f();
    } catch (const RetryableError&) {
      if (attempt >= retries) throw;
    }
  }
}

}  // namespace

std::vector<std::string> LinkValue::rels() const {
  auto it = params.find("rel");
  if (it == params.end()) return {};
  std::vector<std::string> out;
  std::istringstream in(detail::to_lower(it->second));
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

bool LinkValue::has_rel(std::string_view rel) const {
  auto r = rels();
  return std::find(r.begin(), r.end(), rel) != r.end();
}

std::vector<LinkValue> parse_link_format(std::string_view s) {
  std::vector<LinkValue> out;
  size_t i = 0;
  auto skip_ws = [&] {
    while (i < s.size() && is_ws(s[i])) ++i;
  };
  while (true) {
    skip_ws();
    while (i < s.size() && (s[i] == ',' || is_ws(s[i]))) ++i;
    if (i >= s.size()) break;
    if (s[i] != '<') malformed("expected '<'", i);
    size_t close = s.find('>', i + 1);
    if (close == std::string_view::npos) malformed("unterminated target", i);
    LinkValue link;
    link.target = std::string(detail::trim(s.substr(i + 1, close - i - 1)));
    i = close + 1;
    while (true) {
      skip_ws();
      if (i >= s.size() || s[i] == ',') break;
      if (s[i] != ';') malformed("expected ';' or ','", i);
      ++i;
      skip_ws();
      size_t name_start = i;
      while (i < s.size() && s[i] != '=' && s[i] != ';' && s[i] != ',' && !is_ws(s[i])) ++i;
      std::string name = detail::to_lower(s.substr(name_start, i - name_start));
      if (name.empty()) malformed("empty parameter name", i);
      skip_ws();
      std::string value;
      if (i < s.size() && s[i] == '=') {
        ++i;
        skip_ws();
        if (i < s.size() && s[i] == '"') {
          ++i;
          bool closed = false;
          while (i < s.size()) {
            if (s[i] == '\\' && i + 1 < s.size()) {
              value += s[i + 1];
              i += 2;
            } else if (s[i] == '"') {
              ++i;
              closed = true;
              break;
            } else {
              value += s[i++];
            }
          }
          if (!closed) malformed("unterminated quoted value", i);
        } else {
          size_t v0 = i;
          while (i < s.size() && s[i] != ';' && s[i] != ',') ++i;
          value = std::string(detail::trim(s.substr(v0, i - v0)));
        }
      }
      link.params.emplace(std::move(name), std::move(value));
    }
    out.push_back(std::move(link));
  }
  return out;
}

TimeMapPage parse_timemap(std::string_view body) {
  TimeMapPage page;
  for (const auto& link : parse_link_format(body)) {
    auto rels = link.rels();
    bool memento = std::find(rels.begin(), rels.end(), "memento") != rels.end();
    bool next = std::find(rels.begin(), rels.end(), "next") != rels.end();
    if (memento) {
      auto dt = link.params.find("datetime");
      if (dt == link.params.end()) throw RetryableError("memento without datetime: " + link.target);
      auto ts = parse_http_date(dt->second);
      if (!ts) ts = parse_iso8601(dt->second);
      if (!ts) throw RetryableError("unparseable memento datetime '" + dt->second + "'");
      page.mementos.push_back({*ts, link.target});
    } else if (next && !page.next) {
      page.next = link.target;
    }
  }
  return page;
}

FixtureTimeMapProvider::FixtureTimeMapProvider(std::filesystem::path dir) : dir_(std::move(dir)) {
  for (auto& [key, file] : read_tsv_pairs(dir_ / "index.tsv")) {
    by_url_.emplace(key, file);
    by_surt_.emplace(surt_key(key), file);
  }
}

std::optional<std::string> FixtureTimeMapProvider::read(const std::string& file) const {
  if (file == "!error") throw RetryableError("simulated transport failure");
  if (file == "!404") return std::nullopt;
  std::ifstream in(dir_ / file, std::ios::binary);
  if (!in) throw IoError("missing TimeMap fixture " + (dir_ / file).string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::optional<std::string> FixtureTimeMapProvider::timemap(std::string_view uri) const {
  auto it = by_surt_.find(surt_key(uri));
  if (it == by_surt_.end()) return std::nullopt;
  return read(it->second);
}

std::optional<std::string> FixtureTimeMapProvider::page(std::string_view url) const {
  auto it = by_url_.find(std::string(url));
  if (it == by_url_.end()) return std::nullopt;
  return read(it->second);
}

HttpTimeMapProvider::HttpTimeMapProvider(std::string base_url, std::chrono::milliseconds timeout)
    : base_(trim_slash(std::move(base_url))), timeout_(timeout) {
  split_url(base_);
}

std::optional<std::string> HttpTimeMapProvider::timemap(std::string_view uri) const {
  return http_get(base_ + "/timemap/link/" + std::string(uri), timeout_);
}

std::optional<std::string> HttpTimeMapProvider::page(std::string_view url) const {
  return http_get(std::string(url), timeout_);
}

ArchiveEvidence fetch_timemap(const TimeMapProvider& provider, std::string_view uri, size_t max_pages) {
  ArchiveEvidence ev;
  ev.uri = std::string(uri);
  auto body = provider.timemap(uri);
  if (!body) return ev;

  std::vector<Memento> all;
  std::vector<std::string> seen_pages;
  size_t pages = 1;
  while (true) {
    TimeMapPage page = parse_timemap(*body);
    all.insert(all.end(), page.mementos.begin(), page.mementos.end());
    if (!page.next) break;
    if (std::find(seen_pages.begin(), seen_pages.end(), *page.next) != seen_pages.end()) break;
    if (pages >= max_pages) {
      ev.truncated = true;
      break;
    }
    seen_pages.push_back(*page.next);
    body = provider.page(*page.next);
    if (!body) break;
    ++pages;
  }

  std::sort(all.begin(), all.end(), [](const Memento& a, const Memento& b) {
    return a.datetime != b.datetime ? a.datetime < b.datetime : a.uri < b.uri;
  });
  std::unordered_set<std::string> seen;
  for (auto& m : all) {
    if (seen.insert(m.uri).second) ev.mementos.push_back(std::move(m));
  }
  ev.memento_count = ev.mementos.size();
  ev.archived = ev.memento_count > 0;
  return ev;
}

Memento nearest_memento(const ArchiveEvidence& evidence, Timestamp requested) {
  if (evidence.mementos.empty()) throw Error("no mementos for " + evidence.uri);
  const Memento* best = &evidence.mementos.front();
  auto distance = [&](const Memento& m) {
    auto d = m.datetime - requested;
    return d < d.zero() ? -d : d;
  };
  for (const auto& m : evidence.mementos) {
    if (distance(m) < distance(*best)) best = &m;
  }
  return *best;
}

std::shared_ptr<FixturePopularityProvider> FixturePopularityProvider::load(const std::filesystem::path& tsv) {
  auto p = std::make_shared<FixturePopularityProvider>();
  for (auto& [domain, rank] : read_tsv_pairs(tsv)) {
    try {
      p->ranks_[domain_key(domain)] = std::stoll(rank);
    } catch (const std::exception&) {
      throw IoError(tsv.string() + ": bad rank '" + rank + "'");
    }
  }
  return p;
}

std::optional<int64_t> FixturePopularityProvider::rank(std::string_view domain) const {
  auto it = ranks_.find(domain_key(domain));
  if (it == ranks_.end()) return std::nullopt;
  return it->second;
}

PopularityEvidence fetch_popularity(const PopularityProvider& provider, std::string_view uri,
                                    const ArchiveEvidence& evidence, const PopularityLimits& limits) {
  ParsedUri p = parse_uri(uri);
  PopularityEvidence pe;
  pe.rank_floor = limits.rank_floor;
  pe.archive_count_ceiling = limits.archive_count_ceiling;
  pe.global_rank = provider.rank(p.registered_domain.empty() ? p.host : p.registered_domain);
  if (!pe.global_rank && p.host != p.registered_domain) pe.global_rank = provider.rank(p.host);
  if (pe.global_rank) {
    if (*pe.global_rank < 1) {
      pe.warnings.push_back("rank " + std::to_string(*pe.global_rank) + " below 1 treated as 1");
      pe.global_rank = 1;
    } else if (*pe.global_rank > pe.rank_floor) {
      pe.warnings.push_back("rank " + std::to_string(*pe.global_rank) + " clamped to " +
                            std::to_string(pe.rank_floor));
      pe.global_rank = pe.rank_floor;
    }
  }
  pe.archive_count = static_cast<int64_t>(evidence.memento_count);
  if (pe.archive_count > pe.archive_count_ceiling) {
    pe.warnings.push_back("memento count " + std::to_string(pe.archive_count) + " clamped to " +
                          std::to_string(pe.archive_count_ceiling));
    pe.archive_count = pe.archive_count_ceiling;
  }
  return pe;
}

std::string_view to_string(DamageSource s) {
  switch (s) {
    case DamageSource::Provider: return "provider";
    case DamageSource::Fixture: return "fixture";
    case DamageSource::DefaultMissing: return "default-missing";
  }
  return "unknown";
}

std::shared_ptr<FixtureDamageProvider> FixtureDamageProvider::load(const std::filesystem::path& tsv) {
  auto p = std::make_shared<FixtureDamageProvider>();
  for (auto& [uri, d] : read_tsv_pairs(tsv)) {
    try {
      p->scores_[uri] = std::stod(d);
    } catch (const std::exception&) {
      throw IoError(tsv.string() + ": bad damage '" + d + "'");
    }
  }
  return p;
}

std::optional<double> FixtureDamageProvider::damage(std::string_view memento_uri) const {
  auto it = scores_.find(std::string(memento_uri));
  if (it == scores_.end()) return std::nullopt;
  return it->second;
}

HttpDamageProvider::HttpDamageProvider(std::string base_url, std::chrono::milliseconds timeout)
    : base_(trim_slash(std::move(base_url))), timeout_(timeout) {
  split_url(base_);
}

std::optional<double> HttpDamageProvider::damage(std::string_view memento_uri) const {
  auto body = http_get(base_ + "/api/damage/" + std::string(memento_uri), timeout_);
  if (!body) return std::nullopt;
  try {
    json j = json::parse(*body);
    if (!j.contains("total_damage") || j["total_damage"].is_null()) return std::nullopt;
    return j["total_damage"].get<double>();
  } catch (const json::exception& e) {
    throw RetryableError(std::string("bad damage reply: ") + e.what());
  }
}

DamageEvidence fetch_damage(const DamageProvider* provider, std::string_view memento_uri) {
  DamageEvidence de;
  if (!provider) return de;
  auto d = provider->damage(memento_uri);
  if (!d || !std::isfinite(*d)) return de;
  de.damage = std::clamp(*d, 0.0, 1.0);
  de.source = provider->source();
  return de;
}

json to_json(const ArchiveEvidence& e) {
  json mementos = json::array();
  for (const auto& m : e.mementos) mementos.push_back({{"datetime", format_iso8601(m.datetime)}, {"uri", m.uri}});
  json j{{"uri", e.uri},
         {"archived", e.archived},
         {"memento_count", e.memento_count},
         {"mementos", mementos},
         {"truncated", e.truncated}};
  j["nearest_memento_uri"] = e.nearest_memento_uri ? json(*e.nearest_memento_uri) : json(nullptr);
  return j;
}

ArchiveEvidence archive_evidence_from_json(const json& j) {
  ArchiveEvidence e;
  e.uri = j.at("uri").get<std::string>();
  e.archived = j.at("archived").get<bool>();
  e.memento_count = j.at("memento_count").get<size_t>();
  for (const auto& m : j.at("mementos")) {
    auto ts = parse_iso8601(m.at("datetime").get<std::string>());
    if (!ts) throw IoError("bad cached memento datetime");
    e.mementos.push_back({*ts, m.at("uri").get<std::string>()});
  }
  e.truncated = j.value("truncated", false);
  if (j.contains("nearest_memento_uri") && !j["nearest_memento_uri"].is_null()) {
    e.nearest_memento_uri = j["nearest_memento_uri"].get<std::string>();
  }
  return e;
}

json to_json(const PopularityEvidence& e) {
  json j{{"rank_floor", e.rank_floor},
         {"archive_count", e.archive_count},
         {"archive_count_ceiling", e.archive_count_ceiling},
         {"warnings", e.warnings}};
  j["global_rank"] = e.global_rank ? json(*e.global_rank) : json(nullptr);
  return j;
}

PopularityEvidence popularity_evidence_from_json(const json& j) {
  PopularityEvidence e;
  if (!j.at("global_rank").is_null()) e.global_rank = j["global_rank"].get<int64_t>();
  e.rank_floor = j.at("rank_floor").get<int64_t>();
  e.archive_count = j.at("archive_count").get<int64_t>();
  e.archive_count_ceiling = j.at("archive_count_ceiling").get<int64_t>();
  e.warnings = j.value("warnings", std::vector<std::string>{});
  return e;
}

json to_json(const DamageEvidence& e) { return {{"damage", e.damage}, {"source", std::string(to_string(e.source))}}; }

DamageEvidence damage_evidence_from_json(const json& j) {
  DamageEvidence e;
  e.damage = j.at("damage").get<double>();
  std::string s = j.at("source").get<std::string>();
  e.source = s == "provider" ? DamageSource::Provider
             : s == "fixture" ? DamageSource::Fixture
                              : DamageSource::DefaultMissing;
  return e;
}

struct EvidenceCache::Record {
  json value;
  std::chrono::system_clock::time_point fetched;
};

namespace {

std::string cache_key(std::string_view kind, std::string_view provider, std::string_view key) {
  std::string k(kind);
  k += '\x1f';
  k += provider;
  k += '\x1f';
  k += key;
  return k;
}

}  // namespace

EvidenceCache::EvidenceCache(std::filesystem::path file, std::chrono::seconds max_age)
    : file_(std::move(file)), max_age_(max_age) {
  std::ifstream in(file_);
  if (!in) return;
  std::string line;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    try {
      json j = json::parse(line);
      auto rec = std::make_shared<Record>();
      rec->value = j.at("value");
      rec->fetched = std::chrono::system_clock::time_point(std::chrono::seconds(j.at("fetched_at").get<int64_t>()));
      records_[cache_key(j.at("kind").get<std::string>(), j.at("provider").get<std::string>(),
                         j.at("key").get<std::string>())] = rec;
    } catch (const json::exception&) {
      // a torn final line from an interrupted run
    }
  }
}

std::optional<json> EvidenceCache::get(std::string_view kind, std::string_view provider, std::string_view key) const {
  std::shared_lock lock(mutex_);
  auto it = records_.find(cache_key(kind, provider, key));
  if (it == records_.end()) return std::nullopt;
  if (max_age_.count() > 0 && std::chrono::system_clock::now() - it->second->fetched > max_age_) return std::nullopt;
  return it->second->value;
}

void EvidenceCache::put(std::string_view kind, std::string_view provider, std::string_view key, const json& value) {
  auto rec = std::make_shared<Record>();
  rec->value = value;
  rec->fetched = std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
  json line{{"kind", kind},
            {"provider", provider},
            {"key", key},
            {"fetched_at", std::chrono::duration_cast<std::chrono::seconds>(rec->fetched.time_since_epoch()).count()},
            {"value", value}};
  std::unique_lock lock(mutex_);
  std::ofstream out(file_, std::ios::app);
  if (!out) throw IoError("cannot append to cache " + file_.string());
  out << line.dump() << '\n';
  out.flush();
  records_[cache_key(kind, provider, key)] = std::move(rec);
}

size_t EvidenceCache::size() const {
  std::shared_lock lock(mutex_);
  return records_.size();
}

ArchiveGateway::ArchiveGateway(std::shared_ptr<const TimeMapProvider> timemaps,
                               std::shared_ptr<const PopularityProvider> popularity,
                               std::shared_ptr<const DamageProvider> damage, GatewayConfig config,
                               std::shared_ptr<EvidenceCache> cache)
    : timemaps_(std::move(timemaps)),
      popularity_(std::move(popularity)),
      damage_(std::move(damage)),
      config_(config),
      cache_(std::move(cache)) {
  if (!timemaps_) throw ConfigError("archive gateway needs a TimeMap provider");
  if (config_.parallelism == 0) config_.parallelism = 1;
}

ArchiveEvidence ArchiveGateway::timemap_for(std::string_view uri) const {
  std::string key = surt_key(uri);
  if (cache_) {
    if (auto hit = cache_->get("timemap", timemaps_->name(), key)) {
      ArchiveEvidence e = archive_evidence_from_json(*hit);
      e.uri = std::string(uri);
      return e;
    }
  }
  ArchiveEvidence e = with_retries(config_.retries, [&] { return fetch_timemap(*timemaps_, uri, config_.max_pages); });
  if (cache_) cache_->put("timemap", timemaps_->name(), key, to_json(e));
  return e;
}

PopularityEvidence ArchiveGateway::popularity_for(std::string_view uri, const ArchiveEvidence& archive) const {
  if (!popularity_) {
    PopularityEvidence pe;
    pe.rank_floor = config_.limits.rank_floor;
    pe.archive_count_ceiling = config_.limits.archive_count_ceiling;
    pe.archive_count = std::min<int64_t>(static_cast<int64_t>(archive.memento_count), pe.archive_count_ceiling);
    return pe;
  }
  return fetch_popularity(*popularity_, uri, archive, config_.limits);
}

DamageEvidence ArchiveGateway::damage_for(std::string_view memento_uri) const {
  if (!damage_) return {};
  if (cache_) {
    if (auto hit = cache_->get("damage", damage_->name(), memento_uri)) return damage_evidence_from_json(*hit);
  }
  DamageEvidence d = with_retries(config_.retries, [&] { return fetch_damage(damage_.get(), memento_uri); });
  if (cache_) cache_->put("damage", damage_->name(), memento_uri, to_json(d));
  return d;
}

CandidateEvidence ArchiveGateway::gather(std::string_view uri, Timestamp requested) const {
  CandidateEvidence ce;
  ce.uri = std::string(uri);
  try {
    ce.archive = timemap_for(uri);
    if (ce.archive.truncated) ce.warnings.push_back("TimeMap truncated after " + std::to_string(config_.max_pages) + " pages");
    if (ce.archive.archived) {
      ce.nearest = nearest_memento(ce.archive, requested);
      ce.archive.nearest_memento_uri = ce.nearest->uri;
      ce.damage = damage_for(ce.nearest->uri);
      if (ce.damage.source == DamageSource::DefaultMissing) ce.warnings.push_back("damage unknown, using 0.5");
    }
    ce.popularity = popularity_for(uri, ce.archive);
    for (const auto& w : ce.popularity.warnings) ce.warnings.push_back(w);
  } catch (const std::exception& e) {
    ce.failed = true;
    ce.error = e.what();
  }
  return ce;
}

std::vector<CandidateEvidence> ArchiveGateway::gather_all(std::span<const std::string> uris,
                                                          Timestamp requested) const {
  std::vector<CandidateEvidence> out(uris.size());
  const auto deadline = std::chrono::steady_clock::now() + config_.budget;
  std::atomic<size_t> next{0};
  auto worker = [&] {
    while (true) {
      size_t i = next.fetch_add(1);
      if (i >= uris.size()) return;
      if (std::chrono::steady_clock::now() > deadline) {
        out[i].uri = uris[i];
        out[i].failed = true;
        out[i].error = "evidence budget exhausted";
        continue;
      }
      out[i] = gather(uris[i], requested);
    }
  };
  size_t n_threads = std::min<size_t>(config_.parallelism, uris.size());
  std::vector<std::thread> threads;
  for (size_t t = 1; t < n_threads; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  return out;
}

}  // namespace lostpage
