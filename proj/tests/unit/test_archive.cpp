#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <thread>

#include "lostpage/archive.hpp"
#include "lostpage/error.hpp"
#include "test_support.hpp"

using namespace lostpage;
using namespace std::chrono_literals;

namespace {
Timestamp T(const char* iso) { return *parse_iso8601(iso); }

std::filesystem::path tm_dir() { return testsupport::desk_dir() / "timemaps"; }

ArchiveEvidence evidence_with(std::vector<const char*> datetimes) {
  ArchiveEvidence ev;
  ev.uri = "http://x.com/";
  for (const char* d : datetimes) ev.mementos.push_back({T(d), std::string("m/") + d});
  ev.memento_count = ev.mementos.size();
  ev.archived = !ev.mementos.empty();
  return ev;
}

bool sorted(const std::vector<Memento>& ms) {
  return std::is_sorted(ms.begin(), ms.end(), [](const Memento& a, const Memento& b) { return a.datetime < b.datetime; });
}
}  // namespace

TEST_CASE("link-format parsing") {
  auto links = parse_link_format(R"(<http://a/>; rel="original", <http://b/>;rel="first memento";datetime="Mon, 01 Apr 2013 00:00:00 GMT")");
  REQUIRE(links.size() == 2);
  CHECK(links[0].target == "http://a/");
  CHECK(links[1].has_rel("memento"));
  CHECK(links[1].has_rel("first"));
  CHECK(links[1].params.at("datetime") == "Mon, 01 Apr 2013 00:00:00 GMT");
  CHECK_THROWS_AS(parse_link_format("<http://a/; rel=x"), RetryableError);
}

TEST_CASE("first and last memento only count as two") {
  auto page = parse_timemap(R"(<http://wm.edu/>; rel="original",
<https://web.archive.org/web/20130401000000/http://wm.edu/>; rel="first memento"; datetime="Mon, 01 Apr 2013 00:00:00 GMT",
<https://archive.today/20140601000000/http://wm.edu/>; rel="last memento"; datetime="Sun, 01 Jun 2014 00:00:00 GMT")");
  CHECK(page.mementos.size() == 2);
  CHECK_FALSE(page.next);
}

TEST_CASE("malformed memento datetime is retryable") {
  CHECK_THROWS_AS(parse_timemap(R"(<http://m/>; rel="memento"; datetime="yesterday")"), RetryableError);
}

TEST_CASE("recorded TimeMaps") {
  FixtureTimeMapProvider p(tm_dir());
  // hand counts of rel values containing "memento" in each fixture file
  const std::vector<std::pair<const char*, size_t>> expected{
      {"http://cs.gmu.edu/", 4},
      {"http://cs.virginia.edu/", 3},
      {"http://cs.vt.edu/", 3},
      {"http://wm.edu/as/computerscience/?svr=web", 2},
      {"http://radford.edu/content/csat/home/itec.html", 1},
      {"http://cs.jmu.edu/", 3},
      {"http://mathcs.richmond.edu/", 2},
  };
  for (const auto& [uri, n] : expected) {
    CAPTURE(uri);
    auto ev = fetch_timemap(p, uri);
    CHECK(ev.archived);
    CHECK(ev.memento_count == n);
    CHECK(ev.mementos.size() == n);
    CHECK(sorted(ev.mementos));
    CHECK_FALSE(ev.truncated);
  }
}

TEST_CASE("paged TimeMap follows rel=next and merges pages") {
  FixtureTimeMapProvider p(tm_dir());
  auto ev = fetch_timemap(p, "https://www.cs.odu.edu/");
  // page 1: 3 mementos, page 2: 4 mementos of which one repeats page 1
  CHECK(ev.memento_count == 6);
  CHECK(sorted(ev.mementos));
  CHECK(ev.mementos.front().datetime == T("2005-05-05T05:05:05Z"));
  CHECK(ev.mementos.back().datetime == T("2018-01-01T00:00:00Z"));
  auto one_page = fetch_timemap(p, "http://cs.odu.edu/", 1);
  CHECK(one_page.truncated);
  CHECK(one_page.memento_count == 3);
}

TEST_CASE("aggregator 404 and empty TimeMaps are not archived") {
  FixtureTimeMapProvider p(tm_dir());
  auto missing = fetch_timemap(p, "https://php.radford.edu/~itec");
  CHECK_FALSE(missing.archived);
  CHECK(missing.memento_count == 0);
  auto empty = fetch_timemap(p, "http://hollins.edu/academics/computersci");
  CHECK_FALSE(empty.archived);
  auto unknown = fetch_timemap(p, "http://never.example.org/");
  CHECK_FALSE(unknown.archived);
  CHECK_THROWS_AS(fetch_timemap(p, "http://flaky.example.com/"), RetryableError);
}

TEST_CASE("nearest memento") {
  auto ev = evidence_with({"2010-01-01", "2010-01-11", "2012-06-01"});
  CHECK(nearest_memento(ev, T("2010-01-11")).datetime == T("2010-01-11"));
  CHECK(nearest_memento(ev, T("2000-01-01")).datetime == T("2010-01-01"));
  CHECK(nearest_memento(ev, T("2010-01-06")).datetime == T("2010-01-01"));
  CHECK(nearest_memento(ev, T("2030-01-01")).datetime == T("2012-06-01"));
  CHECK_THROWS_AS(nearest_memento(evidence_with({}), T("2010-01-01")), Error);
}

TEST_CASE("popularity evidence") {
  struct Ranks : PopularityProvider {
    std::string name() const override { return "ranks"; }
    std::optional<int64_t> rank(std::string_view d) const override {
      if (d == "google.com") return 1;
      if (d == "deep.example.com") return 99'000'000;
      return std::nullopt;
    }
  } ranks;
  ArchiveEvidence top;
  top.memento_count = 538'300;
  auto g = fetch_popularity(ranks, "http://www.google.com/", top);
  CHECK(g.global_rank == 1);
  CHECK(g.archive_count == g.archive_count_ceiling);
  CHECK(g.warnings.empty());

  auto u = fetch_popularity(ranks, "http://unknown.example.org/", top);
  CHECK_FALSE(u.global_rank);

  ArchiveEvidence huge;
  huge.memento_count = 600'000;
  auto c = fetch_popularity(ranks, "http://deep.example.com/", huge);
  CHECK(c.archive_count == kDefaultArchiveCeiling);
  CHECK(c.global_rank == kDefaultRankFloor);
  CHECK(c.warnings.size() == 2);
}

TEST_CASE("fixture popularity and damage") {
  auto pop = FixturePopularityProvider::load(testsupport::desk_dir() / "popularity.tsv");
  CHECK(pop->rank("odu.edu") == 9876);
  CHECK_FALSE(pop->rank("nope.example"));
  auto dmg = FixtureDamageProvider::load(testsupport::desk_dir() / "damage.tsv");
  auto d = fetch_damage(dmg.get(), "https://web.archive.org/web/20140226090846/http://cs.odu.edu:80/");
  CHECK(d.damage == doctest::Approx(0.13));
  CHECK(d.source == DamageSource::Fixture);
  auto zero = fetch_damage(dmg.get(), "https://archive.today/20131001000000/http://mathcs.richmond.edu/");
  CHECK(zero.damage == 0.0);
  auto missing = fetch_damage(dmg.get(), "https://web.archive.org/web/1/http://x/");
  CHECK(missing.damage == kDefaultDamage);
  CHECK(missing.source == DamageSource::DefaultMissing);
  CHECK(fetch_damage(nullptr, "x").source == DamageSource::DefaultMissing);
}

TEST_CASE("evidence JSON round trips") {
  auto ev = evidence_with({"2010-01-01", "2011-01-01"});
  ev.nearest_memento_uri = "m/2010-01-01";
  CHECK(archive_evidence_from_json(to_json(ev)) == ev);
  PopularityEvidence pe;
  pe.global_rank = 17;
  pe.archive_count = 3;
  pe.warnings = {"w"};
  CHECK(popularity_evidence_from_json(to_json(pe)) == pe);
  DamageEvidence de{0.25, DamageSource::Provider};
  CHECK(damage_evidence_from_json(to_json(de)) == de);
}

TEST_CASE("evidence cache persists across instances") {
  auto file = std::filesystem::temp_directory_path() / "lostpage_cache_test.jsonl";
  std::filesystem::remove(file);
  auto ev = evidence_with({"2010-01-01"});
  {
    EvidenceCache cache(file);
    cache.put("timemap", "p", "k", to_json(ev));
    cache.put("timemap", "p", "k2", to_json(evidence_with({})));
    CHECK(cache.size() == 2);
  }
  EvidenceCache again(file);
  auto got = again.get("timemap", "p", "k");
  REQUIRE(got);
  CHECK(archive_evidence_from_json(*got) == ev);
  CHECK_FALSE(again.get("timemap", "other", "k"));
  std::filesystem::remove(file);
}

TEST_CASE("gateway gathers evidence and flags failures") {
  auto timemaps = std::make_shared<FixtureTimeMapProvider>(tm_dir());
  auto pop = FixturePopularityProvider::load(testsupport::desk_dir() / "popularity.tsv");
  auto dmg = FixtureDamageProvider::load(testsupport::desk_dir() / "damage.tsv");
  ArchiveGateway gw(timemaps, pop, dmg, {.parallelism = 3, .retries = 0});
  std::vector<std::string> uris{"http://cs.odu.edu/", "https://php.radford.edu/~itec", "http://flaky.example.com/",
                                "http://cs.gmu.edu/"};
  auto out = gw.gather_all(uris, T("2014-03-01"));
  REQUIRE(out.size() == 4);
  CHECK(out[0].uri == uris[0]);
  CHECK(out[0].archive.archived);
  REQUIRE(out[0].nearest);
  CHECK(out[0].nearest->datetime == T("2014-02-26T09:08:46Z"));
  CHECK(out[0].damage.damage == doctest::Approx(0.13));
  CHECK(out[0].popularity.global_rank == 9876);
  CHECK_FALSE(out[1].archive.archived);
  CHECK_FALSE(out[1].failed);
  CHECK(out[2].failed);
  CHECK_FALSE(out[2].error.empty());
  CHECK(out[3].archive.memento_count == 4);
}

TEST_CASE("gateway retries transient failures") {
  struct Flaky : TimeMapProvider {
    mutable std::atomic<int> calls{0};
    std::string name() const override { return "flaky"; }
    std::optional<std::string> timemap(std::string_view) const override {
      if (calls++ == 0) throw RetryableError("timeout");
      return std::string(R"(<http://m/1>; rel="memento"; datetime="Mon, 01 Apr 2013 00:00:00 GMT")");
    }
    std::optional<std::string> page(std::string_view) const override { return std::nullopt; }
  };
  auto flaky = std::make_shared<Flaky>();
  ArchiveGateway gw(flaky, nullptr, nullptr, {.retries = 1});
  auto ev = gw.gather("http://x.com/", T("2013-01-01"));
  CHECK_FALSE(ev.failed);
  CHECK(ev.archive.memento_count == 1);
  CHECK(flaky->calls == 2);
}

TEST_CASE("gateway cache round trip") {
  auto file = std::filesystem::temp_directory_path() / "lostpage_gateway_cache.jsonl";
  std::filesystem::remove(file);
  auto timemaps = std::make_shared<FixtureTimeMapProvider>(tm_dir());
  auto pop = FixturePopularityProvider::load(testsupport::desk_dir() / "popularity.tsv");
  auto dmg = FixtureDamageProvider::load(testsupport::desk_dir() / "damage.tsv");
  CandidateEvidence first;
  {
    ArchiveGateway gw(timemaps, pop, dmg, {}, std::make_shared<EvidenceCache>(file));
    first = gw.gather("http://cs.odu.edu/", T("2014-03-01"));
  }
  CHECK(std::filesystem::file_size(file) > 0);
  ArchiveGateway reloaded(timemaps, pop, dmg, {}, std::make_shared<EvidenceCache>(file));
  auto second = reloaded.gather("http://cs.odu.edu/", T("2014-03-01"));
  CHECK(second.archive == first.archive);
  CHECK(second.popularity == first.popularity);
  CHECK(second.damage == first.damage);
  CHECK(second.nearest == first.nearest);
  std::filesystem::remove(file);
}

TEST_CASE("HTTP providers against a local server") {
  httplib::Server srv;
  srv.Get(R"(/timemap/link/(.*))", [](const httplib::Request& req, httplib::Response& res) {
    std::string target = req.matches[1];
    if (target.find("missing") != std::string::npos) {
      res.status = 404;
      return;
    }
    if (target.find("broken") != std::string::npos) {
      res.status = 503;
      return;
    }
    res.set_content(R"(<http://m/1>; rel="first memento"; datetime="Mon, 01 Apr 2013 00:00:00 GMT",
<http://m/2>; rel="last memento"; datetime="Tue, 01 Apr 2014 00:00:00 GMT")",
                    "application/link-format");
  });
  srv.Get(R"(/api/damage/(.*))", [](const httplib::Request& req, httplib::Response& res) {
    std::string target = req.matches[1];
    res.set_content(target.find("unknown") != std::string::npos ? R"({"total_damage": null})"
                                                                 : R"({"total_damage": 0.25})",
                    "application/json");
  });
  int port = srv.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread t([&] { srv.listen_after_bind(); });
  srv.wait_until_ready();
  std::string base = "http://127.0.0.1:" + std::to_string(port);

  HttpTimeMapProvider tm(base, 2000ms);
  auto ev = fetch_timemap(tm, "http://example.com/");
  CHECK(ev.memento_count == 2);
  CHECK_FALSE(fetch_timemap(tm, "http://missing.example.com/").archived);
  CHECK_THROWS_AS(fetch_timemap(tm, "http://broken.example.com/"), RetryableError);

  HttpDamageProvider dp(base, 2000ms);
  auto d = fetch_damage(&dp, "http://m/1");
  CHECK(d.damage == doctest::Approx(0.25));
  CHECK(d.source == DamageSource::Provider);
  CHECK(fetch_damage(&dp, "http://unknown/1").source == DamageSource::DefaultMissing);

  srv.stop();
  t.join();

  HttpTimeMapProvider dead(base, 500ms);
  CHECK_THROWS_AS(dead.timemap("http://example.com/"), RetryableError);
}
