#include <doctest.h>

#include <cmath>

#include "lostpage/error.hpp"
#include "lostpage/ranker.hpp"

using namespace lostpage;

namespace {
Timestamp T(const char* iso) { return *parse_iso8601(iso); }

CandidateEvidence candidate(const std::string& uri, double damage, int64_t rank = 1000, size_t count = 50) {
  CandidateEvidence c;
  c.uri = uri;
  c.archive.uri = uri;
  c.archive.archived = true;
  c.archive.mementos = {{T("2014-01-01"), "https://web.archive.org/web/20140101000000/" + uri}};
  c.archive.memento_count = count;
  c.nearest = c.archive.mementos.front();
  c.popularity.global_rank = rank;
  c.popularity.archive_count = static_cast<int64_t>(count);
  c.damage = {damage, DamageSource::Fixture};
  return c;
}

RankContext context() {
  RankContext ctx;
  ctx.requested = T("2014-03-01");
  ctx.now = T("2024-01-01");
  ctx.requested_tokens = similarity_tokens("http://odu.edu/compsci", Resources::bundled());
  return ctx;
}
}  // namespace

TEST_CASE("weights") {
  RankWeights w;
  CHECK_NOTHROW(w.validate());
  CHECK(RankWeights::parse("0.1,0.2,0.3,0.4").q == doctest::Approx(0.4));
  CHECK_THROWS_AS(RankWeights::parse("0.5,0.5,0.5,0.5"), ConfigError);
  CHECK_THROWS_AS(RankWeights::parse("1.2,-0.2,0,0"), ConfigError);
  CHECK_THROWS_AS(RankWeights::parse("0.5,0.5"), ConfigError);
  CHECK_THROWS_AS(RankWeights::parse("a,b,c,d"), ConfigError);
  CHECK(RankWeights::parse(w.str()).t == doctest::Approx(0.25));
}

TEST_CASE("temporal score") {
  TemporalInputs same{T("2014-03-01"), T("2014-03-01"), T("2024-01-01")};
  CHECK(temporal_score(same, false) == 0.0);
  CHECK(temporal_score(same, true) == 1.0);

  TemporalInputs far{T("2024-01-01"), default_earliest_datetime(), T("2024-01-01")};
  CHECK(temporal_score(far, false) == doctest::Approx(1.0));
  CHECK(temporal_score(far, true) == doctest::Approx(0.0));

  // 20-year window, 5 years apart
  TemporalInputs quarter{T("2005-01-01"), T("2000-01-01"), T("2020-01-01"), T("2000-01-01")};
  double window = static_cast<double>((T("2020-01-01") - T("2000-01-01")).count());
  double gap = static_cast<double>((T("2005-01-01") - T("2000-01-01")).count());
  CHECK(std::abs(temporal_score(quarter, false) - gap / window) < 1e-12);
  CHECK(std::abs(temporal_score(quarter, true) - (1 - gap / window)) < 1e-12);
  CHECK(std::abs(gap / window - 0.25) < 1e-3);

  TemporalInputs bad{T("2014-03-01"), T("2014-03-01"), T("1990-01-01"), T("1990-01-01")};
  CHECK_THROWS_AS(temporal_score(bad), ConfigError);
}

TEST_CASE("popularity endpoints") {
  PopularityEvidence top;
  top.global_rank = 1;
  top.archive_count = kDefaultArchiveCeiling;
  CHECK(popularity_score(top) == 1.0);

  PopularityEvidence bottom;
  bottom.global_rank = kDefaultRankFloor;
  bottom.archive_count = 1;
  CHECK(popularity_score(bottom) == 0.0);

  PopularityEvidence half = bottom;
  half.archive_count = kDefaultArchiveCeiling;
  CHECK(popularity_score(half) == doctest::Approx(0.5).epsilon(1e-12));

  PopularityEvidence nothing;
  CHECK(popularity_score(nothing) == 0.0);

  PopularityEvidence mid;
  mid.global_rank = 10'000;
  mid.archive_count = 1'000;
  double expected = (std::abs(std::log(1e4) / std::log(3e7) - 1) + std::log(1e3) / std::log(538300.0)) / 2;
  CHECK(popularity_score(mid) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("similarity and quality") {
  CHECK(uri_similarity({"odu", "compsci"}, {"odu", "math"}) == doctest::Approx(1.0 / 3.0));
  CHECK(uri_similarity({"a"}, {"a"}) == 1.0);
  CHECK(uri_similarity({"a"}, {"b"}) == 0.0);
  CHECK(uri_similarity({}, {}) == 0.0);
  for (double d : {0.0, 0.13, 0.5, 1.0}) CHECK(archival_quality({d, DamageSource::Fixture}) == doctest::Approx(1 - d));
  CHECK(similarity_tokens("https://odu.edu/compsci", Resources::bundled()) ==
        std::set<std::string>{"odu", "edu", "compsci"});
  CHECK(similarity_tokens("nonsense", Resources::bundled()).empty());
}

TEST_CASE("rank a single candidate") {
  std::vector<CandidateEvidence> one{candidate("http://cs.odu.edu/", 0.2)};
  auto out = rank(one, context(), {}, 10, Resources::bundled());
  REQUIRE(out.size() == 1);
  CHECK(out[0].score >= 0.0);
  CHECK(out[0].score <= 1.0);
  CHECK(out[0].score == doctest::Approx(0.25 * (out[0].t + out[0].p + out[0].s + out[0].q)));
  CHECK(out[0].q == doctest::Approx(0.8));
  CHECK(out[0].explanations.size() == 4);
}

TEST_CASE("less damage ranks first") {
  std::vector<CandidateEvidence> two{candidate("http://a.example.com/", 1.0), candidate("http://b.example.com/", 0.0)};
  auto out = rank(two, context(), {}, 10, Resources::bundled());
  REQUIRE(out.size() == 2);
  CHECK(out[0].uri == "http://b.example.com/");
}

TEST_CASE("ties break by URI and top_n truncates") {
  std::vector<CandidateEvidence> same{candidate("http://z.example.com/", 0.3), candidate("http://y.example.com/", 0.3),
                                      candidate("http://x.example.com/", 0.3)};
  auto out = rank(same, context(), {}, 2, Resources::bundled());
  REQUIRE(out.size() == 2);
  CHECK(out[0].uri == "http://x.example.com/");
  CHECK(out[1].uri == "http://y.example.com/");
}

TEST_CASE("rank rejects bad input") {
  std::vector<CandidateEvidence> one{candidate("http://a.com/", 0.1)};
  RankWeights bad{0.9, 0.9, 0, 0};
  CHECK_THROWS_AS(rank(one, context(), bad, 10, Resources::bundled()), ConfigError);
  CHECK_THROWS_AS(rank(one, context(), {}, 0, Resources::bundled()), ConfigError);
  one[0].archive.archived = false;
  CHECK_THROWS_AS(rank(one, context(), {}, 10, Resources::bundled()), Error);
}

TEST_CASE("single-feature weights isolate that feature") {
  std::vector<CandidateEvidence> one{candidate("http://cs.odu.edu/", 0.3)};
  auto out = rank(one, context(), {0, 0, 0, 1}, 10, Resources::bundled());
  CHECK(out[0].score == doctest::Approx(0.7));
  out = rank(one, context(), {0, 0, 1, 0}, 10, Resources::bundled());
  // "cs" is too short to be a token: {odu, edu} vs {odu, edu, compsci}
  CHECK(out[0].score == doctest::Approx(2.0 / 3.0));
}
