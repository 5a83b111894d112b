#include <doctest.h>

#include <sstream>

#include "lostpage/corpus_stats.hpp"
#include "lostpage/resources.hpp"

using namespace lostpage;

namespace {
CategoryIndex index_of(const std::vector<std::pair<std::string, std::string>>& rows) {
  std::vector<OntologyEntry> entries;
  for (const auto& [cat, uri] : rows) {
    OntologyEntry e;
    e.category = CategoryPath::parse(cat);
    e.uri = uri;
    e.surt = canonicalize_surt(uri);
    entries.push_back(e);
  }
  return CategoryIndex::from_entries(entries);
}
}  // namespace

TEST_CASE("three .com roots") {
  auto rep = corpus_stats(index_of({{"A", "http://one.com/"}, {"A", "http://two.com/"}, {"B", "http://three.com/"}}));
  CHECK(rep.total == 3);
  CHECK(rep.percent(rep.tld_counts.at("com")) == doctest::Approx(100.0));
  CHECK(rep.percent(rep.depth_counts.at(0)) == doctest::Approx(100.0));
  CHECK(rep.category_counts.at("A") == 2);
}

TEST_CASE("ten entries, four at depth one") {
  std::vector<std::pair<std::string, std::string>> rows;
  for (int i = 0; i < 10; ++i) {
    rows.push_back({"A", "http://site" + std::to_string(i) + ".org/" + (i < 4 ? "page" : "")});
  }
  auto rep = corpus_stats(index_of(rows));
  CHECK(rep.percent(rep.depth_counts.at(1)) == doctest::Approx(40.0));
  CHECK(rep.percent(rep.depth_counts.at(0)) == doctest::Approx(60.0));
}

TEST_CASE("dictionary-only hosts") {
  CorpusStatsBuilder b(Resources::bundled());
  CHECK(b.add("http://baseballcards.com/"));
  CHECK(b.add("http://xqzvwk.com/"));
  CHECK(b.add("http://odu.edu/"));
  CHECK(b.add("http://63.135.118.69/"));
  CHECK_FALSE(b.add("not a uri"));
  auto rep = b.finish();
  CHECK(rep.total == 4);
  CHECK(rep.skipped == 1);
  CHECK(rep.dictionary_only == 1);
  CHECK(rep.percent(rep.dictionary_only) == doctest::Approx(25.0));
  CHECK(rep.tld_counts.at("(ip)") == 1);
}

TEST_CASE("profile") {
  const auto& res = Resources::bundled();
  auto p = profile_uri("http://radio-tunis.com/my_page/2014/", res);
  CHECK(p.delimiter_host);
  CHECK(p.delimiter_path);
  CHECK(p.depth == 2);
  CHECK(p.tld == "com");
}

TEST_CASE("empty report") {
  CorpusReport rep;
  CHECK(rep.percent(0) == 0.0);
  CHECK_FALSE(rep.to_text().empty());
}
