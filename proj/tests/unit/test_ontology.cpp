#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "lostpage/error.hpp"
#include "lostpage/ontology.hpp"
#include "lostpage/uri.hpp"
#include "test_support.hpp"

using namespace lostpage;

namespace {
const char* kVirginia = "Computers/Computer_Science/Academic_Departments/North_America/United_States/Virginia";

std::string tsv_line(const std::string& cat, const std::string& uri, const std::string& title = "",
                     const std::string& desc = "") {
  return cat + "\t" + uri + "\t" + title + "\t" + desc + "\n";
}
}  // namespace

TEST_CASE("CategoryPath basics") {
  auto p = CategoryPath::parse("A/B//C/");
  CHECK(p.depth() == 3);
  CHECK(p.str() == "A/B/C");
  CHECK(p.top_level() == "A");
  CHECK(p.prefix(2).str() == "A/B");
  CHECK(p.prefix(9) == p);
  CHECK(CategoryPath::parse("A").is_ancestor_of(p));
  CHECK_FALSE(p.is_ancestor_of(p));
  CHECK(p.common_prefix_length(CategoryPath::parse("A/B/X")) == 2);
  CHECK_THROWS_AS(CategoryPath({"a", ""}), ParseError);
  CHECK_THROWS_AS(CategoryPath({"a/b"}), ParseError);
}

TEST_CASE("ingest TSV") {
  std::stringstream in;
  in << tsv_line(kVirginia, "http://cs.odu.edu/", "Old Dominion University", "Norfolk Virginia");
  in << tsv_line("World/Deutsch/Computer", "http://example.de/");
  in << tsv_line("Computers/Software", "http://dup.example.com/");
  in << tsv_line("Computers/Software", "https://dup.example.com/");
  in << tsv_line("", "http://nocat.example.com/");
  IngestReport rep;
  auto index = ingest_dmoz(in, DmozFormat::Tsv, {}, &rep);
  CHECK(index.size() == 2);
  CHECK(rep.records == 5);
  CHECK(rep.kept == 2);
  CHECK(rep.excluded_category == 1);
  CHECK(rep.duplicates == 1);
  CHECK(rep.missing_fields == 1);
  auto entries = index.in_category(CategoryPath::parse(kVirginia));
  REQUIRE(entries.size() == 1);
  CHECK(entries[0]->uri == "http://cs.odu.edu/");
  CHECK(entries[0]->title.value_or("") == "Old Dominion University");
  CHECK(entries[0]->description.value_or("") == "Norfolk Virginia");
}

TEST_CASE("ingest RDF") {
  std::stringstream in;
  in << R"(<?xml version="1.0" encoding="UTF-8"?>
<RDF xmlns:r="http://www.w3.org/TR/RDF/" xmlns:d="http://purl.org/dc/elements/1.0/">
<ExternalPage about="http://cs.odu.edu/">
  <d:Title>Old Dominion University</d:Title>
  <d:Description>Norfolk Virginia &amp; more</d:Description>
  <topic>Top/)" << kVirginia << R"(</topic>
</ExternalPage>
<ExternalPage about="http://www.spiegel.de/">
  <d:Title>Spiegel</d:Title>
  <topic>Top/World/Deutsch/Nachrichten</topic>
</ExternalPage>
</RDF>
)";
  IngestReport rep;
  auto index = ingest_dmoz(in, DmozFormat::Rdf, {}, &rep);
  REQUIRE(index.size() == 1);
  CHECK(index.entries()[0].category.str() == kVirginia);
  CHECK(index.entries()[0].description.value_or("") == "Norfolk Virginia & more");
  CHECK(rep.excluded_category == 1);
}

TEST_CASE("truncated RDF is fatal") {
  std::stringstream in("<RDF>\n<ExternalPage about=\"http://a.com/\">\n<topic>Top/Computers</topic>\n");
  CHECK_THROWS_AS(ingest_dmoz(in, DmozFormat::Rdf), IoError);
}

TEST_CASE("save and load round trip") {
  std::stringstream in;
  in << tsv_line(kVirginia, "http://cs.odu.edu/", "ODU", "");
  in << tsv_line("Computers/Software", "http://example.com/a", "", "tools");
  auto index = ingest_dmoz(in, DmozFormat::Tsv);
  auto dir = std::filesystem::temp_directory_path() / "lostpage_ontology_test";
  std::filesystem::create_directories(dir);
  index.save(dir / "index.tsv");
  auto back = CategoryIndex::load(dir / "index.tsv");
  REQUIRE(back.size() == index.size());
  for (size_t i = 0; i < back.size(); ++i) {
    CHECK(back.entries()[i].uri == index.entries()[i].uri);
    CHECK(back.entries()[i].surt == index.entries()[i].surt);
    CHECK(back.entries()[i].category == index.entries()[i].category);
    CHECK(back.entries()[i].title == index.entries()[i].title);
    CHECK(back.entries()[i].description == index.entries()[i].description);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("under and in_category") {
  std::stringstream in;
  in << tsv_line("A/B", "http://one.com/");
  in << tsv_line("A/B/C", "http://two.com/");
  in << tsv_line("A/D", "http://three.com/");
  auto index = ingest_dmoz(in, DmozFormat::Tsv, {.excluded_top_levels = {}, .retained_top_levels = {}});
  CHECK(index.in_category(CategoryPath::parse("A/B")).size() == 1);
  CHECK(index.under(CategoryPath::parse("A/B")).size() == 2);
  CHECK(index.under(CategoryPath::parse("A")).size() == 3);
  CHECK(index.categories().size() == 3);
}

TEST_CASE("lookup against the desk fixture") {
  auto index = CategoryIndex::load(testsupport::desk_dir() / "ontology.tsv");
  auto wiki = FixtureOntologyProvider::load(testsupport::desk_dir() / "wikipedia.jsonl");

  auto hit = lookup_requested(index, wiki.get(), "http://cs.odu.edu/");
  REQUIRE(hit.hit);
  CHECK(hit.hit->source == LookupSource::PrimaryIndex);
  REQUIRE(hit.hit->categories.size() == 1);
  CHECK(hit.hit->categories[0].str() == kVirginia);
  CHECK(hit.hit->entries.size() == 10);

  auto sec = lookup_requested(index, wiki.get(), "http://odu.edu");
  REQUIRE(sec.hit);
  CHECK(sec.hit->source == LookupSource::SecondaryProvider);
  std::set<std::string> cats;
  for (const auto& c : sec.hit->categories) cats.insert(c.str());
  CHECK(cats.count("Old_Dominion_University") == 1);
  CHECK(cats.count("Universities_and_colleges_in_Virginia") == 1);

  std::stringstream empty;
  auto none = FixtureOntologyProvider::parse(empty);
  CHECK_FALSE(lookup_requested(index, none.get(), "http://unknown.example.org/").hit);
}

TEST_CASE("secondary provider failure degrades") {
  struct Broken : OntologyProvider {
    std::string name() const override { return "broken"; }
    std::optional<SecondaryHit> find_official(std::string_view) const override { throw IoError("down"); }
  } broken;
  auto index = CategoryIndex::load(testsupport::desk_dir() / "ontology.tsv");
  auto miss = lookup_requested(index, &broken, "http://unknown.example.org/");
  CHECK_FALSE(miss.hit);
  CHECK(miss.degraded);
  CHECK_FALSE(miss.warning.empty());
  auto primary = lookup_requested(index, &broken, "http://cs.odu.edu/");
  CHECK(primary.hit);
}
