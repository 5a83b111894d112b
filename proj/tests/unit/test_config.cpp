#include <doctest.h>

#include <cstdlib>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lostpage/config.hpp"
#include "lostpage/error.hpp"

using namespace lostpage;
using Origin = ConfigLayers::Origin;

TEST_CASE("defaults") {
  ConfigLayers layers;
  auto s = Settings::from(layers);
  CHECK(s.top == 10);
  CHECK(s.deep_candidates == 10);
  CHECK(s.max_candidates == 200);
  CHECK(s.parallelism == 4);
  CHECK(s.grams == GramScheme::AllGram);
  CHECK(s.rank_floor == kDefaultRankFloor);
  CHECK(s.archive_ceiling == kDefaultArchiveCeiling);
  CHECK(s.weights.t == doctest::Approx(0.25));
  CHECK(s.output == OutputFormat::Table);
  CHECK_FALSE(s.fixtures);
  CHECK(layers.origin("top") == Origin::Default);
  CHECK(layers.get("top") == "10");
  CHECK_FALSE(layers.get("index"));
}

TEST_CASE("flags beat file beats env beats defaults") {
  ::setenv("LOSTPAGE_TOP", "3", 1);
  ::setenv("LOSTPAGE_PARALLELISM", "2", 1);
  ::setenv("LOSTPAGE_RETRIES", "5", 1);
  ConfigLayers layers;
  layers.read_env();
  std::istringstream file("# comment\n\ntop = 4\nmax-pages = 9\nretries=0\n");
  layers.read_file(file);
  layers.set("top", "6", Origin::Flag);
  // a later lower-precedence layer does not override
  layers.set("top", "99", Origin::Env);

  auto s = Settings::from(layers);
  CHECK(s.top == 6);
  CHECK(layers.origin("top") == Origin::Flag);
  CHECK(s.max_pages == 9);
  CHECK(layers.origin("max_pages") == Origin::File);
  CHECK(s.retries == 0);
  CHECK(s.parallelism == 2);
  CHECK(layers.origin("parallelism") == Origin::Env);
  CHECK(s.deep_candidates == 10);
  ::unsetenv("LOSTPAGE_TOP");
  ::unsetenv("LOSTPAGE_PARALLELISM");
  ::unsetenv("LOSTPAGE_RETRIES");
}

TEST_CASE("config file errors name the line") {
  ConfigLayers layers;
  std::istringstream unknown("top = 3\nbogus = 1\n");
  try {
    layers.read_file(unknown, "my.conf");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("my.conf:2") != std::string::npos);
  }
  std::istringstream no_eq("top 3\n");
  CHECK_THROWS_AS(layers.read_file(no_eq), ConfigError);
  CHECK_THROWS_AS(layers.read_file(std::filesystem::path("/no/such/lostpage.conf")), IoError);
}

TEST_CASE("validation") {
  auto bad = [](const char* key, const char* value) {
    ConfigLayers l;
    l.set(key, value, Origin::Flag);
    CAPTURE(key);
    CAPTURE(value);
    CHECK_THROWS_AS(Settings::from(l), ConfigError);
  };
  bad("weights", "0.5,0.5,0.5,0.5");
  bad("top", "0");
  bad("top", "ten");
  bad("grams", "5");
  bad("output", "xml");
  bad("parallelism", "0");
  bad("alpha", "0");
  bad("temporal_literal", "maybe");
  bad("timeout_ms", "-1");
  CHECK(is_config_key("deep_candidates"));
  CHECK_FALSE(is_config_key("uri"));
}

TEST_CASE("typed values and JSON snapshot") {
  ConfigLayers l;
  l.set("weights", "0.4,0.2,0.2,0.2", Origin::Flag);
  l.set("grams", "3", Origin::Flag);
  l.set("output", "records", Origin::Flag);
  l.set("temporal_literal", "true", Origin::Flag);
  l.set("fixtures", "/tmp/x", Origin::Flag);
  auto s = Settings::from(l);
  CHECK(s.weights.t == doctest::Approx(0.4));
  CHECK(s.grams == GramScheme::ThreeGram);
  CHECK(s.output == OutputFormat::Records);
  CHECK(s.temporal_literal);
  CHECK(s.fixtures == std::filesystem::path("/tmp/x"));
  auto j = s.to_json();
  CHECK(j.at("top") == 10);
  CHECK(j.contains("weights"));
}

TEST_CASE("every key has a default entry and help") {
  for (const auto& k : config_keys()) {
    CAPTURE(k.name);
    CHECK_FALSE(k.help.empty());
    CHECK(is_config_key(k.name));
  }
}
