#include <doctest.h>

#include "lostpage/error.hpp"
#include "lostpage/uri.hpp"

using namespace lostpage;

TEST_CASE("parse_uri splits components") {
  auto p = parse_uri("HTTP://Www.BBC.co.uk:8080/News/Index.html?b=2&a=1#frag");
  CHECK(p.scheme == "http");
  CHECK(p.host == "www.bbc.co.uk");
  CHECK(p.port == 8080);
  CHECK(p.path == "/News/Index.html");
  CHECK(p.query.value_or("") == "b=2&a=1");
  CHECK(p.public_suffix == "co.uk");
  CHECK(p.registered_domain == "bbc.co.uk");
  CHECK(p.tld == "uk");
  CHECK_FALSE(p.is_ip());
}

TEST_CASE("parse_uri rejects malformed input and names the component") {
  for (const char* bad : {"ftp://example.com/", "http://", "example.com", "http://exa mple.com/", "http://host:99999/"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_uri(bad), ParseError);
  }
  try {
    parse_uri("gopher://example.com/");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.component() == "scheme");
  }
}

TEST_CASE("IP hosts") {
  auto p = parse_uri("http://63.135.118.69/page");
  CHECK(p.is_ip());
  CHECK(p.tld.empty());
  CHECK(is_ipv4("10.0.0.1"));
  CHECK_FALSE(is_ipv4("10.0.0.256"));
  CHECK_FALSE(is_ipv4("10.0.0"));
}

TEST_CASE("normalize_input_uri adds a scheme") {
  CHECK(normalize_input_uri("odu.edu/compsci") == "http://odu.edu/compsci");
  CHECK(normalize_input_uri("https://odu.edu/") == "https://odu.edu/");
}

TEST_CASE("SURT examples") {
  CHECK(canonicalize_surt("http://cs.odu.edu/") == "edu,odu,cs)/");
  CHECK(canonicalize_surt("HTTP://Example.COM/A") == "com,example)/a");
  CHECK(canonicalize_surt("http://odu.edu/") == canonicalize_surt("https://odu.edu/"));
  CHECK(canonicalize_surt("http://www.odu.edu/") == canonicalize_surt("http://odu.edu/"));
  CHECK(canonicalize_surt("http://odu.edu:80/") == canonicalize_surt("http://odu.edu/"));
  CHECK(canonicalize_surt("http://x.com/?b=2&a=1") == canonicalize_surt("http://x.com/?a=1&b=2"));
}

TEST_CASE("surt_to_uri inverts canonicalize_surt") {
  for (const char* u : {"http://cs.odu.edu/", "http://example.com/a/b?x=1", "https://www.bbc.co.uk/news"}) {
    std::string s = canonicalize_surt(u);
    CHECK(canonicalize_surt(surt_to_uri(s)) == s);
  }
}

TEST_CASE("depth") {
  CHECK(depth("http://example.com/") == 0);
  CHECK(depth("http://example.com") == 0);
  CHECK(depth("http://example.com/index.html") == 0);
  CHECK(depth("http://example.com/home.html") == 0);
  CHECK(depth("http://example.com/a/b/c") == 3);
  CHECK(depth("http://example.com/a//b/") == 2);
  CHECK(depth("http://example.com/a/index.html") == 1);
}

TEST_CASE("pattern detection examples") {
  CHECK(detect_patterns("http://radiotunis.com").in_host(UriPattern::LongStrings));
  CHECK(detect_patterns("http://911.com").in_host(UriPattern::Numbers));
  CHECK(detect_patterns("http://63.135.118.69/").in_host(UriPattern::IpAddress));
  CHECK(detect_patterns("http://elmundo-eldia.com/1999/08/29/opinion/1001023218.html").in_path(UriPattern::Date));
  auto plain = detect_patterns("http://odu.edu/");
  for (int i = 0; i < kUriPatternCount; ++i) {
    CHECK_FALSE(plain.in_host(static_cast<UriPattern>(i)));
    CHECK_FALSE(plain.in_path(static_cast<UriPattern>(i)));
  }
  CHECK(detect_patterns("http://x.com/?q=1").in_path(UriPattern::Query));
  CHECK(detect_patterns("http://x.com:8080/").in_host(UriPattern::Port));
  CHECK(detect_patterns("http://x.com/a%20b").in_path(UriPattern::PercentEncoding));
  CHECK(detect_patterns("http://x.com/MyPage").in_path(UriPattern::CaseChange));
  CHECK(detect_patterns("http://x.com/hello-there-world").in_path(UriPattern::LongSlugs));
}
