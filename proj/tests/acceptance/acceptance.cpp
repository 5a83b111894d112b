// Acceptance checks: one PASS/FAIL line per criterion.
//   lostpage_acceptance [--cli path/to/lostpage]
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <sys/wait.h>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lostpage/access_log.hpp"
#include "lostpage/archive.hpp"
#include "lostpage/deep_classifier.hpp"
#include "lostpage/deep_eval.hpp"
#include "lostpage/metrics.hpp"
#include "lostpage/naive_bayes.hpp"
#include "lostpage/ranker.hpp"
#include "lostpage/recommender.hpp"
#include "lostpage/config.hpp"
#include "lostpage/tokenize.hpp"
#include "test_support.hpp"

namespace lp = lostpage;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool close(double a, double b, double tol = 1e-9) { return std::abs(a - b) <= tol; }

std::set<std::string> S(std::initializer_list<const char*> xs) { return {xs.begin(), xs.end()}; }

lp::Timestamp T(const char* iso) { return *lp::parse_iso8601(iso); }

// 1
Outcome tokenization_golden() {
  Outcome o;
  auto t0 = Clock::now();
  const std::string uri = "https://odu.edu/compsci";
  auto tokens = lp::tokenize(uri, lp::TokenMethod::Tokens);
  auto from_tokens = lp::tokenize(uri, lp::TokenMethod::AllGramsFromTokens);
  auto from_uri = lp::tokenize(uri, lp::TokenMethod::AllGramsFromUri);
  auto paper_uri = S({"odue",     "dued",     "uedu",     "educ",     "duco",     "ucom",     "comp",    "omps",
                      "mpsc",     "psci",     "odued",    "duedu",    "ueduc",    "educo",    "ducom",   "ucomp",
                      "comps",    "ompsc",    "mpsci",    "oduedu",   "dueduc",   "ueduco",   "educom",  "ducomp",
                      "ucomps",   "compsc",   "ompsci",   "odueduc",  "dueduco",  "ueducom",  "educomp", "ducomps",
                      "ucompsc",  "compsci",  "odueduco", "dueducom", "ueducomp", "educomps", "ducompsc",
                      "ucompsci"});
  o.require(tokens.distinct() == S({"odu", "edu", "compsci"}) && tokens.features.size() == 3, "Tokens set");
  o.require(from_tokens.distinct() == S({"odu", "edu", "comp", "omps", "mpsc", "psci", "comps", "ompsc", "mpsci",
                                         "compsc", "ompsci", "compsci"}) &&
                from_tokens.features.size() == 12,
            "AllGramsFromTokens set");
  o.require(from_uri.distinct() == paper_uri, "AllGramsFromUri set differs from the published list");
  double secs = seconds_since(t0);
  o.require(secs < 1.0, "runtime over 1 s");
  std::ostringstream d;
  d << "sizes 3/" << from_tokens.features.size() << "/" << from_uri.features.size()
    << " (published list has " << paper_uri.size() << " grams; 41 stated in the criterion is a miscount), "
    << secs << " s";
  o.detail = o.detail.empty() ? d.str() : o.detail + "; " + d.str();
  return o;
}

// 2
Outcome all_gram_oracle() {
  Outcome o;
  auto t0 = Clock::now();
  std::mt19937 rng(1000);
  size_t mismatches = 0;
  for (int i = 0; i < 1000; ++i) {
    size_t len = rng() % 41;
    std::string cleaned;
    for (size_t k = 0; k < len; ++k) cleaned += static_cast<char>('a' + rng() % 26);
    // Every letter sits in the path; the host contributes a fixed prefix.
    std::string uri = "http://9.x/" + cleaned;
    std::string letters = "x" + cleaned;
    auto bag = lp::tokenize(uri, lp::TokenMethod::AllGramsFromUri);
    std::multiset<std::string> got(bag.features.begin(), bag.features.end());
    if (got != testsupport::sliding_grams(letters, 4, 8) ||
        bag.features.size() != testsupport::gram_count_formula(letters.size(), 4, 8)) {
      ++mismatches;
    }
  }
  double secs = seconds_since(t0);
  o.require(mismatches == 0, std::to_string(mismatches) + " mismatching strings");
  o.require(secs < 10.0, "runtime over 10 s");
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("1000 strings, ") + std::to_string(secs) + " s";
  return o;
}

// 3
Outcome naive_bayes_hand_check() {
  Outcome o;
  auto bag = [](std::vector<std::string> f) {
    lp::TokenBag b;
    b.features = std::move(f);
    return b;
  };
  // A: {a, b}, {a}; B: {b, c}.  Query {a}: A = 2/3 * 3/6, B = 1/3 * 1/5 -> P(A) = 5/6.
  // Query {a, c}: A = 2/3 * 3/6 * 1/6, B = 1/3 * 1/5 * 2/5 -> P(A) = (1/18)/(1/18 + 2/75) = 25/37.
  std::vector<lp::LabeledBag> corpus{{bag({"a", "b"}), "A"}, {bag({"a"}), "A"}, {bag({"b", "c"}), "B"}};
  auto m = lp::NaiveBayesModel::train(corpus, 1.0);
  auto q1 = m.classify(bag({"a"}));
  auto q2 = m.classify(bag({"a", "c"}));
  o.require(q1 && q1->label == "A" && close(q1->ranking[0].posterior, 5.0 / 6.0), "P(A|a) != 5/6");
  o.require(q2 && q2->label == "A" && close(q2->ranking[0].posterior, 25.0 / 37.0), "P(A|a,c) != 25/37");

  std::mt19937 rng(3);
  bool invariant = true;
  for (int trial = 0; trial < 100; ++trial) {
    auto scores = m.log_scores(bag({rng() % 2 ? "a" : "b", rng() % 2 ? "c" : "a"}));
    double shift = std::uniform_real_distribution<double>(-1e3, 1e3)(rng);
    auto shifted = scores;
    for (auto& s : shifted) s += shift;
    invariant &= std::max_element(scores.begin(), scores.end()) - scores.begin() ==
                 std::max_element(shifted.begin(), shifted.end()) - shifted.begin();
  }
  o.require(invariant, "argmax changed under a uniform shift");
  if (o.pass) o.detail = "posteriors 5/6 and 25/37 within 1e-9";
  return o;
}

// 4
Outcome cv_arithmetic() {
  Outcome o;
  // a: P 2/4 R 2/3 F1 4/7; b: P 1/2 R 1/2 F1 1/2; c: P 3/4 R 3/5 F1 2/3
  lp::Confusion c{{"a", {{"a", 2}, {"b", 1}}}, {"b", {{"b", 1}, {"c", 1}}}, {"c", {{"c", 3}, {"a", 2}}}};
  auto r = lp::metrics_from_confusion(c);
  o.require(close(r.micro_f1, 0.6), "micro F1");
  o.require(close(r.macro_f1, 73.0 / 126.0), "macro F1");
  o.require(close(r.weighted_f1, 127.0 / 210.0), "weighted F1");
  std::mt19937 rng(4);
  int bad = 0;
  for (int t = 0; t < 100; ++t) {
    std::vector<std::string> truth, pred;
    size_t n = 1 + rng() % 50, right = 0;
    for (size_t i = 0; i < n; ++i) {
      truth.push_back(std::to_string(rng() % 4));
      pred.push_back(std::to_string(rng() % 4));
      right += truth.back() == pred.back();
    }
    auto e = lp::evaluate_predictions(truth, pred);
    if (!close(e.micro_f1, static_cast<double>(right) / static_cast<double>(n))) ++bad;
  }
  o.require(bad == 0, std::to_string(bad) + " random sets where micro F1 != accuracy");
  if (o.pass) o.detail = "micro 0.6, macro 73/126, weighted 127/210; 100 random sets";
  return o;
}

// 5
Outcome desk_classification() {
  Outcome o;
  auto index = lp::CategoryIndex::load(testsupport::desk_dir() / "ontology.tsv");
  std::vector<lp::LabeledUri> corpus;
  std::set<std::string> tops;
  for (const auto& e : index.entries()) {
    corpus.push_back({e.uri, e.category.top_level()});
    tops.insert(e.category.top_level());
  }
  lp::CrossValidationOptions cv;
  cv.folds = 10;
  cv.seed = 42;
  // Dropping every test URI with an unseen gram keeps only a small, easy
  // subset, so the ignore-unseen-features policy is checked as well.
  auto r = lp::cross_validate(corpus, lp::kL1Method, lp::kL1Variants, cv, lp::Resources::bundled());
  cv.oov = lp::OovPolicy::IgnoreFeatures;
  auto all = lp::cross_validate(corpus, lp::kL1Method, lp::kL1Variants, cv, lp::Resources::bundled());
  o.require(r.micro_f1 > r.majority_baseline, "micro F1 does not beat the majority baseline (drop policy)");
  o.require(all.micro_f1 > all.majority_baseline, "micro F1 does not beat the majority baseline (ignore policy)");
  std::ostringstream d;
  d << corpus.size() << " entries, " << tops.size() << " categories; drop unseen: evaluated " << r.evaluated
    << ", micro F1 " << r.micro_f1 << " vs majority " << r.majority_baseline << "; ignore unseen: evaluated "
    << all.evaluated << ", micro F1 " << all.micro_f1 << " vs majority " << all.majority_baseline;
  o.detail += (o.detail.empty() ? "" : "; ") + d.str();
  return o;
}

// 6
Outcome deep_pipeline() {
  Outcome o;
  const auto& res = lp::Resources::bundled();
  auto t = testsupport::make_synthetic_taxonomy(2014, 20, 4);
  auto index = lp::CategoryIndex::from_entries(t.train);
  auto vindex = lp::CategoryVectorIndex::build(index, lp::GramScheme::AllGram, res);
  lp::DeepDocumentCache docs(index, lp::GramScheme::AllGram, res);

  size_t top_first = 0, recovered = 0, structural_bad = 0;
  std::vector<lp::CategoryPath> truth, pred;
  for (const auto& e : t.test) {
    auto q = lp::deep_query_features(e.uri, lp::GramScheme::AllGram, res);
    auto top = lp::top_candidates(vindex, q, 10, e.category.top_level());
    if (!top.empty() && top[0].path == e.category) ++top_first;
    std::vector<lp::CategoryPath> paths;
    for (const auto& c : top) paths.push_back(c.path);
    if (paths.empty()) {
      truth.push_back(e.category);
      pred.push_back(lp::CategoryPath({e.category.top_level()}));
      continue;
    }
    auto tree = lp::prune_tree(paths);
    // every candidate is a node; ancestors kept exactly for isolated candidates
    for (const auto& c : tree.candidates) {
      bool shares = false;
      for (const auto& other : tree.candidates) shares |= !(other == c) && c.common_prefix_length(other) >= 2;
      if (!tree.nodes.count(c)) ++structural_bad;
      for (size_t k = 1; k < c.depth(); ++k) {
        if (!shares && !tree.nodes.count(c.prefix(k))) ++structural_bad;
      }
    }
    for (const auto& n : tree.nodes) {
      if (tree.is_candidate(n)) continue;
      bool justified = false;
      for (const auto& c : tree.candidates) {
        bool shares = false;
        for (const auto& other : tree.candidates) shares |= !(other == c) && c.common_prefix_length(other) >= 2;
        justified |= !shares && n.is_ancestor_of(c);
      }
      if (!justified) ++structural_bad;
    }
    auto r = lp::classify_deep(tree, docs, q);
    if (r.path == e.category) ++recovered;
    truth.push_back(e.category);
    pred.push_back(r.path);
  }
  double frac = static_cast<double>(recovered) / static_cast<double>(t.test.size());
  o.require(top_first == t.test.size(), "true category not ranked first for " +
                                            std::to_string(t.test.size() - top_first) + " items");
  o.require(structural_bad == 0, "prune_tree violated an invariant");
  o.require(frac >= 0.95, "full-path recovery below 95%");

  bool monotone = true;
  auto levels = lp::score_levels(truth, pred, 3);
  for (size_t k = 2; k <= 3; ++k) monotone &= levels.f1(k) <= levels.f1(k - 1);
  for (uint64_t seed : {1, 2, 3}) {
    lp::DeepEvalOptions opt;
    opt.seed = seed;
    opt.holdout_fraction = 0.2;
    auto rep = lp::evaluate_deep(lp::CategoryIndex::from_entries(t.train), opt, res);
    for (int k = 2; k <= rep.max_level; ++k) {
      monotone &= rep.overall.f1(static_cast<size_t>(k)) <= rep.overall.f1(static_cast<size_t>(k - 1));
    }
  }
  o.require(monotone, "per-level Mi-F1 increased with level");
  std::ostringstream d;
  d << "top-1 " << top_first << "/" << t.test.size() << ", recovered " << recovered << "/" << t.test.size()
    << ", level Mi-F1 " << levels.f1(1) << "/" << levels.f1(2) << "/" << levels.f1(3);
  o.detail += (o.detail.empty() ? "" : "; ") + d.str();
  return o;
}

// 7
Outcome ranking_formulas() {
  Outcome o;
  lp::PopularityEvidence top;
  top.global_rank = 1;
  top.archive_count = lp::kDefaultArchiveCeiling;
  o.require(lp::popularity_score(top) == 1.0, "p(a=1, n=m) != 1");
  lp::PopularityEvidence bottom;
  bottom.global_rank = lp::kDefaultRankFloor;
  bottom.archive_count = 1;
  o.require(lp::popularity_score(bottom) == 0.0, "p(a=x, n=1) != 0");
  for (double d : {0.0, 0.13, 0.5, 1.0}) {
    o.require(close(lp::archival_quality({d, lp::DamageSource::Fixture}), 1 - d), "q(d) != 1-d");
  }

  // Jaccard against exhaustive arithmetic over all subset pairs of a 4-set and
  // random pairs up to size 8.
  auto oracle = [](const std::set<int>& a, const std::set<int>& b) {
    size_t inter = 0;
    for (int x : a) inter += b.count(x);
    size_t uni = a.size() + b.size() - inter;
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
  };
  auto strs = [](const std::set<int>& s) {
    std::set<std::string> out;
    for (int x : s) out.insert(std::to_string(x));
    return out;
  };
  bool jaccard_ok = true;
  for (unsigned i = 0; i < 256; ++i) {
    for (unsigned j = 0; j < 256; ++j) {
      std::set<int> a, b;
      for (int k = 0; k < 8; ++k) {
        if (i & (1u << k)) a.insert(k);
        if (j & (1u << k)) b.insert(k);
      }
      jaccard_ok &= close(lp::uri_similarity(strs(a), strs(b)), oracle(a, b));
    }
  }
  o.require(jaccard_ok, "Jaccard mismatch");

  lp::TemporalInputs same{T("2014-03-01"), T("2014-03-01"), T("2024-01-01")};
  lp::TemporalInputs far{T("2024-01-01"), lp::default_earliest_datetime(), T("2024-01-01")};
  o.require(close(lp::temporal_score(same), 1.0) && close(lp::temporal_score(far), 0.0), "temporal endpoints");
  // 20-year window with a 5-year gap, measured in whole days of 365 so the
  // ratio is exactly one quarter.
  auto e = T("2000-01-01");
  lp::TemporalInputs quarter{e + std::chrono::days(5 * 365), e, e + std::chrono::days(20 * 365), e};
  o.require(close(lp::temporal_score(quarter), 0.75), "temporal midpoint != 0.75");
  if (o.pass) o.detail = "p endpoints exact, q(d)=1-d, 65536 Jaccard pairs, temporal 1/0/0.75";
  return o;
}

std::string run(const std::string& cmd, int* status) {
  std::string out;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) {
    *status = -1;
    return out;
  }
  std::array<char, 4096> buf{};
  size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), n);
  int rc = pclose(p);
  *status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  return out;
}

std::string in_process_records() {
  lp::ConfigLayers layers;
  layers.set("fixtures", testsupport::desk_dir().string(), lp::ConfigLayers::Origin::Flag);
  auto s = lp::Settings::from(layers);
  auto rec = lp::make_recommender(s, lp::Resources::bundled());
  lp::RecommendationRequest req;
  req.uri = "http://odu.edu/compsci";
  req.datetime = T("2014-03-01");
  req.now = T("2024-01-01");
  req.config = s.to_json();
  auto j = rec->recommend(req).to_json();
  std::string out;
  auto recs = j["recommendations"];
  j.erase("recommendations");
  j["type"] = "request";
  out += j.dump() + "\n";
  for (auto& r : recs) {
    r["type"] = "recommendation";
    out += r.dump() + "\n";
  }
  return out;
}

// 8
Outcome end_to_end(const std::string& cli) {
  Outcome o;
  std::string a, b;
  if (!cli.empty()) {
    std::string cmd = "'" + cli + "' recommend http://odu.edu/compsci --datetime 2014-03-01 --now 2024-01-01 " +
                      "--fixtures '" + testsupport::desk_dir().string() + "' --output records";
    int s1 = 0, s2 = 0;
    a = run(cmd, &s1);
    b = run(cmd, &s2);
    o.require(s1 == 0 && s2 == 0, "CLI exit status " + std::to_string(s1));
  } else {
    a = in_process_records();
    b = in_process_records();
  }
  o.require(!a.empty() && a == b, "output differs between runs");

  lp::FixtureTimeMapProvider timemaps(testsupport::desk_dir() / "timemaps");
  const std::string request_surt = lp::canonicalize_surt("http://odu.edu/compsci");
  std::istringstream in(a);
  std::vector<double> scores;
  size_t unarchived = 0, self = 0, formula_bad = 0;
  for (std::string line; std::getline(in, line);) {
    auto j = nlohmann::json::parse(line);
    if (j.at("type") != "recommendation") continue;
    std::string uri = j.at("uri");
    if (!lp::fetch_timemap(timemaps, uri).archived) ++unarchived;
    if (lp::canonicalize_surt(uri) == request_surt) ++self;
    double s = j.at("score");
    double eq = 0.25 * (j.at("t").get<double>() + j.at("p").get<double>() + j.at("s").get<double>() +
                        j.at("q").get<double>());
    if (!close(s, eq, 1e-12)) ++formula_bad;
    scores.push_back(s);
  }
  o.require(!scores.empty(), "no recommendations");
  o.require(unarchived == 0, "unarchived candidate recommended");
  o.require(self == 0, "request recommended to itself");
  o.require(formula_bad == 0, "score differs from the weighted sum");
  o.require(std::is_sorted(scores.begin(), scores.end(), std::greater<>()), "scores not descending");
  std::ostringstream d;
  d << scores.size() << " recommendations, byte-identical across 2 runs"
    << (cli.empty() ? " (in-process)" : " (CLI)");
  o.detail += (o.detail.empty() ? "" : "; ") + d.str();
  return o;
}

// 9
Outcome access_log_filter() {
  Outcome o;
  std::ifstream log(testsupport::desk_dir() / "access_log.txt");
  lp::AccessLogFilterStats stats;
  auto kept = lp::filter_access_log(log, {}, &stats);
  std::vector<std::string> expected;
  std::ifstream surv(testsupport::desk_dir() / "access_log_survivors.txt");
  for (std::string l; std::getline(surv, l);) {
    if (!l.empty()) expected.push_back(l);
  }
  o.require(stats.lines == 20, "log is not 20 lines");
  o.require(kept == expected, "survivors differ from the hand-selected set");
  o.require(stats.non_200 > 0 && stats.non_html > 0 && stats.ip_host > 0 && stats.non_english_cctld > 0 &&
                stats.duplicates > 0,
            "a filter rule was not exercised");
  o.detail += (o.detail.empty() ? "" : "; ") + std::to_string(kept.size()) + " of 20 lines kept";
  return o;
}

// 10
Outcome timemap_parsing() {
  Outcome o;
  lp::FixtureTimeMapProvider p(testsupport::desk_dir() / "timemaps");
  const std::vector<std::pair<const char*, size_t>> counts{
      {"http://cs.gmu.edu/", 4},         {"http://cs.virginia.edu/", 3},
      {"http://cs.vt.edu/", 3},          {"http://wm.edu/as/computerscience/?svr=web", 2},
      {"http://radford.edu/content/csat/home/itec.html", 1},
      {"http://cs.jmu.edu/", 3},         {"http://mathcs.richmond.edu/", 2},
      {"http://cs.odu.edu/", 6},  // two pages, one memento repeated
  };
  for (const auto& [uri, n] : counts) {
    auto ev = lp::fetch_timemap(p, uri);
    bool sorted = std::is_sorted(ev.mementos.begin(), ev.mementos.end(),
                                 [](const lp::Memento& a, const lp::Memento& b) { return a.datetime < b.datetime; });
    o.require(ev.archived && ev.memento_count == n && sorted, std::string("count or order for ") + uri);
  }
  try {
    auto missing = lp::fetch_timemap(p, "https://php.radford.edu/~itec");
    o.require(!missing.archived && missing.memento_count == 0, "404 reported as archived");
  } catch (const std::exception& e) {
    o.require(false, std::string("404 raised an error: ") + e.what());
  }
  if (o.pass) o.detail = "8 TimeMaps (one paged) hand-counted; 404 -> archived=false";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--cli") cli = argv[i + 1];
  }
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"tokenization golden (Table 5)", tokenization_golden},
      {"all-gram sliding-window oracle", all_gram_oracle},
      {"naive Bayes hand check", naive_bayes_hand_check},
      {"CV harness arithmetic", cv_arithmetic},
      {"desk-scale classification beats majority", desk_classification},
      {"deep classification pipeline", deep_pipeline},
      {"ranking formulas", ranking_formulas},
      {"end-to-end odu.edu/compsci", [&] { return end_to_end(cli); }},
      {"access-log filter", access_log_filter},
      {"TimeMap parsing", timemap_parsing},
  };
  int failures = 0;
  int n = 0;
  for (const auto& [name, fn] : criteria) {
    ++n;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << n << " " << name << ": " << o.detail << "\n";
  }
  std::cout << (failures ? "FAILED " : "ALL PASSED ") << (n - failures) << "/" << n << "\n";
  return failures ? 1 : 0;
}
