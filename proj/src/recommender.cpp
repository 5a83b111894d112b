#include "lostpage/recommender.hpp"

#include <cstdint>
#include <unordered_set>

#include "lostpage/error.hpp"
#include "lostpage/uri.hpp"

namespace lostpage {

std::vector<LabeledBag> l1_corpus(const CategoryIndex& index, TokenMethod method, TokenVariants variants,
                                  const Resources& resources) {
  std::vector<LabeledBag> out;
  out.reserve(index.size());
  for (const auto& e : index.entries()) {
    try {
      TokenBag bag = tokenize(e.uri, method, variants, resources);
      if (bag.empty()) continue;
      out.push_back({std::move(bag), e.category.top_level()});
    } catch (const ParseError&) {
    }
  }
  return out;
}

NaiveBayesModel train_l1(const CategoryIndex& index, const Resources& resources, double alpha, TokenMethod method,
                         TokenVariants variants) {
  auto corpus = l1_corpus(index, method, variants, resources);
  return NaiveBayesModel::train(corpus, alpha);
}

std::string_view to_string(PathTaken p) {
  switch (p) {
    case PathTaken::OntologyPrimary:
      return "ontology-primary";
    case PathTaken::OntologySecondary:
      return "ontology-secondary";
    case PathTaken::ClassifiedDeep:
      return "classified-deep";
    case PathTaken::ClassifiedShallow:
      return "classified-shallow";
    case PathTaken::Unclassifiable:
      return "unclassifiable";
  }
  return "unknown";
}

nlohmann::json RecommendationResult::to_json() const {
  nlohmann::json recs = nlohmann::json::array();
  int position = 0;
  for (const auto& r : recommendations) {
    recs.push_back({{"rank", ++position},
                    {"uri", r.uri},
                    {"memento", r.memento_uri},
                    {"memento_datetime", format_iso8601(r.memento_datetime)},
                    {"memento_count", r.memento_count},
                    {"score", r.score},
                    {"t", r.t},
                    {"p", r.p},
                    {"s", r.s},
                    {"q", r.q},
                    {"explanations", r.explanations},
                    {"warnings", r.warnings}});
  }
  return {{"uri", uri},
          {"datetime", format_iso8601(requested)},
          {"now", format_iso8601(now)},
          {"path", std::string(to_string(path))},
          {"l1_label", l1_label ? nlohmann::json(*l1_label) : nlohmann::json(nullptr)},
          {"category", category ? nlohmann::json(category->str()) : nlohmann::json(nullptr)},
          {"candidates", candidates},
          {"unarchived", unarchived},
          {"failed", failed},
          {"reason", reason.empty() ? nlohmann::json(nullptr) : nlohmann::json(reason)},
          {"recommendations", std::move(recs)},
          {"trace", trace},
          {"warnings", warnings},
          {"config", config}};
}

Recommender::Recommender(std::shared_ptr<const CategoryIndex> index, std::shared_ptr<const NaiveBayesModel> l1,
                         std::shared_ptr<const CategoryVectorIndex> vectors,
                         std::shared_ptr<const OntologyProvider> secondary,
                         std::shared_ptr<const ArchiveGateway> gateway, RecommenderOptions options,
                         const Resources& resources)
    : index_(std::move(index)),
      l1_(std::move(l1)),
      vectors_(std::move(vectors)),
      secondary_(std::move(secondary)),
      gateway_(std::move(gateway)),
      options_(options),
      resources_(resources) {
  if (!index_ || !l1_ || !vectors_ || !gateway_) throw ConfigError("recommender needs an index, model, vectors and gateway");
  if (vectors_->grams() != options_.grams) throw ConfigError("vector index grams differ from the configured grams");
  if (options_.deep_candidates == 0 || options_.max_candidates == 0) throw ConfigError("candidate limits must be positive");
  documents_ = std::make_unique<DeepDocumentCache>(*index_, options_.grams, resources_);
}

void Recommender::collect(CandidateSet& set, const std::string& request_surt,
                          const std::vector<const OntologyEntry*>& entries, size_t cap) const {
  std::unordered_set<std::string> seen{request_surt};
  for (const auto& u : set.uris) seen.insert(canonicalize_surt(u));
  size_t skipped = 0;
  for (const OntologyEntry* e : entries) {
    if (set.uris.size() >= cap) {
      ++skipped;
      continue;
    }
    if (seen.insert(e->surt.empty() ? canonicalize_surt(e->uri) : e->surt).second) set.uris.push_back(e->uri);
  }
  if (skipped) set.warnings.push_back("candidate cap " + std::to_string(cap) + " reached; " + std::to_string(skipped) +
                                      " entries not considered");
}

CandidateSet Recommender::candidates(std::string_view raw_uri) const {
  CandidateSet set;
  std::string uri = normalize_input_uri(raw_uri);
  parse_uri(uri, resources_.suffixes);
  std::string surt = canonicalize_surt(uri);

  // Step 0: ontology lookup.
  LookupOutcome lookup = lookup_requested(*index_, secondary_.get(), uri);
  if (lookup.degraded) set.warnings.push_back(lookup.warning);
  if (lookup.hit) {
    const LookupHit& hit = *lookup.hit;
    set.path = hit.source == LookupSource::PrimaryIndex ? PathTaken::OntologyPrimary : PathTaken::OntologySecondary;
    if (!hit.categories.empty()) set.category = hit.categories.front();
    std::string cats;
    for (const auto& c : hit.categories) cats += (cats.empty() ? "" : ", ") + c.str();
    set.trace.push_back(std::string(to_string(set.path)) + ": " + uri + " found in the " +
                        std::string(to_string(hit.source)) + " ontology under " + cats +
                        "; classification skipped");
    std::vector<const OntologyEntry*> entries;
    for (const auto& e : hit.entries) entries.push_back(&e);
    collect(set, surt, entries, SIZE_MAX);
    return set;
  }
  set.trace.push_back("ontology: no entry for " + uri);

  // Step 1: first-level classification.
  TokenBag l1_bag;
  try {
    l1_bag = tokenize(uri, l1_->method(), l1_->variants(), resources_);
  } catch (const ParseError&) {
  }
  auto l1 = l1_bag.empty() ? std::nullopt : l1_->classify(l1_bag);
  if (!l1) {
    set.path = PathTaken::Unclassifiable;
    set.trace.push_back("first-level: no feature of the URI is in the model vocabulary");
    return set;
  }
  set.l1_label = l1->label;
  set.trace.push_back("first-level: " + l1->label + " (posterior " + std::to_string(l1->ranking.front().posterior) +
                      ", " + std::to_string(l1->used_features) + " features)");

  // Step 2: deep classification within the first-level category.
  auto shallow = [&](const std::string& why) {
    set.path = PathTaken::ClassifiedShallow;
    set.category = CategoryPath({*set.l1_label});
    set.trace.push_back(std::string(to_string(set.path)) + ": " + why + "; using entries under " + *set.l1_label);
    collect(set, surt, index_->under(*set.category), options_.max_candidates);
  };
  TokenBag query = deep_query_features(uri, options_.grams, resources_);
  auto top = top_candidates(*vectors_, query, options_.deep_candidates, *set.l1_label);
  if (top.empty()) {
    shallow("no similar category");
    return set;
  }
  std::vector<CategoryPath> paths;
  for (const auto& c : top) paths.push_back(c.path);
  PrunedTree tree = prune_tree(paths);
  DeepResult deep;
  try {
    deep = classify_deep(tree, *documents_, query, options_.alpha);
  } catch (const DeepClassificationError& e) {
    shallow(std::string("deep classification failed (") + e.what() + ")");
    return set;
  }
  set.path = PathTaken::ClassifiedDeep;
  set.category = deep.path;
  std::string note = std::string(to_string(set.path)) + ": " + deep.path.str() + " from " +
                     std::to_string(tree.candidates.size()) + " candidate categories";
  if (deep.oov_fallback) note += " (no shared features, most similar candidate)";
  set.trace.push_back(note);
  collect(set, surt, index_->in_category(deep.path), SIZE_MAX);
  return set;
}

RecommendationResult Recommender::recommend(const RecommendationRequest& request) const {
  request.weights.validate();
  if (request.top_n == 0) throw ConfigError("top_n must be at least 1");

  RecommendationResult result;
  result.uri = normalize_input_uri(request.uri);
  result.now = request.now.value_or(now_utc());
  result.requested = request.datetime.value_or(result.now);
  result.config = request.config;

  CandidateSet set = candidates(result.uri);
  result.path = set.path;
  result.l1_label = set.l1_label;
  result.category = set.category;
  result.candidates = set.uris;
  result.trace = set.trace;
  result.warnings = set.warnings;

  if (set.path == PathTaken::Unclassifiable) {
    result.reason = "unclassifiable";
    return result;
  }
  if (set.uris.empty()) {
    result.reason = "no candidates";
    result.trace.push_back("candidates: none besides the request");
    return result;
  }

  // Step 3: keep archived candidates.
  auto evidence = gateway_->gather_all(set.uris, result.requested);
  std::vector<CandidateEvidence> archived;
  for (auto& ev : evidence) {
    if (ev.failed) {
      result.failed.push_back(ev.uri);
      result.warnings.push_back(ev.uri + ": " + ev.error);
    } else if (!ev.archive.archived || !ev.nearest) {
      result.unarchived.push_back(ev.uri);
    } else {
      archived.push_back(std::move(ev));
    }
  }
  result.trace.push_back("archive: " + std::to_string(archived.size()) + " of " + std::to_string(set.uris.size()) +
                         " candidates archived (" + std::to_string(result.failed.size()) + " failed)");
  if (archived.empty()) {
    result.reason = "no archived candidates";
    return result;
  }

  // Step 4: rank.
  RankContext ctx;
  ctx.requested_tokens = similarity_tokens(result.uri, resources_);
  ctx.requested = result.requested;
  ctx.now = result.now;
  ctx.earliest = options_.earliest;
  ctx.temporal_literal = options_.temporal_literal;
  result.recommendations = rank(archived, ctx, request.weights, request.top_n, resources_);
  std::string origin = "path=" + std::string(to_string(result.path)) +
                       (result.category ? ": category " + result.category->str() : std::string());
  for (auto& r : result.recommendations) r.explanations.insert(r.explanations.begin(), origin);
  result.trace.push_back("rank: weights " + request.weights.str() + ", returned " +
                         std::to_string(result.recommendations.size()));
  return result;
}

RecommenderOptions recommender_options(const Settings& settings) {
  RecommenderOptions o;
  o.grams = settings.grams;
  o.deep_candidates = settings.deep_candidates;
  o.max_candidates = settings.max_candidates;
  o.alpha = settings.alpha;
  o.temporal_literal = settings.temporal_literal;
  return o;
}

GatewayConfig gateway_config(const Settings& settings) {
  GatewayConfig g;
  g.max_pages = settings.max_pages;
  g.parallelism = settings.parallelism;
  g.budget = settings.budget;
  g.retries = settings.retries;
  g.limits.rank_floor = settings.rank_floor;
  g.limits.archive_count_ceiling = settings.archive_ceiling;
  return g;
}

std::shared_ptr<const CategoryIndex> load_configured_index(const Settings& settings) {
  std::filesystem::path file;
  if (settings.index) {
    file = *settings.index;
  } else if (settings.fixtures && std::filesystem::exists(*settings.fixtures / "ontology.tsv")) {
    file = *settings.fixtures / "ontology.tsv";
  } else {
    throw ConfigError("no ontology index configured (set index or fixtures)");
  }
  return std::make_shared<const CategoryIndex>(CategoryIndex::load(file));
}

std::shared_ptr<Recommender> make_recommender(const Settings& settings, const Resources& resources,
                                              std::vector<std::string>* notes) {
  auto note = [&](std::string text) {
    if (notes) notes->push_back(std::move(text));
  };
  auto fixture = [&](const char* name) -> std::optional<std::filesystem::path> {
    if (!settings.fixtures) return std::nullopt;
    auto p = *settings.fixtures / name;
    if (!std::filesystem::exists(p)) return std::nullopt;
    return p;
  };

  auto index = load_configured_index(settings);
  note("index: " + std::to_string(index->size()) + " entries");

  std::shared_ptr<const NaiveBayesModel> model;
  if (settings.model) {
    model = std::make_shared<const NaiveBayesModel>(NaiveBayesModel::load(settings.model->string()));
    note("model: loaded " + settings.model->string());
  } else {
    model = std::make_shared<const NaiveBayesModel>(train_l1(*index, resources, settings.alpha));
    note("model: trained from the index");
  }

  std::shared_ptr<const CategoryVectorIndex> vectors;
  if (settings.vector_index) {
    vectors = std::make_shared<const CategoryVectorIndex>(CategoryVectorIndex::load(settings.vector_index->string()));
    note("vectors: loaded " + settings.vector_index->string());
  } else {
    vectors = std::make_shared<const CategoryVectorIndex>(
        CategoryVectorIndex::build(*index, settings.grams, resources, settings.parallelism));
    note("vectors: built from the index");
  }

  std::shared_ptr<const OntologyProvider> secondary;
  if (auto p = settings.secondary ? settings.secondary : fixture("wikipedia.jsonl")) {
    secondary = FixtureOntologyProvider::load(*p);
    note("secondary ontology: " + p->string());
  }

  std::shared_ptr<const TimeMapProvider> timemaps;
  if (auto p = fixture("timemaps")) {
    timemaps = std::make_shared<FixtureTimeMapProvider>(*p);
  } else if (settings.aggregator) {
    timemaps = std::make_shared<HttpTimeMapProvider>(*settings.aggregator, settings.timeout);
  } else {
    throw ConfigError("no TimeMap source configured (set fixtures or aggregator)");
  }
  note("timemaps: " + timemaps->name());

  std::shared_ptr<const PopularityProvider> popularity;
  if (auto p = settings.popularity ? settings.popularity : fixture("popularity.tsv")) {
    popularity = FixturePopularityProvider::load(*p);
    note("popularity: " + p->string());
  }

  std::shared_ptr<const DamageProvider> damage;
  if (auto p = fixture("damage.tsv")) {
    damage = FixtureDamageProvider::load(*p);
  } else if (settings.damage_service) {
    damage = std::make_shared<HttpDamageProvider>(*settings.damage_service, settings.timeout);
  }
  if (damage) note("damage: " + damage->name());

  std::shared_ptr<EvidenceCache> cache;
  if (settings.cache) cache = std::make_shared<EvidenceCache>(*settings.cache, settings.cache_max_age);

  auto gateway = std::make_shared<const ArchiveGateway>(timemaps, popularity, damage, gateway_config(settings), cache);
  return std::make_shared<Recommender>(index, model, vectors, secondary, gateway, recommender_options(settings),
                                       resources);
}

}  // namespace lostpage
