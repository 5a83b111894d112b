#include "lostpage/deep_classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <mutex>
#include <thread>

#include "lostpage/error.hpp"
#include "text_util.hpp"

namespace lostpage {
namespace {

constexpr std::string_view kMagic = "lostpage-vector-index";
constexpr int kFormatVersion = 1;
constexpr TokenVariants kDeepVariants{.strip_tld = true};

std::map<std::string, uint32_t> term_frequencies(const TokenBag& bag) {
  std::map<std::string, uint32_t> tf;
  for (const auto& f : bag.features) ++tf[f];
  return tf;
}

double norm_of(const std::map<std::string, uint32_t>& tf) {
  double s = 0;
  for (const auto& [_, n] : tf) s += static_cast<double>(n) * static_cast<double>(n);
  return std::sqrt(s);
}

void check_query(const TokenBag& query, GramScheme grams) {
  if (query.method != gram_method(grams)) {
    throw ConfigError("query tokenized with " + std::string(to_string(query.method)) + " but the index uses " +
                      std::string(to_string(gram_method(grams))));
  }
}

}  // namespace

std::string_view to_string(GramScheme g) { return g == GramScheme::ThreeGram ? "3" : "all"; }

GramScheme parse_gram_scheme(std::string_view name) {
  std::string n = detail::to_lower(detail::trim(name));
  std::erase(n, '-');
  if (n == "3" || n == "three" || n == "3gram" || n == "trigram") return GramScheme::ThreeGram;
  if (n == "all" || n == "allgram" || n == "allgrams") return GramScheme::AllGram;
  throw ConfigError("unknown gram scheme '" + std::string(name) + "' (expected 3 or all)");
}

TokenMethod gram_method(GramScheme g) {
  return g == GramScheme::ThreeGram ? TokenMethod::TrigramsFromTokens : TokenMethod::AllGramsFromTokens;
}

TokenBag deep_query_features(std::string_view uri, GramScheme grams, const Resources& resources) {
  return tokenize(uri, gram_method(grams), kDeepVariants, resources);
}

TokenBag deep_entry_features(const OntologyEntry& entry, GramScheme grams, const Resources& resources) {
  TokenBag bag{gram_method(grams), kDeepVariants, {}};
  try {
    bag.features = tokenize(entry.uri, bag.method, kDeepVariants, resources).features;
  } catch (const ParseError&) {
    // title and description may still carry features
  }
  for (const auto* text : {&entry.title, &entry.description}) {
    if (!*text) continue;
    auto more = tokenize_text(**text, bag.method, kDeepVariants, resources).features;
    bag.features.insert(bag.features.end(), more.begin(), more.end());
  }
  return bag;
}

double cosine_similarity(const TokenBag& a, const TokenBag& b) {
  auto ta = term_frequencies(a);
  auto tb = term_frequencies(b);
  double na = norm_of(ta), nb = norm_of(tb);
  if (na == 0 || nb == 0) return 0.0;
  double dot = 0;
  for (const auto& [f, n] : ta) {
    auto it = tb.find(f);
    if (it != tb.end()) dot += static_cast<double>(n) * static_cast<double>(it->second);
  }
  return std::min(1.0, dot / (na * nb));
}

void CategoryVectorIndex::add_vector(uint32_t category, const std::map<std::string, uint32_t>& tf) {
  auto entry = static_cast<uint32_t>(norms_[category].size());
  norms_[category].push_back(norm_of(tf));
  for (const auto& [f, n] : tf) postings_[f].push_back({category, entry, n});
}

CategoryVectorIndex CategoryVectorIndex::build(const CategoryIndex& index, GramScheme grams,
                                               const Resources& resources, unsigned threads) {
  if (index.empty()) throw ConfigError("cannot build a vector index from an empty ontology");
  CategoryVectorIndex v;
  v.grams_ = grams;

  // Featurize in parallel, then add vectors in index order so the result
  // does not depend on scheduling.
  const auto& entries = index.entries();
  std::vector<std::map<std::string, uint32_t>> tfs(entries.size());
  unsigned n_threads = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  size_t chunk = (entries.size() + n_threads - 1) / n_threads;
  std::vector<std::future<void>> jobs;
  for (size_t start = 0; start < entries.size(); start += chunk) {
    size_t end = std::min(entries.size(), start + chunk);
    jobs.push_back(std::async(std::launch::async, [&, start, end] {
      for (size_t i = start; i < end; ++i) tfs[i] = term_frequencies(deep_entry_features(entries[i], grams, resources));
    }));
  }
  for (auto& j : jobs) j.get();

  for (const auto& [key, positions] : index.by_category()) {
    auto cat = static_cast<uint32_t>(v.categories_.size());
    v.categories_.push_back(CategoryPath::parse(key));
    v.norms_.emplace_back();
    for (size_t pos : positions) {
      if (tfs[pos].empty()) {
        ++v.excluded_;
      } else {
        v.add_vector(cat, tfs[pos]);
      }
    }
  }
  return v;
}

size_t CategoryVectorIndex::total_vectors() const {
  size_t n = 0;
  for (const auto& c : norms_) n += c.size();
  return n;
}

std::vector<CandidateCategory> CategoryVectorIndex::score(const TokenBag& query,
                                                          const std::optional<std::string>& within_top_level) const {
  check_query(query, grams_);
  auto qtf = term_frequencies(query);
  double qnorm = norm_of(qtf);
  std::vector<CandidateCategory> out;
  if (qnorm == 0) return out;

  std::vector<double> acc(categories_.size(), 0.0);
  for (const auto& [f, qn] : qtf) {
    auto it = postings_.find(f);
    if (it == postings_.end()) continue;
    for (const Posting& p : it->second) {
      acc[p.category] += static_cast<double>(qn) * static_cast<double>(p.tf) / norms_[p.category][p.entry];
    }
  }
  for (size_t c = 0; c < categories_.size(); ++c) {
    if (acc[c] <= 0) continue;
    if (within_top_level && categories_[c].top_level() != *within_top_level) continue;
    double s = acc[c] / (qnorm * static_cast<double>(norms_[c].size()));
    out.push_back({categories_[c], std::clamp(s, 0.0, 1.0)});
  }
  return out;
}

void CategoryVectorIndex::save(std::ostream& out) const {
  // Rebuild per-entry vectors from the postings.
  std::vector<std::vector<std::vector<std::pair<std::string, uint32_t>>>> vectors(categories_.size());
  for (size_t c = 0; c < categories_.size(); ++c) vectors[c].resize(norms_[c].size());
  for (const auto& [f, list] : postings_) {
    for (const Posting& p : list) vectors[p.category][p.entry].emplace_back(f, p.tf);
  }
  out << kMagic << '\t' << kFormatVersion << '\n'
      << "grams\t" << to_string(grams_) << '\n'
      << "excluded\t" << excluded_ << '\n'
      << "categories\t" << categories_.size() << '\n';
  for (size_t c = 0; c < categories_.size(); ++c) {
    out << "category\t" << categories_[c].str() << '\t' << vectors[c].size() << '\n';
    for (auto& vec : vectors[c]) {
      std::sort(vec.begin(), vec.end());
      bool first = true;
      for (const auto& [f, n] : vec) {
        if (!first) out << ' ';
        out << f << ':' << n;
        first = false;
      }
      out << '\n';
    }
  }
  if (!out) throw IoError("failed to write vector index");
}

CategoryVectorIndex CategoryVectorIndex::load(std::istream& in) {
  std::string line;
  auto fields = [&](std::string_view key, size_t n) {
    if (!std::getline(in, line)) throw IoError("truncated vector index");
    auto f = detail::split_keep(line, '\t');
    if (f.size() != n || f[0] != key) throw IoError("expected '" + std::string(key) + "' line in vector index");
    return f;
  };
  auto count = [](std::string_view s) {
    try {
      return static_cast<size_t>(std::stoull(std::string(s)));
    } catch (const std::exception&) {
      throw IoError("bad count in vector index: " + std::string(s));
    }
  };
  auto header = fields(kMagic, 2);
  if (count(header[1]) != kFormatVersion) throw IoError("unsupported vector index version");
  CategoryVectorIndex v;
  v.grams_ = parse_gram_scheme(fields("grams", 2)[1]);
  v.excluded_ = count(fields("excluded", 2)[1]);
  size_t n_categories = count(fields("categories", 2)[1]);
  for (size_t c = 0; c < n_categories; ++c) {
    auto f = fields("category", 3);
    v.categories_.push_back(CategoryPath::parse(f[1]));
    v.norms_.emplace_back();
    size_t n_vectors = count(f[2]);
    for (size_t e = 0; e < n_vectors; ++e) {
      if (!std::getline(in, line)) throw IoError("truncated vector index");
      std::map<std::string, uint32_t> tf;
      for (auto item : detail::split(line, ' ')) {
        size_t colon = item.rfind(':');
        if (colon == std::string_view::npos) throw IoError("bad vector entry in index");
        tf[std::string(item.substr(0, colon))] = static_cast<uint32_t>(count(item.substr(colon + 1)));
      }
      if (tf.empty()) throw IoError("empty vector in index");
      v.add_vector(static_cast<uint32_t>(c), tf);
    }
  }
  return v;
}

void CategoryVectorIndex::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write vector index " + path);
  save(out);
}

CategoryVectorIndex CategoryVectorIndex::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open vector index " + path);
  return load(in);
}

std::vector<CandidateCategory> top_candidates(const CategoryVectorIndex& vindex, const TokenBag& query, size_t n,
                                              const std::optional<std::string>& within_top_level) {
  if (n == 0) throw ConfigError("candidate count must be at least 1");
  auto scored = vindex.score(query, within_top_level);
  std::vector<std::pair<std::string, size_t>> keys;
  keys.reserve(scored.size());
  for (size_t i = 0; i < scored.size(); ++i) keys.emplace_back(scored[i].path.str(), i);
  std::sort(keys.begin(), keys.end(), [&](const auto& a, const auto& b) {
    double sa = scored[a.second].score, sb = scored[b.second].score;
    if (sa != sb) return sa > sb;
    return a.first < b.first;
  });
  std::vector<CandidateCategory> out;
  for (size_t i = 0; i < keys.size() && i < n; ++i) out.push_back(scored[keys[i].second]);
  return out;
}

bool PrunedTree::is_candidate(const CategoryPath& p) const {
  return std::find(candidates.begin(), candidates.end(), p) != candidates.end();
}

std::vector<CategoryPath> PrunedTree::retained_ancestors() const {
  std::vector<CategoryPath> out;
  for (const auto& n : nodes) {
    if (!is_candidate(n)) out.push_back(n);
  }
  return out;
}

PrunedTree prune_tree(std::span<const CategoryPath> candidates) {
  if (candidates.empty()) throw ConfigError("prune_tree needs at least one candidate");
  PrunedTree tree;
  for (const auto& c : candidates) {
    if (c.empty()) throw ConfigError("empty candidate path");
    if (!tree.is_candidate(c)) tree.candidates.push_back(c);
  }
  for (const auto& c : tree.candidates) {
    tree.nodes.insert(c);
    // The level-1 label is the root, so sharing it does not count.
    bool shares = std::any_of(tree.candidates.begin(), tree.candidates.end(), [&](const CategoryPath& o) {
      return &o != &c && c.common_prefix_length(o) >= 2;
    });
    if (shares) continue;
    for (size_t n = 1; n < c.depth(); ++n) tree.nodes.insert(c.prefix(n));
  }
  return tree;
}

std::shared_ptr<const std::vector<TokenBag>> DeepDocumentCache::documents(const CategoryPath& path) const {
  std::string key = path.str();
  {
    std::shared_lock lock(mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  auto docs = std::make_shared<std::vector<TokenBag>>();
  for (const OntologyEntry* e : index_.in_category(path)) {
    TokenBag bag = deep_entry_features(*e, grams_, resources_);
    if (!bag.empty()) docs->push_back(std::move(bag));
  }
  std::unique_lock lock(mutex_);
  auto [it, _] = cache_.emplace(key, std::move(docs));
  return it->second;
}

DeepResult classify_deep(const PrunedTree& tree, const DeepDocumentCache& documents, const TokenBag& query,
                         double alpha) {
  if (tree.candidates.empty()) throw ConfigError("classify_deep needs a non-empty tree");
  check_query(query, documents.grams());

  DeepResult result;
  std::vector<LabeledBag> corpus;
  std::vector<CategoryPath> kept;
  for (const auto& c : tree.candidates) {
    auto docs = documents.documents(c);
    if (docs->empty()) {
      result.removed.push_back(c);
      continue;
    }
    kept.push_back(c);
    std::string label = c.str();
    for (const auto& bag : *docs) corpus.push_back({bag, label});
  }
  if (kept.empty()) throw DeepClassificationError("no candidate category has usable documents");
  if (kept.size() == 1) {
    result.path = kept.front();
    return result;
  }

  NaiveBayesModel model = NaiveBayesModel::train(corpus, alpha);
  auto cls = model.classify(query);
  if (!cls) {
    result.path = kept.front();
    result.oov_fallback = true;
    return result;
  }
  result.path = CategoryPath::parse(cls->label);
  result.ranking = std::move(cls->ranking);
  return result;
}

DeepResult classify_deep(const PrunedTree& tree, const CategoryIndex& index, const TokenBag& query,
                         GramScheme grams, const Resources& resources, double alpha) {
  DeepDocumentCache cache(index, grams, resources);
  return classify_deep(tree, cache, query, alpha);
}

bool evaluate_levels(const CategoryPath& truth, const CategoryPath& predicted, int level) {
  if (level < 1) throw ConfigError("level must be at least 1");
  auto n = static_cast<size_t>(level);
  return truth.prefix(n) == predicted.prefix(n);
}

}  // namespace lostpage
