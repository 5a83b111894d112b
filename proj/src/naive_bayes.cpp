#include "lostpage/naive_bayes.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <future>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <thread>

#include "lostpage/error.hpp"
#include "text_util.hpp"

namespace lostpage {
namespace {

constexpr std::string_view kMagic = "lostpage-naive-bayes";
constexpr int kFormatVersion = 1;

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

double parse_double(std::string_view s) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw IoError("bad number in model: " + std::string(s));
  return v;
}

uint64_t parse_count(std::string_view s) {
  uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw IoError("bad count in model: " + std::string(s));
  return v;
}

double log_sum_exp(const std::vector<double>& xs) {
  double m = *std::max_element(xs.begin(), xs.end());
  double s = 0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace

NaiveBayesModel NaiveBayesModel::train(std::span<const LabeledBag> corpus, double alpha,
                                       std::span<const std::string> declared_classes) {
  if (corpus.empty()) throw TrainingError("empty training corpus");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw TrainingError("smoothing must be positive");

  NaiveBayesModel m;
  m.alpha_ = alpha;
  m.method_ = corpus.front().bag.method;
  m.variants_ = corpus.front().bag.variants;

  std::set<std::string> labels(declared_classes.begin(), declared_classes.end());
  const bool declared = !declared_classes.empty();
  for (const auto& doc : corpus) {
    if (doc.bag.method != m.method_ || doc.bag.variants != m.variants_) {
      throw TrainingError("training bags mix tokenization settings");
    }
    if (doc.label.empty()) throw TrainingError("document without a label");
    if (declared && !labels.count(doc.label)) throw TrainingError("label '" + doc.label + "' is not a declared class");
    labels.insert(doc.label);
  }
  m.classes_.assign(labels.begin(), labels.end());
  const size_t k = m.classes_.size();
  m.doc_counts_.assign(k, 0);
  m.totals_.assign(k, 0);

  std::map<std::string, uint32_t> index;
  for (uint32_t i = 0; i < k; ++i) index[m.classes_[i]] = i;

  for (const auto& doc : corpus) {
    uint32_t c = index.at(doc.label);
    ++m.doc_counts_[c];
    for (const auto& f : doc.bag.features) {
      auto& row = m.counts_[f];
      auto it = std::lower_bound(row.begin(), row.end(), c,
                                 [](const auto& p, uint32_t cls) { return p.first < cls; });
      if (it != row.end() && it->first == c) {
        ++it->second;
      } else {
        row.insert(it, {c, 1});
      }
      ++m.totals_[c];
    }
  }
  for (size_t c = 0; c < k; ++c) {
    if (m.doc_counts_[c] == 0) throw TrainingError("class '" + m.classes_[c] + "' has no documents");
  }
  m.finalize();
  return m;
}

void NaiveBayesModel::finalize() {
  const size_t k = classes_.size();
  uint64_t docs = std::accumulate(doc_counts_.begin(), doc_counts_.end(), uint64_t{0});
  log_prior_.resize(k);
  log_denominator_.resize(k);
  const double v = static_cast<double>(counts_.size());
  for (size_t c = 0; c < k; ++c) {
    log_prior_[c] = std::log(static_cast<double>(doc_counts_[c])) - std::log(static_cast<double>(docs));
    log_denominator_[c] = std::log(static_cast<double>(totals_[c]) + alpha_ * v);
  }
}

bool NaiveBayesModel::in_vocabulary(std::string_view feature) const {
  return counts_.count(std::string(feature)) > 0;
}

std::vector<std::string> NaiveBayesModel::vocabulary() const {
  std::vector<std::string> out;
  out.reserve(counts_.size());
  for (const auto& [f, _] : counts_) out.push_back(f);
  std::sort(out.begin(), out.end());
  return out;
}

double NaiveBayesModel::feature_log_likelihood(size_t cls, std::string_view feature) const {
  auto it = counts_.find(std::string(feature));
  if (it == counts_.end()) throw ConfigError("feature '" + std::string(feature) + "' is not in the vocabulary");
  uint64_t n = 0;
  for (const auto& [c, count] : it->second) {
    if (c == cls) n = count;
  }
  return std::log(static_cast<double>(n) + alpha_) - log_denominator_.at(cls);
}

std::vector<double> NaiveBayesModel::log_scores(const TokenBag& bag, size_t* used) const {
  const size_t k = classes_.size();
  std::vector<double> scores(log_prior_);
  const double log_alpha = std::log(alpha_);
  size_t seen = 0;
  for (const auto& f : bag.features) {
    auto it = counts_.find(f);
    if (it == counts_.end()) continue;
    ++seen;
    for (size_t c = 0; c < k; ++c) scores[c] += log_alpha - log_denominator_[c];
    for (const auto& [c, count] : it->second) {
      scores[c] += std::log(static_cast<double>(count) + alpha_) - log_alpha;
    }
  }
  if (used) *used = seen;
  return scores;
}

std::optional<Classification> NaiveBayesModel::classify(const TokenBag& bag) const {
  if (bag.method != method_ || bag.variants != variants_) {
    throw ConfigError("bag tokenized with " + std::string(to_string(bag.method)) + "/" + to_string(bag.variants) +
                      " but model expects " + std::string(to_string(method_)) + "/" + to_string(variants_));
  }
  size_t used = 0;
  std::vector<double> scores = log_scores(bag, &used);
  if (used == 0) return std::nullopt;

  const double norm = log_sum_exp(scores);
  std::vector<size_t> order(classes_.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return scores[a] > scores[b]; });

  Classification out;
  out.used_features = used;
  for (size_t c : order) out.ranking.push_back({classes_[c], std::exp(scores[c] - norm), scores[c]});
  out.label = out.ranking.front().label;
  return out;
}

void NaiveBayesModel::save(std::ostream& out) const {
  out << kMagic << '\t' << kFormatVersion << '\n'
      << "method\t" << to_string(method_) << '\n'
      << "variants\t" << to_string(variants_) << '\n'
      << "alpha\t" << format_double(alpha_) << '\n'
      << "classes\t" << classes_.size() << '\n';

  std::vector<std::string> vocab = vocabulary();
  for (size_t c = 0; c < classes_.size(); ++c) {
    std::vector<std::pair<const std::string*, uint64_t>> rows;
    for (const auto& f : vocab) {
      for (const auto& [cls, count] : counts_.at(f)) {
        if (cls == c) rows.emplace_back(&f, count);
      }
    }
    out << "class\t" << classes_[c] << '\t' << doc_counts_[c] << '\t' << rows.size() << '\n';
    for (const auto& [f, count] : rows) out << *f << ':' << count << '\n';
  }
  out << "vocabulary\t" << vocab.size() << '\n';
  if (!out) throw IoError("failed to write model");
}

NaiveBayesModel NaiveBayesModel::load(std::istream& in) {
  auto next = [&](std::string& line) {
    if (!std::getline(in, line)) throw IoError("truncated model file");
    return detail::split_keep(line, '\t');
  };
  std::string line;
  auto header = next(line);
  if (header.size() != 2 || header[0] != kMagic) throw IoError("not a lostpage model file");
  if (parse_count(header[1]) != kFormatVersion) throw IoError("unsupported model version " + std::string(header[1]));

  NaiveBayesModel m;
  auto field = [&](std::string_view key) {
    auto f = next(line);
    if (f.size() != 2 || f[0] != key) throw IoError("expected '" + std::string(key) + "' line in model");
    return std::string(f[1]);
  };
  m.method_ = parse_token_method(field("method"));
  m.variants_ = parse_token_variants(field("variants"));
  m.alpha_ = parse_double(field("alpha"));
  size_t k = parse_count(field("classes"));
  m.classes_.resize(k);
  m.doc_counts_.assign(k, 0);
  m.totals_.assign(k, 0);
  for (uint32_t c = 0; c < k; ++c) {
    auto f = next(line);
    if (f.size() != 4 || f[0] != "class") throw IoError("expected class line in model");
    m.classes_[c] = std::string(f[1]);
    m.doc_counts_[c] = parse_count(f[2]);
    size_t rows = parse_count(f[3]);
    for (size_t i = 0; i < rows; ++i) {
      if (!std::getline(in, line)) throw IoError("truncated model file");
      size_t colon = line.rfind(':');
      if (colon == std::string::npos || colon == 0) throw IoError("bad feature line in model");
      uint64_t count = parse_count(std::string_view(line).substr(colon + 1));
      m.counts_[line.substr(0, colon)].emplace_back(c, count);
      m.totals_[c] += count;
    }
  }
  size_t vocab = parse_count(field("vocabulary"));
  if (vocab != m.counts_.size()) throw IoError("model vocabulary size mismatch");
  if (!std::is_sorted(m.classes_.begin(), m.classes_.end())) throw IoError("model classes are not sorted");
  m.finalize();
  return m;
}

void NaiveBayesModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write model " + path);
  save(out);
}

NaiveBayesModel NaiveBayesModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model " + path);
  return load(in);
}

namespace {

struct FoldResult {
  FoldReport report;
  Confusion confusion;
  size_t baseline_correct = 0;
};

FoldResult run_fold(std::span<const LabeledBag> corpus, const std::vector<size_t>& order, int fold,
                    const CrossValidationOptions& options) {
  FoldResult r;
  r.report.fold = fold;
  std::vector<LabeledBag> train;
  std::vector<const LabeledBag*> test;
  for (size_t i = 0; i < order.size(); ++i) {
    if (static_cast<int>(i % static_cast<size_t>(options.folds)) == fold) {
      test.push_back(&corpus[order[i]]);
    } else {
      train.push_back(corpus[order[i]]);
    }
  }
  r.report.train_size = train.size();
  r.report.test_size = test.size();

  NaiveBayesModel model = NaiveBayesModel::train(train, options.alpha);

  std::map<std::string, size_t> label_counts;
  for (const auto& d : train) ++label_counts[d.label];
  std::string majority;
  size_t best = 0;
  for (const auto& [label, n] : label_counts) {
    if (n > best) {
      best = n;
      majority = label;
    }
  }

  for (const LabeledBag* item : test) {
    if (options.oov == OovPolicy::DropTestItem &&
        std::any_of(item->bag.features.begin(), item->bag.features.end(),
                    [&](const std::string& f) { return !model.in_vocabulary(f); })) {
      ++r.report.dropped;
      continue;
    }
    auto result = model.classify(item->bag);
    if (!result) {
      ++r.report.dropped;
      continue;
    }
    ++r.confusion[item->label][result->label];
    if (item->label == majority) ++r.baseline_correct;
    ++r.report.evaluated;
  }
  if (r.report.evaluated == 0) {
    r.report.skipped = true;
  } else {
    EvalReport fold_metrics = metrics_from_confusion(r.confusion);
    r.report.micro_f1 = fold_metrics.micro_f1;
    r.report.macro_f1 = fold_metrics.macro_f1;
  }
  return r;
}

}  // namespace

EvalReport cross_validate(std::span<const LabeledBag> corpus, const CrossValidationOptions& options) {
  if (options.folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
  if (corpus.size() < static_cast<size_t>(options.folds)) {
    throw ConfigError("corpus has fewer items than folds");
  }
  std::vector<size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(options.seed);
  for (size_t i = order.size() - 1; i > 0; --i) {
    std::uniform_int_distribution<size_t> pick(0, i);
    std::swap(order[i], order[pick(rng)]);
  }

  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  std::vector<FoldResult> results(static_cast<size_t>(options.folds));
  for (int start = 0; start < options.folds; start += static_cast<int>(threads)) {
    std::vector<std::future<FoldResult>> batch;
    for (int f = start; f < std::min(options.folds, start + static_cast<int>(threads)); ++f) {
      batch.push_back(std::async(std::launch::async, run_fold, corpus, std::cref(order), f, std::cref(options)));
    }
    for (size_t i = 0; i < batch.size(); ++i) results[static_cast<size_t>(start) + i] = batch[i].get();
  }

  Confusion pooled;
  size_t baseline = 0;
  std::vector<FoldReport> folds;
  size_t dropped = 0, skipped = 0;
  for (auto& r : results) {
    for (const auto& [t, row] : r.confusion) {
      for (const auto& [p, n] : row) pooled[t][p] += n;
    }
    baseline += r.baseline_correct;
    dropped += r.report.dropped;
    skipped += r.report.skipped;
    folds.push_back(r.report);
  }
  EvalReport report = metrics_from_confusion(pooled);
  report.folds = std::move(folds);
  report.dropped = dropped;
  report.skipped_folds = skipped;
  report.majority_baseline =
      report.evaluated == 0 ? 0.0 : static_cast<double>(baseline) / static_cast<double>(report.evaluated);
  return report;
}

EvalReport cross_validate(std::span<const LabeledUri> corpus, TokenMethod method, TokenVariants variants,
                          const CrossValidationOptions& options, const Resources& resources) {
  std::vector<LabeledBag> bags;
  bags.reserve(corpus.size());
  size_t unparseable = 0;
  for (const auto& item : corpus) {
    try {
      bags.push_back({tokenize(item.uri, method, variants, resources), item.label});
    } catch (const ParseError&) {
      ++unparseable;
    }
  }
  EvalReport report = cross_validate(std::span<const LabeledBag>(bags), options);
  report.unparseable = unparseable;
  return report;
}

}  // namespace lostpage
