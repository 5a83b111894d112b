#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace lostpage {

/// truth label -> predicted label -> count
using Confusion = std::map<std::string, std::map<std::string, size_t>>;

struct ClassMetrics {
  std::string label;
  size_t support = 0;  // true instances
  size_t tp = 0;
  size_t fp = 0;
  size_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct FoldReport {
  int fold = 0;
  size_t train_size = 0;
  size_t test_size = 0;
  size_t dropped = 0;  // unseen features or unclassifiable
  size_t evaluated = 0;
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
  bool skipped = false;  // nothing left to evaluate
};

/// Single-label multiclass metrics. Rates with a zero denominator are 0.
/// Macro averages run over every label seen as truth or prediction;
/// weighted F1 weights per-class F1 by support.
struct EvalReport {
  std::vector<ClassMetrics> per_class;  // sorted by label
  size_t evaluated = 0;
  double accuracy = 0.0;
  double micro_precision = 0.0;
  double micro_recall = 0.0;
  double micro_f1 = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  double weighted_f1 = 0.0;
  Confusion confusion;

  // cross-validation bookkeeping
  std::vector<FoldReport> folds;
  size_t dropped = 0;
  size_t unparseable = 0;
  size_t skipped_folds = 0;
  /// Accuracy of always predicting the training folds' majority class.
  double majority_baseline = 0.0;

  nlohmann::json to_json() const;
  std::string to_text() const;
};

EvalReport metrics_from_confusion(const Confusion& confusion);
/// Throws ConfigError when the spans differ in length.
EvalReport evaluate_predictions(std::span<const std::string> truth, std::span<const std::string> predicted);

}  // namespace lostpage
