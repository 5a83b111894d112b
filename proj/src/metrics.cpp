#include "lostpage/metrics.hpp"

#include <cstdio>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lostpage/error.hpp"

namespace lostpage {
namespace {

double ratio(size_t num, size_t den) { return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den); }

double f1_of(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

std::string fixed(double v, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

EvalReport metrics_from_confusion(const Confusion& confusion) {
  EvalReport r;
  r.confusion = confusion;
  std::set<std::string> labels;
  std::map<std::string, ClassMetrics> m;
  size_t correct = 0;
  for (const auto& [truth, row] : confusion) {
    for (const auto& [pred, n] : row) {
      if (n == 0) continue;
      labels.insert(truth);
      labels.insert(pred);
      r.evaluated += n;
      m[truth].support += n;
      if (truth == pred) {
        m[truth].tp += n;
        correct += n;
      } else {
        m[truth].fn += n;
        m[pred].fp += n;
      }
    }
  }
  size_t tp = 0, fp = 0, fn = 0;
  double sum_p = 0, sum_r = 0, sum_f = 0, weighted = 0;
  for (const auto& label : labels) {
    ClassMetrics c = m[label];
    c.label = label;
    c.precision = ratio(c.tp, c.tp + c.fp);
    c.recall = ratio(c.tp, c.tp + c.fn);
    c.f1 = f1_of(c.precision, c.recall);
    tp += c.tp;
    fp += c.fp;
    fn += c.fn;
    sum_p += c.precision;
    sum_r += c.recall;
    sum_f += c.f1;
    weighted += c.f1 * static_cast<double>(c.support);
    r.per_class.push_back(c);
  }
  r.accuracy = ratio(correct, r.evaluated);
  r.micro_precision = ratio(tp, tp + fp);
  r.micro_recall = ratio(tp, tp + fn);
  r.micro_f1 = f1_of(r.micro_precision, r.micro_recall);
  if (!labels.empty()) {
    double k = static_cast<double>(labels.size());
    r.macro_precision = sum_p / k;
    r.macro_recall = sum_r / k;
    r.macro_f1 = sum_f / k;
  }
  r.weighted_f1 = r.evaluated == 0 ? 0.0 : weighted / static_cast<double>(r.evaluated);
  return r;
}

EvalReport evaluate_predictions(std::span<const std::string> truth, std::span<const std::string> predicted) {
  if (truth.size() != predicted.size()) throw ConfigError("truth and prediction lists differ in length");
  Confusion c;
  for (size_t i = 0; i < truth.size(); ++i) ++c[truth[i]][predicted[i]];
  return metrics_from_confusion(c);
}

nlohmann::json EvalReport::to_json() const {
  using nlohmann::json;
  json classes = json::array();
  for (const auto& c : per_class) {
    classes.push_back({{"label", c.label},
                       {"support", c.support},
                       {"precision", c.precision},
                       {"recall", c.recall},
                       {"f1", c.f1}});
  }
  json folds_json = json::array();
  for (const auto& f : folds) {
    folds_json.push_back({{"fold", f.fold},
                          {"train", f.train_size},
                          {"test", f.test_size},
                          {"dropped", f.dropped},
                          {"evaluated", f.evaluated},
                          {"micro_f1", f.micro_f1},
                          {"macro_f1", f.macro_f1},
                          {"skipped", f.skipped}});
  }
  json conf = json::object();
  for (const auto& [t, row] : confusion) {
    for (const auto& [p, n] : row) conf[t][p] = n;
  }
  return json{{"evaluated", evaluated},
              {"accuracy", accuracy},
              {"weighted_f1", weighted_f1},
              {"micro_precision", micro_precision},
              {"micro_recall", micro_recall},
              {"micro_f1", micro_f1},
              {"macro_precision", macro_precision},
              {"macro_recall", macro_recall},
              {"macro_f1", macro_f1},
              {"majority_baseline", majority_baseline},
              {"dropped", dropped},
              {"unparseable", unparseable},
              {"skipped_folds", skipped_folds},
              {"classes", classes},
              {"folds", folds_json},
              {"confusion", conf}};
}

std::string EvalReport::to_text() const {
  std::ostringstream out;
  out << "evaluated\t" << evaluated << "\n"
      << "weighted-f1\t" << fixed(weighted_f1) << "\n"
      << "micro-f1\t" << fixed(micro_f1) << "\n"
      << "macro-f1\t" << fixed(macro_f1) << "\n"
      << "accuracy\t" << fixed(accuracy) << "\n"
      << "majority-baseline\t" << fixed(majority_baseline) << "\n";
  if (dropped || unparseable) out << "dropped\t" << dropped << "\nunparseable\t" << unparseable << "\n";
  out << "\nlabel\tsupport\tprecision\trecall\tf1\n";
  for (const auto& c : per_class) {
    out << c.label << "\t" << c.support << "\t" << fixed(c.precision) << "\t" << fixed(c.recall) << "\t"
        << fixed(c.f1) << "\n";
  }
  if (!folds.empty()) {
    out << "\nfold\ttrain\ttest\tdropped\tevaluated\tmicro-f1\tmacro-f1\n";
    for (const auto& f : folds) {
      out << f.fold << "\t" << f.train_size << "\t" << f.test_size << "\t" << f.dropped << "\t" << f.evaluated
          << "\t" << (f.skipped ? "skipped" : fixed(f.micro_f1)) << "\t" << (f.skipped ? "-" : fixed(f.macro_f1))
          << "\n";
    }
  }
  return out.str();
}

}  // namespace lostpage
