// lostpage: command-line front end.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lostpage/access_log.hpp"
#include "lostpage/config.hpp"
#include "lostpage/corpus_stats.hpp"
#include "lostpage/deep_eval.hpp"
#include "lostpage/error.hpp"
#include "lostpage/naive_bayes.hpp"
#include "lostpage/recommender.hpp"

namespace lp = lostpage;

namespace {

constexpr int kExitEmpty = 2;
constexpr int kExitConfig = 3;
constexpr int kExitIo = 4;
constexpr int kExitOther = 5;

/// Every configuration key doubles as a flag on each subcommand.
struct ConfigFlags {
  std::string config_file;
  std::map<std::string, std::string> values;
  bool temporal_literal = false;
  std::map<std::string, CLI::Option*> options;

  void attach(CLI::App* app) {
    app->add_option("--config", config_file, "key = value configuration file");
    for (const auto& k : lp::config_keys()) {
      std::string flag = "--" + k.name;
      std::replace(flag.begin(), flag.end(), '_', '-');
      if (k.name == "temporal_literal") {
        options[k.name] = app->add_flag(flag, temporal_literal, k.help);
      } else {
        options[k.name] = app->add_option(flag, values[k.name], k.help);
      }
    }
  }

  lp::Settings resolve() const {
    lp::ConfigLayers layers;
    layers.read_env();
    if (!config_file.empty()) layers.read_file(std::filesystem::path(config_file));
    for (const auto& [key, opt] : options) {
      if (opt->count() == 0) continue;
      if (key == "temporal_literal") {
        layers.set(key, temporal_literal ? "true" : "false", lp::ConfigLayers::Origin::Flag);
      } else {
        layers.set(key, values.at(key), lp::ConfigLayers::Origin::Flag);
      }
    }
    lp::Settings s = lp::Settings::from(layers);
    if (s.data_dir) lp::set_default_data_dir(*s.data_dir);
    return s;
  }
};

lp::Timestamp parse_time_flag(const std::string& name, const std::string& text) {
  auto t = lp::parse_iso8601(text);
  if (!t) throw lp::ConfigError(name + ": expected an ISO-8601 datetime, got '" + text + "'");
  return *t;
}

std::string fixed(double v, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void print_table(const lp::RecommendationResult& r, std::ostream& out) {
  out << "request   " << r.uri << "\n";
  out << "datetime  " << lp::format_iso8601(r.requested) << "\n";
  out << "path      " << to_string(r.path);
  if (r.category) out << "  " << r.category->str();
  out << "\n";
  out << "candidates " << r.candidates.size() << ", unarchived " << r.unarchived.size() << ", failed "
      << r.failed.size() << "\n";
  if (r.empty()) {
    out << "no recommendations: " << r.reason << "\n";
  } else {
    out << "\n#   score   t       p       s       q       uri -> memento\n";
    int i = 0;
    for (const auto& rec : r.recommendations) {
      char line[96];
      std::snprintf(line, sizeof line, "%-3d %s  %s  %s  %s  %s  ", ++i, fixed(rec.score).c_str(),
                    fixed(rec.t).c_str(), fixed(rec.p).c_str(), fixed(rec.s).c_str(), fixed(rec.q).c_str());
      out << line << rec.uri << " -> " << rec.memento_uri << "\n";
    }
  }
  out << "\ntrace\n";
  for (const auto& t : r.trace) out << "  " << t << "\n";
  for (const auto& w : r.warnings) out << "warning: " << w << "\n";
}

void print_records(const lp::RecommendationResult& r, std::ostream& out) {
  nlohmann::json head = r.to_json();
  nlohmann::json recs = head["recommendations"];
  head.erase("recommendations");
  head["type"] = "request";
  out << head.dump() << "\n";
  for (auto& rec : recs) {
    rec["type"] = "recommendation";
    rec["request"] = r.uri;
    rec["path"] = std::string(to_string(r.path));
    out << rec.dump() << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recommend archived web pages for a lost URI"};
  app.require_subcommand(1);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Build an ontology index from a DMOZ RDF dump or TSV file");
  ConfigFlags ingest_cfg;
  ingest_cfg.attach(ingest);
  std::string ingest_input, ingest_format, ingest_out;
  bool ingest_all = false;
  ingest->add_option("--input", ingest_input, "DMOZ content dump (.rdf/.u8) or TSV")->required();
  ingest->add_option("--format", ingest_format, "rdf or tsv (default: from the file extension)");
  ingest->add_option("--out", ingest_out, "index TSV to write")->required();
  ingest->add_flag("--all-top-levels", ingest_all, "keep every non-excluded top-level category");

  // train
  auto* train = app.add_subcommand("train", "Train the first-level model and build the deep vector index");
  ConfigFlags train_cfg;
  train_cfg.attach(train);
  std::string model_out, vectors_out;
  train->add_option("--model-out", model_out, "first-level model file")->required();
  train->add_option("--vectors-out", vectors_out, "vector index file");

  // recommend
  auto* recommend = app.add_subcommand("recommend", "Recommend archived replacements for a URI");
  ConfigFlags rec_cfg;
  rec_cfg.attach(recommend);
  std::string rec_uri, rec_datetime, rec_now;
  recommend->add_option("uri,--uri", rec_uri, "requested URI")->required();
  recommend->add_option("--datetime", rec_datetime, "desired datetime (ISO-8601); default now");
  recommend->add_option("--now", rec_now, "current datetime (ISO-8601); pins output for reproducibility");

  // evaluate-l1
  auto* eval_l1 = app.add_subcommand("evaluate-l1", "Cross-validate first-level classification");
  ConfigFlags l1_cfg;
  l1_cfg.attach(eval_l1);
  std::string l1_method = "all-grams-from-uri", l1_variants = "strip-tld,strip-numbers", l1_oov = "drop";
  int l1_folds = 10;
  uint64_t l1_seed = 42;
  bool l1_json = false;
  eval_l1->add_option("--method", l1_method, "tokens, all-grams-from-tokens, all-grams-from-uri")->capture_default_str();
  eval_l1->add_option("--variants", l1_variants, "none or strip-tld,strip-numbers,strip-stopwords")->capture_default_str();
  eval_l1->add_option("--folds", l1_folds)->capture_default_str();
  eval_l1->add_option("--seed", l1_seed)->capture_default_str();
  eval_l1->add_option("--oov", l1_oov, "drop or ignore")->capture_default_str();
  eval_l1->add_flag("--json", l1_json);

  // evaluate-deep
  auto* eval_deep = app.add_subcommand("evaluate-deep", "Hold-out evaluation of deep classification");
  ConfigFlags deep_cfg;
  deep_cfg.attach(eval_deep);
  double deep_holdout = 0.1;
  uint64_t deep_seed = 42;
  bool deep_json = false, deep_items = false;
  eval_deep->add_option("--holdout", deep_holdout, "fraction held out per category")->capture_default_str();
  eval_deep->add_option("--seed", deep_seed)->capture_default_str();
  eval_deep->add_flag("--json", deep_json);
  eval_deep->add_flag("--items", deep_items, "include per-item predictions in JSON output");

  // analyze-logs
  auto* logs = app.add_subcommand("analyze-logs", "Filter access logs and profile the requested URIs");
  ConfigFlags logs_cfg;
  logs_cfg.attach(logs);
  std::vector<std::string> log_files;
  std::string survivors_out;
  bool logs_json = false;
  logs->add_option("files", log_files, "access logs (plain or gzip)")->required();
  logs->add_option("--survivors", survivors_out, "write the filtered unique URIs here");
  logs->add_flag("--json", logs_json);

  // stats
  auto* stats = app.add_subcommand("stats", "Profile the ontology index");
  ConfigFlags stats_cfg;
  stats_cfg.attach(stats);
  bool stats_json = false;
  stats->add_flag("--json", stats_json);

  CLI11_PARSE(app, argc, argv);

  try {
    if (ingest->parsed()) {
      lp::Settings s = ingest_cfg.resolve();
      (void)s;
      lp::DmozFormat format;
      if (!ingest_format.empty()) {
        format = lp::parse_dmoz_format(ingest_format);
      } else {
        std::string ext = std::filesystem::path(ingest_input).extension().string();
        format = (ext == ".tsv" || ext == ".txt") ? lp::DmozFormat::Tsv : lp::DmozFormat::Rdf;
      }
      std::ifstream in(ingest_input, std::ios::binary);
      if (!in) throw lp::IoError("cannot open " + ingest_input);
      lp::IngestOptions options;
      if (ingest_all) options.retained_top_levels.clear();
      lp::IngestReport report;
      lp::CategoryIndex index = lp::ingest_dmoz(in, format, options, &report);
      index.save(ingest_out);
      std::cout << "records " << report.records << ", kept " << report.kept << ", missing fields "
                << report.missing_fields << ", excluded " << report.excluded_category << ", not retained "
                << report.unretained_category << ", duplicates " << report.duplicates << ", malformed "
                << report.malformed << "\n";
      for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
      return 0;
    }

    if (train->parsed()) {
      lp::Settings s = train_cfg.resolve();
      const auto& res = lp::Resources::bundled();
      auto index = lp::load_configured_index(s);
      lp::NaiveBayesModel model = lp::train_l1(*index, res, s.alpha);
      model.save(model_out);
      std::cout << "model: " << model.classes().size() << " classes, vocabulary " << model.vocabulary_size() << " -> "
                << model_out << "\n";
      if (!vectors_out.empty()) {
        auto vectors = lp::CategoryVectorIndex::build(*index, s.grams, res, s.parallelism);
        vectors.save(vectors_out);
        std::cout << "vectors: " << vectors.categories().size() << " categories, " << vectors.total_vectors()
                  << " vectors (" << vectors.excluded_entries() << " excluded) -> " << vectors_out << "\n";
      }
      return 0;
    }

    if (recommend->parsed()) {
      lp::Settings s = rec_cfg.resolve();
      const auto& res = lp::Resources::bundled();
      std::vector<std::string> notes;
      auto recommender = lp::make_recommender(s, res, &notes);
      lp::RecommendationRequest request;
      request.uri = rec_uri;
      if (!rec_datetime.empty()) request.datetime = parse_time_flag("--datetime", rec_datetime);
      if (!rec_now.empty()) request.now = parse_time_flag("--now", rec_now);
      request.top_n = s.top;
      request.weights = s.weights;
      request.config = s.to_json();
      lp::RecommendationResult result = recommender->recommend(request);
      if (s.output == lp::OutputFormat::Records) {
        print_records(result, std::cout);
      } else {
        print_table(result, std::cout);
      }
      return result.empty() ? kExitEmpty : 0;
    }

    if (eval_l1->parsed()) {
      lp::Settings s = l1_cfg.resolve();
      const auto& res = lp::Resources::bundled();
      auto index = lp::load_configured_index(s);
      std::vector<lp::LabeledUri> corpus;
      for (const auto& e : index->entries()) corpus.push_back({e.uri, e.category.top_level()});
      lp::CrossValidationOptions cv;
      cv.folds = l1_folds;
      cv.seed = l1_seed;
      cv.alpha = s.alpha;
      cv.threads = s.parallelism;
      if (l1_oov == "drop") {
        cv.oov = lp::OovPolicy::DropTestItem;
      } else if (l1_oov == "ignore") {
        cv.oov = lp::OovPolicy::IgnoreFeatures;
      } else {
        throw lp::ConfigError("--oov must be drop or ignore");
      }
      auto report = lp::cross_validate(corpus, lp::parse_token_method(l1_method),
                                       lp::parse_token_variants(l1_variants), cv, res);
      std::cout << (l1_json ? report.to_json().dump(2) + "\n" : report.to_text());
      return 0;
    }

    if (eval_deep->parsed()) {
      lp::Settings s = deep_cfg.resolve();
      const auto& res = lp::Resources::bundled();
      auto index = lp::load_configured_index(s);
      lp::DeepEvalOptions options;
      options.holdout_fraction = deep_holdout;
      options.seed = deep_seed;
      options.grams = s.grams;
      options.candidates = s.deep_candidates;
      options.alpha = s.alpha;
      options.threads = s.parallelism;
      auto report = lp::evaluate_deep(*index, options, res);
      std::cout << (deep_json ? report.to_json(deep_items).dump(2) + "\n" : report.to_text());
      return 0;
    }

    if (logs->parsed()) {
      lp::Settings s = logs_cfg.resolve();
      (void)s;
      const auto& res = lp::Resources::bundled();
      lp::AccessLogFilter filter({}, res);
      std::vector<std::string> uris;
      for (const auto& f : log_files) {
        lp::for_each_line(f, [&](std::string_view line) {
          if (auto u = filter.add_line(line)) uris.push_back(std::move(*u));
        });
      }
      if (!survivors_out.empty()) {
        std::ofstream out(survivors_out);
        if (!out) throw lp::IoError("cannot write " + survivors_out);
        for (const auto& u : uris) out << u << "\n";
      }
      auto report = lp::analyze_requests(uris, res);
      if (logs_json) {
        std::cout << nlohmann::json{{"filter", filter.stats().to_json()}, {"report", report.to_json()}}.dump(2) << "\n";
      } else {
        std::cout << "filter " << filter.stats().to_json().dump() << "\n\n" << report.to_text();
      }
      return 0;
    }

    if (stats->parsed()) {
      lp::Settings s = stats_cfg.resolve();
      auto index = lp::load_configured_index(s);
      auto report = lp::corpus_stats(*index, lp::Resources::bundled());
      std::cout << (stats_json ? report.to_json().dump(2) + "\n" : report.to_text());
      return 0;
    }
  } catch (const lp::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const lp::ParseError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitConfig;
  } catch (const lp::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOther;
  }
  return 0;
}
