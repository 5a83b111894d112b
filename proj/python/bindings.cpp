#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include <nlohmann/json.hpp>

#include "lostpage/access_log.hpp"
#include "lostpage/archive.hpp"
#include "lostpage/config.hpp"
#include "lostpage/corpus_stats.hpp"
#include "lostpage/error.hpp"
#include "lostpage/metrics.hpp"
#include "lostpage/naive_bayes.hpp"
#include "lostpage/ranker.hpp"
#include "lostpage/recommender.hpp"
#include "lostpage/segment.hpp"
#include "lostpage/tokenize.hpp"
#include "lostpage/uri.hpp"

namespace py = pybind11;
namespace lp = lostpage;

namespace {

lp::Timestamp iso(const std::string& text) {
  auto t = lp::parse_iso8601(text);
  if (!t) throw lp::ConfigError("bad ISO-8601 datetime '" + text + "'");
  return *t;
}

lp::TokenBag bag(const std::vector<std::string>& features) {
  lp::TokenBag b;
  b.features = features;
  return b;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "lostpage core bindings";

  auto base = py::register_exception<lp::Error>(m, "Error");
  py::register_exception<lp::ParseError>(m, "ParseError", base.ptr());
  py::register_exception<lp::ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<lp::IoError>(m, "IoError", base.ptr());

  m.def("set_data_dir", [](const std::string& dir) { lp::set_default_data_dir(dir); });
  m.def("data_dir", [] { return lp::default_data_dir().string(); });

  m.def("normalize_uri", [](const std::string& u) { return lp::normalize_input_uri(u); });
  m.def("canonicalize_surt", [](const std::string& u) { return lp::canonicalize_surt(u); });
  m.def("depth", [](const std::string& u) { return lp::depth(u); });

  m.def(
      "tokenize",
      [](const std::string& uri, const std::string& method, const std::string& variants) {
        return lp::tokenize(uri, lp::parse_token_method(method), lp::parse_token_variants(variants),
                            lp::Resources::bundled())
            .features;
      },
      py::arg("uri"), py::arg("method") = "tokens", py::arg("variants") = "none");

  m.def("segment_words", [](const std::string& text) {
    std::vector<std::pair<std::string, bool>> out;
    for (auto& p : lp::segment_words(text, lp::Resources::bundled().lexicon)) out.emplace_back(p.text, p.in_lexicon);
    return out;
  });

  py::class_<lp::NaiveBayesModel>(m, "NaiveBayes")
      .def_static(
          "train",
          [](const std::vector<std::pair<std::vector<std::string>, std::string>>& docs, double alpha) {
            std::vector<lp::LabeledBag> corpus;
            for (const auto& [features, label] : docs) corpus.push_back({bag(features), label});
            return lp::NaiveBayesModel::train(corpus, alpha);
          },
          py::arg("documents"), py::arg("alpha") = 1.0)
      .def_property_readonly("classes", &lp::NaiveBayesModel::classes)
      .def_property_readonly("vocabulary_size", &lp::NaiveBayesModel::vocabulary_size)
      .def("classify", [](const lp::NaiveBayesModel& model, const std::vector<std::string>& features) -> py::object {
        auto c = model.classify(bag(features));
        if (!c) return py::none();
        std::vector<std::pair<std::string, double>> ranking;
        for (const auto& r : c->ranking) ranking.emplace_back(r.label, r.posterior);
        return py::make_tuple(c->label, ranking);
      });

  m.def("evaluate_predictions_json", [](const std::vector<std::string>& truth, const std::vector<std::string>& pred) {
    return lp::evaluate_predictions(truth, pred).to_json().dump();
  });

  m.def(
      "temporal_score",
      [](const std::string& requested, const std::string& candidate, const std::string& now,
         const std::string& earliest, bool literal) {
        return lp::temporal_score({iso(requested), iso(candidate), iso(now), iso(earliest)}, !literal);
      },
      py::arg("requested"), py::arg("candidate"), py::arg("now"), py::arg("earliest") = "1996-01-01T00:00:00Z",
      py::arg("literal") = false);
  m.def(
      "popularity_score",
      [](std::optional<int64_t> rank, int64_t archive_count, int64_t rank_floor, int64_t ceiling) {
        lp::PopularityEvidence pe;
        pe.global_rank = rank;
        pe.archive_count = archive_count;
        pe.rank_floor = rank_floor;
        pe.archive_count_ceiling = ceiling;
        return lp::popularity_score(pe);
      },
      py::arg("rank"), py::arg("archive_count"), py::arg("rank_floor") = lp::kDefaultRankFloor,
      py::arg("archive_ceiling") = lp::kDefaultArchiveCeiling);
  m.def("uri_similarity", &lp::uri_similarity);
  m.def("archival_quality", [](double d) { return lp::archival_quality({d, lp::DamageSource::Fixture}); });

  m.def("parse_timemap", [](const std::string& body) {
    auto page = lp::parse_timemap(body);
    std::vector<std::pair<std::string, std::string>> mementos;
    for (const auto& mm : page.mementos) mementos.emplace_back(lp::format_iso8601(mm.datetime), mm.uri);
    return py::make_tuple(mementos, page.next);
  });

  m.def("filter_access_log", [](const std::vector<std::string>& lines) {
    lp::AccessLogFilter filter;
    std::vector<std::string> out;
    for (const auto& l : lines) {
      if (auto u = filter.add_line(l)) out.push_back(*u);
    }
    return py::make_tuple(out, filter.stats().to_json().dump());
  });

  m.def("index_stats_json", [](const std::string& index_tsv) {
    return lp::corpus_stats(lp::CategoryIndex::load(index_tsv), lp::Resources::bundled()).to_json().dump();
  });

  m.def(
      "recommend_json",
      [](const std::string& uri, std::optional<std::string> datetime, std::optional<std::string> now,
         const std::map<std::string, std::string>& config) {
        lp::ConfigLayers layers;
        for (const auto& [k, v] : config) layers.set(k, v, lp::ConfigLayers::Origin::Flag);
        lp::Settings s = lp::Settings::from(layers);
        auto recommender = lp::make_recommender(s, lp::Resources::bundled());
        lp::RecommendationRequest req;
        req.uri = uri;
        if (datetime) req.datetime = iso(*datetime);
        if (now) req.now = iso(*now);
        req.top_n = s.top;
        req.weights = s.weights;
        req.config = s.to_json();
        py::gil_scoped_release release;
        return recommender->recommend(req).to_json().dump();
      },
      py::arg("uri"), py::arg("datetime") = py::none(), py::arg("now") = py::none(),
      py::arg("config") = std::map<std::string, std::string>{});
}
