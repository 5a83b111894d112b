#include "lostpage/ranker.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "lostpage/error.hpp"
#include "lostpage/tokenize.hpp"
#include "text_util.hpp"

namespace lostpage {
namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

double days_between(Timestamp a, Timestamp b) {
  return std::chrono::duration<double, std::ratio<86400>>(a > b ? a - b : b - a).count();
}

}  // namespace

void RankWeights::validate() const {
  for (double w : {t, p, s, q}) {
    if (!std::isfinite(w) || w < 0.0 || w > 1.0) throw ConfigError("weights must lie in [0,1]: " + str());
  }
  if (std::abs(t + p + s + q - 1.0) > 1e-9) throw ConfigError("weights must sum to 1: " + str());
}

RankWeights RankWeights::parse(std::string_view text) {
  auto parts = detail::split_keep(text, ',');
  if (parts.size() != 4) throw ConfigError("weights need four comma-separated values (t,p,s,q)");
  double v[4];
  for (size_t i = 0; i < 4; ++i) {
    std::string piece(detail::trim(parts[i]));
    try {
      size_t used = 0;
      v[i] = std::stod(piece, &used);
      if (used != piece.size()) throw std::invalid_argument(piece);
    } catch (const std::exception&) {
      throw ConfigError("bad weight '" + piece + "'");
    }
  }
  RankWeights w{v[0], v[1], v[2], v[3]};
  w.validate();
  return w;
}

std::string RankWeights::str() const { return num(t) + "," + num(p) + "," + num(s) + "," + num(q); }

Timestamp default_earliest_datetime() {
  using namespace std::chrono;
  return sys_days{year{1996} / January / 1};
}

double temporal_score(const TemporalInputs& in, bool as_similarity) {
  if (in.now <= in.earliest) throw ConfigError("current datetime must be after the earliest datetime");
  auto span = static_cast<double>((in.now - in.earliest).count());
  auto distance = in.requested > in.candidate ? in.requested - in.candidate : in.candidate - in.requested;
  double raw = std::clamp(static_cast<double>(distance.count()) / span, 0.0, 1.0);
  return as_similarity ? 1.0 - raw : raw;
}

double popularity_score(const PopularityEvidence& pe) {
  double rank_term = 0.0;
  if (pe.global_rank && pe.rank_floor > 1) {
    double a = static_cast<double>(std::clamp<int64_t>(*pe.global_rank, 1, pe.rank_floor));
    rank_term = std::abs(std::log(a) / std::log(static_cast<double>(pe.rank_floor)) - 1.0);
  }
  double archive_term = 0.0;
  if (pe.archive_count > 0 && pe.archive_count_ceiling > 1) {
    double n = static_cast<double>(std::min(pe.archive_count, pe.archive_count_ceiling));
    archive_term = std::log(n) / std::log(static_cast<double>(pe.archive_count_ceiling));
  }
  return std::clamp((rank_term + archive_term) / 2.0, 0.0, 1.0);
}

double uri_similarity(const std::set<std::string>& a, const std::set<std::string>& b) {
  size_t common = 0;
  for (const auto& x : a) common += b.count(x);
  size_t uni = a.size() + b.size() - common;
  return uni == 0 ? 0.0 : static_cast<double>(common) / static_cast<double>(uni);
}

double archival_quality(const DamageEvidence& de) { return std::abs(std::clamp(de.damage, 0.0, 1.0) - 1.0); }

std::set<std::string> similarity_tokens(std::string_view uri, const Resources& resources) {
  try {
    return tokenize(uri, TokenMethod::Tokens, {}, resources).distinct();
  } catch (const ParseError&) {
    return {};
  }
}

std::vector<Recommendation> rank(std::span<const CandidateEvidence> candidates, const RankContext& context,
                                 const RankWeights& weights, size_t top_n, const Resources& resources) {
  weights.validate();
  if (top_n == 0) throw ConfigError("top_n must be at least 1");

  std::vector<Recommendation> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) {
    if (c.failed || !c.archive.archived || !c.nearest) {
      throw Error("cannot rank unarchived candidate " + c.uri);
    }
    Recommendation r;
    r.uri = c.uri;
    r.memento_uri = c.nearest->uri;
    r.memento_datetime = c.nearest->datetime;
    r.memento_count = c.archive.memento_count;

    r.t = temporal_score({context.requested, c.nearest->datetime, context.now, context.earliest},
                         !context.temporal_literal);
    r.p = popularity_score(c.popularity);
    r.s = uri_similarity(context.requested_tokens, similarity_tokens(c.uri, resources));
    r.q = archival_quality(c.damage);
    r.score = std::clamp(weights.t * r.t + weights.p * r.p + weights.s * r.s + weights.q * r.q, 0.0, 1.0);

    r.explanations.push_back("t=" + num(r.t) + ": nearest memento " + format_iso8601(c.nearest->datetime) + " is " +
                             num(days_between(context.requested, c.nearest->datetime)) + " days from " +
                             format_iso8601(context.requested) +
                             (context.temporal_literal ? " (raw distance)" : " (1 - distance)"));
    r.explanations.push_back(
        "p=" + num(r.p) + ": rank " + (c.popularity.global_rank ? std::to_string(*c.popularity.global_rank) : "unknown") +
        " of " + std::to_string(c.popularity.rank_floor) + ", " + std::to_string(c.popularity.archive_count) +
        " mementos of " + std::to_string(c.popularity.archive_count_ceiling));
    r.explanations.push_back("s=" + num(r.s) + ": URI token overlap with the request");
    r.explanations.push_back("q=" + num(r.q) + ": damage " + num(c.damage.damage) + " (" +
                             std::string(to_string(c.damage.source)) + ")");
    r.warnings = c.warnings;
    out.push_back(std::move(r));
  }
  std::sort(out.begin(), out.end(), [](const Recommendation& a, const Recommendation& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.uri < b.uri;
  });
  if (out.size() > top_n) out.resize(top_n);
  return out;
}

}  // namespace lostpage
