#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lostpage/archive.hpp"
#include "lostpage/resources.hpp"
#include "lostpage/timeutil.hpp"

namespace lostpage {

/// Feature weights for score = w_t*t + w_p*p + w_s*s + w_q*q.
struct RankWeights {
  double t = 0.25;
  double p = 0.25;
  double s = 0.25;
  double q = 0.25;

  /// Throws ConfigError unless every weight is in [0,1] and they sum to 1.
  void validate() const;
  /// "t,p,s,q", e.g. "0.25,0.25,0.25,0.25". Validates.
  static RankWeights parse(std::string_view text);
  std::string str() const;
};

/// 1996-01-01T00:00:00Z, when web archiving started.
Timestamp default_earliest_datetime();

struct TemporalInputs {
  Timestamp requested;  // r_d
  Timestamp candidate;  // c_d
  Timestamp now;        // u_d
  Timestamp earliest = default_earliest_datetime();  // e_d
};

/// |r_d - c_d| / (u_d - e_d) clamped to [0,1]; 1 minus that when
/// `as_similarity`. Throws ConfigError when u_d <= e_d.
double temporal_score(const TemporalInputs& in, bool as_similarity = true);

/// (|ln a / ln x - 1| + ln n / ln m) / 2 clamped to [0,1]. A missing rank
/// contributes 0 to the first term, n = 0 contributes 0 to the second.
double popularity_score(const PopularityEvidence& pe);

/// Jaccard coefficient; 0 when both sets are empty.
double uri_similarity(const std::set<std::string>& a, const std::set<std::string>& b);

/// 1 - d.
double archival_quality(const DamageEvidence& de);

/// Token set used for URI similarity (Tokens method, no stripping). Empty
/// for unparseable input.
std::set<std::string> similarity_tokens(std::string_view uri, const Resources& resources);

struct RankContext {
  std::set<std::string> requested_tokens;
  Timestamp requested;  // r_d
  Timestamp now;        // u_d
  Timestamp earliest = default_earliest_datetime();
  bool temporal_literal = false;  // use the raw distance instead of 1 - distance
};

struct Recommendation {
  std::string uri;
  std::string memento_uri;
  Timestamp memento_datetime;
  size_t memento_count = 0;
  double t = 0.0;
  double p = 0.0;
  double s = 0.0;
  double q = 0.0;
  double score = 0.0;
  std::vector<std::string> explanations;  // one note per feature
  std::vector<std::string> warnings;
};

/// Scores archived candidates and returns the best `top_n`, score
/// descending with ties by URI. Throws ConfigError for invalid weights or
/// top_n == 0, and Error if a candidate is unarchived or failed.
std::vector<Recommendation> rank(std::span<const CandidateEvidence> candidates, const RankContext& context,
                                 const RankWeights& weights, size_t top_n, const Resources& resources);

}  // namespace lostpage
