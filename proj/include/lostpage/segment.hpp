#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "lostpage/resources.hpp"

namespace lostpage {

struct WordPiece {
  std::string text;
  bool in_lexicon = false;

  friend bool operator==(const WordPiece&, const WordPiece&) = default;
};

/// Splits run-together lowercase text into its most likely word sequence
/// (minimum total Zipf cost, by dynamic programming). Characters no known
/// word covers are merged into pieces flagged as non-dictionary. Pieces
/// always concatenate back to `text`. Input that is not lowercase letters is
/// returned as a single piece.
std::vector<WordPiece> segment_words(std::string_view text, const WordLexicon& lexicon);

}  // namespace lostpage
