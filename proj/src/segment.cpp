#include "lostpage/segment.hpp"

#include <algorithm>
#include <limits>

#include "text_util.hpp"

namespace lostpage {

std::vector<WordPiece> segment_words(std::string_view text, const WordLexicon& lexicon) {
  if (text.empty()) return {};
  if (!std::all_of(text.begin(), text.end(), detail::is_lower)) {
    return {WordPiece{std::string(text), lexicon.contains(text)}};
  }

  const size_t n = text.size();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // best[i]: minimum cost of text[0, i); back[i]: length of the last piece,
  // 0 meaning a single unknown character.
  std::vector<double> best(n + 1, kInf);
  std::vector<size_t> back(n + 1, 0);
  best[0] = 0.0;
  const size_t max_len = lexicon.max_word_length();

  for (size_t i = 1; i <= n; ++i) {
    best[i] = best[i - 1] + lexicon.unknown_char_cost();
    back[i] = 0;
    for (size_t len = 1; len <= std::min(i, max_len); ++len) {
      const double* c = lexicon.cost(text.substr(i - len, len));
      if (c && best[i - len] + *c < best[i]) {
        best[i] = best[i - len] + *c;
        back[i] = len;
      }
    }
  }

  std::vector<WordPiece> reversed;
  size_t i = n;
  while (i > 0) {
    if (back[i] > 0) {
      reversed.push_back({std::string(text.substr(i - back[i], back[i])), true});
      i -= back[i];
      continue;
    }
    size_t end = i;
    while (i > 0 && back[i] == 0) --i;
    reversed.push_back({std::string(text.substr(i, end - i)), false});
  }
  std::reverse(reversed.begin(), reversed.end());
  return reversed;
}

}  // namespace lostpage
