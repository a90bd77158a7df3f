#pragma once

// Fixture builders shared by the unit suites and the acceptance binary.

#include <string>
#include <vector>

#include "oracles.hpp"
#include "urban_affect/rng.hpp"
#include "urban_affect/textsent.hpp"

namespace ua::fixture {

/// Three-character alphabet used by the exhaustive segmentation checks.
inline const std::vector<std::string> kSegAlphabet = {"北", "京", "学"};

/// Up to max_entries distinct words of 1-4 characters with counts 1..max_count.
inline textsent::Lexicon random_lexicon(Xoshiro256& rng, const std::vector<std::string>& alphabet,
                                        std::size_t max_entries, std::uint64_t max_count) {
  std::map<std::string, std::uint64_t, std::less<>> entries;
  const std::size_t target = 1 + rng.uniform_below(max_entries);
  while (entries.size() < target) {
    std::string w;
    const auto len = 1 + rng.uniform_below(4);
    for (std::uint64_t k = 0; k < len; ++k) w += alphabet[rng.uniform_below(alphabet.size())];
    entries[w] = 1 + rng.uniform_below(max_count);
  }
  return textsent::Lexicon(std::move(entries));
}

/// Every string of length 1..max_len over the alphabet.
inline std::vector<std::string> all_strings(const std::vector<std::string>& alphabet, std::size_t max_len) {
  std::vector<std::string> out, layer{""};
  for (std::size_t len = 1; len <= max_len; ++len) {
    std::vector<std::string> next;
    for (const auto& s : layer) {
      for (const auto& a : alphabet) next.push_back(s + a);
    }
    out.insert(out.end(), next.begin(), next.end());
    layer = std::move(next);
  }
  return out;
}

struct SegmentationCheck {
  std::size_t strings = 0;
  std::size_t mismatches = 0;
  std::string first_mismatch;
};

/// tokenize vs the exhaustive oracle over all strings <= max_len for
/// `lexicons` random lexicons of at most 6 entries.
inline SegmentationCheck check_segmentation(std::uint64_t seed, int lexicons, std::size_t max_len) {
  SegmentationCheck r;
  Xoshiro256 rng(seed);
  const auto strings = all_strings(kSegAlphabet, max_len);
  for (int l = 0; l < lexicons; ++l) {
    const auto lex = random_lexicon(rng, kSegAlphabet, 6, 50);
    for (const auto& s : strings) {
      ++r.strings;
      if (textsent::tokenize(s, lex) != oracle::best_segmentation(s, lex)) {
        if (r.mismatches++ == 0) r.first_mismatch = "lexicon " + std::to_string(l) + ", text " + s;
      }
    }
  }
  return r;
}

/// The two-class fixture: pos {"good good", "good great"}, neg {"bad"}.
inline textsent::SentimentModel good_bad_model() {
  const std::vector<textsent::Tokens> pos = {textsent::whitespace_tokens("good good"),
                                             textsent::whitespace_tokens("good great")};
  const std::vector<textsent::Tokens> neg = {textsent::whitespace_tokens("bad")};
  return textsent::train_sentiment(pos, neg, 1.0);
}

inline textsent::Lexicon good_bad_lexicon() { return textsent::Lexicon({{"good", 3}, {"great", 1}, {"bad", 1}}); }

}  // namespace ua::fixture
