#include <doctest.h>

#include <sstream>

#include "support/fixtures.hpp"
#include "support/property.hpp"
#include "urban_affect/textsent.hpp"

using namespace ua;
using namespace ua::textsent;
using Strings = std::vector<std::string>;

TEST_CASE("tokenize prefers the more probable path") {
  const Lexicon lex({{"北京", 10}, {"大学", 10}, {"北京大学", 5}});
  CHECK(lex.total() == 25);
  CHECK(tokenize("北京大学", lex) == Strings{"北京大学"});
  CHECK(oracle::best_segmentation("北京大学", lex) == Strings{"北京大学"});
  CHECK(tokenize("", lex).empty());
  CHECK(tokenize("X", lex) == Strings{"X"});
  CHECK(tokenize("北京X大学", lex) == Strings{"北京", "X", "大学"});
  CHECK_THROWS_AS(tokenize("a", Lexicon()), std::invalid_argument);
}

TEST_CASE("exact probability ties go to the longer first token") {
  // 4/25 == (10/25)^2 exactly
  const Lexicon lex({{"北京", 10}, {"大学", 10}, {"北京大学", 4}, {"x", 1}});
  CHECK(tokenize("北京大学", lex) == Strings{"北京大学"});
  CHECK(oracle::best_segmentation("北京大学", lex) == Strings{"北京大学"});
}

TEST_CASE("lexicon file round-trip") {
  const Lexicon lex({{"北京", 10}, {"好", 3}});
  std::ostringstream out;
  lex.write(out);
  std::istringstream in(out.str());
  CHECK(Lexicon::read(in).entries() == lex.entries());
  std::istringstream bad("word\tzero\n");
  CHECK_THROWS(Lexicon::read(bad));
  CHECK_THROWS_AS(Lexicon({{"a", 0}}), std::invalid_argument);
}

TEST_CASE("tokenize matches the exhaustive oracle") {
  const auto r = fixture::check_segmentation(31, 4, 7);
  INFO(r.first_mismatch);
  CHECK(r.mismatches == 0);
  CHECK(r.strings == 4u * (3 + 9 + 27 + 81 + 243 + 729 + 2187));
}

TEST_CASE("naive Bayes training counts") {
  const auto m = fixture::good_bad_model();
  CHECK(m.prior_pos == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(m.vocab == 3);
  CHECK(m.likelihood("good", true) == doctest::Approx(4.0 / 7.0).epsilon(1e-15));
  CHECK(m.likelihood("good", false) == doctest::Approx(1.0 / 4.0).epsilon(1e-15));

  const std::vector<Tokens> docs = {whitespace_tokens("a b"), whitespace_tokens("b c c")};
  const auto sym = train_sentiment(docs, docs, 1.0);
  for (const char* w : {"a", "b", "c", "zzz"}) CHECK(sym.likelihood(w, true) == sym.likelihood(w, false));
  CHECK(score_tokens(sym, whitespace_tokens("a c c zzz")) == 0.5);

  CHECK_THROWS_AS(train_sentiment(docs, docs, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(train_sentiment({}, docs, 1.0), std::invalid_argument);
}

TEST_CASE("hand Bayes value") {
  const auto m = fixture::good_bad_model();
  const auto lex = fixture::good_bad_lexicon();
  CHECK(std::abs(score_text(m, "good", lex) - 32.0 / 39.0) <= 1e-12);
  CHECK(std::abs(score_text(m, "", lex) - 2.0 / 3.0) <= 1e-12);
  CHECK(to_opinion_score(score_text(m, "good", lex)) == doctest::Approx(320.0 / 39.0));
}

TEST_CASE("word frequency") {
  const Lexicon lex({{"北京", 5}, {"真", 1}, {"好", 2}, {"不", 1}});
  const Strings docs = {"北京 真 好", "北京 不 好"};
  const StopwordSet stop = {"真", "不"};
  auto r = word_frequency(docs, lex, stop, 2);
  CHECK(r.ranked == std::vector<std::pair<std::string, std::uint64_t>>{{"北京", 2}, {"好", 2}});
  CHECK(r.documents == 2);
  CHECK(r.stopword_set_id == stopword_set_id(stop));

  CHECK(word_frequency(docs, lex, stop, 100).ranked.size() == 2);
  CHECK(word_frequency(docs, lex, {"北京", "真", "好", "不"}, 5).ranked.empty());
  CHECK_THROWS_AS(word_frequency(docs, lex, stop, 0), std::invalid_argument);

  std::ostringstream csv;
  write_word_frequency_csv(csv, r);
  CHECK(csv.str() == "rank,token,count\n1,北京,2\n2,好,2\n");
}

TEST_CASE("parallel scoring matches serial") {
  const auto m = fixture::good_bad_model();
  const auto lex = fixture::good_bad_lexicon();
  Strings texts;
  Xoshiro256 rng(5);
  const Strings words = {"good", "bad", "great", "meh", " "};
  for (int i = 0; i < 500; ++i) {
    std::string t;
    for (int k = 0; k < 6; ++k) t += words[rng.uniform_below(words.size())];
    texts.push_back(t);
  }
  CHECK(score_texts(m, texts, lex, 1) == score_texts(m, texts, lex, 8));
}

TEST_CASE("property: tokens concatenate back to the input") {
  const Lexicon lex({{"北京", 10}, {"ab", 3}, {"\xe4\xb8", 2}, {"好", 4}});
  prop::for_cases(41, prop::kDefaultCases, [&](Xoshiro256& rng, int) {
    std::string s;
    const int n = prop::uniform_int(rng, 0, 24);
    const Strings pieces = {"北", "京", "a", "b", "好", "\xe4", "\xb8", "\xf0\x9f\x98\x80", "\xff", " ", "\n"};
    for (int k = 0; k < n; ++k) {
      if (rng.uniform01() < 0.3) {
        s += static_cast<char>(rng.uniform_below(256));
      } else {
        s += pieces[rng.uniform_below(pieces.size())];
      }
    }
    std::string joined;
    for (const auto& t : tokenize(s, lex)) joined += t;
    CHECK(joined == s);
  });
}

TEST_CASE("property: segmentation is invariant under uniform frequency scaling") {
  prop::for_cases(42, prop::kDefaultCases, [](Xoshiro256& rng, int) {
    const auto lex = fixture::random_lexicon(rng, fixture::kSegAlphabet, 6, 50);
    const std::uint64_t k = 2 + rng.uniform_below(999);
    std::map<std::string, std::uint64_t, std::less<>> scaled;
    for (const auto& [w, c] : lex.entries()) scaled[w] = c * k;
    const Lexicon big(std::move(scaled));
    std::string s;
    const int n = prop::uniform_int(rng, 1, 16);
    for (int i = 0; i < n; ++i) s += fixture::kSegAlphabet[rng.uniform_below(3)];
    CHECK(tokenize(s, lex) == tokenize(s, big));
  });
}

namespace {

Tokens random_tokens(Xoshiro256& rng, int max_len) {
  const Strings vocab = {"a", "b", "c", "d", "e", "unseen"};
  Tokens t;
  const int n = prop::uniform_int(rng, 0, max_len);
  for (int i = 0; i < n; ++i) t.push_back(vocab[rng.uniform_below(vocab.size())]);
  return t;
}

SentimentModel random_model(Xoshiro256& rng) {
  std::vector<Tokens> pos(prop::uniform_int(rng, 1, 5)), neg(prop::uniform_int(rng, 1, 5));
  for (auto& d : pos) d = random_tokens(rng, 6);
  for (auto& d : neg) d = random_tokens(rng, 6);
  return train_sentiment(pos, neg, rng.uniform(0.1, 2.0));
}

}  // namespace

TEST_CASE("property: swapping classes complements the score") {
  prop::for_cases(43, prop::kDefaultCases, [](Xoshiro256& rng, int) {
    const auto m = random_model(rng);
    const auto sw = m.swapped();
    const auto t = random_tokens(rng, 30);
    CHECK(std::abs(score_tokens(m, t) + score_tokens(sw, t) - 1.0) <= 1e-12);
  });
}

TEST_CASE("property: score is invariant under token permutation") {
  prop::for_cases(44, prop::kDefaultCases, [](Xoshiro256& rng, int) {
    const auto m = random_model(rng);
    auto t = random_tokens(rng, 30);
    const double before = score_tokens(m, t);
    for (std::size_t i = t.size(); i > 1; --i) std::swap(t[i - 1], t[rng.uniform_below(i)]);
    CHECK(score_tokens(m, t) == before);
  });
}
