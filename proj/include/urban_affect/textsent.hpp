#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ua::textsent {

/// Splits UTF-8 into code-point substrings. Bytes that do not start a valid
/// sequence become one-byte units, so concatenation always restores the input.
std::vector<std::string_view> utf8_units(std::string_view text);

/// Word -> frequency dictionary for max-probability segmentation.
class Lexicon {
 public:
  Lexicon() = default;
  /// Throws std::invalid_argument on an empty word or a zero count.
  explicit Lexicon(std::map<std::string, std::uint64_t, std::less<>> entries);

  /// Reads "word<TAB>count" lines. Blank lines are skipped.
  static Lexicon read(std::istream& in);
  void write(std::ostream& out) const;

  std::uint64_t frequency(std::string_view word) const;
  std::uint64_t total() const { return total_; }
  std::size_t max_word_units() const { return max_units_; }
  bool empty() const { return entries_.empty(); }
  const std::map<std::string, std::uint64_t, std::less<>>& entries() const { return entries_; }

  /// Weight given to single-character edges where no word starts: one count
  /// unit, where the unit is the gcd of all counts (1 for ordinary lexicons).
  std::uint64_t fallback_frequency() const { return unit_; }

 private:
  std::map<std::string, std::uint64_t, std::less<>> entries_;
  std::uint64_t total_ = 0;
  std::uint64_t unit_ = 1;
  std::size_t max_units_ = 0;
};

/// Maximum-probability segmentation over the DAG of lexicon matches.
/// Equal-probability paths prefer the longer first token, recursively.
/// Throws std::invalid_argument for an empty lexicon.
std::vector<std::string> tokenize(std::string_view text, const Lexicon& lex);

/// Splits on ASCII whitespace.
std::vector<std::string> whitespace_tokens(std::string_view text);

using Tokens = std::vector<std::string>;

struct SentimentModel {
  std::uint64_t pos_docs = 0;
  std::uint64_t neg_docs = 0;
  double prior_pos = 0.0;
  double prior_neg = 0.0;
  std::map<std::string, std::uint64_t, std::less<>> pos_counts;
  std::map<std::string, std::uint64_t, std::less<>> neg_counts;
  std::uint64_t pos_total = 0;
  std::uint64_t neg_total = 0;
  std::size_t vocab = 0;
  double alpha = 1.0;

  /// Smoothed P(token | class).
  double likelihood(std::string_view token, bool positive) const;
  /// Same model with the class labels exchanged.
  SentimentModel swapped() const;
};

/// Multinomial naive Bayes with Laplace-alpha smoothing; priors are document
/// proportions. Throws std::invalid_argument on an empty corpus or alpha <= 0.
SentimentModel train_sentiment(std::span<const Tokens> pos_docs, std::span<const Tokens> neg_docs,
                               double alpha);

/// P(positive | tokens) as a bag of words. Empty input returns the prior.
double score_tokens(const SentimentModel& model, std::span<const std::string> tokens);

/// tokenize + score_tokens.
double score_text(const SentimentModel& model, std::string_view text, const Lexicon& lex);

/// Opinion score on the 0-10 perception scale.
inline double to_opinion_score(double probability) { return 10.0 * probability; }

/// Scores many texts; output[i] belongs to texts[i] regardless of workers.
std::vector<double> score_texts(const SentimentModel& model, std::span<const std::string> texts,
                                const Lexicon& lex, int workers);

using StopwordSet = std::set<std::string, std::less<>>;

/// One word per line; blank lines skipped.
StopwordSet read_stopwords(std::istream& in);

/// Punctuation plus a short list of Chinese function words.
const StopwordSet& default_stopwords();

/// True when every code point is whitespace or punctuation.
bool is_punctuation_or_space(std::string_view token);

struct WordFrequencyReport {
  std::vector<std::pair<std::string, std::uint64_t>> ranked;
  std::size_t documents = 0;
  std::uint64_t counted_tokens = 0;
  std::string stopword_set_id;
};

/// Short digest identifying a stopword set.
std::string stopword_set_id(const StopwordSet& stopwords);

/// Top-k tokens by count; ties in ascending code-point order. Stopwords and
/// whitespace/punctuation-only tokens are not counted.
/// Throws std::invalid_argument when k < 1.
WordFrequencyReport word_frequency(std::span<const std::string> docs, const Lexicon& lex,
                                   const StopwordSet& stopwords, std::size_t k);

/// CSV "rank,token,count".
void write_word_frequency_csv(std::ostream& out, const WordFrequencyReport& report);

}  // namespace ua::textsent
