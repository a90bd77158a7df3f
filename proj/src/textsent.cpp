#include "urban_affect/textsent.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "urban_affect/io.hpp"
#include "urban_affect/kernels.hpp"

namespace ua::textsent {

namespace {

std::size_t sequence_length(std::string_view s, std::size_t i) {
  auto c = static_cast<unsigned char>(s[i]);
  std::size_t len = 0;
  if (c < 0x80) return 1;
  if ((c & 0xE0) == 0xC0 && c >= 0xC2) len = 2;
  else if ((c & 0xF0) == 0xE0) len = 3;
  else if ((c & 0xF8) == 0xF0 && c <= 0xF4) len = 4;
  else return 1;
  if (i + len > s.size()) return 1;
  for (std::size_t k = 1; k < len; ++k) {
    if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) return 1;
  }
  auto c1 = static_cast<unsigned char>(s[i + 1]);
  // overlong, surrogate and out-of-range forms
  if (c == 0xE0 && c1 < 0xA0) return 1;
  if (c == 0xED && c1 >= 0xA0) return 1;
  if (c == 0xF0 && c1 < 0x90) return 1;
  if (c == 0xF4 && c1 >= 0x90) return 1;
  return len;
}

char32_t decode(std::string_view unit) {
  auto b = [&](std::size_t k) { return static_cast<char32_t>(static_cast<unsigned char>(unit[k])); };
  switch (unit.size()) {
    case 1: return b(0);
    case 2: return ((b(0) & 0x1F) << 6) | (b(1) & 0x3F);
    case 3: return ((b(0) & 0x0F) << 12) | ((b(1) & 0x3F) << 6) | (b(2) & 0x3F);
    default: return ((b(0) & 0x07) << 18) | ((b(1) & 0x3F) << 12) | ((b(2) & 0x3F) << 6) | (b(3) & 0x3F);
  }
}

bool punct_or_space(char32_t c) {
  if (c < 0x80) return c <= 0x20 || c == 0x7F || (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) ||
                       (c >= 0x5B && c <= 0x60) || (c >= 0x7B && c <= 0x7E);
  if (c >= 0x80 && c <= 0xBF) return c != 0xAA && c != 0xB2 && c != 0xB3 && c != 0xB5 && c != 0xB9 && c != 0xBA;
  if (c >= 0x2000 && c <= 0x206F) return true;  // general punctuation, spaces
  if (c >= 0x3000 && c <= 0x303F) return true;  // CJK symbols and punctuation
  if (c >= 0xFE30 && c <= 0xFE4F) return true;  // CJK compatibility forms
  if (c >= 0xFF01 && c <= 0xFF0F) return true;  // fullwidth forms
  if (c >= 0xFF1A && c <= 0xFF20) return true;
  if (c >= 0xFF3B && c <= 0xFF40) return true;
  if (c >= 0xFF5B && c <= 0xFF65) return true;
  return false;
}

}  // namespace

std::vector<std::string_view> utf8_units(std::string_view text) {
  std::vector<std::string_view> out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t len = sequence_length(text, i);
    out.push_back(text.substr(i, len));
    i += len;
  }
  return out;
}

Lexicon::Lexicon(std::map<std::string, std::uint64_t, std::less<>> entries) : entries_(std::move(entries)) {
  std::uint64_t unit = 0;
  for (const auto& [word, count] : entries_) {
    if (word.empty()) throw std::invalid_argument("lexicon word is empty");
    if (count == 0) throw std::invalid_argument("lexicon count must be positive for '" + word + "'");
    total_ += count;
    unit = std::gcd(unit, count);
    max_units_ = std::max(max_units_, utf8_units(word).size());
  }
  unit_ = entries_.empty() ? 1 : unit;
}

Lexicon Lexicon::read(std::istream& in) {
  if (!in) throw std::runtime_error("unreadable lexicon stream");
  std::map<std::string, std::uint64_t, std::less<>> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw std::runtime_error("lexicon line " + std::to_string(lineno) + ": expected word<TAB>count");
    }
    std::string word = line.substr(0, tab);
    std::uint64_t count = 0;
    try {
      std::size_t used = 0;
      count = std::stoull(line.substr(tab + 1), &used);
      if (used != line.size() - tab - 1) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw std::runtime_error("lexicon line " + std::to_string(lineno) + ": bad count");
    }
    entries[word] += count;
  }
  return Lexicon(std::move(entries));
}

void Lexicon::write(std::ostream& out) const {
  for (const auto& [word, count] : entries_) out << word << '\t' << count << '\n';
}

std::uint64_t Lexicon::frequency(std::string_view word) const {
  auto it = entries_.find(word);
  return it == entries_.end() ? 0 : it->second;
}

namespace {
constexpr double kTieTolerance = 1e-12;
}  // namespace

std::vector<std::string> tokenize(std::string_view text, const Lexicon& lex) {
  if (lex.empty()) throw std::invalid_argument("tokenize: lexicon is empty");
  const auto units = utf8_units(text);
  const std::size_t n = units.size();
  if (n == 0) return {};
  std::vector<std::size_t> offset(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) offset[i + 1] = offset[i] + units[i].size();

  const double total = static_cast<double>(lex.total());
  const double fallback_logp = std::log(static_cast<double>(lex.fallback_frequency()) / total);
  std::vector<double> best(n + 1, 0.0);
  std::vector<std::size_t> next(n + 1, n);
  for (std::size_t i = n; i-- > 0;) {
    bool found = false;
    double best_val = 0.0;
    std::size_t best_end = i + 1;
    const std::size_t max_len = std::min(lex.max_word_units(), n - i);
    for (std::size_t len = 1; len <= max_len; ++len) {
      std::string_view word = text.substr(offset[i], offset[i + len] - offset[i]);
      std::uint64_t f = lex.frequency(word);
      if (f == 0) continue;
      double val = std::log(static_cast<double>(f) / total) + best[i + len];
      // Lengths ascend, so accepting near-equal values keeps the longest
      // first token among ties. Exact ties in probability can differ in the
      // last bits of their log sums, hence the tolerance.
      if (!found || val >= best_val - kTieTolerance * std::max(1.0, std::abs(best_val))) {
        best_val = val;
        best_end = i + len;
        found = true;
      }
    }
    if (!found) {
      best_val = fallback_logp + best[i + 1];
      best_end = i + 1;
    }
    best[i] = best_val;
    next[i] = best_end;
  }
  std::vector<std::string> tokens;
  for (std::size_t i = 0; i < n; i = next[i]) {
    tokens.emplace_back(text.substr(offset[i], offset[next[i]] - offset[i]));
  }
  return tokens;
}

std::vector<std::string> whitespace_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  auto space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
  while (i < text.size()) {
    while (i < text.size() && space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !space(text[j])) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

double SentimentModel::likelihood(std::string_view token, bool positive) const {
  const auto& counts = positive ? pos_counts : neg_counts;
  const double total = static_cast<double>(positive ? pos_total : neg_total);
  auto it = counts.find(token);
  const double c = it == counts.end() ? 0.0 : static_cast<double>(it->second);
  return (c + alpha) / (total + alpha * static_cast<double>(vocab));
}

SentimentModel SentimentModel::swapped() const {
  SentimentModel m = *this;
  std::swap(m.pos_docs, m.neg_docs);
  std::swap(m.prior_pos, m.prior_neg);
  std::swap(m.pos_counts, m.neg_counts);
  std::swap(m.pos_total, m.neg_total);
  return m;
}

SentimentModel train_sentiment(std::span<const Tokens> pos_docs, std::span<const Tokens> neg_docs,
                               double alpha) {
  if (pos_docs.empty() || neg_docs.empty()) throw std::invalid_argument("training corpus is empty");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("smoothing alpha must be positive");
  SentimentModel m;
  m.alpha = alpha;
  m.pos_docs = pos_docs.size();
  m.neg_docs = neg_docs.size();
  const double n = static_cast<double>(m.pos_docs + m.neg_docs);
  m.prior_pos = static_cast<double>(m.pos_docs) / n;
  m.prior_neg = static_cast<double>(m.neg_docs) / n;
  std::set<std::string, std::less<>> vocab;
  for (const auto& doc : pos_docs) {
    for (const auto& t : doc) {
      ++m.pos_counts[t];
      ++m.pos_total;
      vocab.insert(t);
    }
  }
  for (const auto& doc : neg_docs) {
    for (const auto& t : doc) {
      ++m.neg_counts[t];
      ++m.neg_total;
      vocab.insert(t);
    }
  }
  m.vocab = std::max<std::size_t>(vocab.size(), 1);
  return m;
}

double score_tokens(const SentimentModel& model, std::span<const std::string> tokens) {
  std::map<std::string_view, std::uint64_t> bag;
  for (const auto& t : tokens) ++bag[t];
  // log-odds of negative over positive, summed in sorted token order
  double d = std::log(model.prior_neg) - std::log(model.prior_pos);
  for (const auto& [token, count] : bag) {
    double term = std::log(model.likelihood(token, false)) - std::log(model.likelihood(token, true));
    d += static_cast<double>(count) * term;
  }
  return 1.0 / (1.0 + std::exp(d));
}

double score_text(const SentimentModel& model, std::string_view text, const Lexicon& lex) {
  auto tokens = tokenize(text, lex);
  return score_tokens(model, tokens);
}

std::vector<double> score_texts(const SentimentModel& model, std::span<const std::string> texts,
                                const Lexicon& lex, int workers) {
  std::vector<double> out(texts.size(), 0.0);
  kernels::for_each_index(texts.size(), workers,
                          [&](std::size_t i) { out[i] = score_text(model, texts[i], lex); });
  return out;
}

bool is_punctuation_or_space(std::string_view token) {
  for (auto unit : utf8_units(token)) {
    if (!punct_or_space(decode(unit))) return false;
  }
  return true;
}

StopwordSet read_stopwords(std::istream& in) {
  StopwordSet out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.insert(line);
  }
  return out;
}

const StopwordSet& default_stopwords() {
  static const StopwordSet words = {
      "的", "了", "是", "在", "和", "也", "就", "都", "而", "及", "与", "着", "或", "被", "把",
      "这", "那", "之", "于", "啊", "吧", "呢", "吗", "哦", "我", "你", "他", "她", "它", "我们",
      "你们", "他们", "一个", "，", "。", "！", "？", "、", "：", "；", "“", "”", "（", "）",
      "《", "》", "…", "~", ",", ".", "!", "?", ":", ";", "#", "@",
  };
  return words;
}

std::string stopword_set_id(const StopwordSet& stopwords) {
  std::string joined;
  for (const auto& w : stopwords) {
    joined += w;
    joined += '\n';
  }
  return io::sha256_hex(joined).substr(0, 12);
}

WordFrequencyReport word_frequency(std::span<const std::string> docs, const Lexicon& lex,
                                   const StopwordSet& stopwords, std::size_t k) {
  if (k < 1) throw std::invalid_argument("word_frequency: k must be at least 1");
  WordFrequencyReport rep;
  rep.documents = docs.size();
  rep.stopword_set_id = stopword_set_id(stopwords);
  std::map<std::string, std::uint64_t> counts;
  for (const auto& doc : docs) {
    for (auto& tok : tokenize(doc, lex)) {
      if (stopwords.contains(tok) || is_punctuation_or_space(tok)) continue;
      ++counts[std::move(tok)];
      ++rep.counted_tokens;
    }
  }
  rep.ranked.assign(counts.begin(), counts.end());
  // map order is byte order, which for UTF-8 is code-point order
  std::stable_sort(rep.ranked.begin(), rep.ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (rep.ranked.size() > k) rep.ranked.resize(k);
  return rep;
}

void write_word_frequency_csv(std::ostream& out, const WordFrequencyReport& report) {
  out << "rank,token,count\n";
  std::size_t rank = 1;
  for (const auto& [token, count] : report.ranked) {
    out << rank++ << ',' << io::csv_field(token) << ',' << count << '\n';
  }
}

}  // namespace ua::textsent
