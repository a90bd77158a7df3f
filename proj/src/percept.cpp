#include "urban_affect/percept.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "urban_affect/io.hpp"
#include "urban_affect/rng.hpp"

namespace ua::percept {

SegmentVector validate_segments(std::span<const double> v) {
  if (v.size() != kElementCount) {
    throw std::invalid_argument("segment arity: expected 17 values, got " + std::to_string(v.size()));
  }
  SegmentVector out{};
  double sum = 0.0;
  for (std::size_t i = 0; i < kElementCount; ++i) {
    double x = v[i];
    if (!std::isfinite(x) || x < -kNegativeClampTolerance || x > 1.0) {
      throw std::invalid_argument(std::string("segment out of range: ") + kElementNames[i]);
    }
    out[i] = x < 0.0 ? 0.0 : x;
    sum += out[i];
  }
  if (sum > 1.0 + kSumTolerance) throw std::invalid_argument("segment sum exceeds 1");
  return out;
}

int bin_score(double score) {
  if (!(score >= 0.0 && score <= 10.0)) throw std::invalid_argument("score out of range [0, 10]");
  return std::min(static_cast<int>(std::floor(score)), 9);
}

std::map<std::string, double> aggregate_ratings(const RatingSheet& sheet) {
  std::map<std::string, double> means;
  for (const auto& [id, ratings] : sheet) {
    if (ratings.empty()) throw std::invalid_argument("image '" + id + "' has no ratings");
    std::vector<double> sorted = ratings;
    std::sort(sorted.begin(), sorted.end());
    double sum = 0.0;
    for (double r : sorted) {
      if (!(r >= 0.0 && r <= 10.0)) throw std::invalid_argument("rating out of range for image '" + id + "'");
      sum += r;
    }
    means[id] = sum / static_cast<double>(sorted.size());
  }
  return means;
}

RatingSheet read_rating_sheet(std::istream& in) {
  RatingSheet sheet;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = io::split_csv_line(line);
    if (lineno == 1 && !fields.empty() && fields[0] == "image_id") continue;
    if (fields.size() != 3) {
      throw std::runtime_error("rating sheet line " + std::to_string(lineno) + ": expected 3 fields");
    }
    double score = io::parse_double(fields[2]);
    if (!(score >= 0.0 && score <= 10.0)) {
      throw std::runtime_error("rating sheet line " + std::to_string(lineno) + ": score out of range");
    }
    sheet[fields[0]].push_back(score);
  }
  return sheet;
}

void write_labels(std::ostream& out, const std::map<std::string, double>& means) {
  out << "image_id,mean_score,bin\n";
  for (const auto& [id, mean] : means) {
    out << io::csv_field(id) << ',' << io::format_double(mean) << ',' << bin_score(mean) << '\n';
  }
}

std::vector<std::string> sample_for_annotation(std::vector<std::string> ids, std::size_t n,
                                               std::uint64_t seed) {
  if (n > ids.size()) throw std::invalid_argument("sample size exceeds population");
  std::sort(ids.begin(), ids.end());
  Xoshiro256 rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    auto j = i + static_cast<std::size_t>(rng.uniform_below(ids.size() - i));
    std::swap(ids[i], ids[j]);
  }
  ids.resize(n);
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace ua::percept
