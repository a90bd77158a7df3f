#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace ua::percept {

inline constexpr std::size_t kElementCount = 17;

/// Urban element classes of a segmentation vector, in positional order.
inline constexpr std::array<const char*, kElementCount> kElementNames = {
    "sky",  "building", "green",        "road",        "sidewalk",  "pedestrian",
    "transportation", "waterbody", "seating", "fence", "sign_and_symbols",
    "sign_lighting", "pole", "bicyclist", "pot", "animal", "trash",
};

using SegmentVector = std::array<double, kElementCount>;

inline constexpr double kNegativeClampTolerance = 1e-9;
inline constexpr double kSumTolerance = 1e-6;

/// Clamps entries in [-1e-9, 0) to zero and checks the proportion rules.
/// Throws std::invalid_argument on wrong arity, an entry outside
/// [-1e-9, 1], or a sum above 1 + 1e-6.
SegmentVector validate_segments(std::span<const double> v);

/// Score bin index 0..9: floor(score), with 10 folded into bin 9.
int bin_score(double score);

using RatingSheet = std::map<std::string, std::vector<double>>;

/// Mean rating per image. Ratings are summed in ascending value order so
/// the result does not depend on rater order.
std::map<std::string, double> aggregate_ratings(const RatingSheet& sheet);

/// Reads CSV "image_id,rater_id,score" with a header line.
RatingSheet read_rating_sheet(std::istream& in);

/// Writes CSV "image_id,mean_score,bin".
void write_labels(std::ostream& out, const std::map<std::string, double>& means);

/// Uniform sample of n ids without replacement, seeded. Ids are sorted
/// before sampling (partial Fisher-Yates with Xoshiro256::uniform_below) and
/// the sample is returned sorted.
std::vector<std::string> sample_for_annotation(std::vector<std::string> ids, std::size_t n,
                                               std::uint64_t seed);

}  // namespace ua::percept
