#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "urban_affect/geo.hpp"
#include "urban_affect/percept.hpp"

namespace ua::ingest {

struct PerceptionRecord {
  std::string id;
  geo::GeoPoint point;
  int epoch = 0;
  double score = 0.0;
  percept::SegmentVector segments{};

  bool operator==(const PerceptionRecord&) const = default;
};

struct OpinionRecord {
  std::string id;
  geo::GeoPoint point;
  int epoch = 0;
  std::string text;
  std::optional<double> score;  // 0-10; filled by the text scorer when absent

  bool operator==(const OpinionRecord&) const = default;
};

struct Rejection {
  std::size_t line = 0;  // 1-based
  std::string reason;
};

struct IngestReport {
  std::string channel;
  std::size_t total_lines = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::map<std::string, std::size_t> rejection_reasons;
  std::vector<Rejection> rejections;
  std::map<int, std::size_t> epoch_counts;
  // Filled by dataset_stats; coverage is NaN-free and 0 when there are no records.
  std::size_t inside_bbox = 0;
  double bbox_coverage = 0.0;
  std::map<std::size_t, std::size_t> occupancy_histogram;  // records per cell -> cells
};

struct IngestOptions {
  std::set<int> epochs;  // empty accepts any epoch
  int workers = 1;
};

template <class Record>
struct Parsed {
  std::vector<Record> records;
  IngestReport report;
};

/// Line-delimited JSON perception records. Malformed lines are rejected
/// with a reason; duplicate ids keep the first occurrence. Throws
/// std::runtime_error if the stream cannot be read.
Parsed<PerceptionRecord> parse_perception(std::istream& in, const IngestOptions& opts = {});
Parsed<OpinionRecord> parse_opinion(std::istream& in, const IngestOptions& opts = {});

/// Parses one line; returns the rejection reason on failure.
std::variant<PerceptionRecord, std::string> parse_perception_line(std::string_view line,
                                                                  const std::set<int>& epochs);
std::variant<OpinionRecord, std::string> parse_opinion_line(std::string_view line,
                                                            const std::set<int>& epochs);

std::string to_json_line(const PerceptionRecord& r);
std::string to_json_line(const OpinionRecord& r);

struct ZoningError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// GeoJSON FeatureCollection of Polygon/MultiPolygon features carrying a
/// "zone" property. Any invalid feature is fatal (ZoningError).
geo::ZoningSet parse_zoning(std::string_view document);

nlohmann::ordered_json zoning_to_geojson(const geo::ZoningSet& zones);

/// Per-epoch counts, bbox coverage and per-cell occupancy of parsed records.
IngestReport dataset_stats(std::span<const PerceptionRecord> records, const geo::Grid& grid);
IngestReport dataset_stats(std::span<const OpinionRecord> records, const geo::Grid& grid);

nlohmann::ordered_json to_json(const IngestReport& report);

}  // namespace ua::ingest
