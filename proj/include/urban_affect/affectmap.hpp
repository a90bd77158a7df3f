#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "urban_affect/geo.hpp"
#include "urban_affect/ingest.hpp"
#include "urban_affect/kernels.hpp"

namespace ua::affectmap {

enum class Channel { Perception, Opinion };

std::string_view channel_name(Channel c);
std::optional<Channel> parse_channel(std::string_view name);

using kernels::Cell;

/// Cell values over a grid plus per-cell record support.
struct Layer {
  geo::Grid grid;
  std::vector<Cell> values;
  std::vector<std::uint32_t> support;

  std::size_t present_count() const;
};

struct ScoreRaster : Layer {
  Channel channel = Channel::Perception;
  int epoch = 0;
};

/// late - early; support is the smaller of the two epochs' support.
struct TrendRaster : Layer {
  Channel channel = Channel::Perception;
  int early_epoch = 0;
  int late_epoch = 0;
};

/// |normalized perception trend - normalized opinion trend| / 2.
struct MismatchRaster : Layer {
  double perception_scale = 0.0;  // max |trend| used to normalize
  double opinion_scale = 0.0;
};

struct ScoredPoint {
  std::string id;
  geo::GeoPoint point;
  double score = 0.0;
};

std::vector<ScoredPoint> scored_points(std::span<const ingest::PerceptionRecord> records, int epoch);
/// Throws std::invalid_argument if a record of the epoch has no score yet.
std::vector<ScoredPoint> scored_points(std::span<const ingest::OpinionRecord> records, int epoch);

struct AggregateResult {
  ScoreRaster raster;
  std::size_t skipped_outside = 0;
};

/// Mean score per cell, reducing records in ascending id order.
AggregateResult aggregate_cells(const geo::Grid& grid, std::vector<ScoredPoint> records, Channel channel,
                                int epoch, int workers = 1);

enum class SmoothMethod { None, Idw };

struct SmoothParams {
  SmoothMethod method = SmoothMethod::None;
  double power = 2.0;
  int radius = 1;
};

std::optional<SmoothMethod> parse_smooth_method(std::string_view name);

/// Fills missing cells by IDW when requested; present cells and support are
/// left untouched. Throws std::invalid_argument on bad parameters.
ScoreRaster smooth(const ScoreRaster& raster, const SmoothParams& params, int workers = 1);

/// Throws std::invalid_argument on grid/channel mismatch or equal epochs.
TrendRaster trend(const ScoreRaster& late, const ScoreRaster& early);

/// Throws std::invalid_argument on grid mismatch or wrong channels.
MismatchRaster mismatch(const TrendRaster& perception, const TrendRaster& opinion);

/// Largest |value| over present cells (0 when none).
double max_abs(std::span<const Cell> values);

/// Normalizes each input by its own max |value| and returns |a - b| / 2 per
/// cell. Symmetric in its arguments.
std::vector<Cell> overlay_normalized(std::span<const Cell> a, std::span<const Cell> b);

struct ScoreDistribution {
  std::array<double, 10> deciles{};
  double low = 0.0;   // share with score < 2
  double high = 0.0;  // share with score >= 8
  std::size_t n = 0;
  bool empty = true;
};

ScoreDistribution score_histogram(std::span<const double> scores);

nlohmann::ordered_json to_json(const ScoreDistribution& d);
nlohmann::ordered_json grid_to_json(const geo::Grid& grid);
geo::Grid grid_from_json(const nlohmann::json& j);

/// CSV "row,col,value,support" with missing cells omitted.
std::string layer_csv(const Layer& layer);

struct LayerStats {
  std::size_t present = 0;
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
};
LayerStats layer_stats(const Layer& layer);

/// Writes <stem>.csv and the <stem>.json sidecar into dir; returns the paths written.
std::vector<std::filesystem::path> write_raster(const std::filesystem::path& dir, const std::string& stem,
                                                const ScoreRaster& r);
std::vector<std::filesystem::path> write_raster(const std::filesystem::path& dir, const std::string& stem,
                                                const TrendRaster& r);
std::vector<std::filesystem::path> write_raster(const std::filesystem::path& dir, const std::string& stem,
                                                const MismatchRaster& r);

/// Loads a raster from its JSON sidecar (the CSV is found next to it).
ScoreRaster read_score_raster(const std::filesystem::path& sidecar);
TrendRaster read_trend_raster(const std::filesystem::path& sidecar);
MismatchRaster read_mismatch_raster(const std::filesystem::path& sidecar);

/// Kind recorded in a sidecar: "score", "trend" or "mismatch".
std::string sidecar_kind(const std::filesystem::path& sidecar);
Layer read_layer(const std::filesystem::path& sidecar);

}  // namespace ua::affectmap
