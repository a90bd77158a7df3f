#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ua::geo {

struct GeoPoint {
  double lon = 0.0;
  double lat = 0.0;

  bool valid() const { return lon >= -180.0 && lon <= 180.0 && lat >= -90.0 && lat <= 90.0; }
  bool operator==(const GeoPoint&) const = default;
};

struct BoundingBox {
  double west = 0.0;
  double south = 0.0;
  double east = 0.0;
  double north = 0.0;

  bool valid() const { return west < east && south < north; }
  bool contains(GeoPoint p) const {
    return p.lon >= west && p.lon <= east && p.lat >= south && p.lat <= north;
  }
  bool operator==(const BoundingBox&) const = default;

  /// Second-ring area of central Beijing, the default study region.
  static BoundingBox study_region() { return {116.343615, 39.868876, 116.460898, 39.963175}; }
};

struct CellIndex {
  int row = 0;
  int col = 0;
  auto operator<=>(const CellIndex&) const = default;
};

/// Uniform square-cell raster over a bounding box. Row 0 is the northernmost
/// band; the last row/column may extend past the box and is clipped to it.
class Grid {
 public:
  Grid() = default;
  Grid(BoundingBox bbox, double cell_size);

  const BoundingBox& bbox() const { return bbox_; }
  double cell_size() const { return cell_size_; }
  int n_cols() const { return n_cols_; }
  int n_rows() const { return n_rows_; }
  std::size_t cell_count() const { return static_cast<std::size_t>(n_cols_) * n_rows_; }

  /// Cell holding p, or nullopt when p lies outside the bounding box.
  /// Points on the east/south edge belong to the last column/row.
  std::optional<CellIndex> locate(GeoPoint p) const;

  /// Centre of the cell's footprint intersected with the bounding box.
  GeoPoint cell_center(int row, int col) const;

  /// Cell footprint clipped to the bounding box.
  BoundingBox cell_bounds(int row, int col) const;

  std::size_t flat(CellIndex c) const { return static_cast<std::size_t>(c.row) * n_cols_ + c.col; }
  CellIndex unflat(std::size_t i) const {
    return {static_cast<int>(i / n_cols_), static_cast<int>(i % n_cols_)};
  }

  bool operator==(const Grid&) const = default;

 private:
  BoundingBox bbox_{};
  double cell_size_ = 0.0;
  int n_cols_ = 0;
  int n_rows_ = 0;
};

/// Throws std::invalid_argument on a non-positive cell size or degenerate box.
Grid make_grid(const BoundingBox& bbox, double cell_size);

inline constexpr double kDefaultCellSize = 0.001;

// Land-use categories, in the order the zoning legend lists them.
enum class Zone {
  ResidentialAndPublicInfrastructure,
  Industry,
  Storage,
  ExternalTransportation,
  RoadAndPlaza,
  Municipality,
  Green,
  Special,
  WaterAndOthers,
  Road,
};

inline constexpr std::size_t kZoneCount = 10;

std::string_view zone_name(Zone z);
std::optional<Zone> parse_zone(std::string_view name);
const std::array<Zone, kZoneCount>& all_zones();
/// Label used for points no zone polygon contains.
inline constexpr std::string_view kUnzonedName = "Unzoned";

using Ring = std::vector<GeoPoint>;

struct ZonePolygon {
  Zone label{};
  std::vector<Ring> rings;  // rings[0] outer, the rest holes
  double area = 0.0;        // squared degrees, holes subtracted
};

using ZoningSet = std::vector<ZonePolygon>;

/// Absolute shoelace area of a single ring.
double ring_area(const Ring& ring);

/// Validates ring sizes and outer-ring simplicity, then fills in the area.
/// Throws std::invalid_argument when an invariant fails.
ZonePolygon make_zone_polygon(Zone label, std::vector<Ring> rings);

bool ring_is_simple(const Ring& ring);

/// Even-odd test across all rings; points on any ring boundary count as inside.
bool point_in_polygon(GeoPoint p, const ZonePolygon& poly);

/// Smallest-area containing polygon wins; equal areas fall back to label text.
std::optional<Zone> assign_zone(GeoPoint p, const ZoningSet& zones);

}  // namespace ua::geo
