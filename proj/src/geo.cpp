#include "urban_affect/geo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ua::geo {

namespace {

// Guards the ceil in the cell count against quotients like 3.0000000000000004.
constexpr double kCountSlack = 1e-9;

int cell_count_along(double extent, double cell_size) {
  double q = extent / cell_size;
  auto n = static_cast<long long>(std::ceil(q - kCountSlack));
  if (n < 1) n = 1;
  if (n > 1'000'000) throw std::invalid_argument("grid too large: more than 1e6 cells along one axis");
  return static_cast<int>(n);
}

double cross(GeoPoint o, GeoPoint a, GeoPoint b) {
  return (a.lon - o.lon) * (b.lat - o.lat) - (a.lat - o.lat) * (b.lon - o.lon);
}

bool on_segment(GeoPoint p, GeoPoint a, GeoPoint b) {
  double c = cross(a, b, p);
  double scale = std::max({std::abs(b.lon - a.lon), std::abs(b.lat - a.lat), 1e-300});
  if (std::abs(c) > 1e-12 * scale) return false;
  return p.lon >= std::min(a.lon, b.lon) && p.lon <= std::max(a.lon, b.lon) &&
         p.lat >= std::min(a.lat, b.lat) && p.lat <= std::max(a.lat, b.lat);
}

int sign(double v) { return (v > 0) - (v < 0); }

bool segments_intersect(GeoPoint a, GeoPoint b, GeoPoint c, GeoPoint d) {
  int d1 = sign(cross(c, d, a));
  int d2 = sign(cross(c, d, b));
  int d3 = sign(cross(a, b, c));
  int d4 = sign(cross(a, b, d));
  if (d1 * d2 < 0 && d3 * d4 < 0) return true;
  return (d1 == 0 && on_segment(a, c, d)) || (d2 == 0 && on_segment(b, c, d)) ||
         (d3 == 0 && on_segment(c, a, b)) || (d4 == 0 && on_segment(d, a, b));
}

// Drops a duplicated closing vertex, as GeoJSON rings carry one.
Ring open_ring(Ring ring) {
  if (ring.size() >= 2 && ring.front() == ring.back()) ring.pop_back();
  return ring;
}

}  // namespace

Grid::Grid(BoundingBox bbox, double cell_size) : bbox_(bbox), cell_size_(cell_size) {
  if (!(cell_size > 0.0) || !std::isfinite(cell_size)) {
    throw std::invalid_argument("cell_size must be positive");
  }
  if (!bbox.valid()) throw std::invalid_argument("bounding box is degenerate (need west < east, south < north)");
  n_cols_ = cell_count_along(bbox.east - bbox.west, cell_size);
  n_rows_ = cell_count_along(bbox.north - bbox.south, cell_size);
}

std::optional<CellIndex> Grid::locate(GeoPoint p) const {
  if (!bbox_.contains(p)) return std::nullopt;
  auto col = static_cast<int>(std::floor((p.lon - bbox_.west) / cell_size_));
  auto row = static_cast<int>(std::floor((bbox_.north - p.lat) / cell_size_));
  col = std::clamp(col, 0, n_cols_ - 1);
  row = std::clamp(row, 0, n_rows_ - 1);
  return CellIndex{row, col};
}

BoundingBox Grid::cell_bounds(int row, int col) const {
  BoundingBox b;
  b.west = bbox_.west + col * cell_size_;
  b.east = std::min(bbox_.west + (col + 1) * cell_size_, bbox_.east);
  b.north = bbox_.north - row * cell_size_;
  b.south = std::max(bbox_.north - (row + 1) * cell_size_, bbox_.south);
  return b;
}

GeoPoint Grid::cell_center(int row, int col) const {
  BoundingBox b = cell_bounds(row, col);
  return {0.5 * (b.west + b.east), 0.5 * (b.south + b.north)};
}

Grid make_grid(const BoundingBox& bbox, double cell_size) { return Grid(bbox, cell_size); }

namespace {
constexpr std::array<std::string_view, kZoneCount> kZoneNames = {
    "Residential and public Infrastructure",
    "Industry",
    "Storage",
    "External Transportation",
    "Road and Plaza",
    "Municipality",
    "Green",
    "Special",
    "Water and Others",
    "Road",
};
}  // namespace

std::string_view zone_name(Zone z) { return kZoneNames.at(static_cast<std::size_t>(z)); }

std::optional<Zone> parse_zone(std::string_view name) {
  for (std::size_t i = 0; i < kZoneCount; ++i) {
    if (kZoneNames[i] == name) return static_cast<Zone>(i);
  }
  return std::nullopt;
}

const std::array<Zone, kZoneCount>& all_zones() {
  static const std::array<Zone, kZoneCount> zones = [] {
    std::array<Zone, kZoneCount> z{};
    for (std::size_t i = 0; i < kZoneCount; ++i) z[i] = static_cast<Zone>(i);
    return z;
  }();
  return zones;
}

double ring_area(const Ring& ring) {
  double twice = 0.0;
  const std::size_t n = ring.size();
  for (std::size_t i = 0; i < n; ++i) {
    const GeoPoint& a = ring[i];
    const GeoPoint& b = ring[(i + 1) % n];
    twice += a.lon * b.lat - b.lon * a.lat;
  }
  return std::abs(twice) * 0.5;
}

bool ring_is_simple(const Ring& ring) {
  const std::size_t n = ring.size();
  for (std::size_t i = 0; i < n; ++i) {
    GeoPoint a = ring[i], b = ring[(i + 1) % n];
    for (std::size_t j = i + 1; j < n; ++j) {
      // adjacent edges share a vertex by construction
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      GeoPoint c = ring[j], d = ring[(j + 1) % n];
      if (segments_intersect(a, b, c, d)) return false;
    }
  }
  return true;
}

ZonePolygon make_zone_polygon(Zone label, std::vector<Ring> rings) {
  if (rings.empty()) throw std::invalid_argument("polygon has no rings");
  ZonePolygon poly;
  poly.label = label;
  for (auto& r : rings) {
    Ring open = open_ring(std::move(r));
    if (open.size() < 3) throw std::invalid_argument("polygon ring has fewer than 3 vertices");
    for (const auto& p : open) {
      if (!std::isfinite(p.lon) || !std::isfinite(p.lat) || !p.valid()) {
        throw std::invalid_argument("polygon vertex out of range");
      }
    }
    poly.rings.push_back(std::move(open));
  }
  if (!ring_is_simple(poly.rings.front())) throw std::invalid_argument("outer ring is self-intersecting");
  double area = ring_area(poly.rings.front());
  for (std::size_t i = 1; i < poly.rings.size(); ++i) area -= ring_area(poly.rings[i]);
  if (!(area > 0.0)) throw std::invalid_argument("polygon area is not positive");
  poly.area = area;
  return poly;
}

bool point_in_polygon(GeoPoint p, const ZonePolygon& poly) {
  bool inside = false;
  for (const Ring& ring : poly.rings) {
    const std::size_t n = ring.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const GeoPoint& a = ring[i];
      const GeoPoint& b = ring[j];
      if (on_segment(p, a, b)) return true;
      if ((a.lat > p.lat) != (b.lat > p.lat)) {
        double x = a.lon + (p.lat - a.lat) * (b.lon - a.lon) / (b.lat - a.lat);
        if (p.lon < x) inside = !inside;
      }
    }
  }
  return inside;
}

std::optional<Zone> assign_zone(GeoPoint p, const ZoningSet& zones) {
  const ZonePolygon* best = nullptr;
  for (const auto& poly : zones) {
    if (!point_in_polygon(p, poly)) continue;
    if (best == nullptr || poly.area < best->area ||
        (poly.area == best->area && zone_name(poly.label) < zone_name(best->label))) {
      best = &poly;
    }
  }
  if (best == nullptr) return std::nullopt;
  return best->label;
}

}  // namespace ua::geo
