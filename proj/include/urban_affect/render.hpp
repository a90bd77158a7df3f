#pragma once

#include <array>
#include <cstdint>
#include <string>

#include <json.hpp>

#include "urban_affect/affectmap.hpp"

namespace ua::render {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  bool operator==(const Rgb&) const = default;
};

enum class RampKind { Sequential, Diverging, GrayscaleInverted };

/// Two anchors (low, high) or three for diverging ramps (low, mid, high).
struct ColorRamp {
  RampKind kind = RampKind::Sequential;
  Rgb low;
  Rgb mid;  // used by diverging ramps only
  Rgb high;
};

struct Domain {
  double min = 0.0;
  double max = 1.0;
};

/// White to dark blue; darker is more positive.
ColorRamp score_ramp();
/// Red (decrease) through white to blue (increase).
ColorRamp trend_ramp();
/// White to black; blacker is a greater mismatch.
ColorRamp mismatch_ramp();

inline constexpr Rgb kMissingColor{200, 200, 200};

/// Clamp to the domain, map linearly onto the ramp, interpolate each channel
/// and round half away from zero. Throws std::invalid_argument if
/// domain.min >= domain.max.
Rgb ramp_color(double value, const ColorRamp& ramp, const Domain& domain);

/// Binary PPM (P6), one scale x scale block per cell, rows north to south.
/// Throws std::invalid_argument for an empty layer or scale < 1.
std::string render_raster(const affectmap::Layer& layer, const ColorRamp& ramp, const Domain& domain,
                          int scale = 1);

/// Symmetric domain [-m, m] with m = max |value| (1 when the layer is all zero).
Domain trend_domain(const affectmap::Layer& layer);

/// One square Polygon Feature per present cell with {row, col, value, support}.
nlohmann::ordered_json export_geojson(const affectmap::Layer& layer);

}  // namespace ua::render
