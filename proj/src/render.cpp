#include "urban_affect/render.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ua::render {

ColorRamp score_ramp() { return {RampKind::Sequential, {247, 251, 255}, {}, {8, 48, 107}}; }

ColorRamp trend_ramp() { return {RampKind::Diverging, {202, 0, 32}, {255, 255, 255}, {5, 113, 176}}; }

ColorRamp mismatch_ramp() { return {RampKind::GrayscaleInverted, {255, 255, 255}, {}, {0, 0, 0}}; }

namespace {

std::uint8_t lerp_channel(std::uint8_t a, std::uint8_t b, double t) {
  const double v = static_cast<double>(a) + t * (static_cast<double>(b) - static_cast<double>(a));
  // std::round rounds half away from zero
  return static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
}

Rgb lerp(Rgb a, Rgb b, double t) {
  return {lerp_channel(a.r, b.r, t), lerp_channel(a.g, b.g, t), lerp_channel(a.b, b.b, t)};
}

}  // namespace

Rgb ramp_color(double value, const ColorRamp& ramp, const Domain& domain) {
  if (!(domain.min < domain.max)) throw std::invalid_argument("ramp domain must satisfy min < max");
  const double v = std::clamp(value, domain.min, domain.max);
  const double t = (v - domain.min) / (domain.max - domain.min);
  if (ramp.kind == RampKind::Diverging) {
    if (t == 0.5) return ramp.mid;
    if (t < 0.5) return lerp(ramp.low, ramp.mid, t * 2.0);
    return lerp(ramp.mid, ramp.high, (t - 0.5) * 2.0);
  }
  return lerp(ramp.low, ramp.high, t);
}

std::string render_raster(const affectmap::Layer& layer, const ColorRamp& ramp, const Domain& domain, int scale) {
  if (layer.grid.cell_count() == 0 || layer.values.empty()) throw std::invalid_argument("render: raster is empty");
  if (layer.values.size() != layer.grid.cell_count()) throw std::invalid_argument("render: value count does not match grid");
  if (scale < 1) throw std::invalid_argument("render: scale must be at least 1");
  const int width = layer.grid.n_cols() * scale;
  const int height = layer.grid.n_rows() * scale;
  std::string out = "P6\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  const std::size_t header = out.size();
  out.resize(header + static_cast<std::size_t>(width) * height * 3);

  std::vector<Rgb> colors(layer.values.size());
  for (std::size_t k = 0; k < colors.size(); ++k) {
    colors[k] = layer.values[k] ? ramp_color(*layer.values[k], ramp, domain) : kMissingColor;
  }
  for (int y = 0; y < height; ++y) {
    const int row = y / scale;
    char* line = out.data() + header + static_cast<std::size_t>(y) * width * 3;
    for (int x = 0; x < width; ++x) {
      const Rgb& c = colors[layer.grid.flat({row, x / scale})];
      line[3 * x] = static_cast<char>(c.r);
      line[3 * x + 1] = static_cast<char>(c.g);
      line[3 * x + 2] = static_cast<char>(c.b);
    }
  }
  return out;
}

Domain trend_domain(const affectmap::Layer& layer) {
  const double m = affectmap::max_abs(layer.values);
  if (m == 0.0) return {-1.0, 1.0};
  return {-m, m};
}

nlohmann::ordered_json export_geojson(const affectmap::Layer& layer) {
  nlohmann::ordered_json fc;
  fc["type"] = "FeatureCollection";
  fc["features"] = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < layer.values.size(); ++k) {
    if (!layer.values[k]) continue;
    const auto idx = layer.grid.unflat(k);
    const auto b = layer.grid.cell_bounds(idx.row, idx.col);
    nlohmann::ordered_json ring = nlohmann::ordered_json::array(
        {{b.west, b.north}, {b.west, b.south}, {b.east, b.south}, {b.east, b.north}, {b.west, b.north}});
    nlohmann::ordered_json f;
    f["type"] = "Feature";
    f["properties"] = {{"row", idx.row}, {"col", idx.col}, {"value", *layer.values[k]}, {"support", layer.support[k]}};
    f["geometry"] = {{"type", "Polygon"}, {"coordinates", nlohmann::ordered_json::array({ring})}};
    fc["features"].push_back(std::move(f));
  }
  return fc;
}

}  // namespace ua::render
