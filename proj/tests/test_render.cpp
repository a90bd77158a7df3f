#include <doctest.h>

#include "support/property.hpp"
#include "urban_affect/io.hpp"
#include "urban_affect/render.hpp"

using namespace ua;
using namespace ua::render;

namespace {

affectmap::Layer layer(const geo::Grid& g, std::vector<affectmap::Cell> values) {
  affectmap::Layer l;
  l.grid = g;
  l.support.assign(values.size(), 1);
  l.values = std::move(values);
  return l;
}

Rgb pixel(const std::string& ppm, std::size_t header, int width, int x, int y) {
  const std::size_t o = header + (static_cast<std::size_t>(y) * width + x) * 3;
  return {static_cast<std::uint8_t>(ppm[o]), static_cast<std::uint8_t>(ppm[o + 1]),
          static_cast<std::uint8_t>(ppm[o + 2])};
}

}  // namespace

TEST_CASE("ramp endpoints and midpoint") {
  const auto seq = score_ramp();
  CHECK(ramp_color(0, seq, {0, 10}) == Rgb{247, 251, 255});
  CHECK(ramp_color(5, seq, {0, 10}) == Rgb{128, 150, 181});
  CHECK(ramp_color(10, seq, {0, 10}) == Rgb{8, 48, 107});
  CHECK(ramp_color(42, seq, {0, 10}) == Rgb{8, 48, 107});  // clamped
  CHECK(ramp_color(1, mismatch_ramp(), {0, 1}) == Rgb{0, 0, 0});
  CHECK(ramp_color(0, mismatch_ramp(), {0, 1}) == Rgb{255, 255, 255});
  const auto div = trend_ramp();
  CHECK(ramp_color(0, div, {-3, 3}) == Rgb{255, 255, 255});
  CHECK(ramp_color(-3, div, {-3, 3}) == Rgb{202, 0, 32});
  CHECK(ramp_color(3, div, {-3, 3}) == Rgb{5, 113, 176});
  CHECK_THROWS_AS(ramp_color(0, seq, {1, 1}), std::invalid_argument);
}

TEST_CASE("2x2 golden image") {
  const auto g = geo::make_grid({0, 0, 2, 2}, 1.0);
  const auto ppm = render_raster(layer(g, {0.0, 5.0, std::nullopt, 10.0}), score_ramp(), {0, 10}, 2);
  CHECK(ppm == io::read_file(std::string(UA_GOLDEN_DIR) + "/render_2x2.ppm"));
}

TEST_CASE("single cells and missing data") {
  const auto one = geo::make_grid({0, 0, 1, 1}, 1.0);
  CHECK(render_raster(layer(one, {10.0}), score_ramp(), {0, 10}) == std::string("P6\n1 1\n255\n\x08\x30\x6b", 14));
  const auto g = geo::make_grid({0, 0, 3, 2}, 1.0);
  const auto ppm = render_raster(layer(g, std::vector<affectmap::Cell>(6)), score_ramp(), {0, 10});
  const std::string header = "P6\n3 2\n255\n";
  CHECK(ppm.substr(0, header.size()) == header);
  for (int y = 0; y < 2; ++y) {
    for (int x = 0; x < 3; ++x) CHECK(pixel(ppm, header.size(), 3, x, y) == kMissingColor);
  }
  CHECK_THROWS_AS(render_raster(layer(g, {}), score_ramp(), {0, 10}), std::invalid_argument);
  CHECK_THROWS_AS(render_raster(layer(one, {1.0}), score_ramp(), {0, 10}, 0), std::invalid_argument);
}

TEST_CASE("trend domain is symmetric") {
  const auto g = geo::make_grid({0, 0, 3, 1}, 1.0);
  const auto d = trend_domain(layer(g, {-1.0, 2.5, std::nullopt}));
  CHECK(d.min == -2.5);
  CHECK(d.max == 2.5);
  const auto z = trend_domain(layer(g, {0.0, 0.0, std::nullopt}));
  CHECK(z.min == -1.0);
  CHECK(z.max == 1.0);
}

TEST_CASE("geojson export") {
  const auto one = geo::make_grid({10, 20, 11, 21}, 1.0);
  auto fc = export_geojson(layer(one, {3.5}));
  REQUIRE(fc["features"].size() == 1);
  const auto& ring = fc["features"][0]["geometry"]["coordinates"][0];
  REQUIRE(ring.size() == 5);
  CHECK(ring[0] == ring[4]);
  std::set<std::pair<double, double>> corners;
  for (int i = 0; i < 4; ++i) corners.insert({ring[i][0].get<double>(), ring[i][1].get<double>()});
  CHECK(corners == std::set<std::pair<double, double>>{{10, 20}, {11, 20}, {10, 21}, {11, 21}});
  // counter-clockwise outer ring
  double area2 = 0;
  for (int i = 0; i < 4; ++i) {
    area2 += ring[i][0].get<double>() * ring[i + 1][1].get<double>() - ring[i + 1][0].get<double>() * ring[i][1].get<double>();
  }
  CHECK(area2 > 0);

  const auto g = geo::make_grid({0, 0, 3, 2}, 1.0);
  auto sparse = export_geojson(layer(g, {1.0, std::nullopt, 2.0, std::nullopt, std::nullopt, 3.0}));
  CHECK(sparse["features"].size() == 3);
}

TEST_CASE("exported cells locate back to themselves") {
  const auto g = geo::make_grid(geo::BoundingBox::study_region(), 0.006);
  std::vector<affectmap::Cell> v(g.cell_count());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = static_cast<double>(k % 11);
  const auto fc = export_geojson(layer(g, v));
  REQUIRE(fc["features"].size() == g.cell_count());
  for (const auto& f : fc["features"]) {
    const auto& ring = f["geometry"]["coordinates"][0];
    double lon = 0, lat = 0;
    for (int i = 0; i < 4; ++i) {
      lon += ring[i][0].get<double>() / 4;
      lat += ring[i][1].get<double>() / 4;
    }
    const auto c = g.locate({lon, lat});
    REQUIRE(c);
    CHECK(c->row == f["properties"]["row"].get<int>());
    CHECK(c->col == f["properties"]["col"].get<int>());
  }
}

TEST_CASE("property: ramp channels are monotone along each segment") {
  prop::for_cases(91, prop::kDefaultCases, [](Xoshiro256& rng, int) {
    const ColorRamp ramps[] = {score_ramp(), trend_ramp(), mismatch_ramp()};
    const auto& ramp = ramps[rng.uniform_below(3)];
    const Domain d{-1.0, 1.0};
    double a = rng.uniform(-1, 1), b = rng.uniform(-1, 1);
    if (a > b) std::swap(a, b);
    if (ramp.kind == RampKind::Diverging && a < 0 && b > 0) b = 0;  // stay on one segment
    const Rgb ca = ramp_color(a, ramp, d), cb = ramp_color(b, ramp, d);
    auto ends = [&](double v) {
      if (ramp.kind != RampKind::Diverging) return std::pair{ramp.low, ramp.high};
      return v <= 0 ? std::pair{ramp.low, ramp.mid} : std::pair{ramp.mid, ramp.high};
    };
    const auto [lo, hi] = ends(a < 0 ? a : b);
    auto check = [](int from, int to, int x, int y) {
      if (to >= from) {
        CHECK(x <= y);
      } else {
        CHECK(x >= y);
      }
    };
    check(lo.r, hi.r, ca.r, cb.r);
    check(lo.g, hi.g, ca.g, cb.g);
    check(lo.b, hi.b, ca.b, cb.b);
  });
}

TEST_CASE("property: every present cell renders as its ramp colour") {
  prop::for_cases(92, prop::kDefaultCases, [](Xoshiro256& rng, int) {
    const int rows = prop::uniform_int(rng, 1, 6), cols = prop::uniform_int(rng, 1, 6);
    const auto g = geo::make_grid({0, 0, static_cast<double>(cols), static_cast<double>(rows)}, 1.0);
    std::vector<affectmap::Cell> v(g.cell_count());
    for (auto& c : v) {
      if (rng.uniform01() < 0.8) c = rng.uniform(0, 10);
    }
    const int scale = prop::uniform_int(rng, 1, 3);
    const auto l = layer(g, v);
    const auto ppm = render_raster(l, score_ramp(), {0, 10}, scale);
    CHECK(ppm == render_raster(l, score_ramp(), {0, 10}, scale));
    const std::string header = "P6\n" + std::to_string(cols * scale) + " " + std::to_string(rows * scale) + "\n255\n";
    REQUIRE(ppm.size() == header.size() + static_cast<std::size_t>(rows * cols * scale * scale * 3));
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        const auto& cell = v[g.flat({r, c})];
        const Rgb want = cell ? ramp_color(*cell, score_ramp(), {0, 10}) : kMissingColor;
        CHECK(pixel(ppm, header.size(), cols * scale, c * scale + scale - 1, r * scale + scale - 1) == want);
      }
    }
  });
}
