#include <doctest.h>

#include <filesystem>

#include "support/oracles.hpp"
#include "support/property.hpp"
#include "urban_affect/affectmap.hpp"

using namespace ua;
using namespace ua::affectmap;

namespace {

const geo::Grid kGrid = geo::make_grid({0, 0, 4, 3}, 1.0);  // 3 rows x 4 cols

ScoredPoint pt(const std::string& id, double lon, double lat, double score) { return {id, {lon, lat}, score}; }

ScoreRaster raster_of(std::vector<Cell> values, int epoch = 2016, Channel ch = Channel::Perception) {
  ScoreRaster r;
  r.grid = kGrid;
  r.channel = ch;
  r.epoch = epoch;
  r.support.assign(values.size(), 0);
  for (std::size_t k = 0; k < values.size(); ++k) r.support[k] = values[k] ? 1 : 0;
  r.values = std::move(values);
  return r;
}

TrendRaster trend_of(std::vector<Cell> values, Channel ch) {
  TrendRaster t;
  t.grid = kGrid;
  t.channel = ch;
  t.early_epoch = 2016;
  t.late_epoch = 2022;
  t.support.assign(values.size(), 1);
  t.values = std::move(values);
  return t;
}

std::vector<Cell> missing_cells() { return std::vector<Cell>(kGrid.cell_count()); }

}  // namespace

TEST_CASE("aggregate cells") {
  auto r = aggregate_cells(kGrid, {pt("x1", 0.5, 2.5, 5), pt("x2", 0.6, 2.4, 7)}, Channel::Perception, 2016);
  CHECK(*r.raster.values[0] == 6.0);
  CHECK(r.raster.support[0] == 2);
  CHECK_FALSE(r.raster.values[1]);
  CHECK(r.raster.support[1] == 0);

  auto three = aggregate_cells(kGrid, {pt("a", 1.5, 0.5, 2), pt("b", 3.5, 0.5, 4), pt("c", 3.2, 0.2, 8), pt("d", 9, 9, 1)},
                               Channel::Opinion, 2022);
  CHECK(*three.raster.values[kGrid.flat({2, 1})] == 2.0);
  CHECK(*three.raster.values[kGrid.flat({2, 3})] == 6.0);
  CHECK(three.skipped_outside == 1);
  CHECK(three.raster.present_count() == 2);
}

TEST_CASE("idw smoothing") {
  auto cells = missing_cells();
  // target (1,1); neighbours at distance 1 (1,2) and 2 (1,3)
  cells[kGrid.flat({1, 2})] = 4.0;
  cells[kGrid.flat({1, 3})] = 8.0;
  auto r = raster_of(cells);
  SmoothParams p;
  p.method = SmoothMethod::Idw;
  p.power = 2;
  p.radius = 2;
  auto s = smooth(r, p);
  CHECK(*s.values[kGrid.flat({1, 1})] == doctest::Approx(4.8).epsilon(1e-15));
  CHECK(*s.values[kGrid.flat({1, 2})] == 4.0);  // present cells unchanged
  CHECK(s.support == r.support);

  p.radius = 1;
  auto near = smooth(r, p);
  CHECK_FALSE(near.values[kGrid.flat({1, 0})]);  // nothing within radius 1

  auto flat = missing_cells();
  for (int c = 0; c < 4; ++c) flat[kGrid.flat({0, c})] = 3.25;
  auto f = smooth(raster_of(flat), p);
  CHECK(*f.values[kGrid.flat({1, 1})] == 3.25);

  SmoothParams none;
  CHECK(smooth(r, none).values == r.values);
}

TEST_CASE("trend") {
  auto late = missing_cells(), early = missing_cells();
  late[0] = 6.0;
  early[0] = 6.0;
  late[1] = 5.5;
  early[1] = 8.0;
  late[2] = 1.0;
  early[3] = 1.0;
  auto t = trend(raster_of(late, 2022), raster_of(early, 2016));
  CHECK(*t.values[0] == 0.0);
  CHECK(*t.values[1] == -2.5);
  CHECK_FALSE(t.values[2]);
  CHECK_FALSE(t.values[3]);
  CHECK(t.early_epoch == 2016);
  CHECK(t.late_epoch == 2022);
  CHECK_THROWS_AS(trend(raster_of(late, 2016), raster_of(early, 2016)), std::invalid_argument);
  CHECK_THROWS_AS(trend(raster_of(late, 2022), raster_of(early, 2016, Channel::Opinion)), std::invalid_argument);
}

TEST_CASE("mismatch") {
  auto p = missing_cells(), o = missing_cells();
  p[0] = -2.5;
  o[0] = 1.0;
  p[1] = 1.0;
  o[1] = -2.0;
  auto m = mismatch(trend_of(p, Channel::Perception), trend_of(o, Channel::Opinion));
  CHECK(*m.values[0] == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(m.perception_scale == 2.5);
  CHECK(m.opinion_scale == 2.0);

  auto same = mismatch(trend_of(p, Channel::Perception), trend_of(p, Channel::Opinion));
  for (const auto& v : same.values) {
    if (v) CHECK(*v == 0.0);
  }
  auto zeros = missing_cells();
  zeros[0] = 0.0;
  zeros[5] = 0.0;
  auto z = mismatch(trend_of(zeros, Channel::Perception), trend_of(zeros, Channel::Opinion));
  CHECK(*z.values[0] == 0.0);
  CHECK(*z.values[5] == 0.0);
  CHECK_THROWS_AS(mismatch(trend_of(p, Channel::Opinion), trend_of(o, Channel::Perception)), std::invalid_argument);
}

TEST_CASE("score histogram") {
  const std::vector<double> s = {1.5, 0.2, 9.1, 8.4, 5.0};
  auto d = score_histogram(s);
  CHECK(d.low == doctest::Approx(0.4));
  CHECK(d.high == doctest::Approx(0.4));
  CHECK(d.n == 5);
  auto ten = score_histogram(std::vector<double>{10.0});
  CHECK(ten.high == 1.0);
  CHECK(ten.deciles[9] == 1.0);
  auto empty = score_histogram({});
  CHECK(empty.n == 0);
  CHECK(empty.low == 0.0);
  CHECK(empty.high == 0.0);
}

TEST_CASE("raster files round-trip") {
  auto dir = std::filesystem::temp_directory_path() / "ua_test_affectmap";
  std::filesystem::remove_all(dir);
  auto cells = missing_cells();
  cells[0] = 1.0 / 3.0;
  cells[7] = 9.75;
  auto r = raster_of(cells, 2022, Channel::Opinion);
  write_raster(dir, "score", r);
  auto back = read_score_raster(dir / "score.json");
  CHECK(back.values == r.values);
  CHECK(back.support == r.support);
  CHECK(back.grid == r.grid);
  CHECK(back.epoch == 2022);
  CHECK(back.channel == Channel::Opinion);
  CHECK(sidecar_kind(dir / "score.json") == "score");
  CHECK(layer_csv(r) == "row,col,value,support\n0,0,0.3333333333333333,1\n1,3,9.75,1\n");

  auto t = trend_of(cells, Channel::Perception);
  write_raster(dir, "trend", t);
  auto tb = read_trend_raster(dir / "trend.json");
  CHECK(tb.values == t.values);
  CHECK_THROWS(read_score_raster(dir / "trend.json"));
  std::filesystem::remove_all(dir);
}

namespace {

std::vector<ScoredPoint> random_points(Xoshiro256& rng, int max_n) {
  std::vector<ScoredPoint> pts;
  const int n = prop::uniform_int(rng, 0, max_n);
  for (int i = 0; i < n; ++i) {
    pts.push_back(pt("id" + std::to_string(rng.next() % 100000), rng.uniform(-0.5, 4.5), rng.uniform(-0.5, 3.5),
                     rng.uniform(0, 10)));
  }
  return pts;
}

TrendRaster random_trend(Xoshiro256& rng, Channel ch) {
  auto v = missing_cells();
  for (auto& c : v) {
    if (rng.uniform01() < 0.7) c = rng.uniform(-5, 5);
  }
  return trend_of(v, ch);
}

}  // namespace

TEST_CASE("property: cell means match the oracle and support is conserved") {
  prop::for_cases(61, prop::kDefaultCases, [](Xoshiro256& rng, int) {
    auto pts = random_points(rng, 60);
    std::vector<geo::GeoPoint> where;
    std::vector<double> vals;
    for (const auto& p : pts) {
      where.push_back(p.point);
      vals.push_back(p.score);
    }
    const auto expected = oracle::cell_means(kGrid, where, vals);
    auto r = aggregate_cells(kGrid, pts, Channel::Perception, 2016, prop::uniform_int(rng, 1, 4)).raster;
    std::size_t inside = 0;
    for (const auto& p : where) inside += kGrid.locate(p) ? 1 : 0;
    std::size_t support = 0;
    for (std::size_t k = 0; k < r.values.size(); ++k) {
      support += r.support[k];
      auto it = expected.find(k);
      REQUIRE(r.values[k].has_value() == (it != expected.end()));
      if (r.values[k]) {
        CHECK(std::abs(*r.values[k] - static_cast<double>(it->second)) <= 1e-12);
        CHECK((*r.values[k] >= 0.0 && *r.values[k] <= 10.0));
      }
    }
    CHECK(support == inside);
  });
}

TEST_CASE("property: aggregation is independent of record order and worker count") {
  prop::for_cases(62, prop::kDefaultCases, [](Xoshiro256& rng, int) {
    auto pts = random_points(rng, 60);
    const auto a = aggregate_cells(kGrid, pts, Channel::Perception, 2016, 1).raster;
    for (std::size_t i = pts.size(); i > 1; --i) std::swap(pts[i - 1], pts[rng.uniform_below(i)]);
    const auto b = aggregate_cells(kGrid, pts, Channel::Perception, 2016, 8).raster;
    CHECK(a.values == b.values);
    CHECK(a.support == b.support);
  });
}

TEST_CASE("property: trend of a raster with itself is zero on its support") {
  prop::for_cases(63, prop::kDefaultCases, [](Xoshiro256& rng, int) {
    auto r = aggregate_cells(kGrid, random_points(rng, 40), Channel::Perception, 2016).raster;
    auto late = r;
    late.epoch = 2022;
    auto t = trend(late, r);
    for (std::size_t k = 0; k < t.values.size(); ++k) {
      CHECK(t.values[k].has_value() == r.values[k].has_value());
      if (t.values[k]) CHECK(*t.values[k] == 0.0);
    }
  });
}

TEST_CASE("property: mismatch is symmetric and bounded") {
  prop::for_cases(64, prop::kDefaultCases, [](Xoshiro256& rng, int) {
    const auto p = random_trend(rng, Channel::Perception);
    const auto o = random_trend(rng, Channel::Opinion);
    const auto m = mismatch(p, o);
    const auto swapped = overlay_normalized(o.values, p.values);
    REQUIRE(swapped.size() == m.values.size());
    for (std::size_t k = 0; k < m.values.size(); ++k) {
      CHECK(m.values[k] == swapped[k]);
      if (m.values[k]) CHECK((*m.values[k] >= 0.0 && *m.values[k] <= 1.0));
    }
  });
}

TEST_CASE("property: idw is idempotent on complete rasters") {
  prop::for_cases(65, prop::kDefaultCases, [](Xoshiro256& rng, int) {
    auto v = missing_cells();
    for (auto& c : v) c = rng.uniform(0, 10);
    const auto r = raster_of(v);
    SmoothParams p;
    p.method = SmoothMethod::Idw;
    p.power = rng.uniform(0.5, 3);
    p.radius = prop::uniform_int(rng, 1, 3);
    const auto once = smooth(r, p);
    CHECK(once.values == r.values);
    CHECK(smooth(once, p).values == once.values);
  });
}
