#include <doctest.h>

#include <sstream>

#include "support/property.hpp"
#include "urban_affect/ingest.hpp"
#include "urban_affect/io.hpp"

using namespace ua;
using namespace ua::ingest;

namespace {

std::string perception_line(const std::string& id, double score, int n_segments = 17, int epoch = 2016) {
  std::string segs;
  for (int i = 0; i < n_segments; ++i) segs += (i ? "," : "") + std::string(i == 0 ? "0.3" : "0.01");
  return R"({"id":")" + id + R"(","lon":116.4,"lat":39.9,"epoch":)" + std::to_string(epoch) +
         R"(,"score":)" + io::format_double(score) + R"(,"segments":[)" + segs + "]}";
}

Parsed<PerceptionRecord> perception(const std::string& text, IngestOptions opts = {}) {
  std::istringstream in(text);
  return parse_perception(in, opts);
}

Parsed<OpinionRecord> opinion(const std::string& text, IngestOptions opts = {}) {
  std::istringstream in(text);
  return parse_opinion(in, opts);
}

std::string first_reason(const IngestReport& r) { return r.rejections.empty() ? "" : r.rejections.front().reason; }

const char* kSquare = R"({"type":"FeatureCollection","features":[{"type":"Feature","properties":{"zone":"ZONE"},
  "geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,1],[0,0]]]}}]})";

std::string square_doc(const std::string& zone) {
  std::string s = kSquare;
  s.replace(s.find("ZONE"), 4, zone);
  return s;
}

}  // namespace

TEST_CASE("perception lines") {
  auto ok = perception(perception_line("a", 7.2) + "\n");
  CHECK(ok.records.size() == 1);
  CHECK(ok.report.rejected == 0);
  CHECK(ok.records[0].score == 7.2);
  CHECK(ok.records[0].segments[0] == 0.3);

  auto bad_score = perception(perception_line("a", 11) + "\n");
  CHECK(bad_score.records.empty());
  CHECK(bad_score.report.rejected == 1);
  CHECK(first_reason(bad_score.report) == "score out of range");

  auto arity = perception(perception_line("a", 5, 16) + "\n");
  CHECK(first_reason(arity.report) == "segment arity");
}

TEST_CASE("perception rejection reasons") {
  CHECK(first_reason(perception("{not json\n").report) == "malformed json");
  CHECK(first_reason(perception("[1,2]\n").report) == "not a json object");
  CHECK(first_reason(perception(R"({"id":"a","lon":1,"lat":2,"epoch":2016,"score":5})" "\n").report) ==
        "missing field segments");
  CHECK(first_reason(perception(R"({"id":"a","lon":200,"lat":2,"epoch":2016,"score":5,"segments":[0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0]})" "\n").report) ==
        "coordinate out of range");
  CHECK(first_reason(perception(R"({"id":"a","lon":1,"lat":2,"epoch":2016,"score":5,"segments":[0.9,0.9,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0]})" "\n").report) ==
        "segment sum exceeds 1");
  // NaN literals are not JSON
  CHECK(first_reason(perception(R"({"id":"a","lon":NaN,"lat":2,"epoch":2016,"score":5,"segments":[]})" "\n").report) ==
        "malformed json");
  IngestOptions opts;
  opts.epochs = {2016, 2022};
  CHECK(first_reason(perception(perception_line("a", 5, 17, 2019) + "\n", opts).report) == "epoch not declared");
}

TEST_CASE("opinion lines") {
  auto ok = opinion(R"({"id":"p1","lon":116.4,"lat":39.9,"epoch":2022,"text":"北京真好"})" "\n");
  REQUIRE(ok.records.size() == 1);
  CHECK(ok.records[0].text == "北京真好");
  CHECK_FALSE(ok.records[0].score);

  auto empty = opinion(R"({"id":"p1","lon":116.4,"lat":39.9,"epoch":2022,"text":"  "})" "\n");
  CHECK(first_reason(empty.report) == "empty text");

  auto dup = opinion(R"({"id":"p1","lon":116.4,"lat":39.9,"epoch":2022,"text":"一"})" "\n"
                     R"({"id":"p1","lon":116.4,"lat":39.9,"epoch":2022,"text":"二"})" "\n");
  REQUIRE(dup.records.size() == 1);
  CHECK(dup.records[0].text == "一");
  CHECK(dup.report.rejections.at(0).line == 2);
  CHECK(first_reason(dup.report) == "duplicate id");
}

TEST_CASE("zoning documents") {
  auto one = parse_zoning(square_doc("Green"));
  REQUIRE(one.size() == 1);
  CHECK(one[0].label == geo::Zone::Green);

  try {
    parse_zoning(square_doc("Park"));
    FAIL("expected ZoningError");
  } catch (const ZoningError& e) {
    const std::string msg = e.what();
    for (auto z : geo::all_zones()) CHECK(msg.find(std::string(geo::zone_name(z))) != std::string::npos);
  }

  const std::string multi = R"({"type":"FeatureCollection","features":[{"type":"Feature","properties":{"zone":"Storage"},
    "geometry":{"type":"MultiPolygon","coordinates":[[[[0,0],[1,0],[1,1],[0,0]]],[[[5,5],[6,5],[6,6],[5,5]]]]}}]})";
  auto parts = parse_zoning(multi);
  REQUIRE(parts.size() == 2);
  CHECK(parts[0].label == geo::Zone::Storage);
  CHECK(parts[1].label == geo::Zone::Storage);

  CHECK_THROWS_AS(parse_zoning("{"), ZoningError);
  // round-trip through the writer
  auto again = parse_zoning(zoning_to_geojson(parts).dump());
  REQUIRE(again.size() == 2);
  CHECK(again[1].rings == parts[1].rings);
}

TEST_CASE("dataset stats") {
  const auto grid = geo::make_grid({0, 0, 1, 1}, 0.5);
  std::vector<PerceptionRecord> recs(3);
  recs[0].epoch = 2016;
  recs[1].epoch = 2016;
  recs[2].epoch = 2022;
  for (auto& r : recs) r.point = {0.25, 0.25};
  auto s = dataset_stats(std::span<const PerceptionRecord>(recs), grid);
  CHECK(s.epoch_counts == std::map<int, std::size_t>{{2016, 2}, {2022, 1}});
  CHECK(s.bbox_coverage == 1.0);
  CHECK(s.occupancy_histogram == std::map<std::size_t, std::size_t>{{0, 3}, {3, 1}});

  std::vector<OpinionRecord> ops(4);
  ops[0].point = {0.1, 0.1};
  ops[1].point = {0.9, 0.9};
  ops[2].point = {2, 2};
  ops[3].point = {-1, 0.5};
  CHECK(dataset_stats(std::span<const OpinionRecord>(ops), grid).bbox_coverage == 0.5);
}

TEST_CASE("property: accepted records round-trip bit-exactly") {
  prop::for_cases(21, prop::kDefaultCases, [](Xoshiro256& rng, int i) {
    PerceptionRecord p;
    p.id = "r" + std::to_string(i);
    p.point = {rng.uniform(-180, 180), rng.uniform(-90, 90)};
    p.epoch = prop::uniform_int(rng, 1990, 2030);
    p.score = rng.uniform(0, 10);
    double left = 1.0;
    for (auto& s : p.segments) {
      s = rng.uniform(0, left / 2);
      left -= s;
    }
    std::istringstream in(to_json_line(p) + "\n");
    auto back = parse_perception(in);
    REQUIRE(back.records.size() == 1);
    CHECK(back.records[0] == p);

    OpinionRecord o;
    o.id = "o" + std::to_string(i);
    o.point = p.point;
    o.epoch = p.epoch;
    o.text = "文本\"quoted\"\\ " + std::to_string(rng.next());
    if (rng.uniform01() < 0.5) o.score = rng.uniform(0, 10);
    std::istringstream oin(to_json_line(o) + "\n");
    auto oback = parse_opinion(oin);
    REQUIRE(oback.records.size() == 1);
    CHECK(oback.records[0] == o);
  });
}

TEST_CASE("property: report totals are conserved on corrupted input") {
  prop::for_cases(22, prop::kDefaultCases, [](Xoshiro256& rng, int) {
    std::string text;
    const int lines = prop::uniform_int(rng, 0, 12);
    for (int k = 0; k < lines; ++k) {
      std::string line = perception_line("id" + std::to_string(rng.uniform_below(6)), rng.uniform(-2, 12));
      // corrupt some bytes
      const int hits = prop::uniform_int(rng, 0, 3);
      for (int h = 0; h < hits && !line.empty(); ++h) {
        line[rng.uniform_below(line.size())] = static_cast<char>(rng.uniform_below(128));
      }
      if (line.find('\n') != std::string::npos) line.erase(std::remove(line.begin(), line.end(), '\n'), line.end());
      text += line + "\n";
    }
    IngestOptions opts;
    opts.workers = prop::uniform_int(rng, 1, 4);
    auto r = perception(text, opts);
    CHECK(r.report.total_lines == static_cast<std::size_t>(lines));
    CHECK(r.report.accepted + r.report.rejected == r.report.total_lines);
    CHECK(r.records.size() == r.report.accepted);
    std::size_t by_reason = 0;
    for (const auto& [reason, n] : r.report.rejection_reasons) by_reason += n;
    CHECK(by_reason == r.report.rejected);
  });
}

TEST_CASE("property: parsing is order-independent apart from duplicate resolution") {
  prop::for_cases(23, prop::kDefaultCases, [](Xoshiro256& rng, int) {
    std::vector<std::string> lines;
    const int n = prop::uniform_int(rng, 1, 10);
    for (int k = 0; k < n; ++k) lines.push_back(perception_line("u" + std::to_string(k), rng.uniform(-1, 11)));
    auto join = [](const std::vector<std::string>& ls) {
      std::string s;
      for (const auto& l : ls) s += l + "\n";
      return s;
    };
    auto sorted_ids = [](const Parsed<PerceptionRecord>& p) {
      std::vector<std::string> ids;
      for (const auto& r : p.records) ids.push_back(r.id);
      std::sort(ids.begin(), ids.end());
      return ids;
    };
    const auto a = perception(join(lines));
    for (std::size_t i = lines.size(); i > 1; --i) std::swap(lines[i - 1], lines[rng.uniform_below(i)]);
    const auto b = perception(join(lines));
    CHECK(sorted_ids(a) == sorted_ids(b));
    CHECK(a.report.rejection_reasons == b.report.rejection_reasons);
  });
}
