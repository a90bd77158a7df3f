#include "urban_affect/ingest.hpp"

#include <cmath>
#include <limits>
#include <unordered_set>

#include "urban_affect/kernels.hpp"

namespace ua::ingest {

using nlohmann::json;

namespace {

std::string_view strip_line(std::string_view line, bool first) {
  if (first && line.starts_with("\xEF\xBB\xBF")) line.remove_prefix(3);
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

// Shared field checks; each returns an empty string when the field is fine.
std::string read_common(const json& obj, std::string& id, geo::GeoPoint& point, int& epoch,
                        const std::set<int>& epochs) {
  if (!obj.is_object()) return "not a json object";
  for (const char* key : {"id", "lon", "lat", "epoch"}) {
    if (!obj.contains(key)) return std::string("missing field ") + key;
  }
  const json& jid = obj["id"];
  if (!jid.is_string()) return "wrong type id";
  id = jid.get<std::string>();
  if (id.empty()) return "empty id";
  const json& jlon = obj["lon"];
  const json& jlat = obj["lat"];
  if (!jlon.is_number() || !jlat.is_number()) return "wrong type coordinate";
  point = {jlon.get<double>(), jlat.get<double>()};
  if (!std::isfinite(point.lon) || !std::isfinite(point.lat) || !point.valid()) return "coordinate out of range";
  const json& jep = obj["epoch"];
  if (!jep.is_number_integer()) return "wrong type epoch";
  auto e = jep.get<std::int64_t>();
  if (e < std::numeric_limits<int>::min() || e > std::numeric_limits<int>::max()) return "epoch out of range";
  epoch = static_cast<int>(e);
  if (!epochs.empty() && !epochs.contains(epoch)) return "epoch not declared";
  return {};
}

bool is_trim_space(std::string_view s, std::size_t i, std::size_t& width) {
  unsigned char c = static_cast<unsigned char>(s[i]);
  if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
    width = 1;
    return true;
  }
  // U+3000 IDEOGRAPHIC SPACE
  if (s.substr(i, 3) == "\xE3\x80\x80") {
    width = 3;
    return true;
  }
  return false;
}

bool blank_text(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t w = 0;
    if (!is_trim_space(s, i, w)) return false;
    i += w;
  }
  return true;
}

template <class Record, class LineParser>
Parsed<Record> parse_lines(std::istream& in, const IngestOptions& opts, const char* channel,
                           LineParser parse_line) {
  if (!in) throw std::runtime_error(std::string("unreadable ") + channel + " stream");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(std::move(line));
  if (in.bad()) throw std::runtime_error(std::string("read error on ") + channel + " stream");

  // Lines parse independently; duplicate resolution below runs in input order.
  std::vector<std::variant<Record, std::string>> parsed(lines.size());
  kernels::for_each_index(lines.size(), opts.workers, [&](std::size_t i) {
    std::string_view l = strip_line(lines[i], i == 0);
    if (l.empty()) {
      parsed[i] = std::string("empty line");
    } else {
      parsed[i] = parse_line(l, opts.epochs);
    }
  });

  Parsed<Record> out;
  IngestReport& rep = out.report;
  rep.channel = channel;
  rep.total_lines = lines.size();
  std::unordered_set<std::string> seen;
  auto reject = [&](std::size_t i, std::string reason) {
    ++rep.rejected;
    ++rep.rejection_reasons[reason];
    rep.rejections.push_back({i + 1, std::move(reason)});
  };
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    if (auto* reason = std::get_if<std::string>(&parsed[i])) {
      reject(i, std::move(*reason));
      continue;
    }
    auto& rec = std::get<Record>(parsed[i]);
    if (!seen.insert(rec.id).second) {
      reject(i, "duplicate id");
      continue;
    }
    ++rep.accepted;
    ++rep.epoch_counts[rec.epoch];
    out.records.push_back(std::move(rec));
  }
  return out;
}

template <class Record>
IngestReport stats_impl(std::span<const Record> records, const geo::Grid& grid, const char* channel) {
  IngestReport rep;
  rep.channel = channel;
  rep.total_lines = records.size();
  rep.accepted = records.size();
  std::vector<std::size_t> per_cell(grid.cell_count(), 0);
  for (const auto& r : records) {
    ++rep.epoch_counts[r.epoch];
    if (auto cell = grid.locate(r.point)) {
      ++rep.inside_bbox;
      ++per_cell[grid.flat(*cell)];
    }
  }
  rep.bbox_coverage =
      records.empty() ? 0.0 : static_cast<double>(rep.inside_bbox) / static_cast<double>(records.size());
  for (std::size_t c : per_cell) ++rep.occupancy_histogram[c];
  return rep;
}

}  // namespace

std::variant<PerceptionRecord, std::string> parse_perception_line(std::string_view line,
                                                                  const std::set<int>& epochs) {
  json obj = json::parse(line, nullptr, false);
  if (obj.is_discarded()) return std::string("malformed json");
  PerceptionRecord rec;
  if (auto err = read_common(obj, rec.id, rec.point, rec.epoch, epochs); !err.empty()) return err;
  if (!obj.contains("score")) return std::string("missing field score");
  if (!obj["score"].is_number()) return std::string("wrong type score");
  rec.score = obj["score"].get<double>();
  if (!(rec.score >= 0.0 && rec.score <= 10.0)) return std::string("score out of range");
  if (!obj.contains("segments")) return std::string("missing field segments");
  const json& seg = obj["segments"];
  if (!seg.is_array()) return std::string("wrong type segments");
  if (seg.size() != percept::kElementCount) return std::string("segment arity");
  std::vector<double> values;
  values.reserve(seg.size());
  for (const auto& v : seg) {
    if (!v.is_number()) return std::string("wrong type segments");
    values.push_back(v.get<double>());
  }
  try {
    rec.segments = percept::validate_segments(values);
  } catch (const std::invalid_argument& e) {
    std::string_view what = e.what();
    if (what.starts_with("segment out of range")) return std::string("segment out of range");
    return std::string(what);
  }
  return rec;
}

std::variant<OpinionRecord, std::string> parse_opinion_line(std::string_view line,
                                                            const std::set<int>& epochs) {
  json obj = json::parse(line, nullptr, false);
  if (obj.is_discarded()) return std::string("malformed json");
  OpinionRecord rec;
  if (auto err = read_common(obj, rec.id, rec.point, rec.epoch, epochs); !err.empty()) return err;
  if (!obj.contains("text")) return std::string("missing field text");
  if (!obj["text"].is_string()) return std::string("wrong type text");
  rec.text = obj["text"].get<std::string>();
  if (blank_text(rec.text)) return std::string("empty text");
  if (obj.contains("score") && !obj["score"].is_null()) {
    if (!obj["score"].is_number()) return std::string("wrong type score");
    double s = obj["score"].get<double>();
    if (!(s >= 0.0 && s <= 10.0)) return std::string("score out of range");
    rec.score = s;
  }
  return rec;
}

Parsed<PerceptionRecord> parse_perception(std::istream& in, const IngestOptions& opts) {
  return parse_lines<PerceptionRecord>(in, opts, "perception", parse_perception_line);
}

Parsed<OpinionRecord> parse_opinion(std::istream& in, const IngestOptions& opts) {
  return parse_lines<OpinionRecord>(in, opts, "opinion", parse_opinion_line);
}

std::string to_json_line(const PerceptionRecord& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["lon"] = r.point.lon;
  j["lat"] = r.point.lat;
  j["epoch"] = r.epoch;
  j["score"] = r.score;
  j["segments"] = r.segments;
  return j.dump();
}

std::string to_json_line(const OpinionRecord& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["lon"] = r.point.lon;
  j["lat"] = r.point.lat;
  j["epoch"] = r.epoch;
  j["text"] = r.text;
  if (r.score) j["score"] = *r.score;
  return j.dump();
}

namespace {

std::string legal_labels() {
  std::string s;
  for (geo::Zone z : geo::all_zones()) {
    if (!s.empty()) s += ", ";
    s += '"';
    s += geo::zone_name(z);
    s += '"';
  }
  return s;
}

std::vector<geo::Ring> read_rings(const json& coords, std::size_t feature) {
  if (!coords.is_array() || coords.empty()) {
    throw ZoningError("feature " + std::to_string(feature) + ": polygon coordinates must be a non-empty array");
  }
  std::vector<geo::Ring> rings;
  for (const auto& jr : coords) {
    if (!jr.is_array()) throw ZoningError("feature " + std::to_string(feature) + ": ring is not an array");
    geo::Ring ring;
    for (const auto& jp : jr) {
      if (!jp.is_array() || jp.size() < 2 || !jp[0].is_number() || !jp[1].is_number()) {
        throw ZoningError("feature " + std::to_string(feature) + ": malformed position");
      }
      ring.push_back({jp[0].get<double>(), jp[1].get<double>()});
    }
    rings.push_back(std::move(ring));
  }
  return rings;
}

}  // namespace

geo::ZoningSet parse_zoning(std::string_view document) {
  json doc = json::parse(document, nullptr, false);
  if (doc.is_discarded()) throw ZoningError("zoning document is not valid JSON");
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" || !doc.contains("features") ||
      !doc["features"].is_array()) {
    throw ZoningError("zoning document must be a GeoJSON FeatureCollection");
  }
  geo::ZoningSet zones;
  std::size_t index = 0;
  for (const auto& feat : doc["features"]) {
    const std::string where = "feature " + std::to_string(index);
    if (!feat.is_object() || !feat.contains("geometry") || !feat["geometry"].is_object()) {
      throw ZoningError(where + ": missing geometry");
    }
    const json* zone_value = nullptr;
    if (feat.contains("properties") && feat["properties"].is_object() && feat["properties"].contains("zone")) {
      zone_value = &feat["properties"]["zone"];
    }
    if (zone_value == nullptr || !zone_value->is_string()) {
      throw ZoningError(where + ": missing string property \"zone\"; legal labels: " + legal_labels());
    }
    auto label_text = zone_value->get<std::string>();
    auto label = geo::parse_zone(label_text);
    if (!label) {
      throw ZoningError(where + ": unknown zone \"" + label_text + "\"; legal labels: " + legal_labels());
    }
    const json& geom = feat["geometry"];
    const std::string type = geom.value("type", "");
    if (!geom.contains("coordinates")) throw ZoningError(where + ": geometry has no coordinates");
    std::vector<std::vector<geo::Ring>> parts;
    if (type == "Polygon") {
      parts.push_back(read_rings(geom["coordinates"], index));
    } else if (type == "MultiPolygon") {
      const json& polys = geom["coordinates"];
      if (!polys.is_array() || polys.empty()) throw ZoningError(where + ": empty MultiPolygon");
      for (const auto& p : polys) parts.push_back(read_rings(p, index));
    } else {
      throw ZoningError(where + ": geometry type \"" + type + "\" is not Polygon or MultiPolygon");
    }
    for (auto& rings : parts) {
      try {
        zones.push_back(geo::make_zone_polygon(*label, std::move(rings)));
      } catch (const std::invalid_argument& e) {
        throw ZoningError(where + ": " + e.what());
      }
    }
    ++index;
  }
  return zones;
}

nlohmann::ordered_json zoning_to_geojson(const geo::ZoningSet& zones) {
  nlohmann::ordered_json fc;
  fc["type"] = "FeatureCollection";
  fc["features"] = nlohmann::ordered_json::array();
  for (const auto& poly : zones) {
    nlohmann::ordered_json rings = nlohmann::ordered_json::array();
    for (const auto& ring : poly.rings) {
      nlohmann::ordered_json jr = nlohmann::ordered_json::array();
      for (const auto& p : ring) jr.push_back({p.lon, p.lat});
      jr.push_back({ring.front().lon, ring.front().lat});
      rings.push_back(std::move(jr));
    }
    nlohmann::ordered_json f;
    f["type"] = "Feature";
    f["properties"] = {{"zone", std::string(geo::zone_name(poly.label))}};
    f["geometry"] = {{"type", "Polygon"}, {"coordinates", std::move(rings)}};
    fc["features"].push_back(std::move(f));
  }
  return fc;
}

IngestReport dataset_stats(std::span<const PerceptionRecord> records, const geo::Grid& grid) {
  return stats_impl(records, grid, "perception");
}

IngestReport dataset_stats(std::span<const OpinionRecord> records, const geo::Grid& grid) {
  return stats_impl(records, grid, "opinion");
}

nlohmann::ordered_json to_json(const IngestReport& r) {
  nlohmann::ordered_json j;
  j["channel"] = r.channel;
  j["total_lines"] = r.total_lines;
  j["accepted"] = r.accepted;
  j["rejected"] = r.rejected;
  nlohmann::ordered_json reasons = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.rejection_reasons) reasons[k] = v;
  j["rejection_reasons"] = std::move(reasons);
  nlohmann::ordered_json rej = nlohmann::ordered_json::array();
  for (const auto& x : r.rejections) rej.push_back({{"line", x.line}, {"reason", x.reason}});
  j["rejections"] = std::move(rej);
  nlohmann::ordered_json epochs = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.epoch_counts) epochs[std::to_string(k)] = v;
  j["epoch_counts"] = std::move(epochs);
  j["inside_bbox"] = r.inside_bbox;
  j["bbox_coverage"] = r.bbox_coverage;
  nlohmann::ordered_json hist = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.occupancy_histogram) hist[std::to_string(k)] = v;
  j["occupancy_histogram"] = std::move(hist);
  return j;
}

}  // namespace ua::ingest
