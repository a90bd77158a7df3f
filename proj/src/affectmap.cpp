#include "urban_affect/affectmap.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "urban_affect/io.hpp"
#include "urban_affect/percept.hpp"

namespace ua::affectmap {

std::string_view channel_name(Channel c) { return c == Channel::Perception ? "perception" : "opinion"; }

std::optional<Channel> parse_channel(std::string_view name) {
  if (name == "perception") return Channel::Perception;
  if (name == "opinion") return Channel::Opinion;
  return std::nullopt;
}

std::optional<SmoothMethod> parse_smooth_method(std::string_view name) {
  if (name == "none") return SmoothMethod::None;
  if (name == "idw") return SmoothMethod::Idw;
  return std::nullopt;
}

std::size_t Layer::present_count() const {
  return static_cast<std::size_t>(std::count_if(values.begin(), values.end(), [](const Cell& c) { return c.has_value(); }));
}

std::vector<ScoredPoint> scored_points(std::span<const ingest::PerceptionRecord> records, int epoch) {
  std::vector<ScoredPoint> out;
  for (const auto& r : records) {
    if (r.epoch == epoch) out.push_back({r.id, r.point, r.score});
  }
  return out;
}

std::vector<ScoredPoint> scored_points(std::span<const ingest::OpinionRecord> records, int epoch) {
  std::vector<ScoredPoint> out;
  for (const auto& r : records) {
    if (r.epoch != epoch) continue;
    if (!r.score) throw std::invalid_argument("opinion record '" + r.id + "' has no score");
    out.push_back({r.id, r.point, *r.score});
  }
  return out;
}

AggregateResult aggregate_cells(const geo::Grid& grid, std::vector<ScoredPoint> records, Channel channel,
                                int epoch, int workers) {
  std::sort(records.begin(), records.end(), [](const ScoredPoint& a, const ScoredPoint& b) { return a.id < b.id; });
  std::vector<geo::GeoPoint> points;
  std::vector<double> scores;
  points.reserve(records.size());
  scores.reserve(records.size());
  for (const auto& r : records) {
    if (!(r.score >= 0.0 && r.score <= 10.0)) throw std::invalid_argument("record '" + r.id + "' score out of range");
    points.push_back(r.point);
    scores.push_back(r.score);
  }
  auto red = kernels::cell_means(grid, points, scores, workers);
  AggregateResult out;
  out.raster.grid = grid;
  out.raster.channel = channel;
  out.raster.epoch = epoch;
  out.raster.values = std::move(red.values);
  out.raster.support = std::move(red.support);
  out.skipped_outside = red.outside;
  return out;
}

ScoreRaster smooth(const ScoreRaster& raster, const SmoothParams& params, int workers) {
  if (params.method == SmoothMethod::None) return raster;
  ScoreRaster out = raster;
  out.values = kernels::idw_fill(raster.grid, raster.values, {params.power, params.radius}, workers);
  return out;
}

TrendRaster trend(const ScoreRaster& late, const ScoreRaster& early) {
  if (!(late.grid == early.grid)) throw std::invalid_argument("trend: rasters are on different grids");
  if (late.channel != early.channel) throw std::invalid_argument("trend: rasters are from different channels");
  if (late.epoch == early.epoch) throw std::invalid_argument("trend: both rasters are from the same epoch");
  TrendRaster t;
  t.grid = late.grid;
  t.channel = late.channel;
  t.early_epoch = early.epoch;
  t.late_epoch = late.epoch;
  const std::size_t n = late.values.size();
  t.values.assign(n, std::nullopt);
  t.support.assign(n, 0);
  for (std::size_t k = 0; k < n; ++k) {
    if (late.values[k] && early.values[k]) t.values[k] = *late.values[k] - *early.values[k];
    t.support[k] = std::min(late.support[k], early.support[k]);
  }
  return t;
}

double max_abs(std::span<const Cell> values) {
  double m = 0.0;
  for (const auto& v : values) {
    if (v) m = std::max(m, std::abs(*v));
  }
  return m;
}

std::vector<Cell> overlay_normalized(std::span<const Cell> a, std::span<const Cell> b) {
  if (a.size() != b.size()) throw std::invalid_argument("overlay: layers differ in size");
  const double sa = max_abs(a);
  const double sb = max_abs(b);
  std::vector<Cell> out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (!a[k] || !b[k]) continue;
    const double na = sa > 0.0 ? *a[k] / sa : 0.0;
    const double nb = sb > 0.0 ? *b[k] / sb : 0.0;
    out[k] = std::min(std::abs(na - nb) * 0.5, 1.0);
  }
  return out;
}

MismatchRaster mismatch(const TrendRaster& perception, const TrendRaster& opinion) {
  if (!(perception.grid == opinion.grid)) throw std::invalid_argument("mismatch: trends are on different grids");
  if (perception.channel != Channel::Perception || opinion.channel != Channel::Opinion) {
    throw std::invalid_argument("mismatch: expected a perception trend and an opinion trend");
  }
  MismatchRaster m;
  m.grid = perception.grid;
  m.values = overlay_normalized(perception.values, opinion.values);
  m.perception_scale = max_abs(perception.values);
  m.opinion_scale = max_abs(opinion.values);
  m.support.resize(m.values.size());
  for (std::size_t k = 0; k < m.values.size(); ++k) {
    m.support[k] = std::min(perception.support[k], opinion.support[k]);
  }
  return m;
}

ScoreDistribution score_histogram(std::span<const double> scores) {
  ScoreDistribution d;
  d.n = scores.size();
  d.empty = scores.empty();
  if (d.empty) return d;
  std::array<std::size_t, 10> counts{};
  std::size_t low = 0, high = 0;
  for (double s : scores) {
    ++counts[static_cast<std::size_t>(percept::bin_score(s))];
    if (s < 2.0) ++low;
    if (s >= 8.0) ++high;
  }
  const double n = static_cast<double>(scores.size());
  for (std::size_t i = 0; i < 10; ++i) d.deciles[i] = static_cast<double>(counts[i]) / n;
  d.low = static_cast<double>(low) / n;
  d.high = static_cast<double>(high) / n;
  return d;
}

nlohmann::ordered_json to_json(const ScoreDistribution& d) {
  nlohmann::ordered_json j;
  j["n"] = d.n;
  j["empty"] = d.empty;
  j["deciles"] = d.deciles;
  j["low_share"] = d.low;
  j["high_share"] = d.high;
  return j;
}

nlohmann::ordered_json grid_to_json(const geo::Grid& grid) {
  const auto& b = grid.bbox();
  nlohmann::ordered_json j;
  j["west"] = b.west;
  j["south"] = b.south;
  j["east"] = b.east;
  j["north"] = b.north;
  j["cell_size"] = grid.cell_size();
  j["n_cols"] = grid.n_cols();
  j["n_rows"] = grid.n_rows();
  return j;
}

geo::Grid grid_from_json(const nlohmann::json& j) {
  geo::BoundingBox b{j.at("west").get<double>(), j.at("south").get<double>(), j.at("east").get<double>(),
                     j.at("north").get<double>()};
  geo::Grid g = geo::make_grid(b, j.at("cell_size").get<double>());
  if (j.contains("n_cols") && (j["n_cols"].get<int>() != g.n_cols() || j["n_rows"].get<int>() != g.n_rows())) {
    throw std::runtime_error("raster sidecar grid dimensions disagree with its geometry");
  }
  return g;
}

std::string layer_csv(const Layer& layer) {
  std::string out = "row,col,value,support\n";
  for (std::size_t k = 0; k < layer.values.size(); ++k) {
    if (!layer.values[k]) continue;
    auto idx = layer.grid.unflat(k);
    out += std::to_string(idx.row);
    out += ',';
    out += std::to_string(idx.col);
    out += ',';
    out += io::format_double(*layer.values[k]);
    out += ',';
    out += std::to_string(layer.support[k]);
    out += '\n';
  }
  return out;
}

LayerStats layer_stats(const Layer& layer) {
  LayerStats s;
  double sum = 0.0;
  for (const auto& v : layer.values) {
    if (!v) continue;
    if (s.present == 0) {
      s.min = s.max = *v;
    } else {
      s.min = std::min(s.min, *v);
      s.max = std::max(s.max, *v);
    }
    sum += *v;
    ++s.present;
  }
  if (s.present > 0) s.mean = sum / static_cast<double>(s.present);
  return s;
}

namespace {

nlohmann::ordered_json stats_json(const Layer& layer) {
  auto s = layer_stats(layer);
  nlohmann::ordered_json j;
  j["present_cells"] = s.present;
  j["total_cells"] = layer.values.size();
  j["min"] = s.min;
  j["max"] = s.max;
  j["mean"] = s.mean;
  return j;
}

std::vector<std::filesystem::path> write_layer(const std::filesystem::path& dir, const std::string& stem,
                                               const Layer& layer, nlohmann::ordered_json meta) {
  const auto csv_path = dir / (stem + ".csv");
  const auto json_path = dir / (stem + ".json");
  nlohmann::ordered_json j;
  j["kind"] = meta["kind"];
  j["grid"] = grid_to_json(layer.grid);
  for (auto it = meta.begin(); it != meta.end(); ++it) {
    if (it.key() != "kind") j[it.key()] = it.value();
  }
  j["csv"] = csv_path.filename().string();
  j["stats"] = stats_json(layer);
  io::write_file(csv_path, layer_csv(layer));
  io::write_file(json_path, j.dump(2) + "\n");
  return {csv_path, json_path};
}

struct LoadedLayer {
  nlohmann::json meta;
  Layer layer;
};

LoadedLayer load_layer(const std::filesystem::path& sidecar, std::string_view expected_kind) {
  LoadedLayer out;
  out.meta = nlohmann::json::parse(io::read_file(sidecar));
  const auto kind = out.meta.at("kind").get<std::string>();
  if (!expected_kind.empty() && kind != expected_kind) {
    throw std::runtime_error("'" + sidecar.string() + "' holds a " + kind + " raster, expected " +
                             std::string(expected_kind));
  }
  out.layer.grid = grid_from_json(out.meta.at("grid"));
  const std::size_t n = out.layer.grid.cell_count();
  out.layer.values.assign(n, std::nullopt);
  out.layer.support.assign(n, 0);
  const auto csv_path = sidecar.parent_path() / out.meta.at("csv").get<std::string>();
  std::istringstream csv(io::read_file(csv_path));
  std::string line;
  std::getline(csv, line);  // header
  std::size_t lineno = 1;
  while (std::getline(csv, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = io::split_csv_line(line);
    if (f.size() != 4) throw std::runtime_error(csv_path.string() + ":" + std::to_string(lineno) + ": expected 4 fields");
    int row = std::stoi(f[0]);
    int col = std::stoi(f[1]);
    if (row < 0 || col < 0 || row >= out.layer.grid.n_rows() || col >= out.layer.grid.n_cols()) {
      throw std::runtime_error(csv_path.string() + ":" + std::to_string(lineno) + ": cell outside grid");
    }
    const std::size_t k = out.layer.grid.flat({row, col});
    out.layer.values[k] = io::parse_double(f[2]);
    out.layer.support[k] = static_cast<std::uint32_t>(std::stoul(f[3]));
  }
  return out;
}

Channel channel_from(const nlohmann::json& meta) {
  auto c = parse_channel(meta.at("channel").get<std::string>());
  if (!c) throw std::runtime_error("raster sidecar has an unknown channel");
  return *c;
}

}  // namespace

std::vector<std::filesystem::path> write_raster(const std::filesystem::path& dir, const std::string& stem,
                                                const ScoreRaster& r) {
  nlohmann::ordered_json meta;
  meta["kind"] = "score";
  meta["channel"] = channel_name(r.channel);
  meta["epoch"] = r.epoch;
  return write_layer(dir, stem, r, meta);
}

std::vector<std::filesystem::path> write_raster(const std::filesystem::path& dir, const std::string& stem,
                                                const TrendRaster& r) {
  nlohmann::ordered_json meta;
  meta["kind"] = "trend";
  meta["channel"] = channel_name(r.channel);
  meta["early_epoch"] = r.early_epoch;
  meta["late_epoch"] = r.late_epoch;
  return write_layer(dir, stem, r, meta);
}

std::vector<std::filesystem::path> write_raster(const std::filesystem::path& dir, const std::string& stem,
                                                const MismatchRaster& r) {
  nlohmann::ordered_json meta;
  meta["kind"] = "mismatch";
  meta["perception_scale"] = r.perception_scale;
  meta["opinion_scale"] = r.opinion_scale;
  return write_layer(dir, stem, r, meta);
}

ScoreRaster read_score_raster(const std::filesystem::path& sidecar) {
  auto loaded = load_layer(sidecar, "score");
  ScoreRaster r;
  static_cast<Layer&>(r) = std::move(loaded.layer);
  r.channel = channel_from(loaded.meta);
  r.epoch = loaded.meta.at("epoch").get<int>();
  return r;
}

TrendRaster read_trend_raster(const std::filesystem::path& sidecar) {
  auto loaded = load_layer(sidecar, "trend");
  TrendRaster r;
  static_cast<Layer&>(r) = std::move(loaded.layer);
  r.channel = channel_from(loaded.meta);
  r.early_epoch = loaded.meta.at("early_epoch").get<int>();
  r.late_epoch = loaded.meta.at("late_epoch").get<int>();
  return r;
}

MismatchRaster read_mismatch_raster(const std::filesystem::path& sidecar) {
  auto loaded = load_layer(sidecar, "mismatch");
  MismatchRaster r;
  static_cast<Layer&>(r) = std::move(loaded.layer);
  r.perception_scale = loaded.meta.value("perception_scale", 0.0);
  r.opinion_scale = loaded.meta.value("opinion_scale", 0.0);
  return r;
}

std::string sidecar_kind(const std::filesystem::path& sidecar) {
  return nlohmann::json::parse(io::read_file(sidecar)).at("kind").get<std::string>();
}

Layer read_layer(const std::filesystem::path& sidecar) { return load_layer(sidecar, "").layer; }

}  // namespace ua::affectmap
