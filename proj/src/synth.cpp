#include "urban_affect/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "urban_affect/io.hpp"
#include "urban_affect/percept.hpp"
#include "urban_affect/rng.hpp"

namespace ua::synth {

namespace {

using nlohmann::ordered_json;

constexpr int kLevels = 11;           // opinion levels 0..10
constexpr int kBlockCols = 4;         // zoning blocks across
constexpr int kBlockRows = 3;         // zoning blocks down
constexpr double kNestedShare = 0.7;  // nested polygon side, as a share of its block

std::string utf8(char32_t cp) {
  std::string s;
  if (cp < 0x80) {
    s += static_cast<char>(cp);
  } else if (cp < 0x800) {
    s += static_cast<char>(0xC0 | (cp >> 6));
    s += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    s += static_cast<char>(0xE0 | (cp >> 12));
    s += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    s += static_cast<char>(0x80 | (cp & 0x3F));
  }
  return s;
}

// Two-character words: first characters and second characters come from
// disjoint blocks, so concatenated posts segment back uniquely.
std::string level_word(int j) { return utf8(0x9000 + j) + utf8(0x9400 + j); }
std::string neutral_word(std::size_t k) {
  return utf8(static_cast<char32_t>(0x9000 + kLevels + k)) + utf8(static_cast<char32_t>(0x9400 + kLevels + k));
}

const std::vector<std::string>& early_topics() {
  static const std::vector<std::string> t = {"北京", "分享", "照片"};
  return t;
}
const std::vector<std::string>& late_topics() {
  static const std::vector<std::string> t = {"北京", "超话", "分享"};
  return t;
}

double quantize(double v, double step) { return std::round(v / step) * step; }

geo::Ring rect(double w, double s, double e, double n) { return {{w, s}, {e, s}, {e, n}, {w, n}}; }

bool overlaps(const geo::BoundingBox& a, const geo::BoundingBox& b) {
  return a.west < b.east && b.west < a.east && a.south < b.north && b.south < a.north;
}

struct Layout {
  geo::ZoningSet zoning;
  std::vector<geo::BoundingBox> planted_boxes;  // one per planted regression
};

Layout make_zoning(const ScenarioSpec& spec) {
  Layout out;
  const auto& b = spec.bbox;
  const double bw = (b.east - b.west) / kBlockCols;
  const double bh = (b.north - b.south) / kBlockRows;
  std::vector<geo::Zone> labels;
  for (geo::Zone z : geo::all_zones()) {
    bool planted = std::any_of(spec.regressions.begin(), spec.regressions.end(),
                               [&](const PlantedRegression& r) { return r.zone == z; });
    if (!planted) labels.push_back(z);
  }
  // Two blocks stay unzoned.
  const int unzoned_a = 6, unzoned_b = 11;
  int next_label = 0;
  for (int br = 0; br < kBlockRows; ++br) {
    for (int bc = 0; bc < kBlockCols; ++bc) {
      const int block = br * kBlockCols + bc;
      if (block == unzoned_a || block == unzoned_b || labels.empty()) continue;
      const double w = b.west + bc * bw, e = b.west + (bc + 1) * bw;
      const double n = b.north - br * bh, s = b.north - (br + 1) * bh;
      out.zoning.push_back(geo::make_zone_polygon(labels[next_label++ % labels.size()], {rect(w, s, e, n)}));
    }
  }
  for (std::size_t k = 0; k < spec.regressions.size(); ++k) {
    const int block = static_cast<int>(k) % (kBlockCols * kBlockRows);
    const int br = block / kBlockCols, bc = block % kBlockCols;
    const double cx = b.west + (bc + 0.5) * bw;
    const double cy = b.north - (br + 0.5) * bh;
    geo::BoundingBox box{cx - 0.5 * kNestedShare * bw, cy - 0.5 * kNestedShare * bh, cx + 0.5 * kNestedShare * bw,
                         cy + 0.5 * kNestedShare * bh};
    out.planted_boxes.push_back(box);
    out.zoning.push_back(
        geo::make_zone_polygon(spec.regressions[k].zone, {rect(box.west, box.south, box.east, box.north)}));
  }
  return out;
}

struct PlantedFields {
  std::vector<double> perception_early, perception_late;
  std::vector<double> opinion_early, opinion_late;
};

PlantedFields make_fields(const ScenarioSpec& spec, const geo::Grid& grid) {
  PlantedFields f;
  const std::size_t n = grid.cell_count();
  f.perception_early.resize(n);
  f.perception_late.resize(n);
  f.opinion_early.resize(n);
  f.opinion_late.resize(n);
  const auto& b = spec.bbox;
  for (int r = 0; r < grid.n_rows(); ++r) {
    for (int c = 0; c < grid.n_cols(); ++c) {
      const auto centre = grid.cell_center(r, c);
      const double u = (centre.lon - b.west) / (b.east - b.west);
      const double v = (centre.lat - b.south) / (b.north - b.south);
      // Perception base is a multiple of 1/16 and opinion base an integer
      // level, so noiseless cell means and trends are exact.
      const double p = quantize(5.0 + 1.5 * std::sin(2.0 * std::numbers::pi * u) * std::cos(std::numbers::pi * v),
                                1.0 / 16.0);
      const double o = std::round(5.0 + 2.0 * std::cos(2.0 * std::numbers::pi * u + 1.0) * std::sin(std::numbers::pi * v));
      const std::size_t k = grid.flat({r, c});
      f.perception_early[k] = f.perception_late[k] = p;
      f.opinion_early[k] = f.opinion_late[k] = o;
      for (const auto& h : spec.hotspots) {
        const double dr = r - h.center.row, dc = c - h.center.col;
        if (std::sqrt(dr * dr + dc * dc) > h.radius) continue;
        f.perception_early[k] += h.perception_early;
        f.perception_late[k] += h.perception_late;
        f.opinion_early[k] += h.opinion_early;
        f.opinion_late[k] += h.opinion_late;
      }
      for (double val : {f.perception_early[k], f.perception_late[k], f.opinion_early[k], f.opinion_late[k]}) {
        if (val < 0.0 || val > 10.0) {
          throw std::invalid_argument("infeasible scenario: hotspot deltas push a planted score outside [0, 10]");
        }
      }
    }
  }
  return f;
}

void make_corpora(const ScenarioSpec& spec, Scenario& out) {
  const std::size_t m = spec.corpus_repeat;
  const std::size_t k = spec.neutral_words;
  std::size_t pos_i = 0, neg_i = 0;
  // Level j appears in j*m positive and (10-j)*m negative documents; neutral
  // words cycle by document index, so both classes see them equally often.
  for (int j = 0; j < kLevels; ++j) {
    for (std::size_t d = 0; d < static_cast<std::size_t>(j) * m; ++d) {
      out.pos_docs.push_back(level_word(j) + neutral_word(pos_i++ % k));
    }
    for (std::size_t d = 0; d < static_cast<std::size_t>(10 - j) * m; ++d) {
      out.neg_docs.push_back(level_word(j) + neutral_word(neg_i++ % k));
    }
  }
  std::map<std::string, std::uint64_t, std::less<>> lex;
  for (int j = 0; j < kLevels; ++j) lex[level_word(j)] = 10 * m;
  for (std::size_t i = 0; i < k; ++i) lex[neutral_word(i)] = std::max<std::uint64_t>(1, 2 * (55 * m) / k);
  for (const auto& t : early_topics()) lex[t] = 100;
  for (const auto& t : late_topics()) lex[t] = 100;
  out.lexicon = textsent::Lexicon(std::move(lex));
  out.stopwords = textsent::default_stopwords();
}

std::string id_for(char prefix, int epoch, std::size_t i) {
  std::ostringstream ss;
  ss << prefix << epoch << '-';
  ss.width(7);
  ss.fill('0');
  ss << i;
  return ss.str();
}

}  // namespace

ScenarioSpec ScenarioSpec::standard() {
  ScenarioSpec s;
  s.hotspots = {
      {{4, 13}, 2.0, 0.0, -2.0, 0.0, 2.0},
      {{11, 6}, 2.0, 0.0, 2.0, 0.0, -2.0},
      {{12, 15}, 1.5, 0.0, -2.0, 0.0, -2.0},  // concordant: both channels fall
  };
  s.regressions = {PlantedRegression{}};
  return s;
}

ScenarioSpec ScenarioSpec::null_scenario() {
  ScenarioSpec s = standard();
  s.hotspots.clear();
  s.regressions.clear();
  s.perception_noise = 0.0;
  s.opinion_noise = 0.0;
  return s;
}

void ScenarioSpec::validate() const {
  if (!bbox.valid()) throw std::invalid_argument("scenario bbox is degenerate");
  if (!(cell_size > 0.0)) throw std::invalid_argument("scenario cell_size must be positive");
  if (early_epoch == late_epoch) throw std::invalid_argument("scenario epochs must differ");
  if (perception_per_epoch == 0 || opinion_per_epoch == 0) throw std::invalid_argument("scenario record counts must be positive");
  if (!(perception_noise >= 0.0) || !(opinion_noise >= 0.0)) throw std::invalid_argument("noise sigma must be >= 0");
  if (corpus_repeat == 0 || neutral_words == 0) throw std::invalid_argument("corpus sizes must be positive");
  if (neutral_words > 900) throw std::invalid_argument("at most 900 neutral words");
  for (const auto& r : regressions) {
    if (!(r.noise_sigma >= 0.0)) throw std::invalid_argument("regression noise sigma must be >= 0");
    if (r.element >= percept::kElementCount) throw std::invalid_argument("regression element index out of range");
    if (!(r.x_max > 0.0 && r.x_max <= 1.0)) throw std::invalid_argument("regression x_max must be in (0, 1]");
  }
  if (regressions.size() > 1) {
    for (const auto& r : regressions) {
      if (r.element != regressions.front().element) {
        throw std::invalid_argument("planted regressions must share one element");
      }
    }
  }
}

ordered_json to_json(const ScenarioSpec& s) {
  ordered_json j;
  j["seed"] = s.seed;
  j["bbox"] = {{"west", s.bbox.west}, {"south", s.bbox.south}, {"east", s.bbox.east}, {"north", s.bbox.north}};
  j["cell_size"] = s.cell_size;
  j["early_epoch"] = s.early_epoch;
  j["late_epoch"] = s.late_epoch;
  j["perception_per_epoch"] = s.perception_per_epoch;
  j["opinion_per_epoch"] = s.opinion_per_epoch;
  j["perception_noise"] = s.perception_noise;
  j["opinion_noise"] = s.opinion_noise;
  j["hotspots"] = ordered_json::array();
  for (const auto& h : s.hotspots) {
    j["hotspots"].push_back({{"row", h.center.row},
                             {"col", h.center.col},
                             {"radius", h.radius},
                             {"perception_early", h.perception_early},
                             {"perception_late", h.perception_late},
                             {"opinion_early", h.opinion_early},
                             {"opinion_late", h.opinion_late}});
  }
  j["regressions"] = ordered_json::array();
  for (const auto& r : s.regressions) {
    j["regressions"].push_back({{"zone", std::string(geo::zone_name(r.zone))},
                                {"element", percept::kElementNames[r.element]},
                                {"coefficients", r.coefficients},
                                {"noise_sigma", r.noise_sigma},
                                {"x_max", r.x_max}});
  }
  j["corpus_repeat"] = s.corpus_repeat;
  j["neutral_words"] = s.neutral_words;
  return j;
}

ScenarioSpec spec_from_json(const nlohmann::json& j) {
  ScenarioSpec s = ScenarioSpec::standard();
  s.seed = j.value("seed", s.seed);
  if (j.contains("bbox")) {
    const auto& b = j["bbox"];
    s.bbox = {b.at("west").get<double>(), b.at("south").get<double>(), b.at("east").get<double>(),
              b.at("north").get<double>()};
  }
  s.cell_size = j.value("cell_size", s.cell_size);
  s.early_epoch = j.value("early_epoch", s.early_epoch);
  s.late_epoch = j.value("late_epoch", s.late_epoch);
  s.perception_per_epoch = j.value("perception_per_epoch", s.perception_per_epoch);
  s.opinion_per_epoch = j.value("opinion_per_epoch", s.opinion_per_epoch);
  s.perception_noise = j.value("perception_noise", s.perception_noise);
  s.opinion_noise = j.value("opinion_noise", s.opinion_noise);
  if (j.contains("hotspots")) {
    s.hotspots.clear();
    for (const auto& h : j["hotspots"]) {
      s.hotspots.push_back({{h.at("row").get<int>(), h.at("col").get<int>()},
                            h.value("radius", 2.0),
                            h.value("perception_early", 0.0),
                            h.value("perception_late", 0.0),
                            h.value("opinion_early", 0.0),
                            h.value("opinion_late", 0.0)});
    }
  }
  if (j.contains("regressions")) {
    s.regressions.clear();
    for (const auto& r : j["regressions"]) {
      PlantedRegression p;
      auto zone = geo::parse_zone(r.at("zone").get<std::string>());
      if (!zone) throw std::invalid_argument("unknown zone in planted regression");
      p.zone = *zone;
      const auto name = r.at("element").get<std::string>();
      auto it = std::find_if(percept::kElementNames.begin(), percept::kElementNames.end(),
                             [&](const char* e) { return name == e; });
      if (it == percept::kElementNames.end()) throw std::invalid_argument("unknown element '" + name + "'");
      p.element = static_cast<std::size_t>(it - percept::kElementNames.begin());
      if (r.contains("coefficients")) p.coefficients = r["coefficients"].get<std::array<double, 4>>();
      p.noise_sigma = r.value("noise_sigma", p.noise_sigma);
      p.x_max = r.value("x_max", p.x_max);
      s.regressions.push_back(p);
    }
  }
  s.corpus_repeat = j.value("corpus_repeat", s.corpus_repeat);
  s.neutral_words = j.value("neutral_words", s.neutral_words);
  return s;
}

ordered_json to_json(const AnswerKey& key) {
  auto cells = [&](const std::vector<affectmap::Cell>& v) {
    ordered_json a = ordered_json::array();
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (!v[k]) continue;
      auto idx = key.grid.unflat(k);
      a.push_back({{"row", idx.row}, {"col", idx.col}, {"value", *v[k]}});
    }
    return a;
  };
  ordered_json j;
  j["grid"] = affectmap::grid_to_json(key.grid);
  j["perception_trend"] = cells(key.perception_trend);
  j["opinion_trend"] = cells(key.opinion_trend);
  j["hotspot_cells"] = ordered_json::array();
  for (const auto& c : key.hotspot_cells) j["hotspot_cells"].push_back({c.row, c.col});
  j["regressions"] = ordered_json::array();
  for (const auto& r : key.regressions) {
    j["regressions"].push_back({{"zone", std::string(geo::zone_name(r.zone))},
                                {"element", percept::kElementNames[r.element]},
                                {"coefficients", r.coefficients}});
  }
  return j;
}

Scenario generate_scenario(const ScenarioSpec& spec) {
  spec.validate();
  const geo::Grid grid = geo::make_grid(spec.bbox, spec.cell_size);
  const Layout layout = make_zoning(spec);
  const PlantedFields fields = make_fields(spec, grid);

  Scenario out;
  out.zoning = layout.zoning;
  make_corpora(spec, out);

  SplitMix64 seeds(spec.seed);
  Xoshiro256 rng_perception(seeds.next());
  Xoshiro256 rng_opinion(seeds.next());

  const std::size_t big_element = spec.regressions.empty() ? 1 : spec.regressions.front().element;
  const double big_max = spec.regressions.empty() ? 0.6 : spec.regressions.front().x_max;
  const double small_max = (1.0 - big_max) / static_cast<double>(percept::kElementCount - 1);
  const auto& b = spec.bbox;

  for (int epoch : {spec.early_epoch, spec.late_epoch}) {
    const bool late = epoch == spec.late_epoch;
    const auto& field = late ? fields.perception_late : fields.perception_early;
    for (std::size_t i = 0; i < spec.perception_per_epoch; ++i) {
      ingest::PerceptionRecord r;
      r.id = id_for('p', epoch, i);
      r.epoch = epoch;
      r.point = {rng_perception.uniform(b.west, b.east), rng_perception.uniform(b.south, b.north)};
      for (std::size_t e = 0; e < percept::kElementCount; ++e) {
        r.segments[e] = rng_perception.uniform(0.0, e == big_element ? big_max : small_max);
      }
      const double noise = rng_perception.normal();
      const auto zone = geo::assign_zone(r.point, out.zoning);
      const PlantedRegression* planted = nullptr;
      for (const auto& pr : spec.regressions) {
        if (zone && *zone == pr.zone) planted = &pr;
      }
      double score;
      if (planted != nullptr) {
        const double x = r.segments[planted->element];
        const auto& c = planted->coefficients;
        score = c[0] + x * (c[1] + x * (c[2] + x * c[3])) + planted->noise_sigma * noise;
      } else {
        score = field[grid.flat(*grid.locate(r.point))] + spec.perception_noise * noise;
      }
      r.score = std::clamp(score, 0.0, 10.0);
      out.perception.push_back(std::move(r));
    }
  }

  for (int epoch : {spec.early_epoch, spec.late_epoch}) {
    const bool late = epoch == spec.late_epoch;
    const auto& field = late ? fields.opinion_late : fields.opinion_early;
    const auto& topics = late ? late_topics() : early_topics();
    for (std::size_t i = 0; i < spec.opinion_per_epoch; ++i) {
      ingest::OpinionRecord r;
      r.id = id_for('o', epoch, i);
      r.epoch = epoch;
      r.point = {rng_opinion.uniform(b.west, b.east), rng_opinion.uniform(b.south, b.north)};
      const double planted = field[grid.flat(*grid.locate(r.point))];
      const double s = std::clamp(planted + spec.opinion_noise * rng_opinion.normal(), 0.0, 10.0);
      // Stochastic rounding keeps the expected level equal to s.
      const double lower = std::floor(s);
      int level = static_cast<int>(lower);
      if (rng_opinion.uniform01() < s - lower) ++level;
      level = std::clamp(level, 0, 10);
      std::vector<std::string> words = {level_word(level),
                                        neutral_word(rng_opinion.uniform_below(spec.neutral_words)),
                                        neutral_word(rng_opinion.uniform_below(spec.neutral_words))};
      if (rng_opinion.uniform01() < 0.6) words.push_back(topics[rng_opinion.uniform_below(topics.size())]);
      for (std::size_t a = words.size(); a > 1; --a) std::swap(words[a - 1], words[rng_opinion.uniform_below(a)]);
      for (const auto& w : words) r.text += w;
      out.opinion.push_back(std::move(r));
    }
  }

  AnswerKey& key = out.key;
  key.grid = grid;
  key.regressions = spec.regressions;
  const std::size_t n = grid.cell_count();
  key.perception_trend.assign(n, std::nullopt);
  key.opinion_trend.assign(n, std::nullopt);
  for (std::size_t k = 0; k < n; ++k) {
    const auto idx = grid.unflat(k);
    const auto cell = grid.cell_bounds(idx.row, idx.col);
    const bool touched = std::any_of(layout.planted_boxes.begin(), layout.planted_boxes.end(),
                                     [&](const geo::BoundingBox& box) { return overlaps(cell, box); });
    if (!touched) key.perception_trend[k] = fields.perception_late[k] - fields.perception_early[k];
    key.opinion_trend[k] = fields.opinion_late[k] - fields.opinion_early[k];
    for (const auto& h : spec.hotspots) {
      const double dr = idx.row - h.center.row, dc = idx.col - h.center.col;
      if (h.divergent() && std::sqrt(dr * dr + dc * dc) <= h.radius) {
        key.hotspot_cells.push_back(idx);
        break;
      }
    }
  }
  return out;
}

void write_scenario(const Scenario& scenario, const ScenarioSpec& spec, const std::filesystem::path& dir,
                    const ScenarioFiles& files) {
  std::string buf;
  for (const auto& r : scenario.perception) buf += ingest::to_json_line(r) + "\n";
  io::write_file(dir / files.perception, buf);
  buf.clear();
  for (const auto& r : scenario.opinion) buf += ingest::to_json_line(r) + "\n";
  io::write_file(dir / files.opinion, buf);
  io::write_file(dir / files.zoning, ingest::zoning_to_geojson(scenario.zoning).dump(2) + "\n");
  std::ostringstream lex;
  scenario.lexicon.write(lex);
  io::write_file(dir / files.lexicon, lex.str());
  buf.clear();
  for (const auto& d : scenario.pos_docs) buf += d + "\n";
  io::write_file(dir / files.corpus_pos, buf);
  buf.clear();
  for (const auto& d : scenario.neg_docs) buf += d + "\n";
  io::write_file(dir / files.corpus_neg, buf);
  buf.clear();
  for (const auto& w : scenario.stopwords) buf += w + "\n";
  io::write_file(dir / files.stopwords, buf);
  io::write_file(dir / files.answer_key, to_json(scenario.key).dump(2) + "\n");
  io::write_file(dir / files.spec, to_json(spec).dump(2) + "\n");
}

}  // namespace ua::synth
