#include "urban_affect/pipeline.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "urban_affect/io.hpp"
#include "urban_affect/render.hpp"

namespace ua::pipeline {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

void PipelineConfig::validate() const {
  auto fail = [](const std::string& m) { throw StageError("config", m); };
  if (!bbox.valid()) fail("bbox is degenerate");
  if (!(cell_size > 0.0)) fail("cell_size must be positive");
  if (early_epoch == late_epoch) fail("early and late epochs must differ");
  if (!(filter.min_r_square > 0.0 && filter.min_r_square < 1.0)) fail("regression min_r_square must be in (0, 1)");
  if (!(filter.max_sig > 0.0 && filter.max_sig < 1.0)) fail("regression max_sig must be in (0, 1)");
  if (!(sentiment_alpha > 0.0)) fail("sentiment_alpha must be positive");
  if (wordfreq_top_k < 1) fail("wordfreq_top_k must be at least 1");
  if (render_scale < 1) fail("render_scale must be at least 1");
  if (workers < 1) fail("workers must be at least 1");
  if (smoothing.method == affectmap::SmoothMethod::Idw && (!(smoothing.power > 0.0) || smoothing.radius < 1)) {
    fail("idw smoothing needs power > 0 and radius >= 1");
  }
}

namespace {

fs::path resolve(const nlohmann::json& j, const char* key, const fs::path& base, const fs::path& fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  fs::path p = j[key].get<std::string>();
  if (p.empty()) return p;
  return p.is_absolute() ? p : base / p;
}

std::string relative_string(const fs::path& p, const fs::path& base) {
  if (p.empty()) return "";
  if (base.empty()) return p.generic_string();
  auto rel = p.lexically_relative(base);
  if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
  return p.generic_string();
}

}  // namespace

PipelineConfig config_from_json(const nlohmann::json& j, const fs::path& base) {
  PipelineConfig c;
  const nlohmann::json inputs = j.value("inputs", nlohmann::json::object());
  c.perception = resolve(inputs, "perception", base, {});
  c.opinion = resolve(inputs, "opinion", base, {});
  c.zoning = resolve(inputs, "zoning", base, {});
  c.lexicon = resolve(inputs, "lexicon", base, {});
  c.corpus_pos = resolve(inputs, "corpus_pos", base, {});
  c.corpus_neg = resolve(inputs, "corpus_neg", base, {});
  c.stopwords = resolve(inputs, "stopwords", base, {});
  if (j.contains("bbox")) {
    const auto& b = j["bbox"];
    c.bbox = {b.at("west").get<double>(), b.at("south").get<double>(), b.at("east").get<double>(),
              b.at("north").get<double>()};
  }
  c.cell_size = j.value("cell_size", c.cell_size);
  if (j.contains("epochs")) {
    c.early_epoch = j["epochs"].value("early", c.early_epoch);
    c.late_epoch = j["epochs"].value("late", c.late_epoch);
  }
  if (j.contains("smoothing")) {
    const auto& s = j["smoothing"];
    auto method = affectmap::parse_smooth_method(s.value("method", std::string("none")));
    if (!method) throw StageError("config", "smoothing.method must be \"none\" or \"idw\"");
    c.smoothing.method = *method;
    c.smoothing.power = s.value("power", c.smoothing.power);
    c.smoothing.radius = s.value("radius", c.smoothing.radius);
  }
  if (j.contains("regression")) {
    c.filter.min_r_square = j["regression"].value("min_r_square", c.filter.min_r_square);
    c.filter.max_sig = j["regression"].value("max_sig", c.filter.max_sig);
  }
  c.sentiment_alpha = j.value("sentiment_alpha", c.sentiment_alpha);
  c.wordfreq_top_k = j.value("wordfreq_top_k", c.wordfreq_top_k);
  c.render_scale = j.value("render_scale", c.render_scale);
  c.output_dir = resolve(j, "output_dir", base, base / "out");
  c.seed = j.value("seed", c.seed);
  c.workers = j.value("workers", c.workers);
  return c;
}

PipelineConfig load_config(const fs::path& path) {
  std::string text;
  try {
    text = io::read_file(path);
  } catch (const std::exception& e) {
    throw StageError("config", e.what());
  }
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw StageError("config", "'" + path.string() + "' is not a JSON object");
  try {
    return config_from_json(j, path.parent_path());
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError("config", e.what());
  }
}

ordered_json config_to_json(const PipelineConfig& c, const fs::path& base) {
  ordered_json j;
  j["inputs"] = {{"perception", relative_string(c.perception, base)},
                 {"opinion", relative_string(c.opinion, base)},
                 {"zoning", relative_string(c.zoning, base)},
                 {"lexicon", relative_string(c.lexicon, base)},
                 {"corpus_pos", relative_string(c.corpus_pos, base)},
                 {"corpus_neg", relative_string(c.corpus_neg, base)},
                 {"stopwords", relative_string(c.stopwords, base)}};
  j["bbox"] = {{"west", c.bbox.west}, {"south", c.bbox.south}, {"east", c.bbox.east}, {"north", c.bbox.north}};
  j["cell_size"] = c.cell_size;
  j["epochs"] = {{"early", c.early_epoch}, {"late", c.late_epoch}};
  j["smoothing"] = {{"method", c.smoothing.method == affectmap::SmoothMethod::Idw ? "idw" : "none"},
                    {"power", c.smoothing.power},
                    {"radius", c.smoothing.radius}};
  j["regression"] = {{"min_r_square", c.filter.min_r_square}, {"max_sig", c.filter.max_sig}};
  j["sentiment_alpha"] = c.sentiment_alpha;
  j["wordfreq_top_k"] = c.wordfreq_top_k;
  j["render_scale"] = c.render_scale;
  j["output_dir"] = relative_string(c.output_dir, base);
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  return j;
}

void apply_environment(PipelineConfig& c) {
  if (const char* dir = std::getenv(kOutputDirEnv); dir != nullptr && *dir != '\0') c.output_dir = dir;
}

namespace {

std::string read_input(const char* stage, const fs::path& path) {
  if (path.empty()) throw StageError(stage, "no input path configured");
  if (!fs::exists(path)) throw StageError(stage, "input file '" + path.string() + "' does not exist");
  try {
    return io::read_file(path);
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

std::vector<std::string> read_documents(const char* stage, const fs::path& path) {
  std::istringstream in(read_input(stage, path));
  std::vector<std::string> docs;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) docs.push_back(std::move(line));
  }
  return docs;
}

}  // namespace

geo::Grid make_config_grid(const PipelineConfig& c) {
  try {
    return geo::make_grid(c.bbox, c.cell_size);
  } catch (const std::exception& e) {
    throw StageError("config", e.what());
  }
}

Inputs load_inputs(const PipelineConfig& c, unsigned mask) {
  Inputs in;
  ingest::IngestOptions opts;
  opts.epochs = {c.early_epoch, c.late_epoch};
  opts.workers = c.workers;
  if (mask & kPerceptionInput) {
    std::istringstream s(read_input("perception", c.perception));
    auto parsed = ingest::parse_perception(s, opts);
    in.perception = std::move(parsed.records);
    in.perception_report = std::move(parsed.report);
  }
  if (mask & kOpinionInput) {
    std::istringstream s(read_input("opinion", c.opinion));
    auto parsed = ingest::parse_opinion(s, opts);
    in.opinion = std::move(parsed.records);
    in.opinion_report = std::move(parsed.report);
  }
  if (mask & kZoningInput) {
    try {
      in.zoning = ingest::parse_zoning(read_input("zoning", c.zoning));
    } catch (const ingest::ZoningError& e) {
      throw StageError("zoning", e.what());
    }
  }
  if (mask & kTextInputs) {
    std::istringstream lex(read_input("lexicon", c.lexicon));
    try {
      in.lexicon = textsent::Lexicon::read(lex);
    } catch (const std::exception& e) {
      throw StageError("lexicon", e.what());
    }
    if (in.lexicon.empty()) throw StageError("lexicon", "lexicon is empty");
    in.corpus_pos = read_documents("corpus", c.corpus_pos);
    in.corpus_neg = read_documents("corpus", c.corpus_neg);
    if (c.stopwords.empty()) {
      in.stopwords = textsent::default_stopwords();
    } else {
      std::istringstream sw(read_input("stopwords", c.stopwords));
      in.stopwords = textsent::read_stopwords(sw);
    }
  }
  return in;
}

textsent::SentimentModel train_model(const PipelineConfig& c, const Inputs& in) {
  std::vector<textsent::Tokens> pos(in.corpus_pos.size()), neg(in.corpus_neg.size());
  kernels::for_each_index(pos.size(), c.workers, [&](std::size_t i) { pos[i] = textsent::tokenize(in.corpus_pos[i], in.lexicon); });
  kernels::for_each_index(neg.size(), c.workers, [&](std::size_t i) { neg[i] = textsent::tokenize(in.corpus_neg[i], in.lexicon); });
  try {
    return textsent::train_sentiment(pos, neg, c.sentiment_alpha);
  } catch (const std::exception& e) {
    throw StageError("corpus", e.what());
  }
}

void score_opinions(std::vector<ingest::OpinionRecord>& records, const textsent::SentimentModel& model,
                    const textsent::Lexicon& lex, int workers) {
  kernels::for_each_index(records.size(), workers, [&](std::size_t i) {
    auto& r = records[i];
    if (!r.score) r.score = textsent::to_opinion_score(textsent::score_text(model, r.text, lex));
  });
}

namespace {

std::vector<fs::path> render_outputs(const fs::path& dir, const std::string& stem, const affectmap::Layer& layer,
                                     const render::ColorRamp& ramp, const render::Domain& domain, int scale) {
  const auto ppm = dir / (stem + ".ppm");
  const auto geojson = dir / (stem + ".geojson");
  io::write_file(ppm, render::render_raster(layer, ramp, domain, scale));
  io::write_file(geojson, render::export_geojson(layer).dump() + "\n");
  return {ppm, geojson};
}

}  // namespace

std::vector<fs::path> write_score_outputs(const fs::path& dir, const std::string& stem,
                                          const affectmap::ScoreRaster& r, int scale) {
  auto paths = affectmap::write_raster(dir, stem, r);
  auto more = render_outputs(dir, stem, r, render::score_ramp(), {0.0, 10.0}, scale);
  paths.insert(paths.end(), more.begin(), more.end());
  return paths;
}

std::vector<fs::path> write_trend_outputs(const fs::path& dir, const std::string& stem,
                                          const affectmap::TrendRaster& r, int scale) {
  auto paths = affectmap::write_raster(dir, stem, r);
  auto more = render_outputs(dir, stem, r, render::trend_ramp(), render::trend_domain(r), scale);
  paths.insert(paths.end(), more.begin(), more.end());
  return paths;
}

std::vector<fs::path> write_mismatch_outputs(const fs::path& dir, const std::string& stem,
                                             const affectmap::MismatchRaster& r, int scale) {
  auto paths = affectmap::write_raster(dir, stem, r);
  auto more = render_outputs(dir, stem, r, render::mismatch_ramp(), {0.0, 1.0}, scale);
  paths.insert(paths.end(), more.begin(), more.end());
  return paths;
}

RunResult run(const PipelineConfig& c) {
  c.validate();
  const geo::Grid grid = make_config_grid(c);
  const fs::path out_dir = c.output_dir;
  RunResult result;
  result.output_dir = out_dir;
  std::vector<fs::path> written;
  auto add = [&](const std::vector<fs::path>& ps) { written.insert(written.end(), ps.begin(), ps.end()); };
  auto write = [&](const fs::path& rel, std::string_view bytes) {
    io::write_file(out_dir / rel, bytes);
    written.push_back(out_dir / rel);
  };

  // ingest
  Inputs in = load_inputs(c);
  {
    ordered_json report;
    auto p = ingest::to_json(in.perception_report);
    auto o = ingest::to_json(in.opinion_report);
    auto ps = ingest::dataset_stats(std::span<const ingest::PerceptionRecord>(in.perception), grid);
    auto os = ingest::dataset_stats(std::span<const ingest::OpinionRecord>(in.opinion), grid);
    p["bbox_coverage"] = ps.bbox_coverage;
    p["inside_bbox"] = ps.inside_bbox;
    p["occupancy_histogram"] = ingest::to_json(ps)["occupancy_histogram"];
    o["bbox_coverage"] = os.bbox_coverage;
    o["inside_bbox"] = os.inside_bbox;
    o["occupancy_histogram"] = ingest::to_json(os)["occupancy_histogram"];
    report["perception"] = std::move(p);
    report["opinion"] = std::move(o);
    report["zoning_polygons"] = in.zoning.size();
    write("ingest_report.json", report.dump(2) + "\n");
  }

  // text scoring
  textsent::SentimentModel model;
  try {
    model = train_model(c, in);
    score_opinions(in.opinion, model, in.lexicon, c.workers);
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError("score-text", e.what());
  }
  {
    std::string buf;
    for (const auto& r : in.opinion) buf += ingest::to_json_line(r) + "\n";
    write("opinion_scored.jsonl", buf);
  }

  // rasters
  std::map<std::pair<affectmap::Channel, int>, affectmap::ScoreRaster> rasters;
  try {
    for (auto channel : {affectmap::Channel::Perception, affectmap::Channel::Opinion}) {
      for (int epoch : {c.early_epoch, c.late_epoch}) {
        auto points = channel == affectmap::Channel::Perception
                          ? affectmap::scored_points(std::span<const ingest::PerceptionRecord>(in.perception), epoch)
                          : affectmap::scored_points(std::span<const ingest::OpinionRecord>(in.opinion), epoch);
        std::vector<double> scores;
        scores.reserve(points.size());
        for (const auto& p : points) scores.push_back(p.score);
        const std::string tag = std::string(affectmap::channel_name(channel)) + "_" + std::to_string(epoch);
        write("distributions/score_distribution_" + tag + ".json",
              affectmap::to_json(affectmap::score_histogram(scores)).dump(2) + "\n");
        auto agg = affectmap::aggregate_cells(grid, std::move(points), channel, epoch, c.workers);
        rasters[{channel, epoch}] = agg.raster;
        auto shown = affectmap::smooth(agg.raster, c.smoothing, c.workers);
        add(write_score_outputs(out_dir / "rasters", "score_" + tag, shown, c.render_scale));
      }
    }
  } catch (const std::exception& e) {
    throw StageError("aggregate", e.what());
  }

  // trends and mismatch
  std::map<affectmap::Channel, affectmap::TrendRaster> trends;
  try {
    for (auto channel : {affectmap::Channel::Perception, affectmap::Channel::Opinion}) {
      trends[channel] = affectmap::trend(rasters.at({channel, c.late_epoch}), rasters.at({channel, c.early_epoch}));
      add(write_trend_outputs(out_dir / "rasters", "trend_" + std::string(affectmap::channel_name(channel)),
                              trends[channel], c.render_scale));
    }
  } catch (const std::exception& e) {
    throw StageError("trend", e.what());
  }
  try {
    auto m = affectmap::mismatch(trends.at(affectmap::Channel::Perception), trends.at(affectmap::Channel::Opinion));
    add(write_mismatch_outputs(out_dir / "rasters", "mismatch", m, c.render_scale));
  } catch (const std::exception& e) {
    throw StageError("mismatch", e.what());
  }

  // regressions
  try {
    const std::vector<int> epochs = {c.early_epoch, c.late_epoch};
    auto report = regress::run_zone_element_regressions(in.perception, in.zoning, epochs, c.filter, c.workers);
    write("regression.csv", regress::regression_csv(report));
    write("regression_summary.txt", regress::regression_summary(report));
  } catch (const std::exception& e) {
    throw StageError("regress", e.what());
  }

  // word frequency
  try {
    for (int epoch : {c.early_epoch, c.late_epoch}) {
      std::vector<std::string> docs;
      for (const auto& r : in.opinion) {
        if (r.epoch == epoch) docs.push_back(r.text);
      }
      auto rep = textsent::word_frequency(docs, in.lexicon, in.stopwords, c.wordfreq_top_k);
      std::ostringstream csv;
      textsent::write_word_frequency_csv(csv, rep);
      write("wordfreq_" + std::to_string(epoch) + ".csv", csv.str());
    }
  } catch (const std::exception& e) {
    throw StageError("wordfreq", e.what());
  }

  // manifest
  ordered_json manifest;
  manifest["tool"] = kToolName;
  manifest["version"] = kVersion;
  ordered_json inputs = ordered_json::array();
  auto add_input = [&](const char* role, const fs::path& p) {
    if (p.empty()) return;
    inputs.push_back({{"role", role}, {"file", p.filename().string()}, {"sha256", io::sha256_hex(io::read_file(p))}});
  };
  add_input("perception", c.perception);
  add_input("opinion", c.opinion);
  add_input("zoning", c.zoning);
  add_input("lexicon", c.lexicon);
  add_input("corpus_pos", c.corpus_pos);
  add_input("corpus_neg", c.corpus_neg);
  add_input("stopwords", c.stopwords);
  manifest["inputs"] = std::move(inputs);
  auto settings = config_to_json(c, {});
  settings.erase("inputs");
  settings.erase("output_dir");
  settings.erase("workers");
  manifest["settings"] = std::move(settings);
  ordered_json outputs = ordered_json::array();
  std::vector<fs::path> rel;
  for (const auto& p : written) rel.push_back(p.lexically_relative(out_dir));
  std::sort(rel.begin(), rel.end());
  for (const auto& r : rel) {
    const std::string bytes = io::read_file(out_dir / r);
    outputs.push_back({{"path", r.generic_string()}, {"bytes", bytes.size()}, {"sha256", io::sha256_hex(bytes)}});
  }
  manifest["outputs"] = std::move(outputs);
  io::write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
  rel.push_back("manifest.json");
  result.outputs = std::move(rel);
  return result;
}

}  // namespace ua::pipeline
