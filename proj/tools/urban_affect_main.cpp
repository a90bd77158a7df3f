// urban-affect: command-line front end for the mapping pipeline.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "urban_affect/affectmap.hpp"
#include "urban_affect/io.hpp"
#include "urban_affect/pipeline.hpp"
#include "urban_affect/regress.hpp"
#include "urban_affect/render.hpp"
#include "urban_affect/synth.hpp"

namespace fs = std::filesystem;
using namespace ua;

namespace {

struct CommonArgs {
  std::string config;
  std::optional<int> workers;
  std::string output_dir;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config, "Pipeline configuration (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--workers", args.workers, "Worker threads (results do not depend on it)")->check(CLI::PositiveNumber);
  cmd->add_option("--output-dir", args.output_dir, "Output directory (overrides config and environment)");
}

pipeline::PipelineConfig resolve_config(const CommonArgs& args) {
  auto c = pipeline::load_config(args.config);
  pipeline::apply_environment(c);
  if (!args.output_dir.empty()) c.output_dir = args.output_dir;
  if (args.workers) c.workers = *args.workers;
  c.validate();
  return c;
}

std::optional<affectmap::Channel> channel_arg(const std::string& s) {
  auto c = affectmap::parse_channel(s);
  if (!c) throw pipeline::StageError("aggregate", "unknown channel '" + s + "' (expected perception or opinion)");
  return c;
}

int cmd_run(const CommonArgs& args) {
  const auto result = pipeline::run(resolve_config(args));
  std::cout << "wrote " << result.outputs.size() << " files to " << result.output_dir.string() << "\n";
  return 0;
}

int cmd_ingest_stats(const CommonArgs& args) {
  const auto c = resolve_config(args);
  const auto grid = pipeline::make_config_grid(c);
  const auto in = pipeline::load_inputs(c, pipeline::kPerceptionInput | pipeline::kOpinionInput);
  nlohmann::ordered_json j;
  auto describe = [&](const ingest::IngestReport& parsed, const ingest::IngestReport& stats) {
    auto out = ingest::to_json(parsed);
    const auto s = ingest::to_json(stats);
    out["inside_bbox"] = s["inside_bbox"];
    out["bbox_coverage"] = s["bbox_coverage"];
    out["occupancy_histogram"] = s["occupancy_histogram"];
    return out;
  };
  j["perception"] = describe(in.perception_report,
                             ingest::dataset_stats(std::span<const ingest::PerceptionRecord>(in.perception), grid));
  j["opinion"] =
      describe(in.opinion_report, ingest::dataset_stats(std::span<const ingest::OpinionRecord>(in.opinion), grid));
  const auto path = fs::path(c.output_dir) / "ingest_report.json";
  io::write_file(path, j.dump(2) + "\n");
  std::cout << "perception: " << in.perception_report.accepted << " accepted, " << in.perception_report.rejected
            << " rejected\nopinion: " << in.opinion_report.accepted << " accepted, " << in.opinion_report.rejected
            << " rejected\nreport: " << path.string() << "\n";
  return 0;
}

int cmd_score_text(const CommonArgs& args, const std::vector<std::string>& texts) {
  const auto c = resolve_config(args);
  auto in = pipeline::load_inputs(c, texts.empty() ? pipeline::kOpinionInput | pipeline::kTextInputs
                                                   : pipeline::kTextInputs);
  const auto model = pipeline::train_model(c, in);
  if (!texts.empty()) {
    for (const auto& t : texts) {
      std::cout << io::format_double(textsent::to_opinion_score(textsent::score_text(model, t, in.lexicon))) << "\n";
    }
    return 0;
  }
  pipeline::score_opinions(in.opinion, model, in.lexicon, c.workers);
  std::string buf;
  for (const auto& r : in.opinion) buf += ingest::to_json_line(r) + "\n";
  const auto path = fs::path(c.output_dir) / "opinion_scored.jsonl";
  io::write_file(path, buf);
  std::cout << "scored " << in.opinion.size() << " posts: " << path.string() << "\n";
  return 0;
}

int cmd_aggregate(const CommonArgs& args, const std::string& channel_text, int epoch) {
  const auto c = resolve_config(args);
  const auto channel = *channel_arg(channel_text);
  const auto grid = pipeline::make_config_grid(c);
  std::vector<affectmap::ScoredPoint> points;
  if (channel == affectmap::Channel::Perception) {
    const auto in = pipeline::load_inputs(c, pipeline::kPerceptionInput);
    points = affectmap::scored_points(std::span<const ingest::PerceptionRecord>(in.perception), epoch);
  } else {
    auto in = pipeline::load_inputs(c, pipeline::kOpinionInput | pipeline::kTextInputs);
    pipeline::score_opinions(in.opinion, pipeline::train_model(c, in), in.lexicon, c.workers);
    points = affectmap::scored_points(std::span<const ingest::OpinionRecord>(in.opinion), epoch);
  }
  auto agg = affectmap::aggregate_cells(grid, std::move(points), channel, epoch, c.workers);
  const auto raster = affectmap::smooth(agg.raster, c.smoothing, c.workers);
  const std::string stem = "score_" + std::string(affectmap::channel_name(channel)) + "_" + std::to_string(epoch);
  const auto paths = pipeline::write_score_outputs(fs::path(c.output_dir) / "rasters", stem, raster, c.render_scale);
  std::cout << raster.present_count() << " cells present, " << agg.skipped_outside << " records outside bbox\n";
  for (const auto& p : paths) std::cout << p.string() << "\n";
  return 0;
}

fs::path split_stem(const std::string& out, std::string& stem) {
  const fs::path p = out;
  stem = p.stem().string();
  return p.parent_path().empty() ? fs::path(".") : p.parent_path();
}

int cmd_trend(const std::string& late, const std::string& early, const std::string& out, int scale) {
  const auto t = affectmap::trend(affectmap::read_score_raster(late), affectmap::read_score_raster(early));
  std::string stem;
  const auto dir = split_stem(out, stem);
  for (const auto& p : pipeline::write_trend_outputs(dir, stem, t, scale)) std::cout << p.string() << "\n";
  return 0;
}

int cmd_mismatch(const std::string& perception, const std::string& opinion, const std::string& out, int scale) {
  const auto m =
      affectmap::mismatch(affectmap::read_trend_raster(perception), affectmap::read_trend_raster(opinion));
  std::string stem;
  const auto dir = split_stem(out, stem);
  for (const auto& p : pipeline::write_mismatch_outputs(dir, stem, m, scale)) std::cout << p.string() << "\n";
  return 0;
}

int cmd_regress(const CommonArgs& args) {
  const auto c = resolve_config(args);
  const auto in = pipeline::load_inputs(c, pipeline::kPerceptionInput | pipeline::kZoningInput);
  const std::vector<int> epochs = {c.early_epoch, c.late_epoch};
  const auto report = regress::run_zone_element_regressions(in.perception, in.zoning, epochs, c.filter, c.workers);
  io::write_file(fs::path(c.output_dir) / "regression.csv", regress::regression_csv(report));
  const auto summary = regress::regression_summary(report);
  io::write_file(fs::path(c.output_dir) / "regression_summary.txt", summary);
  std::cout << summary;
  return 0;
}

int cmd_wordfreq(const CommonArgs& args, int epoch) {
  const auto c = resolve_config(args);
  const auto in = pipeline::load_inputs(c, pipeline::kOpinionInput | pipeline::kTextInputs);
  std::vector<std::string> docs;
  for (const auto& r : in.opinion) {
    if (r.epoch == epoch) docs.push_back(r.text);
  }
  const auto rep = textsent::word_frequency(docs, in.lexicon, in.stopwords, c.wordfreq_top_k);
  std::ostringstream csv;
  textsent::write_word_frequency_csv(csv, rep);
  const auto path = fs::path(c.output_dir) / ("wordfreq_" + std::to_string(epoch) + ".csv");
  io::write_file(path, csv.str());
  std::cout << rep.documents << " documents, " << rep.counted_tokens << " tokens counted, stopword set "
            << rep.stopword_set_id << "\n" << path.string() << "\n";
  return 0;
}

int cmd_render(const std::string& raster, const std::string& out, int scale) {
  const auto kind = affectmap::sidecar_kind(raster);
  std::string ppm;
  if (kind == "score") {
    ppm = render::render_raster(affectmap::read_score_raster(raster), render::score_ramp(), {0.0, 10.0}, scale);
  } else if (kind == "trend") {
    const auto t = affectmap::read_trend_raster(raster);
    ppm = render::render_raster(t, render::trend_ramp(), render::trend_domain(t), scale);
  } else {
    ppm = render::render_raster(affectmap::read_mismatch_raster(raster), render::mismatch_ramp(), {0.0, 1.0}, scale);
  }
  io::write_file(out, ppm);
  std::cout << out << "\n";
  return 0;
}

int cmd_synth(const std::string& out_dir, std::optional<std::uint64_t> seed, const std::string& spec_path,
              bool null_scenario) {
  synth::ScenarioSpec spec = null_scenario ? synth::ScenarioSpec::null_scenario() : synth::ScenarioSpec::standard();
  if (!spec_path.empty()) spec = synth::spec_from_json(nlohmann::json::parse(io::read_file(spec_path)));
  if (seed) spec.seed = *seed;
  const auto scenario = synth::generate_scenario(spec);
  const fs::path dir = out_dir;
  synth::write_scenario(scenario, spec, dir);

  const synth::ScenarioFiles files;
  pipeline::PipelineConfig c;
  c.perception = dir / files.perception;
  c.opinion = dir / files.opinion;
  c.zoning = dir / files.zoning;
  c.lexicon = dir / files.lexicon;
  c.corpus_pos = dir / files.corpus_pos;
  c.corpus_neg = dir / files.corpus_neg;
  c.stopwords = dir / files.stopwords;
  c.bbox = spec.bbox;
  c.cell_size = spec.cell_size;
  c.early_epoch = spec.early_epoch;
  c.late_epoch = spec.late_epoch;
  c.output_dir = dir / "out";
  c.seed = spec.seed;
  io::write_file(dir / "config.json", pipeline::config_to_json(c, dir).dump(2) + "\n");
  std::cout << scenario.perception.size() << " perception and " << scenario.opinion.size()
            << " opinion records\nconfig: " << (dir / "config.json").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Perception and opinion sentiment mapping for urban areas"};
  app.set_version_flag("--version", std::string(pipeline::kVersion));
  app.require_subcommand(1);

  CommonArgs run_args, stats_args, score_args, agg_args, regress_args, wf_args;
  auto* run = app.add_subcommand("run", "Run the full pipeline");
  add_common(run, run_args);

  auto* stats = app.add_subcommand("ingest-stats", "Validate inputs and report acceptance statistics");
  add_common(stats, stats_args);

  auto* score = app.add_subcommand("score-text", "Score opinion texts with the trained classifier");
  add_common(score, score_args);
  std::vector<std::string> texts;
  score->add_option("--text", texts, "Score these texts instead of the opinion file");

  auto* agg = app.add_subcommand("aggregate", "Build one channel/epoch score raster");
  add_common(agg, agg_args);
  std::string channel;
  int agg_epoch = 0;
  agg->add_option("--channel", channel, "perception or opinion")->required();
  agg->add_option("--epoch", agg_epoch, "Epoch year")->required();

  int scale = 4;
  auto* tr = app.add_subcommand("trend", "Late minus early score raster");
  std::string late, early, trend_out;
  tr->add_option("--late", late, "Late-epoch raster sidecar (.json)")->required()->check(CLI::ExistingFile);
  tr->add_option("--early", early, "Early-epoch raster sidecar (.json)")->required()->check(CLI::ExistingFile);
  tr->add_option("--out", trend_out, "Output path stem")->required();
  tr->add_option("--scale", scale, "Pixels per cell")->check(CLI::PositiveNumber);

  auto* mm = app.add_subcommand("mismatch", "Normalized divergence between channel trends");
  std::string mm_p, mm_o, mm_out;
  mm->add_option("--perception", mm_p, "Perception trend sidecar")->required()->check(CLI::ExistingFile);
  mm->add_option("--opinion", mm_o, "Opinion trend sidecar")->required()->check(CLI::ExistingFile);
  mm->add_option("--out", mm_out, "Output path stem")->required();
  mm->add_option("--scale", scale, "Pixels per cell")->check(CLI::PositiveNumber);

  auto* rg = app.add_subcommand("regress", "Zone x element cubic regressions");
  add_common(rg, regress_args);

  auto* wf = app.add_subcommand("wordfreq", "Top word frequencies for one epoch");
  add_common(wf, wf_args);
  int wf_epoch = 0;
  wf->add_option("--epoch", wf_epoch, "Epoch year")->required();

  auto* rd = app.add_subcommand("render", "Render a raster sidecar to PPM");
  std::string rd_in, rd_out;
  rd->add_option("--raster", rd_in, "Raster sidecar (.json)")->required()->check(CLI::ExistingFile);
  rd->add_option("--out", rd_out, "Output .ppm")->required();
  rd->add_option("--scale", scale, "Pixels per cell")->check(CLI::PositiveNumber);

  auto* sy = app.add_subcommand("synth", "Generate a synthetic scenario and matching config");
  std::string sy_out, sy_spec;
  std::optional<std::uint64_t> sy_seed;
  bool sy_null = false;
  sy->add_option("--out-dir", sy_out, "Scenario directory")->required();
  sy->add_option("--seed", sy_seed, "Override the scenario seed");
  sy->add_option("--spec", sy_spec, "Scenario spec (JSON)")->check(CLI::ExistingFile);
  sy->add_flag("--null", sy_null, "Plant nothing and add no noise");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_args);
    if (*stats) return cmd_ingest_stats(stats_args);
    if (*score) return cmd_score_text(score_args, texts);
    if (*agg) return cmd_aggregate(agg_args, channel, agg_epoch);
    if (*tr) return cmd_trend(late, early, trend_out, scale);
    if (*mm) return cmd_mismatch(mm_p, mm_o, mm_out, scale);
    if (*rg) return cmd_regress(regress_args);
    if (*wf) return cmd_wordfreq(wf_args, wf_epoch);
    if (*rd) return cmd_render(rd_in, rd_out, scale);
    if (*sy) return cmd_synth(sy_out, sy_seed, sy_spec, sy_null);
  } catch (const pipeline::StageError& e) {
    std::cerr << "urban-affect: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "urban-affect: " << app.get_subcommands().front()->get_name() << ": " << e.what() << "\n";
    return 1;
  }
  return 1;
}
