#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "urban_affect/affectmap.hpp"
#include "urban_affect/geo.hpp"
#include "urban_affect/ingest.hpp"
#include "urban_affect/regress.hpp"
#include "urban_affect/textsent.hpp"

namespace ua::pipeline {

inline constexpr const char* kToolName = "urban-affect";
inline constexpr const char* kVersion = "1.0.0";
/// Environment variable that overrides the configured output directory.
inline constexpr const char* kOutputDirEnv = "URBAN_AFFECT_OUTPUT_DIR";

/// A failure attributed to one named pipeline stage.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& message)
      : std::runtime_error(stage + ": " + message), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct PipelineConfig {
  std::filesystem::path perception;
  std::filesystem::path opinion;
  std::filesystem::path zoning;
  std::filesystem::path lexicon;
  std::filesystem::path corpus_pos;
  std::filesystem::path corpus_neg;
  std::filesystem::path stopwords;  // empty: built-in list
  geo::BoundingBox bbox = geo::BoundingBox::study_region();
  double cell_size = geo::kDefaultCellSize;
  int early_epoch = 2016;
  int late_epoch = 2022;
  affectmap::SmoothParams smoothing;
  regress::RegressionFilter filter;
  double sentiment_alpha = 1.0;
  std::size_t wordfreq_top_k = 50;
  int render_scale = 4;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 2016;
  int workers = 1;

  /// Throws StageError("config", ...) on an invalid setting.
  void validate() const;
};

/// Reads a JSON config. Relative paths resolve against the config's
/// directory; absent keys keep their defaults.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
/// Paths are written relative to base_dir when they live under it.
nlohmann::ordered_json config_to_json(const PipelineConfig& c, const std::filesystem::path& base_dir);

/// Applies the output-directory environment override, if set.
void apply_environment(PipelineConfig& c);

struct Inputs {
  std::vector<ingest::PerceptionRecord> perception;
  std::vector<ingest::OpinionRecord> opinion;
  ingest::IngestReport perception_report;
  ingest::IngestReport opinion_report;
  geo::ZoningSet zoning;
  textsent::Lexicon lexicon;
  std::vector<std::string> corpus_pos;
  std::vector<std::string> corpus_neg;
  textsent::StopwordSet stopwords;
};

enum InputMask : unsigned {
  kPerceptionInput = 1u << 0,
  kOpinionInput = 1u << 1,
  kZoningInput = 1u << 2,
  kTextInputs = 1u << 3,  // lexicon, corpora, stopwords
  kAllInputs = 0xFu,
};

/// Loads the requested inputs, raising StageError named after the input.
Inputs load_inputs(const PipelineConfig& c, unsigned mask = kAllInputs);

/// Trains the naive Bayes scorer on the configured corpora.
textsent::SentimentModel train_model(const PipelineConfig& c, const Inputs& in);

/// Fills missing opinion scores (10 x P(positive)).
void score_opinions(std::vector<ingest::OpinionRecord>& records, const textsent::SentimentModel& model,
                    const textsent::Lexicon& lex, int workers);

geo::Grid make_config_grid(const PipelineConfig& c);

/// Writes raster CSV + sidecar, a PPM image and a GeoJSON export; returns
/// the written paths.
std::vector<std::filesystem::path> write_score_outputs(const std::filesystem::path& dir, const std::string& stem,
                                                       const affectmap::ScoreRaster& r, int scale);
std::vector<std::filesystem::path> write_trend_outputs(const std::filesystem::path& dir, const std::string& stem,
                                                       const affectmap::TrendRaster& r, int scale);
std::vector<std::filesystem::path> write_mismatch_outputs(const std::filesystem::path& dir, const std::string& stem,
                                                          const affectmap::MismatchRaster& r, int scale);

struct RunResult {
  std::filesystem::path output_dir;
  std::vector<std::filesystem::path> outputs;  // relative to output_dir, manifest last
};

/// Full pipeline: ingest, text scoring, per-epoch rasters, trends,
/// mismatch, regressions, word frequencies, renders, reports and a
/// manifest of SHA-256 digests. Throws StageError on a fatal failure.
RunResult run(const PipelineConfig& c);

}  // namespace ua::pipeline
