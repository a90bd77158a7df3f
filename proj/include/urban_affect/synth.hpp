#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "urban_affect/affectmap.hpp"
#include "urban_affect/geo.hpp"
#include "urban_affect/ingest.hpp"
#include "urban_affect/textsent.hpp"

namespace ua::synth {

/// Disk of cells (by cell-centre distance in cell units) whose planted
/// scores shift by the given per-channel, per-epoch deltas.
struct Hotspot {
  geo::CellIndex center;
  double radius = 2.0;
  double perception_early = 0.0;
  double perception_late = 0.0;
  double opinion_early = 0.0;
  double opinion_late = 0.0;

  double perception_trend() const { return perception_late - perception_early; }
  double opinion_trend() const { return opinion_late - opinion_early; }
  bool divergent() const { return perception_trend() != opinion_trend(); }
};

/// Inside a dedicated zone polygon, perception scores follow a cubic in one
/// element's proportion plus Gaussian noise.
struct PlantedRegression {
  geo::Zone zone = geo::Zone::Special;
  std::size_t element = 1;  // building
  std::array<double, 4> coefficients{5.8, -7.5, 38.3, -33.5};
  double noise_sigma = 0.3;
  double x_max = 0.6;  // proportion drawn uniformly from [0, x_max]
};

struct ScenarioSpec {
  std::uint64_t seed = 20162022;
  geo::BoundingBox bbox = geo::BoundingBox::study_region();
  double cell_size = 0.006;
  int early_epoch = 2016;
  int late_epoch = 2022;
  std::size_t perception_per_epoch = 10000;
  std::size_t opinion_per_epoch = 15000;
  double perception_noise = 0.5;
  double opinion_noise = 0.5;
  std::vector<Hotspot> hotspots;
  std::vector<PlantedRegression> regressions;
  std::size_t corpus_repeat = 20;  // training documents per level step
  std::size_t neutral_words = 40;

  /// ~50k records, two divergent hotspots, one concordant hotspot and one
  /// planted Special x building cubic.
  static ScenarioSpec standard();
  /// standard() with nothing planted and no noise.
  static ScenarioSpec null_scenario();

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

nlohmann::ordered_json to_json(const ScenarioSpec& spec);
/// Missing keys take the standard() values.
ScenarioSpec spec_from_json(const nlohmann::json& j);

struct AnswerKey {
  geo::Grid grid;
  /// Planted late - early per cell; nullopt where a planted-regression
  /// polygon touches the cell (those scores depend on the element draw).
  std::vector<affectmap::Cell> perception_trend;
  std::vector<affectmap::Cell> opinion_trend;
  /// Cells inside a hotspot whose two channel trends differ, row-major.
  std::vector<geo::CellIndex> hotspot_cells;
  std::vector<PlantedRegression> regressions;
};

nlohmann::ordered_json to_json(const AnswerKey& key);

struct Scenario {
  std::vector<ingest::PerceptionRecord> perception;
  std::vector<ingest::OpinionRecord> opinion;  // scores absent
  geo::ZoningSet zoning;
  textsent::Lexicon lexicon;
  std::vector<std::string> pos_docs;
  std::vector<std::string> neg_docs;
  textsent::StopwordSet stopwords;
  AnswerKey key;
};

/// Deterministic for a given spec. Throws std::invalid_argument when the
/// planted scores leave [0, 10].
Scenario generate_scenario(const ScenarioSpec& spec);

struct ScenarioFiles {
  std::filesystem::path perception = "perception.jsonl";
  std::filesystem::path opinion = "opinion.jsonl";
  std::filesystem::path zoning = "zoning.geojson";
  std::filesystem::path lexicon = "lexicon.tsv";
  std::filesystem::path corpus_pos = "corpus_pos.txt";
  std::filesystem::path corpus_neg = "corpus_neg.txt";
  std::filesystem::path stopwords = "stopwords.txt";
  std::filesystem::path answer_key = "answer_key.json";
  std::filesystem::path spec = "scenario.json";
};

/// Writes every scenario file into dir (names relative to dir).
void write_scenario(const Scenario& scenario, const ScenarioSpec& spec, const std::filesystem::path& dir,
                    const ScenarioFiles& files = {});

}  // namespace ua::synth
