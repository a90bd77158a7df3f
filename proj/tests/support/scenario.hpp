#pragma once

// Runs the mapping stages in memory on a generated scenario.

#include <map>

#include "urban_affect/affectmap.hpp"
#include "urban_affect/pipeline.hpp"
#include "urban_affect/synth.hpp"

namespace ua::fixture {

struct ScenarioMaps {
  std::map<std::pair<affectmap::Channel, int>, affectmap::ScoreRaster> scores;
  affectmap::TrendRaster perception_trend;
  affectmap::TrendRaster opinion_trend;
  affectmap::MismatchRaster mismatch;
};

inline ScenarioMaps analyze(synth::Scenario sc, const synth::ScenarioSpec& spec, int workers = 1) {
  using affectmap::Channel;
  pipeline::PipelineConfig cfg;
  cfg.workers = workers;
  pipeline::Inputs in;
  in.lexicon = sc.lexicon;
  in.corpus_pos = sc.pos_docs;
  in.corpus_neg = sc.neg_docs;
  pipeline::score_opinions(sc.opinion, pipeline::train_model(cfg, in), sc.lexicon, workers);

  ScenarioMaps out;
  const auto& grid = sc.key.grid;
  for (int epoch : {spec.early_epoch, spec.late_epoch}) {
    out.scores[{Channel::Perception, epoch}] =
        affectmap::aggregate_cells(grid, affectmap::scored_points(std::span<const ingest::PerceptionRecord>(sc.perception), epoch),
                                   Channel::Perception, epoch, workers)
            .raster;
    out.scores[{Channel::Opinion, epoch}] =
        affectmap::aggregate_cells(grid, affectmap::scored_points(std::span<const ingest::OpinionRecord>(sc.opinion), epoch),
                                   Channel::Opinion, epoch, workers)
            .raster;
  }
  out.perception_trend = affectmap::trend(out.scores.at({Channel::Perception, spec.late_epoch}),
                                          out.scores.at({Channel::Perception, spec.early_epoch}));
  out.opinion_trend = affectmap::trend(out.scores.at({Channel::Opinion, spec.late_epoch}),
                                       out.scores.at({Channel::Opinion, spec.early_epoch}));
  out.mismatch = affectmap::mismatch(out.perception_trend, out.opinion_trend);
  return out;
}

}  // namespace ua::fixture
