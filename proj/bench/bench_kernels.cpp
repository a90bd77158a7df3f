// Serial vs OpenMP timings for the data-parallel stages. The worker count
// is the benchmark argument; 1 runs the serial reference.

#include <benchmark/benchmark.h>

#include "urban_affect/kernels.hpp"
#include "urban_affect/pipeline.hpp"
#include "urban_affect/regress.hpp"
#include "urban_affect/rng.hpp"
#include "urban_affect/synth.hpp"

using namespace ua;

namespace {

struct PointSet {
  geo::Grid grid = geo::make_grid(geo::BoundingBox::study_region(), 0.001);
  std::vector<geo::GeoPoint> points;
  std::vector<double> values;
  std::vector<kernels::Cell> sparse;

  PointSet() {
    Xoshiro256 rng(4242);
    const auto bb = grid.bbox();
    for (int i = 0; i < 500000; ++i) {
      points.push_back({rng.uniform(bb.west, bb.east), rng.uniform(bb.south, bb.north)});
      values.push_back(rng.uniform(0, 10));
    }
    sparse.resize(grid.cell_count());
    for (auto& c : sparse) {
      if (rng.uniform01() < 0.2) c = rng.uniform(0, 10);
    }
  }
};

const PointSet& point_set() {
  static const PointSet p;
  return p;
}

const synth::Scenario& scenario() {
  static const synth::Scenario sc = synth::generate_scenario(synth::ScenarioSpec::standard());
  return sc;
}

void BM_CellMeans(benchmark::State& state) {
  const auto& p = point_set();
  const int workers = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::cell_means(p.grid, p.points, p.values, workers));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(p.points.size()));
}

void BM_IdwFill(benchmark::State& state) {
  const auto& p = point_set();
  const int workers = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::idw_fill(p.grid, p.sparse, {2.0, 3}, workers));
}

void BM_ScoreTexts(benchmark::State& state) {
  const auto& sc = scenario();
  pipeline::Inputs in;
  in.lexicon = sc.lexicon;
  in.corpus_pos = sc.pos_docs;
  in.corpus_neg = sc.neg_docs;
  const auto model = pipeline::train_model({}, in);
  std::vector<std::string> texts;
  for (const auto& r : sc.opinion) texts.push_back(r.text);
  const int workers = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(textsent::score_texts(model, texts, sc.lexicon, workers));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(texts.size()));
}

void BM_RegressionSweep(benchmark::State& state) {
  const auto& sc = scenario();
  const std::vector<int> epochs = {2016, 2022};
  const int workers = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(regress::run_zone_element_regressions(sc.perception, sc.zoning, epochs, {}, workers));
  }
}

}  // namespace

BENCHMARK(BM_CellMeans)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_IdwFill)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScoreTexts)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RegressionSweep)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->UseRealTime()->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
