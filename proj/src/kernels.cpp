#include "urban_affect/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace ua::kernels {

namespace {

void check_sizes(std::span<const geo::GeoPoint> points, std::span<const double> values) {
  if (points.size() != values.size()) throw std::invalid_argument("cell_means: points/values size mismatch");
}

void check_idw(const geo::Grid& grid, std::span<const Cell> cells, const IdwParams& p) {
  if (cells.size() != grid.cell_count()) throw std::invalid_argument("idw_fill: cell count does not match grid");
  if (!(p.power > 0.0) || !std::isfinite(p.power)) throw std::invalid_argument("idw power must be positive");
  if (p.radius < 1) throw std::invalid_argument("idw radius must be at least 1 cell");
}

// Weighted mean of present neighbours within the Chebyshev window, visited
// row-major; shared by both implementations so the arithmetic is identical.
Cell idw_cell(const geo::Grid& grid, std::span<const Cell> cells, const IdwParams& p, int row, int col) {
  double num = 0.0;
  double den = 0.0;
  for (int r = row - p.radius; r <= row + p.radius; ++r) {
    if (r < 0 || r >= grid.n_rows()) continue;
    for (int c = col - p.radius; c <= col + p.radius; ++c) {
      if (c < 0 || c >= grid.n_cols() || (r == row && c == col)) continue;
      const Cell& v = cells[grid.flat({r, c})];
      if (!v) continue;
      const double dr = r - row;
      const double dc = c - col;
      const double w = 1.0 / std::pow(std::sqrt(dr * dr + dc * dc), p.power);
      num += w * *v;
      den += w;
    }
  }
  if (den > 0.0) return num / den;
  return std::nullopt;
}

struct RunningMean {
  double first = 0.0;
  double diff_sum = 0.0;
  std::uint32_t n = 0;

  void add(double v) {
    if (n == 0) first = v;
    diff_sum += v - first;
    ++n;
  }
  Cell value() const {
    if (n == 0) return std::nullopt;
    return first + diff_sum / static_cast<double>(n);
  }
};

}  // namespace

namespace serial {

std::vector<std::size_t> locate_all(const geo::Grid& grid, std::span<const geo::GeoPoint> points) {
  std::vector<std::size_t> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto c = grid.locate(points[i]);
    out[i] = c ? grid.flat(*c) : kOutside;
  }
  return out;
}

CellReduction cell_means(const geo::Grid& grid, std::span<const geo::GeoPoint> points,
                         std::span<const double> values) {
  check_sizes(points, values);
  std::vector<RunningMean> acc(grid.cell_count());
  CellReduction out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto c = grid.locate(points[i]);
    if (!c) {
      ++out.outside;
      continue;
    }
    acc[grid.flat(*c)].add(values[i]);
  }
  out.values.resize(acc.size());
  out.support.resize(acc.size());
  for (std::size_t k = 0; k < acc.size(); ++k) {
    out.values[k] = acc[k].value();
    out.support[k] = acc[k].n;
  }
  return out;
}

std::vector<Cell> idw_fill(const geo::Grid& grid, std::span<const Cell> cells, const IdwParams& params) {
  check_idw(grid, cells, params);
  std::vector<Cell> out(cells.begin(), cells.end());
  for (int r = 0; r < grid.n_rows(); ++r) {
    for (int c = 0; c < grid.n_cols(); ++c) {
      const std::size_t k = grid.flat({r, c});
      if (!cells[k]) out[k] = idw_cell(grid, cells, params, r, c);
    }
  }
  return out;
}

}  // namespace serial

namespace omp {

std::vector<std::size_t> locate_all(const geo::Grid& grid, std::span<const geo::GeoPoint> points,
                                    int workers) {
  std::vector<std::size_t> out(points.size());
  const auto n = static_cast<std::int64_t>(points.size());
#pragma omp parallel for num_threads(workers) schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    auto c = grid.locate(points[i]);
    out[i] = c ? grid.flat(*c) : kOutside;
  }
  return out;
}

CellReduction cell_means(const geo::Grid& grid, std::span<const geo::GeoPoint> points,
                         std::span<const double> values, int workers) {
  check_sizes(points, values);
  const auto where = locate_all(grid, points, workers);
  const std::size_t cells = grid.cell_count();

  // Stable bucket by cell so each cell sees its records in input order.
  std::vector<std::size_t> start(cells + 1, 0);
  CellReduction out;
  for (std::size_t w : where) {
    if (w == kOutside) {
      ++out.outside;
    } else {
      ++start[w + 1];
    }
  }
  for (std::size_t k = 0; k < cells; ++k) start[k + 1] += start[k];
  std::vector<std::size_t> order(start[cells]);
  std::vector<std::size_t> fill(start.begin(), start.end() - 1);
  for (std::size_t i = 0; i < where.size(); ++i) {
    if (where[i] != kOutside) order[fill[where[i]]++] = i;
  }

  out.values.resize(cells);
  out.support.resize(cells);
  const auto n = static_cast<std::int64_t>(cells);
#pragma omp parallel for num_threads(workers) schedule(static)
  for (std::int64_t k = 0; k < n; ++k) {
    RunningMean m;
    for (std::size_t j = start[k]; j < start[k + 1]; ++j) m.add(values[order[j]]);
    out.values[k] = m.value();
    out.support[k] = m.n;
  }
  return out;
}

std::vector<Cell> idw_fill(const geo::Grid& grid, std::span<const Cell> cells, const IdwParams& params,
                           int workers) {
  check_idw(grid, cells, params);
  std::vector<Cell> out(cells.begin(), cells.end());
  const auto n = static_cast<std::int64_t>(cells.size());
#pragma omp parallel for num_threads(workers) schedule(static)
  for (std::int64_t k = 0; k < n; ++k) {
    if (cells[k]) continue;
    auto idx = grid.unflat(static_cast<std::size_t>(k));
    out[k] = idw_cell(grid, cells, params, idx.row, idx.col);
  }
  return out;
}

}  // namespace omp

std::vector<std::size_t> locate_all(const geo::Grid& grid, std::span<const geo::GeoPoint> points,
                                    int workers) {
  return workers <= 1 ? serial::locate_all(grid, points) : omp::locate_all(grid, points, workers);
}

CellReduction cell_means(const geo::Grid& grid, std::span<const geo::GeoPoint> points,
                         std::span<const double> values, int workers) {
  return workers <= 1 ? serial::cell_means(grid, points, values) : omp::cell_means(grid, points, values, workers);
}

std::vector<Cell> idw_fill(const geo::Grid& grid, std::span<const Cell> cells, const IdwParams& params,
                           int workers) {
  return workers <= 1 ? serial::idw_fill(grid, cells, params) : omp::idw_fill(grid, cells, params, workers);
}

}  // namespace ua::kernels
