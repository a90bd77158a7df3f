#pragma once

// Data-parallel kernels. Each kernel has a serial reference in
// ua::kernels::serial and an OpenMP version in ua::kernels::omp; both
// produce bit-identical results because every reduction runs in a fixed
// order inside one thread. The dispatching wrappers pick serial for
// workers <= 1.

#include <cstddef>
#include <cstdint>
#include <exception>
#include <optional>
#include <span>
#include <vector>

#include "urban_affect/geo.hpp"

namespace ua::kernels {

/// Raster cell value; nullopt is a cell with no data.
using Cell = std::optional<double>;

/// Index into the grid's flat cell array, or kOutside.
inline constexpr std::size_t kOutside = static_cast<std::size_t>(-1);

struct CellReduction {
  std::vector<Cell> values;
  std::vector<std::uint32_t> support;
  std::size_t outside = 0;
};

struct IdwParams {
  double power = 2.0;
  int radius = 1;
};

namespace serial {

std::vector<std::size_t> locate_all(const geo::Grid& grid, std::span<const geo::GeoPoint> points);

/// Mean per cell. Values are reduced in input order, so callers sort
/// records (by id) first. mean = first + sum(v - first) / n.
CellReduction cell_means(const geo::Grid& grid, std::span<const geo::GeoPoint> points,
                         std::span<const double> values);

/// Fills missing cells from present cells within Chebyshev radius using
/// 1/d^p weights; present cells are copied through.
std::vector<Cell> idw_fill(const geo::Grid& grid, std::span<const Cell> cells, const IdwParams& params);

}  // namespace serial

namespace omp {

std::vector<std::size_t> locate_all(const geo::Grid& grid, std::span<const geo::GeoPoint> points,
                                    int workers);
CellReduction cell_means(const geo::Grid& grid, std::span<const geo::GeoPoint> points,
                         std::span<const double> values, int workers);
std::vector<Cell> idw_fill(const geo::Grid& grid, std::span<const Cell> cells, const IdwParams& params,
                           int workers);

}  // namespace omp

std::vector<std::size_t> locate_all(const geo::Grid& grid, std::span<const geo::GeoPoint> points,
                                    int workers);
CellReduction cell_means(const geo::Grid& grid, std::span<const geo::GeoPoint> points,
                         std::span<const double> values, int workers);
std::vector<Cell> idw_fill(const geo::Grid& grid, std::span<const Cell> cells, const IdwParams& params,
                           int workers);

/// Runs fn(i) for i in [0, n). Each index must write only its own output
/// slot; with workers > 1 the calls are spread over OpenMP threads. If any
/// call throws, the exception from the lowest index is rethrown afterwards,
/// matching what the serial loop would have thrown first.
template <class Fn>
void for_each_index(std::size_t n, int workers, Fn&& fn) {
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const auto count = static_cast<std::int64_t>(n);
  std::exception_ptr first_error;
  std::size_t first_index = n;
#pragma omp parallel for num_threads(workers) schedule(dynamic, 16)
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(ua_for_each_index_error)
      {
        if (static_cast<std::size_t>(i) < first_index) {
          first_index = static_cast<std::size_t>(i);
          first_error = std::current_exception();
        }
      }
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace ua::kernels
