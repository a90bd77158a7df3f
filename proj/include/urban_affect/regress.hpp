#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "urban_affect/geo.hpp"
#include "urban_affect/ingest.hpp"

namespace ua::regress {

/// y = constant + b1 x + b2 x^2 + b3 x^3 with the overall-model F test.
struct CubicFit {
  double constant = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;
  double b3 = 0.0;
  double r_square = 0.0;
  double f_stat = 0.0;  // +inf for a perfect fit
  int df1 = 0;
  int df2 = 0;
  double sig = 1.0;  // 0 for a perfect fit
  std::size_t n = 0;
  std::vector<int> dropped_terms;  // powers removed as collinear

  std::array<double, 4> coefficients() const { return {constant, b1, b2, b3}; }
  double predict(double x) const { return constant + x * (b1 + x * (b2 + x * b3)); }
};

/// Relative column-norm threshold below which a power is treated as
/// collinear with the lower powers.
inline constexpr double kCollinearityTolerance = 1e-10;

/// Least squares on [1, x, x^2, x^3] via Householder QR. A power whose
/// column is numerically in the span of the lower powers is dropped and
/// df1 shrinks accordingly. Throws std::invalid_argument when n < 5, when
/// there are too few distinct x values or observations for the retained
/// terms, or when y has zero variance.
CubicFit fit_cubic(std::span<const double> xs, std::span<const double> ys);

/// (r2 / df1) / ((1 - r2) / df2). Throws std::overflow_error for r2 == 1 and
/// std::invalid_argument outside the domain.
double f_statistic(double r_square, int df1, int df2);

/// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction.
double incomplete_beta(double a, double b, double x);

/// Upper-tail probability of F(df1, df2) at f.
double f_p_value(double f, double df1, double df2);

/// Significance as a summary table prints it: "<.001" or e.g. ".002".
std::string format_sig(double p);

struct RegressionFilter {
  double min_r_square = 0.3;
  double max_sig = 0.01;
  bool passes(const CubicFit& fit) const { return fit.r_square > min_r_square && fit.sig < max_sig; }
};

/// nullopt stands for "Unzoned".
using ZoneKey = std::optional<geo::Zone>;
std::string zone_key_name(const ZoneKey& z);

struct RegressionRow {
  int epoch = 0;
  ZoneKey zone;
  std::size_t element = 0;
  CubicFit fit;
  bool reported = false;
};

struct SkippedCombination {
  int epoch = 0;
  ZoneKey zone;
  std::size_t element = 0;
  std::size_t n = 0;
  std::string reason;
};

struct RegressionReport {
  std::vector<RegressionRow> rows;
  std::vector<SkippedCombination> skipped;
  RegressionFilter filter;
};

inline constexpr std::size_t kMinObservations = 5;

/// Fits score on each element proportion for every (epoch, zone, element)
/// that has records. Rows and skips come out in (epoch, zone, element)
/// order, zones in legend order with Unzoned last.
RegressionReport run_zone_element_regressions(std::span<const ingest::PerceptionRecord> records,
                                              const geo::ZoningSet& zones, std::span<const int> epochs,
                                              const RegressionFilter& filter = {}, int workers = 1);

/// CSV with columns epoch,zone,element,r_square,f,df1,df2,sig,constant,b1,b2,b3,n,reported,dropped_terms.
std::string regression_csv(const RegressionReport& report);

/// Fixed-width table of the reported rows with display-form significance.
std::string regression_summary(const RegressionReport& report);

}  // namespace ua::regress
