#include "urban_affect/regress.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include "urban_affect/io.hpp"
#include "urban_affect/kernels.hpp"
#include "urban_affect/percept.hpp"

namespace ua::regress {

namespace {

constexpr int kTerms = 4;

struct Reflector {
  std::size_t row = 0;     // first row the reflector touches
  std::vector<double> v;   // Householder vector over rows [row, n)
  double beta = 0.0;       // H = I - beta v v^T
};

void apply_reflector(const Reflector& h, std::vector<double>& col) {
  double dot = 0.0;
  for (std::size_t i = 0; i < h.v.size(); ++i) dot += h.v[i] * col[h.row + i];
  const double s = h.beta * dot;
  for (std::size_t i = 0; i < h.v.size(); ++i) col[h.row + i] -= s * h.v[i];
}

double norm_from(const std::vector<double>& col, std::size_t start) {
  double scale = 0.0;
  for (std::size_t i = start; i < col.size(); ++i) scale = std::max(scale, std::abs(col[i]));
  if (scale == 0.0) return 0.0;
  double sum = 0.0;
  for (std::size_t i = start; i < col.size(); ++i) {
    const double t = col[i] / scale;
    sum += t * t;
  }
  return scale * std::sqrt(sum);
}

}  // namespace

CubicFit fit_cubic(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("fit_cubic: xs and ys differ in length");
  const std::size_t n = xs.size();
  if (n < kMinObservations) throw std::invalid_argument("insufficient n: need at least 5 observations");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) throw std::invalid_argument("fit_cubic: non-finite input");
  }

  double y_mean = 0.0;
  for (double y : ys) y_mean += y;
  y_mean /= static_cast<double>(n);
  double ss_tot = 0.0;
  for (double y : ys) ss_tot += (y - y_mean) * (y - y_mean);
  if (!(ss_tot > 0.0)) throw std::invalid_argument("zero variance in y");

  // Householder QR, admitting powers in ascending order and skipping any
  // whose remaining norm is negligible relative to its original norm.
  std::vector<Reflector> reflectors;
  std::vector<int> kept;
  std::vector<std::vector<double>> r_cols;  // upper-triangular part of accepted columns
  CubicFit fit;
  fit.n = n;
  for (int p = 0; p < kTerms; ++p) {
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = std::pow(xs[i], p);
    const double original = norm_from(col, 0);
    for (const auto& h : reflectors) apply_reflector(h, col);
    const std::size_t k = reflectors.size();
    const double remaining = norm_from(col, k);
    if (original == 0.0 || remaining <= kCollinearityTolerance * original || k >= n) {
      fit.dropped_terms.push_back(p);
      continue;
    }
    Reflector h;
    h.row = k;
    h.v.assign(col.begin() + static_cast<std::ptrdiff_t>(k), col.end());
    const double alpha = col[k] >= 0.0 ? -remaining : remaining;
    h.v[0] -= alpha;
    double vtv = 0.0;
    for (double v : h.v) vtv += v * v;
    h.beta = 2.0 / vtv;
    apply_reflector(h, col);
    reflectors.push_back(std::move(h));
    col.resize(k + 1);
    r_cols.push_back(std::move(col));
    kept.push_back(p);
  }
  if (kept.empty() || kept.front() != 0) throw std::invalid_argument("fit_cubic: constant column rejected");

  const int rank = static_cast<int>(kept.size());
  fit.df1 = rank - 1;
  if (fit.df1 < 1) throw std::invalid_argument("fewer than 2 distinct x values");
  std::set<double> distinct(xs.begin(), xs.end());
  if (distinct.size() < static_cast<std::size_t>(fit.df1 + 1)) {
    throw std::invalid_argument("fewer distinct x values than retained terms");
  }
  if (n < static_cast<std::size_t>(fit.df1 + 2)) throw std::invalid_argument("insufficient n for retained terms");
  fit.df2 = static_cast<int>(n) - fit.df1 - 1;

  std::vector<double> qty(ys.begin(), ys.end());
  for (const auto& h : reflectors) apply_reflector(h, qty);
  std::vector<double> b(rank, 0.0);
  for (int i = rank - 1; i >= 0; --i) {
    double s = qty[i];
    for (int j = i + 1; j < rank; ++j) s -= r_cols[j][i] * b[j];
    b[i] = s / r_cols[i][i];
  }
  std::array<double, kTerms> coef{};
  for (int j = 0; j < rank; ++j) coef[kept[j]] = b[j];
  fit.constant = coef[0];
  fit.b1 = coef[1];
  fit.b2 = coef[2];
  fit.b3 = coef[3];

  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ys[i] - fit.predict(xs[i]);
    ss_res += r * r;
  }
  fit.r_square = std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0);
  if (fit.r_square >= 1.0) {
    fit.f_stat = std::numeric_limits<double>::infinity();
    fit.sig = 0.0;
  } else {
    fit.f_stat = f_statistic(fit.r_square, fit.df1, fit.df2);
    fit.sig = f_p_value(fit.f_stat, fit.df1, fit.df2);
  }
  return fit;
}

double f_statistic(double r_square, int df1, int df2) {
  if (df1 < 1 || df2 < 1) throw std::invalid_argument("f_statistic: degrees of freedom must be >= 1");
  if (!(r_square >= 0.0 && r_square <= 1.0)) throw std::invalid_argument("f_statistic: r_square outside [0, 1]");
  if (r_square == 1.0) throw std::overflow_error("f_statistic: r_square = 1 gives an infinite F");
  return (r_square / df1) / ((1.0 - r_square) / df2);
}

namespace {

// Continued fraction for I_x(a, b) (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw std::runtime_error("incomplete_beta: continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("incomplete_beta: a and b must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("incomplete_beta: x outside [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double f_p_value(double f, double df1, double df2) {
  if (!(df1 >= 1.0) || !(df2 >= 1.0)) throw std::invalid_argument("f_p_value: degrees of freedom must be >= 1");
  if (!(f >= 0.0)) throw std::invalid_argument("f_p_value: F must be non-negative");
  if (f == 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  const double x = df2 / (df2 + df1 * f);
  return std::clamp(incomplete_beta(0.5 * df2, 0.5 * df1, x), 0.0, 1.0);
}

std::string format_sig(double p) {
  if (p < 0.001) return "<.001";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", p);
  std::string s = buf;
  if (s.starts_with("0.")) s.erase(0, 1);
  return s;
}

std::string zone_key_name(const ZoneKey& z) {
  return z ? std::string(geo::zone_name(*z)) : std::string(geo::kUnzonedName);
}

RegressionReport run_zone_element_regressions(std::span<const ingest::PerceptionRecord> records,
                                              const geo::ZoningSet& zones, std::span<const int> epochs,
                                              const RegressionFilter& filter, int workers) {
  RegressionReport report;
  report.filter = filter;

  std::vector<const ingest::PerceptionRecord*> sorted;
  sorted.reserve(records.size());
  for (const auto& r : records) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->id < b->id; });

  std::vector<ZoneKey> zone_of(sorted.size());
  kernels::for_each_index(sorted.size(), workers,
                          [&](std::size_t i) { zone_of[i] = geo::assign_zone(sorted[i]->point, zones); });

  // Unzoned sorts last.
  auto zone_rank = [](const ZoneKey& z) { return z ? static_cast<int>(*z) : static_cast<int>(geo::kZoneCount); };
  std::set<int> wanted(epochs.begin(), epochs.end());
  std::map<std::pair<int, int>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (!wanted.contains(sorted[i]->epoch)) continue;
    groups[{sorted[i]->epoch, zone_rank(zone_of[i])}].push_back(i);
  }

  struct Task {
    int epoch;
    ZoneKey zone;
    std::size_t element;
    const std::vector<std::size_t>* members;
  };
  std::vector<Task> tasks;
  for (const auto& [key, members] : groups) {
    ZoneKey z = key.second < static_cast<int>(geo::kZoneCount) ? ZoneKey(static_cast<geo::Zone>(key.second)) : std::nullopt;
    for (std::size_t e = 0; e < percept::kElementCount; ++e) tasks.push_back({key.first, z, e, &members});
  }

  struct Outcome {
    std::optional<CubicFit> fit;
    std::string reason;
  };
  std::vector<Outcome> outcomes(tasks.size());
  kernels::for_each_index(tasks.size(), workers, [&](std::size_t t) {
    const Task& task = tasks[t];
    const auto& members = *task.members;
    if (members.size() < kMinObservations) {
      outcomes[t].reason = "insufficient n";
      return;
    }
    std::vector<double> xs, ys;
    xs.reserve(members.size());
    ys.reserve(members.size());
    for (std::size_t i : members) {
      xs.push_back(sorted[i]->segments[task.element]);
      ys.push_back(sorted[i]->score);
    }
    try {
      outcomes[t].fit = fit_cubic(xs, ys);
    } catch (const std::exception& e) {
      outcomes[t].reason = e.what();
    }
  });

  for (std::size_t t = 0; t < tasks.size(); ++t) {
    const Task& task = tasks[t];
    if (outcomes[t].fit) {
      RegressionRow row{task.epoch, task.zone, task.element, *outcomes[t].fit, false};
      row.reported = filter.passes(row.fit);
      report.rows.push_back(std::move(row));
    } else {
      report.skipped.push_back({task.epoch, task.zone, task.element, task.members->size(), outcomes[t].reason});
    }
  }
  return report;
}

namespace {

std::string number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return io::format_double(v);
}

std::string dropped_list(const std::vector<int>& dropped) {
  std::string s;
  for (int p : dropped) {
    if (!s.empty()) s += ';';
    s += 'b';
    s += std::to_string(p);
  }
  return s;
}

}  // namespace

std::string regression_csv(const RegressionReport& report) {
  std::string out = "epoch,zone,element,r_square,f,df1,df2,sig,constant,b1,b2,b3,n,reported,dropped_terms\n";
  for (const auto& row : report.rows) {
    const auto& f = row.fit;
    out += std::to_string(row.epoch) + ',' + io::csv_field(zone_key_name(row.zone)) + ',' +
           percept::kElementNames[row.element] + ',' + number(f.r_square) + ',' + number(f.f_stat) + ',' +
           std::to_string(f.df1) + ',' + std::to_string(f.df2) + ',' + number(f.sig) + ',' + number(f.constant) +
           ',' + number(f.b1) + ',' + number(f.b2) + ',' + number(f.b3) + ',' + std::to_string(f.n) + ',' +
           (row.reported ? "true" : "false") + ',' + dropped_list(f.dropped_terms) + '\n';
  }
  return out;
}

std::string regression_summary(const RegressionReport& report) {
  std::string out;
  char buf[512];
  std::snprintf(buf, sizeof buf, "%-52s %8s %10s %4s %5s %7s %14s %14s %14s %14s\n", "Model", "R Square", "F", "df1",
                "df2", "Sig.", "Constant", "b1", "b2", "b3");
  out += buf;
  for (const auto& row : report.rows) {
    if (!row.reported) continue;
    const auto& f = row.fit;
    std::string label = std::to_string(row.epoch) + " " + zone_key_name(row.zone) + ": " +
                        percept::kElementNames[row.element];
    std::snprintf(buf, sizeof buf, "%-52s %8.3f %10.3f %4d %5d %7s %14.6g %14.6g %14.6g %14.6g\n", label.c_str(),
                  f.r_square, f.f_stat, f.df1, f.df2, format_sig(f.sig).c_str(), f.constant, f.b1, f.b2, f.b3);
    out += buf;
  }
  return out;
}

}  // namespace ua::regress
