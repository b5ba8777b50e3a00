#pragma once

#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "crashlab/descriptive.hpp"
#include "crashlab/error.hpp"
#include "crashlab/jsonio.hpp"
#include "crashlab/records.hpp"
#include "crashlab/special_functions.hpp"

namespace crashlab {

struct CellContribution {
  std::string label;
  double observed = 0.0;
  double expected = 0.0;
  double statistic = 0.0;
};

struct TestResult {
  std::string name;
  double statistic = 0.0;
  std::optional<int> df;  // absent for Z tests
  double p_value = 1.0;
  double alpha = 0.05;
  bool reject_null = false;
  std::vector<CellContribution> contributions;
  std::vector<std::string> notes;
};

inline constexpr double kDefaultAlpha = 0.05;

namespace detail {

inline void finalize(TestResult& t) { t.reject_null = t.p_value < t.alpha; }

}  // namespace detail

// Goodness of fit against expected proportions or counts. An empty expected
// vector means uniform; a vector summing to ~1 is read as proportions and
// rescaled to the observed total; anything else is used as counts verbatim.
inline TestResult chi_square_gof(const CountTable& observed,
                                 std::vector<double> expected = {},
                                 double alpha = kDefaultAlpha) {
  const std::size_t k = observed.size();
  if (k < 2) throw Error(Errc::DegenerateInput, "need at least 2 bins");
  if (expected.empty()) expected.assign(k, static_cast<double>(observed.total) / k);
  if (expected.size() != k)
    throw Error(Errc::LengthMismatch, "expected has " + std::to_string(expected.size()) +
                                          " entries for " + std::to_string(k) + " bins");
  const double esum = std::accumulate(expected.begin(), expected.end(), 0.0);
  if (std::fabs(esum - 1.0) < 1e-6)
    for (auto& e : expected) e *= static_cast<double>(observed.total);
  for (std::size_t i = 0; i < k; ++i)
    if (!(expected[i] > 0.0))
      throw Error(Errc::ZeroExpected, "expected count for bin '" + observed.bins[i] +
                                          "' is not positive");

  TestResult t;
  t.name = "chi_square_gof:" + observed.dimension;
  t.alpha = alpha;
  t.df = static_cast<int>(k) - 1;
  for (std::size_t i = 0; i < k; ++i) {
    const double o = static_cast<double>(observed.counts[i]);
    const double e = expected[i];
    const double cell = (o - e) * (o - e) / e;
    t.statistic += cell;
    t.contributions.push_back({observed.bins[i], o, e, cell});
  }
  t.p_value = chi_square_sf(t.statistic, *t.df);
  detail::finalize(t);
  return t;
}

struct ContingencyTable {
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  std::vector<std::vector<long>> counts;  // rows x cols

  std::size_t rows() const { return row_labels.size(); }
  std::size_t cols() const { return col_labels.size(); }

  void validate() const {
    if (rows() == 0 || cols() == 0) throw Error(Errc::EmptyTable, "empty contingency table");
    if (counts.size() != rows()) throw Error(Errc::LengthMismatch, "row count mismatch");
    for (const auto& row : counts) {
      if (row.size() != cols()) throw Error(Errc::LengthMismatch, "column count mismatch");
      for (long c : row)
        if (c < 0) throw Error(Errc::BadValue, "negative cell count");
    }
    if (grand_total() <= 0) throw Error(Errc::EmptyTable, "grand total is zero");
  }

  std::vector<long> row_totals() const {
    std::vector<long> t(rows(), 0);
    for (std::size_t i = 0; i < rows(); ++i)
      for (std::size_t j = 0; j < cols(); ++j) t[i] += counts[i][j];
    return t;
  }

  std::vector<long> col_totals() const {
    std::vector<long> t(cols(), 0);
    for (std::size_t i = 0; i < rows(); ++i)
      for (std::size_t j = 0; j < cols(); ++j) t[j] += counts[i][j];
    return t;
  }

  long grand_total() const {
    long g = 0;
    for (const auto& row : counts)
      for (long c : row) g += c;
    return g;
  }
};

inline TestResult chi_square_independence(const ContingencyTable& table,
                                          double alpha = kDefaultAlpha) {
  table.validate();
  const auto row_t = table.row_totals();
  const auto col_t = table.col_totals();
  const double grand = static_cast<double>(table.grand_total());

  TestResult t;
  t.name = "chi_square_independence";
  t.alpha = alpha;
  t.df = static_cast<int>((table.rows() - 1) * (table.cols() - 1));
  if (*t.df < 1) throw Error(Errc::DegenerateInput, "table needs at least 2 rows and 2 columns");

  for (std::size_t i = 0; i < table.rows(); ++i) {
    for (std::size_t j = 0; j < table.cols(); ++j) {
      const double e = static_cast<double>(row_t[i]) * static_cast<double>(col_t[j]) / grand;
      if (!(e > 0.0))
        throw Error(Errc::ZeroExpected,
                    "expected count is zero at cell (" + table.row_labels[i] + ", " +
                        table.col_labels[j] + "); merge sparse categories and retry");
      const double o = static_cast<double>(table.counts[i][j]);
      const double cell = (o - e) * (o - e) / e;
      t.statistic += cell;
      t.contributions.push_back({table.row_labels[i] + "|" + table.col_labels[j], o, e, cell});
    }
  }
  t.p_value = chi_square_sf(t.statistic, *t.df);
  detail::finalize(t);
  return t;
}

// Z = (observed - expected) / sqrt(expected), two-sided p.
inline TestResult poisson_rate_test(double observed, double expected,
                                    double alpha = kDefaultAlpha) {
  if (!(expected > 0.0)) throw Error(Errc::NonPositiveExpected, "expected count must be > 0");
  TestResult t;
  t.name = "poisson_rate_test";
  t.alpha = alpha;
  t.statistic = (observed - expected) / std::sqrt(expected);
  t.p_value = 2.0 * normal_sf(std::fabs(t.statistic));
  t.contributions.push_back({"rate", observed, expected, t.statistic});
  detail::finalize(t);
  return t;
}

// Collapses a Monday..Sunday table to {Weekday, Weekend}.
inline CountTable weekday_weekend_split(const CountTable& weekday_table) {
  if (weekday_table.size() != 7 || weekday_table.dimension != "weekday")
    throw Error(Errc::UnknownDimension, "expected a 7-bin weekday table");
  CountTable t;
  t.dimension = "weekday_vs_weekend";
  t.bins = {"Weekday", "Weekend"};
  t.counts = {0, 0};
  for (std::size_t i = 0; i < 7; ++i) t.counts[i < 5 ? 0 : 1] += weekday_table.counts[i];
  t.total = weekday_table.total;
  return t;
}

inline const std::vector<std::string>& time_of_day_labels() {
  static const std::vector<std::string> labels = {"00-03", "04-06", "07-09", "10-12",
                                                  "13-15", "16-18", "19-23"};
  return labels;
}

inline int time_of_day_bin(int hour) {
  if (hour <= 3) return 0;
  if (hour <= 6) return 1;
  if (hour <= 9) return 2;
  if (hour <= 12) return 3;
  if (hour <= 15) return 4;
  if (hour <= 18) return 5;
  return 6;
}

// Severity (none vs any injury) by 7 time-of-day bins. The time binning is a
// modeling choice, flagged in the result notes downstream.
inline ContingencyTable severity_by_time_table(const CrashDataset& ds) {
  ContingencyTable t;
  t.row_labels = time_of_day_labels();
  t.col_labels = {"NoInjury", "Injury"};
  t.counts.assign(7, std::vector<long>(2, 0));
  for (const auto& r : ds.records) ++t.counts[time_of_day_bin(r.hour())][r.injured() ? 1 : 0];
  return t;
}

// Accident type by dry/non-dry surface.
inline ContingencyTable type_by_surface_table(const CrashDataset& ds) {
  ContingencyTable t;
  for (int i = 0; i < kNumAccidentTypes; ++i)
    t.row_labels.push_back(to_string(static_cast<AccidentType>(i)));
  t.col_labels = {"Dry", "NonDry"};
  t.counts.assign(kNumAccidentTypes, std::vector<long>(2, 0));
  for (const auto& r : ds.records)
    ++t.counts[static_cast<int>(r.accident_type)][r.road_surface == RoadSurface::Dry ? 0 : 1];
  return t;
}

inline Json test_result_json(const TestResult& t) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["name"] = t.name;
  j["statistic"] = t.statistic;
  if (t.df)
    j["df"] = *t.df;
  else
    j["df"] = nullptr;
  j["p_value"] = t.p_value;
  j["alpha"] = t.alpha;
  j["reject_null"] = t.reject_null;
  Json cells = Json::array();
  for (const auto& c : t.contributions) {
    Json cell;
    cell["label"] = c.label;
    cell["observed"] = c.observed;
    cell["expected"] = c.expected;
    cell["statistic"] = c.statistic;
    cells.push_back(cell);
  }
  j["contributions"] = cells;
  if (!t.notes.empty()) j["notes"] = t.notes;
  return j;
}

}  // namespace crashlab
