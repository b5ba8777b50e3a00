#pragma once

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "crashlab/csv.hpp"
#include "crashlab/error.hpp"
#include "crashlab/jsonio.hpp"
#include "crashlab/records.hpp"

namespace crashlab {

// Ordered histogram over one dimension; bins always cover the full domain,
// so zero counts are explicit.
struct CountTable {
  std::string dimension;
  std::vector<std::string> bins;
  std::vector<long> counts;
  long total = 0;

  std::size_t size() const { return bins.size(); }
};

inline const std::vector<std::string>& month_labels() {
  static const std::vector<std::string> labels = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                                  "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
  return labels;
}

inline const std::vector<std::string>& weekday_labels() {
  static const std::vector<std::string> labels = {"Monday", "Tuesday",  "Wednesday", "Thursday",
                                                  "Friday", "Saturday", "Sunday"};
  return labels;
}

namespace detail {

inline CountTable make_table(std::string dimension, std::vector<std::string> bins) {
  CountTable t;
  t.dimension = std::move(dimension);
  t.bins = std::move(bins);
  t.counts.assign(t.bins.size(), 0);
  return t;
}

inline void finish(CountTable& t) {
  t.total = std::accumulate(t.counts.begin(), t.counts.end(), 0L);
}

}  // namespace detail

// Histogram of mileposts in [k*width, (k+1)*width). A value exactly on an
// edge goes to the upper bin; the corridor end closes the last bin.
inline CountTable bin_mileposts(const CrashDataset& ds, double width) {
  if (!(width > 0.0)) throw Error(Errc::DomainError, "bin width must be positive");
  const std::size_t n_bins = static_cast<std::size_t>(
      std::max(1.0, std::ceil(ds.corridor_length / width - 1e-9)));
  std::vector<std::string> labels;
  labels.reserve(n_bins);
  for (std::size_t k = 0; k < n_bins; ++k) labels.push_back(format_double(k * width));
  auto t = detail::make_table("milepost_bin", std::move(labels));
  for (const auto& r : ds.records) {
    std::size_t idx = static_cast<std::size_t>(std::floor(r.milepost / width));
    if (idx >= n_bins) idx = n_bins - 1;
    ++t.counts[idx];
  }
  detail::finish(t);
  return t;
}

inline CountTable count_by(const CrashDataset& ds, const std::string& dimension) {
  if (dimension == "year") {
    std::vector<std::string> labels;
    for (int y = ds.study_years.first; y <= ds.study_years.last; ++y)
      labels.push_back(std::to_string(y));
    auto t = detail::make_table("year", std::move(labels));
    for (const auto& r : ds.records) ++t.counts[r.date.year - ds.study_years.first];
    detail::finish(t);
    return t;
  }
  if (dimension == "month") {
    auto t = detail::make_table("month", month_labels());
    for (const auto& r : ds.records) ++t.counts[r.date.month - 1];
    detail::finish(t);
    return t;
  }
  if (dimension == "weekday") {
    auto t = detail::make_table("weekday", weekday_labels());
    for (const auto& r : ds.records) ++t.counts[r.date.weekday_mon0()];
    detail::finish(t);
    return t;
  }
  if (dimension == "hour") {
    std::vector<std::string> labels;
    for (int h = 0; h < 24; ++h) labels.push_back(std::to_string(h));
    auto t = detail::make_table("hour", std::move(labels));
    for (const auto& r : ds.records) ++t.counts[r.hour()];
    detail::finish(t);
    return t;
  }
  if (dimension == "accident_type") {
    std::vector<std::string> labels;
    for (int i = 0; i < kNumAccidentTypes; ++i)
      labels.push_back(to_string(static_cast<AccidentType>(i)));
    auto t = detail::make_table("accident_type", std::move(labels));
    for (const auto& r : ds.records) ++t.counts[static_cast<int>(r.accident_type)];
    detail::finish(t);
    return t;
  }
  if (dimension == "road_surface") {
    std::vector<std::string> labels;
    for (int i = 0; i < kNumRoadSurfaces; ++i)
      labels.push_back(to_string(static_cast<RoadSurface>(i)));
    auto t = detail::make_table("road_surface", std::move(labels));
    for (const auto& r : ds.records) ++t.counts[static_cast<int>(r.road_surface)];
    detail::finish(t);
    return t;
  }
  if (dimension == "light") {
    std::vector<std::string> labels;
    for (int i = 0; i < kNumLights; ++i) labels.push_back(to_string(static_cast<Light>(i)));
    auto t = detail::make_table("light", std::move(labels));
    for (const auto& r : ds.records) ++t.counts[static_cast<int>(r.light)];
    detail::finish(t);
    return t;
  }
  if (dimension == "weather") {
    std::vector<std::string> labels;
    for (int i = 0; i < kNumWeathers; ++i) labels.push_back(to_string(static_cast<Weather>(i)));
    auto t = detail::make_table("weather", std::move(labels));
    for (const auto& r : ds.records) ++t.counts[static_cast<int>(r.weather)];
    detail::finish(t);
    return t;
  }
  if (dimension == "milepost_bin") return bin_mileposts(ds, 0.5);
  throw Error(Errc::UnknownDimension, dimension);
}

inline const std::vector<std::string>& count_dimensions() {
  static const std::vector<std::string> dims = {"year",          "month",        "weekday",
                                                "hour",          "accident_type", "road_surface",
                                                "light",         "weather",       "milepost_bin"};
  return dims;
}

// Product-moment correlation. NaN entries mark missing values; a pair is
// dropped when either side is missing.
inline double pearson_correlation(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw Error(Errc::LengthMismatch, "series lengths differ");
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::isnan(x[i]) || std::isnan(y[i])) continue;
    xs.push_back(x[i]);
    ys.push_back(y[i]);
  }
  const std::size_t n = xs.size();
  if (n < 2) throw Error(Errc::DegenerateInput, "fewer than 2 complete pairs");
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw Error(Errc::DegenerateInput, "zero variance");
  return sxy / std::sqrt(sxx * syy);
}

inline std::string count_table_csv(const CountTable& t) {
  std::string out = "bin,count\n";
  for (std::size_t i = 0; i < t.size(); ++i)
    out += csv::join_line({t.bins[i], std::to_string(t.counts[i])}) + "\n";
  return out;
}

inline Json count_table_json(const CountTable& t) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["dimension"] = t.dimension;
  j["bins"] = t.bins;
  j["counts"] = t.counts;
  j["total"] = t.total;
  return j;
}

}  // namespace crashlab
