#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "crashlab/csv.hpp"
#include "crashlab/error.hpp"
#include "crashlab/jsonio.hpp"
#include "crashlab/records.hpp"
#include "crashlab/rng.hpp"
#include "crashlab/special_functions.hpp"

namespace crashlab {

inline constexpr int kNoise = -1;

struct ClusterAssignment {
  std::vector<int> labels;  // cluster id >= 0 or kNoise, in input order
  double eps = 0.0;
  int min_pts = 0;
  int n_clusters = 0;
};

// DBSCAN on the 1-D metric |a-b|. Neighborhood counts include the point
// itself. Clusters are numbered by ascending milepost of their first member;
// a border point reachable from several clusters joins the lowest-milepost
// one.
inline ClusterAssignment dbscan_1d(const std::vector<double>& mileposts, double eps,
                                   int min_pts) {
  if (mileposts.empty()) throw Error(Errc::EmptyInput, "no mileposts");
  if (!(eps > 0.0)) throw Error(Errc::DomainError, "eps must be positive");
  if (min_pts < 1) throw Error(Errc::DomainError, "min_pts must be >= 1");

  const std::size_t n = mileposts.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return mileposts[a] < mileposts[b]; });

  // Sorted view; neighborhoods are contiguous runs, found by two pointers.
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = mileposts[order[i]];

  std::vector<std::size_t> lo(n), hi(n);  // [lo, hi] inclusive neighborhood
  {
    std::size_t a = 0, b = 0;
    for (std::size_t i = 0; i < n; ++i) {
      while (xs[i] - xs[a] > eps) ++a;
      if (b < i) b = i;
      while (b + 1 < n && xs[b + 1] - xs[i] <= eps) ++b;
      lo[i] = a;
      hi[i] = b;
    }
  }

  std::vector<bool> core(n);
  for (std::size_t i = 0; i < n; ++i) core[i] = hi[i] - lo[i] + 1 >= static_cast<std::size_t>(min_pts);

  std::vector<int> sorted_labels(n, kNoise);
  int next_cluster = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!core[i] || sorted_labels[i] != kNoise) continue;
    const int cid = next_cluster++;
    // Expand from this seed; in 1-D the reachable set is a contiguous run.
    std::vector<std::size_t> stack = {i};
    sorted_labels[i] = cid;
    while (!stack.empty()) {
      const std::size_t j = stack.back();
      stack.pop_back();
      if (!core[j]) continue;
      for (std::size_t k = lo[j]; k <= hi[j]; ++k) {
        if (sorted_labels[k] != kNoise) continue;
        sorted_labels[k] = cid;
        if (core[k]) stack.push_back(k);
      }
    }
  }

  ClusterAssignment out;
  out.eps = eps;
  out.min_pts = min_pts;
  out.n_clusters = next_cluster;
  out.labels.assign(n, kNoise);
  for (std::size_t i = 0; i < n; ++i) out.labels[order[i]] = sorted_labels[i];
  return out;
}

namespace detail {

// Linear-interpolation quantile on a sorted copy (the common "type 7" rule).
inline double quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double idx = p * static_cast<double>(v.size() - 1);
  const std::size_t base = static_cast<std::size_t>(std::floor(idx));
  const double frac = idx - static_cast<double>(base);
  if (base + 1 >= v.size()) return v.back();
  return v[base] + frac * (v[base + 1] - v[base]);
}

inline double sample_std(const std::vector<double>& v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace detail

// h = 0.9 * min(std, IQR/1.34) * N^(-1/5). A zero IQR (heavily tied data)
// falls back to the standard deviation alone.
inline double silverman_bandwidth(const std::vector<double>& xs) {
  if (xs.size() < 2) throw Error(Errc::DegenerateInput, "need at least 2 points");
  const double sd = detail::sample_std(xs);
  if (sd == 0.0) throw Error(Errc::DegenerateInput, "all points identical");
  const double iqr = detail::quantile(xs, 0.75) - detail::quantile(xs, 0.25);
  const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
  return 0.9 * spread * std::pow(static_cast<double>(xs.size()), -0.2);
}

struct DensityProfile {
  std::vector<double> grid;
  std::vector<double> density;  // probability density per mile
  double bandwidth = 0.0;
  std::size_t n_source = 0;
};

// Gaussian kernel density, evaluated exactly at each grid point.
inline DensityProfile kde(const std::vector<double>& xs, const std::vector<double>& grid,
                          double h) {
  if (xs.empty()) throw Error(Errc::EmptyInput, "no source points");
  if (!(h > 0.0)) throw Error(Errc::NonPositiveBandwidth, "bandwidth must be positive");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (grid[i] < grid[i - 1]) throw Error(Errc::BadValue, "grid must be sorted ascending");

  DensityProfile out;
  out.grid = grid;
  out.bandwidth = h;
  out.n_source = xs.size();
  out.density.resize(grid.size());
  const double norm = 1.0 / (static_cast<double>(xs.size()) * h * std::sqrt(2.0 * M_PI));
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double sum = 0.0;
    for (double x : xs) {
      const double t = (grid[g] - x) / h;
      sum += std::exp(-0.5 * t * t);
    }
    out.density[g] = norm * sum;
  }
  return out;
}

// Default evaluation grid: 0.01-mile spacing over [-4h, length + 4h].
inline std::vector<double> default_kde_grid(double corridor_length, double h) {
  const double start = -4.0 * h;
  const double stop = corridor_length + 4.0 * h;
  std::vector<double> grid;
  for (long k = 0;; ++k) {
    const double x = start + 0.01 * static_cast<double>(k);
    if (x > stop + 1e-12) break;
    grid.push_back(x);
  }
  return grid;
}

inline DensityProfile kde_profile(const CrashDataset& ds) {
  std::vector<double> xs;
  xs.reserve(ds.size());
  for (const auto& r : ds.records) xs.push_back(r.milepost);
  const double h = silverman_bandwidth(xs);
  return kde(xs, default_kde_grid(ds.corridor_length, h), h);
}

struct HotspotRow {
  double start = 0.0;  // window [start, end)
  double end = 0.0;
  long count = 0;
  double density = 0.0;  // crashes per mile per year
  std::string priority;  // Critical / High / Moderate / None
};

inline const char* hotspot_priority(double density) {
  if (density > 10.0) return "Critical";
  if (density >= 8.0) return "High";
  if (density >= 5.0) return "Moderate";
  return "None";
}

// Raw window counts over fixed windows, scaled to crashes/mile/year and
// ranked by density (ties: lower milepost first).
inline std::vector<HotspotRow> hotspot_table(const CrashDataset& ds, double window,
                                             std::size_t top_k) {
  if (!(window > 0.0)) throw Error(Errc::DomainError, "window must be positive");
  const int years = ds.study_years.count();
  if (years < 1) throw Error(Errc::DomainError, "study window must span at least 1 year");
  const std::size_t n_win = static_cast<std::size_t>(
      std::max(1.0, std::ceil(ds.corridor_length / window - 1e-9)));
  std::vector<long> counts(n_win, 0);
  for (const auto& r : ds.records) {
    std::size_t idx = static_cast<std::size_t>(std::floor(r.milepost / window));
    if (idx >= n_win) idx = n_win - 1;
    ++counts[idx];
  }
  std::vector<HotspotRow> rows;
  rows.reserve(n_win);
  for (std::size_t k = 0; k < n_win; ++k) {
    HotspotRow row;
    row.start = static_cast<double>(k) * window;
    row.end = row.start + window;
    row.count = counts[k];
    row.density = static_cast<double>(counts[k]) / (window * static_cast<double>(years));
    row.priority = hotspot_priority(row.density);
    rows.push_back(row);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const HotspotRow& a, const HotspotRow& b) {
    if (a.density != b.density) return a.density > b.density;
    return a.start < b.start;
  });
  if (rows.size() > top_k) rows.resize(top_k);
  return rows;
}

struct SegmentGrid {
  double segment_length = 0.0;
  std::vector<long> counts;

  std::size_t n_segments() const { return counts.size(); }
  // Rook contiguity on a line: each interior segment borders two others.
  long weight_sum() const { return 2 * (static_cast<long>(n_segments()) - 1); }
  double mean_count() const {
    return static_cast<double>(std::accumulate(counts.begin(), counts.end(), 0L)) /
           static_cast<double>(n_segments());
  }
};

inline SegmentGrid build_segment_grid(const CrashDataset& ds, double segment_length) {
  if (!(segment_length > 0.0)) throw Error(Errc::DomainError, "segment length must be positive");
  const std::size_t n = static_cast<std::size_t>(
      std::max(1.0, std::ceil(ds.corridor_length / segment_length - 1e-9)));
  SegmentGrid grid;
  grid.segment_length = segment_length;
  grid.counts.assign(n, 0);
  for (const auto& r : ds.records) {
    std::size_t idx = static_cast<std::size_t>(std::floor(r.milepost / segment_length));
    if (idx >= n) idx = n - 1;
    ++grid.counts[idx];
  }
  return grid;
}

struct MoranResult {
  double i = 0.0;
  double expected_i = 0.0;
  double variance = 0.0;
  double z = 0.0;
  double p_value = 1.0;  // one-sided, clustering direction
  std::size_t n = 0;
  long weight_sum = 0;
  double s1 = 0.0;
  double s2 = 0.0;
};

namespace detail {

// Raw Moran's I on a path graph; weights are binary rook adjacency.
inline double moran_stat(const std::vector<double>& x) {
  const std::size_t n = x.size();
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  double cross = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) cross += (x[i] - mean) * (x[i + 1] - mean);
  cross *= 2.0;  // w_ij and w_ji
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  if (ss == 0.0) throw Error(Errc::ZeroVariance, "constant segment counts");
  const double w = 2.0 * static_cast<double>(n - 1);
  return static_cast<double>(n) / w * cross / ss;
}

}  // namespace detail

// Moran's I with the z-score under the normality assumption.
inline MoranResult morans_i(const SegmentGrid& grid) {
  const std::size_t n = grid.n_segments();
  if (n < 2) throw Error(Errc::DegenerateInput, "need at least 2 segments");
  std::vector<double> x(grid.counts.begin(), grid.counts.end());
  MoranResult r;
  r.n = n;
  r.weight_sum = grid.weight_sum();
  r.i = detail::moran_stat(x);
  const double nd = static_cast<double>(n);
  const double w = static_cast<double>(r.weight_sum);
  // Path graph: 2 endpoint segments of degree 1, the rest of degree 2.
  r.s1 = 4.0 * (nd - 1.0);
  r.s2 = 16.0 * nd - 24.0;
  r.expected_i = -1.0 / (nd - 1.0);
  r.variance = (nd * nd * r.s1 - nd * r.s2 + 3.0 * w * w) / ((nd - 1.0) * (nd + 1.0) * w * w) -
               r.expected_i * r.expected_i;
  r.z = (r.i - r.expected_i) / std::sqrt(r.variance);
  r.p_value = normal_sf(r.z);
  return r;
}

// Empirical one-sided p by random relabeling of segment counts. Permutation
// k draws its substream from (seed, k), so the result does not depend on
// evaluation order.
inline double morans_i_permutation(const SegmentGrid& grid, int n_perm, std::uint64_t seed) {
  if (n_perm < 99) throw Error(Errc::DomainError, "need at least 99 permutations");
  std::vector<double> x(grid.counts.begin(), grid.counts.end());
  const double observed = detail::moran_stat(x);
  long at_least = 0;
  for (int k = 0; k < n_perm; ++k) {
    Rng rng(seed, static_cast<std::uint64_t>(k));
    std::vector<double> perm = x;
    rng.shuffle(perm);
    if (detail::moran_stat(perm) >= observed) ++at_least;
  }
  return static_cast<double>(1 + at_least) / static_cast<double>(n_perm + 1);
}

inline Json density_profile_json(const DensityProfile& p) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["bandwidth"] = p.bandwidth;
  j["n_source"] = p.n_source;
  j["grid"] = p.grid;
  j["density"] = p.density;
  return j;
}

inline std::string density_profile_csv(const DensityProfile& p) {
  std::string out = "milepost,density\n";
  for (std::size_t i = 0; i < p.grid.size(); ++i)
    out += format_double(p.grid[i]) + "," + format_double(p.density[i]) + "\n";
  return out;
}

inline Json segment_grid_json(const SegmentGrid& g) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["segment_length"] = g.segment_length;
  j["n_segments"] = g.n_segments();
  j["weight_sum"] = g.weight_sum();
  j["counts"] = g.counts;
  return j;
}

inline std::string segment_grid_csv(const SegmentGrid& g) {
  std::string out = "segment,start,count\n";
  for (std::size_t i = 0; i < g.n_segments(); ++i)
    out += std::to_string(i) + "," + format_double(static_cast<double>(i) * g.segment_length) +
           "," + std::to_string(g.counts[i]) + "\n";
  return out;
}

inline Json moran_result_json(const MoranResult& r) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["i"] = r.i;
  j["expected_i"] = r.expected_i;
  j["variance"] = r.variance;
  j["z"] = r.z;
  j["p_value"] = r.p_value;
  j["n_segments"] = r.n;
  j["weight_sum"] = r.weight_sum;
  j["s1"] = r.s1;
  j["s2"] = r.s2;
  return j;
}

inline Json hotspot_table_json(const std::vector<HotspotRow>& rows) {
  Json arr = Json::array();
  for (const auto& r : rows) {
    Json j;
    j["start"] = r.start;
    j["end"] = r.end;
    j["count"] = r.count;
    j["density"] = r.density;
    j["priority"] = r.priority;
    arr.push_back(j);
  }
  Json out;
  out["schema_version"] = kSchemaVersion;
  out["windows"] = arr;
  return out;
}

inline std::string hotspot_table_markdown(const std::vector<HotspotRow>& rows) {
  std::string out =
      "| Rank | Window (mi) | Crashes | Density (crashes/mi/yr) | Priority |\n"
      "|---:|---|---:|---:|---|\n";
  int rank = 1;
  for (const auto& r : rows) {
    out += "| " + std::to_string(rank++) + " | " + format_double(r.start) + "-" +
           format_double(r.end) + " | " + std::to_string(r.count) + " | " +
           format_double(r.density) + " | " + r.priority + " |\n";
  }
  return out;
}

}  // namespace crashlab
