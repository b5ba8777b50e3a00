#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "crashlab/rng.hpp"
#include "crashlab/spatial.hpp"

namespace {

crashlab::CrashDataset dataset_with_mileposts(const std::vector<double>& mps,
                                              double length = 8.406) {
  crashlab::CrashDataset ds;
  ds.corridor_length = length;
  ds.study_years = {2019, 2023};
  int i = 0;
  for (double mp : mps) {
    crashlab::CrashRecord r;
    r.crash_id = "m" + std::to_string(i++);
    r.date = {2021, 5, 10};
    r.milepost = mp;
    ds.records.push_back(std::move(r));
  }
  return ds;
}

crashlab::SegmentGrid grid_from_counts(std::vector<long> counts, double seg = 0.1) {
  crashlab::SegmentGrid g;
  g.segment_length = seg;
  g.counts = std::move(counts);
  return g;
}

// Partition signature independent of cluster numbering: for each record,
// the sorted set of records sharing its label.
std::map<std::set<std::size_t>, int> partition_signature(const std::vector<int>& labels) {
  std::map<int, std::set<std::size_t>> groups;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] != crashlab::kNoise) groups[labels[i]].insert(i);
  std::map<std::set<std::size_t>, int> sig;
  for (auto& [label, members] : groups) sig[members]++;
  return sig;
}

}  // namespace

TEST_CASE("dbscan trivial cluster and noise cases", "[spatial]") {
  const auto all_same = crashlab::dbscan_1d({2.0, 2.0, 2.0}, 0.5, 3);
  REQUIRE(all_same.n_clusters == 1);
  REQUIRE(all_same.labels == std::vector<int>{0, 0, 0});

  const auto with_outlier = crashlab::dbscan_1d({2.0, 2.1, 1.9, 2.05, 4.1}, 0.5, 3);
  REQUIRE(with_outlier.n_clusters == 1);
  REQUIRE(with_outlier.labels[4] == crashlab::kNoise);
  REQUIRE(with_outlier.labels[0] == 0);

  REQUIRE_THROWS_AS(crashlab::dbscan_1d({}, 0.5, 3), crashlab::Error);
  REQUIRE_THROWS_AS(crashlab::dbscan_1d({1.0}, 0.0, 3), crashlab::Error);
  REQUIRE_THROWS_AS(crashlab::dbscan_1d({1.0}, 0.5, 0), crashlab::Error);
}

TEST_CASE("dbscan clusters are numbered by milepost and ignore input order", "[spatial]") {
  std::vector<double> pts = {7.0, 7.1, 7.05, 1.0, 1.1, 1.05, 4.0};
  const auto a = crashlab::dbscan_1d(pts, 0.2, 3);
  // The low-milepost cluster gets id 0 even though high mileposts came first.
  REQUIRE(a.labels[3] == 0);
  REQUIRE(a.labels[0] == 1);
  REQUIRE(a.labels[6] == crashlab::kNoise);

  crashlab::Rng rng(71, 0);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<std::size_t> perm = rng.permutation(pts.size());
    std::vector<double> shuffled(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) shuffled[i] = pts[perm[i]];
    const auto b = crashlab::dbscan_1d(shuffled, 0.2, 3);
    std::vector<int> unshuffled(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) unshuffled[perm[i]] = b.labels[i];
    REQUIRE(partition_signature(unshuffled) == partition_signature(a.labels));
    REQUIRE(unshuffled == a.labels);  // numbering by milepost is order-free
  }
}

TEST_CASE("dbscan noise never grows when eps grows", "[spatial]") {
  crashlab::Rng rng(73, 0);
  std::vector<double> pts;
  for (int i = 0; i < 80; ++i) pts.push_back(rng.uniform(0.0, 8.406));
  long prev_noise = LONG_MAX;
  for (double eps : {0.05, 0.1, 0.2, 0.4, 0.8}) {
    const auto res = crashlab::dbscan_1d(pts, eps, 3);
    const long noise = std::count(res.labels.begin(), res.labels.end(), crashlab::kNoise);
    REQUIRE(noise <= prev_noise);
    prev_noise = noise;
  }
}

TEST_CASE("dbscan core neighborhoods satisfy min_pts", "[spatial]") {
  crashlab::Rng rng(79, 1);
  std::vector<double> pts;
  for (int i = 0; i < 60; ++i) pts.push_back(rng.uniform(0.0, 4.0));
  const double eps = 0.15;
  const int min_pts = 4;
  const auto res = crashlab::dbscan_1d(pts, eps, min_pts);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    long within = 0;
    for (double q : pts)
      if (std::fabs(q - pts[i]) <= eps) ++within;
    if (res.labels[i] == crashlab::kNoise) {
      // Noise points must not have any core point within eps.
      for (std::size_t j = 0; j < pts.size(); ++j) {
        long jw = 0;
        for (double q : pts)
          if (std::fabs(q - pts[j]) <= eps) ++jw;
        if (jw >= min_pts) REQUIRE(std::fabs(pts[j] - pts[i]) > eps);
      }
    } else if (within >= min_pts) {
      // Core points share a label with every neighbor.
      for (std::size_t j = 0; j < pts.size(); ++j)
        if (std::fabs(pts[j] - pts[i]) <= eps) REQUIRE(res.labels[j] == res.labels[i]);
    }
  }
}

TEST_CASE("silverman bandwidth formula, fallback, homogeneity", "[spatial]") {
  // 100 evenly spaced points: compare against the formula evaluated with
  // independently computed spread measures.
  std::vector<double> xs;
  for (int i = 0; i < 100; ++i) xs.push_back(static_cast<double>(i));
  const double mean = 49.5;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / 99.0);
  const double iqr = 74.25 - 24.75;  // linear-interpolation quartiles of 0..99
  const double want = 0.9 * std::min(sd, iqr / 1.34) * std::pow(100.0, -0.2);
  REQUIRE_THAT(crashlab::silverman_bandwidth(xs), Catch::Matchers::WithinAbs(want, 1e-12));

  const double h2 = crashlab::silverman_bandwidth({0.0, 1.0});
  REQUIRE(h2 > 0.0);
  REQUIRE(std::isfinite(h2));

  for (double c : {0.1, 2.0, 7.5}) {
    std::vector<double> scaled;
    for (double x : xs) scaled.push_back(c * x);
    REQUIRE_THAT(crashlab::silverman_bandwidth(scaled),
                 Catch::Matchers::WithinRel(c * crashlab::silverman_bandwidth(xs), 1e-12));
  }

  // Ties collapse the IQR to zero; the std fallback keeps h positive.
  std::vector<double> tied(50, 3.0);
  tied.push_back(0.0);
  tied.push_back(6.0);
  REQUIRE(crashlab::silverman_bandwidth(tied) > 0.0);

  REQUIRE_THROWS_AS(crashlab::silverman_bandwidth({5.0, 5.0, 5.0}), crashlab::Error);
  REQUIRE_THROWS_AS(crashlab::silverman_bandwidth({1.0}), crashlab::Error);
}

TEST_CASE("kde point values and invariants", "[spatial]") {
  const double h = 0.25;
  const auto single = crashlab::kde({2.0}, {2.0}, h);
  REQUIRE_THAT(single.density[0],
               Catch::Matchers::WithinAbs(1.0 / (h * std::sqrt(2.0 * M_PI)), 1e-12));

  const auto sym = crashlab::kde({-1.0, 1.0}, {0.0}, h);
  const auto one_side = crashlab::kde({1.0}, {0.0}, h);
  REQUIRE_THAT(sym.density[0], Catch::Matchers::WithinAbs(one_side.density[0], 1e-12));

  crashlab::Rng rng(83, 0);
  std::vector<double> xs;
  for (int i = 0; i < 50; ++i) xs.push_back(rng.uniform(0.0, 8.0));
  const double hb = crashlab::silverman_bandwidth(xs);
  const double lo = *std::min_element(xs.begin(), xs.end()) - 4.0 * hb;
  const double hi = *std::max_element(xs.begin(), xs.end()) + 4.0 * hb;
  std::vector<double> grid;
  for (double x = lo; x <= hi; x += 0.005) grid.push_back(x);
  const auto prof = crashlab::kde(xs, grid, hb);
  double mass = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    REQUIRE(prof.density[i] >= 0.0);
    mass += 0.5 * (prof.density[i] + prof.density[i - 1]) * (grid[i] - grid[i - 1]);
  }
  REQUIRE(mass > 0.999);
  REQUIRE(mass < 1.001);

  // Duplicating every source point changes nothing.
  std::vector<double> doubled = xs;
  doubled.insert(doubled.end(), xs.begin(), xs.end());
  const auto prof2 = crashlab::kde(doubled, grid, hb);
  for (std::size_t i = 0; i < grid.size(); ++i)
    REQUIRE_THAT(prof2.density[i], Catch::Matchers::WithinAbs(prof.density[i], 1e-12));

  REQUIRE_THROWS_AS(crashlab::kde({}, {0.0}, h), crashlab::Error);
  REQUIRE_THROWS_AS(crashlab::kde({1.0}, {0.0}, 0.0), crashlab::Error);
  REQUIRE_THROWS_AS(crashlab::kde({1.0}, {1.0, 0.0}, h), crashlab::Error);
}

TEST_CASE("segment grid sizes and weights", "[spatial]") {
  const auto corridor = crashlab::build_segment_grid(dataset_with_mileposts({1.0, 2.0}), 0.1);
  REQUIRE(corridor.n_segments() == 85);
  REQUIRE(corridor.weight_sum() == 168);

  const auto two = crashlab::build_segment_grid(dataset_with_mileposts({0.2, 0.7}, 1.0), 0.5);
  REQUIRE(two.n_segments() == 2);
  REQUIRE(two.weight_sum() == 2);
  REQUIRE(two.counts == std::vector<long>{1, 1});

  const auto four = crashlab::build_segment_grid(dataset_with_mileposts({0.1}, 2.0), 0.5);
  REQUIRE(four.n_segments() == 4);
  REQUIRE(four.weight_sum() == 6);

  // All records land somewhere, endpoint included.
  const auto full =
      crashlab::build_segment_grid(dataset_with_mileposts({0.0, 3.37, 8.406, 8.406}), 0.1);
  REQUIRE(std::accumulate(full.counts.begin(), full.counts.end(), 0L) == 4);
  REQUIRE(full.counts[84] == 2);

  REQUIRE_THROWS_AS(crashlab::build_segment_grid(dataset_with_mileposts({1.0}), 0.0),
                    crashlab::Error);
}

TEST_CASE("moran alternating counts give exactly -1", "[spatial]") {
  const auto r = crashlab::morans_i(grid_from_counts({0, 1, 0, 1}));
  REQUIRE_THAT(r.i, Catch::Matchers::WithinAbs(-1.0, 1e-12));
  REQUIRE(r.n == 4);
  REQUIRE(r.weight_sum == 6);
  REQUIRE_THAT(r.expected_i, Catch::Matchers::WithinAbs(-1.0 / 3.0, 1e-12));
  REQUIRE(r.z < 0.0);

  REQUIRE_THROWS_AS(crashlab::morans_i(grid_from_counts({2, 2, 2, 2})), crashlab::Error);
}

TEST_CASE("moran path-graph structural constants for 85 segments", "[spatial]") {
  std::vector<long> counts(85, 0);
  crashlab::Rng rng(89, 0);
  for (int i = 0; i < 163; ++i) ++counts[rng.uniform_below(85)];
  const auto r = crashlab::morans_i(grid_from_counts(counts));
  REQUIRE(r.n == 85);
  REQUIRE(r.weight_sum == 168);
  REQUIRE_THAT(r.s1, Catch::Matchers::WithinAbs(336.0, 1e-12));
  REQUIRE_THAT(r.s2, Catch::Matchers::WithinAbs(1336.0, 1e-12));
  REQUIRE_THAT(r.expected_i, Catch::Matchers::WithinAbs(-1.0 / 84.0, 1e-12));
  REQUIRE(r.variance > 0.0);
  REQUIRE(r.p_value >= 0.0);
  REQUIRE(r.p_value <= 1.0);
}

TEST_CASE("moran is affine-invariant and reversal-symmetric", "[spatial]") {
  std::vector<long> counts = {5, 7, 6, 0, 1, 0, 2, 9, 8, 7, 1, 0, 3};
  const auto base = crashlab::morans_i(grid_from_counts(counts));
  std::vector<long> affine;
  for (long c : counts) affine.push_back(3 * c + 7);
  REQUIRE_THAT(crashlab::morans_i(grid_from_counts(affine)).i,
               Catch::Matchers::WithinAbs(base.i, 1e-12));
  std::vector<long> reversed(counts.rbegin(), counts.rend());
  REQUIRE_THAT(crashlab::morans_i(grid_from_counts(reversed)).i,
               Catch::Matchers::WithinAbs(base.i, 1e-12));
}

TEST_CASE("moran permutation p against exhaustive enumeration", "[spatial]") {
  // 4 distinct counts: all 24 orderings enumerable by hand.
  const std::vector<long> counts = {0, 1, 2, 5};
  std::vector<double> x(counts.begin(), counts.end());
  std::sort(x.begin(), x.end());
  const auto grid = grid_from_counts(counts);
  const double observed = crashlab::morans_i(grid).i;
  long ge = 0, total = 0;
  do {
    crashlab::SegmentGrid g;
    g.segment_length = 0.1;
    g.counts.assign(x.begin(), x.end());
    if (crashlab::morans_i(g).i >= observed) ++ge;
    ++total;
  } while (std::next_permutation(x.begin(), x.end()));
  REQUIRE(total == 24);
  const double exact = static_cast<double>(ge) / 24.0;
  const double empirical = crashlab::morans_i_permutation(grid, 9999, 12345);
  REQUIRE_THAT(empirical, Catch::Matchers::WithinAbs(exact, 0.03));
}

TEST_CASE("moran permutation p behavior on extreme layouts", "[spatial]") {
  const double p_anti = crashlab::morans_i_permutation(grid_from_counts({0, 1, 0, 1}), 999, 7);
  REQUIRE(p_anti > 0.5);

  const double p_clustered = crashlab::morans_i_permutation(
      grid_from_counts({5, 5, 5, 0, 0, 0, 0, 0, 0, 0}), 999, 7);
  REQUIRE(p_clustered <= 0.05);

  REQUIRE(crashlab::morans_i_permutation(grid_from_counts({1, 3, 2, 8}), 999, 42) ==
          crashlab::morans_i_permutation(grid_from_counts({1, 3, 2, 8}), 999, 42));

  REQUIRE_THROWS_AS(crashlab::morans_i_permutation(grid_from_counts({1, 2, 3}), 50, 1),
                    crashlab::Error);
}

TEST_CASE("analytic and permutation p agree under moderate clustering", "[spatial]") {
  // Smooth bump profile over 85 segments, similar in shape to a clustered
  // corridor, plus seeded noise.
  std::vector<long> counts(85, 0);
  crashlab::Rng rng(97, 0);
  for (std::size_t i = 0; i < 85; ++i) {
    const double a = std::exp(-0.5 * std::pow((static_cast<double>(i) - 20.0) / 6.0, 2.0));
    const double b = std::exp(-0.5 * std::pow((static_cast<double>(i) - 80.0) / 4.0, 2.0));
    counts[i] = rng.poisson(0.8 + 3.0 * a + 4.0 * b);
  }
  const auto analytic = crashlab::morans_i(grid_from_counts(counts));
  const double empirical = crashlab::morans_i_permutation(grid_from_counts(counts), 9999, 555);
  REQUIRE(std::fabs(analytic.p_value - empirical) <= 0.02);
}

TEST_CASE("hotspot densities, priorities, ranking", "[spatial]") {
  // 27 crashes in [8.0, 8.5), 21 in [2.0, 2.5), 3 in [5.0, 5.5).
  std::vector<double> mps;
  for (int i = 0; i < 27; ++i) mps.push_back(8.0 + 0.01 * i);
  for (int i = 0; i < 21; ++i) mps.push_back(2.0 + 0.01 * i);
  for (int i = 0; i < 3; ++i) mps.push_back(5.0 + 0.01 * i);
  const auto ds = dataset_with_mileposts(mps);
  const auto rows = crashlab::hotspot_table(ds, 0.5, 17);
  REQUIRE(rows.size() == 17);
  REQUIRE_THAT(rows[0].density, Catch::Matchers::WithinAbs(10.8, 1e-12));
  REQUIRE(rows[0].priority == "Critical");
  REQUIRE(rows[0].start == 8.0);
  REQUIRE(rows[0].count == 27);
  REQUIRE_THAT(rows[1].density, Catch::Matchers::WithinAbs(8.4, 1e-12));
  REQUIRE(rows[1].priority == "High");
  REQUIRE_THAT(rows[2].density, Catch::Matchers::WithinAbs(1.2, 1e-12));
  REQUIRE(rows[2].priority == "None");
  // Empty windows: zero density, no priority, ranked by milepost among ties.
  REQUIRE(rows[3].density == 0.0);
  REQUIRE(rows[3].priority == "None");
  REQUIRE(rows[3].start < rows[4].start);

  // density * window * years recovers the integer window count.
  for (const auto& row : rows) {
    const double recovered = row.density * 0.5 * 5.0;
    REQUIRE_THAT(recovered, Catch::Matchers::WithinAbs(std::round(recovered), 1e-9));
    REQUIRE(static_cast<long>(std::llround(recovered)) == row.count);
  }

  REQUIRE(crashlab::hotspot_table(ds, 0.5, 3).size() == 3);

  // Priority thresholds at the boundaries.
  REQUIRE(std::string(crashlab::hotspot_priority(10.01)) == "Critical");
  REQUIRE(std::string(crashlab::hotspot_priority(10.0)) == "High");
  REQUIRE(std::string(crashlab::hotspot_priority(8.0)) == "High");
  REQUIRE(std::string(crashlab::hotspot_priority(7.99)) == "Moderate");
  REQUIRE(std::string(crashlab::hotspot_priority(5.0)) == "Moderate");
  REQUIRE(std::string(crashlab::hotspot_priority(4.99)) == "None");
}

TEST_CASE("spatial serialization shapes", "[spatial]") {
  const auto ds = dataset_with_mileposts({1.0, 2.0, 2.1});
  const auto grid = crashlab::build_segment_grid(ds, 0.1);
  const auto gj = crashlab::segment_grid_json(grid);
  REQUIRE(gj["n_segments"] == 85);
  REQUIRE(gj["weight_sum"] == 168);
  const auto gcsv = crashlab::segment_grid_csv(grid);
  REQUIRE(gcsv.substr(0, 20) == "segment,start,count\n");

  const auto prof = crashlab::kde_profile(ds);
  const auto pj = crashlab::density_profile_json(prof);
  REQUIRE(pj["n_source"] == 3);
  REQUIRE(pj["grid"].size() == pj["density"].size());
  const auto pcsv = crashlab::density_profile_csv(prof);
  REQUIRE(pcsv.substr(0, 17) == "milepost,density\n");

  const auto rows = crashlab::hotspot_table(ds, 0.5, 5);
  const auto hmd = crashlab::hotspot_table_markdown(rows);
  REQUIRE(hmd.find("| Rank |") == 0);
  REQUIRE(crashlab::hotspot_table_json(rows)["windows"].size() == 5);
}
