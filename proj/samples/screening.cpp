// Corridor screening: ranked hotspot windows, the density peak, segment
// autocorrelation, cluster extents, and the SPF yardstick.
#include <crashlab/hsm.hpp>
#include <crashlab/ingest.hpp>
#include <crashlab/spatial.hpp>
#include <crashlab/synth.hpp>

#include <algorithm>
#include <cstdio>
#include <utility>

int main(int argc, char** argv) {
  crashlab::CrashDataset ds;
  if (argc > 1) {
    auto parsed = crashlab::parse_csv(argv[1]);
    if (!parsed.row_errors.empty()) {
      const auto& e = parsed.row_errors.front();
      std::fprintf(stderr, "%s: row %zu: %s\n", argv[1], e.row, e.message.c_str());
      return 1;
    }
    ds = std::move(parsed.dataset);
  } else {
    ds = crashlab::generate(crashlab::default_marginal_spec(), crashlab::GeneratorConfig{});
  }

  std::fputs(crashlab::hotspot_table_markdown(crashlab::hotspot_table(ds, 0.5, 5)).c_str(),
             stdout);

  const auto profile = crashlab::kde_profile(ds);
  const auto peak =
      std::max_element(profile.density.begin(), profile.density.end()) - profile.density.begin();
  std::printf("\ndensity peak at milepost %.2f (h = %.3f)\n", profile.grid[peak],
              profile.bandwidth);

  const auto grid = crashlab::build_segment_grid(ds, 0.1);
  const auto moran = crashlab::morans_i(grid);
  const double perm_p = crashlab::morans_i_permutation(grid, 999, 7);
  std::printf("Moran I %.3f over %zu segments, z %.2f, p %s (permutation %s)\n", moran.i,
              grid.n_segments(), moran.z, crashlab::detail::p_display(moran.p_value).c_str(),
              crashlab::detail::p_display(perm_p).c_str());

  std::vector<double> mileposts;
  for (const auto& r : ds.records) mileposts.push_back(r.milepost);
  const auto clusters = crashlab::dbscan_1d(mileposts, 0.5, 3);
  const auto noise = std::count(clusters.labels.begin(), clusters.labels.end(), crashlab::kNoise);
  std::printf("DBSCAN(0.5, 3): %d clusters, %ld noise points\n", clusters.n_clusters,
              static_cast<long>(noise));

  const auto prediction = crashlab::predict_corridor(crashlab::default_corridor_spec(),
                                                     static_cast<double>(ds.size()));
  std::printf("\n");
  std::fputs(crashlab::spf_prediction_markdown(prediction).c_str(), stdout);
  return 0;
}
