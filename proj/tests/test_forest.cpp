#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "crashlab/forest.hpp"
#include "crashlab/rng.hpp"

namespace {

// Class 0 sits at negative x0, class 1 at positive; noise columns are junk.
crashlab::FeatureMatrix signal_matrix(std::uint64_t seed, std::size_t n0, std::size_t n1,
                                      std::size_t n_noise) {
  crashlab::FeatureMatrix fm;
  fm.columns.push_back("x0");
  for (std::size_t j = 0; j < n_noise; ++j) fm.columns.push_back("noise" + std::to_string(j));
  crashlab::Rng rng(seed, 7);
  for (std::size_t i = 0; i < n0 + n1; ++i) {
    const int y = i < n0 ? 0 : 1;
    std::vector<double> x;
    x.push_back(y == 0 ? rng.uniform(-1.0, -0.05) : rng.uniform(0.05, 1.0));
    for (std::size_t j = 0; j < n_noise; ++j) x.push_back(rng.uniform(0.0, 1.0));
    fm.rows.push_back(std::move(x));
    fm.labels.push_back(y);
  }
  return fm;
}

crashlab::FeatureMatrix constant_matrix(std::size_t n0, std::size_t n1) {
  crashlab::FeatureMatrix fm;
  fm.columns = {"a", "b"};
  for (std::size_t i = 0; i < n0 + n1; ++i) {
    fm.rows.push_back({1.0, 2.0});
    fm.labels.push_back(i < n0 ? 0 : 1);
  }
  return fm;
}

crashlab::CrashDataset tiny_dataset() {
  crashlab::CrashDataset ds;
  ds.corridor_length = 8.406;
  ds.study_years = {2019, 2023};
  crashlab::CrashRecord a;
  a.crash_id = "a";
  a.date = {2021, 6, 15};  // Tuesday
  a.time_min = 485;
  a.milepost = 2.021;
  a.road_surface = crashlab::RoadSurface::Wet;
  a.light = crashlab::Light::Dark;
  a.weather = crashlab::Weather::Rain;
  a.speed_max = 55.0;
  a.num_vehicles = 2;
  a.injury_severity = 2;
  crashlab::CrashRecord b;
  b.crash_id = "b";
  b.date = {2020, 1, 3};  // Friday
  b.time_min = 0;
  b.milepost = 0.0;
  b.num_vehicles = 1;
  crashlab::CrashRecord c;
  c.crash_id = "c";
  c.date = {2022, 11, 20};  // Sunday
  c.time_min = 1439;
  c.milepost = 8.406;
  c.road_surface = crashlab::RoadSurface::Ice;
  c.light = crashlab::Light::Dusk;
  c.weather = crashlab::Weather::Fog;
  c.speed_max = 35.0;
  c.num_vehicles = 3;
  ds.records = {a, b, c};
  return ds;
}

// Injuries concentrate in two short milepost windows; everything else is noise.
crashlab::CrashDataset planted_dataset(std::uint64_t seed, int n) {
  crashlab::CrashDataset ds;
  ds.corridor_length = 8.406;
  ds.study_years = {2019, 2023};
  crashlab::Rng rng(seed, 3);
  for (int i = 0; i < n; ++i) {
    crashlab::CrashRecord r;
    r.crash_id = "p" + std::to_string(i);
    r.date.year = static_cast<int>(rng.uniform_int(2019, 2023));
    r.date.month = static_cast<unsigned>(rng.uniform_int(1, 12));
    r.date.day = static_cast<unsigned>(rng.uniform_int(1, 28));
    r.time_min = static_cast<int>(rng.uniform_int(0, 1439));
    r.milepost = rng.uniform(0.0, 8.406);
    r.accident_type = static_cast<crashlab::AccidentType>(rng.uniform_int(0, 6));
    r.road_surface = static_cast<crashlab::RoadSurface>(rng.uniform_int(0, 5));
    r.light = static_cast<crashlab::Light>(rng.uniform_int(0, 3));
    r.weather = static_cast<crashlab::Weather>(rng.uniform_int(0, 4));
    r.speed_max = rng.uniform(25.0, 60.0);
    r.num_vehicles = static_cast<int>(rng.uniform_int(1, 3));
    const bool hot = (r.milepost >= 2.0 && r.milepost <= 2.6) ||
                     (r.milepost >= 7.8 && r.milepost <= 8.4);
    const double p_injury = hot ? 0.9 : 0.08;
    r.injury_severity = rng.uniform() < p_injury ? 1 : 0;
    ds.records.push_back(std::move(r));
  }
  return ds;
}

long count_label(const std::vector<int>& v, int y) {
  return std::count(v.begin(), v.end(), y);
}

}  // namespace

TEST_CASE("feature matrix encodes records with exclusive one-hot groups", "[forest]") {
  const auto ds = tiny_dataset();
  const auto fm = crashlab::make_feature_matrix(ds);

  const std::vector<std::string> expect = {
      "milepost",       "time_min",       "weekday",       "speed_max",
      "num_vehicles",   "surface=Dry",    "surface=Wet",   "surface=Ice",
      "surface=Snow",   "surface=Sand",   "surface=Other", "light=Daylight",
      "light=Dark",     "light=Dawn",     "light=Dusk",    "weather=Clear",
      "weather=Cloudy", "weather=Rain",   "weather=Fog",   "weather=Other",
      "season=Winter",  "season=Spring",  "season=Summer", "season=Fall"};
  REQUIRE(fm.columns == expect);
  REQUIRE(fm.n_rows() == 3);
  REQUIRE(fm.labels == std::vector<int>{1, 0, 0});

  const auto& a = fm.rows[0];
  REQUIRE(a[0] == 2.021);
  REQUIRE(a[1] == 485.0);
  REQUIRE(a[2] == 1.0);  // Tuesday
  REQUIRE(a[3] == 55.0);
  REQUIRE(a[4] == 2.0);
  REQUIRE(a[6] == 1.0);   // Wet
  REQUIRE(a[12] == 1.0);  // Dark
  REQUIRE(a[17] == 1.0);  // Rain
  REQUIRE(a[22] == 1.0);  // Summer

  const auto& b = fm.rows[1];
  REQUIRE(b[2] == 4.0);   // Friday
  REQUIRE(b[3] == 45.0);  // median of the observed 55 and 35
  REQUIRE(b[5] == 1.0);
  REQUIRE(b[11] == 1.0);
  REQUIRE(b[15] == 1.0);
  REQUIRE(b[20] == 1.0);  // January is Winter

  const auto& c = fm.rows[2];
  REQUIRE(c[2] == 6.0);  // Sunday
  REQUIRE(c[7] == 1.0);
  REQUIRE(c[14] == 1.0);
  REQUIRE(c[18] == 1.0);
  REQUIRE(c[23] == 1.0);  // November is Fall

  // each one-hot group contributes exactly one active indicator per row
  for (const auto& row : fm.rows) {
    REQUIRE(std::accumulate(row.begin() + 5, row.begin() + 11, 0.0) == 1.0);
    REQUIRE(std::accumulate(row.begin() + 11, row.begin() + 15, 0.0) == 1.0);
    REQUIRE(std::accumulate(row.begin() + 15, row.begin() + 20, 0.0) == 1.0);
    REQUIRE(std::accumulate(row.begin() + 20, row.end(), 0.0) == 1.0);
    for (double v : row) REQUIRE(std::isfinite(v));
  }

  REQUIRE_THROWS_AS(crashlab::make_feature_matrix(crashlab::CrashDataset{}), crashlab::Error);
}

TEST_CASE("feature matrix falls back to zero speed when none observed", "[forest]") {
  auto ds = tiny_dataset();
  for (auto& r : ds.records) r.speed_max.reset();
  const auto fm = crashlab::make_feature_matrix(ds);
  for (const auto& row : fm.rows) REQUIRE(row[3] == 0.0);
}

TEST_CASE("season boundaries follow the meteorological calendar", "[forest]") {
  REQUIRE(crashlab::season_of_month(12) == 0);
  REQUIRE(crashlab::season_of_month(1) == 0);
  REQUIRE(crashlab::season_of_month(2) == 0);
  REQUIRE(crashlab::season_of_month(3) == 1);
  REQUIRE(crashlab::season_of_month(5) == 1);
  REQUIRE(crashlab::season_of_month(6) == 2);
  REQUIRE(crashlab::season_of_month(8) == 2);
  REQUIRE(crashlab::season_of_month(9) == 3);
  REQUIRE(crashlab::season_of_month(11) == 3);
}

TEST_CASE("stratified split rounds per class and partitions the rows", "[forest]") {
  const auto fm = signal_matrix(11, 109, 54, 3);
  const auto split = crashlab::stratified_split(fm, 0.2, 42);

  REQUIRE(split.test.n_rows() == 33);
  REQUIRE(split.train.n_rows() == 130);
  REQUIRE(count_label(split.test.labels, 0) == 22);
  REQUIRE(count_label(split.test.labels, 1) == 11);
  REQUIRE(count_label(split.train.labels, 0) == 87);
  REQUIRE(count_label(split.train.labels, 1) == 43);

  // train and test indices partition 0..n-1
  auto all = split.train_rows;
  all.insert(all.end(), split.test_rows.begin(), split.test_rows.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size(); ++i) REQUIRE(all[i] == i);

  // split rows carry their source labels and features
  for (std::size_t k = 0; k < split.test_rows.size(); ++k) {
    REQUIRE(split.test.labels[k] == fm.labels[split.test_rows[k]]);
    REQUIRE(split.test.rows[k] == fm.rows[split.test_rows[k]]);
  }

  const auto again = crashlab::stratified_split(fm, 0.2, 42);
  REQUIRE(again.test_rows == split.test_rows);
  const auto other = crashlab::stratified_split(fm, 0.2, 43);
  REQUIRE(other.test_rows != split.test_rows);
  REQUIRE(count_label(other.test.labels, 0) == 22);
  REQUIRE(count_label(other.test.labels, 1) == 11);
}

TEST_CASE("stratified split small case and error contracts", "[forest]") {
  const auto fm = signal_matrix(5, 5, 5, 0);
  const auto split = crashlab::stratified_split(fm, 0.2, 9);
  REQUIRE(split.test.n_rows() == 2);
  REQUIRE(count_label(split.test.labels, 0) == 1);
  REQUIRE(count_label(split.test.labels, 1) == 1);

  REQUIRE_THROWS_AS(crashlab::stratified_split(fm, 0.0, 9), crashlab::Error);
  REQUIRE_THROWS_AS(crashlab::stratified_split(fm, 1.0, 9), crashlab::Error);

  crashlab::FeatureMatrix single;
  single.columns = {"x"};
  single.rows = {{1.0}, {2.0}};
  single.labels = {0, 0};
  try {
    crashlab::stratified_split(single, 0.5, 1);
    FAIL("expected SingleClass");
  } catch (const crashlab::Error& e) {
    REQUIRE(e.code() == crashlab::Errc::SingleClass);
  }
}

TEST_CASE("bootstrap samples draw with replacement at full cardinality", "[forest]") {
  const std::size_t n = 130;
  double unique_sum = 0.0;
  for (std::uint64_t t = 0; t < 100; ++t) {
    crashlab::Rng rng(77, t);
    auto rows = crashlab::bootstrap_sample(n, rng);
    REQUIRE(rows.size() == n);
    for (auto r : rows) REQUIRE(r < n);
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    unique_sum += static_cast<double>(rows.size()) / static_cast<double>(n);
  }
  const double mean_unique = unique_sum / 100.0;
  REQUIRE(mean_unique > 0.632 - 0.05);
  REQUIRE(mean_unique < 0.632 + 0.05);

  crashlab::Rng r1(5, 3), r2(5, 3);
  REQUIRE(crashlab::bootstrap_sample(50, r1) == crashlab::bootstrap_sample(50, r2));
}

TEST_CASE("separable data trains to perfect accuracy with importance on the cut", "[forest]") {
  const auto fm = signal_matrix(21, 30, 30, 1);
  crashlab::ForestParams params;
  params.n_trees = 10;
  const auto model = crashlab::train_forest(fm, params, 4);
  const auto pred = crashlab::predict(model, fm);
  REQUIRE(pred.labels == fm.labels);

  // with the separating feature as the only column, it owns all the importance
  const auto solo = signal_matrix(22, 30, 30, 0);
  const auto solo_model = crashlab::train_forest(solo, params, 4);
  const auto imp = crashlab::feature_importance(solo_model);
  REQUIRE(imp.size() == 1);
  REQUIRE(imp[0].feature == "x0");
  REQUIRE(imp[0].importance == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("constant features give single-leaf trees and ties go to injury", "[forest]") {
  // large enough that no bootstrap plausibly drops an entire class, which
  // would turn the tied leaf into a pure one
  const auto fm = constant_matrix(30, 28);
  crashlab::ForestParams params;
  params.n_trees = 25;
  const auto model = crashlab::train_forest(fm, params, 10);
  for (const auto& tree : model.trees) {
    REQUIRE(tree.nodes.size() == 1);
    REQUIRE(tree.nodes[0].feature == -1);
  }
  const auto pred = crashlab::predict(model, fm);
  for (double s : pred.scores) REQUIRE(s == 0.5);
  for (int y : pred.labels) REQUIRE(y == 1);
  REQUIRE_THROWS_AS(crashlab::feature_importance(model), crashlab::Error);
  try {
    crashlab::feature_importance(model);
    FAIL("expected NoSplits");
  } catch (const crashlab::Error& e) {
    REQUIRE(e.code() == crashlab::Errc::NoSplits);
  }
}

TEST_CASE("deep forest memorizes distinct consistent rows", "[forest]") {
  const auto fm = signal_matrix(31, 30, 30, 3);
  crashlab::ForestParams params;
  params.n_trees = 60;
  params.max_depth = 40;
  params.min_samples_leaf = 1;
  const auto model = crashlab::train_forest(fm, params, 6);
  const auto pred = crashlab::predict(model, fm);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < fm.n_rows(); ++i) correct += pred.labels[i] == fm.labels[i];
  REQUIRE(correct == fm.n_rows());
}

TEST_CASE("training is byte-deterministic and thread-count invariant", "[forest]") {
  const auto ds = planted_dataset(12, 163);
  const auto fm = crashlab::make_feature_matrix(ds);
  crashlab::ForestParams params;
  params.n_trees = 40;

  const auto serial = crashlab::train_forest(fm, params, 42);
  auto threaded_params = params;
  threaded_params.n_threads = 8;
  const auto threaded = crashlab::train_forest(fm, threaded_params, 42);
  const auto serial_again = crashlab::train_forest(fm, params, 42);

  const auto dump = crashlab::forest_to_json(serial).dump();
  REQUIRE(dump == crashlab::forest_to_json(threaded).dump());
  REQUIRE(dump == crashlab::forest_to_json(serial_again).dump());

  const auto p1 = crashlab::predict(serial, fm);
  const auto p2 = crashlab::predict(threaded, fm);
  REQUIRE(p1.scores == p2.scores);
  REQUIRE(p1.labels == p2.labels);

  auto two_threads = params;
  two_threads.n_threads = 2;
  REQUIRE(dump == crashlab::forest_to_json(crashlab::train_forest(fm, two_threads, 42)).dump());
}

TEST_CASE("duplicating every tree leaves scores unchanged", "[forest]") {
  const auto fm = signal_matrix(41, 25, 20, 2);
  crashlab::ForestParams params;
  params.n_trees = 15;
  const auto model = crashlab::train_forest(fm, params, 8);
  auto doubled = model;
  doubled.trees.insert(doubled.trees.end(), model.trees.begin(), model.trees.end());
  const auto p1 = crashlab::predict(model, fm);
  const auto p2 = crashlab::predict(doubled, fm);
  for (std::size_t i = 0; i < p1.scores.size(); ++i)
    REQUIRE(p1.scores[i] == Catch::Approx(p2.scores[i]).margin(1e-12));
}

TEST_CASE("prediction rejects a mismatched schema", "[forest]") {
  const auto fm = signal_matrix(51, 10, 10, 1);
  crashlab::ForestParams params;
  params.n_trees = 5;
  const auto model = crashlab::train_forest(fm, params, 2);
  auto renamed = fm;
  renamed.columns[1] = "junk";
  try {
    crashlab::predict(model, renamed);
    FAIL("expected SchemaMismatch");
  } catch (const crashlab::Error& e) {
    REQUIRE(e.code() == crashlab::Errc::SchemaMismatch);
  }
}

TEST_CASE("trained trees are proper binary trees with every node reachable", "[forest]") {
  const auto ds = planted_dataset(19, 120);
  const auto fm = crashlab::make_feature_matrix(ds);
  crashlab::ForestParams params;
  params.n_trees = 20;
  const auto model = crashlab::train_forest(fm, params, 5);
  for (const auto& tree : model.trees) {
    std::vector<int> seen(tree.nodes.size(), 0);
    std::vector<int> stack{0};
    bool shape_ok = true;
    while (!stack.empty()) {
      const int id = stack.back();
      stack.pop_back();
      ++seen[static_cast<std::size_t>(id)];
      const auto& nd = tree.nodes[static_cast<std::size_t>(id)];
      if (nd.feature >= 0) {
        shape_ok = shape_ok && nd.left >= 0 && nd.right >= 0 &&
                   nd.feature < static_cast<int>(model.columns.size());
        stack.push_back(nd.left);
        stack.push_back(nd.right);
      } else {
        shape_ok = shape_ok && nd.left == -1 && nd.right == -1;
      }
    }
    REQUIRE(shape_ok);
    REQUIRE(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
  }
}

TEST_CASE("training error contracts", "[forest]") {
  crashlab::FeatureMatrix empty;
  empty.columns = {"x"};
  crashlab::ForestParams params;
  REQUIRE_THROWS_AS(crashlab::train_forest(empty, params, 1), crashlab::Error);

  auto fm = signal_matrix(61, 8, 8, 0);
  std::fill(fm.labels.begin(), fm.labels.end(), 1);
  try {
    crashlab::train_forest(fm, params, 1);
    FAIL("expected SingleClass");
  } catch (const crashlab::Error& e) {
    REQUIRE(e.code() == crashlab::Errc::SingleClass);
  }

  auto bad = params;
  bad.min_samples_split = 1;
  REQUIRE_THROWS_AS(crashlab::train_forest(signal_matrix(61, 8, 8, 0), bad, 1),
                    crashlab::Error);
}

TEST_CASE("classification report reproduces the held-out confusion fixture", "[forest]") {
  const auto rep = crashlab::classification_report_from_confusion(18, 4, 7, 4);
  REQUIRE(rep.total() == 33);
  REQUIRE(rep.accuracy == 22.0 / 33.0);
  REQUIRE(rep.injury.precision == 0.5);
  REQUIRE(rep.injury.recall == 4.0 / 11.0);
  REQUIRE(rep.injury.f1 == Catch::Approx(0.42).margin(0.005));
  REQUIRE(rep.injury.support == 11);
  REQUIRE(rep.no_injury.support == 22);
  REQUIRE(rep.no_injury.precision == 18.0 / 25.0);
  REQUIRE(rep.no_injury.recall == 18.0 / 22.0);
  REQUIRE(rep.macro_precision == 0.5 * (18.0 / 25.0 + 0.5));
  REQUIRE_FALSE(rep.injury.zero_division);

  // labels route produces the identical report
  std::vector<int> predicted, actual;
  const auto push = [&](int yh, int y, int reps) {
    for (int i = 0; i < reps; ++i) {
      predicted.push_back(yh);
      actual.push_back(y);
    }
  };
  push(0, 0, 18);
  push(1, 0, 4);
  push(0, 1, 7);
  push(1, 1, 4);
  const auto rep2 = crashlab::classification_report(predicted, actual);
  REQUIRE(rep2.tn == rep.tn);
  REQUIRE(rep2.fp == rep.fp);
  REQUIRE(rep2.fn == rep.fn);
  REQUIRE(rep2.tp == rep.tp);
  REQUIRE(rep2.accuracy == rep.accuracy);
  REQUIRE(rep2.injury.f1 == rep.injury.f1);
}

TEST_CASE("classification report internal consistency and degenerate cases", "[forest]") {
  const auto rep = crashlab::classification_report_from_confusion(18, 4, 7, 4);
  const auto redo =
      crashlab::classification_report_from_confusion(rep.tn, rep.fp, rep.fn, rep.tp);
  REQUIRE(redo.accuracy == rep.accuracy);
  REQUIRE(redo.macro_f1 == rep.macro_f1);

  const auto perfect = crashlab::classification_report_from_confusion(10, 0, 0, 10);
  REQUIRE(perfect.accuracy == 1.0);
  REQUIRE(perfect.injury.f1 == 1.0);
  REQUIRE(perfect.no_injury.f1 == 1.0);
  REQUIRE(perfect.macro_f1 == 1.0);

  // all-negative predictions on all-negative truth: class 1 has no support
  const auto degenerate = crashlab::classification_report(std::vector<int>(5, 0),
                                                          std::vector<int>(5, 0));
  REQUIRE(degenerate.accuracy == 1.0);
  REQUIRE(degenerate.injury.precision == 0.0);
  REQUIRE(degenerate.injury.recall == 0.0);
  REQUIRE(degenerate.injury.zero_division);
  REQUIRE_FALSE(degenerate.no_injury.zero_division);

  REQUIRE_THROWS_AS(crashlab::classification_report({0, 1}, {0}), crashlab::Error);
  REQUIRE_THROWS_AS(crashlab::classification_report({}, {}), crashlab::Error);
  REQUIRE_THROWS_AS(crashlab::classification_report({0, 2}, {0, 1}), crashlab::Error);
  REQUIRE_THROWS_AS(crashlab::classification_report_from_confusion(0, 0, 0, 0),
                    crashlab::Error);
}

TEST_CASE("report serializations carry the fixture numbers", "[forest]") {
  const auto rep = crashlab::classification_report_from_confusion(18, 4, 7, 4);
  const auto j = crashlab::classification_report_json(rep);
  REQUIRE(j.at("schema_version").get<int>() == 1);
  REQUIRE(j.at("confusion").at("tn").get<long>() == 18);
  REQUIRE(j.at("confusion").at("tp").get<long>() == 4);
  REQUIRE(j.at("injury").at("precision").get<double>() == 0.5);
  REQUIRE(j.at("injury").at("support").get<long>() == 11);

  const auto md = crashlab::classification_report_markdown(rep);
  REQUIRE(md.find("| Injury | 0.500 | 0.364 | 0.421 | 11 |") != std::string::npos);
  REQUIRE(md.find("Accuracy: 0.667 (22/33)") != std::string::npos);
}

TEST_CASE("importances are a probability vector sorted descending", "[forest]") {
  const auto ds = planted_dataset(23, 140);
  const auto fm = crashlab::make_feature_matrix(ds);
  crashlab::ForestParams params;
  params.n_trees = 30;
  const auto model = crashlab::train_forest(fm, params, 17);
  const auto imp = crashlab::feature_importance(model);
  REQUIRE(imp.size() == fm.n_cols());
  double total = 0.0;
  for (std::size_t i = 0; i < imp.size(); ++i) {
    REQUIRE(imp[i].importance >= 0.0);
    if (i > 0) REQUIRE(imp[i - 1].importance >= imp[i].importance);
    total += imp[i].importance;
  }
  REQUIRE(total == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("planted milepost signal ranks milepost in the top two features", "[forest]") {
  const auto ds = planted_dataset(29, 300);
  const auto fm = crashlab::make_feature_matrix(ds);
  const auto model = crashlab::train_forest(fm, crashlab::ForestParams{}, 42);
  const auto imp = crashlab::feature_importance(model);
  const bool top2 = imp[0].feature == "milepost" || imp[1].feature == "milepost";
  REQUIRE(top2);
}

TEST_CASE("model json round-trips bytes and predictions", "[forest]") {
  const auto fm = signal_matrix(71, 20, 15, 2);
  crashlab::ForestParams params;
  params.n_trees = 12;
  const auto model = crashlab::train_forest(fm, params, 33);
  const auto j = crashlab::forest_to_json(model);
  const auto back = crashlab::forest_from_json(j);
  REQUIRE(crashlab::forest_to_json(back).dump() == j.dump());
  REQUIRE(crashlab::predict(back, fm).scores == crashlab::predict(model, fm).scores);
  REQUIRE(back.columns == model.columns);
  REQUIRE(back.params.features_per_split == model.params.features_per_split);

  auto wrong = j;
  wrong["kind"] = "something_else";
  REQUIRE_THROWS_AS(crashlab::forest_from_json(wrong), crashlab::Error);
  auto stale = j;
  stale["schema_version"] = 999;
  REQUIRE_THROWS_AS(crashlab::forest_from_json(stale), crashlab::Error);
}

TEST_CASE("grid tuning is reproducible and returns a grid member", "[forest]") {
  const auto fm = signal_matrix(81, 20, 20, 2);
  crashlab::ForestParams base;
  base.n_trees = 15;
  crashlab::TuneGrid grid;
  grid.max_depths = {2, 4};
  grid.min_samples_splits = {2, 3};
  grid.min_samples_leafs = {1, 2};

  const auto result = crashlab::tune(fm, base, grid, 4, 99);
  REQUIRE(result.table.size() == 8);
  REQUIRE((result.best.max_depth == 2 || result.best.max_depth == 4));
  REQUIRE((result.best.min_samples_split == 2 || result.best.min_samples_split == 3));
  REQUIRE((result.best.min_samples_leaf == 1 || result.best.min_samples_leaf == 2));
  double best_seen = -1.0;
  for (const auto& cell : result.table) best_seen = std::max(best_seen, cell.mean_accuracy);
  REQUIRE(result.best_accuracy == best_seen);
  // the signal is clean enough that held-out accuracy should be high
  REQUIRE(result.best_accuracy > 0.9);

  const auto again = crashlab::tune(fm, base, grid, 4, 99);
  REQUIRE(again.best_accuracy == result.best_accuracy);
  REQUIRE(again.best.max_depth == result.best.max_depth);
  for (std::size_t i = 0; i < result.table.size(); ++i)
    REQUIRE(again.table[i].mean_accuracy == result.table[i].mean_accuracy);

  REQUIRE_THROWS_AS(crashlab::tune(fm, base, grid, 1, 99), crashlab::Error);
  REQUIRE_THROWS_AS(crashlab::tune(fm, base, grid, 21, 99), crashlab::Error);
}
