#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "crashlab/error.hpp"
#include "crashlab/ingest.hpp"
#include "crashlab/jsonio.hpp"
#include "crashlab/records.hpp"
#include "crashlab/rng.hpp"

namespace crashlab {

// Row-major numeric design for the injury classifier; labels are 0/1.
struct FeatureMatrix {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;

  std::size_t n_rows() const { return rows.size(); }
  std::size_t n_cols() const { return columns.size(); }
};

inline constexpr int kNumSeasons = 4;

inline const char* season_name(int s) {
  switch (s) {
    case 0: return "Winter";
    case 1: return "Spring";
    case 2: return "Summer";
    case 3: return "Fall";
  }
  return "?";
}

// Meteorological seasons: Dec-Feb, Mar-May, Jun-Aug, Sep-Nov.
inline int season_of_month(unsigned month) {
  if (month == 12 || month <= 2) return 0;
  if (month <= 5) return 1;
  if (month <= 8) return 2;
  return 3;
}

// Missing speeds take the global median so the matrix has no holes.
inline FeatureMatrix make_feature_matrix(const CrashDataset& ds) {
  if (ds.records.empty()) throw Error(Errc::EmptyInput, "no records to encode");
  FeatureMatrix fm;
  fm.columns = {"milepost", "time_min", "weekday", "speed_max", "num_vehicles"};
  for (int i = 0; i < kNumRoadSurfaces; ++i)
    fm.columns.push_back(std::string("surface=") + to_string(static_cast<RoadSurface>(i)));
  for (int i = 0; i < kNumLights; ++i)
    fm.columns.push_back(std::string("light=") + to_string(static_cast<Light>(i)));
  for (int i = 0; i < kNumWeathers; ++i)
    fm.columns.push_back(std::string("weather=") + to_string(static_cast<Weather>(i)));
  for (int s = 0; s < kNumSeasons; ++s)
    fm.columns.push_back(std::string("season=") + season_name(s));

  std::vector<double> observed;
  for (const auto& r : ds.records)
    if (r.speed_max) observed.push_back(*r.speed_max);
  const double speed_fill = observed.empty() ? 0.0 : detail::median(observed);

  fm.rows.reserve(ds.size());
  fm.labels.reserve(ds.size());
  for (const auto& r : ds.records) {
    std::vector<double> x;
    x.reserve(fm.columns.size());
    x.push_back(r.milepost);
    x.push_back(static_cast<double>(r.time_min));
    x.push_back(static_cast<double>(r.date.weekday_mon0()));
    x.push_back(r.speed_max ? *r.speed_max : speed_fill);
    x.push_back(static_cast<double>(r.num_vehicles));
    for (int i = 0; i < kNumRoadSurfaces; ++i)
      x.push_back(r.road_surface == static_cast<RoadSurface>(i) ? 1.0 : 0.0);
    for (int i = 0; i < kNumLights; ++i)
      x.push_back(r.light == static_cast<Light>(i) ? 1.0 : 0.0);
    for (int i = 0; i < kNumWeathers; ++i)
      x.push_back(r.weather == static_cast<Weather>(i) ? 1.0 : 0.0);
    const int season = season_of_month(r.date.month);
    for (int s = 0; s < kNumSeasons; ++s) x.push_back(s == season ? 1.0 : 0.0);
    fm.rows.push_back(std::move(x));
    fm.labels.push_back(r.injured() ? 1 : 0);
  }
  return fm;
}

namespace detail {

inline FeatureMatrix take_rows(const FeatureMatrix& fm, const std::vector<std::size_t>& idx) {
  FeatureMatrix out;
  out.columns = fm.columns;
  out.rows.reserve(idx.size());
  out.labels.reserve(idx.size());
  for (std::size_t i : idx) {
    out.rows.push_back(fm.rows[i]);
    out.labels.push_back(fm.labels[i]);
  }
  return out;
}

}  // namespace detail

struct SplitResult {
  FeatureMatrix train;
  FeatureMatrix test;
  std::vector<std::size_t> train_rows;  // indices into the input matrix
  std::vector<std::size_t> test_rows;
};

// Per-class test counts are round(class_count * test_fraction), so 163 rows
// at 0.2 give 22 + 11 = 33 test rows. Row order within each part follows the
// input order.
inline SplitResult stratified_split(const FeatureMatrix& fm, double test_fraction,
                                    std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw Error(Errc::DomainError, "test_fraction must lie in (0, 1)");
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < fm.n_rows(); ++i) {
    const int y = fm.labels[i];
    if (y != 0 && y != 1) throw Error(Errc::BadValue, "label must be 0 or 1");
    by_class[y].push_back(i);
  }
  if (by_class[0].empty() || by_class[1].empty())
    throw Error(Errc::SingleClass, "both classes required to stratify");
  SplitResult out;
  for (int c = 0; c < 2; ++c) {
    auto idx = by_class[c];
    Rng rng(seed, static_cast<std::uint64_t>(c));
    rng.shuffle(idx);
    const auto n_test = static_cast<std::size_t>(
        std::lround(static_cast<double>(idx.size()) * test_fraction));
    for (std::size_t k = 0; k < idx.size(); ++k)
      (k < n_test ? out.test_rows : out.train_rows).push_back(idx[k]);
  }
  std::sort(out.train_rows.begin(), out.train_rows.end());
  std::sort(out.test_rows.begin(), out.test_rows.end());
  out.train = detail::take_rows(fm, out.train_rows);
  out.test = detail::take_rows(fm, out.test_rows);
  return out;
}

struct ForestParams {
  int n_trees = 100;
  int max_depth = 10;
  int min_samples_split = 2;
  int min_samples_leaf = 1;
  int features_per_split = 0;  // 0 resolves to floor(sqrt(n_features))
  int n_threads = 1;
};

// feature == -1 marks a leaf. w0/w1 are the class-weight sums of the rows
// that reached the node, kept on internal nodes too so importances can be
// recomputed from a deserialized model.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double w0 = 0.0;
  double w1 = 0.0;
};

struct Tree {
  std::vector<TreeNode> nodes;  // index 0 is the root
};

struct ForestModel {
  ForestParams params;  // features_per_split holds the resolved value
  std::uint64_t seed = 0;
  std::string class_weighting = "balanced";
  std::vector<std::string> columns;
  std::vector<Tree> trees;
};

// Same cardinality as the source, drawn with replacement.
inline std::vector<std::size_t> bootstrap_sample(std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(n);
  for (auto& v : idx) v = static_cast<std::size_t>(rng.uniform_below(n));
  return idx;
}

namespace detail {

inline constexpr double kMinGain = 1e-12;

// Class-weighted Gini impurity scaled by the node's weight mass:
// W * (1 - sum p^2) = W - (w0^2 + w1^2) / W.
inline double weighted_gini(double w0, double w1) {
  const double w = w0 + w1;
  if (w <= 0.0) return 0.0;
  return w - (w0 * w0 + w1 * w1) / w;
}

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double decrease = 0.0;
  bool found = false;
};

struct TreeBuilder {
  const FeatureMatrix& fm;
  const ForestParams& params;
  double n_boot;      // bootstrap cardinality N
  double n_class[2];  // bootstrap class totals N_c
  Rng& rng;
  Tree& tree;

  // count rows of class c weighted at N / (2 * N_c) each. Multiplying the
  // exact integers first keeps a single rounding, so a node holding a whole
  // class weighs exactly N/2 and a pure-bootstrap tie scores exactly 0.5.
  double wsum(std::size_t count, int c) const {
    if (n_class[c] <= 0.0) return 0.0;
    return static_cast<double>(count) * n_boot / (2.0 * n_class[c]);
  }

  int build(std::vector<std::size_t> rows, int depth) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    std::size_t n1 = 0;
    for (std::size_t r : rows) n1 += static_cast<std::size_t>(fm.labels[r]);
    const std::size_t n0 = rows.size() - n1;
    tree.nodes[id].w0 = wsum(n0, 0);
    tree.nodes[id].w1 = wsum(n1, 1);
    const bool splittable = depth < params.max_depth &&
                            rows.size() >= static_cast<std::size_t>(params.min_samples_split) &&
                            n0 > 0 && n1 > 0;
    if (!splittable) return id;
    const SplitChoice choice = choose_split(rows, n0, n1);
    if (!choice.found) return id;
    std::vector<std::size_t> left, right;
    left.reserve(rows.size());
    right.reserve(rows.size());
    for (std::size_t r : rows)
      (fm.rows[r][static_cast<std::size_t>(choice.feature)] < choice.threshold ? left : right)
          .push_back(r);
    rows.clear();
    const int l = build(std::move(left), depth + 1);
    const int r = build(std::move(right), depth + 1);
    tree.nodes[id].feature = choice.feature;
    tree.nodes[id].threshold = choice.threshold;
    tree.nodes[id].left = l;
    tree.nodes[id].right = r;
    return id;
  }

  SplitChoice choose_split(const std::vector<std::size_t>& rows, std::size_t n0, std::size_t n1) {
    const std::size_t p = fm.n_cols();
    const auto perm = rng.permutation(p);
    const double node_score = weighted_gini(wsum(n0, 0), wsum(n1, 1));
    const auto mtry = static_cast<std::size_t>(params.features_per_split);
    const auto min_leaf = static_cast<std::size_t>(params.min_samples_leaf);
    SplitChoice best;
    std::vector<std::pair<double, int>> vals(rows.size());
    for (std::size_t k = 0; k < p; ++k) {
      // Past the feature budget, keep scanning only while nothing usable has
      // been found, so a consistent dataset still separates at full depth.
      if (k >= mtry && best.found) break;
      const int f = static_cast<int>(perm[k]);
      for (std::size_t i = 0; i < rows.size(); ++i)
        vals[i] = {fm.rows[rows[i]][static_cast<std::size_t>(f)], fm.labels[rows[i]]};
      std::sort(vals.begin(), vals.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      std::size_t left1 = 0;
      for (std::size_t i = 1; i < vals.size(); ++i) {
        left1 += static_cast<std::size_t>(vals[i - 1].second);
        if (!(vals[i - 1].first < vals[i].first)) continue;
        const std::size_t nl = i;
        const std::size_t nr = vals.size() - i;
        if (nl < min_leaf || nr < min_leaf) continue;
        const std::size_t left0 = nl - left1;
        const double children =
            weighted_gini(wsum(left0, 0), wsum(left1, 1)) +
            weighted_gini(wsum(n0 - left0, 0), wsum(n1 - left1, 1));
        const double decrease = node_score - children;
        if (decrease < kMinGain) continue;
        if (best.found && decrease <= best.decrease) continue;
        const double lo = vals[i - 1].first;
        const double hi = vals[i].first;
        const double thr = lo + (hi - lo) / 2.0;
        // Adjacent doubles can round the midpoint onto an endpoint; such a
        // threshold would not realize the counted partition.
        if (!(lo < thr && thr <= hi)) continue;
        best = {f, thr, decrease, true};
      }
    }
    return best;
  }
};

}  // namespace detail

// Bagged class-weighted Gini trees. Each tree's randomness comes only from
// (seed, tree index), so results do not depend on thread scheduling.
inline ForestModel train_forest(const FeatureMatrix& train, const ForestParams& params,
                                std::uint64_t seed) {
  if (train.n_rows() == 0) throw Error(Errc::EmptyInput, "empty training matrix");
  if (params.n_trees < 1 || params.max_depth < 1 || params.min_samples_split < 2 ||
      params.min_samples_leaf < 1 || params.features_per_split < 0 || params.n_threads < 1)
    throw Error(Errc::DomainError, "invalid forest hyperparameters");
  std::size_t total1 = 0;
  for (int y : train.labels) {
    if (y != 0 && y != 1) throw Error(Errc::BadValue, "label must be 0 or 1");
    total1 += static_cast<std::size_t>(y);
  }
  if (total1 == 0 || total1 == train.n_rows())
    throw Error(Errc::SingleClass, "training labels are all one class");

  ForestModel model;
  model.params = params;
  const std::size_t p = train.n_cols();
  if (model.params.features_per_split == 0)
    model.params.features_per_split =
        std::max(1, static_cast<int>(std::sqrt(static_cast<double>(p))));
  model.params.features_per_split =
      std::min(model.params.features_per_split, static_cast<int>(p));
  model.seed = seed;
  model.columns = train.columns;
  model.trees.resize(static_cast<std::size_t>(params.n_trees));

  const std::size_t n = train.n_rows();
  const auto train_one = [&](std::size_t t) {
    Rng rng(seed, t);
    auto rows = bootstrap_sample(n, rng);
    std::size_t n1 = 0;
    for (std::size_t r : rows) n1 += static_cast<std::size_t>(train.labels[r]);
    const std::size_t n0 = n - n1;
    // Balanced weights on the bootstrap sample: N / (2 * N_c).
    detail::TreeBuilder builder{train,
                                model.params,
                                static_cast<double>(n),
                                {static_cast<double>(n0), static_cast<double>(n1)},
                                rng,
                                model.trees[t]};
    builder.build(std::move(rows), 0);
  };

  const auto workers =
      static_cast<std::size_t>(std::min(params.n_threads, params.n_trees));
  if (workers <= 1) {
    for (std::size_t t = 0; t < model.trees.size(); ++t) train_one(t);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          for (std::size_t t = w; t < model.trees.size(); t += workers) train_one(t);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  return model;
}

struct Prediction {
  std::vector<int> labels;
  std::vector<double> scores;  // class-1 weight fractions averaged over trees
};

namespace detail {

inline double tree_score(const Tree& tree, const std::vector<double>& x) {
  int id = 0;
  while (tree.nodes[static_cast<std::size_t>(id)].feature >= 0) {
    const auto& nd = tree.nodes[static_cast<std::size_t>(id)];
    id = x[static_cast<std::size_t>(nd.feature)] < nd.threshold ? nd.left : nd.right;
  }
  const auto& leaf = tree.nodes[static_cast<std::size_t>(id)];
  return leaf.w1 / (leaf.w0 + leaf.w1);
}

}  // namespace detail

inline Prediction predict(const ForestModel& model, const FeatureMatrix& rows) {
  if (rows.columns != model.columns)
    throw Error(Errc::SchemaMismatch, "feature columns differ from the training schema");
  Prediction out;
  out.labels.reserve(rows.n_rows());
  out.scores.reserve(rows.n_rows());
  for (const auto& x : rows.rows) {
    double sum = 0.0;
    for (const auto& tree : model.trees) sum += detail::tree_score(tree, x);
    const double score = sum / static_cast<double>(model.trees.size());
    out.scores.push_back(score);
    // Ties go to the injury class; a missed injury is the costlier error.
    out.labels.push_back(score >= 0.5 ? 1 : 0);
  }
  return out;
}

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long support = 0;
  bool zero_division = false;  // a denominator was empty; the metric was set to 0
};

struct ClassificationReport {
  long tn = 0;
  long fp = 0;
  long fn = 0;
  long tp = 0;
  double accuracy = 0.0;
  ClassMetrics no_injury;  // class 0
  ClassMetrics injury;     // class 1
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;

  long total() const { return tn + fp + fn + tp; }
};

namespace detail {

inline ClassMetrics class_metrics(long tp, long fp, long fn, long support) {
  ClassMetrics m;
  m.support = support;
  if (tp + fp == 0 || tp + fn == 0) m.zero_division = true;
  m.precision =
      tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  m.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  m.f1 = m.precision + m.recall == 0.0
             ? 0.0
             : 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

}  // namespace detail

inline ClassificationReport classification_report_from_confusion(long tn, long fp, long fn,
                                                                 long tp) {
  if (tn < 0 || fp < 0 || fn < 0 || tp < 0 || tn + fp + fn + tp == 0)
    throw Error(Errc::DomainError, "confusion counts must be non-negative with a positive sum");
  ClassificationReport rep;
  rep.tn = tn;
  rep.fp = fp;
  rep.fn = fn;
  rep.tp = tp;
  rep.accuracy = static_cast<double>(tn + tp) / static_cast<double>(rep.total());
  rep.injury = detail::class_metrics(tp, fp, fn, tp + fn);
  // Class-0 view: its true positives are tn, false positives are fn, misses are fp.
  rep.no_injury = detail::class_metrics(tn, fn, fp, tn + fp);
  rep.macro_precision = 0.5 * (rep.no_injury.precision + rep.injury.precision);
  rep.macro_recall = 0.5 * (rep.no_injury.recall + rep.injury.recall);
  rep.macro_f1 = 0.5 * (rep.no_injury.f1 + rep.injury.f1);
  return rep;
}

inline ClassificationReport classification_report(const std::vector<int>& predicted,
                                                  const std::vector<int>& actual) {
  if (predicted.size() != actual.size() || predicted.empty())
    throw Error(Errc::LengthMismatch, "predicted and actual must be equal-length and nonempty");
  long tn = 0, fp = 0, fn = 0, tp = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const int yh = predicted[i];
    const int y = actual[i];
    if ((yh != 0 && yh != 1) || (y != 0 && y != 1))
      throw Error(Errc::BadValue, "labels must be 0 or 1");
    if (y == 1)
      ++(yh == 1 ? tp : fn);
    else
      ++(yh == 1 ? fp : tn);
  }
  return classification_report_from_confusion(tn, fp, fn, tp);
}

struct ImportanceEntry {
  std::string feature;
  double importance = 0.0;
};

// Mean decrease in impurity: per-feature sums of weighted Gini drops, each
// tree's drops scaled by its root weight mass, averaged over trees and
// normalized to sum 1. Sorted by importance descending, ties keep column order.
inline std::vector<ImportanceEntry> feature_importance(const ForestModel& model) {
  const std::size_t p = model.columns.size();
  std::vector<double> acc(p, 0.0);
  bool any_split = false;
  for (const auto& tree : model.trees) {
    if (tree.nodes.empty()) continue;
    const double w_root = tree.nodes[0].w0 + tree.nodes[0].w1;
    if (w_root <= 0.0) continue;
    for (const auto& nd : tree.nodes) {
      if (nd.feature < 0) continue;
      any_split = true;
      const auto& l = tree.nodes[static_cast<std::size_t>(nd.left)];
      const auto& r = tree.nodes[static_cast<std::size_t>(nd.right)];
      const double drop = detail::weighted_gini(nd.w0, nd.w1) -
                          detail::weighted_gini(l.w0, l.w1) -
                          detail::weighted_gini(r.w0, r.w1);
      acc[static_cast<std::size_t>(nd.feature)] += drop / w_root;
    }
  }
  if (!any_split) throw Error(Errc::NoSplits, "model contains no split nodes");
  double total = 0.0;
  for (auto& v : acc) {
    v /= static_cast<double>(model.trees.size());
    total += v;
  }
  std::vector<ImportanceEntry> out(p);
  for (std::size_t i = 0; i < p; ++i) out[i] = {model.columns[i], acc[i] / total};
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.importance > b.importance; });
  return out;
}

struct TuneGrid {
  std::vector<int> max_depths{5, 10, 15};
  std::vector<int> min_samples_splits{2, 5, 10};
  std::vector<int> min_samples_leafs{1, 3, 5};
};

struct TuneCell {
  ForestParams params;
  double mean_accuracy = 0.0;
};

struct TuneResult {
  ForestParams best;
  double best_accuracy = -1.0;
  std::vector<TuneCell> table;
};

namespace detail {

inline std::vector<int> stratified_fold_ids(const std::vector<int>& labels, int folds,
                                            std::uint64_t seed) {
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < labels.size(); ++i)
    by_class[labels[i]].push_back(i);
  std::vector<int> fold_of(labels.size(), 0);
  for (int c = 0; c < 2; ++c) {
    auto idx = by_class[c];
    Rng rng(seed, 0x464f4c44ULL + static_cast<std::uint64_t>(c));
    rng.shuffle(idx);
    for (std::size_t k = 0; k < idx.size(); ++k)
      fold_of[idx[k]] = static_cast<int>(k % static_cast<std::size_t>(folds));
  }
  return fold_of;
}

}  // namespace detail

// Stratified k-fold grid search over depth/split/leaf, scored by mean
// held-out accuracy. Ties keep the earliest combination in grid order.
inline TuneResult tune(const FeatureMatrix& fm, const ForestParams& base, const TuneGrid& grid,
                       int folds, std::uint64_t seed) {
  if (folds < 2) throw Error(Errc::DomainError, "folds must be >= 2");
  if (grid.max_depths.empty() || grid.min_samples_splits.empty() ||
      grid.min_samples_leafs.empty())
    throw Error(Errc::DomainError, "empty tuning grid");
  std::size_t count[2] = {0, 0};
  for (int y : fm.labels) {
    if (y != 0 && y != 1) throw Error(Errc::BadValue, "label must be 0 or 1");
    ++count[y];
  }
  if (count[0] == 0 || count[1] == 0)
    throw Error(Errc::SingleClass, "both classes required to tune");
  if (std::min(count[0], count[1]) < static_cast<std::size_t>(folds))
    throw Error(Errc::DomainError, "folds exceed the minority class count");

  const auto fold_of = detail::stratified_fold_ids(fm.labels, folds, seed);
  TuneResult result;
  for (int depth : grid.max_depths)
    for (int split : grid.min_samples_splits)
      for (int leaf : grid.min_samples_leafs) {
        ForestParams params = base;
        params.max_depth = depth;
        params.min_samples_split = split;
        params.min_samples_leaf = leaf;
        double acc_sum = 0.0;
        for (int f = 0; f < folds; ++f) {
          std::vector<std::size_t> train_rows, test_rows;
          for (std::size_t i = 0; i < fm.n_rows(); ++i)
            (fold_of[i] == f ? test_rows : train_rows).push_back(i);
          const auto train_fm = detail::take_rows(fm, train_rows);
          const auto test_fm = detail::take_rows(fm, test_rows);
          const auto model = train_forest(train_fm, params, seed);
          const auto pred = predict(model, test_fm);
          std::size_t correct = 0;
          for (std::size_t i = 0; i < test_fm.n_rows(); ++i)
            correct += pred.labels[i] == test_fm.labels[i];
          acc_sum += static_cast<double>(correct) / static_cast<double>(test_fm.n_rows());
        }
        const double mean_acc = acc_sum / static_cast<double>(folds);
        result.table.push_back({params, mean_acc});
        if (mean_acc > result.best_accuracy) {
          result.best_accuracy = mean_acc;
          result.best = params;
        }
      }
  return result;
}

// Nodes serialize as [feature, threshold, left, right, w0, w1]; n_threads is
// a runtime knob and is not part of the model identity.
inline Json forest_to_json(const ForestModel& m) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "forest_model";
  j["seed"] = m.seed;
  j["class_weighting"] = m.class_weighting;
  j["params"] = Json{{"n_trees", m.params.n_trees},
                     {"max_depth", m.params.max_depth},
                     {"min_samples_split", m.params.min_samples_split},
                     {"min_samples_leaf", m.params.min_samples_leaf},
                     {"features_per_split", m.params.features_per_split}};
  j["columns"] = m.columns;
  Json trees = Json::array();
  for (const auto& t : m.trees) {
    Json nodes = Json::array();
    for (const auto& nd : t.nodes)
      nodes.push_back(Json::array({nd.feature, nd.threshold, nd.left, nd.right, nd.w0, nd.w1}));
    trees.push_back(Json{{"nodes", std::move(nodes)}});
  }
  j["trees"] = std::move(trees);
  return j;
}

inline ForestModel forest_from_json(const Json& j) {
  if (!j.is_object() || j.value("kind", "") != std::string("forest_model"))
    throw Error(Errc::BadValue, "not a forest_model document");
  if (j.value("schema_version", 0) != kSchemaVersion)
    throw Error(Errc::BadValue, "unsupported schema_version");
  ForestModel m;
  m.seed = j.at("seed").get<std::uint64_t>();
  m.class_weighting = j.at("class_weighting").get<std::string>();
  const auto& p = j.at("params");
  m.params.n_trees = p.at("n_trees").get<int>();
  m.params.max_depth = p.at("max_depth").get<int>();
  m.params.min_samples_split = p.at("min_samples_split").get<int>();
  m.params.min_samples_leaf = p.at("min_samples_leaf").get<int>();
  m.params.features_per_split = p.at("features_per_split").get<int>();
  m.columns = j.at("columns").get<std::vector<std::string>>();
  for (const auto& tj : j.at("trees")) {
    Tree t;
    for (const auto& nj : tj.at("nodes")) {
      TreeNode nd;
      nd.feature = nj.at(0).get<int>();
      nd.threshold = nj.at(1).get<double>();
      nd.left = nj.at(2).get<int>();
      nd.right = nj.at(3).get<int>();
      nd.w0 = nj.at(4).get<double>();
      nd.w1 = nj.at(5).get<double>();
      t.nodes.push_back(nd);
    }
    m.trees.push_back(std::move(t));
  }
  return m;
}

inline Json classification_report_json(const ClassificationReport& r) {
  const auto cls = [](const ClassMetrics& m) {
    return Json{{"precision", m.precision},
                {"recall", m.recall},
                {"f1", m.f1},
                {"support", m.support},
                {"zero_division", m.zero_division}};
  };
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["confusion"] = Json{{"tn", r.tn}, {"fp", r.fp}, {"fn", r.fn}, {"tp", r.tp}};
  j["accuracy"] = r.accuracy;
  j["no_injury"] = cls(r.no_injury);
  j["injury"] = cls(r.injury);
  j["macro"] = Json{{"precision", r.macro_precision},
                    {"recall", r.macro_recall},
                    {"f1", r.macro_f1}};
  return j;
}

inline std::string classification_report_markdown(const ClassificationReport& r) {
  std::string md = "| Class | Precision | Recall | F1 | Support |\n|---|---|---|---|---|\n";
  const auto row = [&md](const std::string& name, const ClassMetrics& m) {
    md += "| " + name + " | " + detail::fmt_fixed(m.precision, 3) + " | " +
          detail::fmt_fixed(m.recall, 3) + " | " + detail::fmt_fixed(m.f1, 3) + " | " +
          std::to_string(m.support) + " |\n";
  };
  row("No injury", r.no_injury);
  row("Injury", r.injury);
  md += "| Macro avg | " + detail::fmt_fixed(r.macro_precision, 3) + " | " +
        detail::fmt_fixed(r.macro_recall, 3) + " | " + detail::fmt_fixed(r.macro_f1, 3) +
        " | " + std::to_string(r.total()) + " |\n";
  md += "\nAccuracy: " + detail::fmt_fixed(r.accuracy, 3) + " (" +
        std::to_string(r.tn + r.tp) + "/" + std::to_string(r.total()) + ")\n";
  return md;
}

inline Json feature_importance_json(const std::vector<ImportanceEntry>& entries) {
  Json arr = Json::array();
  for (const auto& e : entries)
    arr.push_back(Json{{"feature", e.feature}, {"importance", e.importance}});
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["importances"] = std::move(arr);
  return j;
}

inline std::string feature_importance_markdown(const std::vector<ImportanceEntry>& entries) {
  std::string md = "| Feature | Importance |\n|---|---|\n";
  for (const auto& e : entries)
    md += "| " + e.feature + " | " + detail::fmt_fixed(e.importance, 3) + " |\n";
  return md;
}

}  // namespace crashlab
