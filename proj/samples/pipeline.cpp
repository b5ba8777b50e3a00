// End-to-end walk through the library: synthesize (or load) a corpus, profile
// it, run the test battery, fit the damage model, train the injury classifier.
#include <crashlab/descriptive.hpp>
#include <crashlab/forest.hpp>
#include <crashlab/glm.hpp>
#include <crashlab/inferential.hpp>
#include <crashlab/synth.hpp>

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

  std::printf("%zu crashes over %.3f miles, %d study years\n\n", ds.size(), ds.corridor_length,
              ds.study_years.last - ds.study_years.first + 1);

  const auto years = crashlab::count_by(ds, "year");
  for (std::size_t i = 0; i < years.bins.size(); ++i)
    std::printf("  %s  %ld\n", years.bins[i].c_str(), years.counts[i]);

  std::printf("\nuniformity tests\n");
  for (const char* dim : {"weekday", "light", "road_surface", "month"}) {
    const auto t = crashlab::chi_square_gof(crashlab::count_by(ds, dim));
    std::printf("  %-14s chi2 = %7.2f  df %2d  p %s\n", dim, t.statistic, *t.df,
                crashlab::detail::p_display(t.p_value).c_str());
  }

  const auto imputed = crashlab::impute_damage(ds);
  const auto design = crashlab::make_damage_design(imputed.dataset);
  std::vector<double> y(design.y.data(), design.y.data() + design.y.size());
  std::printf("\ndamage (thousands): VMR %.2f, %zu rows imputed\n",
              crashlab::overdispersion_ratio(y), imputed.items.size());
  const auto fit = crashlab::fit_negative_binomial(design);
  std::printf("NB2 alpha %.3f after %d iterations\n\n", fit.alpha, fit.iterations);
  std::fputs(crashlab::irr_table_markdown(crashlab::irr_table(fit)).c_str(), stdout);

  const auto fm = crashlab::make_feature_matrix(ds);
  const auto split = crashlab::stratified_split(fm, 0.2, 42);
  const auto model = crashlab::train_forest(split.train, crashlab::ForestParams{}, 42);
  const auto pred = crashlab::predict(model, split.test);
  const auto report = crashlab::classification_report(pred.labels, split.test.labels);
  std::printf("\ninjury classifier on %zu held-out rows\n", split.test.n_rows());
  std::fputs(crashlab::classification_report_markdown(report).c_str(), stdout);
  return 0;
}
