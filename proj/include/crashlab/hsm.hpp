#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "crashlab/csv.hpp"
#include "crashlab/error.hpp"
#include "crashlab/inferential.hpp"
#include "crashlab/jsonio.hpp"
#include "crashlab/special_functions.hpp"

namespace crashlab {

// Rural two-lane segment SPF: N = AADT * L * 365e-6 * e^-0.312 crashes/yr.
inline constexpr double kSegmentLogAdjust = -0.312;

// Four-leg minor-stop intersection SPF coefficients:
// N = exp(a + b ln AADT_maj + c ln AADT_min).
inline constexpr double kInt4stA = -9.025;
inline constexpr double kInt4stB = 0.409;
inline constexpr double kInt4stC = 0.718;

inline double spf_segment(double aadt, double length) {
  if (!(aadt > 0.0)) throw Error(Errc::DomainError, "aadt must be > 0");
  if (!(length > 0.0)) throw Error(Errc::DomainError, "length must be > 0");
  return aadt * length * 365e-6 * std::exp(kSegmentLogAdjust);
}

inline double spf_intersection_4st(double aadt_major, double aadt_minor) {
  if (!(aadt_major > 0.0) || !(aadt_minor > 0.0))
    throw Error(Errc::DomainError, "intersection AADTs must be > 0");
  return std::exp(kInt4stA + kInt4stB * std::log(aadt_major) +
                  kInt4stC * std::log(aadt_minor));
}

struct IntersectionSpec {
  std::string name;
  double aadt_minor = 0.0;
};

struct CorridorSpec {
  double aadt_major = 0.0;
  double segment_length = 0.0;  // miles
  int study_years = 0;
  std::vector<IntersectionSpec> intersections;
  double calibration_factor = 1.0;
  double cmf_product = 1.0;

  void validate() const {
    if (!(aadt_major > 0.0)) throw Error(Errc::DomainError, "aadt_major must be > 0");
    if (!(segment_length > 0.0))
      throw Error(Errc::DomainError, "segment_length must be > 0");
    if (study_years < 1) throw Error(Errc::DomainError, "study_years must be >= 1");
    if (!(calibration_factor > 0.0))
      throw Error(Errc::DomainError, "calibration_factor must be > 0");
    if (!(cmf_product > 0.0)) throw Error(Errc::DomainError, "cmf_product must be > 0");
    for (const auto& x : intersections) {
      if (x.name.empty()) throw Error(Errc::BadValue, "intersection without a name");
      if (!(x.aadt_minor > 0.0))
        throw Error(Errc::DomainError, "aadt_minor must be > 0 at " + x.name);
    }
  }

  Json to_json() const {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["aadt_major"] = aadt_major;
    j["segment_length"] = segment_length;
    j["study_years"] = study_years;
    j["calibration_factor"] = calibration_factor;
    j["cmf_product"] = cmf_product;
    Json arr = Json::array();
    for (const auto& x : intersections)
      arr.push_back(Json{{"name", x.name}, {"aadt_minor", x.aadt_minor}});
    j["intersections"] = std::move(arr);
    return j;
  }

  // Strict field contract: the keys below and nothing else.
  static CorridorSpec from_json(const Json& j) {
    if (!j.is_object()) throw Error(Errc::BadValue, "corridor spec must be a JSON object");
    static const std::vector<std::string> known = {
        "schema_version",     "aadt_major",  "segment_length", "study_years",
        "calibration_factor", "cmf_product", "intersections"};
    for (const auto& [key, value] : j.items()) {
      (void)value;
      bool ok = false;
      for (const auto& k : known) ok = ok || k == key;
      if (!ok) throw Error(Errc::BadValue, "unknown corridor spec field '" + key + "'");
    }
    for (const auto& req : {"aadt_major", "segment_length", "study_years", "intersections"})
      if (!j.contains(req))
        throw Error(Errc::MissingColumn, std::string("corridor spec lacks '") + req + "'");
    CorridorSpec spec;
    spec.aadt_major = j.at("aadt_major").get<double>();
    spec.segment_length = j.at("segment_length").get<double>();
    spec.study_years = j.at("study_years").get<int>();
    spec.calibration_factor = j.value("calibration_factor", 1.0);
    spec.cmf_product = j.value("cmf_product", 1.0);
    for (const auto& x : j.at("intersections")) {
      if (!x.contains("name") || !x.contains("aadt_minor"))
        throw Error(Errc::MissingColumn, "intersection entries need name and aadt_minor");
      spec.intersections.push_back(
          {x.at("name").get<std::string>(), x.at("aadt_minor").get<double>()});
    }
    spec.validate();
    return spec;
  }

  static CorridorSpec load(const std::string& path) {
    const auto text = read_text_file(path);
    Json j;
    try {
      j = Json::parse(text);
    } catch (const std::exception& e) {
      throw Error(Errc::BadValue, "corridor spec parse failure: " + std::string(e.what()));
    }
    return from_json(j);
  }
};

// The studied NC168 corridor: 8.4 signed miles at AADT 8600 plus its four
// stop-controlled intersections, 2019-2023.
inline CorridorSpec default_corridor_spec() {
  CorridorSpec s;
  s.aadt_major = 8600.0;
  s.segment_length = 8.4;
  s.study_years = 5;
  s.intersections = {{"NC168", 15125.0},
                     {"Indiantown", 1625.0},
                     {"Maple", 1900.0},
                     {"Four Forks", 95.0}};
  return s;
}

struct SpfPrediction {
  double segment_per_year = 0.0;
  std::vector<std::pair<std::string, double>> intersections_per_year;
  double per_year_total = 0.0;  // (segment + intersections) * calibration * cmf
  double total = 0.0;           // per_year_total * study_years
  double observed = 0.0;
  double expected_used = 0.0;  // total unless overridden
  bool expected_overridden = false;
  TestResult rate_test;
  TestResult chi_square;
};

// Chi-square over externally fixed expected cells, df = number of cells.
inline TestResult chi_square_cells(const std::vector<double>& observed,
                                   const std::vector<double>& expected,
                                   double alpha = kDefaultAlpha) {
  if (observed.size() != expected.size() || observed.empty())
    throw Error(Errc::LengthMismatch, "observed and expected cells must match and be nonempty");
  TestResult t;
  t.name = "chi_square_vs_expected";
  t.alpha = alpha;
  t.df = static_cast<int>(observed.size());
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (!(expected[i] > 0.0))
      throw Error(Errc::NonPositiveExpected, "expected cell " + std::to_string(i));
    const double d = observed[i] - expected[i];
    const double cell = d * d / expected[i];
    t.statistic += cell;
    t.contributions.push_back({"cell" + std::to_string(i), observed[i], expected[i], cell});
  }
  t.p_value = chi_square_sf(t.statistic, *t.df);
  detail::finalize(t);
  return t;
}

// expected_override replaces the computed total in both comparison tests;
// the components are still reported.
inline SpfPrediction predict_corridor(const CorridorSpec& spec, double observed,
                                      std::optional<double> expected_override = std::nullopt,
                                      double alpha = kDefaultAlpha) {
  spec.validate();
  if (observed < 0.0) throw Error(Errc::DomainError, "observed count must be >= 0");
  if (expected_override && !(*expected_override > 0.0))
    throw Error(Errc::DomainError, "expected override must be > 0");
  SpfPrediction p;
  p.segment_per_year = spf_segment(spec.aadt_major, spec.segment_length);
  double per_year = p.segment_per_year;
  for (const auto& x : spec.intersections) {
    const double v = spf_intersection_4st(spec.aadt_major, x.aadt_minor);
    p.intersections_per_year.emplace_back(x.name, v);
    per_year += v;
  }
  p.per_year_total = per_year * spec.calibration_factor * spec.cmf_product;
  p.total = p.per_year_total * static_cast<double>(spec.study_years);
  p.observed = observed;
  p.expected_used = expected_override ? *expected_override : p.total;
  p.expected_overridden = expected_override.has_value();
  p.rate_test = poisson_rate_test(observed, p.expected_used, alpha);
  p.chi_square = chi_square_cells({observed}, {p.expected_used}, alpha);
  if (p.expected_overridden)
    p.chi_square.notes.push_back("expected total supplied externally");
  return p;
}

inline Json spf_prediction_json(const SpfPrediction& p) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["segment_per_year"] = p.segment_per_year;
  Json arr = Json::array();
  for (const auto& [name, v] : p.intersections_per_year)
    arr.push_back(Json{{"name", name}, {"per_year", v}});
  j["intersections_per_year"] = std::move(arr);
  j["per_year_total"] = p.per_year_total;
  j["total"] = p.total;
  j["observed"] = p.observed;
  j["expected_used"] = p.expected_used;
  j["expected_overridden"] = p.expected_overridden;
  j["rate_test"] = test_result_json(p.rate_test);
  j["chi_square"] = test_result_json(p.chi_square);
  return j;
}

inline std::string spf_prediction_markdown(const SpfPrediction& p) {
  std::string md = "| Component | Crashes/yr |\n|---|---|\n";
  md += "| Segment | " + detail::fmt_fixed(p.segment_per_year, 2) + " |\n";
  for (const auto& [name, v] : p.intersections_per_year)
    md += "| " + name + " | " + detail::fmt_fixed(v, 2) + " |\n";
  md += "| Per-year total | " + detail::fmt_fixed(p.per_year_total, 2) + " |\n\n";
  md += "Predicted total: " + detail::fmt_fixed(p.total, 1) + " vs observed " +
        format_double(p.observed);
  if (p.expected_overridden)
    md += " (comparison against supplied expected " + format_double(p.expected_used) + ")";
  md += "\n\nPoisson rate test: Z = " + detail::fmt_fixed(p.rate_test.statistic, 2) +
        ", p " + detail::p_display(p.rate_test.p_value) + "\n";
  md += "Chi-square: " + detail::fmt_fixed(p.chi_square.statistic, 2) + " (df " +
        std::to_string(*p.chi_square.df) + "), p " +
        detail::p_display(p.chi_square.p_value) + "\n";
  return md;
}

}  // namespace crashlab
