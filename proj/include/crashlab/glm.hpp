#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>
#include <vector>

#include "crashlab/csv.hpp"
#include "crashlab/error.hpp"
#include "crashlab/jsonio.hpp"
#include "crashlab/records.hpp"
#include "crashlab/special_functions.hpp"

namespace crashlab {

struct DesignMatrix {
  std::vector<std::string> columns;  // intercept first
  Eigen::MatrixXd X;                 // n x p
  Eigen::VectorXd y;                 // response, damage in thousands
};

// Sample variance (N-1) over mean.
inline double overdispersion_ratio(const std::vector<double>& response) {
  if (response.size() < 2) throw Error(Errc::DegenerateInput, "need at least 2 values");
  const double n = static_cast<double>(response.size());
  const double mean = std::accumulate(response.begin(), response.end(), 0.0) / n;
  if (!(mean > 0.0)) throw Error(Errc::ZeroMean, "response mean must be > 0");
  double ss = 0.0;
  for (double v : response) ss += (v - mean) * (v - mean);
  return ss / (n - 1.0) / mean;
}

// Damage regression design: reference categories are daylight, clear
// weather, dry roads, no alcohol. Adverse weather groups rain and fog.
// Missing speeds take the global median so no cell is empty; rows must have
// damage already imputed.
inline DesignMatrix make_damage_design(const CrashDataset& ds) {
  std::vector<double> speeds;
  for (const auto& r : ds.records)
    if (r.speed_max) speeds.push_back(*r.speed_max);
  double speed_fill = 0.0;
  if (!speeds.empty()) {
    std::sort(speeds.begin(), speeds.end());
    const std::size_t m = speeds.size();
    speed_fill = m % 2 ? speeds[m / 2] : 0.5 * (speeds[m / 2 - 1] + speeds[m / 2]);
  }

  const std::size_t n = ds.size();
  DesignMatrix d;
  d.columns = {"intercept", "dark", "adverse_weather", "cloudy", "wet_road", "alcohol", "speed"};
  d.X.resize(static_cast<Eigen::Index>(n), 7);
  d.y.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = ds.records[i];
    if (!r.damage_usd)
      throw Error(Errc::BadValue, "record " + r.crash_id + " lacks damage; impute first");
    const auto row = static_cast<Eigen::Index>(i);
    d.X(row, 0) = 1.0;
    d.X(row, 1) = r.light == Light::Dark ? 1.0 : 0.0;
    d.X(row, 2) = (r.weather == Weather::Rain || r.weather == Weather::Fog) ? 1.0 : 0.0;
    d.X(row, 3) = r.weather == Weather::Cloudy ? 1.0 : 0.0;
    d.X(row, 4) = r.road_surface == RoadSurface::Wet ? 1.0 : 0.0;
    d.X(row, 5) = r.alcohol_drugs ? 1.0 : 0.0;
    d.X(row, 6) = r.speed_max ? *r.speed_max : speed_fill;
    d.y(row) = *r.damage_usd / 1000.0;
  }
  return d;
}

struct FitResult {
  std::vector<std::string> columns;
  Eigen::VectorXd beta;
  Eigen::VectorXd se;
  double alpha = 1.0;  // NB2 dispersion, variance = mu + alpha*mu^2
  double log_lik = 0.0;
  bool converged = false;
  int iterations = 0;
  std::vector<double> trace;  // log-likelihood per outer iteration
};

namespace nb {

inline constexpr double kAlphaFloor = 1e-8;

// NB2 log-likelihood through its gamma-function form, so a continuous
// non-negative response types (damage is not a count).
inline double log_likelihood(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             const Eigen::VectorXd& beta, double alpha) {
  const Eigen::VectorXd eta = X * beta;
  const double r = 1.0 / alpha;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double mu = std::exp(eta(i));
    const double yi = y(i);
    ll += log_gamma(yi + r) - log_gamma(r) - log_gamma(yi + 1.0);
    if (yi > 0.0) ll += yi * std::log(alpha * mu);
    ll -= (yi + r) * std::log1p(alpha * mu);
  }
  return ll;
}

// d ll / d beta_j = sum (y - mu) / (1 + alpha*mu) * x_ij
inline Eigen::VectorXd beta_gradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                     const Eigen::VectorXd& beta, double alpha) {
  const Eigen::VectorXd eta = X * beta;
  Eigen::VectorXd s(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double mu = std::exp(eta(i));
    s(i) = (y(i) - mu) / (1.0 + alpha * mu);
  }
  return X.transpose() * s;
}

inline double alpha_gradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             const Eigen::VectorXd& beta, double alpha) {
  const Eigen::VectorXd eta = X * beta;
  const double r = 1.0 / alpha;
  double g = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double mu = std::exp(eta(i));
    const double yi = y(i);
    g += (digamma(r) - digamma(yi + r) + std::log1p(alpha * mu)) * r * r;
    g += (yi - mu) / (alpha * (1.0 + alpha * mu));
  }
  return g;
}

}  // namespace nb

// Maximizes the NB2 likelihood with a log link: inner IRLS sweeps for beta
// alternate with damped Newton steps on alpha. Unconverged fits come back
// with converged=false and the iteration trace; callers decide severity.
inline FitResult fit_negative_binomial(const DesignMatrix& design, int max_outer = 200) {
  const Eigen::MatrixXd& X = design.X;
  const Eigen::VectorXd& y = design.y;
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  if (n <= p) throw Error(Errc::DegenerateInput, "need more rows than columns");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < p) {
    // The QR permutation pushes dependent columns to the back.
    const auto perm = qr.colsPermutation().indices();
    std::string names;
    for (Eigen::Index k = qr.rank(); k < p; ++k) {
      if (!names.empty()) names += ", ";
      names += design.columns[static_cast<std::size_t>(perm(k))];
    }
    throw Error(Errc::RankDeficient, "collinear columns: " + names);
  }

  // Least squares on log(y+1) is a cheap, stable start.
  Eigen::VectorXd logy(n);
  for (Eigen::Index i = 0; i < n; ++i) logy(i) = std::log1p(y(i));
  Eigen::VectorXd beta = qr.solve(logy);
  double alpha = 1.0;

  FitResult out;
  out.columns = design.columns;
  double ll = nb::log_likelihood(X, y, beta, alpha);

  bool converged = false;
  int outer = 0;
  for (; outer < max_outer; ++outer) {
    const Eigen::VectorXd beta_before = beta;
    const double alpha_before = alpha;

    // IRLS for beta at fixed alpha, with step-halving to keep ll monotone.
    for (int inner = 0; inner < 100; ++inner) {
      const Eigen::VectorXd eta = X * beta;
      Eigen::VectorXd w(n), s(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double mu = std::exp(eta(i));
        w(i) = mu / (1.0 + alpha * mu);
        s(i) = (y(i) - mu) / (1.0 + alpha * mu);
      }
      const Eigen::MatrixXd xtwx = X.transpose() * w.asDiagonal() * X;
      Eigen::VectorXd step = xtwx.ldlt().solve(X.transpose() * s);
      double scale = 1.0;
      double cand_ll = ll;
      Eigen::VectorXd cand = beta;
      for (int half = 0; half < 40; ++half) {
        cand = beta + scale * step;
        cand_ll = nb::log_likelihood(X, y, cand, alpha);
        if (cand_ll >= ll - 1e-12) break;
        scale *= 0.5;
      }
      const double move = (cand - beta).cwiseAbs().maxCoeff();
      if (cand_ll >= ll - 1e-12) {
        beta = cand;
        ll = cand_ll;
      }
      if (move < 1e-10) break;
    }

    // One damped Newton step on alpha; curvature from a central difference
    // of the analytic gradient.
    {
      const double g = nb::alpha_gradient(X, y, beta, alpha);
      // Multiplicative offsets keep both evaluation points positive even at
      // the alpha floor.
      const double hi = alpha * (1.0 + 1e-5);
      const double lo = alpha * (1.0 - 1e-5);
      const double h =
          (nb::alpha_gradient(X, y, beta, hi) - nb::alpha_gradient(X, y, beta, lo)) / (hi - lo);
      double step = h < 0.0 ? -g / h : g;  // fall back to gradient ascent
      if (!std::isfinite(step)) step = 0.0;
      double scale = 1.0;
      for (int half = 0; half < 40 && step != 0.0; ++half) {
        const double cand = std::max(nb::kAlphaFloor, alpha + scale * step);
        const double cand_ll = nb::log_likelihood(X, y, beta, cand);
        if (cand_ll >= ll - 1e-12) {
          alpha = cand;
          ll = cand_ll;
          break;
        }
        scale *= 0.5;
      }
    }

    out.trace.push_back(ll);
    const double dbeta = (beta - beta_before).cwiseAbs().maxCoeff();
    const double dalpha = std::fabs(alpha - alpha_before);
    if (dbeta < 1e-8 && dalpha < 1e-8) {
      converged = true;
      ++outer;
      break;
    }
  }

  if (beta.cwiseAbs().maxCoeff() > 20.0)
    throw Error(Errc::SeparationSuspect, "a coefficient exceeds 20 in absolute value");

  // Observed information for beta at the optimum.
  const Eigen::VectorXd eta = X * beta;
  Eigen::VectorXd obs_w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mu = std::exp(eta(i));
    const double denom = 1.0 + alpha * mu;
    obs_w(i) = mu * (1.0 + alpha * y(i)) / (denom * denom);
  }
  const Eigen::MatrixXd info = X.transpose() * obs_w.asDiagonal() * X;
  const Eigen::MatrixXd cov = info.ldlt().solve(Eigen::MatrixXd::Identity(p, p));

  out.beta = beta;
  out.se.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) out.se(j) = std::sqrt(std::max(0.0, cov(j, j)));
  out.alpha = alpha;
  out.log_lik = ll;
  out.converged = converged;
  out.iterations = outer;
  return out;
}

struct IrrRow {
  std::string predictor;
  double irr = 1.0;
  double ci_low = 1.0;
  double ci_high = 1.0;
  double p_value = 1.0;
  double percent_risk = 0.0;  // (IRR - 1) * 100
};

// Non-intercept predictors ranked by ascending p-value.
inline std::vector<IrrRow> irr_table(const FitResult& fit) {
  if (!fit.converged) throw Error(Errc::NotConverged, "fit did not converge");
  std::vector<IrrRow> rows;
  for (Eigen::Index j = 0; j < fit.beta.size(); ++j) {
    if (fit.columns[static_cast<std::size_t>(j)] == "intercept") continue;
    IrrRow r;
    r.predictor = fit.columns[static_cast<std::size_t>(j)];
    r.irr = std::exp(fit.beta(j));
    r.ci_low = std::exp(fit.beta(j) - 1.959963984540054 * fit.se(j));
    r.ci_high = std::exp(fit.beta(j) + 1.959963984540054 * fit.se(j));
    r.p_value = fit.se(j) > 0.0 ? 2.0 * normal_sf(std::fabs(fit.beta(j) / fit.se(j))) : 0.0;
    r.percent_risk = (r.irr - 1.0) * 100.0;
    rows.push_back(r);
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const IrrRow& a, const IrrRow& b) { return a.p_value < b.p_value; });
  return rows;
}

inline Json irr_table_json(const std::vector<IrrRow>& rows) {
  Json arr = Json::array();
  for (const auto& r : rows) {
    Json j;
    j["predictor"] = r.predictor;
    j["irr"] = r.irr;
    j["ci_low"] = r.ci_low;
    j["ci_high"] = r.ci_high;
    j["p_value"] = r.p_value;
    j["percent_risk"] = r.percent_risk;
    arr.push_back(j);
  }
  Json out;
  out["schema_version"] = kSchemaVersion;
  out["rows"] = arr;
  return out;
}

inline std::string irr_table_markdown(const std::vector<IrrRow>& rows) {
  std::string out =
      "| Predictor | IRR | 95% CI | p-value | Risk |\n"
      "|---|---:|---|---:|---:|\n";
  for (const auto& r : rows) {
    const int places = std::fabs(r.irr - 1.0) < 0.05 && r.irr != 1.0 ? 3 : 2;
    const std::string pct = (r.percent_risk >= 0.05 ? "+" : "") +
                            detail::fmt_fixed(r.percent_risk, places == 3 ? 1 : 0) + "%";
    out += "| " + r.predictor + " | " + detail::fmt_fixed(r.irr, places) + " | [" +
           detail::fmt_fixed(r.ci_low, places) + ", " +
           detail::fmt_fixed(r.ci_high, places) + "] | " + detail::p_display(r.p_value) +
           " | " + pct + " |\n";
  }
  return out;
}

inline Json fit_result_json(const FitResult& fit) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  j["alpha"] = fit.alpha;
  j["log_likelihood"] = fit.log_lik;
  Json coeffs = Json::array();
  for (Eigen::Index k = 0; k < fit.beta.size(); ++k) {
    Json c;
    c["column"] = fit.columns[static_cast<std::size_t>(k)];
    c["beta"] = fit.beta(k);
    c["se"] = fit.se(k);
    c["irr"] = std::exp(fit.beta(k));
    coeffs.push_back(c);
  }
  j["coefficients"] = coeffs;
  j["trace"] = fit.trace;
  return j;
}

}  // namespace crashlab
