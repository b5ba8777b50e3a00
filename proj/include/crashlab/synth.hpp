#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "crashlab/csv.hpp"
#include "crashlab/error.hpp"
#include "crashlab/jsonio.hpp"
#include "crashlab/records.hpp"
#include "crashlab/rng.hpp"

namespace crashlab {

// Target counts per dimension for the generated corpus. A marginal is "fully
// specified": every bin has an explicit target and the bins sum to `total`.
struct MarginalSpec {
  long total = 163;
  int first_year = 2019;
  double corridor_length = 8.406;
  double milepost_width = 0.5;
  std::vector<long> year;           // per year starting at first_year
  std::vector<long> month;          // Jan..Dec
  std::vector<long> hour;           // 0..23
  std::vector<long> weekday;        // Monday..Sunday
  std::vector<long> accident_type;  // enum order
  std::vector<long> milepost;       // per width-mile bin from 0
  std::vector<long> surface;        // enum order
  std::vector<long> light;          // enum order
  std::vector<long> weather;        // enum order
  long alcohol = 13;

  std::size_t milepost_bins() const {
    return static_cast<std::size_t>(
        std::max(1.0, std::ceil(corridor_length / milepost_width - 1e-9)));
  }

  void validate() const {
    if (total < 1) throw Error(Errc::DomainError, "total must be >= 1");
    if (!(corridor_length > 0.0)) throw Error(Errc::DomainError, "corridor length must be > 0");
    if (!(milepost_width > 0.0)) throw Error(Errc::DomainError, "milepost width must be > 0");
    struct Dim {
      const char* name;
      const std::vector<long>* counts;
      std::size_t size;  // 0 = any
    };
    const Dim dims[] = {
        {"year", &year, 0},       {"month", &month, 12},
        {"hour", &hour, 24},      {"weekday", &weekday, 7},
        {"accident_type", &accident_type, static_cast<std::size_t>(kNumAccidentTypes)},
        {"milepost", &milepost, milepost_bins()},
        {"surface", &surface, static_cast<std::size_t>(kNumRoadSurfaces)},
        {"light", &light, static_cast<std::size_t>(kNumLights)},
        {"weather", &weather, static_cast<std::size_t>(kNumWeathers)},
    };
    for (const auto& d : dims) {
      if (d.counts->empty()) throw Error(Errc::InconsistentMarginals, std::string(d.name) + " marginal is empty");
      if (d.size != 0 && d.counts->size() != d.size)
        throw Error(Errc::BadValue, std::string(d.name) + " marginal needs " +
                                        std::to_string(d.size) + " bins");
      long sum = 0;
      for (long c : *d.counts) {
        if (c < 0) throw Error(Errc::BadValue, std::string(d.name) + " marginal has a negative count");
        sum += c;
      }
      if (sum != total)
        throw Error(Errc::InconsistentMarginals,
                    std::string(d.name) + " marginal sums to " + std::to_string(sum) +
                        ", expected " + std::to_string(total));
    }
    if (alcohol < 0 || alcohol > total)
      throw Error(Errc::BadValue, "alcohol count outside [0, total]");
  }

  Json to_json() const {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["total"] = total;
    j["first_year"] = first_year;
    j["corridor_length"] = corridor_length;
    j["milepost_width"] = milepost_width;
    j["year"] = year;
    j["month"] = month;
    j["hour"] = hour;
    j["weekday"] = weekday;
    j["accident_type"] = accident_type;
    j["milepost"] = milepost;
    j["surface"] = surface;
    j["light"] = light;
    j["weather"] = weather;
    j["alcohol"] = alcohol;
    return j;
  }

  static MarginalSpec from_json(const Json& j) {
    if (!j.is_object()) throw Error(Errc::BadValue, "marginal spec must be a JSON object");
    static const std::vector<std::string> known = {
        "schema_version", "total",   "first_year", "corridor_length", "milepost_width",
        "year",           "month",   "hour",       "weekday",         "accident_type",
        "milepost",       "surface", "light",      "weather",         "alcohol"};
    for (const auto& [key, value] : j.items()) {
      (void)value;
      bool ok = false;
      for (const auto& k : known) ok = ok || k == key;
      if (!ok) throw Error(Errc::BadValue, "unknown marginal spec field '" + key + "'");
    }
    for (const auto& k : known)
      if (!j.contains(k)) throw Error(Errc::MissingColumn, std::string("marginal spec lacks '") + k + "'");
    if (j.at("schema_version").get<int>() != kSchemaVersion)
      throw Error(Errc::BadValue, "unsupported marginal spec schema_version");
    MarginalSpec spec;
    try {
      spec.total = j.at("total").get<long>();
      spec.first_year = j.at("first_year").get<int>();
      spec.corridor_length = j.at("corridor_length").get<double>();
      spec.milepost_width = j.at("milepost_width").get<double>();
      spec.year = j.at("year").get<std::vector<long>>();
      spec.month = j.at("month").get<std::vector<long>>();
      spec.hour = j.at("hour").get<std::vector<long>>();
      spec.weekday = j.at("weekday").get<std::vector<long>>();
      spec.accident_type = j.at("accident_type").get<std::vector<long>>();
      spec.milepost = j.at("milepost").get<std::vector<long>>();
      spec.surface = j.at("surface").get<std::vector<long>>();
      spec.light = j.at("light").get<std::vector<long>>();
      spec.weather = j.at("weather").get<std::vector<long>>();
      spec.alcohol = j.at("alcohol").get<long>();
    } catch (const Json::exception& e) {
      throw Error(Errc::BadValue, std::string("marginal spec field has wrong type: ") + e.what());
    }
    spec.validate();
    return spec;
  }

  static MarginalSpec load(const std::string& path) {
    Json j;
    try {
      j = Json::parse(read_text_file(path));
    } catch (const Json::exception& e) {
      throw Error(Errc::BadValue, path + ": " + e.what());
    }
    return from_json(j);
  }
};

inline MarginalSpec default_marginal_spec() {
  MarginalSpec s;
  s.year = {36, 25, 21, 51, 30};
  s.month = {13, 5, 11, 9, 18, 15, 16, 19, 12, 15, 17, 13};
  s.hour = {1, 1, 3, 1, 0, 6, 9, 17, 9, 14, 6, 5, 5, 13, 11, 5, 11, 11, 7, 6, 11, 6, 1, 4};
  s.weekday = {25, 16, 13, 12, 43, 30, 24};
  s.accident_type = {17, 32, 22, 19, 31, 25, 17};
  s.milepost = {7, 8, 7, 0, 21, 13, 9, 8, 2, 5, 3, 19, 5, 5, 9, 15, 27};
  s.surface = {139, 18, 3, 2, 0, 1};
  s.light = {110, 40, 8, 5};
  s.weather = {131, 19, 10, 3, 0};
  s.alcohol = 13;
  return s;
}

// Damage draws are per-record gamma with a common scale, then rescaled once
// so the pooled variance-to-mean ratio (in thousands) lands on `vmr` exactly.
struct DamageModel {
  double mean_thousands = 6.0;
  double vmr = 9.0;
  long missing_rows = 13;
};

struct GeneratorConfig {
  std::uint64_t seed = 42;
  // 0 = injuries land uniformly; 1 = injuries concentrate at the two
  // hotspot mileposts. Values in between interpolate.
  double injury_signal = 1.0;
  // 0 = surface assigned proportionally across accident types; 1 = the
  // planted type/surface association at full strength.
  double dependence = 1.0;
  DamageModel damage;
};

struct GenerationMetadata {
  std::vector<long> weekday_target;
  std::vector<long> weekday_actual;
  std::vector<long> weekday_residual;  // actual - target
  std::vector<long> type_nondry;       // non-dry surface count per accident type
  double damage_scale = 1.0;
};

enum class MismatchKind { BinCount, InconsistentTotal };

struct MarginalMismatch {
  MismatchKind kind = MismatchKind::BinCount;
  std::string dimension;
  std::string bin;
  long expected = 0;
  long actual = 0;
};

namespace synth_detail {

inline constexpr double kHotspotMileposts[2] = {2.021, 8.406};
inline constexpr double kDamageDarkMult = 0.56;
inline constexpr double kDamageAdverseMult = 1.20;
inline constexpr double kDamageWetMult = 0.95;
inline constexpr double kDamageAlcoholMult = 1.08;
inline constexpr double kDamageSpeedBase = 1.005;  // per mph

// Stream ids keep every draw independent of the others' consumption.
enum Stream : std::uint64_t {
  kStreamShuffle = 1,
  kStreamJitter = 2,
  kStreamDates = 3,
  kStreamDateAssign = 4,
  kStreamHours = 5,
  kStreamMinutes = 6,
  kStreamType = 7,
  kStreamSurfacePick = 8,
  kStreamLightPick = 9,
  kStreamWeatherPick = 10,
  kStreamInjury = 11,
  kStreamSeverity = 12,
  kStreamAlcohol = 13,
  kStreamVehicles = 14,
  kStreamSpeed = 15,
  kStreamDamage = 16,
  kStreamMissing = 17,
  kStreamLatLon = 18,
};

// Rounds fractional targets to integers preserving the exact total.
inline std::vector<long> largest_remainder(const std::vector<double>& raw, long total) {
  const std::size_t n = raw.size();
  std::vector<long> out(n, 0);
  std::vector<std::pair<double, std::size_t>> rem;
  rem.reserve(n);
  long used = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = std::max(0.0, raw[i]);
    out[i] = static_cast<long>(std::floor(v + 1e-12));
    used += out[i];
    rem.push_back({v - static_cast<double>(out[i]), i});
  }
  std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (std::size_t k = 0; used < total; ++k) {
    ++out[rem[k % n].second];
    ++used;
  }
  for (std::size_t k = 0; used > total; ++k) {
    auto& slot = out[rem[n - 1 - (k % n)].second];
    if (slot > 0) {
      --slot;
      --used;
    }
  }
  return out;
}

// Splits one bin's count across its five sub-segments. Even base with the
// remainder leaning toward the denser neighbor keeps the 0.1-mile profile
// smooth across bin boundaries.
inline std::array<long, 5> ramp_split(long n, long left, long right) {
  std::array<long, 5> seg{};
  const long base = n / 5;
  long rem = n % 5;
  seg.fill(base);
  static constexpr int kLeft[5] = {0, 1, 2, 3, 4};
  static constexpr int kRight[5] = {4, 3, 2, 1, 0};
  static constexpr int kCenter[5] = {2, 1, 3, 0, 4};
  const int* order = left > right ? kLeft : (right > left ? kRight : kCenter);
  for (long k = 0; k < rem; ++k) ++seg[static_cast<std::size_t>(order[k])];
  return seg;
}

// Per-0.1-mile-sub-segment counts for the whole corridor. Sparse bins
// (count <= 2) collapse to their leading sub-segment and the following bin
// skips its first sub-segment, so a near-empty bin reads as a genuine
// density break rather than a smear of isolated points. The final bin keeps
// its last sub-segment for the corridor-end spike alone.
inline std::vector<long> segment_targets(const std::vector<long>& bins) {
  const std::size_t nb = bins.size();
  std::vector<long> segs;
  segs.reserve(nb * 5);
  for (std::size_t b = 0; b < nb; ++b) {
    const long n = bins[b];
    const long left = b > 0 ? bins[b - 1] : -1;
    const long right = b + 1 < nb ? bins[b + 1] : -1;
    if (n == 0) {
      segs.insert(segs.end(), 5, 0);
      continue;
    }
    if (n <= 2) {
      segs.push_back(n);
      segs.insert(segs.end(), 4, 0);
      continue;
    }
    if (b + 1 == nb && n >= 2) {
      std::array<long, 4> body{};
      const long base = (n - 1) / 4;
      long rem = (n - 1) % 4;
      body.fill(base);
      for (long k = 0; k < rem; ++k) ++body[static_cast<std::size_t>(3 - k)];
      for (long v : body) segs.push_back(v);
      segs.push_back(1);
      continue;
    }
    if (b > 0 && bins[b - 1] > 0 && bins[b - 1] <= 2) {
      std::array<long, 4> body{};
      const long base = n / 4;
      long rem = n % 4;
      body.fill(base);
      for (long k = 0; k < rem; ++k) ++body[static_cast<std::size_t>(k)];
      segs.push_back(0);
      for (long v : body) segs.push_back(v);
      continue;
    }
    const auto seg = ramp_split(n, left, right);
    segs.insert(segs.end(), seg.begin(), seg.end());
  }
  return segs;
}

inline int days_in_month(int year, unsigned month) {
  const std::chrono::year_month_day_last last{std::chrono::year{year} / std::chrono::month{month} /
                                              std::chrono::last};
  return static_cast<int>(static_cast<unsigned>(last.day()));
}

}  // namespace synth_detail

// Builds the corpus by exact deterministic allocation per marginal, couples
// the dimensions that belong together (hour/light, surface/weather,
// milepost/injury), then shuffles record order with the seed.
inline CrashDataset generate(const MarginalSpec& spec, const GeneratorConfig& config,
                             GenerationMetadata* meta = nullptr) {
  namespace sd = synth_detail;
  spec.validate();
  const std::size_t n = static_cast<std::size_t>(spec.total);
  const std::uint64_t seed = config.seed;

  CrashDataset ds;
  ds.corridor_length = spec.corridor_length;
  ds.study_years = {spec.first_year, spec.first_year + static_cast<int>(spec.year.size()) - 1};
  ds.records.resize(n);

  // Mileposts, in ascending construction order.
  {
    const auto segs = sd::segment_targets(spec.milepost);
    const double w = spec.milepost_width / 5.0;
    Rng rng(seed, sd::kStreamJitter);
    std::size_t r = 0;
    for (std::size_t s = 0; s < segs.size(); ++s) {
      const double lo = static_cast<double>(s) * w;
      const long bin_count = spec.milepost[s / 5];
      const bool collapsed = bin_count > 0 && bin_count <= 2 && s % 5 == 0;
      for (long k = 0; k < segs[s]; ++k) {
        const double hi_frac = collapsed ? 0.45 : 0.95;
        double mp = lo + w * (0.05 + (hi_frac - 0.05) * rng.uniform());
        ds.records[r++].milepost = std::min(mp, spec.corridor_length);
      }
    }
    // Pin one record in each spike's sub-segment to the spike milepost.
    for (double spike : sd::kHotspotMileposts) {
      if (spike > spec.corridor_length) continue;
      const auto target = static_cast<std::size_t>(std::floor(spike / w));
      std::size_t at = 0;
      for (std::size_t s = 0; s < segs.size() && s <= target; ++s) {
        if (s == target && segs[s] > 0) ds.records[at].milepost = spike;
        at += static_cast<std::size_t>(segs[s]);
      }
    }
  }

  // Dates: year x month cells by proportional fit, then a greedy weekday
  // pick per cell slot against the global weekday deficit. Every weekday
  // occurs in every month, so the greedy always lands the marginal exactly.
  {
    const std::size_t ny = spec.year.size();
    std::vector<std::vector<long>> cell(ny, std::vector<long>(12, 0));
    std::vector<long> month_left = spec.month;
    long grand_left = spec.total;
    for (std::size_t y = 0; y + 1 < ny; ++y) {
      std::vector<double> raw(12, 0.0);
      for (std::size_t m = 0; m < 12; ++m)
        raw[m] = static_cast<double>(spec.year[y]) * static_cast<double>(month_left[m]) /
                 static_cast<double>(grand_left);
      auto alloc = sd::largest_remainder(raw, spec.year[y]);
      for (std::size_t m = 0; m < 12; ++m) {
        alloc[m] = std::min(alloc[m], month_left[m]);
      }
      long short_by = spec.year[y] - std::accumulate(alloc.begin(), alloc.end(), 0L);
      for (std::size_t m = 0; short_by > 0; m = (m + 1) % 12) {
        if (alloc[m] < month_left[m]) {
          ++alloc[m];
          --short_by;
        }
      }
      for (std::size_t m = 0; m < 12; ++m) {
        cell[y][m] = alloc[m];
        month_left[m] -= alloc[m];
        grand_left -= alloc[m];
      }
    }
    for (std::size_t m = 0; m < 12; ++m) cell[ny - 1][m] = month_left[m];

    std::vector<long> deficit = spec.weekday;
    Rng rng(seed, sd::kStreamDates);
    std::vector<Date> dates;
    dates.reserve(n);
    for (std::size_t y = 0; y < ny; ++y) {
      const int year = spec.first_year + static_cast<int>(y);
      for (unsigned m = 1; m <= 12; ++m) {
        for (long k = 0; k < cell[y][m - 1]; ++k) {
          int best = 0;
          for (int wdy = 1; wdy < 7; ++wdy)
            if (deficit[wdy] > deficit[best]) best = wdy;
          --deficit[best];
          std::vector<unsigned> candidates;
          const int dim = sd::days_in_month(year, m);
          for (int day = 1; day <= dim; ++day) {
            const Date d{year, m, static_cast<unsigned>(day)};
            if (d.weekday_mon0() == best) candidates.push_back(static_cast<unsigned>(day));
          }
          const auto pick = candidates[rng.uniform_below(candidates.size())];
          dates.push_back(Date{year, m, pick});
        }
      }
    }
    const auto perm = Rng(seed, sd::kStreamDateAssign).permutation(n);
    for (std::size_t i = 0; i < n; ++i) ds.records[i].date = dates[perm[i]];

    if (meta) {
      meta->weekday_target = spec.weekday;
      meta->weekday_actual.assign(7, 0);
      for (const auto& rec : ds.records) ++meta->weekday_actual[rec.date.weekday_mon0()];
      meta->weekday_residual.resize(7);
      for (int i = 0; i < 7; ++i)
        meta->weekday_residual[i] = meta->weekday_actual[i] - spec.weekday[i];
    }
  }

  // Hours and minutes.
  {
    std::vector<int> hours;
    hours.reserve(n);
    for (int h = 0; h < 24; ++h) hours.insert(hours.end(), spec.hour[h], h);
    Rng(seed, sd::kStreamHours).shuffle(hours);
    Rng rng(seed, sd::kStreamMinutes);
    for (std::size_t i = 0; i < n; ++i)
      ds.records[i].time_min = hours[i] * 60 + static_cast<int>(rng.uniform_below(60));
  }

  // Accident types, then non-dry surfaces concentrated per type.
  {
    std::vector<AccidentType> types;
    types.reserve(n);
    for (int t = 0; t < kNumAccidentTypes; ++t)
      types.insert(types.end(), spec.accident_type[t], static_cast<AccidentType>(t));
    Rng(seed, sd::kStreamType).shuffle(types);
    for (std::size_t i = 0; i < n; ++i) ds.records[i].accident_type = types[i];

    const long nondry_total = spec.total - spec.surface[0];
    // Non-dry shares per type at full dependence; run-off-road and
    // fixed-object crashes carry most of the slick-road weight.
    static constexpr double kPlantedShare[kNumAccidentTypes] = {2, 2, 3, 2, 4, 3, 8};
    const double planted_sum = 24.0;
    std::vector<double> raw(kNumAccidentTypes, 0.0);
    for (int t = 0; t < kNumAccidentTypes; ++t) {
      const double planted = kPlantedShare[t] / planted_sum * static_cast<double>(nondry_total);
      const double proportional = static_cast<double>(spec.accident_type[t]) *
                                  static_cast<double>(nondry_total) /
                                  static_cast<double>(spec.total);
      raw[t] = config.dependence * planted + (1.0 - config.dependence) * proportional;
      raw[t] = std::min(raw[t], static_cast<double>(spec.accident_type[t]));
    }
    auto nondry = sd::largest_remainder(raw, nondry_total);
    for (int t = 0; t < kNumAccidentTypes; ++t)
      nondry[t] = std::min(nondry[t], spec.accident_type[t]);
    long short_by = nondry_total - std::accumulate(nondry.begin(), nondry.end(), 0L);
    for (int t = 0; short_by > 0; t = (t + 1) % kNumAccidentTypes) {
      if (nondry[t] < spec.accident_type[t]) {
        ++nondry[t];
        --short_by;
      }
    }
    if (meta) meta->type_nondry.assign(nondry.begin(), nondry.end());

    // Non-dry kinds spread across types by the same proportional rounding,
    // so the full type x surface table is seed-independent.
    std::vector<std::vector<long>> kind_by_type(kNumRoadSurfaces,
                                                std::vector<long>(kNumAccidentTypes, 0));
    std::vector<long> kind_left;
    for (int s = 1; s < kNumRoadSurfaces; ++s) kind_left.push_back(spec.surface[s]);
    std::vector<long> type_left = nondry;
    for (int s = 1; s < kNumRoadSurfaces; ++s) {
      const long want = spec.surface[s];
      if (want == 0) continue;
      const long pool = std::accumulate(type_left.begin(), type_left.end(), 0L);
      std::vector<double> share(kNumAccidentTypes, 0.0);
      for (int t = 0; t < kNumAccidentTypes; ++t)
        share[t] = static_cast<double>(want) * static_cast<double>(type_left[t]) /
                   static_cast<double>(pool);
      auto alloc = sd::largest_remainder(share, want);
      for (int t = 0; t < kNumAccidentTypes; ++t) {
        alloc[t] = std::min(alloc[t], type_left[t]);
      }
      long missing = want - std::accumulate(alloc.begin(), alloc.end(), 0L);
      for (int t = 0; missing > 0; t = (t + 1) % kNumAccidentTypes) {
        if (alloc[t] < type_left[t]) {
          ++alloc[t];
          --missing;
        }
      }
      for (int t = 0; t < kNumAccidentTypes; ++t) {
        kind_by_type[s][t] = alloc[t];
        type_left[t] -= alloc[t];
      }
    }

    Rng rng(seed, sd::kStreamSurfacePick);
    std::vector<std::vector<std::size_t>> by_type(kNumAccidentTypes);
    for (std::size_t i = 0; i < n; ++i)
      by_type[static_cast<int>(ds.records[i].accident_type)].push_back(i);
    for (int t = 0; t < kNumAccidentTypes; ++t) {
      auto& members = by_type[t];
      rng.shuffle(members);
      std::size_t at = 0;
      for (int s = 1; s < kNumRoadSurfaces; ++s)
        for (long k = 0; k < kind_by_type[s][t]; ++k)
          ds.records[members[at++]].road_surface = static_cast<RoadSurface>(s);
      for (; at < members.size(); ++at) ds.records[members[at]].road_surface = RoadSurface::Dry;
    }
  }

  // Light follows the clock: fill Dark from the most nocturnal hours
  // outward, then Dawn and Dusk nearest their boundaries, Daylight takes
  // the rest.
  {
    static constexpr int kDarkOrder[24] = {1,  2,  0,  3,  23, 4,  22, 21, 5,  20, 19, 18,
                                           6,  7,  17, 8,  16, 9,  15, 10, 14, 11, 13, 12};
    static constexpr int kDawnOrder[24] = {6,  5,  7,  4,  8,  3,  9,  2,  10, 1,  11, 0,
                                           12, 23, 13, 22, 14, 21, 15, 20, 16, 19, 17, 18};
    static constexpr int kDuskOrder[24] = {18, 17, 19, 16, 20, 15, 21, 14, 22, 13, 23, 12,
                                           0,  11, 1,  10, 2,  9,  3,  8,  4,  7,  5,  6};
    std::vector<std::vector<std::size_t>> by_hour(24);
    for (std::size_t i = 0; i < n; ++i) by_hour[ds.records[i].hour()].push_back(i);
    Rng rng(seed, sd::kStreamLightPick);
    for (auto& bucket : by_hour) rng.shuffle(bucket);
    std::vector<bool> taken(n, false);
    const auto assign = [&](Light light, long count, const int* order) {
      for (int oi = 0; oi < 24 && count > 0; ++oi) {
        for (std::size_t idx : by_hour[order[oi]]) {
          if (count == 0) break;
          if (taken[idx]) continue;
          ds.records[idx].light = light;
          taken[idx] = true;
          --count;
        }
      }
    };
    assign(Light::Dark, spec.light[static_cast<int>(Light::Dark)], kDarkOrder);
    assign(Light::Dawn, spec.light[static_cast<int>(Light::Dawn)], kDawnOrder);
    assign(Light::Dusk, spec.light[static_cast<int>(Light::Dusk)], kDuskOrder);
    for (std::size_t i = 0; i < n; ++i)
      if (!taken[i]) ds.records[i].light = Light::Daylight;
  }

  // Weather follows the surface: rain and fog land on wet roads first,
  // ice/snow/other surfaces read cloudy, leftovers spill onto dry records.
  {
    std::vector<std::size_t> wet, other_nondry, dry;
    for (std::size_t i = 0; i < n; ++i) {
      if (ds.records[i].road_surface == RoadSurface::Wet)
        wet.push_back(i);
      else if (ds.records[i].road_surface == RoadSurface::Dry)
        dry.push_back(i);
      else
        other_nondry.push_back(i);
    }
    Rng rng(seed, sd::kStreamWeatherPick);
    rng.shuffle(wet);
    rng.shuffle(other_nondry);
    rng.shuffle(dry);
    std::vector<std::size_t> queue;
    queue.reserve(n);
    queue.insert(queue.end(), wet.begin(), wet.end());
    queue.insert(queue.end(), other_nondry.begin(), other_nondry.end());
    queue.insert(queue.end(), dry.begin(), dry.end());
    std::size_t at = 0;
    for (Weather kind : {Weather::Rain, Weather::Fog, Weather::Cloudy, Weather::Other}) {
      for (long k = 0; k < spec.weather[static_cast<int>(kind)]; ++k)
        ds.records[queue[at++]].weather = kind;
    }
    for (; at < n; ++at) ds.records[queue[at]].weather = Weather::Clear;
  }

  // Injuries: each record scores signal-if-near-a-hotspot plus noise; the
  // top third by score carries an injury. Severity splits the injured pool
  // on fixed shares.
  {
    const long n_injured = std::lround(static_cast<double>(spec.total) / 3.0);
    Rng rng(seed, sd::kStreamInjury);
    std::vector<std::pair<double, std::size_t>> score(n);
    for (std::size_t i = 0; i < n; ++i) {
      bool hot = false;
      for (double spike : sd::kHotspotMileposts)
        hot = hot || std::fabs(ds.records[i].milepost - spike) <= spec.milepost_width;
      score[i] = {(hot ? config.injury_signal : 0.0) + rng.uniform(), i};
    }
    std::stable_sort(score.begin(), score.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<std::size_t> injured;
    injured.reserve(n_injured);
    for (long k = 0; k < n_injured; ++k) injured.push_back(score[k].second);

    static constexpr double kSeverityShare[4] = {32, 14, 5, 3};
    std::vector<double> raw(4, 0.0);
    for (int s = 0; s < 4; ++s)
      raw[s] = kSeverityShare[s] / 54.0 * static_cast<double>(n_injured);
    const auto by_severity = sd::largest_remainder(raw, n_injured);
    Rng(seed, sd::kStreamSeverity).shuffle(injured);
    std::size_t at = 0;
    for (int s = 0; s < 4; ++s)
      for (long k = 0; k < by_severity[s]; ++k) ds.records[injured[at++]].injury_severity = s + 1;
  }

  // Alcohol flags skew toward dark records.
  {
    Rng rng(seed, sd::kStreamAlcohol);
    std::vector<std::pair<double, std::size_t>> score(n);
    for (std::size_t i = 0; i < n; ++i)
      score[i] = {(ds.records[i].light == Light::Dark ? 1.0 : 0.0) + rng.uniform(), i};
    std::stable_sort(score.begin(), score.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (long k = 0; k < spec.alcohol; ++k) ds.records[score[k].second].alcohol_drugs = true;
  }

  // Vehicle counts by type: animal and fixed-object crashes are single
  // vehicle, a slice of "other" is too, and a few multi-vehicle types run
  // to three.
  {
    static constexpr double kSingleShare[kNumAccidentTypes] = {0, 0, 0, 0, 1.0, 1.0, 7.0 / 17.0};
    static constexpr double kTripleShare[kNumAccidentTypes] = {3.0 / 17.0, 4.0 / 32.0,
                                                               2.0 / 22.0, 1.0 / 19.0,
                                                               0,          0,
                                                               0};
    Rng rng(seed, sd::kStreamVehicles);
    std::vector<std::vector<std::size_t>> by_type(kNumAccidentTypes);
    for (std::size_t i = 0; i < n; ++i)
      by_type[static_cast<int>(ds.records[i].accident_type)].push_back(i);
    for (int t = 0; t < kNumAccidentTypes; ++t) {
      auto& members = by_type[t];
      rng.shuffle(members);
      const long total_t = static_cast<long>(members.size());
      const long singles = std::lround(kSingleShare[t] * static_cast<double>(total_t));
      const long triples =
          std::min(total_t - singles, std::lround(kTripleShare[t] * static_cast<double>(total_t)));
      std::size_t at = 0;
      for (long k = 0; k < singles; ++k) ds.records[members[at++]].num_vehicles = 1;
      for (long k = 0; k < triples; ++k) ds.records[members[at++]].num_vehicles = 3;
      for (; at < members.size(); ++at) ds.records[members[at]].num_vehicles = 2;
    }
  }

  // Speeds in 5 mph steps, 25..60.
  {
    Rng rng(seed, sd::kStreamSpeed);
    for (auto& rec : ds.records)
      rec.speed_max = 25.0 + 5.0 * static_cast<double>(rng.uniform_below(8));
  }

  // Damage: gamma draws whose means follow the lighting/weather/surface/
  // alcohol/speed multipliers, a seeded subset left missing, then one
  // global rescale pinning the pooled variance-to-mean ratio.
  {
    const double theta = config.damage.vmr;
    if (!(theta > 0.0) || !(config.damage.mean_thousands > 0.0))
      throw Error(Errc::DomainError, "damage model needs positive mean and vmr");
    if (config.damage.missing_rows < 0 || config.damage.missing_rows >= spec.total - 1)
      throw Error(Errc::DomainError, "missing_rows must leave at least two observed damages");
    Rng rng(seed, sd::kStreamDamage);
    for (auto& rec : ds.records) {
      double mu = config.damage.mean_thousands;
      if (rec.light == Light::Dark) mu *= sd::kDamageDarkMult;
      if (rec.weather == Weather::Rain || rec.weather == Weather::Fog)
        mu *= sd::kDamageAdverseMult;
      if (rec.road_surface == RoadSurface::Wet) mu *= sd::kDamageWetMult;
      if (rec.alcohol_drugs) mu *= sd::kDamageAlcoholMult;
      mu *= std::pow(sd::kDamageSpeedBase, *rec.speed_max);
      rec.damage_usd = rng.gamma(mu / theta, theta);
    }
    const auto missing = Rng(seed, sd::kStreamMissing).permutation(n);
    for (long k = 0; k < config.damage.missing_rows; ++k)
      ds.records[missing[k]].damage_usd.reset();

    double sum = 0.0;
    long observed = 0;
    for (const auto& rec : ds.records)
      if (rec.damage_usd) {
        sum += *rec.damage_usd;
        ++observed;
      }
    const double mean = sum / static_cast<double>(observed);
    double ss = 0.0;
    for (const auto& rec : ds.records)
      if (rec.damage_usd) ss += (*rec.damage_usd - mean) * (*rec.damage_usd - mean);
    const double vmr0 = ss / static_cast<double>(observed - 1) / mean;
    if (!(vmr0 > 0.0)) throw Error(Errc::DegenerateInput, "damage draws are degenerate");
    const double scale = theta / vmr0;
    if (meta) meta->damage_scale = scale;
    for (auto& rec : ds.records)
      if (rec.damage_usd)
        rec.damage_usd = std::round(*rec.damage_usd * scale * 1000.0 * 100.0) / 100.0;
  }

  // Coordinates run linearly along the corridor with small jitter.
  {
    Rng rng(seed, sd::kStreamLatLon);
    for (auto& rec : ds.records) {
      const double lat = 36.372 + 0.0031 * rec.milepost + rng.uniform(-0.0008, 0.0008);
      const double lon = -76.141 + 0.0187 * rec.milepost + rng.uniform(-0.0008, 0.0008);
      rec.latitude = std::round(lat * 1e6) / 1e6;
      rec.longitude = std::round(lon * 1e6) / 1e6;
    }
  }

  // Shuffle record order, then ids follow file order.
  {
    const auto perm = Rng(seed, sd::kStreamShuffle).permutation(n);
    std::vector<CrashRecord> shuffled(n);
    for (std::size_t i = 0; i < n; ++i) shuffled[i] = ds.records[perm[i]];
    ds.records = std::move(shuffled);
    char buf[24];
    for (std::size_t i = 0; i < n; ++i) {
      std::snprintf(buf, sizeof(buf), "C%04zu", i + 1);
      ds.records[i].crash_id = buf;
    }
  }

  ds.validate();
  return ds;
}

// Compares every specified marginal of a dataset against the spec. Returns
// one entry per differing bin; a size difference additionally reports an
// InconsistentTotal entry first.
inline std::vector<MarginalMismatch> verify_marginals(const CrashDataset& ds,
                                                      const MarginalSpec& spec) {
  std::vector<MarginalMismatch> out;
  if (static_cast<long>(ds.size()) != spec.total)
    out.push_back({MismatchKind::InconsistentTotal, "total", "", spec.total,
                   static_cast<long>(ds.size())});

  const auto compare = [&out](const std::string& dimension, const std::vector<std::string>& bins,
                              const std::vector<long>& expected, const std::map<std::string, long>& actual) {
    for (std::size_t i = 0; i < bins.size(); ++i) {
      const auto it = actual.find(bins[i]);
      const long got = it == actual.end() ? 0 : it->second;
      if (got != expected[i])
        out.push_back({MismatchKind::BinCount, dimension, bins[i], expected[i], got});
    }
    for (const auto& [bin, got] : actual) {
      if (std::find(bins.begin(), bins.end(), bin) == bins.end())
        out.push_back({MismatchKind::BinCount, dimension, bin, 0, got});
    }
  };

  std::map<std::string, long> year, month, hour, weekday, type, mp, surface, light, weather;
  long alcohol = 0;
  const std::size_t n_bins = spec.milepost_bins();
  for (const auto& r : ds.records) {
    ++year[std::to_string(r.date.year)];
    ++month[std::to_string(r.date.month)];
    ++hour[std::to_string(r.hour())];
    ++weekday[std::to_string(r.date.weekday_mon0())];
    ++type[to_string(r.accident_type)];
    std::size_t idx = static_cast<std::size_t>(std::floor(r.milepost / spec.milepost_width));
    if (idx >= n_bins) idx = n_bins - 1;
    ++mp[format_double(static_cast<double>(idx) * spec.milepost_width)];
    ++surface[to_string(r.road_surface)];
    ++light[to_string(r.light)];
    ++weather[to_string(r.weather)];
    if (r.alcohol_drugs) ++alcohol;
  }

  std::vector<std::string> bins;
  for (std::size_t i = 0; i < spec.year.size(); ++i)
    bins.push_back(std::to_string(spec.first_year + static_cast<int>(i)));
  compare("year", bins, spec.year, year);
  bins.clear();
  for (int m = 1; m <= 12; ++m) bins.push_back(std::to_string(m));
  compare("month", bins, spec.month, month);
  bins.clear();
  for (int h = 0; h < 24; ++h) bins.push_back(std::to_string(h));
  compare("hour", bins, spec.hour, hour);
  bins.clear();
  for (int w = 0; w < 7; ++w) bins.push_back(std::to_string(w));
  compare("weekday", bins, spec.weekday, weekday);
  bins.clear();
  for (int t = 0; t < kNumAccidentTypes; ++t) bins.push_back(to_string(static_cast<AccidentType>(t)));
  compare("accident_type", bins, spec.accident_type, type);
  bins.clear();
  for (std::size_t k = 0; k < n_bins; ++k)
    bins.push_back(format_double(static_cast<double>(k) * spec.milepost_width));
  compare("milepost", bins, spec.milepost, mp);
  bins.clear();
  for (int s = 0; s < kNumRoadSurfaces; ++s) bins.push_back(to_string(static_cast<RoadSurface>(s)));
  compare("surface", bins, spec.surface, surface);
  bins.clear();
  for (int l = 0; l < kNumLights; ++l) bins.push_back(to_string(static_cast<Light>(l)));
  compare("light", bins, spec.light, light);
  bins.clear();
  for (int w = 0; w < kNumWeathers; ++w) bins.push_back(to_string(static_cast<Weather>(w)));
  compare("weather", bins, spec.weather, weather);
  if (alcohol != spec.alcohol)
    out.push_back({MismatchKind::BinCount, "alcohol", "true", spec.alcohol, alcohol});
  return out;
}

inline Json mismatches_json(const std::vector<MarginalMismatch>& mismatches) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["count"] = mismatches.size();
  j["mismatches"] = Json::array();
  for (const auto& m : mismatches) {
    Json e;
    e["kind"] = m.kind == MismatchKind::InconsistentTotal ? "InconsistentTotal" : "BinCount";
    e["dimension"] = m.dimension;
    e["bin"] = m.bin;
    e["expected"] = m.expected;
    e["actual"] = m.actual;
    j["mismatches"].push_back(e);
  }
  return j;
}

inline Json generation_metadata_json(const GenerationMetadata& meta) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["weekday_target"] = meta.weekday_target;
  j["weekday_actual"] = meta.weekday_actual;
  j["weekday_residual"] = meta.weekday_residual;
  j["type_nondry"] = meta.type_nondry;
  j["damage_scale"] = meta.damage_scale;
  return j;
}

}  // namespace crashlab
