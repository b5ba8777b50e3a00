#pragma once

#include <chrono>
#include <cstdio>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "crashlab/error.hpp"

namespace crashlab {

enum class AccidentType { Angle, RearEnd, Sideswipe, Turn, Animal, FixedObject, Other };
enum class RoadSurface { Dry, Wet, Ice, Snow, Sand, Other };
enum class Light { Daylight, Dark, Dawn, Dusk };
enum class Weather { Clear, Cloudy, Rain, Fog, Other };

inline constexpr int kNumAccidentTypes = 7;
inline constexpr int kNumRoadSurfaces = 6;
inline constexpr int kNumLights = 4;
inline constexpr int kNumWeathers = 5;

inline const char* to_string(AccidentType t) {
  switch (t) {
    case AccidentType::Angle: return "Angle";
    case AccidentType::RearEnd: return "RearEnd";
    case AccidentType::Sideswipe: return "Sideswipe";
    case AccidentType::Turn: return "Turn";
    case AccidentType::Animal: return "Animal";
    case AccidentType::FixedObject: return "FixedObject";
    case AccidentType::Other: return "Other";
  }
  return "?";
}

inline const char* to_string(RoadSurface s) {
  switch (s) {
    case RoadSurface::Dry: return "Dry";
    case RoadSurface::Wet: return "Wet";
    case RoadSurface::Ice: return "Ice";
    case RoadSurface::Snow: return "Snow";
    case RoadSurface::Sand: return "Sand";
    case RoadSurface::Other: return "Other";
  }
  return "?";
}

inline const char* to_string(Light l) {
  switch (l) {
    case Light::Daylight: return "Daylight";
    case Light::Dark: return "Dark";
    case Light::Dawn: return "Dawn";
    case Light::Dusk: return "Dusk";
  }
  return "?";
}

inline const char* to_string(Weather w) {
  switch (w) {
    case Weather::Clear: return "Clear";
    case Weather::Cloudy: return "Cloudy";
    case Weather::Rain: return "Rain";
    case Weather::Fog: return "Fog";
    case Weather::Other: return "Other";
  }
  return "?";
}

namespace detail {

template <typename E, int N>
std::optional<E> enum_from_string(const std::string& s) {
  for (int i = 0; i < N; ++i) {
    const E v = static_cast<E>(i);
    if (s == to_string(v)) return v;
  }
  return std::nullopt;
}

}  // namespace detail

inline std::optional<AccidentType> accident_type_from_string(const std::string& s) {
  return detail::enum_from_string<AccidentType, kNumAccidentTypes>(s);
}
inline std::optional<RoadSurface> road_surface_from_string(const std::string& s) {
  return detail::enum_from_string<RoadSurface, kNumRoadSurfaces>(s);
}
inline std::optional<Light> light_from_string(const std::string& s) {
  return detail::enum_from_string<Light, kNumLights>(s);
}
inline std::optional<Weather> weather_from_string(const std::string& s) {
  return detail::enum_from_string<Weather, kNumWeathers>(s);
}

// Calendar date; proleptic Gregorian via std::chrono.
struct Date {
  int year = 0;
  unsigned month = 1;  // 1..12
  unsigned day = 1;    // 1..31

  std::chrono::year_month_day ymd() const {
    return std::chrono::year_month_day{std::chrono::year{year}, std::chrono::month{month},
                                       std::chrono::day{day}};
  }

  bool valid() const { return ymd().ok(); }

  // 0 = Monday .. 6 = Sunday.
  int weekday_mon0() const {
    const std::chrono::weekday wd{std::chrono::sys_days(ymd())};
    return static_cast<int>(wd.iso_encoding()) - 1;
  }

  std::string iso() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", year, month, day);
    return buf;
  }

  auto operator<=>(const Date&) const = default;
};

// One accident record, vehicle data pre-aggregated to the accident level.
struct CrashRecord {
  std::string crash_id;
  Date date;
  int time_min = 0;  // minutes since midnight, 0..1439
  double milepost = 0.0;
  std::optional<double> latitude;
  std::optional<double> longitude;
  AccidentType accident_type = AccidentType::Other;
  RoadSurface road_surface = RoadSurface::Dry;
  Light light = Light::Daylight;
  Weather weather = Weather::Clear;
  std::optional<double> speed_max;  // mph
  int num_vehicles = 1;
  bool alcohol_drugs = false;
  int injury_severity = 0;  // ordinal 0..4, 0 = none
  std::optional<double> damage_usd;

  int hour() const { return time_min / 60; }
  bool injured() const { return injury_severity >= 1; }

  bool operator==(const CrashRecord&) const = default;
};

struct YearRange {
  int first = 0;
  int last = 0;
  int count() const { return last - first + 1; }
};

// Validated ordered collection of crash records plus corridor metadata.
struct CrashDataset {
  std::vector<CrashRecord> records;
  double corridor_length = 0.0;  // miles
  YearRange study_years;
  std::string source_path;
  std::string codebook_version;

  std::size_t size() const { return records.size(); }

  // Checks the dataset invariants; throws on the first violation.
  void validate() const {
    if (records.empty()) throw Error(Errc::EmptyInput, "dataset has no records");
    std::unordered_set<std::string> seen;
    seen.reserve(records.size());
    for (const auto& r : records) {
      if (!seen.insert(r.crash_id).second)
        throw Error(Errc::DuplicateId, "crash_id " + r.crash_id);
      if (r.milepost < 0.0 || r.milepost > corridor_length + 0.1)
        throw Error(Errc::BadValue, "milepost " + std::to_string(r.milepost) +
                                        " outside corridor of length " +
                                        std::to_string(corridor_length));
      if (r.date.year < study_years.first || r.date.year > study_years.last)
        throw Error(Errc::BadValue, "date " + r.date.iso() + " outside study window");
      if (r.time_min < 0 || r.time_min > 1439)
        throw Error(Errc::BadValue, "time " + std::to_string(r.time_min));
      if (r.num_vehicles < 1)
        throw Error(Errc::BadValue, "num_vehicles " + std::to_string(r.num_vehicles));
      if (r.injury_severity < 0 || r.injury_severity > 4)
        throw Error(Errc::BadValue, "injury_severity " + std::to_string(r.injury_severity));
    }
  }
};

}  // namespace crashlab
