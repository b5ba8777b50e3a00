#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "crashlab/csv.hpp"
#include "crashlab/error.hpp"
#include "crashlab/records.hpp"

namespace crashlab {

// Maps raw source codes to canonical enum spellings. The default instance
// is the identity mapping.
struct Codebook {
  std::unordered_map<std::string, std::string> mapping;
  std::string version = "identity";

  std::string translate(const std::string& raw) const {
    const auto it = mapping.find(raw);
    return it == mapping.end() ? raw : it->second;
  }

  // Two-column CSV `raw_code,canonical_enum` with that exact header.
  static Codebook load(const std::string& path) {
    const auto lines = csv::read_lines(path);
    if (lines.empty() || lines.front() != "raw_code,canonical_enum")
      throw Error(Errc::SchemaMismatch, "codebook header must be raw_code,canonical_enum");
    Codebook cb;
    for (std::size_t i = 1; i < lines.size(); ++i) {
      if (lines[i].empty()) continue;
      const auto fields = csv::split_line(lines[i]);
      if (fields.size() != 2)
        throw Error(Errc::BadValue, "codebook line " + std::to_string(i + 1));
      cb.mapping[fields[0]] = fields[1];
    }
    const auto slash = path.find_last_of('/');
    cb.version = slash == std::string::npos ? path : path.substr(slash + 1);
    return cb;
  }
};

struct IngestOptions {
  double corridor_length = 8.406;
  YearRange study_years{2019, 2023};
  // Unknown categorical codes map to Other instead of erroring. Enums
  // without an Other member still reject unknowns.
  bool permissive = false;
};

struct RowError {
  std::size_t row = 0;  // 1-based line number in the file
  std::string column;
  std::string raw;
  Errc code = Errc::BadValue;
  std::string message;
};

// Parsing is total: every data row lands in exactly one of the two vectors.
struct ParseResult {
  CrashDataset dataset;
  std::vector<RowError> row_errors;
};

inline constexpr const char* kCsvHeader =
    "crash_id,date,time,milepost,latitude,longitude,accident_type,road_surface,"
    "light,weather,speed_max,num_vehicles,alcohol_drugs,injury_severity,damage_usd";

inline constexpr int kCsvColumns = 15;

// Accepts HH:MM or HHMM, 24-hour; returns minutes since midnight.
inline int parse_time(const std::string& raw) {
  std::string digits;
  if (raw.size() == 5 && raw[2] == ':')
    digits = raw.substr(0, 2) + raw.substr(3, 2);
  else if (raw.size() == 4)
    digits = raw;
  else
    throw Error(Errc::BadValue, "time '" + raw + "'");
  for (char c : digits)
    if (c < '0' || c > '9') throw Error(Errc::BadValue, "time '" + raw + "'");
  const int hh = (digits[0] - '0') * 10 + (digits[1] - '0');
  const int mm = (digits[2] - '0') * 10 + (digits[3] - '0');
  if (hh > 23 || mm > 59) throw Error(Errc::BadValue, "time '" + raw + "'");
  return hh * 60 + mm;
}

inline std::string format_time(int minutes) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%02d:%02d", minutes / 60, minutes % 60);
  return buf;
}

namespace detail {

inline std::optional<Date> parse_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  for (std::size_t i = 0; i < 10; ++i) {
    if (i == 4 || i == 7) continue;
    if (s[i] < '0' || s[i] > '9') return std::nullopt;
  }
  Date d;
  d.year = std::stoi(s.substr(0, 4));
  d.month = static_cast<unsigned>(std::stoi(s.substr(5, 2)));
  d.day = static_cast<unsigned>(std::stoi(s.substr(8, 2)));
  if (!d.valid()) return std::nullopt;
  return d;
}

struct FieldCursor {
  const std::vector<std::string>& fields;
  std::size_t row;
  std::vector<RowError>& errors;
  bool failed = false;

  const std::string& raw(int idx) const { return fields[static_cast<std::size_t>(idx)]; }

  void fail(int idx, const std::string& column, Errc code, const std::string& msg) {
    if (failed) return;  // first problem per row wins
    errors.push_back({row, column, raw(idx), code, msg});
    failed = true;
  }
};

}  // namespace detail

inline ParseResult parse_csv(const std::string& path, const Codebook& codebook = {},
                             const IngestOptions& options = {}) {
  const auto lines = csv::read_lines(path);
  if (lines.empty()) throw Error(Errc::EmptyInput, path + " is empty");

  const auto header = csv::split_line(lines.front());
  const auto expected = csv::split_line(kCsvHeader);
  for (const auto& col : expected)
    if (std::find(header.begin(), header.end(), col) == header.end())
      throw Error(Errc::MissingColumn, col);
  if (header != expected)
    throw Error(Errc::SchemaMismatch, "header columns out of order or extra");

  ParseResult result;
  result.dataset.corridor_length = options.corridor_length;
  result.dataset.study_years = options.study_years;
  result.dataset.source_path = path;
  result.dataset.codebook_version = codebook.version;

  std::unordered_set<std::string> seen_ids;

  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t row_no = i + 1;
    if (lines[i].empty()) {
      result.row_errors.push_back({row_no, "", "", Errc::BadValue, "blank line"});
      continue;
    }
    const auto fields = csv::split_line(lines[i]);
    if (fields.size() != kCsvColumns) {
      result.row_errors.push_back({row_no, "", lines[i], Errc::BadValue,
                                   "expected " + std::to_string(kCsvColumns) + " fields, got " +
                                       std::to_string(fields.size())});
      continue;
    }

    detail::FieldCursor cur{fields, row_no, result.row_errors};
    CrashRecord rec;

    rec.crash_id = cur.raw(0);
    if (rec.crash_id.empty())
      cur.fail(0, "crash_id", Errc::BadValue, "empty crash_id");
    else if (seen_ids.count(rec.crash_id))
      cur.fail(0, "crash_id", Errc::DuplicateId, "duplicate crash_id");

    if (!cur.failed) {
      const auto d = detail::parse_date(cur.raw(1));
      if (!d)
        cur.fail(1, "date", Errc::BadValue, "not an ISO date");
      else if (d->year < options.study_years.first || d->year > options.study_years.last)
        cur.fail(1, "date", Errc::BadValue, "outside study window");
      else
        rec.date = *d;
    }

    if (!cur.failed) {
      try {
        rec.time_min = parse_time(cur.raw(2));
      } catch (const Error& e) {
        cur.fail(2, "time", Errc::BadValue, e.what());
      }
    }

    if (!cur.failed) {
      const auto mp = parse_double(cur.raw(3));
      if (!mp)
        cur.fail(3, "milepost", Errc::BadValue, "not a number");
      else if (*mp < 0.0 || *mp > options.corridor_length + 0.1)
        cur.fail(3, "milepost", Errc::BadValue, "outside corridor");
      else
        rec.milepost = *mp;
    }

    if (!cur.failed) {
      for (int idx : {4, 5}) {
        const auto& s = cur.raw(idx);
        if (s.empty()) continue;
        const auto v = parse_double(s);
        if (!v) {
          cur.fail(idx, idx == 4 ? "latitude" : "longitude", Errc::BadValue, "not a number");
          break;
        }
        (idx == 4 ? rec.latitude : rec.longitude) = *v;
      }
    }

    if (!cur.failed) {
      const std::string s = codebook.translate(cur.raw(6));
      if (const auto v = accident_type_from_string(s))
        rec.accident_type = *v;
      else if (options.permissive)
        rec.accident_type = AccidentType::Other;
      else
        cur.fail(6, "accident_type", Errc::BadValue, "unknown code");
    }
    if (!cur.failed) {
      const std::string s = codebook.translate(cur.raw(7));
      if (const auto v = road_surface_from_string(s))
        rec.road_surface = *v;
      else if (options.permissive)
        rec.road_surface = RoadSurface::Other;
      else
        cur.fail(7, "road_surface", Errc::BadValue, "unknown code");
    }
    if (!cur.failed) {
      const std::string s = codebook.translate(cur.raw(8));
      if (const auto v = light_from_string(s))
        rec.light = *v;
      else
        cur.fail(8, "light", Errc::BadValue, "unknown code");
    }
    if (!cur.failed) {
      const std::string s = codebook.translate(cur.raw(9));
      if (const auto v = weather_from_string(s))
        rec.weather = *v;
      else if (options.permissive)
        rec.weather = Weather::Other;
      else
        cur.fail(9, "weather", Errc::BadValue, "unknown code");
    }

    if (!cur.failed && !cur.raw(10).empty()) {
      const auto v = parse_double(cur.raw(10));
      if (!v || *v < 0.0)
        cur.fail(10, "speed_max", Errc::BadValue, "not a non-negative number");
      else
        rec.speed_max = *v;
    }

    if (!cur.failed) {
      const auto v = parse_long(cur.raw(11));
      if (!v || *v < 1)
        cur.fail(11, "num_vehicles", Errc::BadValue, "must be an integer >= 1");
      else
        rec.num_vehicles = static_cast<int>(*v);
    }

    if (!cur.failed) {
      const auto& s = cur.raw(12);
      if (s == "0")
        rec.alcohol_drugs = false;
      else if (s == "1")
        rec.alcohol_drugs = true;
      else
        cur.fail(12, "alcohol_drugs", Errc::BadValue, "must be 0 or 1");
    }

    if (!cur.failed) {
      const auto v = parse_long(cur.raw(13));
      if (!v || *v < 0 || *v > 4)
        cur.fail(13, "injury_severity", Errc::BadValue, "must be 0..4");
      else
        rec.injury_severity = static_cast<int>(*v);
    }

    if (!cur.failed && !cur.raw(14).empty()) {
      const auto v = parse_double(cur.raw(14));
      if (!v || *v < 0.0)
        cur.fail(14, "damage_usd", Errc::BadValue, "not a non-negative number");
      else
        rec.damage_usd = *v;
    }

    if (!cur.failed) {
      seen_ids.insert(rec.crash_id);
      result.dataset.records.push_back(std::move(rec));
    }
  }

  return result;
}

struct ImputationItem {
  std::string crash_id;
  AccidentType group = AccidentType::Other;
  double value = 0.0;
  bool fallback = false;  // group had no observed damage; global median used
};

struct ImputationResult {
  CrashDataset dataset;
  std::vector<ImputationItem> items;
};

namespace detail {

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

// Fills missing damage_usd with the median of observed damages within the
// same accident type, falling back to the global median for types with no
// observed values. Touches nothing else; idempotent.
inline ImputationResult impute_damage(const CrashDataset& ds) {
  std::vector<double> all;
  std::map<AccidentType, std::vector<double>> by_type;
  for (const auto& r : ds.records) {
    if (!r.damage_usd) continue;
    all.push_back(*r.damage_usd);
    by_type[r.accident_type].push_back(*r.damage_usd);
  }
  bool any_missing = false;
  for (const auto& r : ds.records) any_missing |= !r.damage_usd;
  if (any_missing && all.empty())
    throw Error(Errc::AllDamageMissing, "no observed damage values to impute from");

  ImputationResult out;
  out.dataset = ds;
  if (!any_missing) return out;

  const double global_median = detail::median(all);
  std::map<AccidentType, double> group_median;
  for (const auto& [type, values] : by_type) group_median[type] = detail::median(values);

  for (auto& r : out.dataset.records) {
    if (r.damage_usd) continue;
    const auto it = group_median.find(r.accident_type);
    const bool fallback = it == group_median.end();
    const double value = fallback ? global_median : it->second;
    r.damage_usd = value;
    out.items.push_back({r.crash_id, r.accident_type, value, fallback});
  }
  return out;
}

// Writes the exact ingest schema; optional fields serialize as empty strings.
inline void write_csv(const CrashDataset& ds, const std::string& path) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& r : ds.records) {
    std::vector<std::string> f;
    f.reserve(kCsvColumns);
    f.push_back(r.crash_id);
    f.push_back(r.date.iso());
    f.push_back(format_time(r.time_min));
    f.push_back(format_double(r.milepost));
    f.push_back(r.latitude ? format_double(*r.latitude) : "");
    f.push_back(r.longitude ? format_double(*r.longitude) : "");
    f.push_back(to_string(r.accident_type));
    f.push_back(to_string(r.road_surface));
    f.push_back(to_string(r.light));
    f.push_back(to_string(r.weather));
    f.push_back(r.speed_max ? format_double(*r.speed_max) : "");
    f.push_back(std::to_string(r.num_vehicles));
    f.push_back(r.alcohol_drugs ? "1" : "0");
    f.push_back(std::to_string(r.injury_severity));
    f.push_back(r.damage_usd ? format_double(*r.damage_usd) : "");
    out += csv::join_line(f);
    out += '\n';
  }
  write_text_file(path, out);
}

}  // namespace crashlab
