#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "wildfire/core/csv.hpp"
#include "wildfire/core/date.hpp"
#include "wildfire/core/error.hpp"
#include "wildfire/geo.hpp"

namespace wildfire::ingest {

using geo::StationKind;

inline constexpr double kMinTempC = -90.0;
inline constexpr double kMaxTempC = 100.0;

enum class FuelClass { LIVE, DEAD };

inline constexpr std::string_view to_string(FuelClass f) { return f == FuelClass::LIVE ? "live" : "dead"; }

struct DailyEnvRecord {
  std::string station_id;
  Date date;
  StationKind kind = StationKind::TP;
  std::optional<double> tmax, tmin, tavg;  // degrees C
  std::optional<double> prcp;              // mm
  std::optional<double> wind_speed;        // m/s
  std::optional<double> fmc;               // percent
  std::optional<FuelClass> fuel_class;

  bool operator==(const DailyEnvRecord&) const = default;
};

// Checks the per-kind field set and value bounds.
inline bool is_valid(const DailyEnvRecord& r) {
  const auto temp_ok = [](const std::optional<double>& t) {
    return !t || (*t >= kMinTempC && *t <= kMaxTempC);
  };
  switch (r.kind) {
    case StationKind::TP:
      return !r.wind_speed && !r.fmc && !r.fuel_class && temp_ok(r.tmax) && temp_ok(r.tmin) &&
             temp_ok(r.tavg) && (!r.prcp || *r.prcp >= 0.0);
    case StationKind::WIND:
      return r.wind_speed && *r.wind_speed >= 0.0 && !r.tmax && !r.tmin && !r.tavg && !r.prcp &&
             !r.fmc && !r.fuel_class;
    case StationKind::FUEL:
      return r.fmc && *r.fmc >= 0.0 && r.fuel_class && !r.tmax && !r.tmin && !r.tavg && !r.prcp &&
             !r.wind_speed;
  }
  return false;
}

struct FireEvent {
  std::string event_id;
  Date start_date;
  std::optional<Date> end_date;
  double size_acres = 0.0;
  geo::GeoPoint location;
  std::optional<std::string> reported_state;
  std::optional<std::string> reported_county;

  bool operator==(const FireEvent&) const = default;
};

struct Reject {
  std::string file;
  std::size_t row = 0;
  std::string reason;
};

template <class T>
struct ParseResult {
  std::vector<T> records;
  std::vector<Reject> rejects;
};

inline double wind_speed(double u, double v) { return std::hypot(u, v); }

namespace detail {

inline std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
  return s;
}

inline std::vector<std::string> read_header(csv::Reader& reader, std::string_view file,
                                            const std::vector<std::vector<std::string>>& accepted) {
  const auto header = reader.header();
  if (!header) throw MalformedHeader(std::string(file) + ": empty file, expected header");
  for (const auto& a : accepted)
    if (*header == a) return a;
  std::string expected;
  for (const auto& a : accepted) expected += (expected.empty() ? "" : " or ") + join(a);
  throw MalformedHeader(std::string(file) + ": header '" + join(*header) + "', expected " + expected);
}

// Collects row-level failures without aborting the parse.
class RowContext {
 public:
  RowContext(std::string_view file, std::size_t row, std::vector<Reject>& rejects)
      : file_(file), row_(row), rejects_(rejects) {}

  void reject(std::string reason) {
    if (!failed_) rejects_.push_back({std::string(file_), row_, std::move(reason)});
    failed_ = true;
  }
  bool failed() const { return failed_; }

  std::optional<Date> date(const std::string& field, std::string_view name) {
    const auto d = Date::parse(csv::trim(field));
    if (!d) reject("invalid " + std::string(name) + " '" + field + "'");
    return d;
  }

  // Empty field -> nullopt; non-numeric -> reject.
  std::optional<double> optional_number(const std::string& field, std::string_view name) {
    if (csv::trim(field).empty()) return std::nullopt;
    const auto v = csv::parse_double(field);
    if (!v) reject("non-numeric " + std::string(name) + " '" + field + "'");
    return v;
  }

  std::optional<double> number(const std::string& field, std::string_view name) {
    if (csv::trim(field).empty()) {
      reject("missing " + std::string(name));
      return std::nullopt;
    }
    return optional_number(field, name);
  }

 private:
  std::string_view file_;
  std::size_t row_;
  std::vector<Reject>& rejects_;
  bool failed_ = false;
};

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace detail

// Raw temperature/precipitation in tenths of a unit, as distributed by the
// source network.
inline ParseResult<DailyEnvRecord> parse_tp_csv(std::istream& in, std::string_view file = "tp.csv") {
  csv::Reader reader(in);
  detail::read_header(reader, file,
                      {{"station_id", "date", "tmax_tenths_c", "tmin_tenths_c", "tavg_tenths_c",
                        "prcp_tenths_mm"}});
  ParseResult<DailyEnvRecord> out;
  while (const auto row = reader.next()) {
    detail::RowContext ctx(file, reader.row(), out.rejects);
    const auto& f = *row;
    if (f.size() != 6) {
      ctx.reject("expected 6 fields, got " + std::to_string(f.size()));
      continue;
    }
    DailyEnvRecord r;
    r.kind = StationKind::TP;
    r.station_id = std::string(csv::trim(f[0]));
    if (r.station_id.empty()) ctx.reject("missing station_id");
    const auto date = ctx.date(f[1], "date");
    const auto tenths = [&](const std::string& field, std::string_view name) -> std::optional<double> {
      const auto v = ctx.optional_number(field, name);
      return v ? std::optional<double>(*v / 10.0) : std::nullopt;
    };
    r.tmax = tenths(f[2], "tmax_tenths_c");
    r.tmin = tenths(f[3], "tmin_tenths_c");
    r.tavg = tenths(f[4], "tavg_tenths_c");
    r.prcp = tenths(f[5], "prcp_tenths_mm");
    if (r.prcp && *r.prcp < 0.0) ctx.reject("negative precipitation");
    if (ctx.failed()) continue;
    r.date = *date;
    if (!r.tavg && r.tmax && r.tmin) r.tavg = (*r.tmax + *r.tmin) / 2.0;
    out.records.push_back(std::move(r));
  }
  return out;
}

inline ParseResult<DailyEnvRecord> parse_wind_csv(std::istream& in, std::string_view file = "wind.csv") {
  csv::Reader reader(in);
  const auto header = detail::read_header(
      reader, file, {{"station_id", "date", "u_ms", "v_ms"}, {"station_id", "date", "wind_speed_ms"}});
  const bool components = header.size() == 4;
  ParseResult<DailyEnvRecord> out;
  while (const auto row = reader.next()) {
    detail::RowContext ctx(file, reader.row(), out.rejects);
    const auto& f = *row;
    if (f.size() != header.size()) {
      ctx.reject("expected " + std::to_string(header.size()) + " fields, got " + std::to_string(f.size()));
      continue;
    }
    DailyEnvRecord r;
    r.kind = StationKind::WIND;
    r.station_id = std::string(csv::trim(f[0]));
    if (r.station_id.empty()) ctx.reject("missing station_id");
    const auto date = ctx.date(f[1], "date");
    if (components) {
      const auto u = ctx.number(f[2], "u_ms");
      const auto v = ctx.number(f[3], "v_ms");
      if (u && v) r.wind_speed = wind_speed(*u, *v);
    } else {
      r.wind_speed = ctx.number(f[2], "wind_speed_ms");
      if (r.wind_speed && *r.wind_speed < 0.0) ctx.reject("negative wind speed");
    }
    if (ctx.failed()) continue;
    r.date = *date;
    out.records.push_back(std::move(r));
  }
  return out;
}

inline ParseResult<DailyEnvRecord> parse_fuel_csv(std::istream& in, std::string_view file = "fuel.csv") {
  csv::Reader reader(in);
  detail::read_header(reader, file, {{"station_id", "date", "fuel_class", "fmc_percent"}});
  ParseResult<DailyEnvRecord> out;
  while (const auto row = reader.next()) {
    detail::RowContext ctx(file, reader.row(), out.rejects);
    const auto& f = *row;
    if (f.size() != 4) {
      ctx.reject("expected 4 fields, got " + std::to_string(f.size()));
      continue;
    }
    DailyEnvRecord r;
    r.kind = StationKind::FUEL;
    r.station_id = std::string(csv::trim(f[0]));
    if (r.station_id.empty()) ctx.reject("missing station_id");
    const auto date = ctx.date(f[1], "date");
    const auto cls = detail::lower(csv::trim(f[2]));
    if (cls == "live") {
      r.fuel_class = FuelClass::LIVE;
    } else if (cls == "dead") {
      r.fuel_class = FuelClass::DEAD;
    } else {
      ctx.reject("unknown fuel_class '" + f[2] + "'");
    }
    r.fmc = ctx.number(f[3], "fmc_percent");
    if (r.fmc && *r.fmc < 0.0) ctx.reject("negative fmc");
    if (ctx.failed()) continue;
    r.date = *date;
    out.records.push_back(std::move(r));
  }
  return out;
}

inline ParseResult<FireEvent> parse_fire_csv(std::istream& in, std::string_view file = "fires.csv") {
  csv::Reader reader(in);
  detail::read_header(reader, file,
                      {{"event_id", "start_date", "end_date", "size_acres", "lat", "lon", "state_fips",
                        "county_fips"}});
  ParseResult<FireEvent> out;
  std::unordered_set<std::string> seen;
  while (const auto row = reader.next()) {
    detail::RowContext ctx(file, reader.row(), out.rejects);
    const auto& f = *row;
    if (f.size() != 8) {
      ctx.reject("expected 8 fields, got " + std::to_string(f.size()));
      continue;
    }
    FireEvent e;
    e.event_id = std::string(csv::trim(f[0]));
    if (e.event_id.empty()) ctx.reject("missing event_id");
    const auto start = ctx.date(f[1], "start_date");
    if (!csv::trim(f[2]).empty()) e.end_date = ctx.date(f[2], "end_date");
    const auto size = ctx.number(f[3], "size_acres");
    if (size && *size <= 0.0) ctx.reject("size_acres must be > 0");
    const auto lat = ctx.number(f[4], "lat");
    const auto lon = ctx.number(f[5], "lon");
    if (lat && lon) {
      try {
        e.location = geo::GeoPoint(*lat, *lon);
      } catch (const InvalidGeometry&) {
        ctx.reject("coordinates out of range");
      }
    }
    if (start && e.end_date && *e.end_date < *start) ctx.reject("end_date before start_date");
    if (!csv::trim(f[6]).empty()) e.reported_state = std::string(csv::trim(f[6]));
    if (!csv::trim(f[7]).empty()) e.reported_county = std::string(csv::trim(f[7]));
    if (ctx.failed()) continue;
    if (!seen.insert(e.event_id).second) {
      ctx.reject("duplicate event_id " + e.event_id);
      continue;
    }
    e.start_date = *start;
    e.size_acres = *size;
    out.records.push_back(std::move(e));
  }
  return out;
}

// Station metadata: station_id,kind,lat,lon with kind in {TP, WIND, FUEL}.
inline ParseResult<geo::Station> parse_stations_csv(std::istream& in, std::string_view file = "stations.csv") {
  csv::Reader reader(in);
  detail::read_header(reader, file, {{"station_id", "kind", "lat", "lon"}});
  ParseResult<geo::Station> out;
  std::set<std::pair<StationKind, std::string>> seen;
  while (const auto row = reader.next()) {
    detail::RowContext ctx(file, reader.row(), out.rejects);
    const auto& f = *row;
    if (f.size() != 4) {
      ctx.reject("expected 4 fields, got " + std::to_string(f.size()));
      continue;
    }
    geo::Station s;
    s.id = std::string(csv::trim(f[0]));
    if (s.id.empty()) ctx.reject("missing station_id");
    const auto kind = geo::parse_station_kind(csv::trim(f[1]));
    if (!kind) ctx.reject("unknown kind '" + f[1] + "'");
    const auto lat = ctx.number(f[2], "lat");
    const auto lon = ctx.number(f[3], "lon");
    if (lat && lon) {
      try {
        s.location = geo::GeoPoint(*lat, *lon);
      } catch (const InvalidGeometry&) {
        ctx.reject("coordinates out of range");
      }
    }
    if (ctx.failed()) continue;
    s.kind = *kind;
    if (!seen.insert({s.kind, s.id}).second) {
      ctx.reject("duplicate station " + s.id);
      continue;
    }
    out.records.push_back(std::move(s));
  }
  return out;
}

struct CleanResult {
  std::vector<DailyEnvRecord> kept;
  std::size_t rejected_count = 0;
};

// Drops whole records with any temperature outside [-90, 100] C (inclusive).
inline CleanResult clean_temperature(std::vector<DailyEnvRecord> records) {
  CleanResult out;
  const auto bad = [](const std::optional<double>& t) { return t && (*t < kMinTempC || *t > kMaxTempC); };
  for (auto& r : records) {
    if (bad(r.tmax) || bad(r.tmin) || bad(r.tavg)) {
      ++out.rejected_count;
    } else {
      out.kept.push_back(std::move(r));
    }
  }
  return out;
}

struct CoverageResult {
  std::vector<std::string> kept;           // sorted
  std::map<std::string, double> coverage;  // every input station
};

// coverage = distinct record dates in range / days in range; kept iff
// coverage > threshold.
inline CoverageResult filter_coverage(const std::vector<geo::Station>& stations,
                                      const std::vector<DailyEnvRecord>& records,
                                      const DateRange& range = kStudyRange, double threshold = 0.5) {
  if (!(threshold > 0.0 && threshold <= 1.0)) throw InputError("InvalidInput", "threshold must be in (0, 1]");
  std::map<std::string, std::set<Date>> dates;
  for (const auto& s : stations) dates[s.id];
  for (const auto& r : records) {
    const auto it = dates.find(r.station_id);
    if (it != dates.end() && range.contains(r.date)) it->second.insert(r.date);
  }
  CoverageResult out;
  const double total = range.days();
  for (const auto& [id, ds] : dates) {
    const double c = static_cast<double>(ds.size()) / total;
    out.coverage[id] = c;
    if (c > threshold) out.kept.push_back(id);
  }
  return out;
}

// Canonical (post-ingest) environmental record CSV. Units are whole C, mm,
// m/s and percent.
inline const std::vector<std::string> kCanonicalEnvHeader = {
    "station_id", "date", "kind", "tmax", "tmin", "tavg", "prcp", "wind_speed", "fmc", "fuel_class"};

inline void write_env_csv(std::ostream& os, const std::vector<DailyEnvRecord>& records) {
  csv::write_row(os, kCanonicalEnvHeader);
  const auto num = [](const std::optional<double>& v) { return v ? csv::format_double(*v) : std::string(); };
  for (const auto& r : records) {
    csv::write_row(os, {r.station_id, r.date.iso(), std::string(geo::to_string(r.kind)), num(r.tmax),
                        num(r.tmin), num(r.tavg), num(r.prcp), num(r.wind_speed), num(r.fmc),
                        r.fuel_class ? std::string(to_string(*r.fuel_class)) : std::string()});
  }
}

inline ParseResult<DailyEnvRecord> read_env_csv(std::istream& in, std::string_view file) {
  csv::Reader reader(in);
  detail::read_header(reader, file, {kCanonicalEnvHeader});
  ParseResult<DailyEnvRecord> out;
  while (const auto row = reader.next()) {
    detail::RowContext ctx(file, reader.row(), out.rejects);
    const auto& f = *row;
    if (f.size() != kCanonicalEnvHeader.size()) {
      ctx.reject("expected 10 fields, got " + std::to_string(f.size()));
      continue;
    }
    DailyEnvRecord r;
    r.station_id = f[0];
    const auto date = ctx.date(f[1], "date");
    const auto kind = geo::parse_station_kind(f[2]);
    if (!kind) ctx.reject("unknown kind '" + f[2] + "'");
    r.tmax = ctx.optional_number(f[3], "tmax");
    r.tmin = ctx.optional_number(f[4], "tmin");
    r.tavg = ctx.optional_number(f[5], "tavg");
    r.prcp = ctx.optional_number(f[6], "prcp");
    r.wind_speed = ctx.optional_number(f[7], "wind_speed");
    r.fmc = ctx.optional_number(f[8], "fmc");
    if (f[9] == "live") r.fuel_class = FuelClass::LIVE;
    else if (f[9] == "dead") r.fuel_class = FuelClass::DEAD;
    else if (!f[9].empty()) ctx.reject("unknown fuel_class '" + f[9] + "'");
    if (ctx.failed()) continue;
    r.date = *date;
    r.kind = *kind;
    if (!is_valid(r)) {
      ctx.reject("fields inconsistent with kind");
      continue;
    }
    out.records.push_back(std::move(r));
  }
  return out;
}

inline void write_fire_csv(std::ostream& os, const std::vector<FireEvent>& events) {
  csv::write_row(os, {"event_id", "start_date", "end_date", "size_acres", "lat", "lon", "state_fips", "county_fips"});
  for (const auto& e : events) {
    csv::write_row(os, {e.event_id, e.start_date.iso(), e.end_date ? e.end_date->iso() : std::string(),
                        csv::format_double(e.size_acres), csv::format_double(e.location.lat()),
                        csv::format_double(e.location.lon()), e.reported_state.value_or(""),
                        e.reported_county.value_or("")});
  }
}

inline void write_stations_csv(std::ostream& os, const std::vector<geo::Station>& stations) {
  csv::write_row(os, {"station_id", "kind", "lat", "lon"});
  for (const auto& s : stations) {
    csv::write_row(os, {s.id, std::string(geo::to_string(s.kind)), csv::format_double(s.location.lat()),
                        csv::format_double(s.location.lon())});
  }
}

inline void write_reject_report(std::ostream& os, const std::vector<Reject>& rejects) {
  csv::write_row(os, {"file", "row", "reason"});
  for (const auto& r : rejects) csv::write_row(os, {r.file, std::to_string(r.row), r.reason});
}

}  // namespace wildfire::ingest
