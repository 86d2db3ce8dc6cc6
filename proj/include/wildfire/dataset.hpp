#pragma once

#include <algorithm>
#include <array>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "wildfire/core/csv.hpp"
#include "wildfire/core/date.hpp"
#include "wildfire/core/error.hpp"
#include "wildfire/geo.hpp"
#include "wildfire/ingest.hpp"

namespace wildfire::dataset {

using ingest::DailyEnvRecord;
using ingest::FireEvent;

inline std::vector<DailyEnvRecord> select_live_fuel(std::vector<DailyEnvRecord> records) {
  std::erase_if(records, [](const DailyEnvRecord& r) {
    return r.kind != geo::StationKind::FUEL || r.fuel_class != ingest::FuelClass::LIVE;
  });
  return records;
}

struct FuelSeries {
  std::string station_id;
  DateRange range;
  std::vector<double> fmc;  // one value per day of range

  double at(Date d) const { return fmc.at(static_cast<std::size_t>(d - range.first)); }
};

// Step-function fill of one station's live FMC over `range`: each day takes the
// most recent record on or before it; days before the first record take the
// first record's value. Records outside the range still seed the fill. On a
// date with several records the last one in input order wins.
inline FuelSeries forward_fill_fuel(const std::vector<DailyEnvRecord>& station_records,
                                    const DateRange& range = kStudyRange) {
  std::map<Date, double> by_date;
  std::string station;
  for (const auto& r : station_records) {
    if (!r.fmc) continue;
    by_date[r.date] = *r.fmc;
    station = r.station_id;
  }
  if (by_date.empty()) {
    throw NoFuelRecords("no live fuel records for station '" +
                        (station_records.empty() ? std::string() : station_records.front().station_id) + "'");
  }

  FuelSeries out{station, range, {}};
  out.fmc.reserve(static_cast<std::size_t>(range.days()));
  auto next = by_date.upper_bound(range.first);  // first record strictly after the current day
  double current = by_date.begin()->second;
  if (next != by_date.begin()) current = std::prev(next)->second;
  for (Date d = range.first; d <= range.last; ++d) {
    while (next != by_date.end() && next->first <= d) {
      current = next->second;
      ++next;
    }
    out.fmc.push_back(current);
  }
  return out;
}

// Groups records by station and fills each one.
inline std::map<std::string, FuelSeries> forward_fill_all(const std::vector<DailyEnvRecord>& live_records,
                                                          const DateRange& range = kStudyRange) {
  std::map<std::string, std::vector<DailyEnvRecord>> by_station;
  for (const auto& r : live_records) by_station[r.station_id].push_back(r);
  std::map<std::string, FuelSeries> out;
  for (const auto& [id, recs] : by_station) out.emplace(id, forward_fill_fuel(recs, range));
  return out;
}

inline FireEvent impute_end_date(FireEvent event) {
  if (!event.end_date) event.end_date = event.start_date;
  return event;
}

struct LocatedFire {
  FireEvent event;
  std::string fips;
};

struct DailyFireAggregate {
  std::string fips;
  Date date;
  double fire_size_day_sum = 0.0;  // acres

  bool operator==(const DailyFireAggregate&) const = default;
};

// Spreads each event's acreage uniformly across its days and sums per
// (fips, date). Output is ordered by (fips, date).
inline std::vector<DailyFireAggregate> daily_fire_sum(const std::vector<LocatedFire>& fires) {
  std::map<std::pair<std::string, Date>, double> sums;
  for (const auto& f : fires) {
    const Date start = f.event.start_date;
    const Date end = f.event.end_date.value_or(start);
    const int days = end - start + 1;
    const double share = f.event.size_acres / days;
    for (Date d = start; d <= end; ++d) sums[{f.fips, d}] += share;
  }
  std::vector<DailyFireAggregate> out;
  out.reserve(sums.size());
  for (const auto& [key, acres] : sums) out.push_back({key.first, key.second, acres});
  return out;
}

struct JoinedDailyRecord {
  std::string fips;
  double longitude = 0.0;
  double latitude = 0.0;
  Date date;
  double wind = 0.0;
  double tmax = 0.0;
  double tmin = 0.0;
  double tavg = 0.0;
  double fmc = 0.0;
  double prcp = 0.0;
  double fire_size_day_sum = 0.0;

  bool operator==(const JoinedDailyRecord&) const = default;
};

inline const std::string kJoinedHeader =
    "fips,longitude,latitude,date,wind,tmax,tmin,tavg,fmc,prcp,fire_size_day_sum";

struct JoinStats {
  std::size_t rows = 0;
  std::size_t dropped_missing_tp = 0;
  std::size_t dropped_missing_wind = 0;
  std::size_t dropped_missing_fuel = 0;
  double fire_acres_joined = 0.0;
  double fire_acres_unjoined = 0.0;  // fire days with no surviving row

  std::size_t dropped() const { return dropped_missing_tp + dropped_missing_wind + dropped_missing_fuel; }
};

struct JoinResult {
  std::vector<JoinedDailyRecord> rows;
  JoinStats stats;
};

namespace detail {

// Per-station day-indexed lookup over a range. Later duplicates win.
class StationDays {
 public:
  StationDays(const std::vector<DailyEnvRecord>& records, const DateRange& range) : range_(range) {
    for (const auto& r : records) {
      if (!range.contains(r.date)) continue;
      auto& days = index_[r.station_id];
      if (days.empty()) days.assign(static_cast<std::size_t>(range.days()), nullptr);
      days[static_cast<std::size_t>(r.date - range.first)] = &r;
    }
  }

  const DailyEnvRecord* find(const std::string& station, Date d) const {
    const auto it = index_.find(station);
    if (it == index_.end() || !range_.contains(d)) return nullptr;
    return it->second[static_cast<std::size_t>(d - range_.first)];
  }

 private:
  DateRange range_;
  std::unordered_map<std::string, std::vector<const DailyEnvRecord*>> index_;
};

}  // namespace detail

// One row per (unit, day in range) whose assigned TP, wind and fuel stations
// all supply values; everything else is dropped and counted. Rows are ordered
// by (fips, date).
inline JoinResult build_joined_table(const std::vector<geo::SiteAssignment>& assignments,
                                     const std::vector<DailyEnvRecord>& tp_records,
                                     const std::vector<DailyEnvRecord>& wind_records,
                                     const std::map<std::string, FuelSeries>& fuel_series,
                                     const std::vector<DailyFireAggregate>& fire_aggregates,
                                     const std::vector<geo::FipsUnit>& units, const DateRange& range) {
  const detail::StationDays tp(tp_records, range);
  const detail::StationDays wind(wind_records, range);

  std::map<std::pair<std::string, Date>, double> fire;
  for (const auto& a : fire_aggregates) fire[{a.fips, a.date}] += a.fire_size_day_sum;

  std::map<std::string, const geo::SiteAssignment*> by_fips;
  for (const auto& a : assignments) by_fips[a.fips_code] = &a;

  std::vector<const geo::FipsUnit*> ordered;
  for (const auto& u : units) ordered.push_back(&u);
  std::sort(ordered.begin(), ordered.end(), [](auto* a, auto* b) { return a->code() < b->code(); });

  JoinResult out;
  for (const auto* unit : ordered) {
    const auto it = by_fips.find(unit->code());
    const geo::SiteAssignment* assignment = it == by_fips.end() ? nullptr : it->second;
    const auto* tp_site = assignment ? assignment->site(geo::StationKind::TP) : nullptr;
    const auto* wind_site = assignment ? assignment->site(geo::StationKind::WIND) : nullptr;
    const auto* fuel_site = assignment ? assignment->site(geo::StationKind::FUEL) : nullptr;
    const FuelSeries* series = nullptr;
    if (fuel_site) {
      const auto s = fuel_series.find(fuel_site->station_id);
      if (s != fuel_series.end()) series = &s->second;
    }

    for (Date d = range.first; d <= range.last; ++d) {
      const DailyEnvRecord* t = tp_site ? tp.find(tp_site->station_id, d) : nullptr;
      const DailyEnvRecord* w = wind_site ? wind.find(wind_site->station_id, d) : nullptr;
      const bool fuel_ok = series && series->range.contains(d);
      if (!t || !t->tmax || !t->tmin || !t->tavg || !t->prcp) {
        ++out.stats.dropped_missing_tp;
        continue;
      }
      if (!w || !w->wind_speed) {
        ++out.stats.dropped_missing_wind;
        continue;
      }
      if (!fuel_ok) {
        ++out.stats.dropped_missing_fuel;
        continue;
      }
      JoinedDailyRecord row;
      row.fips = unit->code();
      row.longitude = unit->centroid().lon();
      row.latitude = unit->centroid().lat();
      row.date = d;
      row.wind = *w->wind_speed;
      row.tmax = *t->tmax;
      row.tmin = *t->tmin;
      row.tavg = *t->tavg;
      row.fmc = series->at(d);
      row.prcp = *t->prcp;
      const auto f = fire.find({unit->code(), d});
      if (f != fire.end()) {
        row.fire_size_day_sum = f->second;
        out.stats.fire_acres_joined += f->second;
        fire.erase(f);
      }
      out.rows.push_back(std::move(row));
    }
  }
  for (const auto& [key, acres] : fire) out.stats.fire_acres_unjoined += acres;
  out.stats.rows = out.rows.size();
  return out;
}

inline constexpr std::size_t kNumFeatures = 9;
inline const std::array<std::string, kNumFeatures> kFeatureNames = {
    "wind_avg", "tmax_avg", "tmin_avg", "tavg_avg", "fmc_avg", "prcp_avg", "month", "longitude", "latitude"};

// Mean environmental features over a window plus the summed burned area.
struct WindowSample {
  std::string fips;
  Date window_end_date;
  std::array<double, kNumFeatures> x{};
  double y = 0.0;

  bool operator==(const WindowSample&) const = default;
};

// Per fips: windows of `w` consecutive days starting at the earliest date and
// advancing by `stride`. A window is emitted only when all `w` days are present.
inline std::vector<WindowSample> window_aggregate(const std::vector<JoinedDailyRecord>& table, int w = 21,
                                                  int stride = 21) {
  if (w < 1 || stride < 1) throw InputError("InvalidInput", "window and stride must be >= 1");
  std::vector<WindowSample> out;
  std::size_t begin = 0;
  while (begin < table.size()) {
    std::size_t end = begin;
    while (end < table.size() && table[end].fips == table[begin].fips) ++end;

    const Date first = table[begin].date;
    const Date last = table[end - 1].date;
    std::vector<int> at(static_cast<std::size_t>(last - first + 1), -1);
    for (std::size_t i = begin; i < end; ++i) {
      const int off = table[i].date - first;
      if (off < 0 || static_cast<std::size_t>(off) >= at.size())
        throw InputError("InvalidInput", "joined table is not sorted by (fips, date)");
      at[static_cast<std::size_t>(off)] = static_cast<int>(i);
    }

    for (int start = 0; start + w <= static_cast<int>(at.size()); start += stride) {
      bool complete = true;
      for (int k = 0; k < w && complete; ++k) complete = at[static_cast<std::size_t>(start + k)] >= 0;
      if (!complete) continue;

      WindowSample s;
      s.fips = table[begin].fips;
      s.window_end_date = first + (start + w - 1);
      double sums[6] = {0, 0, 0, 0, 0, 0};
      for (int k = 0; k < w; ++k) {
        const auto& r = table[static_cast<std::size_t>(at[static_cast<std::size_t>(start + k)])];
        sums[0] += r.wind;
        sums[1] += r.tmax;
        sums[2] += r.tmin;
        sums[3] += r.tavg;
        sums[4] += r.fmc;
        sums[5] += r.prcp;
        s.y += r.fire_size_day_sum;
      }
      for (int j = 0; j < 6; ++j) s.x[static_cast<std::size_t>(j)] = sums[j] / w;
      const auto& last_row = table[static_cast<std::size_t>(at[static_cast<std::size_t>(start + w - 1)])];
      s.x[6] = static_cast<double>(s.window_end_date.month());
      s.x[7] = last_row.longitude;
      s.x[8] = last_row.latitude;
      out.push_back(std::move(s));
    }
    begin = end;
  }
  return out;
}

inline void write_joined_csv(std::ostream& os, const std::vector<JoinedDailyRecord>& rows) {
  os << kJoinedHeader << '\n';
  using csv::format_double;
  for (const auto& r : rows) {
    os << r.fips << ',' << format_double(r.longitude) << ',' << format_double(r.latitude) << ','
       << r.date.iso() << ',' << format_double(r.wind) << ',' << format_double(r.tmax) << ','
       << format_double(r.tmin) << ',' << format_double(r.tavg) << ',' << format_double(r.fmc) << ','
       << format_double(r.prcp) << ',' << format_double(r.fire_size_day_sum) << '\n';
  }
}

inline std::vector<JoinedDailyRecord> read_joined_csv(std::istream& in, std::string_view file = "joined.csv") {
  csv::Reader reader(in);
  const auto header = reader.header();
  if (!header || ingest::detail::join(*header) != kJoinedHeader)
    throw MalformedHeader(std::string(file) + ": expected header " + kJoinedHeader);
  std::vector<JoinedDailyRecord> rows;
  while (const auto row = reader.next()) {
    const auto& f = *row;
    const auto fail = [&](const std::string& why) {
      throw InputError("MalformedRow", std::string(file) + " row " + std::to_string(reader.row()) + ": " + why);
    };
    if (f.size() != 11) fail("expected 11 fields");
    JoinedDailyRecord r;
    r.fips = f[0];
    if (!geo::is_fips_code(r.fips)) fail("invalid fips");
    const auto date = Date::parse(f[3]);
    if (!date) fail("invalid date");
    r.date = *date;
    double* targets[] = {&r.longitude, &r.latitude, &r.wind, &r.tmax, &r.tmin,
                         &r.tavg,      &r.fmc,      &r.prcp, &r.fire_size_day_sum};
    const int cols[] = {1, 2, 4, 5, 6, 7, 8, 9, 10};
    for (int i = 0; i < 9; ++i) {
      const auto v = csv::parse_double(f[static_cast<std::size_t>(cols[i])]);
      if (!v) fail("non-numeric field " + std::to_string(cols[i] + 1));
      *targets[i] = *v;
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

inline const std::string kWindowHeader =
    "fips,window_end_date,wind_avg,tmax_avg,tmin_avg,tavg_avg,fmc_avg,prcp_avg,month,longitude,latitude,y_sum";

inline void write_windows_csv(std::ostream& os, const std::vector<WindowSample>& samples) {
  os << kWindowHeader << '\n';
  for (const auto& s : samples) {
    os << s.fips << ',' << s.window_end_date.iso();
    for (const double v : s.x) os << ',' << csv::format_double(v);
    os << ',' << csv::format_double(s.y) << '\n';
  }
}

}  // namespace wildfire::dataset
