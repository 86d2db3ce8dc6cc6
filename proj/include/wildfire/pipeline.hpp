#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "wildfire/dataset.hpp"
#include "wildfire/geo.hpp"
#include "wildfire/ingest.hpp"
#include "wildfire/synth.hpp"

// Chains the processing steps from canonical records to the joined daily table.
namespace wildfire::pipeline {

struct CanonicalInputs {
  std::vector<geo::Station> stations;
  std::vector<ingest::DailyEnvRecord> tp;
  std::vector<ingest::DailyEnvRecord> wind;
  std::vector<ingest::DailyEnvRecord> fuel;
  std::vector<ingest::FireEvent> fires;
};

struct BuildOptions {
  std::optional<DateRange> range;  // default: span of the TP and wind records
  double coverage_threshold = 0.5;
};

struct BuildStats {
  DateRange range;
  std::size_t temperature_records_dropped = 0;
  std::size_t tp_stations = 0;
  std::size_t tp_stations_kept = 0;
  double tp_mean_coverage = 0.0;
  std::size_t fuel_records = 0;
  std::size_t fuel_dead_records = 0;
  std::map<geo::StationKind, double> mean_distance_km;
  std::size_t fire_events = 0;
  std::size_t fire_end_dates_imputed = 0;
  std::size_t fire_locate_fallbacks = 0;
  std::size_t fire_fips_conflicts = 0;
  std::size_t fire_invalid_reported = 0;
  double fire_event_acres = 0.0;
  dataset::JoinStats join;
};

struct BuildResult {
  dataset::JoinResult joined;
  BuildStats stats;
  std::vector<geo::SiteAssignment> assignments;
};

inline std::optional<DateRange> observed_range(const CanonicalInputs& in) {
  std::optional<Date> lo, hi;
  for (const auto* recs : {&in.tp, &in.wind}) {
    for (const auto& r : *recs) {
      if (!lo || r.date < *lo) lo = r.date;
      if (!hi || r.date > *hi) hi = r.date;
    }
  }
  if (!lo) return std::nullopt;
  return DateRange{*lo, *hi};
}

inline BuildResult build_dataset(CanonicalInputs in, const std::vector<geo::FipsUnit>& units,
                                 const BuildOptions& options = {}) {
  using geo::StationKind;
  BuildResult out;
  auto& stats = out.stats;

  const auto range = options.range ? options.range : observed_range(in);
  if (!range) throw InputError("InvalidInput", "no TP or wind records to derive a date range from");
  stats.range = *range;

  auto cleaned = ingest::clean_temperature(std::move(in.tp));
  stats.temperature_records_dropped = cleaned.rejected_count;

  std::vector<geo::Station> tp_stations, candidates;
  for (const auto& s : in.stations)
    if (s.kind == StationKind::TP) tp_stations.push_back(s);
  const auto coverage = ingest::filter_coverage(tp_stations, cleaned.kept, *range, options.coverage_threshold);
  const std::set<std::string> tp_kept(coverage.kept.begin(), coverage.kept.end());
  stats.tp_stations = tp_stations.size();
  stats.tp_stations_kept = tp_kept.size();
  for (const auto& [id, c] : coverage.coverage) stats.tp_mean_coverage += c;
  if (!coverage.coverage.empty()) stats.tp_mean_coverage /= static_cast<double>(coverage.coverage.size());

  stats.fuel_records = in.fuel.size();
  const auto live = dataset::select_live_fuel(in.fuel);
  stats.fuel_dead_records = in.fuel.size() - live.size();
  std::set<std::string> fuel_with_live, wind_with_records;
  for (const auto& r : live) fuel_with_live.insert(r.station_id);
  for (const auto& r : in.wind) wind_with_records.insert(r.station_id);

  for (auto s : in.stations) {
    const bool usable = (s.kind == StationKind::TP && tp_kept.count(s.id)) ||
                        (s.kind == StationKind::WIND && wind_with_records.count(s.id)) ||
                        (s.kind == StationKind::FUEL && fuel_with_live.count(s.id));
    if (!usable) continue;
    if (s.kind == StationKind::TP) s.coverage = coverage.coverage.at(s.id);
    candidates.push_back(std::move(s));
  }
  out.assignments =
      geo::assign_stations(units, candidates, {StationKind::TP, StationKind::WIND, StationKind::FUEL});
  for (const auto k : {StationKind::TP, StationKind::WIND, StationKind::FUEL}) {
    double sum = 0.0;
    for (const auto& a : out.assignments) sum += a.site(k)->distance_km;
    stats.mean_distance_km[k] = out.assignments.empty() ? 0.0 : sum / static_cast<double>(out.assignments.size());
  }

  std::set<std::string> needed_fuel;
  for (const auto& a : out.assignments) needed_fuel.insert(a.site(StationKind::FUEL)->station_id);
  std::vector<ingest::DailyEnvRecord> needed_live;
  for (const auto& r : live)
    if (needed_fuel.count(r.station_id)) needed_live.push_back(r);
  const auto series = dataset::forward_fill_all(needed_live, *range);

  std::vector<dataset::LocatedFire> located;
  located.reserve(in.fires.size());
  for (auto& e : in.fires) {
    ++stats.fire_events;
    stats.fire_event_acres += e.size_acres;
    if (!e.end_date) ++stats.fire_end_dates_imputed;
    auto fire = dataset::impute_end_date(std::move(e));
    const auto loc = geo::locate_fips(fire.location, units);
    if (loc.fallback) ++stats.fire_locate_fallbacks;
    std::string code = loc.code;
    try {
      const auto rec = geo::reconcile_fips(loc.code, fire.reported_state, fire.reported_county);
      if (rec.conflict) ++stats.fire_fips_conflicts;
      code = rec.code;
    } catch (const InvalidReportedCode&) {
      ++stats.fire_invalid_reported;
    }
    located.push_back({std::move(fire), std::move(code)});
  }
  const auto aggregates = dataset::daily_fire_sum(located);

  out.joined = dataset::build_joined_table(out.assignments, cleaned.kept, in.wind, series, aggregates, units, *range);
  stats.join = out.joined.stats;
  return out;
}

// Runs a synthetic corpus through the raw-file parsers, as cmd_ingest would.
inline CanonicalInputs ingest_corpus(const synth::SynthCorpus& corpus) {
  CanonicalInputs in;
  in.stations = corpus.stations;
  std::stringstream tp, wind, fuel, fires;
  synth::write_tp_raw(tp, corpus.tp);
  synth::write_wind_raw(wind, corpus.wind);
  synth::write_fuel_raw(fuel, corpus.fuel);
  ingest::write_fire_csv(fires, corpus.fires);
  in.tp = ingest::parse_tp_csv(tp).records;
  in.wind = ingest::parse_wind_csv(wind).records;
  in.fuel = ingest::parse_fuel_csv(fuel).records;
  in.fires = ingest::parse_fire_csv(fires).records;
  return in;
}

inline nlohmann::json to_json(const BuildStats& s) {
  nlohmann::json distances;
  for (const auto& [k, v] : s.mean_distance_km) distances[std::string(geo::to_string(k))] = v;
  return {{"range", {{"first", s.range.first.iso()}, {"last", s.range.last.iso()}, {"days", s.range.days()}}},
          {"rows", s.join.rows},
          {"drops",
           {{"missing_tp", s.join.dropped_missing_tp},
            {"missing_wind", s.join.dropped_missing_wind},
            {"missing_fuel", s.join.dropped_missing_fuel},
            {"total", s.join.dropped()}}},
          {"temperature_records_dropped", s.temperature_records_dropped},
          {"coverage",
           {{"tp_stations", s.tp_stations}, {"tp_stations_kept", s.tp_stations_kept}, {"tp_mean", s.tp_mean_coverage}}},
          {"fuel", {{"records", s.fuel_records}, {"dead_records", s.fuel_dead_records}}},
          {"mean_distance_km", distances},
          {"fires",
           {{"events", s.fire_events},
            {"end_dates_imputed", s.fire_end_dates_imputed},
            {"locate_fallbacks", s.fire_locate_fallbacks},
            {"fips_conflicts", s.fire_fips_conflicts},
            {"invalid_reported", s.fire_invalid_reported},
            {"event_acres", s.fire_event_acres},
            {"joined_acres", s.join.fire_acres_joined},
            {"unjoined_acres", s.join.fire_acres_unjoined}}}};
}

}  // namespace wildfire::pipeline
