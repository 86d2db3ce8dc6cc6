#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "wildfire/core/csv.hpp"
#include "wildfire/core/date.hpp"
#include "wildfire/core/random.hpp"
#include "wildfire/geo.hpp"
#include "wildfire/ingest.hpp"

// Synthetic raw corpus with a known generating process, used to exercise the
// whole pipeline end to end.
namespace wildfire::synth {

struct SynthConfig {
  std::uint64_t seed = 42;
  int n_units = 200;
  int n_days = 1095;
  // Scales every stochastic weather component. 0 gives a deterministic climate.
  double noise = 1.0;
  // Multiplies the weather terms of the ignition logit and of the size model.
  // 0 makes fire occurrence independent of weather.
  double ignition_weight = 1.0;
  double base_ignition_logit = -3.2;
  Date start = *Date::parse("1992-01-01");
  double cell_deg = 0.5;
  double origin_lat = 34.0;
  double origin_lon = -122.0;
  double tp_missing_rate = 0.01;
  int n_cities = 5;
};

struct TpRawRow {
  std::string station;
  Date date;
  std::optional<long> tmax, tmin, tavg, prcp;  // tenths
};

struct WindRawRow {
  std::string station;
  Date date;
  double u = 0.0, v = 0.0;
};

struct FuelRawRow {
  std::string station;
  Date date;
  bool live = true;
  double fmc = 0.0;
};

struct DailyWeather {
  Date date;
  double tmax = 0, tmin = 0, tavg = 0, prcp = 0, wind = 0;
};

struct SynthCity {
  std::string name;
  geo::GeoPoint point;
  std::string fips;
  bool list_coordinates = true;  // false: locations file omits lat/lon, forcing geocoding
  std::vector<DailyWeather> window;  // anchor-14 .. anchor+6
};

struct SynthCorpus {
  SynthConfig config;
  std::vector<geo::FipsUnit> units;
  std::vector<geo::Station> stations;
  std::vector<TpRawRow> tp;
  std::vector<WindRawRow> wind;
  std::vector<FuelRawRow> fuel;
  std::vector<ingest::FireEvent> fires;
  std::vector<SynthCity> cities;
  Date anchor;  // first day after the corpus range
  nlohmann::json truth;

  DateRange range() const { return {config.start, config.start + (config.n_days - 1)}; }
};

namespace detail {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline double round_to(double v, double q) { return std::round(v / q) * q; }

inline std::string fips_for(int i) {
  const int state = 6 + i / 450;
  const int county = 2 * (i % 450) + 1;
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d%03d", state, county);
  return buf;
}

inline std::string numbered(const char* prefix, int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%04d", prefix, i);
  return buf;
}

// Annual cycle peaking mid-July.
inline double season(Date d) {
  const int doy = d - *Date::from_ymd(d.year(), 1, 1);
  return std::sin(2.0 * std::numbers::pi * (doy - 105) / 365.25);
}

// Live fuel moisture cycle: wettest in spring, driest in early autumn.
inline double fuel_cycle(Date d) {
  const int doy = d - *Date::from_ymd(d.year(), 1, 1);
  return std::cos(2.0 * std::numbers::pi * (doy - 80) / 365.25);
}

struct UnitClimate {
  double t_offset = 0.0;
  double regional = 0.0;  // AR(1) shared by a 3x3 block of cells
  double local = 0.0;     // AR(1) per cell
};

}  // namespace detail

inline const char* const kCityNames[] = {"Alder Springs", "Birch Flat", "Cedar Ridge", "Dry Creek",
                                         "Elk Grove",     "Fir Hollow", "Granite Bay", "Hidden Valley",
                                         "Iron Mountain", "Juniper Hills"};

inline SynthCorpus generate_synthetic_corpus(const SynthConfig& cfg) {
  using detail::round_to;
  SynthCorpus out;
  out.config = cfg;
  Rng rng(cfg.seed);
  const double noise = cfg.noise;
  const double weight = cfg.ignition_weight;
  const int cols = std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(cfg.n_units)))));
  const int total_days = cfg.n_days + 7;  // extra week feeds the realtime forecast fixtures

  // Geography: square cells on a regular lon/lat grid.
  for (int i = 0; i < cfg.n_units; ++i) {
    const double lat0 = cfg.origin_lat + (i / cols) * cfg.cell_deg;
    const double lon0 = cfg.origin_lon + (i % cols) * cfg.cell_deg;
    const double s = cfg.cell_deg;
    geo::Ring ring = {geo::GeoPoint(lat0, lon0), geo::GeoPoint(lat0, lon0 + s), geo::GeoPoint(lat0 + s, lon0 + s),
                      geo::GeoPoint(lat0 + s, lon0), geo::GeoPoint(lat0, lon0)};
    out.units.emplace_back(detail::fips_for(i), geo::GeoPoint(lat0 + s / 2, lon0 + s / 2),
                           std::vector<geo::Ring>{ring});
  }
  const auto cell_of = [&](const geo::GeoPoint& p) {
    int c = static_cast<int>(std::floor((p.lon() - cfg.origin_lon) / cfg.cell_deg));
    int r = static_cast<int>(std::floor((p.lat() - cfg.origin_lat) / cfg.cell_deg));
    c = std::clamp(c, 0, cols - 1);
    const int i = std::clamp(r * cols + c, 0, cfg.n_units - 1);
    return i;
  };
  const auto jitter = [&](const geo::GeoPoint& p, double amount) {
    return geo::GeoPoint(p.lat() + rng.uniform(-amount, amount), p.lon() + rng.uniform(-amount, amount));
  };

  // Climate state per unit, advanced day by day.
  std::vector<detail::UnitClimate> climate(static_cast<std::size_t>(cfg.n_units));
  const int block_cols = (cols + 2) / 3;
  const int n_blocks = block_cols * ((cfg.n_units / cols) / 3 + 1);
  std::vector<double> regional(static_cast<std::size_t>(n_blocks), 0.0);
  for (int i = 0; i < cfg.n_units; ++i) {
    const double lat = out.units[static_cast<std::size_t>(i)].centroid().lat();
    climate[static_cast<std::size_t>(i)].t_offset = -0.9 * (lat - 37.5) + noise * rng.normal(0.0, 1.5);
  }
  const auto block_of = [&](int i) { return ((i / cols) / 3) * block_cols + (i % cols) / 3; };

  // weather[unit][day]
  std::vector<std::vector<DailyWeather>> weather(static_cast<std::size_t>(cfg.n_units),
                                                 std::vector<DailyWeather>(static_cast<std::size_t>(total_days)));
  std::vector<std::vector<double>> true_fmc(static_cast<std::size_t>(cfg.n_units),
                                            std::vector<double>(static_cast<std::size_t>(total_days)));
  for (int t = 0; t < total_days; ++t) {
    const Date d = cfg.start + t;
    const double s = detail::season(d);
    const double fc = detail::fuel_cycle(d);
    for (auto& r : regional) r = 0.97 * r + noise * rng.normal(0.0, 0.25);
    // Wind is shared by 2x2 groups of cells.
    const double wind_base = 3.5 + 1.0 * s;
    for (int i = 0; i < cfg.n_units; ++i) {
      auto& c = climate[static_cast<std::size_t>(i)];
      c.local = 0.9 * c.local + noise * rng.normal(0.0, 0.3);
      const double anomaly = regional[static_cast<std::size_t>(block_of(i))] + 0.5 * c.local;

      DailyWeather w;
      w.date = d;
      w.tmax = 24.0 + c.t_offset + 10.0 * s + 3.0 * anomaly + noise * rng.normal(0.0, 2.5);
      const double diurnal = std::max(2.0, 12.0 + 3.0 * s + noise * rng.normal(0.0, 1.5));
      w.tmin = w.tmax - diurnal;
      w.tavg = (w.tmax + w.tmin) / 2.0 + noise * rng.normal(0.0, 0.5);
      const double p_rain = std::clamp(0.22 - 0.15 * s - 0.05 * anomaly, 0.02, 0.6);
      const double expected = p_rain * 7.0;
      const double mix = std::min(noise, 1.0);
      double sporadic = 0.0;
      if (rng.uniform() < p_rain) sporadic = -7.0 * std::log(1.0 - rng.uniform());
      w.prcp = (1.0 - mix) * expected + mix * sporadic;
      w.wind = std::max(0.0, wind_base + noise * std::abs(rng.normal(0.0, 1.5)));
      weather[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)] = w;
      true_fmc[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)] =
          std::max(40.0, 110.0 + 45.0 * fc - 12.0 * anomaly + noise * rng.normal(0.0, 4.0));
    }
  }

  // Stations.
  for (int i = 0; i < cfg.n_units; ++i) {
    const auto& u = out.units[static_cast<std::size_t>(i)];
    out.stations.push_back({detail::numbered("TP", i), geo::StationKind::TP, jitter(u.centroid(), 0.05), 1.0});
  }
  const int n_sparse = std::max(1, cfg.n_units / 10);
  std::vector<int> sparse_cell;
  for (int k = 0; k < n_sparse; ++k) {
    const auto& u = out.units[static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(cfg.n_units)))];
    const auto p = jitter(u.centroid(), 0.2);
    out.stations.push_back({detail::numbered("TPX", k), geo::StationKind::TP, p, 0.4});
    sparse_cell.push_back(cell_of(p));
  }
  std::vector<std::vector<int>> wind_members;
  for (int i = 0; i < cfg.n_units; ++i) {
    const int r = i / cols, c = i % cols;
    if (r % 2 != 0 || c % 2 != 0) continue;
    const double lat = cfg.origin_lat + (r + 1) * cfg.cell_deg;
    const double lon = cfg.origin_lon + (c + 1) * cfg.cell_deg;
    out.stations.push_back({detail::numbered("W", static_cast<int>(wind_members.size())), geo::StationKind::WIND,
                            geo::GeoPoint(lat, lon), 1.0});
    wind_members.push_back({i});
  }
  std::vector<int> fuel_cell;
  for (int i = 0; i < cfg.n_units; i += 2) {
    const auto& u = out.units[static_cast<std::size_t>(i)];
    const auto p = jitter(u.centroid(), 0.1);
    out.stations.push_back({detail::numbered("F", i), geo::StationKind::FUEL, p, 1.0});
    fuel_cell.push_back(cell_of(p));
  }

  // Station observations.
  for (int i = 0; i < cfg.n_units; ++i) {
    const std::string id = detail::numbered("TP", i);
    for (int t = 0; t < cfg.n_days; ++t) {
      if (noise > 0.0 && rng.uniform() < cfg.tp_missing_rate) continue;
      const auto& w = weather[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)];
      TpRawRow row{id, w.date, std::lround(w.tmax * 10), std::lround(w.tmin * 10), std::nullopt,
                   std::lround(w.prcp * 10)};
      if (rng.uniform() < 0.7) row.tavg = std::lround(w.tavg * 10);
      out.tp.push_back(std::move(row));
    }
  }
  for (int k = 0; k < n_sparse; ++k) {
    const std::string id = detail::numbered("TPX", k);
    const auto& series = weather[static_cast<std::size_t>(sparse_cell[static_cast<std::size_t>(k)])];
    for (int t = 0; t < cfg.n_days; ++t) {
      if (rng.uniform() >= 0.4) continue;
      const auto& w = series[static_cast<std::size_t>(t)];
      out.tp.push_back({id, w.date, std::lround(w.tmax * 10), std::lround(w.tmin * 10), std::lround(w.tavg * 10),
                        std::lround(w.prcp * 10)});
    }
  }
  for (std::size_t k = 0; k < wind_members.size(); ++k) {
    const std::string id = detail::numbered("W", static_cast<int>(k));
    const auto& series = weather[static_cast<std::size_t>(wind_members[k].front())];
    for (int t = 0; t < cfg.n_days; ++t) {
      const double speed = series[static_cast<std::size_t>(t)].wind;
      const double theta = noise > 0.0 ? rng.uniform(0.0, 2.0 * std::numbers::pi) : std::numbers::pi / 4;
      out.wind.push_back({id, cfg.start + t, round_to(speed * std::cos(theta), 0.01),
                          round_to(speed * std::sin(theta), 0.01)});
    }
  }
  for (std::size_t k = 0; k < fuel_cell.size(); ++k) {
    const std::string id = detail::numbered("F", static_cast<int>(2 * k));
    const auto& series = true_fmc[static_cast<std::size_t>(fuel_cell[k])];
    for (int t = static_cast<int>(rng.below(21)); t < cfg.n_days; t += 14 + static_cast<int>(rng.below(27))) {
      const double v = std::max(30.0, series[static_cast<std::size_t>(t)] + noise * rng.normal(0.0, 3.0));
      out.fuel.push_back({id, cfg.start + t, true, round_to(v, 0.1)});
      if (rng.uniform() < 0.28) out.fuel.push_back({id, cfg.start + t, false, round_to(rng.uniform(5.0, 25.0), 0.1)});
    }
  }

  // Fires: daily ignition per unit from a logistic model of the unit's weather.
  int event_no = 0;
  for (int i = 0; i < cfg.n_units; ++i) {
    const auto& u = out.units[static_cast<std::size_t>(i)];
    const auto& ring = u.boundary().front();
    const double lat0 = ring[0].lat(), lon0 = ring[0].lon();
    for (int t = 0; t < cfg.n_days; ++t) {
      const auto& w = weather[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)];
      const double fmc = true_fmc[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)];
      const double z = 0.9 * (w.tmax - 24.0) / 8.0 - 0.8 * (fmc - 110.0) / 35.0 - 0.4 * (w.prcp > 1.0 ? 1.0 : 0.0) +
                       0.2 * (w.wind - 3.5) / 1.5;
      const double p = detail::sigmoid(cfg.base_ignition_logit + weight * z);
      if (rng.uniform() >= p) continue;
      const double size = std::max(0.01, round_to(std::exp(rng.normal(1.0 + 0.6 * weight * z, 1.1)), 0.01));
      int days = 1;
      if (rng.uniform() < 0.1) days = 2 + static_cast<int>(rng.below(8));
      ingest::FireEvent e;
      e.event_id = detail::numbered("E", event_no++);
      e.start_date = w.date;
      const bool drop_end = days == 1 && rng.uniform() < 0.5;
      if (!drop_end) e.end_date = w.date + (days - 1);
      e.size_acres = size;
      const double m = 0.02 * cfg.cell_deg;
      e.location = geo::GeoPoint(round_to(rng.uniform(lat0 + m, lat0 + cfg.cell_deg - m), 1e-5),
                                 round_to(rng.uniform(lon0 + m, lon0 + cfg.cell_deg - m), 1e-5));
      if (rng.uniform() < 1.0 / 3.0) {
        e.reported_state = u.state_code();
        e.reported_county = u.county_code();
      }
      out.fires.push_back(std::move(e));
    }
  }

  // Realtime fixtures: a handful of cities with the 21 days around the anchor.
  out.anchor = cfg.start + cfg.n_days;
  const int n_cities = std::min<int>({cfg.n_cities, cfg.n_units, static_cast<int>(std::size(kCityNames))});
  for (int k = 0; k < n_cities; ++k) {
    const int i = static_cast<int>((static_cast<long>(k) * cfg.n_units) / std::max(1, n_cities));
    const auto& u = out.units[static_cast<std::size_t>(i)];
    SynthCity city{kCityNames[k], geo::GeoPoint(round_to(u.centroid().lat() + 0.05, 1e-4),
                                                round_to(u.centroid().lon() - 0.05, 1e-4)),
                   u.code(), k % 2 == 0, {}};
    for (int t = cfg.n_days - 14; t < cfg.n_days + 7; ++t) {
      if (t < 0) continue;
      auto w = weather[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)];
      w.tmax = round_to(w.tmax, 0.1);
      w.tmin = round_to(w.tmin, 0.1);
      w.tavg = round_to(w.tavg, 0.1);
      w.prcp = round_to(w.prcp, 0.1);
      w.wind = round_to(w.wind, 0.1);
      city.window.push_back(w);
    }
    out.cities.push_back(std::move(city));
  }

  out.truth = {{"seed", cfg.seed},
               {"n_units", cfg.n_units},
               {"n_days", cfg.n_days},
               {"start", cfg.start.iso()},
               {"noise", cfg.noise},
               {"ignition_weight", cfg.ignition_weight},
               {"base_ignition_logit", cfg.base_ignition_logit},
               {"ignition_logit",
                "base + weight * (0.9*(tmax-24)/8 - 0.8*(fmc-110)/35 - 0.4*[prcp>1mm] + 0.2*(wind-3.5)/1.5)"},
               {"size_model", "lognormal(mu = 1.0 + 0.6*weight*z, sigma = 1.1) acres"},
               {"duration", "1 day w.p. 0.9, else uniform 2..9 days"},
               {"n_events", out.fires.size()}};
  return out;
}

// Raw-file writers matching the ingest schemas.

inline void write_tp_raw(std::ostream& os, const std::vector<TpRawRow>& rows) {
  os << "station_id,date,tmax_tenths_c,tmin_tenths_c,tavg_tenths_c,prcp_tenths_mm\n";
  const auto f = [](const std::optional<long>& v) { return v ? std::to_string(*v) : std::string(); };
  for (const auto& r : rows)
    os << r.station << ',' << r.date.iso() << ',' << f(r.tmax) << ',' << f(r.tmin) << ',' << f(r.tavg) << ','
       << f(r.prcp) << '\n';
}

inline void write_wind_raw(std::ostream& os, const std::vector<WindRawRow>& rows) {
  os << "station_id,date,u_ms,v_ms\n";
  for (const auto& r : rows)
    os << r.station << ',' << r.date.iso() << ',' << csv::format_double(r.u) << ',' << csv::format_double(r.v)
       << '\n';
}

inline void write_fuel_raw(std::ostream& os, const std::vector<FuelRawRow>& rows) {
  os << "station_id,date,fuel_class,fmc_percent\n";
  for (const auto& r : rows)
    os << r.station << ',' << r.date.iso() << ',' << (r.live ? "live" : "dead") << ',' << csv::format_double(r.fmc)
       << '\n';
}

}  // namespace wildfire::synth
