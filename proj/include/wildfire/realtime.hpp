#pragma once

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "wildfire/core/csv.hpp"
#include "wildfire/core/date.hpp"
#include "wildfire/core/error.hpp"
#include "wildfire/core/parallel.hpp"
#include "wildfire/dataset.hpp"
#include "wildfire/geo.hpp"
#include "wildfire/ml/model.hpp"
#include "wildfire/ml/samples.hpp"
#include "wildfire/ml/size_class.hpp"

namespace wildfire::realtime {

inline constexpr int kHistoryDays = 14;
inline constexpr int kForecastDays = 7;
inline constexpr int kWindowDays = kHistoryDays + kForecastDays;
inline constexpr int kArtifactSchemaVersion = 1;

enum class ObservationKind { HISTORY, FORECAST };

inline constexpr std::string_view to_string(ObservationKind k) {
  return k == ObservationKind::HISTORY ? "history" : "forecast";
}

struct WeatherObservation {
  Date date;
  double tmax = 0.0, tmin = 0.0, tavg = 0.0;
  double prcp = 0.0;
  double wind_speed = 0.0;
  ObservationKind kind = ObservationKind::HISTORY;

  bool operator==(const WeatherObservation&) const = default;
};

inline bool within_bounds(const WeatherObservation& o) {
  const auto temp_ok = [](double t) { return std::isfinite(t) && t >= -90.0 && t <= 100.0; };
  return temp_ok(o.tmax) && temp_ok(o.tmin) && temp_ok(o.tavg) && std::isfinite(o.prcp) && o.prcp >= 0.0 &&
         std::isfinite(o.wind_speed) && o.wind_speed >= 0.0;
}

struct PredictionLocation {
  std::string city;
  geo::GeoPoint point;
  std::string fips;
  geo::GeoPoint centroid;  // of the county; feeds the lon/lat features
  double latest_fmc = 0.0;
};

struct PredictionRow {
  std::string fips;
  std::string city;
  double predicted_sum_acres = 0.0;
  char size_class = 'A';

  bool operator==(const PredictionRow&) const = default;
};

struct SkipRecord {
  std::string city;
  std::string code;
  std::string reason;

  bool operator==(const SkipRecord&) const = default;
};

struct PredictionArtifact {
  int schema_version = kArtifactSchemaVersion;
  std::string generated_at;
  std::string model_fingerprint;
  std::string anchor_date;
  std::vector<PredictionRow> rows;
  std::vector<SkipRecord> skipped;
};

// ---- providers -------------------------------------------------------------

struct GeocodeResult {
  geo::GeoPoint point;
  std::optional<std::string> fips;
};

class WeatherProvider {
 public:
  virtual ~WeatherProvider() = default;
  // Daily observations covering `range` (may be incomplete). Throws
  // ProviderUnavailable on transport failure.
  virtual std::vector<WeatherObservation> daily(const std::string& city, const geo::GeoPoint& point,
                                                DateRange range) = 0;
};

class GeocodeProvider {
 public:
  virtual ~GeocodeProvider() = default;
  virtual GeocodeResult lookup(const std::string& city) = 0;
};

inline std::string city_slug(std::string_view city) {
  std::string out;
  bool dash = false;
  for (const char c : city) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      if (dash && !out.empty()) out.push_back('-');
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
      dash = false;
    } else {
      dash = true;
    }
  }
  return out;
}

namespace detail {

inline nlohmann::json read_json_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ProviderUnavailable("no recorded response at " + p.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ProviderUnavailable("unreadable recorded response " + p.string() + ": " + e.what());
  }
}

inline void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("UnwritablePath", "cannot write " + path.string());
    out << text;
    out.flush();
    if (!out) throw InputError("UnwritablePath", "failed writing " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

inline double number_or_throw(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number()) throw ProviderUnavailable(std::string("field '") + key + "' is not a number");
  return v.get<double>();
}

}  // namespace detail

// Observation payload shared by the fixtures and the HTTP provider:
// {"city": ..., "observations": [{"date","tmax","tmin","tavg","prcp","wind_speed"}]}
inline std::vector<WeatherObservation> observations_from_json(const nlohmann::json& doc) {
  std::vector<WeatherObservation> out;
  try {
    for (const auto& o : doc.at("observations")) {
      const auto date = Date::parse(o.at("date").get<std::string>());
      if (!date) continue;
      WeatherObservation w;
      w.date = *date;
      w.tmax = detail::number_or_throw(o, "tmax");
      w.tmin = detail::number_or_throw(o, "tmin");
      w.tavg = o.contains("tavg") && o["tavg"].is_number() ? o["tavg"].get<double>() : (w.tmax + w.tmin) / 2.0;
      w.prcp = detail::number_or_throw(o, "prcp");
      w.wind_speed = detail::number_or_throw(o, "wind_speed");
      out.push_back(w);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ProviderUnavailable(std::string("malformed weather payload: ") + e.what());
  }
  return out;
}

inline nlohmann::json observations_to_json(const std::string& city, const std::vector<WeatherObservation>& obs) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& o : obs)
    arr.push_back({{"date", o.date.iso()},
                   {"tmax", o.tmax},
                   {"tmin", o.tmin},
                   {"tavg", o.tavg},
                   {"prcp", o.prcp},
                   {"wind_speed", o.wind_speed}});
  return {{"city", city}, {"observations", std::move(arr)}};
}

// Replays recorded responses from <dir>/weather/<city-slug>.json.
class FixtureWeatherProvider final : public WeatherProvider {
 public:
  explicit FixtureWeatherProvider(std::filesystem::path dir) : dir_(std::move(dir)) {}

  std::vector<WeatherObservation> daily(const std::string& city, const geo::GeoPoint&, DateRange range) override {
    auto all = observations_from_json(detail::read_json_file(dir_ / "weather" / (city_slug(city) + ".json")));
    std::erase_if(all, [&](const WeatherObservation& o) { return !range.contains(o.date); });
    return all;
  }

 private:
  std::filesystem::path dir_;
};

// Replays <dir>/geocode.json: {"cities": {"<name>": {"lat", "lon", "fips"?}}}.
class FixtureGeocodeProvider final : public GeocodeProvider {
 public:
  explicit FixtureGeocodeProvider(std::filesystem::path dir) : dir_(std::move(dir)) {}

  GeocodeResult lookup(const std::string& city) override {
    const auto doc = detail::read_json_file(dir_ / "geocode.json");
    try {
      const auto& cities = doc.at("cities");
      if (!cities.contains(city)) throw UnknownCity("no geocoding result for '" + city + "'");
      return parse_entry(cities.at(city));
    } catch (const nlohmann::json::exception& e) {
      throw ProviderUnavailable(std::string("malformed geocode fixture: ") + e.what());
    }
  }

  static GeocodeResult parse_entry(const nlohmann::json& e) {
    GeocodeResult r{geo::GeoPoint(e.at("lat").get<double>(), e.at("lon").get<double>()), std::nullopt};
    if (e.contains("fips") && e["fips"].is_string()) r.fips = e["fips"].get<std::string>();
    return r;
  }

 private:
  std::filesystem::path dir_;
};

// Wraps a provider and stores every response in the fixture layout, so a
// live run can be replayed later.
class RecordingWeatherProvider final : public WeatherProvider {
 public:
  RecordingWeatherProvider(WeatherProvider& inner, std::filesystem::path dir) : inner_(inner), dir_(std::move(dir)) {}

  std::vector<WeatherObservation> daily(const std::string& city, const geo::GeoPoint& point, DateRange range) override {
    auto obs = inner_.daily(city, point, range);
    const std::lock_guard lock(mutex_);
    detail::write_text_atomic(dir_ / "weather" / (city_slug(city) + ".json"),
                              observations_to_json(city, obs).dump(1) + "\n");
    return obs;
  }

 private:
  WeatherProvider& inner_;
  std::filesystem::path dir_;
  std::mutex mutex_;
};

// ---- window assembly -------------------------------------------------------

using Sleeper = std::function<void(std::chrono::milliseconds)>;

inline void real_sleep(std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds initial_delay{250};
};

inline DateRange window_range(Date anchor) { return {anchor - kHistoryDays, anchor + (kForecastDays - 1)}; }

// History is anchor-14..anchor-1, forecast is anchor..anchor+6.
inline std::vector<WeatherObservation> fetch_window(WeatherProvider& provider, const std::string& city,
                                                    const geo::GeoPoint& point, Date anchor,
                                                    const Sleeper& sleep = real_sleep, RetryPolicy retry = {}) {
  const DateRange range = window_range(anchor);
  std::vector<WeatherObservation> raw;
  auto delay = retry.initial_delay;
  for (int attempt = 1;; ++attempt) {
    try {
      raw = provider.daily(city, point, range);
      break;
    } catch (const ProviderUnavailable&) {
      if (attempt >= retry.attempts) throw;
      sleep(delay);
      delay *= 2;
    }
  }

  std::map<Date, WeatherObservation> by_date;
  for (const auto& o : raw)
    if (range.contains(o.date) && within_bounds(o)) by_date.emplace(o.date, o);

  std::vector<WeatherObservation> out;
  std::vector<std::string> missing;
  for (Date d = range.first; d <= range.last; ++d) {
    const auto it = by_date.find(d);
    if (it == by_date.end()) {
      missing.push_back(d.iso());
      continue;
    }
    auto o = it->second;
    o.kind = d < anchor ? ObservationKind::HISTORY : ObservationKind::FORECAST;
    out.push_back(o);
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ",") + m;
    throw IncompleteWindow(city + ": missing " + std::to_string(missing.size()) + " day(s): " + list);
  }
  return out;
}

// County comes from the provider when given, else from the boundary file.
inline std::pair<geo::GeoPoint, std::string> geocode(GeocodeProvider& provider, const std::string& city,
                                                     const std::vector<geo::FipsUnit>& units) {
  const auto r = provider.lookup(city);
  if (r.fips && geo::is_fips_code(*r.fips)) return {r.point, *r.fips};
  if (units.empty()) throw InputError("MissingInput", "no county boundaries to resolve '" + city + "'");
  return {r.point, geo::locate_fips(r.point, units).code};
}

// Same features, order and units as the training windows.
inline std::array<double, dataset::kNumFeatures> build_prediction_features(
    const std::vector<WeatherObservation>& obs, const PredictionLocation& location, Date anchor) {
  if (obs.size() != static_cast<std::size_t>(kWindowDays))
    throw IncompleteWindow(location.city + ": expected " + std::to_string(kWindowDays) + " observations, got " +
                           std::to_string(obs.size()));
  double wind = 0, tmax = 0, tmin = 0, tavg = 0, prcp = 0;
  for (const auto& o : obs) {
    wind += o.wind_speed;
    tmax += o.tmax;
    tmin += o.tmin;
    tavg += o.tavg;
    prcp += o.prcp;
  }
  const double n = kWindowDays;
  return {wind / n,
          tmax / n,
          tmin / n,
          tavg / n,
          location.latest_fmc,
          prcp / n,
          static_cast<double>(anchor.month()),
          location.centroid.lon(),
          location.centroid.lat()};
}

// ---- inputs ----------------------------------------------------------------

struct LocationSpec {
  std::string city;
  std::optional<geo::GeoPoint> point;
};

// CSV city,lat,lon; lat/lon may be empty when geocoding is available.
inline std::vector<LocationSpec> read_locations_csv(std::istream& in, std::string_view file = "locations.csv") {
  csv::Reader reader(in);
  const auto header = reader.header();
  if (!header || header->size() < 1 || (*header)[0] != "city")
    throw MalformedHeader(std::string(file) + ": expected header city,lat,lon");
  std::vector<LocationSpec> out;
  while (auto row = reader.next()) {
    const auto& f = *row;
    LocationSpec spec;
    spec.city = std::string(csv::trim(f[0]));
    if (spec.city.empty()) throw InputError("InvalidInput", std::string(file) + " row " + std::to_string(reader.row()) + ": empty city");
    const bool has_lat = f.size() > 1 && !csv::trim(f[1]).empty();
    const bool has_lon = f.size() > 2 && !csv::trim(f[2]).empty();
    if (has_lat != has_lon)
      throw InputError("InvalidInput", std::string(file) + " row " + std::to_string(reader.row()) + ": lat and lon must both be given");
    if (has_lat) {
      const auto lat = csv::parse_double(f[1]), lon = csv::parse_double(f[2]);
      if (!lat || !lon) throw InputError("InvalidInput", std::string(file) + " row " + std::to_string(reader.row()) + ": bad coordinates");
      spec.point = geo::GeoPoint(*lat, *lon);
    }
    out.push_back(std::move(spec));
  }
  return out;
}

inline void write_locations_csv(std::ostream& out, const std::vector<LocationSpec>& specs) {
  out << "city,lat,lon\n";
  for (const auto& s : specs) {
    csv::write_row(out, {s.city, s.point ? csv::format_double(s.point->lat()) : "",
                         s.point ? csv::format_double(s.point->lon()) : ""});
  }
}

// Most recent fuel value per county: the fmc column of its last joined row.
inline std::map<std::string, double> latest_fmc_by_fips(const std::vector<dataset::JoinedDailyRecord>& table) {
  std::map<std::string, std::pair<Date, double>> latest;
  for (const auto& r : table) {
    auto [it, inserted] = latest.try_emplace(r.fips, r.date, r.fmc);
    if (!inserted && r.date >= it->second.first) it->second = {r.date, r.fmc};
  }
  std::map<std::string, double> out;
  for (const auto& [fips, v] : latest) out[fips] = v.second;
  return out;
}

// ---- timestamps ------------------------------------------------------------

using Clock = std::function<std::chrono::system_clock::time_point()>;

inline std::string rfc3339(std::chrono::system_clock::time_point t) {
  const auto secs = std::chrono::floor<std::chrono::seconds>(t);
  const auto day = std::chrono::floor<std::chrono::days>(secs);
  const std::chrono::year_month_day ymd(day);
  const std::chrono::hh_mm_ss hms(secs - day);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

// Accepts YYYY-MM-DDTHH:MM:SSZ or a bare date (midnight UTC).
inline std::optional<std::chrono::system_clock::time_point> parse_rfc3339(std::string_view s) {
  const auto date = Date::parse(s.substr(0, std::min<std::size_t>(10, s.size())));
  if (!date) return std::nullopt;
  std::chrono::sys_seconds t{std::chrono::sys_days{std::chrono::days{date->serial()}}};
  if (s.size() == 10) return t;
  int hh = 0, mm = 0, ss = 0;
  char tail = 0;
  if (s.size() != 20 || (s[10] != 'T' && s[10] != 't') ||
      std::sscanf(std::string(s.substr(11)).c_str(), "%2d:%2d:%2d%c", &hh, &mm, &ss, &tail) != 4 ||
      (tail != 'Z' && tail != 'z') || hh > 23 || mm > 59 || ss > 60)
    return std::nullopt;
  return t + std::chrono::hours(hh) + std::chrono::minutes(mm) + std::chrono::seconds(ss);
}

inline Date utc_date(std::chrono::system_clock::time_point t) {
  return Date::from_serial(
      static_cast<int>(std::chrono::floor<std::chrono::days>(t).time_since_epoch().count()));
}

// ---- artifact --------------------------------------------------------------

inline nlohmann::json to_json(const PredictionArtifact& a) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : a.rows)
    rows.push_back({{"fips", r.fips},
                    {"city", r.city},
                    {"predicted_sum_acres", r.predicted_sum_acres},
                    {"class", std::string(1, r.size_class)}});
  nlohmann::json skipped = nlohmann::json::array();
  for (const auto& s : a.skipped) skipped.push_back({{"city", s.city}, {"code", s.code}, {"reason", s.reason}});
  return {{"schema_version", a.schema_version},
          {"generated_at", a.generated_at},
          {"model_fingerprint", a.model_fingerprint},
          {"anchor_date", a.anchor_date},
          {"rows", std::move(rows)},
          {"skipped", std::move(skipped)}};
}

inline PredictionArtifact artifact_from_json(const nlohmann::json& j) {
  try {
    PredictionArtifact a;
    a.schema_version = j.at("schema_version").get<int>();
    if (a.schema_version != kArtifactSchemaVersion)
      throw UnsupportedVersion("unsupported prediction artifact schema_version " + std::to_string(a.schema_version));
    a.generated_at = j.at("generated_at").get<std::string>();
    a.model_fingerprint = j.at("model_fingerprint").get<std::string>();
    a.anchor_date = j.value("anchor_date", "");
    for (const auto& r : j.at("rows")) {
      const auto cls = r.at("class").get<std::string>();
      if (cls.size() != 1) throw InputError("CorruptArtifact", "bad class letter '" + cls + "'");
      a.rows.push_back({r.at("fips").get<std::string>(), r.at("city").get<std::string>(),
                        r.at("predicted_sum_acres").get<double>(), cls[0]});
    }
    if (j.contains("skipped"))
      for (const auto& s : j.at("skipped"))
        a.skipped.push_back({s.at("city").get<std::string>(), s.value("code", ""), s.value("reason", "")});
    return a;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("CorruptArtifact", std::string("malformed prediction artifact: ") + e.what());
  }
}

inline PredictionArtifact load_artifact(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("MissingInput", "cannot read prediction artifact " + path.string());
  try {
    return artifact_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw InputError("CorruptArtifact", "malformed prediction artifact " + path.string() + ": " + e.what());
  }
}

// ---- daily job -------------------------------------------------------------

// Spaces provider calls at least `interval` apart across all workers.
class RateLimiter {
 public:
  explicit RateLimiter(std::chrono::milliseconds interval, Sleeper sleep = real_sleep)
      : interval_(interval), sleep_(std::move(sleep)) {}

  void acquire() {
    if (interval_.count() <= 0) return;
    std::chrono::milliseconds wait{0};
    {
      const std::lock_guard lock(mutex_);
      const auto now = std::chrono::steady_clock::now();
      if (next_ < now) next_ = now;
      wait = std::chrono::duration_cast<std::chrono::milliseconds>(next_ - now);
      next_ += interval_;
    }
    if (wait.count() > 0) sleep_(wait);
  }

 private:
  std::chrono::milliseconds interval_;
  Sleeper sleep_;
  std::mutex mutex_;
  std::chrono::steady_clock::time_point next_{};
};

struct JobOptions {
  std::size_t parallelism = 4;
  std::chrono::milliseconds min_request_interval{0};
  RetryPolicy retry;
  Sleeper sleep = real_sleep;
  Clock clock = [] { return std::chrono::system_clock::now(); };
  std::optional<Date> anchor;  // default: UTC date of clock()
};

struct JobInputs {
  std::vector<LocationSpec> locations;
  const ml::Model* model = nullptr;
  std::string model_fingerprint;
  WeatherProvider* weather = nullptr;
  GeocodeProvider* geocoder = nullptr;  // optional
  const std::vector<geo::FipsUnit>* units = nullptr;
  std::map<std::string, double> latest_fmc;
};

inline void check_feature_parity(const ml::Model& model) {
  if (model.feature_names != ml::window_feature_names()) {
    std::string got;
    for (const auto& n : model.feature_names) got += (got.empty() ? "" : ",") + n;
    throw FeatureMismatch("model features [" + got + "] do not match the prediction window features");
  }
}

inline PredictionArtifact run_daily_job(const JobInputs& in, const std::filesystem::path& output,
                                        const JobOptions& options = {}) {
  if (!in.model || !in.weather || !in.units) throw InputError("MissingInput", "daily job needs model, provider and counties");
  if (in.locations.empty()) throw InputError("MissingInput", "no prediction locations given");
  check_feature_parity(*in.model);

  const auto now = options.clock();
  const Date anchor = options.anchor.value_or(utc_date(now));
  RateLimiter limiter(options.min_request_interval, options.sleep);

  std::map<std::string, const geo::FipsUnit*> unit_by_code;
  for (const auto& u : *in.units) unit_by_code[u.code()] = &u;

  struct Outcome {
    std::optional<PredictionRow> row;
    std::optional<SkipRecord> skip;
  };
  std::vector<Outcome> outcomes(in.locations.size());

  parallel_for(
      in.locations.size(),
      [&](std::size_t i) {
        const auto& spec = in.locations[i];
        try {
          PredictionLocation loc{spec.city, geo::GeoPoint(0, 0), "", geo::GeoPoint(0, 0), 0.0};
          if (spec.point) {
            loc.point = *spec.point;
            loc.fips = geo::locate_fips(loc.point, *in.units).code;
          } else {
            if (!in.geocoder) throw InputError("MissingInput", spec.city + ": no coordinates and geocoding disabled");
            limiter.acquire();
            std::tie(loc.point, loc.fips) = geocode(*in.geocoder, spec.city, *in.units);
          }
          const auto unit = unit_by_code.find(loc.fips);
          if (unit == unit_by_code.end()) throw InputError("UnknownCounty", spec.city + ": county " + loc.fips + " not in the boundary file");
          loc.centroid = unit->second->centroid();
          const auto fmc = in.latest_fmc.find(loc.fips);
          if (fmc == in.latest_fmc.end()) throw InputError("NoFuelData", spec.city + ": no fuel history for county " + loc.fips);
          loc.latest_fmc = fmc->second;

          limiter.acquire();
          const auto obs = fetch_window(*in.weather, loc.city, loc.point, anchor, options.sleep, options.retry);
          const auto x = build_prediction_features(obs, loc, anchor);
          const double y = in.model->predict(x);
          // Burned area cannot be negative; the regressors are unconstrained.
          const double acres = std::max(0.0, y);
          outcomes[i].row = PredictionRow{loc.fips, loc.city, acres, ml::classify_fire_size(acres)};
        } catch (const Error& e) {
          outcomes[i].skip = SkipRecord{spec.city, e.code(), e.what()};
        }
      },
      options.parallelism);

  PredictionArtifact art;
  art.generated_at = rfc3339(now);
  art.model_fingerprint = in.model_fingerprint;
  art.anchor_date = anchor.iso();
  for (auto& o : outcomes) {
    if (o.row) art.rows.push_back(std::move(*o.row));
    if (o.skip) art.skipped.push_back(std::move(*o.skip));
  }
  std::sort(art.rows.begin(), art.rows.end(),
            [](const auto& a, const auto& b) { return std::tie(a.fips, a.city) < std::tie(b.fips, b.city); });
  std::sort(art.skipped.begin(), art.skipped.end(), [](const auto& a, const auto& b) { return a.city < b.city; });
  if (art.rows.empty()) {
    std::string why;
    for (const auto& s : art.skipped) why += "\n  " + s.city + ": " + s.reason;
    throw AllLocationsFailed("every prediction location failed:" + why);
  }
  detail::write_text_atomic(output, to_json(art).dump(2) + "\n");
  return art;
}

}  // namespace wildfire::realtime
