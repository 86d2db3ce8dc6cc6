#pragma once

#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "wildfire/core/digest.hpp"
#include "wildfire/geojson.hpp"
#include "wildfire/ingest.hpp"
#include "wildfire/manifest.hpp"
#include "wildfire/ml/model_io.hpp"
#include "wildfire/ml/training.hpp"
#include "wildfire/pipeline.hpp"
#include "wildfire/realtime.hpp"
#include "wildfire/synth.hpp"

namespace wildfire::cli {

namespace fs = std::filesystem;

struct Context {
  fs::path data_dir = ".";
  std::ostream* out = &std::cout;
  std::ostream* err = &std::cerr;

  fs::path resolve(const fs::path& p) const { return p.is_absolute() || p.empty() ? p : data_dir / p; }
};

inline std::ifstream open_input(const fs::path& p) {
  if (!fs::exists(p)) throw InputError("MissingInput", "input not found: " + p.string());
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InputError("MissingInput", "cannot read " + p.string());
  return in;
}

inline void require_dir(const fs::path& p) {
  if (!fs::is_directory(p)) throw InputError("MissingInput", "directory not found: " + p.string());
}

template <class Fn>
void write_file(const fs::path& p, Fn&& fn) {
  std::ostringstream os;
  fn(os);
  realtime::detail::write_text_atomic(p, os.str());
}

inline fs::path sibling(const fs::path& p, const std::string& suffix) {
  auto s = p;
  s += suffix;
  return s;
}

// Canonical and raw file names inside their directories.
inline constexpr const char* kTpFile = "tp.csv";
inline constexpr const char* kWindFile = "wind.csv";
inline constexpr const char* kFuelFile = "fuel.csv";
inline constexpr const char* kFireFile = "fires.csv";
inline constexpr const char* kStationsFile = "stations.csv";
inline constexpr const char* kRejectsFile = "rejects.csv";

// ---- synth -----------------------------------------------------------------

struct SynthOptions {
  std::uint64_t seed = 42;
  int units = 200;
  int days = 1095;
  double noise = 1.0;
  double ignition_weight = 1.0;
  int cities = 5;
  fs::path out = "raw";
};

inline void write_realtime_fixtures(const synth::SynthCorpus& corpus, const fs::path& dir) {
  nlohmann::json cities = nlohmann::json::object();
  std::vector<realtime::LocationSpec> specs;
  for (std::size_t i = 0; i < corpus.cities.size(); ++i) {
    const auto& c = corpus.cities[i];
    std::vector<realtime::WeatherObservation> obs;
    for (const auto& w : c.window) obs.push_back({w.date, w.tmax, w.tmin, w.tavg, w.prcp, w.wind});
    realtime::detail::write_text_atomic(dir / "fixtures" / "weather" / (realtime::city_slug(c.name) + ".json"),
                                        realtime::observations_to_json(c.name, obs).dump(1) + "\n");
    nlohmann::json entry = {{"lat", c.point.lat()}, {"lon", c.point.lon()}};
    // Every other city omits the county so the boundary lookup is exercised.
    if (i % 2 == 0) entry["fips"] = c.fips;
    cities[c.name] = entry;
    specs.push_back({c.name, c.list_coordinates ? std::optional<geo::GeoPoint>(c.point) : std::nullopt});
  }
  realtime::detail::write_text_atomic(dir / "fixtures" / "geocode.json",
                                      nlohmann::json{{"cities", cities}}.dump(1) + "\n");
  write_file(dir / "locations.csv", [&](std::ostream& os) { realtime::write_locations_csv(os, specs); });
}

inline void cmd_synth(const Context& ctx, const SynthOptions& o) {
  if (o.units < 1 || o.days < 1) throw InputError("InvalidInput", "--units and --days must be >= 1");
  if (o.noise < 0.0) throw InputError("InvalidInput", "--noise must be >= 0");
  RunManifest manifest("synth");
  manifest.config("seed", o.seed);
  manifest.config("units", o.units);
  manifest.config("days", o.days);
  manifest.config("noise", o.noise);
  manifest.config("ignition_weight", o.ignition_weight);

  synth::SynthConfig cfg;
  cfg.seed = o.seed;
  cfg.n_units = o.units;
  cfg.n_days = o.days;
  cfg.noise = o.noise;
  cfg.ignition_weight = o.ignition_weight;
  cfg.n_cities = o.cities;
  const auto corpus = synth::generate_synthetic_corpus(cfg);
  manifest.phase("generate_seconds");

  const auto dir = ctx.resolve(o.out);
  fs::create_directories(dir);
  write_file(dir / kTpFile, [&](std::ostream& os) { synth::write_tp_raw(os, corpus.tp); });
  write_file(dir / kWindFile, [&](std::ostream& os) { synth::write_wind_raw(os, corpus.wind); });
  write_file(dir / kFuelFile, [&](std::ostream& os) { synth::write_fuel_raw(os, corpus.fuel); });
  write_file(dir / kFireFile, [&](std::ostream& os) { ingest::write_fire_csv(os, corpus.fires); });
  write_file(dir / kStationsFile, [&](std::ostream& os) { ingest::write_stations_csv(os, corpus.stations); });
  write_file(dir / "counties.geojson",
             [&](std::ostream& os) { os << geo::counties_to_geojson(corpus.units).dump() << '\n'; });
  auto truth = corpus.truth;
  truth["anchor_date"] = corpus.anchor.iso();
  write_file(dir / "truth.json", [&](std::ostream& os) { os << truth.dump(2) << '\n'; });
  write_realtime_fixtures(corpus, dir);
  manifest.phase("write_seconds");

  manifest.output_dir(dir);
  manifest.result("events", corpus.fires.size());
  manifest.result("anchor_date", corpus.anchor.iso());
  manifest.write(dir / "manifest.json");
  *ctx.out << "synth: " << corpus.units.size() << " units, " << o.days << " days, " << corpus.fires.size()
           << " fire events -> " << dir.string() << '\n';
}

// ---- ingest ----------------------------------------------------------------

struct IngestOptions {
  fs::path raw_dir = "raw";
  fs::path out_dir = "canonical";
};

inline void cmd_ingest(const Context& ctx, const IngestOptions& o) {
  const auto raw = ctx.resolve(o.raw_dir);
  const auto out = ctx.resolve(o.out_dir);
  require_dir(raw);
  RunManifest manifest("ingest");
  manifest.config("raw_dir", raw.string());
  manifest.config("out_dir", out.string());

  std::vector<ingest::Reject> rejects;
  const auto take = [&](auto result) {
    rejects.insert(rejects.end(), result.rejects.begin(), result.rejects.end());
    return std::move(result.records);
  };
  const auto read = [&](const char* name, auto parser) {
    auto in = open_input(raw / name);
    manifest.input(raw / name);
    return take(parser(in, name));
  };
  const auto tp = read(kTpFile, [](std::istream& s, std::string_view f) { return ingest::parse_tp_csv(s, f); });
  const auto wind = read(kWindFile, [](std::istream& s, std::string_view f) { return ingest::parse_wind_csv(s, f); });
  const auto fuel = read(kFuelFile, [](std::istream& s, std::string_view f) { return ingest::parse_fuel_csv(s, f); });
  const auto fires = read(kFireFile, [](std::istream& s, std::string_view f) { return ingest::parse_fire_csv(s, f); });
  const auto stations =
      read(kStationsFile, [](std::istream& s, std::string_view f) { return ingest::parse_stations_csv(s, f); });
  manifest.phase("parse_seconds");

  fs::create_directories(out);
  write_file(out / kTpFile, [&](std::ostream& os) { ingest::write_env_csv(os, tp); });
  write_file(out / kWindFile, [&](std::ostream& os) { ingest::write_env_csv(os, wind); });
  write_file(out / kFuelFile, [&](std::ostream& os) { ingest::write_env_csv(os, fuel); });
  write_file(out / kFireFile, [&](std::ostream& os) { ingest::write_fire_csv(os, fires); });
  write_file(out / kStationsFile, [&](std::ostream& os) { ingest::write_stations_csv(os, stations); });
  write_file(out / kRejectsFile, [&](std::ostream& os) { ingest::write_reject_report(os, rejects); });
  manifest.phase("write_seconds");

  for (const char* f : {kTpFile, kWindFile, kFuelFile, kFireFile, kStationsFile, kRejectsFile}) manifest.output(out / f);
  manifest.result("records", {{"tp", tp.size()}, {"wind", wind.size()}, {"fuel", fuel.size()}, {"fires", fires.size()},
                              {"stations", stations.size()}});
  manifest.result("rejects", rejects.size());
  manifest.write(out / "manifest.json");
  *ctx.out << "ingest: " << tp.size() << " tp, " << wind.size() << " wind, " << fuel.size() << " fuel, "
           << fires.size() << " fire records; " << rejects.size() << " rejects -> " << out.string() << '\n';
}

// ---- build -----------------------------------------------------------------

struct BuildCmdOptions {
  fs::path canonical_dir = "canonical";
  fs::path counties = "counties.geojson";
  fs::path out = "joined.csv";
  std::optional<std::string> range;
  double coverage_threshold = 0.5;
};

inline pipeline::CanonicalInputs read_canonical(const fs::path& dir, RunManifest* manifest, std::ostream& warn) {
  require_dir(dir);
  pipeline::CanonicalInputs in;
  const auto env = [&](const char* name) {
    auto s = open_input(dir / name);
    if (manifest) manifest->input(dir / name);
    auto r = ingest::read_env_csv(s, name);
    for (const auto& rj : r.rejects) warn << "warning: " << rj.file << " row " << rj.row << ": " << rj.reason << '\n';
    return std::move(r.records);
  };
  in.tp = env(kTpFile);
  in.wind = env(kWindFile);
  in.fuel = env(kFuelFile);
  {
    auto s = open_input(dir / kFireFile);
    if (manifest) manifest->input(dir / kFireFile);
    in.fires = ingest::parse_fire_csv(s, kFireFile).records;
  }
  {
    auto s = open_input(dir / kStationsFile);
    if (manifest) manifest->input(dir / kStationsFile);
    in.stations = ingest::parse_stations_csv(s, kStationsFile).records;
  }
  return in;
}

inline void cmd_build(const Context& ctx, const BuildCmdOptions& o) {
  RunManifest manifest("build");
  const auto canonical = ctx.resolve(o.canonical_dir);
  const auto counties_path = ctx.resolve(o.counties);
  const auto out = ctx.resolve(o.out);
  pipeline::BuildOptions options;
  options.coverage_threshold = o.coverage_threshold;
  if (!(o.coverage_threshold > 0.0 && o.coverage_threshold <= 1.0))
    throw InputError("InvalidInput", "--coverage-threshold must be in (0, 1]");
  if (o.range) {
    const auto r = parse_range(*o.range);
    if (!r) throw InputError("InvalidInput", "bad --range '" + *o.range + "', expected YYYY-MM-DD..YYYY-MM-DD");
    options.range = *r;
  }
  manifest.config("canonical_dir", canonical.string());
  manifest.config("counties", counties_path.string());
  manifest.config("coverage_threshold", o.coverage_threshold);

  auto inputs = read_canonical(canonical, &manifest, *ctx.err);
  (void)open_input(counties_path);
  const auto units = geo::load_counties(counties_path);
  manifest.input(counties_path);
  manifest.phase("read_seconds");

  const auto result = pipeline::build_dataset(std::move(inputs), units, options);
  manifest.phase("build_seconds");
  manifest.config("range", result.stats.range.first.iso() + ".." + result.stats.range.last.iso());

  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_file(out, [&](std::ostream& os) { dataset::write_joined_csv(os, result.joined.rows); });
  const auto stats = pipeline::to_json(result.stats);
  const auto stats_path = sibling(out, ".stats.json");
  write_file(stats_path, [&](std::ostream& os) { os << stats.dump(2) << '\n'; });
  manifest.output(out);
  manifest.output(stats_path);
  manifest.result("stats", stats);
  manifest.write(sibling(out, ".manifest.json"));
  *ctx.out << "build: " << result.joined.rows.size() << " rows (" << result.stats.join.dropped()
           << " dropped) over " << units.size() << " counties -> " << out.string() << '\n';
}

// ---- train / sweep ---------------------------------------------------------

struct ModelFlags {
  std::string model = "gbr";
  int n_estimators = 150;
  double learning_rate = 0.01;
  int max_depth = 7;
  std::size_t min_samples_leaf = 1;
  std::size_t k = 5;
  int n_trees = 100;
  bool no_bootstrap = false;

  ml::ModelConfig config() const {
    if (!ml::is_known_model(model))
      throw InputError("InvalidInput", "unknown --model '" + model + "' (gbr, tree, linear, knn, forest)");
    if (max_depth < 0) throw InputError("InvalidInput", "--max-depth must be >= 0");
    if (min_samples_leaf < 1) throw InputError("InvalidInput", "--min-samples-leaf must be >= 1");
    ml::ModelConfig c;
    c.model = model;
    c.gbr = {n_estimators, learning_rate, max_depth, min_samples_leaf, 0};
    c.forest = {n_trees, max_depth, min_samples_leaf, !no_bootstrap, 0};
    c.tree = {max_depth, min_samples_leaf};
    c.k = k;
    return c;
  }
};

struct TrainOptions {
  fs::path joined = "joined.csv";
  int window = 21;
  std::optional<int> stride;  // default: window
  fs::path out = "model.json";
  std::optional<fs::path> report;  // default: <out>.report.csv
  std::uint64_t seed = 42;
  double test_fraction = 0.2;
  ModelFlags model;
};

inline std::vector<dataset::JoinedDailyRecord> read_joined(const fs::path& p) {
  auto in = open_input(p);
  return dataset::read_joined_csv(in, p.filename().string());
}

inline void check_fraction(double f) {
  if (!(f > 0.0 && f < 1.0)) throw InputError("InvalidInput", "--test-fraction must be in (0, 1)");
}

inline void cmd_train(const Context& ctx, const TrainOptions& o) {
  RunManifest manifest("train");
  const auto joined_path = ctx.resolve(o.joined);
  const auto out = ctx.resolve(o.out);
  const auto report_path = o.report ? ctx.resolve(*o.report) : sibling(out, ".report.csv");
  const int stride = o.stride.value_or(o.window);
  if (o.window < 1 || stride < 1) throw InputError("InvalidInput", "--window and --stride must be >= 1");
  check_fraction(o.test_fraction);
  const auto config = o.model.config();
  manifest.config("window", o.window);
  manifest.config("stride", stride);
  manifest.config("seed", o.seed);
  manifest.config("test_fraction", o.test_fraction);
  manifest.config("model", config.model);
  manifest.config("hyperparameters", ml::hyperparameters_json(config));

  const auto table = read_joined(joined_path);
  manifest.input(joined_path);
  const auto samples = ml::to_samples(dataset::window_aggregate(table, o.window, stride));
  manifest.phase("windows_seconds");

  const auto result = ml::train_and_evaluate(samples, config, ml::window_feature_names(), o.seed, o.test_fraction);
  manifest.phase("fit_seconds");

  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  ml::save_model(result.model, out);
  write_file(report_path, [&](std::ostream& os) { ml::write_report_csv(os, result.report); });
  manifest.output(out);
  manifest.output(report_path);
  manifest.result("r2", result.report.r2);
  manifest.result("n_train", result.report.n_train);
  manifest.result("n_test", result.report.n_test);
  manifest.write(sibling(out, ".manifest.json"));
  *ctx.out << "train: " << config.model << " on " << result.report.n_train << " windows, held-out r2 = "
           << result.report.r2 << " (" << result.report.n_test << " test) -> " << out.string() << '\n';
}

struct SweepOptions {
  fs::path joined = "joined.csv";
  std::string sweep = "window";  // window | depth
  std::vector<int> values;       // default: 1..21 for window, 1..10 for depth
  int window = 21;               // windows used by the depth sweep
  fs::path out = "sweep.csv";
  std::uint64_t seed = 42;
  double test_fraction = 0.2;
  ModelFlags model;
};

inline void cmd_sweep(const Context& ctx, const SweepOptions& o) {
  RunManifest manifest("sweep");
  const auto joined_path = ctx.resolve(o.joined);
  const auto out = ctx.resolve(o.out);
  if (o.sweep != "window" && o.sweep != "depth")
    throw InputError("InvalidInput", "--sweep must be 'window' or 'depth'");
  check_fraction(o.test_fraction);
  auto values = o.values;
  if (values.empty())
    for (int v = 1; v <= (o.sweep == "window" ? 21 : 10); ++v) values.push_back(v);
  for (const int v : values)
    if (v < (o.sweep == "window" ? 1 : 0)) throw InputError("InvalidInput", "sweep value out of range: " + std::to_string(v));
  const auto config = o.model.config();
  manifest.config("sweep", o.sweep);
  manifest.config("values", values);
  manifest.config("seed", o.seed);
  manifest.config("model", config.model);
  manifest.config("hyperparameters", ml::hyperparameters_json(config));

  const auto table = read_joined(joined_path);
  manifest.input(joined_path);
  std::vector<ml::SweepPoint> points;
  if (o.sweep == "window") {
    points = ml::sweep_window(table, values, config, o.seed, o.test_fraction);
  } else {
    if (o.window < 1) throw InputError("InvalidInput", "--window must be >= 1");
    const auto samples = ml::to_samples(dataset::window_aggregate(table, o.window, o.window));
    points = ml::sweep_depth(samples, values, config, o.seed, o.test_fraction);
  }
  manifest.phase("sweep_seconds");

  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_file(out, [&](std::ostream& os) { ml::write_sweep_csv(os, points); });
  manifest.output(out);
  const double best = ml::best_parameter(points);
  manifest.result("best_parameter", best);
  manifest.write(sibling(out, ".manifest.json"));
  *ctx.out << "sweep: " << o.sweep << " over " << points.size() << " values, best " << best << " -> "
           << out.string() << '\n';
}

// ---- predict ---------------------------------------------------------------

struct PredictOptions {
  fs::path model = "model.json";
  fs::path locations = "locations.csv";
  std::optional<fs::path> fixtures;
  bool live = false;
  std::optional<fs::path> record;  // with --live: store responses as fixtures
  fs::path out = "predictions.json";
  fs::path joined = "joined.csv";
  fs::path counties = "counties.geojson";
  std::optional<std::string> now;     // RFC 3339 clock override
  std::optional<std::string> anchor;  // YYYY-MM-DD, default: date of --now
  std::size_t parallelism = 4;
  int min_request_interval_ms = 0;
  bool repeat_daily = false;
};

struct WeatherSources {
  std::unique_ptr<realtime::WeatherProvider> weather;
  std::unique_ptr<realtime::WeatherProvider> recorder;
  std::unique_ptr<realtime::GeocodeProvider> geocoder;
  realtime::WeatherProvider* active = nullptr;
};

// Live providers are created by the binary, which links the HTTP client.
using LiveFactory = std::function<WeatherSources(const std::optional<fs::path>& record_dir)>;

inline std::atomic<bool>& stop_requested() {
  static std::atomic<bool> flag{false};
  return flag;
}

inline void cmd_predict(const Context& ctx, const PredictOptions& o, const LiveFactory& live_factory = {}) {
  const auto model_path = ctx.resolve(o.model);
  const auto out = ctx.resolve(o.out);
  if (o.fixtures.has_value() == o.live) throw InputError("InvalidInput", "give exactly one of --fixtures <dir> or --live");
  if (o.parallelism < 1) throw InputError("InvalidInput", "--parallelism must be >= 1");
  if (o.repeat_daily && (o.now || o.anchor))
    throw InputError("InvalidInput", "--repeat-daily cannot be combined with --now or --anchor");

  realtime::Clock clock = [] { return std::chrono::system_clock::now(); };
  if (o.now) {
    const auto t = realtime::parse_rfc3339(*o.now);
    if (!t) throw InputError("InvalidInput", "bad --now '" + *o.now + "', expected YYYY-MM-DDTHH:MM:SSZ");
    clock = [t] { return *t; };
  }
  std::optional<Date> anchor;
  if (o.anchor) {
    anchor = Date::parse(*o.anchor);
    if (!anchor) throw InputError("InvalidInput", "bad --anchor '" + *o.anchor + "'");
  }

  (void)open_input(model_path);
  const auto model = ml::load_model(model_path);
  realtime::check_feature_parity(model);
  const auto fingerprint = sha256_file(model_path);
  std::vector<realtime::LocationSpec> locations;
  {
    auto in = open_input(ctx.resolve(o.locations));
    locations = realtime::read_locations_csv(in, o.locations.filename().string());
  }
  (void)open_input(ctx.resolve(o.counties));
  const auto units = geo::load_counties(ctx.resolve(o.counties));
  const auto latest_fmc = realtime::latest_fmc_by_fips(read_joined(ctx.resolve(o.joined)));

  WeatherSources sources;
  if (o.fixtures) {
    const auto dir = ctx.resolve(*o.fixtures);
    require_dir(dir);
    sources.weather = std::make_unique<realtime::FixtureWeatherProvider>(dir);
    sources.geocoder = std::make_unique<realtime::FixtureGeocodeProvider>(dir);
    sources.active = sources.weather.get();
  } else {
    if (!live_factory) throw InputError("InvalidInput", "live providers are not available in this build");
    sources = live_factory(o.record ? std::optional<fs::path>(ctx.resolve(*o.record)) : std::nullopt);
  }

  realtime::JobInputs inputs;
  inputs.locations = locations;
  inputs.model = &model;
  inputs.model_fingerprint = fingerprint;
  inputs.weather = sources.active;
  inputs.geocoder = sources.geocoder.get();
  inputs.units = &units;
  inputs.latest_fmc = latest_fmc;

  realtime::JobOptions options;
  options.parallelism = o.parallelism;
  options.min_request_interval = std::chrono::milliseconds(o.min_request_interval_ms);
  options.clock = clock;
  options.anchor = anchor;

  for (;;) {
    RunManifest manifest("predict");
    manifest.config("fixtures", o.fixtures ? ctx.resolve(*o.fixtures).string() : std::string());
    manifest.config("live", o.live);
    manifest.config("parallelism", o.parallelism);
    manifest.input(model_path);
    manifest.input(ctx.resolve(o.locations));
    manifest.input(ctx.resolve(o.joined));
    manifest.input(ctx.resolve(o.counties));
    const auto art = realtime::run_daily_job(inputs, out, options);
    manifest.phase("job_seconds");
    manifest.output(out);
    manifest.result("rows", art.rows.size());
    manifest.result("skipped", art.skipped.size());
    manifest.result("anchor_date", art.anchor_date);
    manifest.write(sibling(out, ".manifest.json"));
    *ctx.out << "predict: " << art.rows.size() << " locations predicted, " << art.skipped.size()
             << " skipped (anchor " << art.anchor_date << ") -> " << out.string() << '\n';
    for (const auto& s : art.skipped) *ctx.err << "  skipped " << s.city << ": " << s.reason << '\n';
    if (!o.repeat_daily) return;

    // Sleep until the next UTC midnight, waking early on SIGINT/SIGTERM.
    const auto next = std::chrono::floor<std::chrono::days>(std::chrono::system_clock::now()) + std::chrono::days(1);
    while (std::chrono::system_clock::now() < next) {
      if (stop_requested()) return;
      std::this_thread::sleep_for(std::chrono::milliseconds(500));
    }
  }
}

}  // namespace wildfire::cli
