#include <gtest/gtest.h>
#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "wildfire/core/random.hpp"
#include "wildfire/ml/training.hpp"
#include "wildfire/realtime.hpp"

using namespace wildfire;
using namespace wildfire::realtime;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = fs::path(WILDFIRE_FIXTURES) / "realtime";

Date D(const char* s) { return *Date::parse(s); }

geo::Ring box(double lat0, double lon0, double lat1, double lon1) {
  return {geo::GeoPoint(lat0, lon0), geo::GeoPoint(lat0, lon1), geo::GeoPoint(lat1, lon1), geo::GeoPoint(lat1, lon0),
          geo::GeoPoint(lat0, lon0)};
}

// One box county around each fixture city.
std::vector<geo::FipsUnit> fixture_units() {
  return {geo::FipsUnit("06007", geo::GeoPoint(39.5, -121.75), {box(39.2, -122.2, 40.0, -121.3)}),
          geo::FipsUnit("06019", geo::GeoPoint(36.75, -119.75), {box(36.2, -120.5, 37.3, -119.0)}),
          geo::FipsUnit("06067", geo::GeoPoint(38.5, -121.5), {box(38.0, -122.0, 39.0, -121.0)}),
          geo::FipsUnit("06089", geo::GeoPoint(40.6, -122.4), {box(40.2, -123.0, 41.0, -121.8)})};
}

ml::Model window_model(std::uint64_t seed = 1) {
  Rng rng(seed);
  ml::SampleSet s(dataset::kNumFeatures);
  std::array<double, dataset::kNumFeatures> x{};
  for (int i = 0; i < 200; ++i) {
    for (auto& v : x) v = rng.uniform(0, 40);
    s.add(x, std::max(0.0, 30 * (x[1] - 20) + rng.normal(0, 5)));
  }
  ml::ModelConfig c;
  c.gbr.n_estimators = 30;
  c.gbr.learning_rate = 0.2;
  c.gbr.max_depth = 3;
  return ml::fit_model(s, c, ml::window_feature_names(), seed);
}

std::chrono::system_clock::time_point fixed_now() { return *parse_rfc3339("2021-04-01T06:00:00Z"); }

JobOptions test_options() {
  JobOptions o;
  o.clock = fixed_now;
  o.sleep = [](std::chrono::milliseconds) {};
  o.parallelism = 3;
  return o;
}

// Per-process scratch root, removed at exit so parallel runs never share files.
const fs::path& scratch_root() {
  static const struct Root {
    fs::path path = fs::temp_directory_path() / ("wildfire_realtime_test_" + std::to_string(::getpid()));
    ~Root() {
      std::error_code ec;
      fs::remove_all(path, ec);
    }
  } root;
  return root.path;
}

fs::path scratch(const std::string& name) {
  const auto dir = scratch_root() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class FlakyProvider final : public WeatherProvider {
 public:
  FlakyProvider(WeatherProvider& inner, int failures) : inner_(inner), failures_(failures) {}
  std::vector<WeatherObservation> daily(const std::string& city, const geo::GeoPoint& p, DateRange r) override {
    ++calls;
    if (failures_-- > 0) throw ProviderUnavailable("simulated outage");
    return inner_.daily(city, p, r);
  }
  int calls = 0;

 private:
  WeatherProvider& inner_;
  int failures_;
};

struct Job {
  FixtureWeatherProvider weather{kFixtures};
  FixtureGeocodeProvider geocoder{kFixtures};
  std::vector<geo::FipsUnit> units = fixture_units();
  ml::Model model = window_model();

  JobInputs inputs(std::vector<LocationSpec> locations) {
    JobInputs in;
    in.locations = std::move(locations);
    in.model = &model;
    in.model_fingerprint = "sha256:test";
    in.weather = &weather;
    in.geocoder = &geocoder;
    in.units = &units;
    in.latest_fmc = {{"06007", 80.0}, {"06019", 95.0}, {"06067", 110.0}, {"06089", 120.0}};
    return in;
  }
};

}  // namespace

// ---- window ----------------------------------------------------------------

TEST(FetchWindow, FourteenHistoryThenSevenForecast) {
  FixtureWeatherProvider p(kFixtures);
  const auto obs = fetch_window(p, "Sacramento", geo::GeoPoint(38.58, -121.49), D("2021-04-01"));
  ASSERT_EQ(obs.size(), 21u);
  EXPECT_EQ(obs.front().date, D("2021-03-18"));
  EXPECT_EQ(obs.back().date, D("2021-04-07"));
  for (std::size_t i = 0; i < obs.size(); ++i) {
    EXPECT_EQ(obs[i].date, D("2021-03-18") + static_cast<int>(i));
    EXPECT_EQ(obs[i].kind, i < 14 ? ObservationKind::HISTORY : ObservationKind::FORECAST);
  }
  EXPECT_EQ(fetch_window(p, "Sacramento", geo::GeoPoint(38.58, -121.49), D("2021-04-01")), obs);
}

TEST(FetchWindow, MissingDayIsIncomplete) {
  FixtureWeatherProvider p(kFixtures);
  try {
    fetch_window(p, "Redding", geo::GeoPoint(40.58, -122.39), D("2021-04-01"));
    FAIL() << "expected IncompleteWindow";
  } catch (const IncompleteWindow& e) {
    EXPECT_NE(std::string(e.what()).find("2021-03-20"), std::string::npos);
  }
}

TEST(FetchWindow, ShiftedAnchorLeavesGaps) {
  FixtureWeatherProvider p(kFixtures);
  EXPECT_THROW(fetch_window(p, "Sacramento", geo::GeoPoint(38.58, -121.49), D("2021-04-02")), IncompleteWindow);
}

TEST(FetchWindow, RetriesWithDoublingDelay) {
  FixtureWeatherProvider inner(kFixtures);
  FlakyProvider flaky(inner, 2);
  std::vector<std::chrono::milliseconds> slept;
  const auto obs = fetch_window(flaky, "Fresno", geo::GeoPoint(36.7, -119.8), D("2021-04-01"),
                                [&](std::chrono::milliseconds d) { slept.push_back(d); });
  EXPECT_EQ(obs.size(), 21u);
  EXPECT_EQ(flaky.calls, 3);
  ASSERT_EQ(slept.size(), 2u);
  EXPECT_EQ(slept[0].count(), 250);
  EXPECT_EQ(slept[1].count(), 500);
}

TEST(FetchWindow, GivesUpAfterThreeAttempts) {
  FixtureWeatherProvider inner(kFixtures);
  FlakyProvider flaky(inner, 5);
  EXPECT_THROW(fetch_window(flaky, "Fresno", geo::GeoPoint(36.7, -119.8), D("2021-04-01"),
                            [](std::chrono::milliseconds) {}),
               ProviderUnavailable);
  EXPECT_EQ(flaky.calls, 3);
}

TEST(FetchWindow, UnrecordedCityIsUnavailable) {
  FixtureWeatherProvider p(kFixtures);
  EXPECT_THROW(fetch_window(p, "Atlantis", geo::GeoPoint(0, 0), D("2021-04-01"), [](std::chrono::milliseconds) {}),
               ProviderUnavailable);
}

// ---- geocoding -------------------------------------------------------------

TEST(Geocode, RecordedCountyIsUsed) {
  FixtureGeocodeProvider p(kFixtures);
  const auto [point, fips] = geocode(p, "Sacramento", fixture_units());
  EXPECT_EQ(fips, "06067");
  EXPECT_DOUBLE_EQ(point.lat(), 38.5816);
  EXPECT_DOUBLE_EQ(point.lon(), -121.4944);
}

TEST(Geocode, MissingCountyFallsBackToBoundaries) {
  FixtureGeocodeProvider p(kFixtures);
  const auto units = fixture_units();
  const auto [point, fips] = geocode(p, "Fresno", units);
  EXPECT_EQ(fips, geo::locate_fips(point, units).code);
  EXPECT_EQ(fips, "06019");
}

TEST(Geocode, UnknownCity) {
  FixtureGeocodeProvider p(kFixtures);
  EXPECT_THROW(geocode(p, "Atlantis", fixture_units()), UnknownCity);
}

// ---- features --------------------------------------------------------------

TEST(PredictionFeatures, ConstantObservations) {
  std::vector<WeatherObservation> obs;
  for (int i = 0; i < 21; ++i) obs.push_back({D("2021-12-01") + i, 12, 2, 7, 0.5, 3});
  const PredictionLocation loc{"X", geo::GeoPoint(38, -121), "06067", geo::GeoPoint(38.5, -121.5), 88};
  const auto x = build_prediction_features(obs, loc, D("2021-12-15"));
  const std::array<double, 9> want = {3, 12, 2, 7, 88, 0.5, 12, -121.5, 38.5};
  EXPECT_EQ(x, want);
  obs.pop_back();
  EXPECT_THROW(build_prediction_features(obs, loc, D("2021-12-15")), IncompleteWindow);
}

TEST(PredictionFeatures, FixtureWindowMatchesNaiveMean) {
  FixtureWeatherProvider p(kFixtures);
  const auto obs = fetch_window(p, "Chico", geo::GeoPoint(39.7, -121.8), D("2021-04-01"));
  const auto doc = nlohmann::json::parse(slurp(kFixtures / "weather" / "chico.json"));
  double sums[5] = {0, 0, 0, 0, 0};
  for (const auto& o : doc["observations"]) {
    sums[0] += o["wind_speed"].get<double>();
    sums[1] += o["tmax"].get<double>();
    sums[2] += o["tmin"].get<double>();
    sums[3] += o["tavg"].get<double>();
    sums[4] += o["prcp"].get<double>();
  }
  const PredictionLocation loc{"Chico", geo::GeoPoint(39.7, -121.8), "06007", geo::GeoPoint(39.5, -121.75), 80};
  const auto x = build_prediction_features(obs, loc, D("2021-04-01"));
  EXPECT_NEAR(x[0], sums[0] / 21, 1e-12);
  EXPECT_NEAR(x[1], sums[1] / 21, 1e-12);
  EXPECT_NEAR(x[2], sums[2] / 21, 1e-12);
  EXPECT_NEAR(x[3], sums[3] / 21, 1e-12);
  EXPECT_NEAR(x[5], sums[4] / 21, 1e-12);
  EXPECT_EQ(x[4], 80);
  EXPECT_EQ(x[6], 4);
}

// ---- daily job -------------------------------------------------------------

TEST(DailyJob, ThreeLocationsThreeRows) {
  Job job;
  const auto out = scratch("three") / "predictions.json";
  const auto art = run_daily_job(job.inputs({{"Sacramento", geo::GeoPoint(38.5816, -121.4944)},
                                             {"Fresno", std::nullopt},
                                             {"Chico", geo::GeoPoint(39.7285, -121.8375)}}),
                                 out, test_options());
  ASSERT_EQ(art.rows.size(), 3u);
  EXPECT_TRUE(art.skipped.empty());
  EXPECT_EQ(art.rows[0].fips, "06007");
  EXPECT_EQ(art.rows[1].fips, "06019");
  EXPECT_EQ(art.rows[2].fips, "06067");
  for (const auto& r : art.rows) {
    EXPECT_GE(r.predicted_sum_acres, 0.0);
    EXPECT_EQ(r.size_class, ml::classify_fire_size(r.predicted_sum_acres));
  }
  EXPECT_EQ(art.generated_at, "2021-04-01T06:00:00Z");
  EXPECT_EQ(art.anchor_date, "2021-04-01");
  const auto loaded = load_artifact(out);
  EXPECT_EQ(loaded.rows, art.rows);
  EXPECT_EQ(loaded.model_fingerprint, "sha256:test");
}

TEST(DailyJob, PredictionsMatchDirectModelCall) {
  Job job;
  const auto art = run_daily_job(job.inputs({{"Chico", geo::GeoPoint(39.7285, -121.8375)}}),
                                 scratch("direct") / "p.json", test_options());
  FixtureWeatherProvider p(kFixtures);
  const auto obs = fetch_window(p, "Chico", geo::GeoPoint(39.7285, -121.8375), D("2021-04-01"));
  const PredictionLocation loc{"Chico", geo::GeoPoint(39.7285, -121.8375), "06007", geo::GeoPoint(39.5, -121.75), 80};
  EXPECT_DOUBLE_EQ(art.rows.at(0).predicted_sum_acres,
                   std::max(0.0, job.model.predict(build_prediction_features(obs, loc, D("2021-04-01")))));
}

TEST(DailyJob, IncompleteLocationIsSkipped) {
  Job job;
  const auto art = run_daily_job(job.inputs({{"Sacramento", std::nullopt},
                                             {"Redding", geo::GeoPoint(40.5865, -122.3917)},
                                             {"Fresno", std::nullopt}}),
                                 scratch("skip") / "p.json", test_options());
  EXPECT_EQ(art.rows.size(), 2u);
  ASSERT_EQ(art.skipped.size(), 1u);
  EXPECT_EQ(art.skipped[0].city, "Redding");
  EXPECT_EQ(art.skipped[0].code, "IncompleteWindow");
}

TEST(DailyJob, RerunIsByteIdentical) {
  const auto dir = scratch("rerun");
  std::string first;
  for (int run = 0; run < 2; ++run) {
    Job job;
    auto opts = test_options();
    opts.parallelism = run == 0 ? 1 : 4;
    run_daily_job(job.inputs({{"Fresno", std::nullopt},
                              {"Sacramento", std::nullopt},
                              {"Redding", std::nullopt},
                              {"Chico", std::nullopt}}),
                  dir / "p.json", opts);
    if (run == 0)
      first = slurp(dir / "p.json");
    else
      EXPECT_EQ(slurp(dir / "p.json"), first);
  }
  EXPECT_FALSE(first.empty());
  for (const auto& e : fs::directory_iterator(dir)) EXPECT_EQ(e.path().filename(), "p.json");
}

TEST(DailyJob, AllFailedWritesNothing) {
  Job job;
  const auto out = scratch("allfail") / "p.json";
  EXPECT_THROW(run_daily_job(job.inputs({{"Redding", std::nullopt}, {"Atlantis", std::nullopt}}), out, test_options()),
               AllLocationsFailed);
  EXPECT_FALSE(fs::exists(out));
}

TEST(DailyJob, ModelFeatureMismatchRejected) {
  Job job;
  job.model.feature_names = ml::generic_feature_names(9);
  EXPECT_THROW(run_daily_job(job.inputs({{"Chico", std::nullopt}}), scratch("mismatch") / "p.json", test_options()),
               FeatureMismatch);
}

TEST(DailyJob, MissingFuelHistorySkips) {
  Job job;
  auto in = job.inputs({{"Chico", std::nullopt}, {"Fresno", std::nullopt}});
  in.latest_fmc.erase("06007");
  const auto art = run_daily_job(in, scratch("nofuel") / "p.json", test_options());
  ASSERT_EQ(art.skipped.size(), 1u);
  EXPECT_EQ(art.skipped[0].code, "NoFuelData");
}

TEST(DailyJob, RateLimiterSpacesCalls) {
  std::atomic<long> total{0};
  std::atomic<int> waits{0};
  RateLimiter limiter(std::chrono::milliseconds(100), [&](std::chrono::milliseconds d) {
    total += d.count();
    ++waits;
  });
  for (int i = 0; i < 4; ++i) limiter.acquire();
  EXPECT_EQ(waits.load(), 3);
  EXPECT_GE(total.load(), 3 * 100 + 2 * 100 + 100 - 60);  // 100 + 200 + 300 minus clock drift
}

// ---- record / replay and file formats --------------------------------------

TEST(Recording, ReplaysWhatWasRecorded) {
  const auto dir = scratch("record");
  FixtureWeatherProvider source(kFixtures);
  RecordingWeatherProvider recorder(source, dir);
  const auto live = fetch_window(recorder, "Sacramento", geo::GeoPoint(38.58, -121.49), D("2021-04-01"));
  FixtureWeatherProvider replay(dir);
  EXPECT_EQ(fetch_window(replay, "Sacramento", geo::GeoPoint(38.58, -121.49), D("2021-04-01")), live);
}

TEST(Artifact, JsonShapeAndCorruption) {
  PredictionArtifact a;
  a.generated_at = "2021-04-01T00:00:00Z";
  a.model_fingerprint = "sha256:ab";
  a.anchor_date = "2021-04-01";
  a.rows = {{"06067", "Sacramento", 12.5, 'C'}};
  a.skipped = {{"Redding", "IncompleteWindow", "missing"}};
  const auto j = to_json(a);
  EXPECT_EQ(j["schema_version"], 1);
  EXPECT_EQ(j["rows"][0]["class"], "C");
  EXPECT_EQ(j["rows"][0]["predicted_sum_acres"], 12.5);
  const auto back = artifact_from_json(j);
  EXPECT_EQ(back.rows, a.rows);
  EXPECT_EQ(back.skipped, a.skipped);
  auto bad = j;
  bad["rows"][0].erase("fips");
  EXPECT_THROW(artifact_from_json(bad), InputError);
  bad = j;
  bad["schema_version"] = 7;
  EXPECT_THROW(artifact_from_json(bad), UnsupportedVersion);
}

TEST(Timestamps, Rfc3339RoundTrip) {
  const auto t = parse_rfc3339("2021-04-01T23:59:58Z");
  ASSERT_TRUE(t);
  EXPECT_EQ(rfc3339(*t), "2021-04-01T23:59:58Z");
  EXPECT_EQ(utc_date(*t), D("2021-04-01"));
  EXPECT_EQ(rfc3339(*parse_rfc3339("2021-04-02")), "2021-04-02T00:00:00Z");
  EXPECT_FALSE(parse_rfc3339("2021-04-01T25:00:00Z"));
  EXPECT_FALSE(parse_rfc3339("2021-04-01 10:00:00"));
  EXPECT_FALSE(parse_rfc3339("yesterday"));
}

TEST(Locations, CsvRoundTrip) {
  const std::vector<LocationSpec> specs = {{"Sacramento", geo::GeoPoint(38.5816, -121.4944)},
                                           {"Fresno", std::nullopt},
                                           {"Dry Creek, North", geo::GeoPoint(39.1, -120.2)}};
  std::stringstream ss;
  write_locations_csv(ss, specs);
  const auto back = read_locations_csv(ss);
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back[i].city, specs[i].city);
    EXPECT_EQ(back[i].point.has_value(), specs[i].point.has_value());
    if (specs[i].point) EXPECT_EQ(*back[i].point, *specs[i].point);
  }
  std::istringstream bad("name,lat,lon\nX,1,2\n");
  EXPECT_THROW(read_locations_csv(bad), InputError);
}

TEST(Locations, LatestFuelPerCounty) {
  std::vector<dataset::JoinedDailyRecord> t(3);
  t[0].fips = "06001", t[0].date = D("2001-01-01"), t[0].fmc = 90;
  t[1].fips = "06001", t[1].date = D("2001-01-05"), t[1].fmc = 70;
  t[2].fips = "06003", t[2].date = D("2001-01-02"), t[2].fmc = 120;
  const auto m = latest_fmc_by_fips(t);
  EXPECT_EQ(m.at("06001"), 70);
  EXPECT_EQ(m.at("06003"), 120);
}

TEST(Slug, Normalizes) {
  EXPECT_EQ(city_slug("Sacramento"), "sacramento");
  EXPECT_EQ(city_slug("  Dry Creek, North "), "dry-creek-north");
}
