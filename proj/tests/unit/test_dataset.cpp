#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "wildfire/core/random.hpp"
#include "wildfire/dataset.hpp"
#include "wildfire/geojson.hpp"
#include "wildfire/ml/training.hpp"
#include "wildfire/pipeline.hpp"
#include "wildfire/synth.hpp"

using namespace wildfire;
using dataset::JoinedDailyRecord;
using geo::StationKind;
using ingest::DailyEnvRecord;
using ingest::FireEvent;

namespace {

Date D(const char* s) { return *Date::parse(s); }

DailyEnvRecord fuel(const std::string& id, Date d, double v, ingest::FuelClass c = ingest::FuelClass::LIVE) {
  DailyEnvRecord r;
  r.station_id = id;
  r.date = d;
  r.kind = StationKind::FUEL;
  r.fmc = v;
  r.fuel_class = c;
  return r;
}

DailyEnvRecord tp(const std::string& id, Date d, double tmax) {
  DailyEnvRecord r;
  r.station_id = id;
  r.date = d;
  r.kind = StationKind::TP;
  r.tmax = tmax;
  r.tmin = tmax - 10;
  r.tavg = tmax - 5;
  r.prcp = 0.5;
  return r;
}

DailyEnvRecord wind(const std::string& id, Date d, double v) {
  DailyEnvRecord r;
  r.station_id = id;
  r.date = d;
  r.kind = StationKind::WIND;
  r.wind_speed = v;
  return r;
}

FireEvent fire(const char* id, const char* start, std::optional<const char*> end, double acres) {
  FireEvent e;
  e.event_id = id;
  e.start_date = D(start);
  if (end) e.end_date = D(*end);
  e.size_acres = acres;
  e.location = geo::GeoPoint(0, 0);
  return e;
}

double total(const std::vector<dataset::DailyFireAggregate>& v) {
  double s = 0;
  for (const auto& a : v) s += a.fire_size_day_sum;
  return s;
}

// Random table with gaps, sorted by (fips, date).
std::vector<JoinedDailyRecord> random_table(Rng& rng, int n_fips, int days, double gap_rate) {
  std::vector<JoinedDailyRecord> t;
  for (int f = 0; f < n_fips; ++f) {
    for (int d = 0; d < days; ++d) {
      if (rng.uniform() < gap_rate) continue;
      JoinedDailyRecord r;
      r.fips = "0600" + std::to_string(f + 1);
      r.longitude = -120.0 + f;
      r.latitude = 37.0 + f;
      r.date = D("2003-01-20") + d;
      r.wind = rng.uniform(0, 10);
      r.tmax = rng.uniform(10, 40);
      r.tmin = rng.uniform(-5, 10);
      r.tavg = rng.uniform(5, 25);
      r.fmc = rng.uniform(50, 150);
      r.prcp = rng.uniform(0, 5);
      r.fire_size_day_sum = rng.uniform() < 0.1 ? rng.uniform(0, 100) : 0.0;
      t.push_back(r);
    }
  }
  return t;
}

std::string corpus_bytes(const synth::SynthCorpus& c) {
  std::ostringstream os;
  synth::write_tp_raw(os, c.tp);
  synth::write_wind_raw(os, c.wind);
  synth::write_fuel_raw(os, c.fuel);
  ingest::write_fire_csv(os, c.fires);
  os << geo::counties_to_geojson(c.units).dump() << c.truth.dump();
  return os.str();
}

std::vector<JoinedDailyRecord> synth_table(const synth::SynthConfig& cfg) {
  const auto corpus = synth::generate_synthetic_corpus(cfg);
  return pipeline::build_dataset(pipeline::ingest_corpus(corpus), corpus.units).joined.rows;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) ma += a[i], mb += b[i];
  ma /= n, mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

// ---- live fuel -------------------------------------------------------------

TEST(SelectLiveFuel, KeepsOnlyLive) {
  std::vector<DailyEnvRecord> recs;
  for (int i = 0; i < 100; ++i)
    recs.push_back(fuel("F", D("2000-01-01") + i, 100, i < 22 ? ingest::FuelClass::DEAD : ingest::FuelClass::LIVE));
  const auto live = dataset::select_live_fuel(recs);
  EXPECT_EQ(live.size(), 78u);
  for (const auto& r : live) EXPECT_EQ(*r.fuel_class, ingest::FuelClass::LIVE);
  std::vector<DailyEnvRecord> dead(3, fuel("F", D("2000-01-01"), 10, ingest::FuelClass::DEAD));
  EXPECT_TRUE(dataset::select_live_fuel(dead).empty());
}

TEST(ForwardFillFuel, HandTrace) {
  const Date day1 = D("2000-06-01");
  const auto s = dataset::forward_fill_fuel({fuel("F", day1 + 4, 80), fuel("F", day1 + 9, 70)}, {day1, day1 + 11});
  const std::vector<double> expected = {80, 80, 80, 80, 80, 80, 80, 80, 80, 70, 70, 70};
  EXPECT_EQ(s.fmc, expected);
  EXPECT_EQ(s.at(day1 + 10), 70);
}

TEST(ForwardFillFuel, SingleRecordIsConstantAndEveryDayIsIdentity) {
  const DateRange r{D("2000-01-01"), D("2000-01-31")};
  const auto c = dataset::forward_fill_fuel({fuel("F", D("2000-01-15"), 93)}, r);
  EXPECT_EQ(c.fmc, std::vector<double>(31, 93));
  std::vector<DailyEnvRecord> all;
  std::vector<double> values;
  for (int i = 0; i < 31; ++i) {
    all.push_back(fuel("F", r.first + i, 50 + i));
    values.push_back(50 + i);
  }
  EXPECT_EQ(dataset::forward_fill_fuel(all, r).fmc, values);
}

TEST(ForwardFillFuel, NoRecordsThrows) {
  EXPECT_THROW(dataset::forward_fill_fuel({}, {D("2000-01-01"), D("2000-01-02")}), NoFuelRecords);
}

TEST(ForwardFillFuel, NoGapsAndMatchesLinearScan) {
  Rng rng(4);
  const DateRange r{D("2001-01-01"), D("2001-12-31")};
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<DailyEnvRecord> recs;
    const int n = 1 + static_cast<int>(rng.below(15));
    for (int i = 0; i < n; ++i) recs.push_back(fuel("F", r.first + static_cast<int>(rng.below(400)) - 20, rng.uniform(40, 200)));
    const auto s = dataset::forward_fill_fuel(recs, r);
    ASSERT_EQ(s.fmc.size(), static_cast<std::size_t>(r.last - r.first + 1));
    Date earliest = recs.front().date;
    for (const auto& x : recs) earliest = std::min(earliest, x.date);
    for (Date d = r.first; d <= r.last; ++d) {
      // Latest record date on or before d (or the earliest date); last in input order wins.
      const Date target = [&] {
        std::optional<Date> best;
        for (const auto& x : recs)
          if (x.date <= d && (!best || x.date > *best)) best = x.date;
        return best.value_or(earliest);
      }();
      double want = 0;
      for (const auto& x : recs)
        if (x.date == target) want = *x.fmc;
      EXPECT_EQ(s.at(d), want);
    }
  }
}

// ---- fire aggregation ------------------------------------------------------

TEST(ImputeEndDate, Cases) {
  const auto e = dataset::impute_end_date(fire("E", "2001-08-03", std::nullopt, 1));
  EXPECT_EQ(*e.end_date, D("2001-08-03"));
  const auto kept = dataset::impute_end_date(fire("E", "2001-08-03", "2001-08-07", 1));
  EXPECT_EQ(*kept.end_date, D("2001-08-07"));
  EXPECT_EQ(dataset::impute_end_date(e), e);
}

TEST(DailyFireSum, SpreadsEvenly) {
  const auto out = dataset::daily_fire_sum({{fire("E", "2001-08-03", "2001-08-05", 30), "06001"}});
  ASSERT_EQ(out.size(), 3u);
  for (const auto& a : out) EXPECT_DOUBLE_EQ(a.fire_size_day_sum, 10.0);
  EXPECT_EQ(out[0].date, D("2001-08-03"));
  EXPECT_EQ(out[2].date, D("2001-08-05"));
}

TEST(DailyFireSum, OneDayAndOverlap) {
  const auto one = dataset::daily_fire_sum({{fire("E", "2001-08-03", std::nullopt, 5), "06001"}});
  ASSERT_EQ(one.size(), 1u);
  EXPECT_DOUBLE_EQ(one[0].fire_size_day_sum, 5.0);

  const auto both = dataset::daily_fire_sum({{fire("A", "2001-08-01", "2001-08-03", 30), "06001"},
                                             {fire("B", "2001-08-03", "2001-08-04", 8), "06001"}});
  const auto shared = std::find_if(both.begin(), both.end(), [](auto& a) { return a.date == D("2001-08-03"); });
  ASSERT_NE(shared, both.end());
  EXPECT_DOUBLE_EQ(shared->fire_size_day_sum, 14.0);
  EXPECT_EQ(both.size(), 4u);
}

TEST(DailyFireSum, ConservesAcres) {
  Rng rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<dataset::LocatedFire> fires;
    double expected = 0;
    for (int i = 0; i < 200; ++i) {
      auto e = fire("E", "2001-01-01", std::nullopt, std::exp(rng.normal(1, 2)));
      e.start_date = e.start_date + static_cast<int>(rng.below(60));
      if (rng.bernoulli(0.4)) e.end_date = e.start_date + static_cast<int>(rng.below(12));
      expected += e.size_acres;
      fires.push_back({dataset::impute_end_date(e), "0600" + std::to_string(1 + rng.below(3))});
    }
    const auto out = dataset::daily_fire_sum(fires);
    EXPECT_NEAR(total(out), expected, 1e-6 * expected);
    for (std::size_t i = 1; i < out.size(); ++i)
      EXPECT_TRUE(std::tie(out[i - 1].fips, out[i - 1].date) < std::tie(out[i].fips, out[i].date));
  }
}

// ---- joined table ----------------------------------------------------------

namespace {

struct JoinFixture {
  std::vector<geo::FipsUnit> units = {geo::FipsUnit("06001", geo::GeoPoint(37.5, -121.5))};
  std::vector<geo::SiteAssignment> assignments;
  DateRange range{D("2002-05-01"), D("2002-05-10")};
  std::vector<DailyEnvRecord> tps, winds;
  std::map<std::string, dataset::FuelSeries> fuels;

  JoinFixture() {
    geo::SiteAssignment a;
    a.fips_code = "06001";
    a.sites[StationKind::TP] = {"T", 1.0};
    a.sites[StationKind::WIND] = {"W", 2.0};
    a.sites[StationKind::FUEL] = {"F", 3.0};
    assignments.push_back(a);
    for (Date d = range.first; d <= range.last; ++d) {
      tps.push_back(tp("T", d, 20 + (d - range.first)));
      winds.push_back(wind("W", d, 3.0));
    }
    fuels["F"] = dataset::forward_fill_fuel({fuel("F", range.first, 110)}, range);
  }

  dataset::JoinResult join(const std::vector<dataset::DailyFireAggregate>& fires = {}) const {
    return dataset::build_joined_table(assignments, tps, winds, fuels, fires, units, range);
  }
};

}  // namespace

TEST(JoinedTable, OneRowPerDayOneFireDay) {
  JoinFixture fx;
  const auto r = fx.join(dataset::daily_fire_sum({{fire("E", "2002-05-04", std::nullopt, 7.5), "06001"}}));
  ASSERT_EQ(r.rows.size(), 10u);
  int fire_rows = 0;
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.fips, "06001");
    EXPECT_DOUBLE_EQ(row.latitude, 37.5);
    EXPECT_DOUBLE_EQ(row.longitude, -121.5);
    EXPECT_DOUBLE_EQ(row.fmc, 110);
    EXPECT_DOUBLE_EQ(row.wind, 3.0);
    if (row.fire_size_day_sum != 0.0) {
      ++fire_rows;
      EXPECT_EQ(row.date, D("2002-05-04"));
      EXPECT_DOUBLE_EQ(row.fire_size_day_sum, 7.5);
    }
  }
  EXPECT_EQ(fire_rows, 1);
  EXPECT_DOUBLE_EQ(r.rows[3].tmax, 23);
}

TEST(JoinedTable, MissingTpDateDropsRow) {
  JoinFixture fx;
  fx.tps.erase(fx.tps.begin() + 2);
  const auto r = fx.join();
  EXPECT_EQ(r.rows.size(), 9u);
  EXPECT_EQ(r.stats.dropped_missing_tp, 1u);
  for (const auto& row : r.rows) EXPECT_NE(row.date, D("2002-05-03"));
}

TEST(JoinedTable, NoFiresMeansZeroSums) {
  JoinFixture fx;
  for (const auto& row : fx.join().rows) EXPECT_EQ(row.fire_size_day_sum, 0.0);
}

TEST(JoinedTable, CsvRoundTripAndHeader) {
  JoinFixture fx;
  const auto rows = fx.join(dataset::daily_fire_sum({{fire("E", "2002-05-04", "2002-05-06", 1.0), "06001"}})).rows;
  std::stringstream ss;
  dataset::write_joined_csv(ss, rows);
  std::string header;
  std::getline(ss, header);
  EXPECT_EQ(header, "fips,longitude,latitude,date,wind,tmax,tmin,tavg,fmc,prcp,fire_size_day_sum");
  ss.seekg(0);
  EXPECT_EQ(dataset::read_joined_csv(ss), rows);
}

// ---- windows ---------------------------------------------------------------

TEST(WindowAggregate, WindowOfOneIsIdentity) {
  Rng rng(8);
  const auto t = random_table(rng, 3, 40, 0.2);
  const auto w = dataset::window_aggregate(t, 1, 1);
  ASSERT_EQ(w.size(), t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_EQ(w[i].fips, t[i].fips);
    EXPECT_EQ(w[i].window_end_date, t[i].date);
    const std::array<double, 9> x = {t[i].wind, t[i].tmax, t[i].tmin, t[i].tavg, t[i].fmc, t[i].prcp,
                                     static_cast<double>(t[i].date.month()), t[i].longitude, t[i].latitude};
    EXPECT_EQ(w[i].x, x);
    EXPECT_EQ(w[i].y, t[i].fire_size_day_sum);
  }
}

TEST(WindowAggregate, ConstantFixture) {
  std::vector<JoinedDailyRecord> t;
  for (int d = 0; d < 21; ++d) {
    JoinedDailyRecord r{"06001", -120, 38, D("2004-07-01") + d, 2, 30, 12, 21, 90, 0.25, 1.5};
    t.push_back(r);
  }
  const auto w = dataset::window_aggregate(t);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_DOUBLE_EQ(w[0].x[0], 2);
  EXPECT_DOUBLE_EQ(w[0].x[4], 90);
  EXPECT_DOUBLE_EQ(w[0].x[5], 0.25);
  EXPECT_DOUBLE_EQ(w[0].x[6], 7);
  EXPECT_DOUBLE_EQ(w[0].y, 21 * 1.5);
  EXPECT_EQ(w[0].window_end_date, D("2004-07-21"));
}

TEST(WindowAggregate, MatchesNaiveRecomputation) {
  Rng rng(12);
  const auto t = random_table(rng, 2, 90, 0.03);
  const int w = 21, stride = 7;
  const auto got = dataset::window_aggregate(t, w, stride);

  std::vector<dataset::WindowSample> want;
  for (const std::string fips : {"06001", "06002"}) {
    std::map<Date, JoinedDailyRecord> rows;
    for (const auto& r : t)
      if (r.fips == fips) rows[r.date] = r;
    const Date first = rows.begin()->first, last = rows.rbegin()->first;
    for (Date s = first; s + (w - 1) <= last; s = s + stride) {
      dataset::WindowSample ws;
      ws.fips = fips;
      ws.window_end_date = s + (w - 1);
      bool ok = true;
      std::array<double, 6> acc{};
      for (int k = 0; k < w; ++k) {
        const auto it = rows.find(s + k);
        if (it == rows.end()) {
          ok = false;
          break;
        }
        const auto& r = it->second;
        acc[0] += r.wind, acc[1] += r.tmax, acc[2] += r.tmin, acc[3] += r.tavg, acc[4] += r.fmc, acc[5] += r.prcp;
        ws.y += r.fire_size_day_sum;
      }
      if (!ok) continue;
      for (int j = 0; j < 6; ++j) ws.x[static_cast<std::size_t>(j)] = acc[static_cast<std::size_t>(j)] / w;
      ws.x[6] = ws.window_end_date.month();
      ws.x[7] = rows.at(ws.window_end_date).longitude;
      ws.x[8] = rows.at(ws.window_end_date).latitude;
      want.push_back(ws);
    }
  }
  ASSERT_EQ(got.size(), want.size());
  ASSERT_FALSE(got.empty());
  for (std::size_t i = 0; i < got.size(); ++i) {
    EXPECT_EQ(got[i].fips, want[i].fips);
    EXPECT_EQ(got[i].window_end_date, want[i].window_end_date);
    for (std::size_t j = 0; j < 9; ++j) EXPECT_NEAR(got[i].x[j], want[i].x[j], 1e-9);
    EXPECT_NEAR(got[i].y, want[i].y, 1e-9);
  }
}

TEST(WindowAggregate, MeansLieWithinDailyRange) {
  Rng rng(13);
  const auto t = random_table(rng, 2, 120, 0.0);
  for (const auto& s : dataset::window_aggregate(t, 10, 3)) {
    std::array<double, 6> lo, hi;
    lo.fill(1e300);
    hi.fill(-1e300);
    for (const auto& r : t) {
      if (r.fips != s.fips || r.date > s.window_end_date || r.date < s.window_end_date - 9) continue;
      const std::array<double, 6> v = {r.wind, r.tmax, r.tmin, r.tavg, r.fmc, r.prcp};
      for (std::size_t j = 0; j < 6; ++j) lo[j] = std::min(lo[j], v[j]), hi[j] = std::max(hi[j], v[j]);
    }
    for (std::size_t j = 0; j < 6; ++j) {
      EXPECT_LE(lo[j], s.x[j] + 1e-12);
      EXPECT_GE(hi[j], s.x[j] - 1e-12);
    }
  }
}

TEST(WindowAggregate, RejectsBadParameters) {
  EXPECT_THROW(dataset::window_aggregate({}, 0, 1), InputError);
  EXPECT_THROW(dataset::window_aggregate({}, 3, 0), InputError);
}

// ---- synthetic corpus ------------------------------------------------------

TEST(SyntheticCorpus, SameSeedIsByteIdentical) {
  synth::SynthConfig cfg;
  cfg.n_units = 12;
  cfg.n_days = 120;
  EXPECT_EQ(corpus_bytes(synth::generate_synthetic_corpus(cfg)), corpus_bytes(synth::generate_synthetic_corpus(cfg)));
  auto other = cfg;
  other.seed = cfg.seed + 1;
  EXPECT_NE(corpus_bytes(synth::generate_synthetic_corpus(cfg)), corpus_bytes(synth::generate_synthetic_corpus(other)));
}

TEST(SyntheticCorpus, JoinedTableHasEveryFeature) {
  synth::SynthConfig cfg;
  cfg.n_units = 10;
  cfg.n_days = 200;
  const auto corpus = synth::generate_synthetic_corpus(cfg);
  const auto built = pipeline::build_dataset(pipeline::ingest_corpus(corpus), corpus.units);
  EXPECT_GT(built.joined.rows.size(), 0u);
  for (const auto& r : built.joined.rows)
    for (const double v : {r.wind, r.tmax, r.tmin, r.tavg, r.fmc, r.prcp, r.fire_size_day_sum}) EXPECT_TRUE(std::isfinite(v));
  double acres = 0;
  for (const auto& r : built.joined.rows) acres += r.fire_size_day_sum;
  EXPECT_NEAR(acres + built.stats.join.fire_acres_unjoined, built.stats.fire_event_acres,
              1e-6 * built.stats.fire_event_acres);
}

TEST(SyntheticCorpus, ZeroWeightLeavesNothingToLearn) {
  synth::SynthConfig cfg;
  cfg.n_units = 60;
  cfg.n_days = 730;
  cfg.ignition_weight = 0.0;
  const auto windows = dataset::window_aggregate(synth_table(cfg), 21, 21);
  ml::ModelConfig mc;
  const auto r = ml::train_and_evaluate(ml::to_samples(windows), mc, ml::window_feature_names(), 42);
  EXPECT_LT(r.report.r2, 0.05);
}

TEST(SyntheticCorpus, NoiselessFiresTrackMonthlyHeat) {
  synth::SynthConfig cfg;
  cfg.n_units = 30;
  cfg.n_days = 1095;
  cfg.noise = 0.0;
  const auto table = synth_table(cfg);
  std::map<std::pair<int, unsigned>, std::pair<double, double>> fire_tmax;  // (sum acres, sum tmax)
  std::map<std::pair<int, unsigned>, int> n;
  for (const auto& r : table) {
    const auto key = std::make_pair(r.date.year(), r.date.month());
    fire_tmax[key].first += r.fire_size_day_sum;
    fire_tmax[key].second += r.tmax;
    ++n[key];
  }
  std::vector<double> fires, heat;
  for (const auto& [k, v] : fire_tmax) {
    fires.push_back(v.first);
    heat.push_back(v.second / n[k]);
  }
  ASSERT_GE(fires.size(), 30u);
  EXPECT_GT(pearson(fires, heat), 0.3);
}
