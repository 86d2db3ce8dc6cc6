#pragma once

#include <csignal>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wildfire/cli/commands.hpp"
#include "wildfire/cli/serve.hpp"

namespace wildfire::cli {

enum ExitCode : int { kOk = 0, kInternalError = 1, kUsageError = 2 };

inline void add_model_flags(CLI::App* cmd, ModelFlags& m) {
  cmd->add_option("--model", m.model, "gbr | tree | linear | knn | forest")->capture_default_str();
  cmd->add_option("--n-estimators", m.n_estimators, "boosting stages")->capture_default_str();
  cmd->add_option("--learning-rate", m.learning_rate, "boosting shrinkage")->capture_default_str();
  cmd->add_option("--max-depth", m.max_depth, "tree depth limit")->capture_default_str();
  cmd->add_option("--min-samples-leaf", m.min_samples_leaf, "smallest leaf")->capture_default_str();
  cmd->add_option("--k", m.k, "neighbours for knn")->capture_default_str();
  cmd->add_option("--n-trees", m.n_trees, "trees for forest")->capture_default_str();
  cmd->add_flag("--no-bootstrap", m.no_bootstrap, "forest trees see every sample");
}

inline void on_stop_signal(int) { stop_requested() = true; }

// Parses arguments and runs one subcommand. Exit codes: 0 success,
// 1 internal error, 2 usage or input error.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr,
               const LiveFactory& live_factory = {}) {
  CLI::App app{"Wildfire risk pipeline: synthesize, ingest, build, train, sweep, predict, serve"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value file; command-line flags take precedence");

  Context ctx;
  ctx.out = &out;
  ctx.err = &err;
  std::string data_dir = ".";
  app.add_option("--data-dir", data_dir, "base for relative paths")->capture_default_str();

  SynthOptions synth;
  auto* c_synth = app.add_subcommand("synth", "generate a synthetic raw corpus");
  c_synth->add_option("--seed", synth.seed)->capture_default_str();
  c_synth->add_option("--units", synth.units, "number of counties")->capture_default_str();
  c_synth->add_option("--days", synth.days, "days of history")->capture_default_str();
  c_synth->add_option("--noise", synth.noise, "weather noise scale")->capture_default_str();
  c_synth->add_option("--ignition-weight", synth.ignition_weight, "weather influence on ignitions")->capture_default_str();
  c_synth->add_option("--cities", synth.cities, "prediction locations to emit")->capture_default_str();
  c_synth->add_option("--out", synth.out, "output directory")->capture_default_str();

  IngestOptions ingest_o;
  auto* c_ingest = app.add_subcommand("ingest", "parse raw CSVs into canonical records");
  c_ingest->add_option("--raw-dir", ingest_o.raw_dir)->capture_default_str();
  c_ingest->add_option("--out-dir", ingest_o.out_dir)->capture_default_str();

  BuildCmdOptions build;
  std::string range;
  auto* c_build = app.add_subcommand("build", "join canonical records into the daily county table");
  c_build->add_option("--canonical-dir", build.canonical_dir)->capture_default_str();
  c_build->add_option("--counties", build.counties, "county boundaries (GeoJSON)")->capture_default_str();
  c_build->add_option("--out", build.out)->capture_default_str();
  c_build->add_option("--range", range, "YYYY-MM-DD..YYYY-MM-DD (default: span of the weather records)");
  c_build->add_option("--coverage-threshold", build.coverage_threshold)->capture_default_str();

  TrainOptions train;
  int train_stride = 0;
  std::string train_report;
  auto* c_train = app.add_subcommand("train", "fit a model on windowed samples");
  c_train->add_option("--joined", train.joined)->capture_default_str();
  c_train->add_option("--window", train.window, "days per window")->capture_default_str();
  c_train->add_option("--stride", train_stride, "days between window starts (default: window)");
  c_train->add_option("--out", train.out)->capture_default_str();
  c_train->add_option("--report", train_report, "evaluation CSV (default: <out>.report.csv)");
  c_train->add_option("--seed", train.seed)->capture_default_str();
  c_train->add_option("--test-fraction", train.test_fraction)->capture_default_str();
  add_model_flags(c_train, train.model);

  SweepOptions sweep;
  auto* c_sweep = app.add_subcommand("sweep", "score a model over a parameter grid");
  c_sweep->add_option("--joined", sweep.joined)->capture_default_str();
  c_sweep->add_option("--sweep", sweep.sweep, "window | depth")->capture_default_str();
  c_sweep->add_option("--values", sweep.values, "grid (default: 1..21 for window, 1..10 for depth)")->delimiter(',');
  c_sweep->add_option("--window", sweep.window, "window used by the depth sweep")->capture_default_str();
  c_sweep->add_option("--out", sweep.out)->capture_default_str();
  c_sweep->add_option("--seed", sweep.seed)->capture_default_str();
  c_sweep->add_option("--test-fraction", sweep.test_fraction)->capture_default_str();
  add_model_flags(c_sweep, sweep.model);

  PredictOptions predict;
  std::string fixtures, record, now, anchor;
  auto* c_predict = app.add_subcommand("predict", "run the daily prediction job");
  c_predict->add_option("--model", predict.model)->capture_default_str();
  c_predict->add_option("--locations", predict.locations, "CSV city,lat,lon")->capture_default_str();
  c_predict->add_option("--fixtures", fixtures, "replay recorded provider responses from this directory");
  c_predict->add_flag("--live", predict.live, "call the providers configured by WEATHER_API_* variables");
  c_predict->add_option("--record", record, "with --live, also store responses here as fixtures");
  c_predict->add_option("--out", predict.out)->capture_default_str();
  c_predict->add_option("--joined", predict.joined, "source of the latest fuel moisture")->capture_default_str();
  c_predict->add_option("--counties", predict.counties)->capture_default_str();
  c_predict->add_option("--now", now, "clock override, YYYY-MM-DDTHH:MM:SSZ");
  c_predict->add_option("--anchor", anchor, "first forecast day (default: date of --now)");
  c_predict->add_option("--parallelism", predict.parallelism)->capture_default_str();
  c_predict->add_option("--min-request-interval-ms", predict.min_request_interval_ms)->capture_default_str();
  c_predict->add_flag("--repeat-daily", predict.repeat_daily, "keep running, once per UTC day");

  ServeOptions serve;
  auto* c_serve = app.add_subcommand("serve", "serve the map UI and socket protocol");
  c_serve->add_option("--port", serve.port, "0 picks a free port")->capture_default_str()->check(CLI::Range(0, 65535));
  c_serve->add_option("--address", serve.address)->capture_default_str();
  c_serve->add_option("--model-path", serve.model_path)->capture_default_str();
  c_serve->add_option("--prediction-artifact", serve.prediction_artifact)->capture_default_str();
  c_serve->add_option("--joined", serve.joined)->capture_default_str();
  c_serve->add_option("--fires", serve.fires, "canonical fire events")->capture_default_str();
  c_serve->add_option("--counties", serve.counties)->capture_default_str();
  c_serve->add_option("--static-dir", serve.static_dir, "UI assets served under /static/")->capture_default_str();
  c_serve->add_option("--threads", serve.threads)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  ctx.data_dir = data_dir;
  try {
    if (*c_synth) {
      cmd_synth(ctx, synth);
    } else if (*c_ingest) {
      cmd_ingest(ctx, ingest_o);
    } else if (*c_build) {
      if (!range.empty()) build.range = range;
      cmd_build(ctx, build);
    } else if (*c_train) {
      if (c_train->count("--stride")) train.stride = train_stride;
      if (!train_report.empty()) train.report = train_report;
      cmd_train(ctx, train);
    } else if (*c_sweep) {
      cmd_sweep(ctx, sweep);
    } else if (*c_predict) {
      if (!fixtures.empty()) predict.fixtures = fixtures;
      if (!record.empty()) predict.record = record;
      if (!now.empty()) predict.now = now;
      if (!anchor.empty()) predict.anchor = anchor;
      if (predict.repeat_daily) {
        std::signal(SIGINT, on_stop_signal);
        std::signal(SIGTERM, on_stop_signal);
      }
      cmd_predict(ctx, predict, live_factory);
    } else if (*c_serve) {
      cmd_serve(ctx, serve);
    }
  } catch (const InputError& e) {
    err << "error [" << e.code() << "]: " << e.what() << '\n';
    return kUsageError;
  } catch (const Error& e) {
    err << "error [" << e.code() << "]: " << e.what() << '\n';
    return kInternalError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternalError;
  }
  return kOk;
}

}  // namespace wildfire::cli
