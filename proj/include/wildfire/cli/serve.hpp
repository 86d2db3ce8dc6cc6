#pragma once

#include <functional>
#include <sstream>

#include "wildfire/cli/commands.hpp"
#include "wildfire/service/server.hpp"

namespace wildfire::cli {

struct ServeOptions {
  int port = 8080;
  std::string address = "0.0.0.0";
  fs::path model_path = "model.json";
  fs::path prediction_artifact = "predictions.json";
  fs::path joined = "joined.csv";
  fs::path fires = "canonical/fires.csv";
  fs::path counties = "counties.geojson";
  fs::path static_dir = "static";
  std::size_t threads = 2;
};

inline std::shared_ptr<const service::ServiceData> load_service_data(const Context& ctx, const ServeOptions& o,
                                                                     RunManifest& manifest) {
  const auto joined = ctx.resolve(o.joined);
  auto table = read_joined(joined);
  manifest.input(joined);

  std::vector<ingest::FireEvent> fires;
  const auto fires_path = ctx.resolve(o.fires);
  if (fs::exists(fires_path)) {
    auto in = open_input(fires_path);
    fires = ingest::parse_fire_csv(in, fires_path.filename().string()).records;
    manifest.input(fires_path);
  } else {
    *ctx.err << "warning: no fire events at " << fires_path.string() << "; fire frames will be empty\n";
  }

  std::optional<ml::Model> model;
  const auto model_path = ctx.resolve(o.model_path);
  if (fs::exists(model_path)) {
    model = ml::load_model(model_path);
    realtime::check_feature_parity(*model);
    manifest.input(model_path);
  } else {
    *ctx.err << "warning: no model at " << model_path.string() << "; ml_prediction layer disabled\n";
  }

  const auto artifact = ctx.resolve(o.prediction_artifact);
  if (!fs::exists(artifact))
    *ctx.err << "warning: no prediction artifact at " << artifact.string() << " yet; it is picked up when written\n";
  return std::make_shared<const service::ServiceData>(std::move(table), std::move(fires), std::move(model), artifact);
}

// Blocks until SIGINT/SIGTERM. `on_ready` runs once the port is bound.
inline void cmd_serve(const Context& ctx, const ServeOptions& o,
                      const std::function<void(service::Server&)>& on_ready = {}) {
  if (o.port < 0 || o.port > 65535) throw InputError("InvalidInput", "--port must be in 0..65535");
  RunManifest manifest("serve");
  manifest.config("port", o.port);
  manifest.config("address", o.address);

  const auto counties_path = ctx.resolve(o.counties);
  std::string counties_text;
  {
    auto in = open_input(counties_path);
    std::stringstream ss;
    ss << in.rdbuf();
    counties_text = ss.str();
    (void)geo::load_counties(counties_path);  // validates before serving
    manifest.input(counties_path);
  }
  auto data = load_service_data(ctx, o, manifest);

  service::ServerConfig config;
  config.address = o.address;
  config.port = static_cast<unsigned short>(o.port);
  config.counties_geojson = std::move(counties_text);
  config.static_dir = ctx.resolve(o.static_dir);
  config.threads = std::max<std::size_t>(1, o.threads);

  std::unique_ptr<service::Server> server;
  try {
    server = std::make_unique<service::Server>(data, config);
  } catch (const boost::system::system_error& e) {
    throw InputError("PortUnavailable", "cannot listen on " + o.address + ":" + std::to_string(o.port) + ": " + e.what());
  }
  server->stop_on_signals();
  manifest.config("bound_port", server->port());
  manifest.phase("startup_seconds");
  manifest.write(ctx.resolve("serve.manifest.json"));

  *ctx.out << "listening on port " << server->port() << std::endl;
  if (on_ready) on_ready(*server);
  server->run();
  *ctx.out << "shutdown complete" << std::endl;
}

}  // namespace wildfire::cli
