#include <iostream>
#include <memory>

#include "wildfire/cli/app.hpp"
#include "wildfire/realtime_http.hpp"

namespace {

wildfire::cli::WeatherSources live_sources(const std::optional<std::filesystem::path>& record_dir) {
  using namespace wildfire::realtime;
  const auto cfg = live_config_from_env();
  wildfire::cli::WeatherSources s;
  s.weather = std::make_unique<HttpWeatherProvider>(cfg.base_url, cfg.weather_key);
  if (!cfg.geocode_key.empty()) s.geocoder = std::make_unique<HttpGeocodeProvider>(cfg.base_url, cfg.geocode_key);
  s.active = s.weather.get();
  if (record_dir) {
    s.recorder = std::make_unique<RecordingWeatherProvider>(*s.weather, *record_dir);
    s.active = s.recorder.get();
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  return wildfire::cli::run(argc, argv, std::cout, std::cerr, live_sources);
}
