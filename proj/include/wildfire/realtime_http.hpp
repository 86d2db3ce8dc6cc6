#pragma once

// Live providers over HTTP(S). Kept apart from realtime.hpp so that only the
// CLI pulls in the HTTP client.

#include <cstdlib>
#include <string>

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include "httplib.h"
#include "wildfire/realtime.hpp"

namespace wildfire::realtime {

struct HttpEndpoint {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path prefix without trailing slash
};

inline HttpEndpoint split_base_url(const std::string& base) {
  const auto scheme = base.find("://");
  if (scheme == std::string::npos) throw InputError("InvalidInput", "base URL must include a scheme: " + base);
  const auto slash = base.find('/', scheme + 3);
  HttpEndpoint e{base.substr(0, slash), slash == std::string::npos ? "" : base.substr(slash)};
  while (!e.prefix.empty() && e.prefix.back() == '/') e.prefix.pop_back();
  return e;
}

namespace detail {

inline nlohmann::json get_json(const HttpEndpoint& ep, const std::string& path, const httplib::Params& params,
                               const std::string& what) {
  httplib::Client client(ep.origin);
  client.set_connection_timeout(10);
  client.set_read_timeout(30);
  const auto res = client.Get(ep.prefix + path, params, httplib::Headers{});
  if (!res) throw ProviderUnavailable(what + ": " + httplib::to_string(res.error()));
  if (res->status == 404) return nullptr;
  if (res->status >= 500 || res->status == 429)
    throw ProviderUnavailable(what + ": HTTP " + std::to_string(res->status));
  if (res->status != 200) throw InputError("ProviderRejected", what + ": HTTP " + std::to_string(res->status));
  try {
    return nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception& e) {
    throw ProviderUnavailable(what + ": malformed response: " + e.what());
  }
}

}  // namespace detail

// GET <base>/daily?lat&lon&start&end&access_key -> observation payload.
class HttpWeatherProvider final : public WeatherProvider {
 public:
  HttpWeatherProvider(std::string base_url, std::string api_key)
      : endpoint_(split_base_url(base_url)), key_(std::move(api_key)) {}

  std::vector<WeatherObservation> daily(const std::string& city, const geo::GeoPoint& point, DateRange range) override {
    const auto doc = detail::get_json(endpoint_, "/daily",
                                      {{"lat", csv::format_double(point.lat())},
                                       {"lon", csv::format_double(point.lon())},
                                       {"start", range.first.iso()},
                                       {"end", range.last.iso()},
                                       {"access_key", key_}},
                                      "weather for " + city);
    if (doc.is_null()) return {};
    return observations_from_json(doc);
  }

 private:
  HttpEndpoint endpoint_;
  std::string key_;
};

// GET <base>/geocode?city&key -> {"lat","lon","fips"?}; 404 means unknown.
class HttpGeocodeProvider final : public GeocodeProvider {
 public:
  HttpGeocodeProvider(std::string base_url, std::string api_key)
      : endpoint_(split_base_url(base_url)), key_(std::move(api_key)) {}

  GeocodeResult lookup(const std::string& city) override {
    const auto doc = detail::get_json(endpoint_, "/geocode", {{"city", city}, {"key", key_}}, "geocode " + city);
    if (doc.is_null()) throw UnknownCity("no geocoding result for '" + city + "'");
    try {
      return FixtureGeocodeProvider::parse_entry(doc);
    } catch (const nlohmann::json::exception& e) {
      throw ProviderUnavailable("geocode " + city + ": malformed response: " + e.what());
    }
  }

 private:
  HttpEndpoint endpoint_;
  std::string key_;
};

struct LiveConfig {
  std::string base_url;
  std::string weather_key;
  std::string geocode_key;
};

inline LiveConfig live_config_from_env() {
  const auto env = [](const char* name) {
    const char* v = std::getenv(name);
    return v ? std::string(v) : std::string();
  };
  LiveConfig c{env("WEATHER_API_BASE_URL"), env("WEATHER_API_KEY"), env("GEOCODE_API_KEY")};
  if (c.base_url.empty()) throw InputError("MissingInput", "WEATHER_API_BASE_URL is not set");
  if (c.weather_key.empty()) throw InputError("MissingInput", "WEATHER_API_KEY is not set");
  return c;
}

}  // namespace wildfire::realtime
