#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "wildfire/core/error.hpp"
#include "wildfire/geo.hpp"

namespace wildfire::geo {

namespace detail {

inline Ring parse_ring(const nlohmann::json& coords) {
  Ring ring;
  ring.reserve(coords.size());
  for (const auto& pt : coords) {
    if (!pt.is_array() || pt.size() < 2) throw InvalidGeometry("ring vertex must be [lon, lat]");
    ring.emplace_back(pt[1].get<double>(), pt[0].get<double>());
  }
  if (!ring.empty() && !(ring.front() == ring.back())) ring.push_back(ring.front());
  return ring;
}

// Shoelace area and centroid in planar lon/lat.
struct RingMoments {
  double area = 0.0;
  double cx = 0.0;
  double cy = 0.0;
};

inline RingMoments ring_moments(const Ring& ring) {
  RingMoments m;
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    const double x0 = ring[i].lon(), y0 = ring[i].lat();
    const double x1 = ring[i + 1].lon(), y1 = ring[i + 1].lat();
    const double c = x0 * y1 - x1 * y0;
    m.area += c;
    m.cx += (x0 + x1) * c;
    m.cy += (y0 + y1) * c;
  }
  m.area *= 0.5;
  if (m.area != 0.0) {
    m.cx /= 6.0 * m.area;
    m.cy /= 6.0 * m.area;
  }
  return m;
}

}  // namespace detail

// Parses a GeoJSON FeatureCollection of counties. Each feature needs a 5-digit
// GEOID property and Polygon/MultiPolygon geometry in lon/lat order. The
// centroid is INTPTLAT/INTPTLON when present, otherwise the area-weighted
// centroid of the outer rings minus holes.
inline std::vector<FipsUnit> parse_counties_geojson(const nlohmann::json& doc) {
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection")
    throw InvalidGeometry("counties file is not a GeoJSON FeatureCollection");
  std::vector<FipsUnit> units;
  for (const auto& feature : doc.at("features")) {
    const auto& props = feature.at("properties");
    std::string code = props.at("GEOID").is_string() ? props.at("GEOID").get<std::string>()
                                                     : std::to_string(props.at("GEOID").get<long>());
    if (code.size() < 5) code = std::string(5 - code.size(), '0') + code;

    const auto& geom = feature.at("geometry");
    const std::string type = geom.at("type").get<std::string>();
    std::vector<std::vector<Ring>> polygons;
    if (type == "Polygon") {
      polygons.emplace_back();
      for (const auto& r : geom.at("coordinates")) polygons.back().push_back(detail::parse_ring(r));
    } else if (type == "MultiPolygon") {
      for (const auto& poly : geom.at("coordinates")) {
        polygons.emplace_back();
        for (const auto& r : poly) polygons.back().push_back(detail::parse_ring(r));
      }
    } else {
      throw InvalidGeometry("unsupported geometry type '" + type + "' for " + code);
    }

    double area = 0.0, sx = 0.0, sy = 0.0;
    std::vector<Ring> rings;
    for (auto& poly : polygons) {
      for (std::size_t i = 0; i < poly.size(); ++i) {
        const auto m = detail::ring_moments(poly[i]);
        const double a = (i == 0 ? 1.0 : -1.0) * std::abs(m.area);
        area += a;
        sx += a * m.cx;
        sy += a * m.cy;
        rings.push_back(std::move(poly[i]));
      }
    }

    GeoPoint centroid;
    const auto number = [&](const char* key) -> std::optional<double> {
      if (!props.contains(key)) return std::nullopt;
      const auto& v = props.at(key);
      if (v.is_number()) return v.get<double>();
      if (v.is_string()) return std::stod(v.get<std::string>());
      return std::nullopt;
    };
    const auto ilat = number("INTPTLAT");
    const auto ilon = number("INTPTLON");
    if (ilat && ilon) {
      centroid = GeoPoint(*ilat, *ilon);
    } else if (area != 0.0) {
      centroid = GeoPoint(sy / area, sx / area);
    } else {
      throw InvalidGeometry("county " + code + " has zero area and no interior point");
    }
    units.emplace_back(std::move(code), centroid, std::move(rings));
  }
  std::sort(units.begin(), units.end(),
            [](const FipsUnit& a, const FipsUnit& b) { return a.code() < b.code(); });
  return units;
}

inline std::vector<FipsUnit> load_counties(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("MissingInput", "cannot read counties file " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidGeometry("counties file " + path.string() + ": " + e.what());
  }
  try {
    return parse_counties_geojson(doc);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidGeometry("counties file " + path.string() + ": " + e.what());
  }
}

// Writes units back as a FeatureCollection with GEOID and INTPTLAT/INTPTLON.
inline nlohmann::json counties_to_geojson(const std::vector<FipsUnit>& units) {
  nlohmann::json features = nlohmann::json::array();
  for (const auto& u : units) {
    nlohmann::json rings = nlohmann::json::array();
    for (const auto& ring : u.boundary()) {
      nlohmann::json coords = nlohmann::json::array();
      for (const auto& p : ring) coords.push_back({p.lon(), p.lat()});
      rings.push_back(std::move(coords));
    }
    features.push_back({{"type", "Feature"},
                        {"properties",
                         {{"GEOID", u.code()},
                          {"INTPTLAT", u.centroid().lat()},
                          {"INTPTLON", u.centroid().lon()}}},
                        {"geometry", {{"type", "Polygon"}, {"coordinates", std::move(rings)}}}});
  }
  return {{"type", "FeatureCollection"}, {"features", std::move(features)}};
}

}  // namespace wildfire::geo
