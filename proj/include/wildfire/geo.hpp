#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wildfire/core/error.hpp"

namespace wildfire::geo {

inline constexpr double kEarthRadiusKm = 6371.0;

class GeoPoint {
 public:
  GeoPoint() = default;
  GeoPoint(double lat, double lon) : lat_(lat), lon_(lon) {
    if (!std::isfinite(lat) || !std::isfinite(lon) || lat < -90.0 || lat > 90.0 ||
        lon < -180.0 || lon > 180.0)
      throw InvalidGeometry("coordinate out of range: lat=" + std::to_string(lat) +
                            " lon=" + std::to_string(lon));
  }

  double lat() const { return lat_; }
  double lon() const { return lon_; }

  bool operator==(const GeoPoint&) const = default;

 private:
  double lat_ = 0.0;
  double lon_ = 0.0;
};

inline double haversine_km(const GeoPoint& a, const GeoPoint& b) {
  constexpr double kRad = std::numbers::pi / 180.0;
  const double dlat = (b.lat() - a.lat()) * kRad;
  const double dlon = (b.lon() - a.lon()) * kRad;
  const double s1 = std::sin(dlat / 2.0);
  const double s2 = std::sin(dlon / 2.0);
  double h = s1 * s1 + std::cos(a.lat() * kRad) * std::cos(b.lat() * kRad) * s2 * s2;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

inline bool is_fips_code(std::string_view code) {
  return code.size() == 5 &&
         std::all_of(code.begin(), code.end(), [](char c) { return c >= '0' && c <= '9'; });
}

// Closed ring: at least 4 vertices, first == last.
using Ring = std::vector<GeoPoint>;

class FipsUnit {
 public:
  FipsUnit(std::string code, GeoPoint centroid, std::vector<Ring> boundary = {})
      : code_(std::move(code)), centroid_(centroid), boundary_(std::move(boundary)) {
    if (!is_fips_code(code_)) throw InvalidGeometry("invalid FIPS code '" + code_ + "'");
    for (const auto& ring : boundary_) {
      if (ring.size() < 4 || !(ring.front() == ring.back()))
        throw InvalidGeometry("ring of " + code_ + " is not a closed ring of >= 4 vertices");
    }
    compute_bbox();
  }

  const std::string& code() const { return code_; }
  std::string state_code() const { return code_.substr(0, 2); }
  std::string county_code() const { return code_.substr(2, 3); }
  const GeoPoint& centroid() const { return centroid_; }
  const std::vector<Ring>& boundary() const { return boundary_; }

  bool bbox_contains(const GeoPoint& p) const {
    return !boundary_.empty() && p.lon() >= min_lon_ && p.lon() <= max_lon_ &&
           p.lat() >= min_lat_ && p.lat() <= max_lat_;
  }

 private:
  void compute_bbox() {
    min_lon_ = min_lat_ = std::numeric_limits<double>::infinity();
    max_lon_ = max_lat_ = -std::numeric_limits<double>::infinity();
    for (const auto& ring : boundary_) {
      for (const auto& p : ring) {
        min_lon_ = std::min(min_lon_, p.lon());
        max_lon_ = std::max(max_lon_, p.lon());
        min_lat_ = std::min(min_lat_, p.lat());
        max_lat_ = std::max(max_lat_, p.lat());
      }
    }
  }

  std::string code_;
  GeoPoint centroid_;
  std::vector<Ring> boundary_;
  double min_lon_ = 0, max_lon_ = 0, min_lat_ = 0, max_lat_ = 0;
};

enum class StationKind { TP, WIND, FUEL };

inline constexpr std::string_view to_string(StationKind k) {
  switch (k) {
    case StationKind::TP: return "TP";
    case StationKind::WIND: return "WIND";
    case StationKind::FUEL: return "FUEL";
  }
  return "?";
}

inline std::optional<StationKind> parse_station_kind(std::string_view s) {
  if (s == "TP") return StationKind::TP;
  if (s == "WIND") return StationKind::WIND;
  if (s == "FUEL") return StationKind::FUEL;
  return std::nullopt;
}

struct Station {
  std::string id;
  StationKind kind = StationKind::TP;
  GeoPoint location;
  double coverage = 1.0;
};

struct SiteAssignment {
  struct Site {
    std::string station_id;
    double distance_km = 0.0;
  };

  std::string fips_code;
  std::map<StationKind, Site> sites;

  const Site* site(StationKind k) const {
    const auto it = sites.find(k);
    return it == sites.end() ? nullptr : &it->second;
  }
};

// Nearest station of each kind present in `stations`, per unit. Distance ties go
// to the lexicographically smallest station id. Output is ordered by FIPS code.
inline std::vector<SiteAssignment> assign_stations(const std::vector<FipsUnit>& units,
                                                   const std::vector<Station>& stations,
                                                   const std::vector<StationKind>& required = {}) {
  std::map<StationKind, std::vector<const Station*>> by_kind;
  for (const auto& s : stations) by_kind[s.kind].push_back(&s);
  for (const auto k : required) {
    if (by_kind[k].empty())
      throw EmptyStationSet("no stations of kind " + std::string(to_string(k)));
  }
  std::erase_if(by_kind, [](const auto& kv) { return kv.second.empty(); });

  std::vector<SiteAssignment> out;
  out.reserve(units.size());
  for (const auto& unit : units) {
    SiteAssignment a;
    a.fips_code = unit.code();
    for (const auto& [kind, candidates] : by_kind) {
      const Station* best = nullptr;
      double best_km = 0.0;
      for (const Station* s : candidates) {
        const double d = haversine_km(unit.centroid(), s->location);
        if (!best || d < best_km || (d == best_km && s->id < best->id)) {
          best = s;
          best_km = d;
        }
      }
      a.sites[kind] = {best->id, best_km};
    }
    out.push_back(std::move(a));
  }
  std::sort(out.begin(), out.end(),
            [](const auto& x, const auto& y) { return x.fips_code < y.fips_code; });
  return out;
}

namespace detail {

inline bool on_segment(const GeoPoint& p, const GeoPoint& a, const GeoPoint& b) {
  constexpr double kEps = 1e-12;
  const double cross = (b.lon() - a.lon()) * (p.lat() - a.lat()) -
                       (b.lat() - a.lat()) * (p.lon() - a.lon());
  if (std::abs(cross) > kEps) return false;
  return p.lon() >= std::min(a.lon(), b.lon()) - kEps && p.lon() <= std::max(a.lon(), b.lon()) + kEps &&
         p.lat() >= std::min(a.lat(), b.lat()) - kEps && p.lat() <= std::max(a.lat(), b.lat()) + kEps;
}

}  // namespace detail

// Even-odd rule over every ring of the unit (holes and multipolygon parts
// included); a point on any edge counts as inside. Coordinates are treated as
// planar lon/lat.
inline bool contains(const FipsUnit& unit, const GeoPoint& p) {
  if (!unit.bbox_contains(p)) return false;
  bool inside = false;
  for (const auto& ring : unit.boundary()) {
    for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
      const GeoPoint& a = ring[i];
      const GeoPoint& b = ring[j];
      if (detail::on_segment(p, a, b)) return true;
      if ((a.lat() > p.lat()) != (b.lat() > p.lat())) {
        const double x = a.lon() + (p.lat() - a.lat()) * (b.lon() - a.lon()) / (b.lat() - a.lat());
        if (p.lon() < x) inside = !inside;
      }
    }
  }
  return inside;
}

struct LocateResult {
  std::string code;
  bool fallback = false;  // no polygon contained the point; nearest centroid used
};

inline LocateResult locate_fips(const GeoPoint& p, const std::vector<FipsUnit>& units) {
  if (units.empty()) throw InputError("InvalidInput", "locate_fips: no units");
  const FipsUnit* hit = nullptr;
  for (const auto& u : units) {
    if ((!hit || u.code() < hit->code()) && contains(u, p)) hit = &u;
  }
  if (hit) return {hit->code(), false};

  const FipsUnit* nearest = nullptr;
  double best = 0.0;
  for (const auto& u : units) {
    const double d = haversine_km(p, u.centroid());
    if (!nearest || d < best || (d == best && u.code() < nearest->code())) {
      nearest = &u;
      best = d;
    }
  }
  return {nearest->code(), true};
}

struct ReconcileResult {
  std::string code;
  bool conflict = false;
};

// Reported state+county codes take precedence over the geometric lookup when
// both parts are present.
inline ReconcileResult reconcile_fips(std::string_view located,
                                      std::optional<std::string_view> reported_state,
                                      std::optional<std::string_view> reported_county) {
  if (!is_fips_code(located)) throw InvalidReportedCode("located code is not a FIPS code");
  const auto present = [](const std::optional<std::string_view>& s) { return s && !s->empty(); };
  if (!present(reported_state) || !present(reported_county)) return {std::string(located), false};

  // Digit strings shorter than the field width are zero-padded ("6" -> "06").
  const auto pad = [&](std::string_view s, std::size_t width) {
    const bool digits = std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
    if (!digits || s.size() > width)
      throw InvalidReportedCode("malformed reported FIPS '" + std::string(*reported_state) + "'/'" +
                                std::string(*reported_county) + "'");
    return std::string(width - s.size(), '0') + std::string(s);
  };
  const std::string reported = pad(*reported_state, 2) + pad(*reported_county, 3);
  return {reported, reported != located};
}

}  // namespace wildfire::geo
