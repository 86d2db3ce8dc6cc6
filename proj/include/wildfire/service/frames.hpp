#pragma once

#include <algorithm>
#include <filesystem>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "wildfire/core/date.hpp"
#include "wildfire/core/error.hpp"
#include "wildfire/dataset.hpp"
#include "wildfire/ingest.hpp"
#include "wildfire/ml/model.hpp"
#include "wildfire/ml/samples.hpp"
#include "wildfire/ml/size_class.hpp"
#include "wildfire/realtime.hpp"

// Map-query model and controller: immutable tables shared by all sessions,
// per-session view state, and the message -> frames mapping.
namespace wildfire::service {

enum class LayerId { temperature, precipitation, wind, fuel, ml_prediction, realtime_prediction };

inline constexpr std::string_view to_string(LayerId l) {
  switch (l) {
    case LayerId::temperature: return "temperature";
    case LayerId::precipitation: return "precipitation";
    case LayerId::wind: return "wind";
    case LayerId::fuel: return "fuel";
    case LayerId::ml_prediction: return "ml_prediction";
    case LayerId::realtime_prediction: return "realtime_prediction";
  }
  return "";
}

inline std::optional<LayerId> parse_layer(std::string_view s) {
  for (const auto l : {LayerId::temperature, LayerId::precipitation, LayerId::wind, LayerId::fuel,
                       LayerId::ml_prediction, LayerId::realtime_prediction})
    if (to_string(l) == s) return l;
  return std::nullopt;
}

inline constexpr std::string_view unit_label(LayerId l) {
  switch (l) {
    case LayerId::temperature: return "\xC2\xB0" "C";
    case LayerId::precipitation: return "mm";
    case LayerId::wind: return "m/s";
    case LayerId::fuel: return "%";
    case LayerId::ml_prediction:
    case LayerId::realtime_prediction: return "acres";
  }
  return "";
}

inline bool is_prediction_layer(LayerId l) {
  return l == LayerId::ml_prediction || l == LayerId::realtime_prediction;
}

// Re-reads the prediction artifact whenever its modification time changes.
class ArtifactCache {
 public:
  explicit ArtifactCache(std::filesystem::path path) : path_(std::move(path)) {}

  std::shared_ptr<const realtime::PredictionArtifact> get() {
    std::error_code ec;
    const auto mtime = std::filesystem::last_write_time(path_, ec);
    {
      const std::shared_lock lock(mutex_);
      if (!ec && current_ && mtime == mtime_) return current_;
      if (ec && !current_) throw InputError("NoPrediction", "no prediction artifact at " + path_.string());
      if (ec) return current_;
    }
    const std::unique_lock lock(mutex_);
    if (!current_ || mtime != mtime_) {
      current_ = std::make_shared<const realtime::PredictionArtifact>(realtime::load_artifact(path_));
      mtime_ = mtime;
    }
    return current_;
  }

 private:
  std::filesystem::path path_;
  std::shared_mutex mutex_;
  std::shared_ptr<const realtime::PredictionArtifact> current_;
  std::filesystem::file_time_type mtime_{};
};

struct FireMarker {
  Date first, last;
  double lat, lon, acres;
};

class ServiceData {
 public:
  ServiceData(std::vector<dataset::JoinedDailyRecord> table, std::vector<ingest::FireEvent> fires,
              std::optional<ml::Model> model, std::optional<std::filesystem::path> artifact_path,
              DateRange date_bounds = kStudyRange)
      : model_(std::move(model)), bounds_(date_bounds) {
    for (auto& r : table) by_fips_[r.fips].push_back(std::move(r));
    for (auto& [fips, rows] : by_fips_) {
      std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.date < b.date; });
      for (std::size_t i = 0; i < rows.size(); ++i) by_date_[rows[i].date].push_back(&rows[i]);
    }
    for (const auto& e : fires) {
      const Date last = e.end_date.value_or(e.start_date);
      fires_.push_back({e.start_date, last, e.location.lat(), e.location.lon(), e.size_acres});
    }
    std::sort(fires_.begin(), fires_.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    if (artifact_path) artifact_ = std::make_unique<ArtifactCache>(*artifact_path);
  }

  const DateRange& date_bounds() const { return bounds_; }
  bool has_model() const { return model_.has_value(); }

  nlohmann::json choropleth(LayerId layer, Date date) const {
    std::map<std::string, double> values;
    std::map<std::string, std::string> classes;
    if (layer == LayerId::ml_prediction) {
      if (!model_) throw InputError("ModelUnavailable", "no trained model loaded");
      for (const auto& [fips, rows] : by_fips_) {
        if (const auto v = predict_trailing(rows, date)) {
          values[fips] = *v;
          classes[fips] = std::string(1, ml::classify_fire_size(*v));
        }
      }
    } else if (const auto it = by_date_.find(date); it != by_date_.end()) {
      for (const auto* r : it->second) values[r->fips] = historical_value(layer, *r);
    }
    auto frame = make_frame(layer, values, classes);
    frame["date"] = date.iso();
    return frame;
  }

  nlohmann::json realtime_frame() const {
    if (!artifact_) throw InputError("NoPrediction", "no prediction artifact configured");
    const auto art = artifact_->get();
    std::map<std::string, double> values;
    std::map<std::string, std::string> classes;
    // Several cities may share a county; the largest prediction is shown.
    for (const auto& r : art->rows) {
      const auto it = values.find(r.fips);
      if (it == values.end() || r.predicted_sum_acres > it->second) {
        values[r.fips] = r.predicted_sum_acres;
        classes[r.fips] = std::string(1, r.size_class);
      }
    }
    return make_frame(LayerId::realtime_prediction, values, classes);
  }

  nlohmann::json fires(Date date) const {
    nlohmann::json events = nlohmann::json::array();
    for (const auto& f : fires_) {
      if (f.first > date) break;
      if (f.last >= date) events.push_back({{"lat", f.lat}, {"lon", f.lon}, {"acres", f.acres}});
    }
    return {{"type", "fires"}, {"date", date.iso()}, {"events", std::move(events)}};
  }

  // Prediction on the 21-day window ending at `date`, if complete.
  std::optional<double> predict_trailing(const std::vector<dataset::JoinedDailyRecord>& rows, Date date) const {
    const int w = realtime::kWindowDays;
    const auto it = std::lower_bound(rows.begin(), rows.end(), date,
                                     [](const auto& r, Date d) { return r.date < d; });
    if (it == rows.end() || it->date != date || it - rows.begin() < w - 1) return std::nullopt;
    const auto first = it - (w - 1);
    if (first->date != date - (w - 1)) return std::nullopt;
    const std::vector<dataset::JoinedDailyRecord> slice(first, it + 1);
    const auto samples = dataset::window_aggregate(slice, w, w);
    if (samples.size() != 1) return std::nullopt;
    return model_->predict(samples.front().x);
  }

  const std::map<std::string, std::vector<dataset::JoinedDailyRecord>>& rows_by_fips() const { return by_fips_; }

 private:
  static double historical_value(LayerId layer, const dataset::JoinedDailyRecord& r) {
    switch (layer) {
      case LayerId::temperature: return r.tavg;
      case LayerId::precipitation: return r.prcp;
      case LayerId::wind: return r.wind;
      case LayerId::fuel: return r.fmc;
      default: return 0.0;
    }
  }

  static nlohmann::json make_frame(LayerId layer, const std::map<std::string, double>& values,
                                   const std::map<std::string, std::string>& classes) {
    nlohmann::json frame = {{"type", "choropleth"}, {"layer", to_string(layer)}, {"unit", unit_label(layer)}};
    if (values.empty()) {
      frame["min"] = nullptr;
      frame["max"] = nullptr;
    } else {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (const auto& [k, v] : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      frame["min"] = lo;
      frame["max"] = hi;
    }
    frame["values"] = values;
    if (is_prediction_layer(layer)) frame["classes"] = classes;
    return frame;
  }

  std::map<std::string, std::vector<dataset::JoinedDailyRecord>> by_fips_;
  std::unordered_map<Date, std::vector<const dataset::JoinedDailyRecord*>> by_date_;
  std::vector<FireMarker> fires_;
  std::optional<ml::Model> model_;
  std::unique_ptr<ArtifactCache> artifact_;
  DateRange bounds_;
};

struct SessionState {
  Date date = kStudyRange.first;
  LayerId layer = LayerId::temperature;
  bool fires_enabled = false;
};

inline nlohmann::json error_frame(std::string_view code, std::string_view message) {
  return {{"type", "error"}, {"code", code}, {"message", message}};
}

inline nlohmann::json mode_frame(bool controls_disabled) {
  return {{"type", "mode"}, {"controls_disabled", controls_disabled}};
}

namespace detail {

inline std::vector<nlohmann::json> view_frames(const ServiceData& data, const SessionState& s) {
  if (s.layer == LayerId::realtime_prediction) return {data.realtime_frame()};
  std::vector<nlohmann::json> out{data.choropleth(s.layer, s.date)};
  if (s.fires_enabled) out.push_back(data.fires(s.date));
  return out;
}

}  // namespace detail

// Applies one client message to the session and returns the frames to push,
// in order. Never throws: failures become error frames.
inline std::vector<nlohmann::json> handle_message(const ServiceData& data, SessionState& session,
                                                  std::string_view text) {
  try {
    nlohmann::json msg;
    try {
      msg = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception&) {
      return {error_frame("InvalidMessage", "message is not valid JSON")};
    }
    if (!msg.is_object() || !msg.contains("op") || !msg["op"].is_string())
      return {error_frame("InvalidMessage", "message needs a string 'op' field")};
    const auto op = msg["op"].get<std::string>();

    if (op == "set_date") {
      if (!msg.contains("date") || !msg["date"].is_string())
        return {error_frame("InvalidMessage", "set_date needs a 'date' string")};
      const auto raw = msg["date"].get<std::string>();
      const auto date = Date::parse(raw);
      if (!date) return {error_frame("InvalidMessage", "bad date '" + raw + "', expected YYYY-MM-DD")};
      if (!data.date_bounds().contains(*date))
        return {error_frame("DateOutOfRange", raw + " is outside " + data.date_bounds().first.iso() + ".." +
                                                  data.date_bounds().last.iso())};
      session.date = *date;
      return detail::view_frames(data, session);
    }

    if (op == "set_layer") {
      if (!msg.contains("layer") || !msg["layer"].is_string())
        return {error_frame("InvalidMessage", "set_layer needs a 'layer' string")};
      const auto name = msg["layer"].get<std::string>();
      const auto layer = parse_layer(name);
      if (!layer) return {error_frame("UnknownLayer", "unknown layer '" + name + "'")};
      const bool was_realtime = session.layer == LayerId::realtime_prediction;
      session.layer = *layer;
      std::vector<nlohmann::json> out;
      const bool now_realtime = *layer == LayerId::realtime_prediction;
      if (now_realtime || was_realtime) out.push_back(mode_frame(now_realtime));
      // The mode notice still goes out when the view itself cannot be built.
      try {
        for (auto& f : detail::view_frames(data, session)) out.push_back(std::move(f));
      } catch (const Error& e) {
        out.push_back(error_frame(e.code(), e.what()));
      }
      return out;
    }

    if (op == "set_fires") {
      if (!msg.contains("enabled") || !msg["enabled"].is_boolean())
        return {error_frame("InvalidMessage", "set_fires needs a boolean 'enabled'")};
      session.fires_enabled = msg["enabled"].get<bool>();
      if (session.fires_enabled && session.layer != LayerId::realtime_prediction) return {data.fires(session.date)};
      return {};
    }

    return {error_frame("UnknownOp", "unknown op '" + op + "'")};
  } catch (const Error& e) {
    return {error_frame(e.code(), e.what())};
  } catch (const std::exception& e) {
    return {error_frame("InternalError", e.what())};
  }
}

}  // namespace wildfire::service
