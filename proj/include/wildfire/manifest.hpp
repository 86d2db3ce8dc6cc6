#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <string>

#include "json.hpp"
#include "wildfire/core/digest.hpp"
#include "wildfire/realtime.hpp"

namespace wildfire {

// Record of one command run: what went in, what came out (with content
// digests), the effective configuration, and how long it took.
class RunManifest {
 public:
  explicit RunManifest(std::string command)
      : command_(std::move(command)), started_(std::chrono::steady_clock::now()) {}

  void config(const std::string& key, nlohmann::json value) { config_[key] = std::move(value); }
  void result(const std::string& key, nlohmann::json value) { result_[key] = std::move(value); }

  void input(const std::filesystem::path& p) { inputs_[p.string()] = digest(p); }
  void output(const std::filesystem::path& p) { outputs_[p.string()] = digest(p); }

  void input_dir(const std::filesystem::path& dir) { add_tree(dir, inputs_); }
  void output_dir(const std::filesystem::path& dir) { add_tree(dir, outputs_); }

  void phase(const std::string& name) {
    const auto now = std::chrono::steady_clock::now();
    timings_[name] = std::chrono::duration<double>(now - last_).count();
    last_ = now;
  }

  const std::map<std::string, std::string>& outputs() const { return outputs_; }

  nlohmann::json to_json() const {
    nlohmann::json t = timings_;
    t["total_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
    return {{"command", command_},
            {"config", config_},
            {"inputs", inputs_},
            {"outputs", outputs_},
            {"result", result_},
            {"timings", t}};
  }

  void write(const std::filesystem::path& path) const { realtime::detail::write_text_atomic(path, to_json().dump(2) + "\n"); }

 private:
  static std::string digest(const std::filesystem::path& p) {
    return std::filesystem::is_regular_file(p) ? "sha256:" + sha256_file(p) : std::string("missing");
  }

  static void add_tree(const std::filesystem::path& dir, std::map<std::string, std::string>& into) {
    if (!std::filesystem::is_directory(dir)) return;
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::recursive_directory_iterator(dir))
      if (e.is_regular_file() && e.path().filename() != "manifest.json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) into[f.string()] = digest(f);
  }

  std::string command_;
  std::chrono::steady_clock::time_point started_;
  std::chrono::steady_clock::time_point last_ = started_;
  nlohmann::json config_ = nlohmann::json::object();
  nlohmann::json result_ = nlohmann::json::object();
  std::map<std::string, std::string> inputs_, outputs_;
  std::map<std::string, double> timings_;
};

}  // namespace wildfire
