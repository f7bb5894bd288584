#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace warp_harmonic {

/// Flat key=value configuration of one CLI run. Keys are kept sorted, so the text form
/// is canonical and round-trips losslessly.
class RunConfig {
 public:
  RunConfig() = default;
  explicit RunConfig(std::string command) : command_(std::move(command)) {}

  /// Parses key=value lines; blank lines and '#' comments are skipped. A "command" key
  /// sets the command. Throws ConfigError on malformed lines.
  static RunConfig from_text(const std::string& text);
  static RunConfig from_file(const std::filesystem::path& path);

  std::string to_text() const;

  const std::string& command() const { return command_; }
  void set_command(std::string c) { command_ = std::move(c); }

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, const std::string& value);
  /// Copies every entry of `other` over this config (later wins).
  void merge(const RunConfig& other);

  /// Typed access; ConfigError names the key on a missing or malformed value.
  std::string get(const std::string& key) const;
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  double get_double(const std::string& key) const;
  long get_int(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key,
                                  const std::vector<double>& fallback) const;
  std::vector<long> get_ints(const std::string& key, const std::vector<long>& fallback) const;
  std::vector<std::string> get_strings(const std::string& key) const;

  const std::map<std::string, std::string>& values() const { return values_; }

  /// 64-bit FNV-1a of to_text().
  std::uint64_t hash() const;
  std::string hash_hex() const;

 private:
  std::string command_;
  std::map<std::string, std::string> values_;
};

std::string version_string();

/// A fresh directory base/<UTC timestamp>-<tag>; a numeric suffix avoids collisions.
std::filesystem::path create_run_directory(const std::filesystem::path& base,
                                           const std::string& tag);

/// {command, version, config, config_hash, seed, ...extra}. No timestamps, so two runs
/// of the same config produce identical manifests.
nlohmann::json make_manifest(const RunConfig& config, const nlohmann::json& extra = {});

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace warp_harmonic
