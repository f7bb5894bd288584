#include "warp_harmonic/run_io.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "warp_harmonic/error.hpp"

namespace warp_harmonic {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double x = std::stod(text, &used);
    if (used == text.size()) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError("config key '" + key + "' expects a number, got '" + text + "'");
}

long parse_long(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const long x = std::stol(text, &used);
    if (used == text.size()) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError("config key '" + key + "' expects an integer, got '" + text + "'");
}

}  // namespace

RunConfig RunConfig::from_text(const std::string& text) {
  RunConfig c;
  std::stringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("config line " + std::to_string(lineno) + " is not key=value: '" + t +
                        "'");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string val = trim(t.substr(eq + 1));
    if (key == "command") {
      c.command_ = val;
    } else {
      c.values_[key] = val;
    }
  }
  return c;
}

RunConfig RunConfig::from_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str());
}

std::string RunConfig::to_text() const {
  std::string out;
  if (!command_.empty()) out += "command=" + command_ + "\n";
  for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
  return out;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key.empty() || key.find('=') != std::string::npos || key == "command") {
    throw ConfigError("invalid config key '" + key + "'");
  }
  if (value.find('\n') != std::string::npos) {
    throw ConfigError("config value for '" + key + "' spans lines");
  }
  values_[key] = trim(value);
}

void RunConfig::merge(const RunConfig& other) {
  if (!other.command_.empty()) command_ = other.command_;
  for (const auto& [k, v] : other.values_) values_[k] = v;
}

std::string RunConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing required config key '" + key + "'");
  return it->second;
}

std::string RunConfig::get(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  return has(key) ? parse_double(key, get(key)) : fallback;
}

double RunConfig::get_double(const std::string& key) const { return parse_double(key, get(key)); }

long RunConfig::get_int(const std::string& key, long fallback) const {
  return has(key) ? parse_long(key, get(key)) : fallback;
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get(key);
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("config key '" + key + "' expects a boolean, got '" + v + "'");
}

std::vector<double> RunConfig::get_doubles(const std::string& key,
                                           const std::vector<double>& fallback) const {
  if (!has(key)) return fallback;
  std::vector<double> out;
  for (const auto& s : split_list(get(key))) out.push_back(parse_double(key, s));
  return out;
}

std::vector<long> RunConfig::get_ints(const std::string& key,
                                      const std::vector<long>& fallback) const {
  if (!has(key)) return fallback;
  std::vector<long> out;
  for (const auto& s : split_list(get(key))) out.push_back(parse_long(key, s));
  return out;
}

std::vector<std::string> RunConfig::get_strings(const std::string& key) const {
  return has(key) ? split_list(get(key)) : std::vector<std::string>{};
}

std::uint64_t RunConfig::hash() const {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : to_text()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string RunConfig::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
  return buf;
}

std::string version_string() {
#ifdef WARP_HARMONIC_VERSION
  return WARP_HARMONIC_VERSION;
#else
  return "unknown";
#endif
}

fs::path create_run_directory(const fs::path& base, const std::string& tag) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", &tm);
  fs::create_directories(base);
  const std::string stem = std::string(stamp) + "-" + (tag.empty() ? "run" : tag);
  for (int k = 0; k < 1000; ++k) {
    const fs::path p = base / (k == 0 ? stem : stem + "-" + std::to_string(k + 1));
    if (fs::create_directory(p)) return p;
  }
  throw ConfigError("could not create a run directory under " + base.string());
}

nlohmann::json make_manifest(const RunConfig& config, const nlohmann::json& extra) {
  nlohmann::json m = {{"command", config.command()},
                      {"version", version_string()},
                      {"config", config.to_text()},
                      {"config_hash", config.hash_hex()},
                      {"seed", config.get_int("seed", 0)}};
  if (extra.is_object()) {
    for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
  }
  return m;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

}  // namespace warp_harmonic
