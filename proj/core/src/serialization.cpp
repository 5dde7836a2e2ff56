#include "auctionvi/serialization.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "auctionvi/errors.hpp"

#ifndef AUCTIONVI_VERSION
#define AUCTIONVI_VERSION "0.0.0"
#endif

namespace auctionvi {

const char* artifact_version() { return AUCTIONVI_VERSION; }

std::string format_double(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

void RunConfig::set(const std::string& key, const std::string& value) {
  entries[key] = value;
}
void RunConfig::set(const std::string& key, double value) {
  entries[key] = format_double(value);
}
void RunConfig::set(const std::string& key, int value) {
  entries[key] = std::to_string(value);
}
void RunConfig::set(const std::string& key, unsigned long long value) {
  entries[key] = std::to_string(value);
}

std::vector<std::string> RunConfig::csv_header_lines() const {
  std::vector<std::string> lines;
  lines.push_back(std::string("version=") + artifact_version());
  for (const auto& [k, v] : entries) lines.push_back(k + "=" + v);
  return lines;
}

std::string RunConfig::to_json_object() const {
  nlohmann::json j;
  for (const auto& [k, v] : entries) j[k] = v;
  return j.dump();
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  RunConfig cfg;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (!key.empty()) cfg.entries[key] = val;
  }
  return cfg;
}

std::string with_config_envelope(const std::string& payload_json,
                                 const RunConfig& config) {
  nlohmann::json j;
  j["version"] = artifact_version();
  j["config"] = nlohmann::json::parse(config.to_json_object());
  j["result"] = nlohmann::json::parse(payload_json);
  return j.dump(2);
}

}  // namespace auctionvi
