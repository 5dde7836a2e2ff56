#pragma once

#include <map>
#include <string>
#include <vector>

namespace auctionvi {

const char* artifact_version();

// Resolved run parameters embedded into every output file: "# key=value"
// lines in CSV headers and a "config" object in JSON documents.
struct RunConfig {
  std::map<std::string, std::string> entries;

  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, double value);
  void set(const std::string& key, int value);
  void set(const std::string& key, unsigned long long value);

  std::vector<std::string> csv_header_lines() const;
  std::string to_json_object() const;

  // flat key=value file; '#' starts a comment
  static RunConfig from_file(const std::string& path);
};

// Wrap a JSON payload with the resolved config and artifact version.
std::string with_config_envelope(const std::string& payload_json,
                                 const RunConfig& config);

std::string format_double(double v);  // shortest round-trip formatting

}  // namespace auctionvi
