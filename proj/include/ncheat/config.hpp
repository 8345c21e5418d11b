#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace ncheat {

// Flat key = value configuration with typed accessors, a documented default
// table, and unknown-key rejection. '#' starts a comment.
class Config {
 public:
  Config();  // defaults only

  void load_file(const std::string& path);
  void set(const std::string& key, const std::string& value);  // must be a known key

  double get_double(const std::string& key) const;
  int get_int(const std::string& key) const;
  uint64_t get_u64(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  std::vector<double> get_list(const std::string& key) const;  // comma-separated

  const std::map<std::string, std::string>& entries() const { return values_; }
  static const std::map<std::string, std::string>& defaults();

 private:
  std::map<std::string, std::string> values_;
};

// 64-bit FNV-1a, used to fingerprint emitted CSV bodies in the manifest.
uint64_t fnv1a(const std::string& data);

struct SuiteCount {
  std::string name;
  int passed = 0;
  int failed = 0;
};

struct RunManifest {
  std::string subcommand;
  std::string version;
  uint64_t master_seed = 0;
  std::string started_at, finished_at;
  std::map<std::string, std::string> config_snapshot;
  std::vector<SuiteCount> suites;
  std::vector<std::pair<std::string, uint64_t>> outputs;  // path, body hash

  std::string to_json() const;
  void write(const std::string& path) const;
};

std::string timestamp_now();

inline constexpr const char* kVersion = "nc-heat 0.1.0";

}  // namespace ncheat
