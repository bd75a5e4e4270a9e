#pragma once

// Strict JSON run configuration: every object level rejects unknown keys and
// every numeric field is range-checked at load time, so a bad config fails
// before any computation or artifact output.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace jrm {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Json = nlohmann::ordered_json;

struct GridSpec {
  double start = 0.0, stop = 0.0;
  int steps = 1;  // number of points, inclusive of both ends
  std::vector<double> values() const;
};

struct RunSettings {
  std::string command;
  std::uint64_t seed = 1;
  int workers = 0;  // 0 = hardware concurrency
  std::string format = "csv";
  std::string out_dir = ".";
};

struct LoadedConfig {
  Json raw;     // verbatim document, echoed into the manifest
  Json params;  // "params" block (empty object when absent)
  std::string command;  // empty when absent
  bool has_seed = false, has_workers = false, has_format = false, has_out = false;
  std::uint64_t seed = 1;
  int workers = 0;
  std::string format = "csv";
  std::string out_dir = ".";
};

LoadedConfig load_config(const std::string& path);

// Schema helpers shared by the command parsers. `path` names the enclosing
// object in error messages (e.g. "params.network.mode_a").
void require_keys(const Json& obj, std::initializer_list<const char*> allowed,
                  const std::string& path);
double get_num(const Json& obj, const char* key, double def, double lo, double hi,
               const std::string& path);
double require_num(const Json& obj, const char* key, double lo, double hi,
                   const std::string& path);
std::int64_t get_int(const Json& obj, const char* key, std::int64_t def, std::int64_t lo,
                     std::int64_t hi, const std::string& path);
std::uint64_t get_u64(const Json& obj, const char* key, std::uint64_t def,
                      const std::string& path);
bool get_bool(const Json& obj, const char* key, bool def, const std::string& path);
std::string get_str(const Json& obj, const char* key, const std::string& def,
                    const std::vector<std::string>& allowed, const std::string& path);
GridSpec require_grid(const Json& obj, const char* key, double lo, double hi, int min_steps,
                      const std::string& path);
GridSpec get_grid(const Json& obj, const char* key, const GridSpec& def, double lo, double hi,
                  int min_steps, const std::string& path);

}  // namespace jrm
