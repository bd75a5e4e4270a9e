#include "jrm/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace jrm {

std::vector<double> GridSpec::values() const {
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(steps));
  if (steps == 1) {
    v.push_back(start);
    return v;
  }
  const double h = (stop - start) / static_cast<double>(steps - 1);
  for (int i = 0; i < steps; ++i) v.push_back(start + h * static_cast<double>(i));
  v.back() = stop;  // land exactly on the endpoint
  return v;
}

void require_keys(const Json& obj, std::initializer_list<const char*> allowed,
                  const std::string& path) {
  if (!obj.is_object())
    throw ConfigError(path + " must be a JSON object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) {
      if (it.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) throw ConfigError("unknown key '" + it.key() + "' in " + path);
  }
}

namespace {

std::string fmt_range(double lo, double hi) {
  std::ostringstream os;
  os << "[" << lo << ", " << hi << "]";
  return os.str();
}

double checked_num(const Json& v, double lo, double hi, const std::string& where) {
  if (!v.is_number()) throw ConfigError(where + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x) || x < lo || x > hi)
    throw ConfigError(where + " out of range " + fmt_range(lo, hi));
  return x;
}

}  // namespace

double get_num(const Json& obj, const char* key, double def, double lo, double hi,
               const std::string& path) {
  if (!obj.contains(key)) return def;
  return checked_num(obj.at(key), lo, hi, path + "." + key);
}

double require_num(const Json& obj, const char* key, double lo, double hi,
                   const std::string& path) {
  if (!obj.contains(key)) throw ConfigError(path + "." + key + " is required");
  return checked_num(obj.at(key), lo, hi, path + "." + key);
}

std::int64_t get_int(const Json& obj, const char* key, std::int64_t def, std::int64_t lo,
                     std::int64_t hi, const std::string& path) {
  if (!obj.contains(key)) return def;
  const Json& v = obj.at(key);
  const std::string where = path + "." + std::string(key);
  if (!v.is_number_integer()) throw ConfigError(where + " must be an integer");
  const std::int64_t x = v.get<std::int64_t>();
  if (x < lo || x > hi)
    throw ConfigError(where + " out of range [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "]");
  return x;
}

std::uint64_t get_u64(const Json& obj, const char* key, std::uint64_t def,
                      const std::string& path) {
  if (!obj.contains(key)) return def;
  const Json& v = obj.at(key);
  const std::string where = path + "." + std::string(key);
  if (!v.is_number_integer()) throw ConfigError(where + " must be a non-negative integer");
  if (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)
    throw ConfigError(where + " must be a non-negative integer");
  return v.get<std::uint64_t>();
}

bool get_bool(const Json& obj, const char* key, bool def, const std::string& path) {
  if (!obj.contains(key)) return def;
  const Json& v = obj.at(key);
  if (!v.is_boolean()) throw ConfigError(path + "." + key + " must be a boolean");
  return v.get<bool>();
}

std::string get_str(const Json& obj, const char* key, const std::string& def,
                    const std::vector<std::string>& allowed, const std::string& path) {
  if (!obj.contains(key)) return def;
  const Json& v = obj.at(key);
  const std::string where = path + "." + std::string(key);
  if (!v.is_string()) throw ConfigError(where + " must be a string");
  const std::string s = v.get<std::string>();
  if (!allowed.empty()) {
    bool ok = false;
    for (const auto& a : allowed)
      if (s == a) {
        ok = true;
        break;
      }
    if (!ok) {
      std::string msg = where + " must be one of {";
      for (std::size_t i = 0; i < allowed.size(); ++i)
        msg += (i ? ", " : "") + allowed[i];
      throw ConfigError(msg + "}");
    }
  }
  return s;
}

namespace {

GridSpec parse_grid(const Json& g, double lo, double hi, int min_steps,
                    const std::string& where) {
  require_keys(g, {"start", "stop", "steps"}, where);
  GridSpec spec;
  spec.start = require_num(g, "start", lo, hi, where);
  spec.stop = require_num(g, "stop", lo, hi, where);
  spec.steps = static_cast<int>(get_int(g, "steps", 0, 1, 2000000, where));
  if (!g.contains("steps")) throw ConfigError(where + ".steps is required");
  if (spec.steps < min_steps)
    throw ConfigError(where + ".steps must be at least " + std::to_string(min_steps));
  if (spec.steps > 1 && !(spec.stop > spec.start))
    throw ConfigError(where + ": stop must exceed start when steps > 1");
  return spec;
}

}  // namespace

GridSpec require_grid(const Json& obj, const char* key, double lo, double hi, int min_steps,
                      const std::string& path) {
  if (!obj.contains(key)) throw ConfigError(path + "." + key + " is required");
  return parse_grid(obj.at(key), lo, hi, min_steps, path + "." + key);
}

GridSpec get_grid(const Json& obj, const char* key, const GridSpec& def, double lo, double hi,
                  int min_steps, const std::string& path) {
  if (!obj.contains(key)) return def;
  return parse_grid(obj.at(key), lo, hi, min_steps, path + "." + key);
}

LoadedConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const std::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  require_keys(doc, {"command", "seed", "workers", "format", "out", "params"}, "config");

  LoadedConfig cfg;
  cfg.raw = doc;
  cfg.command = get_str(doc, "command", "", {}, "config");
  if (doc.contains("seed")) {
    cfg.has_seed = true;
    cfg.seed = get_u64(doc, "seed", 1, "config");
  }
  if (doc.contains("workers")) {
    cfg.has_workers = true;
    cfg.workers = static_cast<int>(get_int(doc, "workers", 0, 0, 1024, "config"));
  }
  if (doc.contains("format")) {
    cfg.has_format = true;
    cfg.format = get_str(doc, "format", "csv", {"csv", "json"}, "config");
  }
  if (doc.contains("out")) {
    cfg.has_out = true;
    cfg.out_dir = get_str(doc, "out", ".", {}, "config");
    if (cfg.out_dir.empty()) throw ConfigError("config.out must be a non-empty path");
  }
  if (doc.contains("params")) {
    if (!doc.at("params").is_object())
      throw ConfigError("config.params must be a JSON object");
    cfg.params = doc.at("params");
  } else {
    cfg.params = Json::object();
  }
  return cfg;
}

}  // namespace jrm
