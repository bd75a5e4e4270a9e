#include "jrm/commands.hpp"

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "jrm/amp_network.hpp"
#include "jrm/circuit.hpp"
#include "jrm/config.hpp"
#include "jrm/csv.hpp"
#include "jrm/eigenmodes.hpp"
#include "jrm/ground_state.hpp"
#include "jrm/kerr.hpp"
#include "jrm/readout.hpp"
#include "jrm/sweep.hpp"

namespace jrm {
namespace {

constexpr const char* kVersion = "0.1.0";
constexpr double kPi = 3.14159265358979323846;

struct CommandContext {
  RunSettings settings;
  Json params;
  Json config_echo;  // raw config document, or null when no --config given
};

struct CommandOutput {
  std::vector<std::string> artifacts;  // file names, relative to out dir
  std::int64_t cells_total = 0;
  std::int64_t cells_failed = 0;
  Json failed_cells = Json::array();
  Json extra;  // command-specific manifest block
};

std::string stem(const RunSettings& s) {
  return s.command + "-seed" + std::to_string(s.seed);
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open output file: " + p.string());
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("failed writing output file: " + p.string());
}

void write_json_file(const std::filesystem::path& p, const Json& doc) {
  write_text(p, doc.dump(2) + "\n");
}

// Tabular artifact holding typed cells; rendered as CSV ("%.16e" doubles) or
// as a JSON document {command, columns, rows}. NaN becomes "nan" in CSV and
// null in JSON; both renderings are byte-stable across runs and worker counts.
class ArtifactRows {
 public:
  explicit ArtifactRows(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void row(std::vector<Json> vals) {
    if (vals.size() != columns_.size())
      throw std::logic_error("artifact row width does not match columns");
    rows_.push_back(std::move(vals));
  }

  std::string csv_text() const {
    csv::Table t(columns_);
    for (const auto& r : rows_) {
      std::vector<std::string> cells;
      cells.reserve(r.size());
      for (const auto& v : r) cells.push_back(cell_text(v));
      t.row(std::move(cells));
    }
    return t.text();
  }

  Json json_doc(const std::string& command) const {
    Json doc;
    doc["command"] = command;
    doc["columns"] = columns_;
    Json rows = Json::array();
    for (const auto& r : rows_) {
      Json jr = Json::array();
      for (const auto& v : r) jr.push_back(v);
      rows.push_back(std::move(jr));
    }
    doc["rows"] = std::move(rows);
    return doc;
  }

  std::size_t size() const { return rows_.size(); }

 private:
  static std::string cell_text(const Json& v) {
    if (v.is_number_integer()) return csv::num(v.get<std::int64_t>());
    if (v.is_number_float()) return csv::num(v.get<double>());
    throw std::logic_error("unsupported artifact cell type");
  }

  std::vector<std::string> columns_;
  std::vector<std::vector<Json>> rows_;
};

void emit_rows(const CommandContext& ctx, const ArtifactRows& rows, CommandOutput& out) {
  ensure_out_dir(ctx.settings.out_dir);
  const bool as_json = ctx.settings.format == "json";
  const std::string name = stem(ctx.settings) + (as_json ? ".json" : ".csv");
  const auto path = std::filesystem::path(ctx.settings.out_dir) / name;
  if (as_json)
    write_json_file(path, rows.json_doc(ctx.settings.command));
  else
    write_text(path, rows.csv_text());
  out.artifacts.push_back(name);
}

// ---- shared parameter parsers (strict: unknown keys rejected) ----

std::array<double, 4> parse_arr4(const Json& obj, const char* key,
                                 std::array<double, 4> def, double lo, double hi,
                                 const std::string& path) {
  if (!obj.contains(key)) return def;
  const Json& v = obj.at(key);
  const std::string where = path + "." + key;
  if (!v.is_array() || v.size() != 4)
    throw ConfigError(where + " must be an array of 4 numbers");
  std::array<double, 4> out{};
  for (int i = 0; i < 4; ++i) {
    const Json& e = v[static_cast<std::size_t>(i)];
    if (!e.is_number())
      throw ConfigError(where + "[" + std::to_string(i) + "] must be a number");
    const double x = e.get<double>();
    if (!std::isfinite(x) || x < lo || x > hi)
      throw ConfigError(where + "[" + std::to_string(i) + "] out of range");
    out[static_cast<std::size_t>(i)] = x;
  }
  return out;
}

JrmParams parse_ring(const Json& p, const std::string& path, bool allow_asymmetry) {
  JrmParams base;
  base.beta = get_num(p, "beta", base.beta, 1e-6, 100.0, path);
  base.alpha = get_num(p, "alpha", base.alpha, 0.0, 0.999, path);
  if (allow_asymmetry) {
    base.junction_asymmetry =
        parse_arr4(p, "junction_asymmetry", base.junction_asymmetry, 0.1, 10.0, path);
    base.loop_flux_asymmetry =
        parse_arr4(p, "loop_flux_asymmetry", base.loop_flux_asymmetry, -kPi, kPi, path);
  }
  base.validate();
  return base;
}

CapacitanceSet parse_caps(const Json& p, const std::string& path) {
  CapacitanceSet caps;
  if (!p.contains("caps")) return caps;
  const Json& j = p.at("caps");
  const std::string where = path + ".caps";
  require_keys(j, {"c1", "c2", "c3", "c4"}, where);
  caps.c1 = get_num(j, "c1", 1.0, 1e-9, 1e9, where);
  caps.c2 = get_num(j, "c2", 1.0, 1e-9, 1e9, where);
  caps.c3 = get_num(j, "c3", 1.0, 1e-9, 1e9, where);
  caps.c4 = get_num(j, "c4", 1.0, 1e-9, 1e9, where);
  caps.validate();
  return caps;
}

ModeSpec parse_mode(const Json& j, const std::string& path) {
  require_keys(j, {"center_frequency", "kappa", "kappa_ext", "static_detuning"}, path);
  ModeSpec m;
  m.center_frequency = get_num(j, "center_frequency", 0.0, -1e9, 1e9, path);
  m.kappa = require_num(j, "kappa", 1e-9, 1e9, path);
  m.kappa_ext = get_num(j, "kappa_ext", m.kappa, 1e-12, 1e9, path);
  m.static_detuning = get_num(j, "static_detuning", 0.0, -1e9, 1e9, path);
  if (m.kappa_ext > m.kappa)
    throw ConfigError(path + ": kappa_ext must not exceed kappa");
  return m;
}

PumpedNetwork parse_network(const Json& p, const std::string& parent) {
  if (!p.contains("network")) throw ConfigError(parent + ".network is required");
  const Json& j = p.at("network");
  const std::string path = parent + ".network";
  require_keys(j, {"mode_a", "mode_b", "pumps"}, path);
  if (!j.contains("mode_a") || !j.contains("mode_b"))
    throw ConfigError(path + " requires mode_a and mode_b");
  PumpedNetwork net;
  net.mode_a = parse_mode(j.at("mode_a"), path + ".mode_a");
  net.mode_b = parse_mode(j.at("mode_b"), path + ".mode_b");
  if (j.contains("pumps")) {
    const Json& ps = j.at("pumps");
    if (!ps.is_array() || ps.size() > 2)
      throw ConfigError(path + ".pumps must be an array of at most 2 pumps");
    bool have_g = false, have_c = false;
    for (std::size_t k = 0; k < ps.size(); ++k) {
      const std::string pp = path + ".pumps[" + std::to_string(k) + "]";
      const Json& pj = ps[k];
      require_keys(pj, {"kind", "g", "theta"}, pp);
      const std::string kind =
          get_str(pj, "kind", "", {"gain", "conversion"}, pp);
      if (kind.empty()) throw ConfigError(pp + ".kind is required");
      PumpSpec spec;
      spec.g = require_num(pj, "g", 0.0, 1e9, pp);
      spec.theta = get_num(pj, "theta", 0.0, -100.0, 100.0, pp);
      if (kind == "gain") {
        if (have_g) throw ConfigError(pp + ": duplicate gain pump");
        net.pump_g = spec;
        have_g = true;
      } else {
        if (have_c) throw ConfigError(pp + ": duplicate conversion pump");
        net.pump_c = spec;
        have_c = true;
      }
    }
  }
  net.validate();
  return net;
}

ReadoutModel parse_readout(const Json& p, const std::string& parent) {
  if (!p.contains("readout")) throw ConfigError(parent + ".readout is required");
  const Json& j = p.at("readout");
  const std::string path = parent + ".readout";
  require_keys(j,
               {"separation", "sigma", "eta", "alignment", "t1_us", "gamma_up_per_us",
                "integration_time_us"},
               path);
  ReadoutModel m;
  m.separation = get_num(j, "separation", 4.0, 0.0, 1e6, path);
  m.sigma = get_num(j, "sigma", 1.0, 1e-9, 1e6, path);
  m.eta = get_num(j, "eta", 1.0, 1e-6, 1.0, path);
  m.alignment = get_num(j, "alignment", 0.0, -7.0, 7.0, path);
  m.t1_us = get_num(j, "t1_us", 0.0, 0.0, 1e12, path);
  m.gamma_up_per_us = get_num(j, "gamma_up_per_us", 0.0, 0.0, 1e6, path);
  m.integration_time_us = get_num(j, "integration_time_us", 1.0, 1e-9, 1e9, path);
  m.validate();
  return m;
}

BlochState parse_prep(const Json& p, const std::string& parent) {
  BlochState s;  // default: ground state (0, 0, -1)
  if (!p.contains("prep")) return s;
  const Json& j = p.at("prep");
  const std::string path = parent + ".prep";
  require_keys(j, {"x", "y", "z"}, path);
  s.x = get_num(j, "x", 0.0, -1.0, 1.0, path);
  s.y = get_num(j, "y", 0.0, -1.0, 1.0, path);
  s.z = get_num(j, "z", -1.0, -1.0, 1.0, path);
  if (s.purity() > 1.0 + 1e-9)
    throw ConfigError(path + ": Bloch vector length must not exceed 1");
  return s;
}

RingMode parse_ring_mode(const Json& p, const char* key, const char* def,
                         const std::string& path) {
  const std::string s = get_str(p, key, def, {"a", "b", "c"}, path);
  if (s == "a") return RingMode::A;
  if (s == "b") return RingMode::B;
  return RingMode::C;
}

// ---- command runners ----

CommandOutput run_phase_diagram(const CommandContext& ctx) {
  const Json& p = ctx.params;
  require_keys(p, {"axis", "axis_grid", "flux_grid", "beta", "alpha", "n_seeds"}, "params");
  const std::string axis_name = get_str(p, "axis", "beta", {"beta", "alpha"}, "params");
  const SweepAxis axis = axis_name == "beta" ? SweepAxis::Beta : SweepAxis::Alpha;
  const GridSpec ag = require_grid(p, "axis_grid", axis == SweepAxis::Beta ? 1e-6 : 0.0,
                                   axis == SweepAxis::Beta ? 100.0 : 0.999, 2, "params");
  const GridSpec fg = require_grid(p, "flux_grid", 0.0, 4.0 * kPi, 2, "params");
  const int n_seeds = static_cast<int>(get_int(p, "n_seeds", 256, 8, 65536, "params"));
  const JrmParams base = parse_ring(p, "params", false);

  const PhaseDiagram pd = phase_diagram(base, axis, ag.values(), fg.values(), n_seeds,
                                        ctx.settings.seed, ctx.settings.workers);

  ArtifactRows rows({axis_name, "phi_ext", "degeneracy", "ground_energy", "failed_seeds"});
  CommandOutput out;
  out.cells_total = static_cast<std::int64_t>(pd.cells.size());
  for (std::size_t ia = 0; ia < pd.axis_values.size(); ++ia) {
    for (std::size_t jf = 0; jf < pd.flux_values.size(); ++jf) {
      const PhaseDiagramCell& c = pd.at(ia, jf);
      rows.row({pd.axis_values[ia], pd.flux_values[jf],
                static_cast<std::int64_t>(c.degeneracy),
                c.ok ? Json(c.ground_energy) : Json(std::nan("")),
                static_cast<std::int64_t>(c.failed_seeds)});
      if (!c.ok) {
        ++out.cells_failed;
        if (out.failed_cells.size() < 200) {
          Json cell;
          cell[axis_name] = pd.axis_values[ia];
          cell["phi_ext"] = pd.flux_values[jf];
          out.failed_cells.push_back(std::move(cell));
        }
      }
    }
  }
  emit_rows(ctx, rows, out);
  return out;
}

CommandOutput run_null_point(const CommandContext& ctx) {
  const Json& p = ctx.params;
  require_keys(p, {"beta", "alpha", "n_seeds"}, "params");
  JrmParams base = parse_ring(p, "params", false);
  if (base.alpha >= 0.95) throw ConfigError("params.alpha must be below 0.95");
  const int n_seeds = static_cast<int>(get_int(p, "n_seeds", 256, 8, 65536, "params"));

  const NullPoint np = null_flux(base, n_seeds, ctx.settings.seed);

  ArtifactRows rows({"alpha", "phi_star", "stable"});
  rows.row({base.alpha, np.phi_star, static_cast<std::int64_t>(np.stable ? 1 : 0)});
  CommandOutput out;
  out.cells_total = 1;
  emit_rows(ctx, rows, out);
  return out;
}

CommandOutput run_null_trajectory(const CommandContext& ctx) {
  const Json& p = ctx.params;
  require_keys(p, {"beta", "alpha_grid", "n_seeds"}, "params");
  const JrmParams base = parse_ring(p, "params", false);
  const GridSpec ag = require_grid(p, "alpha_grid", 0.0, 0.6, 2, "params");
  const int n_seeds = static_cast<int>(get_int(p, "n_seeds", 256, 8, 65536, "params"));

  const auto pts = null_trajectory(base, ag.values(), n_seeds, ctx.settings.seed,
                                   ctx.settings.workers);

  ArtifactRows rows({"alpha", "phi_star", "stable"});
  for (const auto& pt : pts)
    rows.row({pt.alpha, pt.phi_star, static_cast<std::int64_t>(pt.stable ? 1 : 0)});
  CommandOutput out;
  out.cells_total = static_cast<std::int64_t>(pts.size());
  emit_rows(ctx, rows, out);
  return out;
}

CommandOutput run_kerr_map(const CommandContext& ctx) {
  const Json& p = ctx.params;
  require_keys(p,
               {"beta", "alpha", "junction_asymmetry", "loop_flux_asymmetry", "probe_mode",
                "pump_mode", "flux_grid", "photon_grid", "freq_scale", "check_degeneracy",
                "n_seeds"},
               "params");
  const JrmParams base = parse_ring(p, "params", true);
  const RingMode probe = parse_ring_mode(p, "probe_mode", "a", "params");
  const RingMode pump = parse_ring_mode(p, "pump_mode", "c", "params");
  const GridSpec fg = require_grid(p, "flux_grid", 0.0, 4.0 * kPi, 1, "params");
  const GridSpec ng = require_grid(p, "photon_grid", 0.0, 1e9, 1, "params");
  const double freq_scale = get_num(p, "freq_scale", 1.0, 1e-30, 1e30, "params");
  const bool check_degeneracy = get_bool(p, "check_degeneracy", false, "params");
  const int n_seeds = static_cast<int>(get_int(p, "n_seeds", 64, 8, 65536, "params"));

  const DuffingMap dm = duffing_map(base, probe, pump, fg.values(), ng.values(), freq_scale,
                                    check_degeneracy, n_seeds, ctx.settings.seed);

  ArtifactRows rows({"phi_ext", "n", "shift", "flagged"});
  for (std::size_t i = 0; i < dm.flux_values.size(); ++i)
    for (std::size_t j = 0; j < dm.photon_values.size(); ++j) {
      const DuffingCell& c = dm.at(i, j);
      rows.row({dm.flux_values[i], dm.photon_values[j], c.shift,
                static_cast<std::int64_t>(c.flagged ? 1 : 0)});
    }
  CommandOutput out;
  out.cells_total = static_cast<std::int64_t>(dm.cells.size());
  emit_rows(ctx, rows, out);
  return out;
}

CommandOutput run_modes(const CommandContext& ctx) {
  const Json& p = ctx.params;
  require_keys(p, {"beta", "alpha", "caps", "flux_grid"}, "params");
  const JrmParams base = parse_ring(p, "params", false);
  const CapacitanceSet caps = parse_caps(p, "params");
  const GridSpec fg = require_grid(p, "flux_grid", 0.0, 4.0 * kPi, 1, "params");

  const auto curve = mode_frequencies_vs_flux(base, caps, fg.values());

  // Points where the linearization is unstable are in-band results (omega =
  // NaN, ok = 0), not sweep failures.
  ArtifactRows rows({"phi_ext", "omega_a", "omega_b", "omega_c", "ok"});
  for (const auto& pt : curve)
    rows.row({pt.phi_ext, pt.omega_a, pt.omega_b, pt.omega_c,
              static_cast<std::int64_t>(pt.ok ? 1 : 0)});
  CommandOutput out;
  out.cells_total = static_cast<std::int64_t>(curve.size());
  emit_rows(ctx, rows, out);
  return out;
}

CommandOutput run_scattering(const CommandContext& ctx) {
  const Json& p = ctx.params;
  require_keys(p, {"network", "omega_grid"}, "params");
  const PumpedNetwork net = parse_network(p, "params");
  const GridSpec og = require_grid(p, "omega_grid", -1e6, 1e6, 1, "params");

  static const char* kPorts[4] = {"a", "b", "ad", "bd"};
  std::vector<std::string> columns{"omega"};
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      columns.push_back(std::string("s_") + kPorts[r] + "_" + kPorts[c] + "_mag");
      columns.push_back(std::string("s_") + kPorts[r] + "_" + kPorts[c] + "_phase");
    }
  ArtifactRows rows(columns);
  const auto omegas = og.values();
  for (double w : omegas) {
    const SMatrix s = scattering(net, w);
    std::vector<Json> cells;
    cells.reserve(columns.size());
    cells.emplace_back(w);
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) {
        cells.emplace_back(std::abs(s[r][c]));
        cells.emplace_back(std::arg(s[r][c]));
      }
    rows.row(std::move(cells));
  }
  CommandOutput out;
  out.cells_total = static_cast<std::int64_t>(omegas.size());
  emit_rows(ctx, rows, out);
  return out;
}

CommandOutput run_gain_curves(const CommandContext& ctx) {
  const Json& p = ctx.params;
  require_keys(p, {"network", "omega_grid"}, "params");
  const PumpedNetwork net = parse_network(p, "params");
  const GridSpec og = require_grid(p, "omega_grid", -1e6, 1e6, 1, "params");

  const auto samples = gain_curves(net, og.values());

  ArtifactRows rows(
      {"omega", "refl_a_db", "refl_b_db", "trans_ba_db", "trans_ab_db", "conj_a_db"});
  for (const auto& s : samples)
    rows.row({s.omega, s.refl_a_db, s.refl_b_db, s.trans_ba_db, s.trans_ab_db, s.conj_a_db});
  CommandOutput out;
  out.cells_total = static_cast<std::int64_t>(samples.size());
  emit_rows(ctx, rows, out);
  return out;
}

CommandOutput run_two_tone(const CommandContext& ctx) {
  const Json& p = ctx.params;
  require_keys(p, {"network", "detuning_grid"}, "params");
  const PumpedNetwork net = parse_network(p, "params");
  const GridSpec dg = require_grid(p, "detuning_grid", -1e6, 1e6, 1, "params");

  const TwoToneResponse r = two_tone_spectrum(net, dg.values());

  ArtifactRows rows({"delta", "probe_db", "idler_db"});
  for (std::size_t i = 0; i < r.detunings.size(); ++i)
    rows.row({r.detunings[i], r.probe_db[i], r.idler_db[i]});
  CommandOutput out;
  out.cells_total = static_cast<std::int64_t>(r.detunings.size());
  emit_rows(ctx, rows, out);
  return out;
}

CommandOutput run_histogram(const CommandContext& ctx) {
  const Json& p = ctx.params;
  require_keys(p, {"readout", "prep", "n_shots", "n_bins", "span_sigmas"}, "params");
  const ReadoutModel model = parse_readout(p, "params");
  const BlochState prep = parse_prep(p, "params");
  const int n_shots = static_cast<int>(get_int(p, "n_shots", 20000, 1, 20000000, "params"));
  const int n_bins = static_cast<int>(get_int(p, "n_bins", 61, 4, 1024, "params"));
  const double span_sigmas = get_num(p, "span_sigmas", 6.0, 0.1, 100.0, "params");

  const auto samples = projective_histogram(prep, model, n_shots, ctx.settings.seed);

  const double half = model.separation + span_sigmas * model.sigma;
  const double bin_w = 2.0 * half / static_cast<double>(n_bins);
  std::vector<std::int64_t> counts(static_cast<std::size_t>(n_bins) * n_bins, 0);
  for (const auto& s : samples) {
    const int bi = static_cast<int>(std::floor((s.i + half) / bin_w));
    const int bq = static_cast<int>(std::floor((s.q + half) / bin_w));
    if (bi < 0 || bi >= n_bins || bq < 0 || bq >= n_bins) continue;  // clipped tails
    ++counts[static_cast<std::size_t>(bi) * n_bins + bq];
  }

  ArtifactRows rows({"i", "q", "count"});
  for (int bi = 0; bi < n_bins; ++bi)
    for (int bq = 0; bq < n_bins; ++bq)
      rows.row({-half + (bi + 0.5) * bin_w, -half + (bq + 0.5) * bin_w,
                counts[static_cast<std::size_t>(bi) * n_bins + bq]});
  CommandOutput out;
  out.cells_total = n_shots;
  emit_rows(ctx, rows, out);
  return out;
}

CommandOutput run_jumps(const CommandContext& ctx) {
  const Json& p = ctx.params;
  require_keys(p, {"readout", "duration_us", "window_us"}, "params");
  const ReadoutModel model = parse_readout(p, "params");
  const double duration = get_num(p, "duration_us", 2000.0, 1e-9, 1e7, "params");
  const double window = get_num(p, "window_us", 10.0, 1e-9, 1e5, "params");

  const JumpTrace tr = jump_trace(model, duration, window, ctx.settings.seed);

  ArtifactRows rows({"time_us", "raw", "filtered", "hidden", "detected"});
  for (std::size_t k = 0; k < tr.times.size(); ++k)
    rows.row({tr.times[k], tr.raw[k], tr.filtered[k], static_cast<std::int64_t>(tr.hidden[k]),
              static_cast<std::int64_t>(tr.detected[k])});
  CommandOutput out;
  out.cells_total = static_cast<std::int64_t>(tr.times.size());
  emit_rows(ctx, rows, out);
  return out;
}

BackactionProtocol parse_backaction(const Json& p) {
  require_keys(p,
               {"readout", "weak_ratio", "thermal_excitation", "n_shots", "n_bins",
                "bin_span_sigmas", "min_bin_shots"},
               "params");
  BackactionProtocol proto;
  proto.strong = parse_readout(p, "params");
  proto.weak_ratio = get_num(p, "weak_ratio", 0.2, 1e-6, 1.0, "params");
  proto.thermal_excitation = get_num(p, "thermal_excitation", 0.05, 0.0, 0.5, "params");
  proto.n_shots = static_cast<int>(get_int(p, "n_shots", 80000, 100, 20000000, "params"));
  proto.n_bins = static_cast<int>(get_int(p, "n_bins", 41, 5, 401, "params"));
  proto.bin_span_sigmas = get_num(p, "bin_span_sigmas", 4.0, 0.5, 20.0, "params");
  proto.min_bin_shots = static_cast<int>(get_int(p, "min_bin_shots", 50, 1, 1000000, "params"));
  if (proto.strong.alignment != 0.0)
    throw ConfigError("params.readout.alignment must be 0 for backaction protocols");
  return proto;
}

void tomogram_rows(const BackactionResult& res, ArtifactRows& rows) {
  for (const TomogramBin& bin : res.bins) {
    if (bin.n_total == 0) continue;
    std::vector<Json> cells;
    cells.emplace_back(bin.record_mean());
    for (int axis = 0; axis < 3; ++axis) {
      const double mean =
          bin.n[axis] ? static_cast<double>(bin.sum[axis]) / static_cast<double>(bin.n[axis])
                      : 0.0;
      cells.emplace_back(mean);
    }
    cells.emplace_back(bin.n_total);
    rows.row(std::move(cells));
  }
}

Json backaction_manifest(const BackactionResult& res) {
  Json extra;
  extra["n_prepared"] = res.n_prepared;
  extra["n_postselected"] = res.n_postselected;
  extra["weak_separation"] = res.weak_separation;
  extra["sigma"] = res.sigma;
  extra["template_contrast"] = res.template_contrast;
  return extra;
}

CommandOutput run_backaction(const CommandContext& ctx) {
  const BackactionProtocol proto = parse_backaction(ctx.params);
  const BackactionResult res =
      backaction_experiment(proto, ctx.settings.seed, ctx.settings.workers);

  ArtifactRows rows({"m_bin", "x", "y", "z", "n"});
  tomogram_rows(res, rows);
  CommandOutput out;
  out.cells_total = res.n_prepared;
  out.extra = backaction_manifest(res);
  emit_rows(ctx, rows, out);
  return out;
}

CommandOutput run_fit_eta(const CommandContext& ctx) {
  const BackactionProtocol proto = parse_backaction(ctx.params);
  const BackactionResult res =
      backaction_experiment(proto, ctx.settings.seed, ctx.settings.workers);

  EfficiencyFit fit;
  try {
    fit = fit_efficiency(res);
  } catch (const std::invalid_argument& e) {
    // Data-starved fits are a numerical failure of the run, not a config error.
    throw std::runtime_error(e.what());
  }

  ArtifactRows rows({"eta_hat", "eta_stderr", "lambda_hat", "lambda_stderr", "chi2",
                     "n_points", "template_contrast", "n_postselected"});
  rows.row({fit.eta, fit.eta_stderr, fit.lambda, fit.lambda_stderr, fit.chi2,
            static_cast<std::int64_t>(fit.n_points), res.template_contrast,
            res.n_postselected});
  CommandOutput out;
  out.cells_total = res.n_prepared;
  out.extra = backaction_manifest(res);
  emit_rows(ctx, rows, out);
  return out;
}

using Runner = CommandOutput (*)(const CommandContext&);

struct CommandEntry {
  const char* name;
  const char* description;
  Runner runner;
};

const CommandEntry kCommands[] = {
    {"phase-diagram", "ground-state degeneracy over (beta or alpha) x flux",
     run_phase_diagram},
    {"kerr-map", "Duffing frequency shift versus flux and photon number", run_kerr_map},
    {"null-point", "flux where all quartic (Kerr) coefficients vanish", run_null_point},
    {"null-trajectory", "Kerr-null flux versus stray inductance ratio", run_null_trajectory},
    {"modes", "normal-mode frequencies versus flux", run_modes},
    {"scattering", "full 4x4 scattering matrix versus probe offset", run_scattering},
    {"gain-curves", "reflection/transmission/conversion gain versus probe offset",
     run_gain_curves},
    {"two-tone", "probe and idler response versus detuning", run_two_tone},
    {"histogram", "single-shot IQ readout histogram", run_histogram},
    {"jumps", "continuously monitored telegraph trace", run_jumps},
    {"backaction", "weak-measurement backaction tomograms", run_backaction},
    {"fit-eta", "quantum efficiency fit from backaction tomograms", run_fit_eta},
};

Runner find_runner(const std::string& name) {
  for (const auto& e : kCommands)
    if (name == e.name) return e.runner;
  throw ConfigError("unknown command: " + name);
}

std::uint64_t parse_env_u64(const char* text, const char* var) {
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(text, &end, 10);
  if (errno != 0 || end == text || *end != '\0' || text[0] == '-')
    throw ConfigError(std::string(var) + " must be a non-negative integer, got '" + text + "'");
  return static_cast<std::uint64_t>(v);
}

int parse_env_int(const char* text, const char* var, long lo, long hi) {
  errno = 0;
  char* end = nullptr;
  const long v = std::strtol(text, &end, 10);
  if (errno != 0 || end == text || *end != '\0' || v < lo || v > hi)
    throw ConfigError(std::string(var) + " must be an integer in [" + std::to_string(lo) +
                      ", " + std::to_string(hi) + "], got '" + text + "'");
  return static_cast<int>(v);
}

void write_manifest(const CommandContext& ctx, const CommandOutput& out,
                    std::int64_t wall_ms) {
  Json m;
  m["command"] = ctx.settings.command;
  m["version"] = kVersion;
  m["seed"] = ctx.settings.seed;
  m["workers"] = ctx.settings.workers;
  m["workers_resolved"] = resolve_workers(ctx.settings.workers);
  m["format"] = ctx.settings.format;
  m["out"] = ctx.settings.out_dir;
  m["config"] = ctx.config_echo;
  m["artifacts"] = out.artifacts;
  m["cells_total"] = out.cells_total;
  m["cells_failed"] = out.cells_failed;
  m["failed_cells"] = out.failed_cells;
  if (!out.extra.is_null()) m["summary"] = out.extra;
  m["wall_time_ms"] = wall_ms;
  ensure_out_dir(ctx.settings.out_dir);
  const auto path =
      std::filesystem::path(ctx.settings.out_dir) / (stem(ctx.settings) + ".manifest.json");
  write_json_file(path, m);
}

int run_parsed(const std::string& command, const CLI::App* sub, const std::string& config_path,
               std::uint64_t flag_seed, int flag_workers, const std::string& flag_format,
               const std::string& flag_out) {
  CommandContext ctx;
  ctx.settings.command = command;

  LoadedConfig cfg;
  bool have_cfg = false;
  if (sub->count("--config") > 0) {
    cfg = load_config(config_path);
    have_cfg = true;
    if (!cfg.command.empty() && cfg.command != command)
      throw ConfigError("config.command '" + cfg.command + "' does not match subcommand '" +
                        command + "'");
  }

  // Precedence: flag > environment > config file > built-in default.
  ctx.settings.seed = 1;
  ctx.settings.workers = 0;
  ctx.settings.format = command == "fit-eta" ? "json" : "csv";
  ctx.settings.out_dir = ".";
  if (have_cfg) {
    if (cfg.has_seed) ctx.settings.seed = cfg.seed;
    if (cfg.has_workers) ctx.settings.workers = cfg.workers;
    if (cfg.has_format) ctx.settings.format = cfg.format;
    if (cfg.has_out) ctx.settings.out_dir = cfg.out_dir;
  }
  if (const char* e = std::getenv("JRMSIM_SEED"))
    ctx.settings.seed = parse_env_u64(e, "JRMSIM_SEED");
  if (const char* e = std::getenv("JRMSIM_WORKERS"))
    ctx.settings.workers = parse_env_int(e, "JRMSIM_WORKERS", 0, 1024);
  if (sub->count("--seed") > 0) ctx.settings.seed = flag_seed;
  if (sub->count("--workers") > 0) ctx.settings.workers = flag_workers;
  if (sub->count("--format") > 0) ctx.settings.format = flag_format;
  if (sub->count("--out") > 0) ctx.settings.out_dir = flag_out;

  ctx.params = have_cfg ? cfg.params : Json::object();
  ctx.config_echo = have_cfg ? cfg.raw : Json();

  const Runner runner = find_runner(command);
  const auto t0 = std::chrono::steady_clock::now();
  const CommandOutput out = runner(ctx);
  const auto wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - t0)
                           .count();
  write_manifest(ctx, out, static_cast<std::int64_t>(wall_ms));

  for (const std::string& name : out.artifacts)
    std::printf("wrote %s\n",
                (std::filesystem::path(ctx.settings.out_dir) / name).string().c_str());
  if (out.cells_failed > 0)
    std::fprintf(stderr, "%lld of %lld cells failed (see manifest)\n",
                 static_cast<long long>(out.cells_failed),
                 static_cast<long long>(out.cells_total));
  if (100 * out.cells_failed > out.cells_total) {
    std::fprintf(stderr, "more than 1%% of sweep cells failed\n");
    return 3;
  }
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"shunted ring modulator simulation toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string config_path, flag_out, flag_format;
  std::uint64_t flag_seed = 0;
  int flag_workers = 0;

  for (const auto& e : kCommands) {
    CLI::App* sub = app.add_subcommand(e.name, e.description);
    sub->add_option("--config", config_path, "JSON run configuration file");
    sub->add_option("--seed", flag_seed, "master RNG seed");
    sub->add_option("--workers", flag_workers, "worker threads (0 = hardware)")
        ->check(CLI::Range(0, 1024));
    sub->add_option("--out", flag_out, "output directory");
    sub->add_option("--format", flag_format, "artifact format")
        ->check(CLI::IsMember({"csv", "json"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const CLI::App* sub = app.get_subcommands().front();
    return run_parsed(sub->get_name(), sub, config_path, flag_seed, flag_workers, flag_format,
                      flag_out);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}

}  // namespace jrm
