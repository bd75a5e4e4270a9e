// Full-system acceptance checks. Each numbered check exercises the library
// (or the installed CLI binary) end to end, verifies its quantitative claims
// at the stated tolerances, enforces a wall-clock budget, and prints exactly
// one [PASS]/[FAIL] line with the measured values. The process exits nonzero
// if any check fails.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "jrm/amp_network.hpp"
#include "jrm/circuit.hpp"
#include "jrm/eigenmodes.hpp"
#include "jrm/ground_state.hpp"
#include "jrm/kerr.hpp"
#include "jrm/readout.hpp"
#include "jrm/rng.hpp"

namespace fs = std::filesystem;
using namespace jrm;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string fmt(const char* f, ...) {
  va_list ap;
  va_start(ap, f);
  char buf[512];
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return std::string(buf);
}

// ---------- per-check bookkeeping ----------

struct Check {
  bool ok = true;
  std::string detail;

  void append(const std::string& msg) {
    if (detail.size() > 400) return;  // keep the line readable on mass failure
    if (!detail.empty()) detail += "; ";
    detail += msg;
  }
  void expect(bool cond, const std::string& msg) {
    if (!cond) {
      ok = false;
      append(msg);
    }
  }
  void note(const std::string& msg) { append(msg); }
};

int g_failures = 0;

void run_check(int id, const char* label, double budget_s,
               const std::function<void(Check&)>& body) {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.ok = false;
    c.append(std::string("exception: ") + e.what());
  }
  const double s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (s >= budget_s) {
    c.ok = false;
    c.append(fmt("over budget: %.1f s >= %.0f s", s, budget_s));
  }
  if (!c.ok) ++g_failures;
  std::printf("[%s] %2d. %s: %s  [%.2f s / %.0f s]\n", c.ok ? "PASS" : "FAIL", id, label,
              c.detail.c_str(), s, budget_s);
  std::fflush(stdout);
}

// ---------- CLI plumbing ----------

fs::path scratch_root() {
  static const fs::path root = [] {
    fs::path p = fs::temp_directory_path() /
                 ("jrmsim-acceptance-" + std::to_string(static_cast<long>(::getpid())));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return root;
}

fs::path fresh_dir(const std::string& name) {
  static int counter = 0;
  fs::path p = scratch_root() / (name + "-" + std::to_string(counter++));
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(JRMSIM_BIN) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  if (status == -1 || !WIFEXITED(status)) return -1;
  return WEXITSTATUS(status);
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

std::string network_block(const std::string& pumps) {
  return std::string("\"network\":{") + "\"mode_a\":{\"kappa\":1.0}," +
         "\"mode_b\":{\"kappa\":1.0}," + "\"pumps\":[" + pumps + "]}";
}

PumpedNetwork balanced_lossless(double target_pp_db, double ka, double kb) {
  BalancedPumps bp = balance_gc(target_pp_db, ka, kb);
  PumpedNetwork net;
  net.mode_a.kappa = net.mode_a.kappa_ext = ka;
  net.mode_b.kappa = net.mode_b.kappa_ext = kb;
  net.pump_g = {bp.g_g, bp.theta_g};
  net.pump_c = {bp.g_c, bp.theta_c};
  return net;
}

// ---------- the eleven checks ----------

void check_null_point(Check& c) {
  const fs::path dir = fresh_dir("null");
  const fs::path cfg = dir / "cfg.json";
  write_file(cfg, "{\"command\":\"null-point\",\"seed\":7,\"out\":\"" + dir.string() +
                      "\",\"params\":{\"beta\":1.2,\"alpha\":0.0,\"n_seeds\":64}}");
  c.expect(run_cli("null-point --config " + cfg.string()) == 0, "CLI exited nonzero");

  std::ifstream in(dir / "null-point-seed7.csv");
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  const auto fields = split(row, ',');
  c.expect(fields.size() >= 3, "artifact row malformed");
  if (fields.size() < 3) return;
  const double phi_star = std::stod(fields[1]);
  const double err = std::abs(phi_star - 2.0 * kPi);
  c.expect(err <= 1e-9, fmt("|phi*-2pi| = %.2e > 1e-9 rad", err));

  JrmParams p;
  p.beta = 1.2;
  p.alpha = 0.0;
  const double kmax = kerr_tensor(p, FluxBias{phi_star}).max_abs();
  c.expect(kmax <= 1e-8, fmt("max |Kerr| = %.2e > 1e-8 E_J", kmax));
  c.note(fmt("phi* = 2pi + %.1e rad, all six Kerr coefficients <= %.1e E_J", err, kmax));
}

void check_kerr_ratio(Check& c) {
  Rng rng(20260814);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    JrmParams p;
    p.beta = 4.5;
    p.alpha = rng.uniform(0.0, 0.4);
    const FluxBias flux{rng.uniform(0.0, 4.0 * kPi)};
    const KerrTensor kt = kerr_tensor(p, flux);
    const double scale = std::max(1e-3, kt.max_abs());
    worst = std::max(worst, std::abs(kt.k_ab - 6.0 * kt.k_aa) / scale);
  }
  c.expect(worst <= 1e-12, fmt("max scaled |K_ab - 6 K_aa| = %.2e > 1e-12", worst));
  c.note(fmt("100 random (alpha, flux) draws, max scaled deviation %.1e", worst));
}

void check_degeneracy_thresholds(Check& c) {
  std::vector<double> betas, flux;
  for (int i = 0; i <= 115; ++i) betas.push_back(0.25 + 0.05 * i);
  for (int i = 0; i < 33; ++i) flux.push_back(4.0 * kPi * i / 32.0);  // index 16 == 2pi
  JrmParams base;
  base.alpha = 0.0;
  const PhaseDiagram pd = phase_diagram(base, SweepAxis::Beta, betas, flux, 256, 1, 0);

  int bad = 0;
  for (const auto& cell : pd.cells)
    if (!cell.ok) ++bad;
  c.expect(bad == 0, fmt("%d cells failed to classify", bad));

  double thr_half = -1.0, thr_all = -1.0;  // largest beta with a degenerate ground state
  for (std::size_t ib = 0; ib < betas.size(); ++ib) {
    if (pd.at(ib, 16).degeneracy != 1) thr_half = std::max(thr_half, betas[ib]);
    for (std::size_t jf = 0; jf < flux.size(); ++jf)
      if (pd.at(ib, jf).degeneracy != 1) thr_all = std::max(thr_all, betas[ib]);
  }
  c.expect(std::abs(thr_half - 1.0) <= 0.05 + 1e-12,
           fmt("half-quantum threshold %.2f outside 1.0 +/- 0.05", thr_half));
  c.expect(std::abs(thr_all - 4.0) <= 0.10 + 1e-12,
           fmt("all-flux threshold %.2f outside 4.0 +/- 0.1", thr_all));
  c.note(fmt("last degenerate beta: %.2f at phi_ext = 2pi, %.2f over all flux "
             "(116x33 cells, 256 starts each)",
             thr_half, thr_all));
}

void check_null_trajectory(Check& c) {
  std::vector<double> alphas;
  for (int i = 0; i <= 50; ++i) alphas.push_back(0.01 * i);
  JrmParams base;
  base.beta = 4.5;
  const auto tr = null_trajectory(base, alphas, 256, 1, 0);
  c.expect(tr.size() == alphas.size(), "trajectory length mismatch");
  if (tr.size() != alphas.size()) return;

  bool monotone = true;
  for (std::size_t i = 1; i < tr.size(); ++i)
    if (!(tr[i].phi_star > tr[i - 1].phi_star)) monotone = false;
  c.expect(monotone, "phi*(alpha) not strictly increasing");

  std::size_t flip = tr.size();
  for (std::size_t i = 0; i < tr.size(); ++i)
    if (!tr[i].stable) {
      flip = i;
      break;
    }
  c.expect(flip < tr.size(), "null never enters the degenerate region");
  if (flip == tr.size()) return;
  bool clean = true;
  for (std::size_t i = flip; i < tr.size(); ++i)
    if (tr[i].stable) clean = false;
  c.expect(clean, "stability flag re-enters after the flip");

  const double a = tr[flip].alpha, ph = tr[flip].phi_star;
  c.expect(std::abs(a - 0.40) <= 0.05 + 1e-12, fmt("entry at alpha = %.2f, not 0.40 +/- 0.05", a));
  c.expect(std::abs(ph - 3.5 * kPi) <= 0.1 * kPi,
           fmt("phi* at entry = %.3f pi, not 3.5 +/- 0.1 pi", ph / kPi));
  c.note(fmt("phi* strictly increasing on alpha in [0, 0.5]; degenerate from "
             "alpha = %.2f at phi* = %.3f pi",
             a, ph / kPi));
}

void check_eigenmodes(Check& c) {
  Rng rng(777);
  double worst_f = 0.0, worst_v = 0.0, worst_r = 0.0, worst_zero = 0.0;
  int n_renorm = 0;

  const auto pattern_residual = [](const std::array<double, 4>& v, std::array<double, 4> t) {
    double tn = std::sqrt(t[0] * t[0] + t[1] * t[1] + t[2] * t[2] + t[3] * t[3]);
    for (double& x : t) x /= tn;
    const double dp = v[0] * t[0] + v[1] * t[1] + v[2] * t[2] + v[3] * t[3];
    double resid = std::abs(std::abs(dp) - 1.0);
    for (int i = 0; i < 4; ++i) resid = std::max(resid, std::abs(v[i] - dp * t[i]));
    return resid;
  };

  for (int k = 0; k < 100; ++k) {
    JrmParams p;
    CapacitanceSet caps;
    FluxBias flux{0.0};
    double j = 0.0;
    for (;;) {  // stay clear of the instability boundary
      p.beta = rng.uniform(0.5, 6.0);
      p.alpha = rng.uniform(0.0, 0.6);
      flux.phi_ext = rng.uniform(0.0, 4.0 * kPi);
      j = junction_renormalization(p.alpha, flux);
      if (j + p.beta / 4.0 > 0.05 && j + p.beta / 2.0 > 0.05) break;
    }
    caps.c1 = caps.c2 = rng.uniform(0.5, 2.0);
    caps.c3 = caps.c4 = rng.uniform(0.5, 2.0);

    const EigenResult r = eigenmodes(p, caps, flux);
    const double cbar = caps.geometric_mean();
    const double wa = std::sqrt(cbar / caps.c1 * (j + p.beta / 2.0));
    const double wb = std::sqrt(cbar / caps.c3 * (j + p.beta / 2.0));
    const double wc = std::sqrt((cbar / caps.c1 + cbar / caps.c3) * (j + p.beta / 4.0));
    worst_f = std::max({worst_f, std::abs(r.omega[r.index_a] - wa) / std::max(1.0, wa),
                        std::abs(r.omega[r.index_b] - wb) / std::max(1.0, wb),
                        std::abs(r.omega[r.index_c] - wc) / std::max(1.0, wc)});
    worst_zero = std::max(worst_zero, r.omega[0]);

    worst_v = std::max({worst_v, pattern_residual(r.vecs[r.index_a], {1, 0, -1, 0}),
                        pattern_residual(r.vecs[r.index_b], {0, 1, 0, -1}),
                        pattern_residual(r.vecs[r.index_c],
                                         {caps.c3, -caps.c1, caps.c3, -caps.c1}),
                        pattern_residual(r.vecs[0], {1, 1, 1, 1})});

    if (p.alpha > 0.0 && std::abs(j) <= 0.99) {  // bare-ring image of the stray inductor
      ++n_renorm;
      JrmParams bare = p;
      bare.alpha = 0.0;
      const EigenResult rb = eigenmodes(bare, caps, FluxBias{4.0 * std::acos(j)});
      for (int i : {r.index_a, r.index_b, r.index_c})
        worst_r = std::max(worst_r, std::abs(r.omega[i] - rb.omega[i]));
    }
  }
  c.expect(worst_f <= 1e-9, fmt("closed-form frequency deviation %.2e > 1e-9", worst_f));
  c.expect(worst_zero <= 1e-7, fmt("free-rotation mode frequency %.2e > 1e-7", worst_zero));
  c.expect(worst_v <= 1e-9, fmt("eigenvector pattern residual %.2e > 1e-9", worst_v));
  c.expect(worst_r <= 1e-9, fmt("stray renormalization deviation %.2e > 1e-9", worst_r));
  c.expect(n_renorm >= 50, fmt("only %d renormalization draws", n_renorm));
  c.note(fmt("100 draws: frequencies %.1e, patterns %.1e, renormalization %.1e "
             "(%d maps), zero mode %.1e",
             worst_f, worst_v, worst_r, n_renorm, worst_zero));
}

void check_gc_scattering(Check& c) {
  const double sig[4] = {1.0, 1.0, -1.0, -1.0};
  double worst_refl = 0.0, worst_symp = 0.0, worst_bidir = 0.0;
  const std::vector<std::pair<double, double>> kappas = {{1.0, 1.0}, {2.0, 10.0}};
  for (const auto& [ka, kb] : kappas) {
    for (double pp : {8.0, 12.0, 15.5}) {
      const PumpedNetwork net = balanced_lossless(pp, ka, kb);
      for (int i = -30; i <= 30; ++i) {
        const double w = 0.1 * i * std::max(ka, kb);
        const SMatrix s = scattering(net, w);
        worst_refl = std::max({worst_refl, std::abs(std::abs(s[0][0]) - 1.0),
                               std::abs(std::abs(s[1][1]) - 1.0)});
        worst_bidir = std::max(worst_bidir, std::abs(std::abs(s[0][1]) - std::abs(s[1][0])));
        for (int r = 0; r < 4; ++r) {
          std::complex<double> acc = 0.0;
          for (int jj = 0; jj < 4; ++jj) acc += s[r][jj] * sig[jj] * std::conj(s[r][jj]);
          worst_symp = std::max(worst_symp, std::abs(acc - sig[r]));
        }
      }
    }
  }
  c.expect(worst_refl <= 1e-9, fmt("| |refl| - 1 | = %.2e > 1e-9", worst_refl));
  c.expect(worst_symp <= 1e-9, fmt("symplectic row deviation %.2e > 1e-9", worst_symp));
  c.expect(worst_bidir <= 1e-9, fmt("| |S_ab| - |S_ba| | = %.2e > 1e-9", worst_bidir));
  c.note(fmt("61 detunings x 3 gains x 2 linewidth pairs: |refl|-1 %.1e, "
             "symplectic rows %.1e, transmission reciprocity %.1e",
             worst_refl, worst_symp, worst_bidir));
}

void check_bandwidth_pairing(Check& c) {
  const double want = std::sqrt(std::sqrt(2.0) - 1.0);
  double wmin = 1e9, wmax = -1e9, wsum = 0.0;
  for (double pp : {8.0, 10.0, 12.0, 15.0}) {
    const Bandwidth bw = bandwidth(balanced_lossless(pp, 1.0, 1.0), 1, 0, -1.5, 1.5, 4001);
    wmin = std::min(wmin, bw.width);
    wmax = std::max(wmax, bw.width);
    wsum += bw.width;
  }
  const double wmean = wsum / 4.0;
  const double spread = (wmax - wmin) / wmean;
  c.expect(std::abs(wmean - want) / want <= 0.01,
           fmt("width %.6f kappa vs sqrt(sqrt(2)-1) = %.6f", wmean, want));
  c.expect(spread <= 0.01, fmt("width spread %.2f%% > 1%% across 8-15 dB", 100.0 * spread));

  PumpedNetwork sp;  // kappa = kappa_ext = 1, gain pump only
  sp.pump_g = {calibrate_single_pump(20.0, 1.0, 1.0), 0.0};
  const Bandwidth bsp = bandwidth(sp, 0, 0, -0.6, 0.6, 4001);
  c.expect(std::abs(bsp.peak_db - 20.0) <= 0.01,
           fmt("single-pump peak %.3f dB, not 20", bsp.peak_db));

  const double kappa_mhz = 2.33 / bsp.width;  // linewidth that puts the 20 dB width at 2.33 MHz
  const double gc_mhz = wmean * kappa_mhz;
  const double ratio = wmean / bsp.width;
  c.expect(std::abs(gc_mhz - 14.0) <= 0.05 * 14.0,
           fmt("calibrated GC width %.2f MHz outside 14 +/- 5%%", gc_mhz));
  c.expect(ratio >= 6.0 && ratio <= 6.4, fmt("GC/single-pump ratio %.3f outside [6.0, 6.4]", ratio));
  c.note(fmt("GC width %.6f kappa, spread %.3f%%; single-pump 20 dB width %.6f kappa; "
             "kappa = %.2f MHz, GC = %.2f MHz, ratio = %.3f",
             wmean, 100.0 * spread, bsp.width, kappa_mhz, gc_mhz, ratio));
}

void check_phase_sensitivity(Check& c) {
  const double kappa = 20.0;
  const PhaseSweep ps = phase_sensitive_gain(balanced_lossless(15.5, kappa, kappa), 0.0, 721);
  c.expect(std::abs(ps.max_db - 21.5) <= 0.5,
           fmt("phase-sensitive max %.3f dB, not 21.5 +/- 0.5", ps.max_db));

  bool present = true, shrinking = true;
  double last_dev = 1e9, final_ratio = 0.0;
  for (double pp : {6.0, 10.0, 15.5}) {
    const TwoToneResponse tt =
        two_tone_spectrum(balanced_lossless(pp, kappa, kappa), {5.0});
    const double ratio = std::pow(10.0, (tt.idler_db[0] - tt.probe_db[0]) / 10.0);
    const double dev = std::abs(ratio - 1.0);
    if (tt.idler_db[0] < tt.probe_db[0] - 10.0) present = false;
    if (dev > last_dev + 1e-12) shrinking = false;
    last_dev = dev;
    final_ratio = ratio;
  }
  c.expect(present, "no idler tone at -5 MHz");
  c.expect(shrinking, "idler/probe power ratio does not approach 1 with gain");
  c.expect(std::abs(final_ratio - 1.0) <= 1e-9,
           fmt("idler/probe power ratio %.9f at the top gain", final_ratio));
  c.note(fmt("phase-sensitive max %.3f dB at 15.5 dB phase-preserving; "
             "+5 MHz probe -> -5 MHz idler, power ratio %.9f",
             ps.max_db, final_ratio));
}

void check_single_pump_benchmarks(Check& c) {
  PumpedNetwork g;  // kappa = kappa_ext = 1
  g.pump_g.g = std::sqrt(9.0 / 11.0) / 2.0;  // cooperativity C = 4 g^2 = 9/11
  const SMatrix sg = scattering(g, 0.0);
  const double gain_db = 10.0 * std::log10(std::norm(sg[0][0]));
  c.expect(std::abs(gain_db - 20.0) <= 0.01,
           fmt("C = 9/11 reflection gain %.4f dB, not 20.00 +/- 0.01", gain_db));

  PumpedNetwork conv;
  conv.pump_c.g = 0.5;  // C = 1: full conversion
  const SMatrix sc = scattering(conv, 0.0);
  const double refl_db = 10.0 * std::log10(std::max(std::norm(sc[0][0]), 1e-300));
  c.expect(refl_db <= -40.0, fmt("full-conversion reflection %.1f dB > -40", refl_db));
  c.note(fmt("C = 9/11 reflects at %.4f dB; C = 1 reflects at %.1f dB", gain_db, refl_db));
}

void check_measurement_chain(Check& c) {
  // unit-efficiency measurement keeps pure states pure
  Rng rng(99);
  double worst_p = 0.0;
  for (int k = 0; k < 500; ++k) {
    const double costh = rng.uniform(-1.0, 1.0);
    const double sinth = std::sqrt(std::max(0.0, 1.0 - costh * costh));
    const double az = rng.uniform(0.0, 2.0 * kPi);
    const BlochState s{sinth * std::cos(az), sinth * std::sin(az), costh};
    ReadoutModel m;
    m.separation = rng.uniform(0.5, 6.0);
    m.sigma = rng.uniform(0.5, 2.0);
    m.eta = 1.0;
    m.alignment = (k % 3 == 0) ? 0.0 : (k % 3 == 1 ? kPi / 2.0 : rng.uniform(0.0, kPi));
    const MeasurementOutcome out = sample_record(s, m, rng);
    worst_p = std::max(worst_p, std::abs(out.state.purity() - 1.0));
  }
  c.expect(worst_p <= 1e-9, fmt("purity drift %.2e > 1e-9 at eta = 1", worst_p));

  // aligned records resolve two lobes; orthogonal records collapse to one
  const BlochState equator{1.0, 0.0, 0.0};
  const auto two_lobed_at = [&](double alignment) {
    ReadoutModel m;
    m.separation = 2.5;
    m.sigma = 1.0;
    m.alignment = alignment;
    const auto samples = projective_histogram(equator, m, 80000, 2026);
    std::vector<double> is;
    is.reserve(samples.size());
    for (const auto& s : samples) is.push_back(s.i);
    return fit_gmm(is).two_lobed();
  };
  const bool aligned_two = two_lobed_at(0.0);
  const bool orth_two = two_lobed_at(kPi / 2.0);
  c.expect(aligned_two, "aligned 80k-shot histogram not classified as two-lobed");
  c.expect(!orth_two, "orthogonal 80k-shot histogram classified as two-lobed");

  // injected efficiency comes back out of the sideways-tomography fit
  BackactionProtocol proto;
  proto.strong.separation = 4.0;
  proto.strong.sigma = 1.0;
  proto.strong.eta = 0.55;
  proto.n_shots = 80000;
  const BackactionResult br = backaction_experiment(proto, 123, 1);
  const EfficiencyFit fit = fit_efficiency(br);
  c.expect(std::abs(fit.eta - 0.55) <= 0.02,
           fmt("fitted eta %.4f, not 0.55 +/- 0.02", fit.eta));
  c.note(fmt("purity drift %.1e; lobes %s/%s (aligned/orthogonal); "
             "eta = %.3f +/- %.3f from 80k shots",
             worst_p, aligned_two ? "two" : "one", orth_two ? "two" : "one", fit.eta,
             fit.eta_stderr));
}

void check_cli_determinism(Check& c) {
  struct Cmd {
    const char* name;
    std::string params;
  };
  const std::vector<Cmd> roster = {
      {"null-point", "{\"beta\":1.2,\"alpha\":0.0,\"n_seeds\":32}"},
      {"null-trajectory",
       "{\"beta\":4.5,\"alpha_grid\":{\"start\":0.0,\"stop\":0.1,\"steps\":3},"
       "\"n_seeds\":32}"},
      {"phase-diagram",
       "{\"axis\":\"beta\",\"axis_grid\":{\"start\":0.6,\"stop\":1.4,\"steps\":2},"
       "\"flux_grid\":{\"start\":0.0,\"stop\":6.0,\"steps\":3},\"n_seeds\":16}"},
      {"kerr-map",
       "{\"beta\":4.5,\"alpha\":0.1,\"flux_grid\":{\"start\":5.0,\"stop\":7.0,\"steps\":3},"
       "\"photon_grid\":{\"start\":0.0,\"stop\":10.0,\"steps\":3}}"},
      {"modes",
       "{\"beta\":4.5,\"alpha\":0.1,\"caps\":{\"c1\":1.0,\"c2\":1.0,\"c3\":1.0,\"c4\":1.0},"
       "\"flux_grid\":{\"start\":0.0,\"stop\":3.0,\"steps\":4}}"},
      {"scattering", "{" + network_block("{\"kind\":\"gain\",\"g\":0.2,\"theta\":0.5}") +
                         ",\"omega_grid\":{\"start\":-1.0,\"stop\":1.0,\"steps\":5}}"},
      {"gain-curves",
       "{" + network_block("{\"kind\":\"gain\",\"g\":0.3,\"theta\":0.0},"
                           "{\"kind\":\"conversion\",\"g\":0.3,\"theta\":0.2}") +
           ",\"omega_grid\":{\"start\":-1.0,\"stop\":1.0,\"steps\":5}}"},
      {"two-tone",
       "{" + network_block("{\"kind\":\"gain\",\"g\":0.3,\"theta\":0.0},"
                           "{\"kind\":\"conversion\",\"g\":0.3,\"theta\":0.0}") +
           ",\"detuning_grid\":{\"start\":-1.0,\"stop\":1.0,\"steps\":5}}"},
      {"histogram",
       "{\"readout\":{\"separation\":2.5,\"sigma\":1.0},\"prep\":{\"x\":1.0,\"y\":0.0,"
       "\"z\":0.0},\"n_shots\":1000,\"n_bins\":11,\"span_sigmas\":4.0}"},
      {"jumps",
       "{\"readout\":{\"separation\":4.0,\"sigma\":1.0,\"t1_us\":20.0,"
       "\"gamma_up_per_us\":0.05,\"integration_time_us\":0.1},"
       "\"duration_us\":50.0,\"window_us\":1.0}"},
      {"backaction",
       "{\"readout\":{\"separation\":4.0,\"sigma\":1.0,\"eta\":0.55},\"n_shots\":20000}"},
      {"fit-eta",
       "{\"readout\":{\"separation\":4.0,\"sigma\":1.0,\"eta\":0.55},\"n_shots\":20000}"},
  };

  const auto artifacts = [](const fs::path& d) {
    std::vector<fs::path> v;
    for (const auto& e : fs::directory_iterator(d)) {
      const std::string n = e.path().filename().string();
      if (n.size() >= 14 && n.substr(n.size() - 14) == ".manifest.json") continue;
      v.push_back(e.path());
    }
    std::sort(v.begin(), v.end());
    return v;
  };

  int n_artifacts = 0;
  for (const auto& cmd : roster) {
    const fs::path cfg = scratch_root() / (std::string(cmd.name) + ".json");
    write_file(cfg, std::string("{\"command\":\"") + cmd.name + "\",\"params\":" +
                        cmd.params + "}");
    const fs::path da = fresh_dir("det-a");
    const fs::path db = fresh_dir("det-b");
    const fs::path dc = fresh_dir("det-c");
    const std::string base_args =
        std::string(cmd.name) + " --config " + cfg.string() + " --seed 5";
    const int ra = run_cli(base_args + " --workers 1 --out " + da.string());
    const int rb = run_cli(base_args + " --workers 1 --out " + db.string());
    const int rc = run_cli(base_args + " --workers 8 --out " + dc.string());
    c.expect(ra == 0 && rb == 0 && rc == 0, fmt("%s exited nonzero", cmd.name));
    if (ra != 0 || rb != 0 || rc != 0) continue;

    const auto va = artifacts(da), vb = artifacts(db), vc = artifacts(dc);
    c.expect(!va.empty(), fmt("%s produced no artifacts", cmd.name));
    c.expect(va.size() == vb.size() && va.size() == vc.size(),
             fmt("%s artifact sets differ in size", cmd.name));
    if (va.size() != vb.size() || va.size() != vc.size()) continue;
    for (std::size_t i = 0; i < va.size(); ++i) {
      const bool names_match = va[i].filename() == vb[i].filename() &&
                               va[i].filename() == vc[i].filename();
      c.expect(names_match, fmt("%s artifact names differ", cmd.name));
      if (!names_match) continue;
      const std::string bytes = slurp(va[i]);
      c.expect(bytes == slurp(vb[i]),
               fmt("%s: %s differs across reruns", cmd.name, va[i].filename().c_str()));
      c.expect(bytes == slurp(vc[i]),
               fmt("%s: %s differs between workers 1 and 8", cmd.name,
                   va[i].filename().c_str()));
      ++n_artifacts;
    }
  }
  c.note(fmt("%zu commands, %d artifacts byte-identical across reruns and workers {1, 8}",
             roster.size(), n_artifacts));
}

}  // namespace

int main() {
  std::printf("acceptance checks (library + CLI at %s)\n", JRMSIM_BIN);
  run_check(1, "Kerr null at alpha = 0 via the CLI", 1.0, check_null_point);
  run_check(2, "cross-Kerr equals six times self-Kerr", 1.0, check_kerr_ratio);
  run_check(3, "ground-state degeneracy thresholds on the (beta, flux) grid", 600.0,
            check_degeneracy_thresholds);
  run_check(4, "flux-null trajectory under stray inductance at beta = 4.5", 300.0,
            check_null_trajectory);
  run_check(5, "normal-mode closed forms, patterns, stray renormalization", 5.0,
            check_eigenmodes);
  run_check(6, "balanced lossless GC scattering identities", 1.0, check_gc_scattering);
  run_check(7, "GC bandwidth constant and single-pump pairing", 5.0, check_bandwidth_pairing);
  run_check(8, "phase-sensitive extremes and two-tone idler", 5.0, check_phase_sensitivity);
  run_check(9, "single-pump gain and conversion benchmarks", 1.0,
            check_single_pump_benchmarks);
  run_check(10, "measurement chain: purity, lobe classes, efficiency recovery", 120.0,
            check_measurement_chain);
  run_check(11, "CLI determinism across reruns and worker counts", 300.0,
            check_cli_determinism);
  std::printf("%d/11 checks passed\n", 11 - g_failures);
  return g_failures == 0 ? 0 : 1;
}
