#include "jrm/amp_network.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace jrm {

namespace {

constexpr std::complex<double> kI{0.0, 1.0};

double power_db(const std::complex<double>& s) {
  const double p = std::norm(s);
  return 10.0 * std::log10(std::max(p, 1e-300));
}

Eigen::Matrix4cd response_matrix(const PumpedNetwork& net, double omega) {
  const double ka = net.mode_a.kappa, kb = net.mode_b.kappa;
  const double da = net.mode_a.static_detuning, db = net.mode_b.static_detuning;
  const std::complex<double> gc = net.pump_c.g * std::exp(kI * net.pump_c.theta);
  const std::complex<double> gg = net.pump_g.g * std::exp(kI * net.pump_g.theta);

  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  m(0, 0) = 0.5 * ka + kI * (da - omega);
  m(0, 1) = kI * gc;
  m(0, 3) = kI * gg;

  m(1, 1) = 0.5 * kb + kI * (db - omega);
  m(1, 0) = kI * std::conj(gc);
  m(1, 2) = kI * gg;

  m(2, 2) = 0.5 * ka - kI * (da + omega);
  m(2, 3) = -kI * std::conj(gc);
  m(2, 1) = -kI * std::conj(gg);

  m(3, 3) = 0.5 * kb - kI * (db + omega);
  m(3, 2) = -kI * gc;
  m(3, 0) = -kI * std::conj(gg);
  return m;
}

}  // namespace

void PumpedNetwork::validate() const {
  auto check_mode = [](const ModeSpec& m) {
    if (!(m.kappa_ext > 0) || !std::isfinite(m.kappa_ext))
      throw std::invalid_argument("kappa_ext must be positive and finite");
    if (!(m.kappa >= m.kappa_ext) || !std::isfinite(m.kappa))
      throw std::invalid_argument("total linewidth must satisfy kappa >= kappa_ext");
    if (!std::isfinite(m.static_detuning) || !std::isfinite(m.center_frequency))
      throw std::invalid_argument("mode frequencies must be finite");
  };
  check_mode(mode_a);
  check_mode(mode_b);
  for (const PumpSpec& p : {pump_g, pump_c}) {
    if (p.g < 0 || !std::isfinite(p.g))
      throw std::invalid_argument("pump coupling must be nonnegative and finite");
    if (!std::isfinite(p.theta)) throw std::invalid_argument("pump phase must be finite");
  }
}

SMatrix scattering(const PumpedNetwork& net, double omega) {
  net.validate();
  const Eigen::Matrix4cd m = response_matrix(net, omega);

  Eigen::FullPivLU<Eigen::Matrix4cd> lu(m);
  lu.setThreshold(1e-10);
  if (!lu.isInvertible())
    throw PoleError("response matrix is singular (oscillation threshold)", omega);

  Eigen::Vector4cd kdiag;
  const double rka = std::sqrt(net.mode_a.kappa_ext), rkb = std::sqrt(net.mode_b.kappa_ext);
  kdiag << rka, rkb, rka, rkb;

  const Eigen::Matrix4cd s =
      kdiag.asDiagonal() * lu.inverse() * kdiag.asDiagonal() - Eigen::Matrix4cd::Identity();
  SMatrix out;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) out[r][c] = s(r, c);
  return out;
}

std::vector<ScatterSample> gain_curves(const PumpedNetwork& net,
                                       const std::vector<double>& omegas) {
  std::vector<ScatterSample> out;
  out.reserve(omegas.size());
  for (double w : omegas) {
    const SMatrix s = scattering(net, w);
    out.push_back({w, power_db(s[0][0]), power_db(s[1][1]), power_db(s[1][0]),
                   power_db(s[0][1]), power_db(s[0][2])});
  }
  return out;
}

Bandwidth bandwidth(const PumpedNetwork& net, int row, int col, double omega_lo,
                    double omega_hi, int n_scan) {
  if (row < 0 || row > 3 || col < 0 || col > 3)
    throw std::invalid_argument("scattering index out of range");
  if (!(omega_hi > omega_lo)) throw std::invalid_argument("empty frequency window");
  if (n_scan < 16) n_scan = 16;

  auto p = [&](double w) { return std::norm(scattering(net, w)[row][col]); };

  // Dense scan for the peak.
  double best_w = omega_lo, best_p = -1.0;
  const double step = (omega_hi - omega_lo) / (n_scan - 1);
  for (int i = 0; i < n_scan; ++i) {
    const double w = omega_lo + i * step;
    const double v = p(w);
    if (v > best_p) {
      best_p = v;
      best_w = w;
    }
  }
  // Golden-section refinement around the scan maximum.
  {
    double a = std::max(omega_lo, best_w - step), b = std::min(omega_hi, best_w + step);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = p(x1), f2 = p(x2);
    for (int it = 0; it < 80 && (b - a) > 1e-13 * std::max(1.0, std::abs(best_w)); ++it) {
      if (f1 < f2) {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + gr * (b - a);
        f2 = p(x2);
      } else {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - gr * (b - a);
        f1 = p(x1);
      }
    }
    best_w = 0.5 * (a + b);
    best_p = p(best_w);
  }

  const double half = 0.5 * best_p;
  auto cross = [&](double inside, double outside) {
    // p(inside) >= half >= p(outside); bisect the -3 dB crossing.
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (inside + outside);
      if (p(mid) >= half)
        inside = mid;
      else
        outside = mid;
      if (std::abs(outside - inside) < 1e-12 * std::max(1.0, std::abs(mid))) break;
    }
    return 0.5 * (inside + outside);
  };

  // March outward until below half power (or window edge).
  double lo = best_w, hi = best_w;
  while (lo - step > omega_lo && p(lo - step) >= half) lo -= step;
  while (hi + step < omega_hi && p(hi + step) >= half) hi += step;
  const double lo_out = std::max(omega_lo, lo - step), hi_out = std::min(omega_hi, hi + step);
  if (p(lo_out) >= half || p(hi_out) >= half)
    throw NoCrossingError("half-power crossing not bracketed by the frequency window");
  const double w_lo = cross(lo, lo_out);
  const double w_hi = cross(hi, hi_out);

  Bandwidth bw;
  bw.center = best_w;
  bw.width = w_hi - w_lo;
  bw.asymmetry = (best_w - w_lo) > 0 ? (w_hi - best_w) / (best_w - w_lo) : 0.0;
  bw.peak_db = 10.0 * std::log10(std::max(best_p, 1e-300));
  return bw;
}

PhaseSweep phase_sensitive_gain(const PumpedNetwork& net, double omega, int n_phase) {
  if (n_phase < 4) n_phase = 4;
  const SMatrix s = scattering(net, omega);

  // Coherent input on port a: v_in = (e^{i phi}, 0, e^{-i phi}, 0). Output
  // power on the annihilation rows is c0 + Re(z e^{2 i phi}).
  double c0 = 0.0;
  std::complex<double> z = 0.0;
  for (int r : {0, 1}) {
    c0 += std::norm(s[r][0]) + std::norm(s[r][2]);
    z += 2.0 * s[r][0] * std::conj(s[r][2]);
  }

  PhaseSweep sweep;
  sweep.phases.reserve(n_phase);
  sweep.gain_db.reserve(n_phase);
  const double two_pi = 2.0 * M_PI;
  for (int i = 0; i < n_phase; ++i) {
    const double phi = two_pi * i / n_phase;
    const double pw = c0 + (z * std::exp(kI * (2.0 * phi))).real();
    sweep.phases.push_back(phi);
    sweep.gain_db.push_back(10.0 * std::log10(std::max(pw, 1e-300)));
  }
  sweep.max_db = 10.0 * std::log10(std::max(c0 + std::abs(z), 1e-300));
  sweep.min_db = 10.0 * std::log10(std::max(c0 - std::abs(z), 1e-300));
  double amax = std::abs(z) > 0 ? -0.5 * std::arg(z) : 0.0;
  while (amax < 0) amax += M_PI;
  while (amax >= M_PI) amax -= M_PI;
  sweep.argmax_phase = amax;
  return sweep;
}

TwoToneResponse two_tone_spectrum(const PumpedNetwork& net,
                                  const std::vector<double>& detunings) {
  TwoToneResponse out;
  out.detunings = detunings;
  out.probe_db.reserve(detunings.size());
  out.idler_db.reserve(detunings.size());
  for (double d : detunings) {
    const SMatrix s = scattering(net, d);
    out.probe_db.push_back(power_db(s[1][0]));
    out.idler_db.push_back(power_db(s[3][0]));
  }
  return out;
}

double calibrate_single_pump(double target_db, double kappa_a, double kappa_b) {
  if (!(kappa_a > 0) || !(kappa_b > 0))
    throw std::invalid_argument("linewidths must be positive");
  if (!std::isfinite(target_db) || target_db < 0)
    throw UnreachableGainError("single-pump gain target must be finite and >= 0 dB");
  const double amp = std::pow(10.0, target_db / 20.0);
  const double coop = (amp - 1.0) / (amp + 1.0);  // < 1 for any finite target
  return 0.5 * std::sqrt(coop * kappa_a * kappa_b);
}

BalancedPumps balance_gc(double target_pp_db, double kappa_a, double kappa_b) {
  if (!(kappa_a > 0) || !(kappa_b > 0))
    throw std::invalid_argument("linewidths must be positive");
  if (!std::isfinite(target_pp_db) || target_pp_db < 0)
    throw UnreachableGainError("balanced-pump gain target must be finite and >= 0 dB");
  const double gpp = std::pow(10.0, target_pp_db / 10.0);
  const double g = 0.25 * std::sqrt(gpp * kappa_a * kappa_b);
  return {g, g, 0.0, 0.0};
}

}  // namespace jrm
