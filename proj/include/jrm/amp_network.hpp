#pragma once

// Linearized input-output network for a two-mode amplifier driven by a
// gain (two-mode squeezing) pump and a conversion (beam-splitter) pump.
// Intracavity amplitudes are stacked as v = (a, b, adag, bdag) and satisfy
// M v = K v_in with K = diag(sqrt(kappa_ext)) per port; the scattering
// matrix is S = K M^{-1} K - I. Conventions: a lossless cavity reflects
// with +1 on resonance (no pumps) and -1 far off resonance. Frequencies,
// linewidths and couplings share one unit (e.g. MHz); omega is the probe
// offset from the mode reference.

#include <array>
#include <complex>
#include <stdexcept>
#include <vector>

namespace jrm {

struct PoleError : std::runtime_error {
  double omega;
  PoleError(const std::string& msg, double w) : std::runtime_error(msg), omega(w) {}
};

struct UnreachableGainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoCrossingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ModeSpec {
  double center_frequency = 0.0;  // informational; the solve uses offsets only
  double kappa = 1.0;             // total linewidth
  double kappa_ext = 1.0;         // external (port) share, 0 < kappa_ext <= kappa
  double static_detuning = 0.0;   // residual mode pulling
  double kappa_loss() const { return kappa - kappa_ext; }
};

struct PumpSpec {
  double g = 0.0;      // coupling rate
  double theta = 0.0;  // pump phase
};

struct PumpedNetwork {
  ModeSpec mode_a, mode_b;
  PumpSpec pump_g;  // photon-pair (gain) process
  PumpSpec pump_c;  // frequency-conversion process
  void validate() const;
};

// Index order of the doubled basis: 0 = a, 1 = b, 2 = adag, 3 = bdag.
using SMatrix = std::array<std::array<std::complex<double>, 4>, 4>;

// Steady-state scattering matrix at probe offset omega. Throws PoleError when
// the response matrix is singular (parametric oscillation threshold).
SMatrix scattering(const PumpedNetwork& net, double omega);

struct ScatterSample {
  double omega;
  double refl_a_db, refl_b_db;      // |S_aa|^2, |S_bb|^2
  double trans_ba_db, trans_ab_db;  // |S_ba|^2, |S_ab|^2
  double conj_a_db;                 // |S_{a,adag}|^2 (phase-conjugating channel)
};

std::vector<ScatterSample> gain_curves(const PumpedNetwork& net,
                                       const std::vector<double>& omegas);

struct Bandwidth {
  double center;     // peak location
  double width;      // full width at -3 dB from peak
  double asymmetry;  // (upper - center) / (center - lower)
  double peak_db;
};

// Peak and -3 dB crossings of |S[row][col]|^2 over [omega_lo, omega_hi],
// located by dense scan plus bisection refinement.
Bandwidth bandwidth(const PumpedNetwork& net, int row, int col, double omega_lo,
                    double omega_hi, int n_scan = 2001);

struct PhaseSweep {
  std::vector<double> phases;    // input phase samples
  std::vector<double> gain_db;   // total output power over all ports / input power
  double max_db = 0, min_db = 0;
  double argmax_phase = 0;       // reported in [0, pi); response has period pi
};

// Phase-sensitive response to a coherent tone on port a at offset omega:
// total scattered output power versus the input phase.
PhaseSweep phase_sensitive_gain(const PumpedNetwork& net, double omega, int n_phase = 721);

struct TwoToneResponse {
  std::vector<double> detunings;
  std::vector<double> probe_db;  // |S_ba|^2, emitted at +delta on port b
  std::vector<double> idler_db;  // |S_{bdag,a}|^2, emitted at -delta on port b
};

TwoToneResponse two_tone_spectrum(const PumpedNetwork& net,
                                  const std::vector<double>& detunings);

// Pump amplitude for a target zero-detuning single-pump power gain (dB):
// amplitude gain A = (1 + C)/(1 - C) with cooperativity C = 4 g^2/(ka kb).
double calibrate_single_pump(double target_db, double kappa_a, double kappa_b);

struct BalancedPumps {
  double g_g, g_c;          // equal magnitudes
  double theta_g, theta_c;  // zero two-photon detuning: both phases zero
};

// Equal gain/conversion pump settings giving transmission power gain G_pp
// (dB) at zero offset: G_pp = 16 g^2/(ka kb). Target must be >= 0 dB.
BalancedPumps balance_gc(double target_pp_db, double kappa_a, double kappa_b);

}  // namespace jrm
