#pragma once

// Stochastic qubit measurement model for a phase-preserving readout chain.
// One quadrature of the output field carries the signal: for an aligned
// ("informational") measurement the recorded value separates into two
// Gaussian lobes at +/- separation with width sigma; for an orthogonal
// alignment the record is pure noise but back-acts as a phase rotation.
// Quantum efficiency eta < 1 splits the measurement between the recorded
// channel and an unrecorded environment channel, which only decoheres.
// Convention: Bloch z = +1 is the excited state and maps to +separation.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "jrm/rng.hpp"

namespace jrm {

struct PostselectionError : std::runtime_error {
  double survival;
  PostselectionError(const std::string& msg, double frac)
      : std::runtime_error(msg), survival(frac) {}
};

struct BlochState {
  double x = 0.0, y = 0.0, z = -1.0;
  double purity() const { return x * x + y * y + z * z; }
};

BlochState rotate_x(const BlochState& s, double angle);
BlochState rotate_y(const BlochState& s, double angle);
BlochState rotate_z(const BlochState& s, double angle);

struct ReadoutModel {
  double separation = 4.0;      // lobe center offset (recorded channel)
  double sigma = 1.0;           // record noise, same units as separation
  double eta = 1.0;             // quantum efficiency, in (0, 1]
  double alignment = 0.0;       // 0: informational; pi/2: phase (orthogonal)
  double t1_us = 0.0;           // relaxation time; <= 0 disables relaxation
  double gamma_up_per_us = 0.0; // thermal excitation rate (telegraph traces)
  double integration_time_us = 1.0;
  void validate() const;
  double strength() const { return separation / sigma; }  // per-record SNR
};

struct MeasurementRecord {
  double i;  // aligned quadrature (carries the signal)
  double q;  // orthogonal quadrature (pure noise in this model)
};

struct MeasurementOutcome {
  MeasurementRecord record;
  BlochState state;  // conditional post-measurement state
};

// One integrated measurement record plus the conditional state update;
// relaxation (t1, gamma_up) acts on the post-measurement state over the
// integration window (the record itself is not decayed). Draw order is
// fixed for reproducibility: lobe branch, i noise, q noise, then one
// uniform per enabled relaxation channel.
MeasurementOutcome sample_record(const BlochState& state, const ReadoutModel& model,
                                 Rng& rng);

// Amplitude damping over the integration window, unraveled into a jump
// (to ground) or a renormalized no-jump branch. One uniform draw.
BlochState apply_relaxation(const ReadoutModel& model, const BlochState& in, Rng& rng);

struct IQSample {
  double i, q;
};

// Single-shot IQ records for a qubit prepared in `prep` (mixed states allowed;
// only populations shape the records). Shot k uses Rng::stream(seed, k).
std::vector<IQSample> projective_histogram(const BlochState& prep, const ReadoutModel& model,
                                           int n_shots, std::uint64_t seed);

// ---- two-component 1-D Gaussian mixture (EM, deterministic init) ----

struct Gmm1d {
  double weight[2];
  double mean[2];
  double sd[2];
  int iterations;
  // Two resolved lobes: both weights above threshold and means separated by
  // at least twice the wider component.
  bool two_lobed(double min_weight = 0.02) const;
};

Gmm1d fit_gmm(const std::vector<double>& xs, int max_iter = 300);

// ---- continuously monitored telegraph traces ----

struct JumpTrace {
  std::vector<double> times;     // sample centers, us
  std::vector<double> raw;       // per-sample record
  std::vector<double> filtered;  // centered boxcar average
  std::vector<int> hidden;       // telegraph state per sample (1 = excited)
  std::vector<int> detected;     // two-threshold detector state
};

// Telegraph signal with rates 1/t1 (down) and gamma_up (up), sampled once
// per integration window (noise sigma per sample) and smoothed by a centered
// boxcar of length window_us. The detector latches 1 above +separation/2
// and 0 below -separation/2.
JumpTrace jump_trace(const ReadoutModel& model, double duration_us, double window_us,
                     std::uint64_t seed);

// ---- weak-measurement backaction tomography ----

struct BackactionProtocol {
  ReadoutModel strong;              // informational readout (alignment 0)
  double weak_ratio = 0.2;          // weak separation = ratio * strong separation
  double thermal_excitation = 0.05; // initial excited-state probability
  int n_shots = 80000;
  int n_bins = 41;
  double bin_span_sigmas = 4.0;     // bins cover +/- span * sigma of the weak record
  int min_bin_shots = 50;           // bins below this are dropped by the fit
};

struct TomogramBin {
  double record_sum = 0.0;     // sum of weak records landing in the bin
  std::int64_t n_total = 0;    // shots in the bin (all axes)
  std::int64_t n[3] = {0, 0, 0};    // per-axis shot counts (X, Y, Z)
  std::int64_t sum[3] = {0, 0, 0};  // per-axis sums of +/-1 outcomes
  double record_mean() const { return n_total ? record_sum / n_total : 0.0; }
};

struct BackactionResult {
  std::vector<TomogramBin> bins;
  std::int64_t n_prepared = 0;
  std::int64_t n_postselected = 0;
  double weak_separation = 0.0;
  double sigma = 0.0;
  double template_contrast = 0.0;  // known readout/relaxation shrink factors
  double eta_true = 0.0;           // model input, echoed for reference
  int min_bin_shots = 50;          // forwarded from the protocol for the fit
};

// Protocol per shot: thermal init -> strong measurement, keep records below
// -separation/2 -> pi/2 rotation about x (state -> +y) -> orthogonal weak
// measurement (relaxation inside) -> X/Y/Z tomography (axis = shot index
// mod 3) thresholded at zero. Outcomes are binned by the weak record.
// Shots run on per-shot RNG streams and are reduced in shot order, so the
// result is identical for any worker count. Throws PostselectionError when
// fewer than 10% of shots survive.
BackactionResult backaction_experiment(const BackactionProtocol& protocol,
                                       std::uint64_t seed, int workers = 1);

struct EfficiencyFit {
  double eta;
  double lambda;        // fitted phase-kick coefficient (nominal: sep/sigma^2)
  double eta_stderr;
  double lambda_stderr;
  double chi2;
  int n_points;
};

// Weighted least-squares fit of sideways tomograms <X>(q) = -A sin(lambda q),
// <Y>(q) = A cos(lambda q) with A = template_contrast * exp(-(1-eta)/eta *
// s_w^2/2); abscissae are bin-mean records. Grid seed plus coordinate
// refinement; standard errors from the curvature of chi^2.
EfficiencyFit fit_efficiency(const BackactionResult& result);

}  // namespace jrm
