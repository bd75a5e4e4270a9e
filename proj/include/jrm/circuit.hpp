#pragma once

// Ring-modulator circuit energetics. Reduced units throughout: phases in
// radians, energies in units of the junction energy E_J, with
//   beta  = L_J / L_shunt   (shunt participation)
//   alpha = L_out / L_J     (stray series inductance per arm)
// A ring arm ("segment") is a junction in series with the stray inductor; its
// energy at total biased phase p is obtained by minimizing over the internal
// junction phase chi:
//   h(p) = min_chi [ (p - chi)^2 / (2 alpha) - cos(chi) ]
// whose stationarity condition is the Kepler-like equation
//   chi + alpha sin(chi) = p.

#include <array>
#include <optional>
#include <stdexcept>
#include <string>

namespace jrm {

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// 1 + alpha*cos(chi) <= 0 at the selected branch: implicit derivatives blow up.
struct BranchInstabilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct JrmParams {
  double e_j = 1.0;    // junction energy scale (E_J units)
  double beta = 4.5;   // L_J / L_shunt, > 0
  double alpha = 0.0;  // L_out / L_J, >= 0
  std::array<double, 4> junction_asymmetry{1.0, 1.0, 1.0, 1.0};  // multiplies e_j per arm
  std::array<double, 4> loop_flux_asymmetry{0.0, 0.0, 0.0, 0.0}; // adds to phi_ext/4 per arm
  // optional physical inductances; when set they must be consistent with
  // beta = 1/(l_shunt*e_j) and alpha = l_out*e_j in reduced units (phi0 = 1)
  std::optional<double> l_shunt;
  std::optional<double> l_out;

  bool symmetric() const;
  void validate() const;  // throws std::invalid_argument
};

struct FluxBias {
  double phi_ext = 0.0;  // external flux in phase units, 2pi = one flux quantum through the ring
  void validate() const;
};

struct PhaseConfiguration {
  std::array<double, 4> phi{0.0, 0.0, 0.0, 0.0};  // outer node phases
  // internal stray-node phases; meaningful only when alpha > 0 and tracked explicitly
  std::optional<std::array<double, 4>> delta;

  double center_phase() const {  // gauge mean, never stored as independent state
    return (phi[0] + phi[1] + phi[2] + phi[3]) / 4.0;
  }
};

// Internal junction phase chi solving chi + alpha sin(chi) = phi.
// Safeguarded Newton (bisection fallback), |residual| tolerance 1e-12 in chi.
// For alpha >= 1 several branches may exist; the global energy minimum wins,
// ties resolved toward the smallest |chi|. Guards |phi| < 100.
double solve_segment_phase(double phi, double alpha);

// Segment energy h(phi) in E_J units; even in phi, h(0) = -1.
double segment_energy(double phi, double alpha);

// d^n h / d phi^n for n = 1..4 via implicit differentiation of the
// stationarity condition (w = 1 + alpha cos chi):
//   h'    = sin chi
//   h''   = cos chi / w
//   h'''  = -sin chi / w^3
//   h'''' = -cos chi / w^4 - 3 alpha sin^2 chi / w^5
// Throws BranchInstabilityError when w <= 0.
std::array<double, 4> segment_derivatives(double phi, double alpha);

// Total ring energy: shunt term (beta/2) sum (phi_i - mean)^2 plus the four
// segment energies at biased differences phi_{i+1} - phi_i - phi_ext/4.
// Junction asymmetry a_i rescales a segment as a_i * h(p; a_i*alpha).
double jrm_energy(const PhaseConfiguration& config, const JrmParams& params,
                  const FluxBias& flux);

// Analytic gradient of jrm_energy w.r.t. the four node phases.
// Components always sum to zero (gauge direction is exactly flat).
std::array<double, 4> jrm_gradient(const PhaseConfiguration& config,
                                   const JrmParams& params, const FluxBias& flux);

// Stray-node phases implied by a configuration (one per arm):
// delta_j = phi_j + phi_ext/4 + chi(u_j). Requires alpha > 0.
std::array<double, 4> internal_phases(const PhaseConfiguration& config,
                                      const JrmParams& params, const FluxBias& flux);

}  // namespace jrm
