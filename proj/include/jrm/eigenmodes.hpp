#pragma once

// Small-oscillation normal modes of the shunted ring. The linearized
// equations of motion carry node masses (2*C1, 2*C4, 2*C2, 2*C3) for nodes
// (1, 2, 3, 4) — this index pattern follows the device netlist and is
// preserved verbatim. Stray series inductance renormalizes the junction term
// as E_J -> E_J cos(Delta)/(1 + alpha cos(Delta)), where Delta solves
// Delta + alpha sin(Delta) = phi_ext/4; eigenvectors are unaffected.
// Squared frequencies are reported in units of E_J/(Cbar*phi0^2), Cbar the
// geometric mean capacitance.

#include <array>
#include <vector>

#include "jrm/circuit.hpp"

namespace jrm {

struct InstabilityError : std::runtime_error {
  double phi_ext;
  InstabilityError(const std::string& msg, double flux)
      : std::runtime_error(msg), phi_ext(flux) {}
};

struct CapacitanceSet {
  double c1 = 1.0, c2 = 1.0, c3 = 1.0, c4 = 1.0;
  void validate() const;
  double geometric_mean() const;
  bool pairwise_symmetric() const { return c1 == c2 && c3 == c4; }
};

// Equilibrium renormalization angle Delta (Kepler equation, 1e-12 residual).
double delta_equilibrium(double alpha, const FluxBias& flux);

// Junction renormalization factor cos(Delta)/(1 + alpha cos(Delta)); reduces
// to cos(phi_ext/4) at alpha = 0.
double junction_renormalization(double alpha, const FluxBias& flux);

using Mat4 = std::array<std::array<double, 4>, 4>;

// Dynamical matrix M with phidotdot = -M phi, in the units above.
Mat4 dynamical_matrix(const JrmParams& params, const CapacitanceSet& caps,
                      const FluxBias& flux);

struct EigenResult {
  std::array<double, 4> omega;                 // sorted ascending; omega[0] == 0
  std::array<std::array<double, 4>, 4> vecs;   // unit norm, first nonzero component > 0
  double lambda1, lambda2;                     // common-mode weights from the c eigenvector
  int index_a, index_b, index_c;               // pattern-classified mode indices
};

// Generalized symmetric eigensolve; vectors are orthogonal under the
// capacitance-weighted inner product. Throws InstabilityError when any
// squared frequency is negative beyond tolerance.
EigenResult eigenmodes(const JrmParams& params, const CapacitanceSet& caps,
                       const FluxBias& flux);

struct ModeCurvePoint {
  double phi_ext;
  double omega_a, omega_b, omega_c;  // NaN when the linearization is unstable
  bool ok;
};

std::vector<ModeCurvePoint> mode_frequencies_vs_flux(const JrmParams& params,
                                                     const CapacitanceSet& caps,
                                                     const std::vector<double>& flux_values);

}  // namespace jrm
