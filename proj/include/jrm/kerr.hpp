#pragma once

// Quartic (Kerr) expansion of the ring potential about its quiet
// configuration, in the differential/common mode basis
//   e_a = (1,0,-1,0), e_b = (0,1,0,-1), e_c = (1,-1,1,-1)/2,
// normalized so every junction sees unit phase excursion per unit mode
// amplitude. For a symmetric ring all self-Kerr terms equal h''''(phi_ext/4)/6
// and all cross-Kerr terms equal h''''(phi_ext/4), so cross = 6 * self and all
// six share a common zero where the quartic of one arm vanishes.

#include <cstdint>
#include <vector>

#include "jrm/circuit.hpp"

namespace jrm {

struct KerrTensor {
  double k_aa, k_bb, k_cc;  // self-Kerr, E_J units (phase^4 coefficient)
  double k_ab, k_ac, k_bc;  // cross-Kerr
  double max_abs() const;
};

// Symmetric params: closed form from segment_derivatives (order 4).
// Asymmetric params: fourth-order central differences of jrm_energy along the
// mode directions, expanded about the relaxed configuration.
KerrTensor kerr_tensor(const JrmParams& params, const FluxBias& flux);

// Flux where all six symmetric-ring Kerr coefficients vanish: the root of
// h''''(phi_ext/4) nearest 2pi from above, located to 1e-9 rad.
// Requires symmetric params and alpha < 1 (the root leaves (0, 4pi] at
// alpha = 1). `stable` reports whether the ground state there is
// non-degenerate (multistart check with n_seeds starts).
struct NullPoint {
  double phi_star;
  bool stable;
};
NullPoint null_flux(const JrmParams& params, int n_seeds = 256,
                    std::uint64_t rng_seed = 1);

// phi*(alpha) and its stability along an alpha ramp at fixed beta.
struct NullTrajectoryPoint {
  double alpha;
  double phi_star;
  bool stable;
};
std::vector<NullTrajectoryPoint> null_trajectory(const JrmParams& base,
                                                 const std::vector<double>& alphas,
                                                 int n_seeds = 256,
                                                 std::uint64_t rng_seed = 1,
                                                 int workers = 0);

// Self/cross Duffing shift map: delta_omega(flux, n) = 2*K_self*n for
// probe == pump, K_cross*n otherwise, scaled by freq_scale (caller's E_J in
// frequency units). Cells whose quadratic expansion about the quiet
// configuration is unstable, or (optionally) whose ground state is
// degenerate, are flagged.
enum class RingMode { A, B, C };

struct DuffingCell {
  double shift = 0.0;
  bool flagged = false;
};

struct DuffingMap {
  std::vector<double> flux_values;
  std::vector<double> photon_values;
  std::vector<DuffingCell> cells;  // row-major: flux index * n_photon + photon index
  const DuffingCell& at(size_t i_flux, size_t i_n) const {
    return cells[i_flux * photon_values.size() + i_n];
  }
};

DuffingMap duffing_map(const JrmParams& params, RingMode probe, RingMode pump,
                       const std::vector<double>& flux_values,
                       const std::vector<double>& photon_values,
                       double freq_scale = 1.0, bool check_degeneracy = false,
                       int n_seeds = 64, std::uint64_t rng_seed = 1);

}  // namespace jrm
