#pragma once

// Ground-state search over the four outer node phases. The energy landscape
// is gauge-flat along (1,1,1,1) and coercive on the zero-sum subspace, so a
// multistart quasi-Newton local search with dedup is enough to classify the
// degeneracy of the classical ground state.

#include <cstdint>
#include <vector>

#include "jrm/circuit.hpp"

namespace jrm {

struct IterationLimitError : std::runtime_error {
  PhaseConfiguration best;
  double energy;
  IterationLimitError(const std::string& msg, PhaseConfiguration b, double e)
      : std::runtime_error(msg), best(b), energy(e) {}
};

struct Minimum {
  PhaseConfiguration config;  // gauge-fixed: sum of phases == 0
  double energy;
};

struct MinimaSet {
  std::vector<Minimum> minima;  // distinct global minima, sorted by (energy, phases)
  int degeneracy = 0;           // == minima.size()
  double energy_tolerance = 1e-6;
  double distance_tolerance = 1e-3;
  int failed_seeds = 0;
};

struct MinimizeOptions {
  double grad_tolerance = 1e-9;  // stop when ||grad||_2 <= this; callers rely on <= 1e-8
  int max_iterations = 600;
};

// BFGS with backtracking line search from a given start. Result is gauge
// fixed to sum(phi) = 0. Throws IterationLimitError (with best-so-far) if the
// gradient tolerance is not reached.
Minimum local_minimize(const PhaseConfiguration& start, const JrmParams& params,
                       const FluxBias& flux, const MinimizeOptions& opts = {});

// Multistart global search: n_seeds uniform starts in [-2pi, 2pi]^4 (gauge
// fixed), deterministic in rng_seed. Keeps all minima within
// energy_tolerance of the lowest and dedups by Euclidean distance.
MinimaSet global_minima(const JrmParams& params, const FluxBias& flux, int n_seeds,
                        std::uint64_t rng_seed, double energy_tolerance = 1e-6,
                        double distance_tolerance = 1e-3);

// Number of distinct global minima (1 = non-degenerate).
int degeneracy_class(const JrmParams& params, const FluxBias& flux, int n_seeds,
                     std::uint64_t rng_seed);

struct PhaseDiagramCell {
  int degeneracy = 0;
  double ground_energy = 0.0;
  int failed_seeds = 0;
  bool ok = false;
};

enum class SweepAxis { Beta, Alpha };

struct PhaseDiagram {
  SweepAxis axis;
  std::vector<double> axis_values;  // beta or alpha
  std::vector<double> flux_values;  // phi_ext
  std::vector<PhaseDiagramCell> cells;  // row-major: axis index * n_flux + flux index
  const PhaseDiagramCell& at(size_t i_axis, size_t i_flux) const {
    return cells[i_axis * flux_values.size() + i_flux];
  }
};

// Degeneracy map over (axis value) x (flux). base supplies the fixed
// parameters; the swept one is overwritten per cell. Each cell derives its
// own RNG stream from (rng_seed, cell index) so results are independent of
// worker count. workers <= 0 means hardware concurrency.
PhaseDiagram phase_diagram(const JrmParams& base, SweepAxis axis,
                           const std::vector<double>& axis_values,
                           const std::vector<double>& flux_values, int n_seeds,
                           std::uint64_t rng_seed, int workers = 0);

}  // namespace jrm
