// Multistart ground-state search: convergence quality, degeneracy
// classification on known-stable and known-degenerate parameter points,
// robustness to the seed budget, and byte-level determinism across repeated
// runs and worker counts.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>

#include "jrm/circuit.hpp"
#include "jrm/ground_state.hpp"
#include "jrm/rng.hpp"

using namespace jrm;

namespace {

constexpr double kPi = 3.14159265358979323846;

Eigen::Matrix4d fd_hessian(const PhaseConfiguration& c, const JrmParams& params,
                           const FluxBias& flux) {
  Eigen::Matrix4d h;
  const double step = 1e-5;
  for (int i = 0; i < 4; ++i) {
    PhaseConfiguration up = c, dn = c;
    up.phi[i] += step;
    dn.phi[i] -= step;
    auto gu = jrm_gradient(up, params, flux);
    auto gd = jrm_gradient(dn, params, flux);
    for (int j = 0; j < 4; ++j) h(i, j) = (gu[j] - gd[j]) / (2.0 * step);
  }
  return 0.5 * (h + h.transpose());
}

}  // namespace

TEST_CASE("local minimization reaches tight gradient norms and lowers energy") {
  JrmParams params;
  params.beta = 4.5;
  params.alpha = 0.2;
  FluxBias flux{2.0 * kPi};
  Rng rng(11);
  for (int k = 0; k < 20; ++k) {
    PhaseConfiguration start;
    for (auto& x : start.phi) x = rng.uniform(-2.0 * kPi, 2.0 * kPi);
    double e_start = jrm_energy(start, params, flux);
    Minimum m = local_minimize(start, params, flux);
    CHECK(m.energy <= e_start + 1e-12);
    auto g = jrm_gradient(m.config, params, flux);
    double gn = std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2] + g[3] * g[3]);
    CHECK(gn <= 1e-8);
    double s = m.config.phi[0] + m.config.phi[1] + m.config.phi[2] + m.config.phi[3];
    CHECK(std::abs(s) < 1e-9);  // gauge fixed
  }
}

TEST_CASE("minima are second-order stable orthogonal to the gauge direction") {
  JrmParams params;
  params.beta = 2.0;
  params.alpha = 0.3;
  FluxBias flux{1.7 * kPi};
  MinimaSet set = global_minima(params, flux, 64, 5);
  REQUIRE(set.degeneracy >= 1);
  for (const Minimum& m : set.minima) {
    Eigen::Matrix4d h = fd_hessian(m.config, params, flux);
    // project out (1,1,1,1)/2
    Eigen::Vector4d gauge = Eigen::Vector4d::Ones() / 2.0;
    Eigen::Matrix4d p = Eigen::Matrix4d::Identity() - gauge * gauge.transpose();
    Eigen::Matrix4d hp = p * h * p;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(hp);
    // three positive curvatures plus the projected-out zero
    CHECK(es.eigenvalues()(0) > -1e-6);
    CHECK(es.eigenvalues()(1) > 1e-8);
  }
}

TEST_CASE("known classification points") {
  JrmParams params;  // beta = 4.5, alpha = 0
  // Strong shunt at one flux quantum: unique ground state.
  CHECK(degeneracy_class(params, FluxBias{2.0 * kPi}, 128, 1) == 1);
  // Weak shunt at one flux quantum: frustrated, multiple minima.
  JrmParams weak = params;
  weak.beta = 0.5;
  CHECK(degeneracy_class(weak, FluxBias{2.0 * kPi}, 128, 1) >= 2);
  // Zero flux: always a unique (up to gauge) minimum at equal phases.
  CHECK(degeneracy_class(weak, FluxBias{0.0}, 128, 1) == 1);
  MinimaSet set = global_minima(params, FluxBias{0.0}, 64, 2);
  REQUIRE(set.degeneracy == 1);
  CHECK(set.minima[0].energy == doctest::Approx(-4.0).epsilon(1e-10));
  for (double x : set.minima[0].config.phi) CHECK(std::abs(x) < 1e-6);
}

TEST_CASE("degenerate set at weak shunt is energy-coincident, spatially distinct") {
  JrmParams weak;
  weak.beta = 0.5;
  MinimaSet set = global_minima(weak, FluxBias{2.0 * kPi}, 256, 3);
  REQUIRE(set.degeneracy >= 2);
  double e0 = set.minima[0].energy;
  for (std::size_t i = 0; i < set.minima.size(); ++i) {
    CHECK(std::abs(set.minima[i].energy - e0) <= set.energy_tolerance);
    for (std::size_t j = i + 1; j < set.minima.size(); ++j) {
      double d2 = 0.0;
      for (int t = 0; t < 4; ++t) {
        double d = set.minima[i].config.phi[t] - set.minima[j].config.phi[t];
        d2 += d * d;
      }
      CHECK(std::sqrt(d2) > set.distance_tolerance);
    }
  }
}

TEST_CASE("classification is robust to the seed budget") {
  struct Probe {
    double beta, flux;
  };
  for (const Probe& p : {Probe{4.5, 2.0 * kPi}, Probe{0.5, 2.0 * kPi}, Probe{6.0, 4.0 * kPi},
                         Probe{2.0, 3.0 * kPi}}) {
    JrmParams params;
    params.beta = p.beta;
    int d128 = degeneracy_class(params, FluxBias{p.flux}, 128, 17);
    int d256 = degeneracy_class(params, FluxBias{p.flux}, 256, 99);
    CHECK(d128 == d256);
  }
}

TEST_CASE("alpha > 0 search agrees with the stray-free limit where it should") {
  // At tiny alpha the landscape is a small deformation: same degeneracy class.
  JrmParams params;
  params.beta = 4.5;
  FluxBias flux{2.0 * kPi};
  int d0 = degeneracy_class(params, flux, 96, 7);
  params.alpha = 1e-4;
  CHECK(degeneracy_class(params, flux, 96, 7) == d0);
}

TEST_CASE("global search is deterministic in the seed") {
  JrmParams params;
  params.beta = 1.2;
  FluxBias flux{2.3 * kPi};
  MinimaSet a = global_minima(params, flux, 64, 42);
  MinimaSet b = global_minima(params, flux, 64, 42);
  REQUIRE(a.degeneracy == b.degeneracy);
  for (int i = 0; i < a.degeneracy; ++i) {
    CHECK(a.minima[i].energy == b.minima[i].energy);  // bit-exact
    for (int t = 0; t < 4; ++t)
      CHECK(a.minima[i].config.phi[t] == b.minima[i].config.phi[t]);
  }
  MinimaSet c = global_minima(params, flux, 64, 43);
  CHECK(c.degeneracy == a.degeneracy);  // different seed, same physics
}

TEST_CASE("phase diagram cells are worker-count invariant") {
  JrmParams base;
  base.beta = 4.5;
  std::vector<double> betas{0.5, 1.5, 3.0, 5.0};
  std::vector<double> fluxes{0.0, kPi, 2.0 * kPi, 3.0 * kPi, 4.0 * kPi};
  PhaseDiagram one = phase_diagram(base, SweepAxis::Beta, betas, fluxes, 48, 7, 1);
  PhaseDiagram many = phase_diagram(base, SweepAxis::Beta, betas, fluxes, 48, 7, 4);
  REQUIRE(one.cells.size() == many.cells.size());
  for (std::size_t i = 0; i < one.cells.size(); ++i) {
    CHECK(one.cells[i].degeneracy == many.cells[i].degeneracy);
    CHECK(one.cells[i].ground_energy == many.cells[i].ground_energy);  // bit-exact
    CHECK(one.cells[i].ok == many.cells[i].ok);
  }
  // spot physics: large beta cells are unique everywhere
  for (std::size_t jf = 0; jf < fluxes.size(); ++jf)
    CHECK(one.at(3, jf).degeneracy == 1);
}

TEST_CASE("degeneracy shrinks monotonically as the shunt stiffens at 2 pi") {
  FluxBias flux{2.0 * kPi};
  int prev = 1000;
  for (double beta : {0.3, 0.7, 1.3, 3.0, 5.5}) {
    JrmParams params;
    params.beta = beta;
    int d = degeneracy_class(params, flux, 128, 23);
    CHECK(d <= prev);
    prev = d;
  }
  CHECK(prev == 1);
}
