#include "jrm/kerr.hpp"

#include <algorithm>
#include <cmath>

#include "jrm/ground_state.hpp"
#include "jrm/rng.hpp"
#include "jrm/sweep.hpp"

namespace jrm {

namespace {

constexpr double kPi = 3.14159265358979323846;

using Vec4 = std::array<double, 4>;

const Vec4 kDirA{1.0, 0.0, -1.0, 0.0};
const Vec4 kDirB{0.0, 1.0, 0.0, -1.0};
const Vec4 kDirC{0.5, -0.5, 0.5, -0.5};

Vec4 dir(RingMode m) {
  switch (m) {
    case RingMode::A: return kDirA;
    case RingMode::B: return kDirB;
    default: return kDirC;
  }
}

// quartic at phi_ext/4 for the symmetric ring
double h4_at_bias(const JrmParams& params, const FluxBias& flux) {
  return segment_derivatives(flux.phi_ext / 4.0, params.alpha)[3];
}

// f(t) = jrm_energy(x0 + t*d1 + s*d2)
double energy_along(const JrmParams& params, const FluxBias& flux, const Vec4& x0,
                    const Vec4& d1, double t, const Vec4& d2, double s) {
  PhaseConfiguration c;
  for (int i = 0; i < 4; ++i) c.phi[i] = x0[i] + t * d1[i] + s * d2[i];
  return jrm_energy(c, params, flux);
}

// The base stencils below have O(h^2) leading truncation, so the first
// Richardson level uses (4b - a)/3 and the second (16c - b)/15, leaving
// O(h^6).
double richardson2(double a, double b, double c) {
  double r1 = (4.0 * b - a) / 3.0;
  double r2 = (4.0 * c - b) / 3.0;
  return (16.0 * r2 - r1) / 15.0;
}

// fourth derivative along one direction from 5-point stencils
double fd4_pure(const JrmParams& params, const FluxBias& flux, const Vec4& x0,
                const Vec4& d) {
  auto stencil = [&](double h) {
    double f0 = energy_along(params, flux, x0, d, 0.0, d, 0.0);
    double fp1 = energy_along(params, flux, x0, d, h, d, 0.0);
    double fm1 = energy_along(params, flux, x0, d, -h, d, 0.0);
    double fp2 = energy_along(params, flux, x0, d, 2 * h, d, 0.0);
    double fm2 = energy_along(params, flux, x0, d, -2 * h, d, 0.0);
    return (fm2 - 4 * fm1 + 6 * f0 - 4 * fp1 + fp2) / (h * h * h * h);
  };
  double h = 0.08;
  return richardson2(stencil(h), stencil(h / 2), stencil(h / 4));
}

// d^4/dt^2 ds^2 via nested second differences
double fd4_mixed(const JrmParams& params, const FluxBias& flux, const Vec4& x0,
                 const Vec4& d1, const Vec4& d2) {
  auto stencil = [&](double h) {
    double acc = 0.0;
    const double w[3] = {1.0, -2.0, 1.0};
    const double o[3] = {-1.0, 0.0, 1.0};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        acc += w[i] * w[j] * energy_along(params, flux, x0, d1, o[i] * h, d2, o[j] * h);
    return acc / (h * h * h * h);
  };
  double h = 0.08;
  return richardson2(stencil(h), stencil(h / 2), stencil(h / 4));
}

}  // namespace

double KerrTensor::max_abs() const {
  return std::max({std::abs(k_aa), std::abs(k_bb), std::abs(k_cc), std::abs(k_ab),
                   std::abs(k_ac), std::abs(k_bc)});
}

KerrTensor kerr_tensor(const JrmParams& params, const FluxBias& flux) {
  params.validate();
  flux.validate();
  if (params.symmetric()) {
    double h4 = h4_at_bias(params, flux);
    KerrTensor k;
    k.k_aa = k.k_bb = k.k_cc = h4 / 6.0;
    k.k_ab = k.k_ac = k.k_bc = h4;
    return k;
  }

  // Asymmetric ring: expand about the relaxed configuration near the origin.
  PhaseConfiguration origin;
  Vec4 x0 = local_minimize(origin, params, flux).config.phi;

  KerrTensor k;
  k.k_aa = fd4_pure(params, flux, x0, kDirA) / 24.0;
  k.k_bb = fd4_pure(params, flux, x0, kDirB) / 24.0;
  k.k_cc = fd4_pure(params, flux, x0, kDirC) / 24.0;
  k.k_ab = fd4_mixed(params, flux, x0, kDirA, kDirB) / 4.0;
  k.k_ac = fd4_mixed(params, flux, x0, kDirA, kDirC) / 4.0;
  k.k_bc = fd4_mixed(params, flux, x0, kDirB, kDirC) / 4.0;
  return k;
}

NullPoint null_flux(const JrmParams& params, int n_seeds, std::uint64_t rng_seed) {
  params.validate();
  if (!params.symmetric())
    throw std::invalid_argument("null_flux requires a symmetric ring");
  if (params.alpha >= 1.0)
    throw std::invalid_argument("null_flux requires alpha < 1");

  auto f = [&](double phi_ext) {
    return segment_derivatives(phi_ext / 4.0, params.alpha)[3];
  };

  // h'''' < 0 below the null and > 0 up to 4pi; bracket and bisect/secant.
  double lo = 0.5 * kPi, hi = 4.0 * kPi;
  double flo = f(lo);
  if (flo > 0.0) throw SolverError("unexpected sign at bracket start");
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    double fm = f(mid);
    if (fm > 0.0)
      hi = mid;
    else
      lo = mid;
    if (hi - lo < 1e-12) break;
  }
  double phi_star = 0.5 * (lo + hi);

  FluxBias fb{phi_star};
  bool stable = degeneracy_class(params, fb, n_seeds, rng_seed) == 1;
  return {phi_star, stable};
}

std::vector<NullTrajectoryPoint> null_trajectory(const JrmParams& base,
                                                 const std::vector<double>& alphas,
                                                 int n_seeds, std::uint64_t rng_seed,
                                                 int workers) {
  std::vector<NullTrajectoryPoint> out(alphas.size());
  parallel_for(alphas.size(), workers, [&](std::size_t i) {
    JrmParams p = base;
    p.alpha = alphas[i];
    NullPoint np = null_flux(p, n_seeds, mix64(rng_seed) ^ mix64(i + 1));
    out[i] = {alphas[i], np.phi_star, np.stable};
  });
  return out;
}

DuffingMap duffing_map(const JrmParams& params, RingMode probe, RingMode pump,
                       const std::vector<double>& flux_values,
                       const std::vector<double>& photon_values, double freq_scale,
                       bool check_degeneracy, int n_seeds, std::uint64_t rng_seed) {
  params.validate();
  DuffingMap map;
  map.flux_values = flux_values;
  map.photon_values = photon_values;
  map.cells.resize(flux_values.size() * photon_values.size());

  bool self = probe == pump;
  for (std::size_t i = 0; i < flux_values.size(); ++i) {
    FluxBias fb{flux_values[i]};
    KerrTensor kt = kerr_tensor(params, fb);
    double k;
    if (self) {
      k = probe == RingMode::A ? kt.k_aa : (probe == RingMode::B ? kt.k_bb : kt.k_cc);
    } else {
      RingMode lo = std::min(probe, pump), hi = std::max(probe, pump);
      if (lo == RingMode::A)
        k = hi == RingMode::B ? kt.k_ab : kt.k_ac;
      else
        k = kt.k_bc;
    }
    bool flagged = false;
    // quadratic stability about the quiet configuration
    double h2 = segment_derivatives(fb.phi_ext / 4.0, params.alpha)[1];
    if (h2 + params.beta / 2.0 <= 0.0 || 2.0 * h2 + params.beta / 2.0 <= 0.0)
      flagged = true;
    if (!flagged && check_degeneracy &&
        degeneracy_class(params, fb, n_seeds, mix64(rng_seed) ^ mix64(i + 1)) != 1)
      flagged = true;

    for (std::size_t j = 0; j < photon_values.size(); ++j) {
      DuffingCell cell;
      cell.flagged = flagged;
      cell.shift = (self ? 2.0 : 1.0) * k * photon_values[j] * freq_scale;
      map.cells[i * photon_values.size() + j] = cell;
    }
  }
  return map;
}

}  // namespace jrm
