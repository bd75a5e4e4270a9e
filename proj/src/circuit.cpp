#include "jrm/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace jrm {

bool JrmParams::symmetric() const {
  for (double a : junction_asymmetry)
    if (a != 1.0) return false;
  for (double e : loop_flux_asymmetry)
    if (e != 0.0) return false;
  return true;
}

void JrmParams::validate() const {
  if (!(e_j > 0.0)) throw std::invalid_argument("e_j must be > 0");
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be > 0");
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be >= 0");
  for (double a : junction_asymmetry)
    if (!(a > 0.0)) throw std::invalid_argument("junction_asymmetry factors must be > 0");
  for (double e : loop_flux_asymmetry)
    if (!std::isfinite(e)) throw std::invalid_argument("loop_flux_asymmetry must be finite");
  const double rel = 1e-9;
  if (l_shunt) {
    double implied = 1.0 / (*l_shunt * e_j);
    if (std::abs(implied - beta) > rel * std::abs(beta))
      throw std::invalid_argument("l_shunt inconsistent with beta = 1/(l_shunt*e_j)");
  }
  if (l_out) {
    double implied = *l_out * e_j;
    if (std::abs(implied - alpha) > rel * std::max(1.0, std::abs(alpha)))
      throw std::invalid_argument("l_out inconsistent with alpha = l_out*e_j");
  }
}

void FluxBias::validate() const {
  if (!std::isfinite(phi_ext)) throw std::invalid_argument("phi_ext must be finite");
}

namespace {

// Newton on g(chi) = chi + alpha sin chi - phi with a maintained bracket;
// g must be monotone on [lo, hi] with a sign change (either orientation).
double newton_bracketed(double phi, double alpha, double lo, double hi, bool rising) {
  // Iterate to a double-precision fixed point: downstream minimizers compare
  // energies at ~1e-16 resolution, so any slack left here shows up as noise
  // on the energy landscape.
  double chi = std::clamp(phi, lo, hi);
  double best = chi;
  double best_g = std::abs(chi + alpha * std::sin(chi) - phi);
  for (int it = 0; it < 200; ++it) {
    double g = chi + alpha * std::sin(chi) - phi;
    if (std::abs(g) <= best_g) { best_g = std::abs(g); best = chi; }
    if (g == 0.0) return chi;
    if ((g > 0.0) == rising) hi = chi; else lo = chi;
    double dg = 1.0 + alpha * std::cos(chi);
    double next;
    if (std::abs(dg) > 1e-14) {
      next = chi - g / dg;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);  // fall back to bisection
    } else {
      next = 0.5 * (lo + hi);
    }
    if (next == chi) return chi;  // step underflowed: converged to roundoff
    chi = next;
    if (hi - lo < 4e-16 * std::max(1.0, std::abs(chi))) break;
  }
  // Only reachable when the iterates cycle among adjacent doubles; keep the
  // tightest residual seen.
  if (best_g > 1e-10)
    throw SolverError("segment phase solve did not converge");
  return best;
}

// Root for phi >= 0 (unique when alpha < 1). Callers mirror for phi < 0 so
// h(phi) is even to the last bit.
double solve_core(double phi, double alpha) {
  if (alpha == 0.0) return phi;
  if (alpha < 1.0)
    return newton_bracketed(phi, alpha, phi - alpha, phi + alpha, /*rising=*/true);

  // alpha >= 1: g can be non-monotone. Split [phi-alpha, phi+alpha] at the
  // critical points of g (cos chi = -1/alpha), root-find in every
  // sign-changing monotone piece, keep the branch of lowest energy.
  double lo = phi - alpha, hi = phi + alpha;
  std::vector<double> knots{lo};
  double base = std::acos(-1.0 / alpha);  // in (pi/2, pi]
  double two_pi = 2.0 * std::acos(-1.0);
  for (long k = std::lround(std::floor((lo) / two_pi)) - 1;
       k <= std::lround(std::ceil((hi) / two_pi)) + 1; ++k) {
    for (double c : {base + k * two_pi, -base + k * two_pi})
      if (c > lo && c < hi) knots.push_back(c);
  }
  knots.push_back(hi);
  std::sort(knots.begin(), knots.end());

  auto g = [&](double c) { return c + alpha * std::sin(c) - phi; };
  auto energy = [&](double c) {
    double s = std::sin(c);
    return 0.5 * alpha * s * s - std::cos(c);
  };
  double best_chi = std::numeric_limits<double>::quiet_NaN();
  double best_e = std::numeric_limits<double>::infinity();
  auto consider = [&](double root) {
    double e = energy(root);
    if (e < best_e - 1e-15 ||
        (std::abs(e - best_e) <= 1e-15 &&
         (!std::isfinite(best_chi) || std::abs(root) < std::abs(best_chi)))) {
      best_e = e;
      best_chi = root;
    }
  };
  for (size_t i = 0; i + 1 < knots.size(); ++i) {
    double a = knots[i], b = knots[i + 1];
    double ga = g(a), gb = g(b);
    if (ga == 0.0) consider(a);
    if (gb == 0.0) consider(b);
    if (ga * gb < 0.0) consider(newton_bracketed(phi, alpha, a, b, /*rising=*/gb > ga));
  }
  if (!std::isfinite(best_chi)) throw SolverError("no segment branch found");
  return best_chi;
}

inline double seg_energy_from_chi(double chi, double alpha) {
  double s = std::sin(chi);
  return 0.5 * alpha * s * s - std::cos(chi);  // exact at stationary chi
}

void guard_phi(double phi) {
  if (!(std::abs(phi) < 100.0))
    throw std::invalid_argument("segment phase out of guarded range |phi| < 100");
}

}  // namespace

double solve_segment_phase(double phi, double alpha) {
  guard_phi(phi);
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be >= 0");
  if (phi < 0.0) return -solve_core(-phi, alpha);
  return solve_core(phi, alpha);
}

double segment_energy(double phi, double alpha) {
  guard_phi(phi);
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be >= 0");
  double chi = solve_core(std::abs(phi), alpha);
  return seg_energy_from_chi(chi, alpha);  // even in phi by construction
}

std::array<double, 4> segment_derivatives(double phi, double alpha) {
  double chi = solve_segment_phase(phi, alpha);
  double s = std::sin(chi), c = std::cos(chi);
  double w = 1.0 + alpha * c;
  if (w <= 1e-12)
    throw BranchInstabilityError("1 + alpha*cos(chi) <= 0: branch unstable at phi=" +
                                 std::to_string(phi));
  double w2 = w * w, w4 = w2 * w2;
  return {s, c / w, -s / (w2 * w), -c / w4 - 3.0 * alpha * s * s / (w4 * w)};
}

namespace {

struct SegmentTerms {
  std::array<double, 4> u;      // biased phase across each arm
  std::array<double, 4> a;      // junction scale per arm
  std::array<double, 4> aalpha; // effective alpha per arm
};

SegmentTerms segment_terms(const PhaseConfiguration& config, const JrmParams& params,
                           const FluxBias& flux) {
  SegmentTerms t;
  double f = flux.phi_ext / 4.0;
  const auto& p = config.phi;
  for (int i = 0; i < 4; ++i) {
    t.u[i] = p[(i + 1) % 4] - p[i] - f - params.loop_flux_asymmetry[i];
    t.a[i] = params.junction_asymmetry[i];
    t.aalpha[i] = params.alpha * t.a[i];
  }
  return t;
}

}  // namespace

double jrm_energy(const PhaseConfiguration& config, const JrmParams& params,
                  const FluxBias& flux) {
  double mean = config.center_phase();
  double shunt = 0.0;
  for (double p : config.phi) {
    double d = p - mean;
    shunt += d * d;
  }
  shunt *= 0.5 * params.beta;

  auto t = segment_terms(config, params, flux);
  double out = 0.0;
  for (int i = 0; i < 4; ++i) out += t.a[i] * segment_energy(t.u[i], t.aalpha[i]);
  return shunt + out;
}

std::array<double, 4> jrm_gradient(const PhaseConfiguration& config,
                                   const JrmParams& params, const FluxBias& flux) {
  double mean = config.center_phase();
  auto t = segment_terms(config, params, flux);
  std::array<double, 4> d1;  // d/du of each arm's energy = a_i * sin(chi_i)
  for (int i = 0; i < 4; ++i)
    d1[i] = t.a[i] * std::sin(solve_segment_phase(t.u[i], t.aalpha[i]));

  std::array<double, 4> g;
  for (int j = 0; j < 4; ++j)
    g[j] = params.beta * (config.phi[j] - mean) + d1[(j + 3) % 4] - d1[j];
  return g;
}

std::array<double, 4> internal_phases(const PhaseConfiguration& config,
                                      const JrmParams& params, const FluxBias& flux) {
  if (!(params.alpha > 0.0))
    throw std::invalid_argument("internal phases only defined for alpha > 0");
  auto t = segment_terms(config, params, flux);
  double f = flux.phi_ext / 4.0;
  std::array<double, 4> delta;
  for (int i = 0; i < 4; ++i)
    delta[i] = config.phi[i] + f + params.loop_flux_asymmetry[i] +
               solve_segment_phase(t.u[i], t.aalpha[i]);
  return delta;
}

}  // namespace jrm
