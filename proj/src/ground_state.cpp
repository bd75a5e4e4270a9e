#include "jrm/ground_state.hpp"

#include <algorithm>
#include <cmath>

#include "jrm/rng.hpp"
#include "jrm/sweep.hpp"

namespace jrm {

namespace {

using Vec4 = std::array<double, 4>;

double dot(const Vec4& a, const Vec4& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
}

double norm(const Vec4& a) { return std::sqrt(dot(a, a)); }

void gauge_fix(Vec4& p) {
  double m = (p[0] + p[1] + p[2] + p[3]) / 4.0;
  for (double& x : p) x -= m;
}

}  // namespace

Minimum local_minimize(const PhaseConfiguration& start, const JrmParams& params,
                       const FluxBias& flux, const MinimizeOptions& opts) {
  PhaseConfiguration cfg = start;
  gauge_fix(cfg.phi);  // iterates stay in the zero-sum subspace (gradient does)

  auto energy = [&](const Vec4& p) {
    PhaseConfiguration c;
    c.phi = p;
    return jrm_energy(c, params, flux);
  };
  auto gradient = [&](const Vec4& p) {
    PhaseConfiguration c;
    c.phi = p;
    return jrm_gradient(c, params, flux);
  };

  Vec4 x = cfg.phi;
  double f = energy(x);
  Vec4 g = gradient(x);

  // inverse Hessian estimate
  double H[4][4] = {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}};
  bool just_reset = false;

  for (int it = 0; it < opts.max_iterations; ++it) {
    double gn = norm(g);
    if (gn <= opts.grad_tolerance) {
      gauge_fix(x);
      PhaseConfiguration out;
      out.phi = x;
      return {out, f};
    }

    Vec4 d{};
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) d[i] -= H[i][j] * g[j];
    double slope = dot(d, g);
    if (!(slope < 0.0)) {  // lost positive definiteness: restart on steepest descent
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) H[i][j] = (i == j) ? 1.0 : 0.0;
      for (int i = 0; i < 4; ++i) d[i] = -g[i];
      slope = dot(d, g);
    }

    // backtracking Armijo line search; the first trial is capped to a 10 rad
    // move so a badly scaled inverse-Hessian direction cannot leave the
    // segment solver's guarded domain before descent is enforced
    double dn = norm(d);
    double t = dn > 10.0 ? 10.0 / dn : 1.0;
    double f_new = f;
    Vec4 x_new = x;
    Vec4 g_new{};
    bool ok = false;
    bool have_g_new = false;
    // Near the minimum the true decrease per step drops below the floating
    // point resolution of the energy. On that plateau a step is accepted only
    // if it contracts the gradient norm, which keeps the polish monotone
    // instead of letting noise-level energy comparisons accept random walks.
    const double f_noise = 4e-16 * std::max(1.0, std::abs(f));
    for (int ls = 0; ls < 60; ++ls) {
      for (int i = 0; i < 4; ++i) x_new[i] = x[i] + t * d[i];
      f_new = energy(x_new);
      if (f_new < f + 1e-4 * t * slope) {  // measurable descent
        ok = true;
        break;
      }
      if (f_new <= f + f_noise) {  // flat at floating-point resolution
        Vec4 gt = gradient(x_new);
        if (norm(gt) < 0.9 * gn) {
          g_new = gt;
          have_g_new = true;
          ok = true;
          break;
        }
      }
      t *= 0.5;
    }
    if (!ok) {
      // direction exhausted; if the gradient is already tiny accept
      if (gn <= 1e-8) {
        gauge_fix(x);
        PhaseConfiguration out;
        out.phi = x;
        return {out, f};
      }
      if (!just_reset) {  // retry once along steepest descent with fresh curvature
        for (int i = 0; i < 4; ++i)
          for (int j = 0; j < 4; ++j) H[i][j] = (i == j) ? 1.0 : 0.0;
        just_reset = true;
        continue;
      }
      break;
    }
    just_reset = false;

    if (!have_g_new) g_new = gradient(x_new);
    Vec4 s, y;
    for (int i = 0; i < 4; ++i) {
      s[i] = x_new[i] - x[i];
      y[i] = g_new[i] - g[i];
    }
    double sy = dot(s, y);
    if (sy > 1e-12) {  // BFGS update on the inverse Hessian
      double rho = 1.0 / sy;
      double Hy[4];
      for (int i = 0; i < 4; ++i) {
        Hy[i] = 0.0;
        for (int j = 0; j < 4; ++j) Hy[i] += H[i][j] * y[j];
      }
      double yHy = 0.0;
      for (int i = 0; i < 4; ++i) yHy += y[i] * Hy[i];
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
          H[i][j] += (1.0 + rho * yHy) * rho * s[i] * s[j] - rho * (Hy[i] * s[j] + s[i] * Hy[j]);
    }
    x = x_new;
    f = f_new;
    g = g_new;
  }

  gauge_fix(x);
  PhaseConfiguration out;
  out.phi = x;
  throw IterationLimitError("local_minimize hit iteration limit", out, f);
}

MinimaSet global_minima(const JrmParams& params, const FluxBias& flux, int n_seeds,
                        std::uint64_t rng_seed, double energy_tolerance,
                        double distance_tolerance) {
  params.validate();
  flux.validate();
  if (n_seeds < 1) throw std::invalid_argument("n_seeds must be >= 1");

  MinimaSet set;
  set.energy_tolerance = energy_tolerance;
  set.distance_tolerance = distance_tolerance;

  std::vector<Minimum> found;
  found.reserve(n_seeds);
  for (int k = 0; k < n_seeds; ++k) {
    Rng rng = Rng::stream(rng_seed, static_cast<std::uint64_t>(k));
    PhaseConfiguration seed;
    for (int i = 0; i < 4; ++i) seed.phi[i] = rng.uniform(-2.0 * M_PI, 2.0 * M_PI);
    try {
      found.push_back(local_minimize(seed, params, flux));
    } catch (const IterationLimitError&) {
      ++set.failed_seeds;
    }
  }
  if (found.empty()) throw SolverError("all minimization seeds failed");

  std::sort(found.begin(), found.end(), [](const Minimum& a, const Minimum& b) {
    if (a.energy != b.energy) return a.energy < b.energy;
    return a.config.phi < b.config.phi;
  });
  double e0 = found.front().energy;
  for (const Minimum& m : found) {
    if (m.energy > e0 + energy_tolerance) break;
    bool dup = false;
    for (const Minimum& r : set.minima) {
      double d2 = 0.0;
      for (int i = 0; i < 4; ++i) {
        double d = m.config.phi[i] - r.config.phi[i];
        d2 += d * d;
      }
      if (std::sqrt(d2) < distance_tolerance) {
        dup = true;
        break;
      }
    }
    if (!dup) set.minima.push_back(m);
  }
  set.degeneracy = static_cast<int>(set.minima.size());
  return set;
}

int degeneracy_class(const JrmParams& params, const FluxBias& flux, int n_seeds,
                     std::uint64_t rng_seed) {
  return global_minima(params, flux, n_seeds, rng_seed).degeneracy;
}

PhaseDiagram phase_diagram(const JrmParams& base, SweepAxis axis,
                           const std::vector<double>& axis_values,
                           const std::vector<double>& flux_values, int n_seeds,
                           std::uint64_t rng_seed, int workers) {
  PhaseDiagram out;
  out.axis = axis;
  out.axis_values = axis_values;
  out.flux_values = flux_values;
  out.cells.resize(axis_values.size() * flux_values.size());

  parallel_for(out.cells.size(), workers, [&](std::size_t idx) {
    std::size_t ia = idx / flux_values.size();
    std::size_t jf = idx % flux_values.size();
    JrmParams p = base;
    if (axis == SweepAxis::Beta)
      p.beta = axis_values[ia];
    else
      p.alpha = axis_values[ia];
    FluxBias fb{flux_values[jf]};
    PhaseDiagramCell cell;
    try {
      MinimaSet set = global_minima(p, fb, n_seeds, mix64(rng_seed) ^ mix64(idx + 1));
      cell.degeneracy = set.degeneracy;
      cell.ground_energy = set.minima.front().energy;
      cell.failed_seeds = set.failed_seeds;
      cell.ok = true;
    } catch (const std::exception&) {
      cell.ok = false;
    }
    out.cells[idx] = cell;
  });
  return out;
}

}  // namespace jrm
