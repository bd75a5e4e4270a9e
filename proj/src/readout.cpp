#include "jrm/readout.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "jrm/sweep.hpp"

namespace jrm {

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

BlochState rotate_x(const BlochState& s, double angle) {
  const double c = std::cos(angle), sn = std::sin(angle);
  return {s.x, s.y * c - s.z * sn, s.y * sn + s.z * c};
}

BlochState rotate_y(const BlochState& s, double angle) {
  const double c = std::cos(angle), sn = std::sin(angle);
  return {s.x * c + s.z * sn, s.y, -s.x * sn + s.z * c};
}

BlochState rotate_z(const BlochState& s, double angle) {
  const double c = std::cos(angle), sn = std::sin(angle);
  return {s.x * c - s.y * sn, s.x * sn + s.y * c, s.z};
}

void ReadoutModel::validate() const {
  if (!(separation >= 0) || !std::isfinite(separation))
    throw std::invalid_argument("separation must be nonnegative and finite");
  if (!(sigma > 0) || !std::isfinite(sigma))
    throw std::invalid_argument("sigma must be positive and finite");
  if (!(eta > 0) || eta > 1.0)
    throw std::invalid_argument("efficiency must lie in (0, 1]");
  if (!std::isfinite(alignment)) throw std::invalid_argument("alignment must be finite");
  if (gamma_up_per_us < 0 || !std::isfinite(gamma_up_per_us))
    throw std::invalid_argument("excitation rate must be nonnegative and finite");
  if (!(integration_time_us > 0) || !std::isfinite(integration_time_us))
    throw std::invalid_argument("integration time must be positive and finite");
}

MeasurementOutcome sample_record(const BlochState& state, const ReadoutModel& model,
                                 Rng& rng) {
  model.validate();
  const double s2 = model.sigma * model.sigma;
  const double sep_i = model.separation * std::cos(model.alignment);
  const double kick = model.separation * std::sin(model.alignment) / s2;

  const double pe = 0.5 * (1.0 + state.z);
  const bool upper = rng.uniform() < pe;
  const double i = rng.gaussian(upper ? sep_i : -sep_i, model.sigma);
  const double q = rng.gaussian(0.0, model.sigma);

  BlochState out = state;
  if (sep_i != 0.0) {
    // Bayesian update from the two lobe likelihoods (common factor removed;
    // log-space keeps the tails finite).
    const double le = -(i - sep_i) * (i - sep_i) / (2.0 * s2);
    const double lg = -(i + sep_i) * (i + sep_i) / (2.0 * s2);
    const double lm = std::max(le, lg);
    const double we = (1.0 + state.z) * std::exp(le - lm);
    const double wg = (1.0 - state.z) * std::exp(lg - lm);
    const double norm = we + wg;
    out.z = (we - wg) / norm;
    const double coh = 2.0 * std::exp(0.5 * (le + lg) - lm) / norm;
    out.x = state.x * coh;
    out.y = state.y * coh;
  }
  if (kick != 0.0) out = rotate_z(out, kick * i);
  if (model.eta < 1.0) {
    // Unrecorded share of the measurement only dephases.
    const double env =
        std::exp(-(1.0 - model.eta) * model.separation * model.separation /
                 (2.0 * model.eta * s2));
    out.x *= env;
    out.y *= env;
  }
  // Relaxation channels act on the post-measurement state; the record
  // integrates faster than the state decays in this model.
  if (model.t1_us > 0.0 && std::isfinite(model.t1_us))
    out = apply_relaxation(model, out, rng);
  if (model.gamma_up_per_us > 0.0) {
    const double p_up = (1.0 - std::exp(-model.gamma_up_per_us * model.integration_time_us)) *
                        0.5 * (1.0 - out.z);
    if (rng.uniform() < p_up) out = BlochState{0.0, 0.0, 1.0};
  }
  return {{i, q}, out};
}

BlochState apply_relaxation(const ReadoutModel& model, const BlochState& in, Rng& rng) {
  if (model.t1_us <= 0.0 || !std::isfinite(model.t1_us)) return in;
  const double gamma = 1.0 - std::exp(-model.integration_time_us / model.t1_us);
  if (gamma <= 0.0) return in;
  const double pe = 0.5 * (1.0 + in.z);
  if (rng.uniform() < gamma * pe) return BlochState{0.0, 0.0, -1.0};
  const double keep = 1.0 - gamma * pe;  // no-jump branch norm
  const double root = std::sqrt(1.0 - gamma);
  BlochState out;
  out.x = in.x * root / keep;
  out.y = in.y * root / keep;
  out.z = 2.0 * (1.0 - gamma) * pe / keep - 1.0;
  return out;
}

std::vector<IQSample> projective_histogram(const BlochState& prep, const ReadoutModel& model,
                                           int n_shots, std::uint64_t seed) {
  if (n_shots < 0) throw std::invalid_argument("shot count must be nonnegative");
  std::vector<IQSample> out;
  out.resize(static_cast<std::size_t>(n_shots));
  for (int k = 0; k < n_shots; ++k) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(k));
    const MeasurementOutcome mo = sample_record(prep, model, rng);
    out[static_cast<std::size_t>(k)] = {mo.record.i, mo.record.q};
  }
  return out;
}

bool Gmm1d::two_lobed(double min_weight) const {
  const double gap = std::abs(mean[1] - mean[0]);
  return weight[0] >= min_weight && weight[1] >= min_weight &&
         gap >= 2.0 * std::max(sd[0], sd[1]);
}

Gmm1d fit_gmm(const std::vector<double>& xs, int max_iter) {
  if (xs.size() < 4) throw std::invalid_argument("need at least 4 samples for a mixture fit");
  std::vector<double> sorted = xs;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const double lo_q = sorted[n / 10], hi_q = sorted[n - 1 - n / 10];

  double mean_all = 0;
  for (double x : xs) mean_all += x;
  mean_all /= n;
  double var_all = 0;
  for (double x : xs) var_all += (x - mean_all) * (x - mean_all);
  var_all /= n;
  const double sd_floor = 1e-9 * (std::abs(sorted.back() - sorted.front()) + 1.0);

  Gmm1d g{};
  g.weight[0] = g.weight[1] = 0.5;
  g.mean[0] = lo_q;
  g.mean[1] = hi_q;
  g.sd[0] = g.sd[1] = std::max(std::sqrt(var_all) * 0.5, sd_floor);

  std::vector<double> resp(n);
  for (int it = 0; it < max_iter; ++it) {
    // E step: responsibility of component 1 for each sample.
    double m0 = 0, m1 = 0, n1 = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const double x = sorted[k];
      auto logp = [&](int c) {
        const double d = (x - g.mean[c]) / g.sd[c];
        return std::log(g.weight[c]) - std::log(g.sd[c]) - 0.5 * d * d;
      };
      const double l0 = logp(0), l1 = logp(1);
      const double m = std::max(l0, l1);
      const double p0 = std::exp(l0 - m), p1 = std::exp(l1 - m);
      resp[k] = p1 / (p0 + p1);
      n1 += resp[k];
      m1 += resp[k] * x;
      m0 += (1.0 - resp[k]) * x;
    }
    const double n0 = n - n1;
    Gmm1d next = g;
    if (n0 > 1e-9 && n1 > 1e-9) {
      next.mean[0] = m0 / n0;
      next.mean[1] = m1 / n1;
      double v0 = 0, v1 = 0;
      for (std::size_t k = 0; k < n; ++k) {
        const double d0 = sorted[k] - next.mean[0], d1 = sorted[k] - next.mean[1];
        v0 += (1.0 - resp[k]) * d0 * d0;
        v1 += resp[k] * d1 * d1;
      }
      next.sd[0] = std::max(std::sqrt(v0 / n0), sd_floor);
      next.sd[1] = std::max(std::sqrt(v1 / n1), sd_floor);
      next.weight[0] = n0 / n;
      next.weight[1] = n1 / n;
    }
    double delta = 0;
    for (int c = 0; c < 2; ++c)
      delta += std::abs(next.mean[c] - g.mean[c]) + std::abs(next.sd[c] - g.sd[c]) +
               std::abs(next.weight[c] - g.weight[c]);
    g = next;
    g.iterations = it + 1;
    if (delta < 1e-12) break;
  }
  if (g.mean[0] > g.mean[1]) {
    std::swap(g.mean[0], g.mean[1]);
    std::swap(g.sd[0], g.sd[1]);
    std::swap(g.weight[0], g.weight[1]);
  }
  return g;
}

JumpTrace jump_trace(const ReadoutModel& model, double duration_us, double window_us,
                     std::uint64_t seed) {
  model.validate();
  const double dt_us = model.integration_time_us;
  if (!(duration_us >= dt_us))
    throw std::invalid_argument("trace duration must cover one integration window");
  if (!(window_us > 0) || window_us > duration_us)
    throw std::invalid_argument("filter window must lie in (0, duration]");
  const int filter_window = std::max(1, static_cast<int>(std::llround(window_us / dt_us)));

  const int n = static_cast<int>(duration_us / dt_us);
  const double rate_down = model.t1_us > 0 ? 1.0 / model.t1_us : 0.0;
  const double rate_up = model.gamma_up_per_us;
  const double p_down = 1.0 - std::exp(-rate_down * dt_us);
  const double p_up = 1.0 - std::exp(-rate_up * dt_us);
  const double noise = model.sigma;  // one record per integration window

  JumpTrace tr;
  tr.times.resize(n);
  tr.raw.resize(n);
  tr.filtered.resize(n);
  tr.hidden.resize(n);
  tr.detected.resize(n);

  Rng rng = Rng::stream(seed, 0x74726163u);
  const double p_eq = (rate_up + rate_down) > 0 ? rate_up / (rate_up + rate_down) : 0.0;
  int state = rng.uniform() < p_eq ? 1 : 0;
  for (int k = 0; k < n; ++k) {
    const double flip = rng.uniform();
    if (state == 1 && flip < p_down)
      state = 0;
    else if (state == 0 && flip < p_up)
      state = 1;
    tr.hidden[k] = state;
    tr.times[k] = (k + 0.5) * dt_us;
    tr.raw[k] = rng.gaussian(state ? model.separation : -model.separation, noise);
  }

  const int hw = filter_window / 2;
  for (int k = 0; k < n; ++k) {
    const int lo = std::max(0, k - hw), hi = std::min(n - 1, k + hw);
    double acc = 0;
    for (int j = lo; j <= hi; ++j) acc += tr.raw[j];
    tr.filtered[k] = acc / (hi - lo + 1);
  }

  const double thr = 0.5 * model.separation;
  int det = tr.filtered.empty() ? 0 : (tr.filtered[0] > 0 ? 1 : 0);
  for (int k = 0; k < n; ++k) {
    if (tr.filtered[k] > thr)
      det = 1;
    else if (tr.filtered[k] < -thr)
      det = 0;
    tr.detected[k] = det;
  }
  return tr;
}

BackactionResult backaction_experiment(const BackactionProtocol& protocol,
                                       std::uint64_t seed, int workers) {
  const ReadoutModel& strong = protocol.strong;
  strong.validate();
  if (strong.alignment != 0.0)
    throw std::invalid_argument("postselection readout must be informational (alignment 0)");
  if (!(protocol.weak_ratio > 0) || protocol.weak_ratio > 1 ||
      !(protocol.thermal_excitation >= 0) || protocol.thermal_excitation > 1)
    throw std::invalid_argument("bad protocol parameters");
  if (protocol.n_shots < 1 || protocol.n_bins < 3)
    throw std::invalid_argument("need at least one shot and three bins");

  ReadoutModel weak = strong;
  weak.separation = protocol.weak_ratio * strong.separation;
  weak.alignment = M_PI / 2.0;

  const double span = protocol.bin_span_sigmas * weak.sigma;
  const double bin_w = 2.0 * span / protocol.n_bins;

  BackactionResult res;
  res.bins.assign(static_cast<std::size_t>(protocol.n_bins), TomogramBin{});
  res.n_prepared = protocol.n_shots;
  res.weak_separation = weak.separation;
  res.sigma = weak.sigma;
  res.eta_true = strong.eta;
  res.min_bin_shots = protocol.min_bin_shots;

  const double tomo_shrink = 1.0 - 2.0 * normal_cdf(-strong.separation / strong.sigma);
  const double t1_keep = strong.t1_us > 0
                             ? std::exp(-strong.integration_time_us / (2.0 * strong.t1_us))
                             : 1.0;
  res.template_contrast = tomo_shrink * t1_keep;

  // Shots are independent (per-shot streams, axis fixed by shot index), so
  // they can run on any worker; the reduction below walks shot order.
  struct Shot {
    double record = 0.0;
    std::int8_t outcome = 0;
    bool passed = false;
  };
  std::vector<Shot> shots(static_cast<std::size_t>(protocol.n_shots));
  const double threshold = -0.5 * strong.separation;
  parallel_for(static_cast<std::size_t>(protocol.n_shots), workers, [&](std::size_t k) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(k));
    BlochState st;
    st.z = rng.uniform() < protocol.thermal_excitation ? 1.0 : -1.0;

    const MeasurementOutcome sel = sample_record(st, strong, rng);
    if (sel.record.i >= threshold) return;
    st = rotate_x(sel.state, M_PI / 2.0);  // ground -> +y

    const MeasurementOutcome wk = sample_record(st, weak, rng);
    st = wk.state;

    const int axis = static_cast<int>(k % 3);
    BlochState meas = st;
    if (axis == 0)
      meas = rotate_y(st, -M_PI / 2.0);  // maps x onto z
    else if (axis == 1)
      meas = rotate_x(st, M_PI / 2.0);  // maps y onto z

    const MeasurementOutcome tomo = sample_record(meas, strong, rng);
    Shot& slot = shots[k];
    slot.outcome = tomo.record.i > 0.0 ? 1 : -1;
    slot.record = wk.record.i;
    slot.passed = true;
  });

  std::int64_t survivors = 0;
  for (std::size_t k = 0; k < shots.size(); ++k) {
    const Shot& s = shots[k];
    if (!s.passed) continue;
    ++survivors;
    if (s.record < -span || s.record >= span) continue;
    const int axis = static_cast<int>(k % 3);
    const int b = std::min(protocol.n_bins - 1, static_cast<int>((s.record + span) / bin_w));
    TomogramBin& bin = res.bins[static_cast<std::size_t>(b)];
    bin.record_sum += s.record;
    bin.n_total += 1;
    bin.n[axis] += 1;
    bin.sum[axis] += s.outcome;
  }

  res.n_postselected = survivors;
  const double frac = static_cast<double>(survivors) / protocol.n_shots;
  if (frac < 0.10)
    throw PostselectionError("fewer than 10% of shots passed postselection", frac);
  return res;
}

namespace {

struct FitData {
  std::vector<double> q;   // bin-mean abscissa
  std::vector<double> m;   // observed mean of +/-1 outcomes
  std::vector<double> n;   // shots behind each mean
  std::vector<int> axis;   // 0 = X, 1 = Y
};

double fit_model(double amp, double lambda, double q, int axis) {
  return axis == 0 ? -amp * std::sin(lambda * q) : amp * std::cos(lambda * q);
}

double fit_chi2(const FitData& d, const std::vector<double>& w, double t_template,
                double s_w2, double eta, double lambda) {
  const double amp = t_template * std::exp(-(1.0 - eta) * s_w2 / (2.0 * eta));
  double acc = 0;
  for (std::size_t k = 0; k < d.q.size(); ++k) {
    const double r = d.m[k] - fit_model(amp, lambda, d.q[k], d.axis[k]);
    acc += w[k] * r * r;
  }
  return acc;
}

// One-dimensional golden-section minimization on [a, b].
template <typename F>
double golden_min(F f, double a, double b, int iters = 90) {
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters; ++i) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

EfficiencyFit fit_efficiency(const BackactionResult& result) {
  if (!(result.sigma > 0) || !(result.weak_separation > 0) ||
      !(result.template_contrast > 0))
    throw std::invalid_argument("fit needs a populated backaction result");

  FitData d;
  for (const TomogramBin& bin : result.bins) {
    if (bin.n_total < result.min_bin_shots) continue;
    const double q = bin.record_mean();
    for (int axis = 0; axis < 2; ++axis) {  // Z tomograms carry no signal here
      if (bin.n[axis] < 5) continue;
      d.q.push_back(q);
      d.m.push_back(static_cast<double>(bin.sum[axis]) / bin.n[axis]);
      d.n.push_back(static_cast<double>(bin.n[axis]));
      d.axis.push_back(axis);
    }
  }
  if (d.q.size() < 8) throw std::invalid_argument("too few populated bins to fit");

  const double s_w = result.weak_separation / result.sigma;
  const double s_w2 = s_w * s_w;
  const double t = result.template_contrast;
  const double lambda_nom = result.weak_separation / (result.sigma * result.sigma);

  // The variance of a +/-1 sample mean is (1 - m^2)/n; taking m from the data
  // blows up on saturated low-count bins (observed m = +/-1 gives them almost
  // infinite weight), so the weights come from the fitted model instead and
  // are frozen during each minimization (iteratively reweighted least squares).
  std::vector<double> w(d.q.size());
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = d.n[k];

  auto chi2_w = [&](double eta, double lambda) { return fit_chi2(d, w, t, s_w2, eta, lambda); };

  double best_eta = 0.5, best_lambda = lambda_nom;
  for (int irls = 0; irls < 3; ++irls) {
    // Coarse grid, then alternating golden-section refinement.
    double best = std::numeric_limits<double>::max();
    for (int ie = 0; ie <= 196; ++ie) {
      const double eta = 0.02 + ie * 0.005;
      for (int il = 0; il <= 120; ++il) {
        const double lambda = lambda_nom * (0.7 + il * 0.005);
        const double c = chi2_w(eta, lambda);
        if (c < best) {
          best = c;
          best_eta = eta;
          best_lambda = lambda;
        }
      }
    }
    double span_eta = 0.01, span_lambda = 0.01 * lambda_nom;
    for (int round = 0; round < 24; ++round) {
      const double lo_e = std::max(1e-3, best_eta - span_eta);
      const double hi_e = std::min(1.0, best_eta + span_eta);
      best_eta = golden_min([&](double e) { return chi2_w(e, best_lambda); }, lo_e, hi_e);
      best_lambda = golden_min([&](double l) { return chi2_w(best_eta, l); },
                               best_lambda - span_lambda, best_lambda + span_lambda);
      span_eta *= 0.7;
      span_lambda *= 0.7;
    }
    const double amp = t * std::exp(-(1.0 - best_eta) * s_w2 / (2.0 * best_eta));
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double model = fit_model(amp, best_lambda, d.q[k], d.axis[k]);
      w[k] = d.n[k] / std::max(1.0 - model * model, 1e-3);
    }
  }

  EfficiencyFit fit{};
  fit.eta = best_eta;
  fit.lambda = best_lambda;
  fit.chi2 = chi2_w(best_eta, best_lambda);
  fit.n_points = static_cast<int>(d.q.size());

  // Standard errors from the curvature of chi^2 (Cov = 2 H^{-1}).
  const double he = 1e-4, hl = 1e-4 * lambda_nom;
  const double c0 = fit.chi2;
  const double cpp = chi2_w(best_eta + he, best_lambda), cmm = chi2_w(best_eta - he, best_lambda);
  const double lpp = chi2_w(best_eta, best_lambda + hl), lmm = chi2_w(best_eta, best_lambda - hl);
  const double cel = chi2_w(best_eta + he, best_lambda + hl);
  const double h_ee = (cpp - 2 * c0 + cmm) / (he * he);
  const double h_ll = (lpp - 2 * c0 + lmm) / (hl * hl);
  const double h_el = (cel - cpp - lpp + c0) / (he * hl);
  const double det = h_ee * h_ll - h_el * h_el;
  if (h_ee > 0 && det > 0) {
    fit.eta_stderr = std::sqrt(2.0 * h_ll / det);
    fit.lambda_stderr = std::sqrt(2.0 * h_ee / det);
  } else {
    fit.eta_stderr = std::numeric_limits<double>::quiet_NaN();
    fit.lambda_stderr = std::numeric_limits<double>::quiet_NaN();
  }
  return fit;
}

}  // namespace jrm
