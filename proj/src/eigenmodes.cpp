#include "jrm/eigenmodes.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

namespace jrm {

void CapacitanceSet::validate() const {
  for (double c : {c1, c2, c3, c4})
    if (!(c > 0) || !std::isfinite(c))
      throw std::invalid_argument("capacitances must be positive and finite");
}

double CapacitanceSet::geometric_mean() const {
  return std::pow(c1 * c2 * c3 * c4, 0.25);
}

double delta_equilibrium(double alpha, const FluxBias& flux) {
  flux.validate();
  return solve_segment_phase(flux.phi_ext / 4.0, alpha);
}

double junction_renormalization(double alpha, const FluxBias& flux) {
  const double cd = std::cos(delta_equilibrium(alpha, flux));
  const double w = 1.0 + alpha * cd;
  if (w <= 1e-12)
    throw BranchInstabilityError("junction branch collapse in renormalization");
  return cd / w;
}

namespace {

// Junction (ring) and shunt coupling patterns of the energy Hessian about the
// quiet configuration; rows/cols are nodes 1..4 around the ring.
constexpr double kRing[4][4] = {{2, -1, 0, -1},
                                {-1, 2, -1, 0},
                                {0, -1, 2, -1},
                                {-1, 0, -1, 2}};
constexpr double kShunt[4][4] = {{3, -1, -1, -1},
                                 {-1, 3, -1, -1},
                                 {-1, -1, 3, -1},
                                 {-1, -1, -1, 3}};

// Node masses are (2*C1, 2*C4, 2*C2, 2*C3) for nodes (1, 2, 3, 4); this
// ordering follows the device netlist and is kept verbatim.
std::array<double, 4> row_caps(const CapacitanceSet& caps) {
  return {caps.c1, caps.c4, caps.c2, caps.c3};
}

}  // namespace

Mat4 dynamical_matrix(const JrmParams& params, const CapacitanceSet& caps,
                      const FluxBias& flux) {
  params.validate();
  caps.validate();
  if (!params.symmetric())
    throw std::invalid_argument(
        "dynamical_matrix requires a symmetric ring (equal junctions, no loop offsets)");
  const double j = junction_renormalization(params.alpha, flux);
  const double cbar = caps.geometric_mean();
  const auto rc = row_caps(caps);
  Mat4 m{};
  for (int r = 0; r < 4; ++r) {
    const double s = cbar / rc[r];
    for (int c = 0; c < 4; ++c)
      m[r][c] = s * (0.5 * j * kRing[r][c] + params.beta / 8.0 * kShunt[r][c]);
  }
  return m;
}

namespace {

void sign_fix(Eigen::Vector4d& v) {
  for (int i = 0; i < 4; ++i) {
    if (std::abs(v[i]) > 1e-12) {
      if (v[i] < 0) v = -v;
      return;
    }
  }
}

}  // namespace

EigenResult eigenmodes(const JrmParams& params, const CapacitanceSet& caps,
                       const FluxBias& flux) {
  const Mat4 m = dynamical_matrix(params, caps, flux);
  const double cbar = caps.geometric_mean();
  const auto rc = row_caps(caps);

  // m = B * H with B = diag(cbar / (2*C_i)) and H the (symmetric) energy
  // Hessian, so B^{1/2} H B^{1/2} is a similar symmetric matrix.
  Eigen::Vector4d sqrt_b;
  for (int i = 0; i < 4; ++i) sqrt_b[i] = std::sqrt(cbar / (2.0 * rc[i]));
  Eigen::Matrix4d w;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) w(r, c) = m[r][c] * sqrt_b[c] / sqrt_b[r];
  w = 0.5 * (w + w.transpose().eval());  // scrub roundoff asymmetry

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(w);
  if (es.info() != Eigen::Success) throw SolverError("eigensolve failed");
  Eigen::Vector4d ev = es.eigenvalues();
  Eigen::Matrix4d u = es.eigenvectors();

  const double scale = std::max(1.0, w.cwiseAbs().maxCoeff());
  const double zero_tol = 1e-9 * scale;
  if (ev[0] < -zero_tol)
    throw InstabilityError("quiet configuration is not a stable equilibrium at this flux",
                           flux.phi_ext);

  // Canonical mode shapes (node basis): two differential, one common, one free.
  const Eigen::Vector4d pat_a(1, 0, -1, 0), pat_b(0, 1, 0, -1), pat_c(1, -1, 1, -1),
      pat_0(1, 1, 1, 1);
  const std::array<Eigen::Vector4d, 4> targets = {pat_a, pat_b, pat_c, pat_0};

  // Degenerate clusters leave the eigenbasis arbitrary within the subspace;
  // realign it with the canonical shapes so callers see deterministic modes.
  const double cluster_tol = 1e-8 * scale;
  int lo = 0;
  while (lo < 4) {
    int hi = lo + 1;
    while (hi < 4 && ev[hi] - ev[hi - 1] <= cluster_tol) ++hi;
    const int n = hi - lo;
    if (n > 1) {
      Eigen::Matrix<double, 4, Eigen::Dynamic> sub = u.middleCols(lo, n);
      // Project targets into the subspace, keep the n best, orthonormalize.
      std::vector<std::pair<double, Eigen::Vector4d>> cand;
      for (const auto& t : targets) {
        Eigen::Vector4d tu = t.cwiseQuotient(sqrt_b);  // node shape -> u space
        Eigen::VectorXd coef = sub.transpose() * tu;
        Eigen::Vector4d proj = sub * coef;
        cand.emplace_back(proj.norm() / tu.norm(), proj);
      }
      std::stable_sort(cand.begin(), cand.end(),
                       [](const auto& a, const auto& b) { return a.first > b.first; });
      Eigen::Matrix<double, 4, Eigen::Dynamic> fresh(4, n);
      int k = 0;
      for (const auto& [score, proj] : cand) {
        if (k == n) break;
        Eigen::Vector4d q = proj;
        for (int p = 0; p < k; ++p) q -= fresh.col(p).dot(q) * fresh.col(p);
        if (q.norm() > 1e-8) fresh.col(k++) = q.normalized();
      }
      if (k == n) u.middleCols(lo, n) = fresh;
    }
    lo = hi;
  }

  EigenResult out{};
  std::array<Eigen::Vector4d, 4> vecs;
  for (int i = 0; i < 4; ++i) {
    Eigen::Vector4d v = u.col(i).cwiseProduct(sqrt_b);  // back to node shapes
    v.normalize();
    sign_fix(v);
    vecs[i] = v;
    for (int r = 0; r < 4; ++r) out.vecs[i][r] = v[r];
    out.omega[i] = std::sqrt(std::max(ev[i], 0.0));
  }

  // Greedy pattern assignment (largest normalized overlap first).
  std::array<int, 3> idx = {-1, -1, -1};  // a, b, c
  std::array<bool, 4> taken{};
  taken[0] = true;  // index 0 is the free rotation
  for (int pass = 0; pass < 3; ++pass) {
    double best = -1;
    int bp = -1, bm = -1;
    for (int p = 0; p < 3; ++p) {
      if (idx[p] >= 0) continue;
      for (int mi = 1; mi < 4; ++mi) {
        if (taken[mi]) continue;
        const double o = std::abs(vecs[mi].dot(targets[p])) / targets[p].norm();
        if (o > best) {
          best = o;
          bp = p;
          bm = mi;
        }
      }
    }
    idx[bp] = bm;
    taken[bm] = true;
  }
  out.index_a = idx[0];
  out.index_b = idx[1];
  out.index_c = idx[2];

  // Common-mode weights from the (+,-,+,-) eigenvector.
  const auto& vc = vecs[out.index_c];
  out.lambda1 = std::sqrt(2.0) * vc[0];
  out.lambda2 = -std::sqrt(2.0) * vc[1];
  return out;
}

std::vector<ModeCurvePoint> mode_frequencies_vs_flux(const JrmParams& params,
                                                     const CapacitanceSet& caps,
                                                     const std::vector<double>& flux_values) {
  std::vector<ModeCurvePoint> out;
  out.reserve(flux_values.size());
  for (double f : flux_values) {
    ModeCurvePoint pt{f, std::numeric_limits<double>::quiet_NaN(),
                      std::numeric_limits<double>::quiet_NaN(),
                      std::numeric_limits<double>::quiet_NaN(), false};
    try {
      const EigenResult r = eigenmodes(params, caps, FluxBias{f});
      pt.omega_a = r.omega[r.index_a];
      pt.omega_b = r.omega[r.index_b];
      pt.omega_c = r.omega[r.index_c];
      pt.ok = true;
    } catch (const InstabilityError&) {
    } catch (const BranchInstabilityError&) {
    }
    out.push_back(pt);
  }
  return out;
}

}  // namespace jrm
