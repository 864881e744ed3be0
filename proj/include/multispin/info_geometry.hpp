#pragma once

// Quantum information metric on the (h, J3) plane, its scalar curvature,
// geodesics and the Fubini-Study complexity read off a geodesic.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "multispin/errors.hpp"
#include "multispin/model.hpp"

namespace multispin {

struct MetricTensor2 {
  double g_hh = 0.0;
  double g_hJ3 = 0.0;
  double g_J3J3 = 0.0;
  double h = 0.0;
  double J3 = 0.0;
  int N = 0;  // 0 marks a per-cell thermodynamic value

  double g_J3h() const { return g_hJ3; }
  double det() const { return g_hh * g_J3J3 - g_hJ3 * g_hJ3; }
  double trace() const { return g_hh + g_J3J3; }

  std::array<double, 2> eigenvalues() const {
    const double m = 0.5 * trace();
    const double r = std::hypot(0.5 * (g_hh - g_J3J3), g_hJ3);
    return {m - r, m + r};
  }

  double norm2(double dh, double dJ3) const {
    return g_hh * dh * dh + 2.0 * g_hJ3 * dh * dJ3 + g_J3J3 * dJ3 * dJ3;
  }

  MetricTensor2& operator*=(double s) {
    g_hh *= s;
    g_hJ3 *= s;
    g_J3J3 *= s;
    return *this;
  }
};

namespace detail {

inline void accumulate_mode(MetricTensor2& g, const ReducedParams& p, double k) {
  const auto d = theta_gradient(p, k);
  g.g_hh += 0.25 * d.d_h * d.d_h;
  g.g_hJ3 += 0.25 * d.d_h * d.d_J3;
  g.g_J3J3 += 0.25 * d.d_J3 * d.d_J3;
}

inline std::vector<double> singly_occupied_momenta(const ReducedParams& p) {
  const auto phase = classify(p);
  const ModeGrid grid(p.N);
  std::vector<double> ks;
  for (auto i : phase.singly_occupied(grid.size())) ks.push_back(grid.k[i]);
  return ks;
}

}  // namespace detail

/// Metric summed over a fixed set of momenta.
inline MetricTensor2 qim_modes(const ReducedParams& p, const std::vector<double>& ks) {
  MetricTensor2 g;
  g.h = p.h;
  g.J3 = p.J3;
  g.N = p.N;
  for (double k : ks) detail::accumulate_mode(g, p, k);
  return g;
}

/// g_ab = (1/4) sum_k d_a theta_k d_b theta_k over the modes holding one
/// quasiparticle.  Doubly occupied and empty modes do not depend on (h, J3).
inline MetricTensor2 qim(const ReducedParams& p) {
  p.validate();
  return qim_modes(p, detail::singly_occupied_momenta(p));
}

/// Momentum intervals inside [0, pi] holding exactly one quasiparticle in
/// the thermodynamic limit.
inline std::vector<std::pair<double, double>> singly_occupied_intervals(double h, double J, double J3) {
  const ReducedParams p{h, J, J3, 1};
  std::vector<double> cuts{0.0, pi};
  for (const auto& z : branch_zeros(h, J, J3)) cuts.push_back(z.k);
  std::sort(cuts.begin(), cuts.end());
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    if (b - a < 1e-15) continue;
    const auto q = dispersion(p, 0.5 * (a + b));
    if (q.E1 < 0.0 && q.E2 > 0.0) {
      if (!out.empty() && out.back().second == a)
        out.back().second = b;
      else
        out.emplace_back(a, b);
    }
  }
  return out;
}

/// Per-cell metric in the thermodynamic limit, (1/2pi) times the integral
/// over the singly occupied momenta, split at the zero crossings.
inline MetricTensor2 qim_thermo(double h, double J3, double J = 1.0, double tol = 1e-10) {
  const ReducedParams p{h, J, J3, 1};
  p.validate();
  MetricTensor2 g;
  g.h = h;
  g.J3 = J3;
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  for (auto [a, b] : singly_occupied_intervals(h, J, J3)) {
    auto hh = [&](double k) { auto d = theta_gradient(p, k); return d.d_h * d.d_h; };
    auto hj = [&](double k) { auto d = theta_gradient(p, k); return d.d_h * d.d_J3; };
    auto jj = [&](double k) { auto d = theta_gradient(p, k); return d.d_J3 * d.d_J3; };
    // Integrand is even in k: the [-pi, 0] half doubles the result.
    const double w = 2.0 * 0.25 / (2.0 * pi);
    g.g_hh += w * GK::integrate(hh, a, b, 15, tol);
    g.g_hJ3 += w * GK::integrate(hj, a, b, 15, tol);
    g.g_J3J3 += w * GK::integrate(jj, a, b, 15, tol);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Metric fields.  Each is callable as (h, J3) -> MetricTensor2 and provides
// frozen_at(h, J3): a smooth field to difference around that point.

/// Sum over a fixed momentum set, smooth everywhere it is nondegenerate.
struct FrozenMetric {
  double J = 1.0;
  int N = 1;
  std::vector<double> ks;
  double scale = 1.0;

  MetricTensor2 operator()(double h, double J3) const {
    auto g = qim_modes({h, J, J3, N}, ks);
    g *= scale;
    return g;
  }
  FrozenMetric frozen_at(double, double) const { return *this; }
};

/// Finite-N metric with the occupation recomputed at every point; optionally
/// divided by N.
struct FiniteSizeMetric {
  double J = 1.0;
  int N = 51;
  bool per_cell = false;

  MetricTensor2 operator()(double h, double J3) const {
    auto g = qim({h, J, J3, N});
    if (per_cell) g *= 1.0 / N;
    return g;
  }
  FrozenMetric frozen_at(double h, double J3) const {
    return {J, N, detail::singly_occupied_momenta({h, J, J3, N}), per_cell ? 1.0 / N : 1.0};
  }
};

/// Thermodynamic per-cell metric times an optional scale (e.g. N).
struct ContinuumMetric {
  double J = 1.0;
  double scale = 1.0;
  double tol = 1e-13;

  MetricTensor2 operator()(double h, double J3) const {
    auto g = qim_thermo(h, J3, J, tol);
    g *= scale;
    return g;
  }
  ContinuumMetric frozen_at(double, double) const { return *this; }
};

struct ConstantMetric {
  double g_hh = 1.0;
  double g_hJ3 = 0.0;
  double g_J3J3 = 1.0;

  MetricTensor2 operator()(double h, double J3) const { return {g_hh, g_hJ3, g_J3J3, h, J3, 0}; }
  ConstantMetric frozen_at(double, double) const { return *this; }
};

// ---------------------------------------------------------------------------
// Curvature

inline constexpr double degenerate_det = 1e-14;

namespace detail {

struct MetricDerivatives {
  // first derivatives: index [component][direction], component 0:E 1:F 2:G,
  // direction 0:h 1:J3
  double d[3][2]{};
  double E_vv = 0.0, F_uv = 0.0, G_uu = 0.0;
};

inline std::array<double, 3> components(const MetricTensor2& g) { return {g.g_hh, g.g_hJ3, g.g_J3J3}; }

template <class Field>
MetricDerivatives central_derivatives(const Field& f, double h, double J3, double s) {
  MetricDerivatives out;
  const auto c0 = components(f(h, J3));
  const auto hp = components(f(h + s, J3)), hm = components(f(h - s, J3));
  const auto jp = components(f(h, J3 + s)), jm = components(f(h, J3 - s));
  const auto pp = components(f(h + s, J3 + s)), pm = components(f(h + s, J3 - s));
  const auto mp = components(f(h - s, J3 + s)), mm = components(f(h - s, J3 - s));
  for (int c = 0; c < 3; ++c) {
    out.d[c][0] = (hp[c] - hm[c]) / (2 * s);
    out.d[c][1] = (jp[c] - jm[c]) / (2 * s);
  }
  out.E_vv = (jp[0] - 2 * c0[0] + jm[0]) / (s * s);
  out.G_uu = (hp[2] - 2 * c0[2] + hm[2]) / (s * s);
  out.F_uv = (pp[1] - pm[1] - mp[1] + mm[1]) / (4 * s * s);
  return out;
}

inline MetricDerivatives richardson(const MetricDerivatives& coarse, const MetricDerivatives& fine) {
  MetricDerivatives r;
  auto mix = [](double c, double f) { return (4.0 * f - c) / 3.0; };
  for (int c = 0; c < 3; ++c)
    for (int k = 0; k < 2; ++k) r.d[c][k] = mix(coarse.d[c][k], fine.d[c][k]);
  r.E_vv = mix(coarse.E_vv, fine.E_vv);
  r.F_uv = mix(coarse.F_uv, fine.F_uv);
  r.G_uu = mix(coarse.G_uu, fine.G_uu);
  return r;
}

inline double det3(const double m[3][3]) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

}  // namespace detail

/// Scalar curvature R = 2K from the Brioschi formula, metric derivatives by
/// central differences at step s and s/2 combined by Richardson
/// extrapolation.  The field is differenced through frozen_at(h, J3).
template <class Field>
double ricci(const Field& field, double h, double J3, double step = 1e-4) {
  const auto local = field.frozen_at(h, J3);
  const auto g = local(h, J3);
  const double det = g.det();
  if (!(det > degenerate_det)) throw curvature_undefined("curvature undefined: degenerate metric at the stencil centre");
  for (double sh : {-step, step})
    for (double sj : {-step, step})
      if (!(local(h + sh, J3 + sj).det() > degenerate_det))
        throw curvature_undefined("curvature undefined: degenerate metric on the stencil");

  const auto der = detail::richardson(detail::central_derivatives(local, h, J3, step),
                                      detail::central_derivatives(local, h, J3, step / 2));
  const double E = g.g_hh, F = g.g_hJ3, G = g.g_J3J3;
  const double E_u = der.d[0][0], E_v = der.d[0][1];
  const double F_u = der.d[1][0], F_v = der.d[1][1];
  const double G_u = der.d[2][0], G_v = der.d[2][1];
  const double m1[3][3] = {{-0.5 * der.E_vv + der.F_uv - 0.5 * der.G_uu, 0.5 * E_u, F_u - 0.5 * E_v},
                           {F_v - 0.5 * G_u, E, F},
                           {0.5 * G_v, F, G}};
  const double m2[3][3] = {{0.0, 0.5 * E_v, 0.5 * G_u}, {0.5 * E_v, E, F}, {0.5 * G_u, F, G}};
  const double K = (detail::det3(m1) - detail::det3(m2)) / (det * det);
  return 2.0 * K;
}

// ---------------------------------------------------------------------------
// Geodesics

struct GeodesicState {
  double h = 0.0;
  double J3 = 0.0;
  double dh = 0.0;
  double dJ3 = 0.0;
  double tau = 0.0;
};

struct ParameterDomain {
  double h_min = -1e9;
  double h_max = 1e9;
  double J3_min = 0.0;
  double J3_max = 1e9;

  bool contains(double h, double J3) const { return h >= h_min && h <= h_max && J3 >= J3_min && J3 <= J3_max; }
};

enum class GeodesicStop { completed, left_domain, degenerate_metric };

struct GeodesicResult {
  std::vector<GeodesicState> trajectory;
  GeodesicStop stop = GeodesicStop::completed;
  double exit_tau = 0.0;
};

/// Christoffel symbols Gamma^i_{jk} (indices 0: h, 1: J3).
using Christoffel = std::array<std::array<std::array<double, 2>, 2>, 2>;

template <class Field>
Christoffel christoffel(const Field& field, double h, double J3, double step = 1e-5) {
  const auto local = field.frozen_at(h, J3);
  const auto g = local(h, J3);
  const auto d = detail::central_derivatives(local, h, J3, step);
  // dg[a][b][c] = d_c g_ab
  double dg[2][2][2];
  for (int c = 0; c < 2; ++c) {
    dg[0][0][c] = d.d[0][c];
    dg[0][1][c] = dg[1][0][c] = d.d[1][c];
    dg[1][1][c] = d.d[2][c];
  }
  const double det = g.det();
  const double inv[2][2] = {{g.g_J3J3 / det, -g.g_hJ3 / det}, {-g.g_hJ3 / det, g.g_hh / det}};
  Christoffel G{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) {
        double s = 0.0;
        for (int l = 0; l < 2; ++l) s += inv[i][l] * (dg[l][k][j] + dg[l][j][k] - dg[j][k][l]);
        G[i][j][k] = 0.5 * s;
      }
  return G;
}

/// Velocity with the given J3 rate and a positive h rate fixed by
/// g_ij xdot^i xdot^j = 1.
template <class Field>
GeodesicState normalized_start(const Field& field, double h, double J3, double dJ3) {
  const auto g = field(h, J3);
  // g_hh a^2 + 2 g_hJ3 b a + g_J3J3 b^2 - 1 = 0 for a = dh
  const double A = g.g_hh, B = 2.0 * g.g_hJ3 * dJ3, C = g.g_J3J3 * dJ3 * dJ3 - 1.0;
  const double disc = B * B - 4.0 * A * C;
  if (!(A > 0.0) || disc < 0.0) throw invalid_argument("no real h velocity satisfies the normalization");
  return {h, J3, (-B + std::sqrt(disc)) / (2.0 * A), dJ3, 0.0};
}

/// Fixed-step RK4 integration of the geodesic equation.
template <class Field>
GeodesicResult geodesic(const Field& field, GeodesicState start, int steps, double dtau = 1e-3,
                        const ParameterDomain& domain = {}, double fd_step = 1e-5,
                        bool renormalize_at_jumps = false) {
  GeodesicResult out;
  out.trajectory.reserve(static_cast<std::size_t>(steps) + 1);
  out.trajectory.push_back(start);
  using Y = std::array<double, 4>;
  auto ok = [&](const Y& y) { return domain.contains(y[0], y[1]) && field(y[0], y[1]).det() > degenerate_det; };
  auto rhs = [&](const Y& y) {
    const auto G = christoffel(field, y[0], y[1], fd_step);
    const double v[2] = {y[2], y[3]};
    Y r{y[2], y[3], 0.0, 0.0};
    for (int i = 0; i < 2; ++i) {
      double a = 0.0;
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) a -= G[i][j][k] * v[j] * v[k];
      r[2 + i] = a;
    }
    return r;
  };
  auto axpy = [](const Y& y, double a, const Y& k) {
    Y r;
    for (int i = 0; i < 4; ++i) r[i] = y[i] + a * k[i];
    return r;
  };

  Y y{start.h, start.J3, start.dh, start.dJ3};
  double tau = start.tau;
  if (!domain.contains(y[0], y[1])) {
    out.stop = GeodesicStop::left_domain;
    out.exit_tau = tau;
    return out;
  }
  for (int n = 0; n < steps; ++n) {
    Y k1, k2, k3, k4;
    const Y s2 = axpy(y, 0.5 * dtau, k1 = rhs(y));
    if (!ok(s2)) { out.stop = domain.contains(s2[0], s2[1]) ? GeodesicStop::degenerate_metric : GeodesicStop::left_domain; break; }
    const Y s3 = axpy(y, 0.5 * dtau, k2 = rhs(s2));
    if (!ok(s3)) { out.stop = domain.contains(s3[0], s3[1]) ? GeodesicStop::degenerate_metric : GeodesicStop::left_domain; break; }
    const Y s4 = axpy(y, dtau, k3 = rhs(s3));
    if (!ok(s4)) { out.stop = domain.contains(s4[0], s4[1]) ? GeodesicStop::degenerate_metric : GeodesicStop::left_domain; break; }
    k4 = rhs(s4);
    Y next;
    for (int i = 0; i < 4; ++i) next[i] = y[i] + dtau / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    if (!ok(next)) { out.stop = domain.contains(next[0], next[1]) ? GeodesicStop::degenerate_metric : GeodesicStop::left_domain; break; }
    if (renormalize_at_jumps) {
      // A piecewise field (finite N) jumps where the occupation changes; the
      // velocity is rescaled to unit norm in the new piece.
      const auto before = field.frozen_at(y[0], y[1])(next[0], next[1]);
      const auto after = field(next[0], next[1]);
      if (std::abs(before.g_hh - after.g_hh) > 1e-12 * std::abs(after.g_hh) ||
          std::abs(before.g_J3J3 - after.g_J3J3) > 1e-12 * std::abs(after.g_J3J3)) {
        const double n2 = after.norm2(next[2], next[3]);
        if (n2 > 0.0) {
          next[2] /= std::sqrt(n2);
          next[3] /= std::sqrt(n2);
        }
      }
    }
    y = next;
    tau += dtau;
    out.trajectory.push_back({y[0], y[1], y[2], y[3], tau});
  }
  out.exit_tau = tau;
  return out;
}

// ---------------------------------------------------------------------------
// Fubini-Study complexity along a unit-speed curve

/// Arc-length parametrized curve J3 = const: dtau/dh = sqrt(g_hh).
template <class Field>
std::vector<GeodesicState> constant_J3_section(const Field& field, double J3, double h_start, double h_end,
                                               int steps) {
  if (steps < 1 || !(h_end > h_start)) throw invalid_argument("constant_J3_section needs h_end > h_start");
  auto speed = [&](double h) {
    const double g = field(h, J3).g_hh;
    if (!(g > 0.0)) throw curvature_undefined("g_hh vanishes on the section");
    return std::sqrt(g);
  };
  const double dh = (h_end - h_start) / steps;
  std::vector<GeodesicState> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  double tau = 0.0;
  for (int n = 0; n <= steps; ++n) {
    const double h = h_start + n * dh;
    out.push_back({h, J3, 1.0 / speed(h), 0.0, tau});
    if (n < steps) tau += dh / 6.0 * (speed(h) + 4.0 * speed(h + 0.5 * dh) + speed(h + dh));
  }
  return out;
}

struct FscPoint {
  double tau = 0.0;     // complexity C_FS from the start of the curve
  double dC_dh = 0.0;   // 1 / (dh/dtau)
};

/// Inverts h(tau) on a unit-speed trajectory by bisection on the cubic
/// Hermite interpolant (tolerance 1e-10 in h).  Requires h strictly monotone
/// on the trajectory.
inline FscPoint fsc(const std::vector<GeodesicState>& traj, double h_target, double tol = 1e-10) {
  if (traj.size() < 2) throw invalid_argument("fsc needs at least two trajectory points");
  const double sign = traj.back().h > traj.front().h ? 1.0 : -1.0;
  for (std::size_t i = 0; i + 1 < traj.size(); ++i)
    if (!(sign * (traj[i + 1].h - traj[i].h) > 0.0) || !(sign * traj[i].dh > 0.0))
      throw invalid_argument("fsc: h is not monotone on the trajectory");
  const double lo_h = std::min(traj.front().h, traj.back().h), hi_h = std::max(traj.front().h, traj.back().h);
  if (h_target < lo_h || h_target > hi_h) throw invalid_argument("fsc: target h outside the trajectory");

  std::size_t i = 0;
  while (i + 2 < traj.size() && sign * (traj[i + 1].h - h_target) < 0.0) ++i;
  const auto& a = traj[i];
  const auto& b = traj[i + 1];
  const double T = b.tau - a.tau;
  auto hermite = [&](double s) {  // s in [0, 1]
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * a.h + (s3 - 2 * s2 + s) * T * a.dh + (-2 * s3 + 3 * s2) * b.h +
           (s3 - s2) * T * b.dh;
  };
  auto hermite_d = [&](double s) {
    const double s2 = s * s;
    return ((6 * s2 - 6 * s) * a.h + (3 * s2 - 4 * s + 1) * T * a.dh + (-6 * s2 + 6 * s) * b.h +
            (3 * s2 - 2 * s) * T * b.dh) / T;
  };
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double v = hermite(mid);
    if (std::abs(v - h_target) < tol && hi - lo < 1e-14) break;
    if (sign * (v - h_target) < 0.0) lo = mid; else hi = mid;
  }
  const double s = 0.5 * (lo + hi);
  return {a.tau + s * T, 1.0 / hermite_d(s)};
}

}  // namespace multispin
