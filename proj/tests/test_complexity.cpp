#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <random>

#include "multispin/complexity.hpp"

using namespace multispin;

namespace {

using cd = std::complex<double>;

Eigen::Matrix2cd bloch(double h, double J3, double k) {
  Eigen::Matrix2cd m;
  const double c = std::cos(k), s = std::sin(k);
  m << 1.5 * h - 2.5 * J3 * c, -cd(1.0, s), -cd(1.0, -s), 0.5 * h - 0.5 * J3 * c;
  return m;
}

// |<g(h0)| exp(-i H(h_n) t_n) ... exp(-i H(h_1) t_1) |g(h0)>| by direct 2x2
// matrix exponentials of the Bloch Hamiltonians.
double direct_overlap(double h0, double J3, double k, const std::vector<std::pair<double, double>>& steps) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es0(bloch(h0, J3, k));
  const Eigen::Vector2cd g = es0.eigenvectors().col(0);
  Eigen::Vector2cd psi = g;
  for (auto [h, t] : steps) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(bloch(h, J3, k));
    Eigen::Matrix2cd U = es.eigenvectors() *
                         Eigen::Vector2cd(std::polar(1.0, -es.eigenvalues()(0) * t), std::polar(1.0, -es.eigenvalues()(1) * t))
                             .asDiagonal() *
                         es.eigenvectors().adjoint();
    psi = U * psi;
  }
  return std::abs(g.dot(psi));
}

}  // namespace

TEST(StaticNc, IdenticalStatesGiveZero) {
  const ReducedParams p{0.7, 1.0, 0.4, 51};
  EXPECT_EQ(static_nc(p, p), 0.0);
  EXPECT_EQ(static_nc(p, p, ModeRange::full_grid), 0.0);
}

TEST(StaticNc, SingleModeByHand) {
  const ReducedParams r{0.2, 1.0, 0.1, 1}, t{0.9, 1.0, 0.3, 1};
  // k = 0: cos theta = (h/2 - J3) / sqrt((h/2 - J3)^2 + 1)
  auto th = [](double h, double J3) { const double a = h / 2 - J3; return std::acos(a / std::sqrt(a * a + 1)); };
  const double d = 0.5 * (th(0.9, 0.3) - th(0.2, 0.1));
  EXPECT_NEAR(static_nc(r, t, ModeRange::full_grid), d * d, 1e-15);
  EXPECT_NEAR(static_nc(r, t), d * d, 1e-15);
}

TEST(StaticNc, DerivativeMatchesFiniteDifference) {
  const ReducedParams r{0.2, 1.0, 0.1, 101};
  for (double h : {0.3, 1.0, 1.6}) {
    const ReducedParams t{h, 1.0, 0.3, 101};
    const double e = 1e-6;
    for (auto range : {ModeRange::occupied, ModeRange::full_grid}) {
      const double fd = (static_nc(r, t.with_h(h + e), range) - static_nc(r, t.with_h(h - e), range)) / (2 * e);
      EXPECT_NEAR(static_nc_dh(r, t, range), fd, 1e-6) << h;
    }
  }
}

TEST(StaticNc, DerivativeBoundedAndVanishingAtH13) {
  const int N = 101;
  const double J3T = 0.3;
  const auto c = critical_fields(1.0, J3T);
  for (double hR : {0.2, 1.05, 1.06}) {
    const ReducedParams ref{hR, 1.0, 0.1, N};
    double max_abs = 0.0, peak_iii = 0.0, last_nonzero = 0.0;
    for (double h = 0.0; h < c.h13; h += 1e-3) {
      const ReducedParams tgt{h, 1.0, J3T, N};
      const double d = static_nc_dh(ref, tgt);
      ASSERT_TRUE(std::isfinite(d));
      max_abs = std::max(max_abs, std::abs(d));
      if (h > c.h1) peak_iii = std::max(peak_iii, std::abs(d));
      if (d != 0.0) last_nonzero = std::abs(d);
    }
    EXPECT_LT(max_abs, 20.0) << hR;
    EXPECT_LT(last_nonzero, 0.3 * peak_iii) << hR;
  }
}

TEST(QuenchAngles, Basics) {
  const ReducedParams p{1.0, 1.0, 0.2, 51};
  for (double w : quench_angles(p, 0.0)) EXPECT_EQ(w, 0.0);
  const auto a = quench_angles(p, 0.1), b = quench_angles(p.with_h(1.1), -0.1);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], -b[i], 1e-15);
  double mx = 0.0;
  for (double w : a) mx = std::max(mx, std::pow(std::sin(2 * w), 2));
  EXPECT_LT(mx, 1e-2);
}

TEST(SingleQuench, TrivialLimits) {
  const ReducedParams p{0.5, 1.0, 0.2, 101};
  EXPECT_EQ(nc_of_t(p, 0.1, 0.0), 0.0);
  EXPECT_EQ(loschmidt(p, 0.1, 0.0), 1.0);
  for (double t : {0.5, 3.0, 40.0}) {
    EXPECT_EQ(nc_of_t(p, 0.0, t), 0.0);
    const double L = loschmidt(p, 0.1, t);
    EXPECT_GE(L, 0.0);
    EXPECT_LE(L, 1.0);
  }
  EXPECT_THROW(nc_of_t(p, 0.1, -1.0), invalid_argument);
}

TEST(SingleQuench, OscillationsPersist) {
  const ReducedParams p{0.5, 1.0, 0.2, 101};
  double lo = 1e300, hi = -1e300;
  for (double t = 30.0; t <= 50.0; t += 0.05) {
    const double c = nc_of_t(p, 0.1, t) / p.N;
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  EXPECT_GT(hi - lo, 0.1 * hi);
}

TEST(SingleQuench, LeNcRelationWithinBound) {
  for (double h : {0.5, 1.0, 1.4}) {
    const ReducedParams p{h, 1.0, 0.2, 101};
    for (double t = 0.0; t <= 50.0; t += 0.05) {
      const double c = nc_of_t(p, 0.1, t), l = loschmidt(p, 0.1, t);
      EXPECT_LE(std::abs(-std::log(l) - c), le_nc_bound(p, 0.1, t) + 1e-15) << h << " " << t;
    }
  }
}

TEST(Evolve, OneSegmentMatchesClosedForm) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> uh(0.0, 3.0), ud(-0.5, 0.5), uj(0.0, 2.0), ut(0.0, 50.0);
  for (int i = 0; i < 200; ++i) {
    const ReducedParams p{uh(rng), 1.0, uj(rng), 31};
    const double d = ud(rng), t = ut(rng);
    const auto r = evolve(FourSpinSpectrum{1.0, p.J3, p.N}, {p, {{d, 0.0}}}, t);
    EXPECT_NEAR(r.record.C_N, nc_of_t(p, d, t), 1e-12);
    EXPECT_NEAR(r.record.L, loschmidt(p, d, t), 1e-12);
    for (const auto& m : r.modes) EXPECT_NEAR(std::norm(m.amp1) + std::norm(m.amp2), 1.0, 1e-12);
  }
}

TEST(Evolve, TwoSegmentsMatchYClosedForm) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> uh(0.0, 3.0), ud(-0.5, 0.5), uj(0.0, 2.0), ut(0.0, 30.0);
  for (int i = 0; i < 200; ++i) {
    const ReducedParams p{uh(rng), 1.0, uj(rng), 31};
    const double d = ud(rng), t1 = ut(rng), t2 = ut(rng);
    const FourSpinSpectrum sp{1.0, p.J3, p.N};
    const auto r = evolve(sp, {p, {{d, t1}, {0.0, 0.0}}}, t1 + t2);
    double c = 0.0;
    for (double k : sp.modes(p.h)) {
      const auto q = dispersion(p.with_h(p.h + d), k);
      const double om = 0.5 * (dispersion(p, k).theta - q.theta);
      const auto Y = std::polar(1.0, -q.E2 * t1) * std::pow(std::cos(om), 2) +
                     std::polar(1.0, -q.E1 * t1) * std::pow(std::sin(om), 2);
      const double phi = std::acos(std::min(1.0, std::abs(Y)));
      c += phi * phi;
    }
    EXPECT_NEAR(r.record.C_N, c, 1e-12);
  }
}

TEST(Evolve, MatchesDirectMatrixExponentials) {
  const double h0 = 1.0, J3 = 1.5;
  const QuenchProtocol prot{{h0, 1.0, J3, 21}, {{-0.2, 3.0}, {0.0, 2.0}, {0.3, 1.5}, {-0.1, 0.0}}};
  const double t = 9.0;
  const auto r = evolve(FourSpinSpectrum{1.0, J3, 21}, prot, t);
  for (const auto& m : r.modes) {
    const double ov = direct_overlap(h0, J3, m.k, {{h0 - 0.2, 3.0}, {h0, 2.0}, {h0 + 0.3, 1.5}, {h0 - 0.1, 2.5}});
    ModeState back = m;
    const double th0 = dispersion({h0, 1.0, J3, 21}, m.k).theta;
    const double om = 0.5 * (back.theta - th0);
    const double a1 = std::abs(std::cos(om) * back.amp1 - std::sin(om) * back.amp2);
    EXPECT_NEAR(a1, ov, 1e-12);
  }
}

TEST(Evolve, ZeroDeltasGiveZero) {
  const QuenchProtocol prot{{0.8, 1.0, 0.4, 31}, {{0.0, 2.0}, {0.0, 5.0}, {0.0, 0.0}}};
  for (double t : {0.0, 1.0, 6.0, 20.0}) EXPECT_NEAR(evolve(FourSpinSpectrum{1.0, 0.4, 31}, prot, t).record.C_N, 0.0, 1e-24);
}

TEST(Evolve, RejectsNegativeDurations) {
  const QuenchProtocol prot{{0.8, 1.0, 0.4, 31}, {{0.1, -2.0}, {0.0, 0.0}}};
  EXPECT_THROW(evolve(FourSpinSpectrum{1.0, 0.4, 31}, prot, 1.0), invalid_argument);
}

TEST(Evolve, SeriesMatchesPointwise) {
  const ReducedParams base{1.0, 1.0, 1.5, 41};
  const FourSpinSpectrum sp{1.0, 1.5, 41};
  const auto prot = multi_quench_protocol(base, -0.2, 15.0, 3);
  std::vector<double> ts;
  for (double t = 0.0; t <= 120.0; t += 0.7) ts.push_back(t);
  const auto s = evolve_series(sp, prot, ts);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const auto r = evolve(sp, prot, ts[i]);
    EXPECT_NEAR(s[i].C_N, r.record.C_N, 1e-10);
    EXPECT_NEAR(s[i].L, r.record.L, 1e-12);
  }
}

TEST(Evolve, PhiBoundedByTwiceOmega) {
  const ReducedParams p{0.5, 1.0, 0.2, 51};
  const auto om = quench_angles(p, 0.3);
  const ModeGrid g(51);
  for (double t : {0.3, 2.0, 17.0}) {
    const auto r = evolve(FourSpinSpectrum{1.0, 0.2, 51}, {p, {{0.3, 0.0}}}, t);
    for (std::size_t i = 0; i < r.modes.size(); ++i) {
      const double phi = std::acos(std::min(1.0, std::abs(std::cos(0.5 * (r.modes[i].theta - dispersion(p, g.k[i]).theta)) * r.modes[i].amp1 -
                                                           std::sin(0.5 * (r.modes[i].theta - dispersion(p, g.k[i]).theta)) * r.modes[i].amp2)));
      EXPECT_LE(phi, std::abs(2 * om[i]) + 1e-12);
    }
  }
}

TEST(MultiQuench, ConstantOnNoQuenchSegments) {
  const FourSpinSpectrum sp{1.0, 1.5, 501};
  const auto r = multi_quench_scan(sp, {1.0, 1.0, 1.5, 501}, -0.2, 15.0, 3, 100.0);
  for (double a : {15.0, 45.0, 75.0}) {
    double lo = 1e300, hi = -1e300;
    for (const auto& x : r)
      if (x.t >= a && x.t <= a + 15.0) {
        lo = std::min(lo, x.C_N);
        hi = std::max(hi, x.C_N);
      }
    EXPECT_LT(hi - lo, 1e-10) << a;
  }
}

TEST(MultiQuench, SmoothWhenQuenchedOntoH1) {
  const FourSpinSpectrum sp{1.0, 1.5, 501};
  const auto r = multi_quench_scan(sp, {3.0, 1.0, 1.5, 501}, 0.2, 15.0, 3, 120.0, 0.01);
  // Second differences stay of the order dt^2 times the curvature scale.
  double max_dd = 0.0;
  for (std::size_t i = 1; i + 1 < r.size(); ++i) {
    const double t = r[i].t;
    bool near_switch = false;
    for (double s = 15.0; s <= 90.0; s += 15.0) near_switch |= std::abs(t - s) < 0.015;
    if (near_switch) continue;
    max_dd = std::max(max_dd, std::abs(r[i + 1].C_N - 2 * r[i].C_N + r[i - 1].C_N) / (0.01 * 0.01));
  }
  EXPECT_LT(max_dd, 1e3);
}

TEST(Xy, ModeAngle) {
  EXPECT_NEAR(xy_mode_angle(0.0, 1.0, pi / 2), pi / 2, 1e-15);
  EXPECT_THROW(xy_mode_angle(1.0, 1.0, 0.0), invalid_argument);
  EXPECT_THROW(xy_mode_angle(0.5, 1.5, 0.3), invalid_argument);
}

TEST(Xy, NoQuenchIsZero) {
  const XYSpectrum sp{0.7, 101};
  const auto r = multi_quench_scan(sp, {0.5, 1.0, 0.0, 101}, 0.0, 10.0, 2, 50.0, 0.5);
  for (const auto& x : r) EXPECT_NEAR(x.C_N, 0.0, 1e-24);
}

TEST(Xy, OneSegmentClosedForm) {
  const XYSpectrum sp{0.6, 61};
  const double h0 = 0.4, d = 0.3, t = 7.3;
  const auto r = evolve(sp, {{h0, 1.0, 0.0, 61}, {{d, 0.0}}}, t);
  double c = 0.0;
  for (double k : sp.modes(h0)) {
    const double om = 0.5 * (sp.theta(h0, k) - sp.theta(h0 + d, k));
    const double s = std::pow(std::sin(2 * om) * std::sin(XYSpectrum::eps(h0 + d, 0.6, k) * t), 2);
    c += std::pow(std::acos(std::sqrt(1 - s)), 2);
  }
  EXPECT_NEAR(r.record.C_N, c, 1e-12);
}

namespace {
double dominant_frequency(const std::vector<NCRecord>& r, double t0) {
  double mean = 0.0;
  int n = 0;
  for (const auto& x : r)
    if (x.t >= t0) mean += x.C_N, ++n;
  mean /= n;
  double best = 0.0, best_w = 0.0;
  for (double w = 0.05; w < 8.0; w += 0.005) {
    double re = 0.0, im = 0.0;
    for (const auto& x : r)
      if (x.t >= t0) re += (x.C_N - mean) * std::cos(w * x.t), im += (x.C_N - mean) * std::sin(w * x.t);
    if (re * re + im * im > best) best = re * re + im * im, best_w = w;
  }
  return best_w;
}
}  // namespace

TEST(Xy, CriticalQuenchDominatedBySoftModes) {
  // Quench onto h = 1 against an off-critical target with the same |delta|.
  // The closing gap pulls the dominant frequency of C_N(t) down.
  const XYSpectrum sp{1.0, 101};
  std::vector<double> ts;
  for (double t = 0.0; t <= 100.0; t += 0.05) ts.push_back(t);
  const auto crit = evolve_series(sp, {{1.2, 1.0, 0.0, 101}, {{-0.2, 0.0}}}, ts);
  const auto off = evolve_series(sp, {{1.4, 1.0, 0.0, 101}, {{-0.2, 0.0}}}, ts);
  EXPECT_LT(dominant_frequency(crit, 5.0), dominant_frequency(off, 5.0));
}

TEST(MultiQuench, AmplitudeDecaysThenPlateaus) {
  const FourSpinSpectrum sp{1.0, 1.5, 501};
  const auto r = multi_quench_scan(sp, {1.0, 1.0, 1.5, 501}, -0.2, 15.0, 3, 1500.0);
  auto amplitude = [&](double a, double b) {
    double lo = 1e300, hi = -1e300;
    for (const auto& x : r)
      if (x.t >= a && x.t <= b) lo = std::min(lo, x.C_N), hi = std::max(hi, x.C_N);
    return hi - lo;
  };
  const double first = amplitude(0.0, 15.0), last = amplitude(1485.0, 1500.0);
  EXPECT_GE(last / first, 0.1);
  EXPECT_LT(last / first, 1.0);
  // Late windows stay within a factor two of each other.
  const double mid = amplitude(735.0, 750.0);
  EXPECT_LT(std::max(mid, last) / std::min(mid, last), 2.0);
}
