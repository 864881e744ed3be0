#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <random>

#include "multispin/info_geometry.hpp"

using namespace multispin;

namespace {

using cd = std::complex<double>;

// Occupied single-particle orbitals of the 2x2 Bloch matrix at momentum k,
// from a numerical eigendecomposition.  Columns are the filled orbitals.
Eigen::MatrixXcd occupied_orbitals(double h, double J3, double k) {
  Eigen::Matrix2cd m;
  const double c = std::cos(k), s = std::sin(k);
  m(0, 0) = 1.5 * h - 2.5 * J3 * c;
  m(1, 1) = 0.5 * h - 0.5 * J3 * c;
  m(0, 1) = -cd(1.0, s);
  m(1, 0) = -cd(1.0, -s);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(m);
  std::vector<int> cols;
  for (int i = 0; i < 2; ++i)
    if (es.eigenvalues()(i) < -1e-12) cols.push_back(i);
  Eigen::MatrixXcd out(2, cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(j) = es.eigenvectors().col(cols[j]);
  return out;
}

// ln |<Psi(a)|Psi(b)>|^2 of the many-body Slater determinants on the grid.
double log_fidelity2(int N, double ha, double Ja, double hb, double Jb) {
  const ModeGrid g(N);
  double s = 0.0;
  for (double k : g.k) {
    const auto A = occupied_orbitals(ha, Ja, k), B = occupied_orbitals(hb, Jb, k);
    if (A.cols() != B.cols()) return -INFINITY;
    if (A.cols() == 0) continue;
    const cd d = (A.adjoint() * B).determinant();
    s += std::log(std::norm(d));
  }
  return s;
}

// Fidelity susceptibility along direction v from the symmetric overlap
// between x - e v / 2 and x + e v / 2, Richardson-combined in e.
double oracle_metric(int N, double h, double J3, double vh, double vj, double eps = 1e-3) {
  auto chi = [&](double e) {
    const double lf = log_fidelity2(N, h - 0.5 * e * vh, J3 - 0.5 * e * vj, h + 0.5 * e * vh, J3 + 0.5 * e * vj);
    return -std::expm1(lf) / (e * e);
  };
  return (4.0 * chi(eps / 2) - chi(eps)) / 3.0;
}

bool same_occupation(int N, double h, double J3, double e) {
  const auto ref = classify({h, 1.0, J3, N});
  for (double dh : {-e, 0.0, e})
    for (double dj : {-e, 0.0, e}) {
      const auto o = classify({h + dh, 1.0, J3 + dj, N});
      if (o.occupied1 != ref.occupied1 || o.occupied2 != ref.occupied2 || !o.on_boundary.empty()) return false;
    }
  return true;
}

}  // namespace

TEST(Qim, SaturatedRegionIsFlat) {
  const auto g = qim({10.0, 1.0, 0.5, 51});
  EXPECT_EQ(g.g_hh, 0.0);
  EXPECT_EQ(g.g_hJ3, 0.0);
  EXPECT_EQ(g.g_J3J3, 0.0);
  const auto t = qim_thermo(10.0, 0.5);
  EXPECT_EQ(t.g_hh, 0.0);
}

TEST(Qim, Symmetric) {
  const auto g = qim({0.7, 1.0, 0.9, 51});
  EXPECT_EQ(g.g_hJ3, g.g_J3h());
}

TEST(Qim, FidelityOracleRegionOne) {
  const int N = 101;
  const double h = 0.5, J3 = 0.2;
  const auto g = qim({h, 1.0, J3, N});
  EXPECT_NEAR(g.g_hh, oracle_metric(N, h, J3, 1, 0), 1e-6 * g.g_hh);
}

TEST(Qim, FidelityOracleRandomPoints) {
  const int N = 101;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> uh(0.0, 3.5), uj(0.0, 3.0);
  int per_region[5] = {0, 0, 0, 0, 0};
  int total = 0;
  for (int attempt = 0; attempt < 20000 && total < 24; ++attempt) {
    const double h = uh(rng), J3 = uj(rng);
    const auto r = classify({h, 1.0, J3, N}).region;
    const int idx = static_cast<int>(r) - 1;
    if (r == Region::V || per_region[idx] >= 6) continue;
    if (!same_occupation(N, h, J3, 2e-3)) continue;
    const auto g = qim({h, 1.0, J3, N});
    if (g.g_hh < 1e-8) continue;
    const double ohh = oracle_metric(N, h, J3, 1, 0);
    const double ojj = oracle_metric(N, h, J3, 0, 1);
    const double ohj = 0.5 * (oracle_metric(N, h, J3, 1, 1) - ohh - ojj);
    const double scale = std::max(g.g_hh, g.g_J3J3);
    EXPECT_NEAR(g.g_hh, ohh, 1e-6 * g.g_hh) << h << " " << J3;
    EXPECT_NEAR(g.g_J3J3, ojj, 1e-6 * g.g_J3J3) << h << " " << J3;
    EXPECT_NEAR(g.g_hJ3, ohj, 1e-6 * scale) << h << " " << J3;
    ++per_region[idx];
    ++total;
  }
  EXPECT_GE(total, 20);
  for (int i = 0; i < 4; ++i) EXPECT_GT(per_region[i], 0) << "region " << i + 1;
}

TEST(Qim, ThermodynamicMatchesLargeN) {
  const auto t = qim_thermo(0.5, 0.2);
  auto f = qim({0.5, 1.0, 0.2, 4001});
  f *= 1.0 / 4001;
  EXPECT_NEAR(f.g_hh, t.g_hh, 1e-4 * t.g_hh);
  EXPECT_NEAR(f.g_hJ3, t.g_hJ3, 1e-4 * std::abs(t.g_hJ3));
  EXPECT_NEAR(f.g_J3J3, t.g_J3J3, 1e-4 * t.g_J3J3);
}

TEST(Qim, ThermodynamicPartialOccupationMatchesLargeN) {
  for (auto [h, J3] : {std::pair{1.0, 1.0}, std::pair{1.5, 0.2}, std::pair{1.2, 2.0}}) {
    const auto t = qim_thermo(h, J3);
    auto f = qim({h, 1.0, J3, 20001});
    f *= 1.0 / 20001;
    EXPECT_NEAR(f.g_hh, t.g_hh, 2e-3 * t.g_hh) << h << " " << J3;
  }
}

TEST(Qim, VanishesApproachingH1) {
  const double J3 = 1.5, h1 = critical_fields(1.0, J3).h1;
  const double far = qim_thermo(h1 - 0.5, J3).g_hh;
  double prev = far;
  for (double d : {1e-1, 1e-2, 1e-3, 1e-4, 1e-6}) {
    const double g = qim_thermo(h1 - d, J3).g_hh;
    EXPECT_LT(g, prev);
    prev = g;
  }
  EXPECT_LT(prev, 1e-2 * far);
}

TEST(Qim, PositiveSemidefinite) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uh(-1.0, 5.0), uj(0.0, 3.0);
  for (int i = 0; i < 300; ++i) {
    const double h = uh(rng), J3 = uj(rng);
    const auto g = qim({h, 1.0, J3, 51});
    EXPECT_GE(g.eigenvalues()[0], -1e-10);
    const auto t = qim_thermo(h, J3);
    EXPECT_GE(t.eigenvalues()[0], -1e-10);
    if (classify({h, 1.0, J3, 51}).region == Region::V) EXPECT_EQ(g.trace(), 0.0);
  }
}

TEST(Qim, RegionTwoJumpsWhereCutoffChanges) {
  const int N = 51;
  const double J3 = 1.0, dh = 1e-4;
  int jumps = 0;
  auto count = [&](double h) { return classify({h, 1.0, J3, N}).singly_occupied(N).size(); };
  double prev = qim({0.3, 1.0, J3, N}).g_hh;
  auto prev_count = count(0.3);
  for (double h = 0.3 + dh; h < 2.4; h += dh) {
    ASSERT_EQ(classify({h, 1.0, J3, N}).region, Region::II);
    const double g = qim({h, 1.0, J3, N}).g_hh;
    const auto c = count(h);
    const bool jumped = std::abs(g - prev) > 1e-3 * std::max(g, prev);
    EXPECT_EQ(jumped, c != prev_count) << "h = " << h;
    jumps += jumped;
    prev = g;
    prev_count = c;
  }
  EXPECT_GT(jumps, 3);
}

TEST(Ricci, FlatMetric) {
  EXPECT_NEAR(ricci(ConstantMetric{2.0, 0.3, 1.5}, 0.4, 0.7), 0.0, 1e-6);
}

namespace {
struct HalfPlane {
  MetricTensor2 operator()(double h, double J3) const {
    const double s = 1.0 / (J3 * J3);
    return {s, 0.0, s, h, J3, 0};
  }
  HalfPlane frozen_at(double, double) const { return *this; }
};
struct Sphere {
  MetricTensor2 operator()(double u, double v) const {
    const double s = std::sin(u);
    return {1.0, 0.0, s * s, u, v, 0};
  }
  Sphere frozen_at(double, double) const { return *this; }
};
}  // namespace

TEST(Ricci, KnownSurfaces) {
  EXPECT_NEAR(ricci(HalfPlane{}, 0.3, 1.2), -2.0, 1e-6);
  EXPECT_NEAR(ricci(Sphere{}, 1.1, 0.4), 2.0, 1e-6);
}

TEST(Ricci, DegenerateMetricSignals) {
  EXPECT_THROW(ricci(FiniteSizeMetric{1.0, 51}, 10.0, 0.5), curvature_undefined);
}

TEST(Ricci, StepInvarianceAtRegularPoints) {
  const FiniteSizeMetric f{1.0, 1001};
  const ContinuumMetric c{};
  for (auto [h, J3] : {std::pair{0.3, 0.5}, std::pair{0.8, 0.5}, std::pair{1.0, 1.0}}) {
    const double a = ricci(f, h, J3), b = ricci(f, h, J3, 5e-5);
    EXPECT_LT(std::abs(a - b), 1e-2 * std::abs(a)) << h << " " << J3;
  }
  for (auto [h, J3] : {std::pair{0.3, 0.5}, std::pair{1.55, 0.2}}) {
    const double a = ricci(c, h, J3), b = ricci(c, h, J3, 5e-5);
    EXPECT_LT(std::abs(a - b), 1e-2 * std::abs(a)) << h << " " << J3;
  }
}

TEST(Ricci, BoundedAcrossH3InRegionOne) {
  const FiniteSizeMetric f{1.0, 1001};
  const double h3 = critical_fields(1.0, 0.5).h3;
  double max_abs = 0.0;
  for (double h = h3 - 0.1; h <= h3 + 0.1; h += 0.005) max_abs = std::max(max_abs, std::abs(ricci(f, h, 0.5)));
  EXPECT_LT(max_abs, 1e-2);
}

TEST(Ricci, GrowsTowardH13InRegionThree) {
  const auto c = critical_fields(1.0, 0.2);
  const ContinuumMetric m{1.0, 101.0};
  const double width = c.h13 - c.h1;
  const double start = std::abs(ricci(m, c.h13 - 0.05 * width, 0.2));
  const double end = std::abs(ricci(m, c.h13 - 0.002 * width, 0.2));
  EXPECT_GT(end, 10.0 * start);
}

TEST(Geodesic, HalfPlaneSemicircle) {
  const HalfPlane hp;
  const GeodesicState s{0.0, 1.0, 1.0, 0.0, 0.0};  // unit speed: g = 1 at J3 = 1
  const auto r = geodesic(hp, s, 2000, 1e-3);
  ASSERT_EQ(r.stop, GeodesicStop::completed);
  for (const auto& st : r.trajectory) {
    EXPECT_NEAR(st.h * st.h + st.J3 * st.J3, 1.0, 1e-8);
    EXPECT_NEAR(hp(st.h, st.J3).norm2(st.dh, st.dJ3), 1.0, 1e-8);
  }
}

TEST(Geodesic, NormConservedOverTenThousandSteps) {
  const auto field = FiniteSizeMetric{1.0, 51}.frozen_at(0.5, 0.2);
  const auto s = normalized_start(field, 0.5, 0.2, 0.3);
  const auto r = geodesic(field, s, 10000, 1e-4);
  ASSERT_EQ(r.trajectory.size(), 10001u);
  double drift = 0.0;
  for (const auto& st : r.trajectory) drift = std::max(drift, std::abs(field(st.h, st.J3).norm2(st.dh, st.dJ3) - 1.0));
  EXPECT_LT(drift, 1e-6);
}

TEST(Geodesic, ReversalRetraces) {
  const auto field = FiniteSizeMetric{1.0, 51}.frozen_at(0.5, 0.2);
  const auto s = normalized_start(field, 0.5, 0.2, 0.3);
  const auto fwd = geodesic(field, s, 2000, 1e-4);
  auto end = fwd.trajectory.back();
  end.dh = -end.dh;
  end.dJ3 = -end.dJ3;
  const auto back = geodesic(field, end, 2000, 1e-4);
  EXPECT_NEAR(back.trajectory.back().h, s.h, 1e-6);
  EXPECT_NEAR(back.trajectory.back().J3, s.J3, 1e-6);
}

TEST(Geodesic, DomainExitReported) {
  const ConstantMetric flat;
  const auto r = geodesic(flat, {0.0, 0.5, 1.0, 0.0, 0.0}, 1000, 1e-2, {-1.0, 1.0, 0.0, 1.0});
  EXPECT_EQ(r.stop, GeodesicStop::left_domain);
  EXPECT_NEAR(r.exit_tau, 1.0, 2e-2);
}

TEST(Geodesic, PaperStartApproachesButNeverCrossesH1) {
  const FiniteSizeMetric f{1.0, 51, true};
  const auto s = normalized_start(f, 1.0, 1.0, 0.04);
  EXPECT_NEAR(f(1.0, 1.0).norm2(s.dh, s.dJ3), 1.0, 1e-12);
  const auto r = geodesic(f, s, 200000, 1e-4, {-10, 10, 0, 10}, 1e-5, true);
  EXPECT_EQ(r.stop, GeodesicStop::degenerate_metric);
  double closest = 1e9;
  for (const auto& st : r.trajectory) {
    const double gap = critical_fields(1.0, st.J3).h1 - st.h;
    EXPECT_GT(gap, 0.0);
    closest = std::min(closest, gap);
  }
  EXPECT_LT(closest, 0.05);
  const double first = 1.0 / r.trajectory.front().dh, last = 1.0 / r.trajectory.back().dh;
  EXPECT_LT(last, 0.25 * first);
}

TEST(Fsc, ConstantSectionDerivativeIsSqrtGhh) {
  const FiniteSizeMetric f{1.0, 51, true};
  const double J3 = 0.2;
  const auto sec = constant_J3_section(f, J3, 0.1, 0.8, 2000);
  for (std::size_t i = 1; i < sec.size(); ++i) EXPECT_GT(sec[i].tau, sec[i - 1].tau);
  for (double h : {0.2, 0.35, 0.5, 0.65}) {
    const double e = 1e-4;
    const double fd = (fsc(sec, h + e).tau - fsc(sec, h - e).tau) / (2 * e);
    EXPECT_NEAR(fd, std::sqrt(f(h, J3).g_hh), 1e-4);
    EXPECT_NEAR(fsc(sec, h).dC_dh, std::sqrt(f(h, J3).g_hh), 1e-4);
  }
}

TEST(Fsc, RejectsNonMonotone) {
  std::vector<GeodesicState> t{{0.0, 0, 1, 0, 0}, {1.0, 0, 1, 0, 1}, {0.5, 0, -1, 0, 2}};
  EXPECT_THROW(fsc(t, 0.7), invalid_argument);
}

TEST(Fsc, TauIncreasingAlongPaperGeodesic) {
  const FiniteSizeMetric f{1.0, 51, true};
  const auto r = geodesic(f, normalized_start(f, 1.0, 1.0, 0.04), 200000, 1e-4, {-10, 10, 0, 10}, 1e-5, true);
  const auto& t = r.trajectory;
  for (std::size_t i = 1; i < t.size(); ++i) EXPECT_GT(t[i].tau, t[i - 1].tau);
  const auto p0 = fsc(t, 1.5), p1 = fsc(t, 3.0);
  EXPECT_GT(p1.tau, p0.tau);
  EXPECT_LT(p1.dC_dh, p0.dC_dh);
}
