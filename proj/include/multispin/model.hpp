#pragma once

// Free-fermion solution of the alternating spin-1/2 chain with three- and
// four-spin exchange: parametrizations, Bogoliubov data, critical lines,
// ground-state occupation and magnetization.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include "multispin/errors.hpp"

namespace multispin {

inline constexpr double pi = std::numbers::pi;

/// Couplings of the general two-sublattice Hamiltonian.  J24 is carried for
/// completeness only; every solver rejects a nonzero value.
struct GeneralCouplings {
  double mu1 = 1.0;
  double mu2 = 1.0;
  double H = 0.0;
  double J1 = 0.0;
  double J2 = 0.0;
  double J13 = 0.0;
  double J23 = 0.0;
  double J14 = 0.0;
  double J24 = 0.0;

  void validate() const {
    for (double x : {mu1, mu2, H, J1, J2, J13, J23, J14, J24})
      if (!std::isfinite(x)) throw invalid_argument("couplings must be finite");
    if (J24 != 0.0) throw invalid_argument("J24 != 0 is not supported");
  }

  /// Three-spin model: mu1 = mu2 = 1, J13 = J23 = J3, no four-spin term.
  static GeneralCouplings three_spin(double H, double J1, double J2, double J3) {
    return {1.0, 1.0, H, J1, J2, J3, J3, 0.0, 0.0};
  }
};

/// Working point (h, J, J3) of the reduced Hamiltonian on N cells.
struct ReducedParams {
  double h = 0.0;
  double J = 1.0;
  double J3 = 0.0;
  int N = 51;

  void validate() const {
    if (!std::isfinite(h) || !std::isfinite(J) || !std::isfinite(J3))
      throw invalid_argument("reduced parameters must be finite");
    if (N < 1) throw invalid_argument("cell count N must be positive");
    if (J == 0.0) throw degenerate_gap();
  }

  ReducedParams with_h(double value) const {
    ReducedParams p = *this;
    p.h = value;
    return p;
  }
  ReducedParams with_J3(double value) const {
    ReducedParams p = *this;
    p.J3 = value;
    return p;
  }

  /// mu1 = 3 mu, mu2 = mu, mu H = h/2, J1 = 2J, J2 = -1, J13 = 5 J3,
  /// J23 = J3, J14 = 4, J24 = 0 (taking mu = 1).
  GeneralCouplings to_general() const {
    return {3.0, 1.0, h / 2.0, 2.0 * J, -1.0, 5.0 * J3, J3, 4.0, 0.0};
  }
};

/// Periodic momentum grid k = 2 pi lambda / N.  For odd N lambda runs over
/// -(N-1)/2 .. (N-1)/2; for even N over -N/2+1 .. N/2.
struct ModeGrid {
  int N = 0;
  std::vector<int> lambda;
  std::vector<double> k;

  explicit ModeGrid(int cells) : N(cells) {
    if (cells < 1) throw invalid_argument("mode grid needs N >= 1");
    const int lo = (cells % 2 == 1) ? -(cells - 1) / 2 : -cells / 2 + 1;
    lambda.reserve(cells);
    k.reserve(cells);
    for (int l = lo; l < lo + cells; ++l) {
      lambda.push_back(l);
      k.push_back(2.0 * pi * l / cells);
    }
  }

  std::size_t size() const { return k.size(); }

  /// Index of the mode -k (same index for k = 0 and k = pi).
  std::size_t partner(std::size_t i) const {
    const int target = -lambda[i];
    const int lo = lambda.front();
    if (target < lo) return i;  // k = pi on even grids
    return static_cast<std::size_t>(target - lo);
  }
};

struct QuasiParticle {
  double k = 0.0;
  double Lambda = 0.0;
  double theta = 0.0;
  double u = 0.0;
  double v = 0.0;
  double phi = 0.0;
  double E1 = 0.0;
  double E2 = 0.0;
};

/// Partial derivatives of the Bogoliubov angle.
struct ThetaGradient {
  double d_h = 0.0;
  double d_J3 = 0.0;
};

namespace detail {

inline double gap_numerator(double h, double J3, double k) { return h / 2.0 - J3 * std::cos(k); }
inline double off_diagonal(double J, double k) { return std::hypot(J, std::sin(k)); }
inline double branch_mean(double h, double J3, double k) { return h - 1.5 * J3 * std::cos(k); }

}  // namespace detail

inline QuasiParticle dispersion(const ReducedParams& p, double k) {
  if (p.J == 0.0) throw degenerate_gap();
  if (!(k >= -pi - 1e-12 && k <= pi + 1e-12)) throw invalid_argument("momentum outside [-pi, pi]");
  QuasiParticle q;
  q.k = k;
  const double a = detail::gap_numerator(p.h, p.J3, k);
  const double b = detail::off_diagonal(p.J, k);
  q.Lambda = std::hypot(a, b);
  q.theta = std::atan2(b, a);
  q.u = std::cos(q.theta / 2.0);
  q.v = std::sin(q.theta / 2.0);
  // e^{-i phi} = (J - i sin k) / sqrt(J^2 + sin^2 k)
  q.phi = std::atan2(std::sin(k), p.J);
  const double mean = detail::branch_mean(p.h, p.J3, k);
  q.E1 = mean - q.Lambda;
  q.E2 = mean + q.Lambda;
  return q;
}

/// Analytic derivatives of theta_k with respect to h and J3.
inline ThetaGradient theta_gradient(const ReducedParams& p, double k) {
  const double a = detail::gap_numerator(p.h, p.J3, k);
  const double b = detail::off_diagonal(p.J, k);
  const double lam2 = a * a + b * b;
  // d theta / d a = -b / Lambda^2, with da/dh = 1/2 and da/dJ3 = -cos k.
  return {-b / (2.0 * lam2), b * std::cos(k) / lam2};
}

// ---------------------------------------------------------------------------
// Critical lines

struct CriticalLines {
  double h1 = 0.0;
  double h2 = 0.0;
  double h3 = 0.0;
  double h13 = 0.0;
  double k_m = 0.0;
  bool k_m_from_closed_form = false;
  // Three-spin model lines for mu1 = mu2 = 1, J1 = 2, J2 = 1 at the same J3.
  double Hc1 = 0.0;
  double Hc2 = 0.0;
  double Hs = 0.0;
};

/// Field at which the lower branch vanishes at momentum k (the larger root).
inline double lower_branch_zero_field(double J, double J3, double k) {
  const double c = std::cos(k), s = std::sin(k);
  return (4.0 * J3 * c + std::sqrt(J3 * J3 * c * c + 12.0 * J * J + 12.0 * s * s)) / 3.0;
}

namespace detail {

/// Closed-form maximizer of lower_branch_zero_field; empty when the
/// expression leaves its real domain.
inline std::optional<double> k_m_closed_form(double J, double J3) {
  const double J2 = J * J, t2 = J3 * J3, t4 = t2 * t2, t6 = t4 * t2;
  const double a = -64.0 * J2 * t2 + 5.0 * t4 - 120.0 * t2 - 48.0;
  const double b_rad = (J2 + 1.0) * (56.0 * t4 + 48.0 * t2 - 5.0 * t6);
  const double c = 64.0 * J2 * t2 + 5.0 * t4 + 8.0 * t2 - 48.0;
  if (b_rad < 0.0 || c == 0.0) return std::nullopt;
  const double ratio = (a + 16.0 * std::sqrt(b_rad)) / c;
  if (!(ratio >= 0.0) || !std::isfinite(ratio)) return std::nullopt;
  return -2.0 * std::atan(std::sqrt(ratio));
}

inline double h13_from_k(double J, double J3, double km) {
  const double c2 = std::cos(2.0 * km);
  return std::sqrt(24.0 * J * J + J3 * J3 * c2 + J3 * J3 - 12.0 * c2 + 12.0) / (3.0 * std::sqrt(2.0)) +
         4.0 / 3.0 * J3 * std::cos(km);
}

/// Direct maximization over k in [0, pi]: coarse scan, then Brent refinement.
inline double k_m_numerical(double J, double J3) {
  constexpr int samples = 2048;
  int best = 0;
  double best_val = -1e300;
  for (int i = 0; i <= samples; ++i) {
    const double v = lower_branch_zero_field(J, J3, pi * i / samples);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  const double lo = pi * std::max(0, best - 1) / samples;
  const double hi = pi * std::min(samples, best + 1) / samples;
  auto neg = [&](double k) { return -lower_branch_zero_field(J, J3, k); };
  const auto r = boost::math::tools::brent_find_minima(neg, lo, hi, 40);
  // Keep the endpoint when the bracket touches k = 0 or k = pi.
  double k = r.first;
  for (double edge : {lo, hi})
    if (lower_branch_zero_field(J, J3, edge) > lower_branch_zero_field(J, J3, k)) k = edge;
  return k;
}

}  // namespace detail

/// Critical fields of the reduced model.  h1, h3 zero the lower branch at
/// k = 0 and k = pi, h2 zeroes the upper branch at k = 0, h13 is the maximum
/// over k of the field zeroing the lower branch.
inline CriticalLines critical_fields(double J, double J3) {
  if (J == 0.0) throw degenerate_gap();
  if (!(J3 >= 0.0)) throw invalid_argument("critical_fields requires J3 >= 0");
  CriticalLines out;
  const double r = std::sqrt(12.0 * J * J + J3 * J3);
  out.h1 = (r + 4.0 * J3) / 3.0;
  out.h2 = (4.0 * J3 - r) / 3.0;
  out.h3 = (r - 4.0 * J3) / 3.0;

  const auto closed = detail::k_m_closed_form(J, J3);
  const double k_num = detail::k_m_numerical(J, J3);
  if (closed) {
    out.k_m = *closed;
    out.k_m_from_closed_form = true;
    out.h13 = detail::h13_from_k(J, J3, out.k_m);
    // The closed form tracks one branch only; the direct maximum wins
    // whenever it is strictly higher.
    const double direct = lower_branch_zero_field(J, J3, k_num);
    if (direct > out.h13 + 1e-12) {
      out.k_m = -k_num;
      out.k_m_from_closed_form = false;
      out.h13 = direct;
    }
  } else {
    out.k_m = -k_num;
    out.h13 = lower_branch_zero_field(J, J3, k_num);
  }

  out.Hc1 = (1.0 - J3) / 2.0;
  out.Hc2 = (J3 - 3.0) / 2.0;
  out.Hs = (J3 + 3.0) / 2.0;
  return out;
}

// ---------------------------------------------------------------------------
// Zero crossings of the branches

enum class Branch { lower = 1, upper = 2 };

struct BranchZero {
  double k = 0.0;  // in [0, pi]
  Branch branch = Branch::lower;
};

/// Momenta in [0, pi] where one of the branches vanishes, from the quadratic
/// (5 J3^2 + 4) c^2 - 8 h J3 c + 3 h^2 - 4 J^2 - 4 = 0 in c = cos k, sorted
/// by decreasing k.  Empty when the discriminant is negative.
inline std::vector<BranchZero> branch_zeros(double h, double J, double J3) {
  const double A = 5.0 * J3 * J3 + 4.0;
  const double B = -8.0 * h * J3;
  const double C = 3.0 * h * h - 4.0 * J * J - 4.0;
  const double disc = B * B - 4.0 * A * C;
  std::vector<BranchZero> out;
  if (disc < 0.0) return out;
  const double sq = std::sqrt(disc);
  for (double c : {(-B - sq) / (2.0 * A), (-B + sq) / (2.0 * A)}) {
    if (c < -1.0 || c > 1.0) continue;
    const double k = std::acos(c);
    // Squaring merged the two branches: E1 = 0 needs h - 1.5 J3 cos k >= 0.
    const Branch br = (detail::branch_mean(h, J3, k) >= 0.0) ? Branch::lower : Branch::upper;
    out.push_back({k, br});
  }
  std::sort(out.begin(), out.end(), [](const BranchZero& a, const BranchZero& b) { return a.k > b.k; });
  return out;
}

struct CriticalMomenta {
  double k_c1 = 0.0;
  double k_c2 = 0.0;
  Branch branch_c1 = Branch::lower;
  Branch branch_c2 = Branch::lower;
  double lambda_c1(int N) const { return N * k_c1 / (2.0 * pi); }
  double lambda_c2(int N) const { return N * k_c2 / (2.0 * pi); }
};

/// k_c1 >= k_c2 from the closed-form arccos roots.  Throws no_gapless_points
/// when the radicand is negative.  Each root records which branch it zeroes.
inline CriticalMomenta critical_momenta(const ReducedParams& p) {
  p.validate();
  const double J3 = p.J3, h = p.h, J = p.J;
  const double den = 5.0 * J3 * J3 + 4.0;
  const double rad = h * h * J3 * J3 - 12.0 * h * h + 20.0 * J * J * J3 * J3 + 16.0 * J * J +
                     20.0 * J3 * J3 + 16.0;
  if (rad < 0.0) throw no_gapless_points();
  const double sq = std::sqrt(rad);
  auto clamp_acos = [](double c) { return std::acos(std::clamp(c, -1.0, 1.0)); };
  CriticalMomenta m;
  m.k_c1 = clamp_acos((4.0 * h * J3 - sq) / den);
  m.k_c2 = clamp_acos((4.0 * h * J3 + sq) / den);
  m.branch_c1 = detail::branch_mean(h, J3, m.k_c1) >= 0.0 ? Branch::lower : Branch::upper;
  m.branch_c2 = detail::branch_mean(h, J3, m.k_c2) >= 0.0 ? Branch::lower : Branch::upper;
  return m;
}

// ---------------------------------------------------------------------------
// Phase classification

enum class Region { I = 1, II, III, IV, V };

inline std::string_view to_string(Region r) {
  switch (r) {
    case Region::I: return "I";
    case Region::II: return "II";
    case Region::III: return "III";
    case Region::IV: return "IV";
    case Region::V: return "V";
  }
  return "?";
}

inline constexpr double zero_energy_tolerance = 1e-12;

struct PhasePoint {
  Region region = Region::V;
  std::vector<std::size_t> occupied1;  // grid indices with E1 < 0
  std::vector<std::size_t> occupied2;  // grid indices with E2 < 0
  std::vector<std::size_t> on_boundary;  // |E| < 1e-12, left empty
  std::optional<double> k_c1;
  std::optional<double> k_c2;

  /// Modes holding exactly one quasiparticle (lower branch filled, upper
  /// empty): the only modes whose state depends on the parameters.
  std::vector<std::size_t> singly_occupied(std::size_t grid_size) const {
    std::vector<char> in2(grid_size, 0);
    for (auto i : occupied2) in2[i] = 1;
    std::vector<std::size_t> out;
    for (auto i : occupied1)
      if (!in2[i]) out.push_back(i);
    return out;
  }
};

namespace detail {

inline Region region_from_occupation(const ModeGrid& grid, const std::vector<std::size_t>& occ1,
                                     const std::vector<std::size_t>& occ2) {
  if (occ1.empty() && occ2.empty()) return Region::V;
  if (!occ2.empty()) return Region::IV;
  if (occ1.size() == grid.size()) return Region::I;
  const auto zero = static_cast<std::size_t>(-grid.lambda.front());
  if (std::find(occ1.begin(), occ1.end(), zero) != occ1.end()) return Region::II;
  return Region::III;
}

}  // namespace detail

/// Occupation by the sign of the quasiparticle energies on the mode grid.
inline PhasePoint classify(const ReducedParams& p) {
  p.validate();
  const ModeGrid grid(p.N);
  PhasePoint out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto q = dispersion(p, grid.k[i]);
    for (int b = 0; b < 2; ++b) {
      const double e = b == 0 ? q.E1 : q.E2;
      if (std::abs(e) < zero_energy_tolerance) {
        out.on_boundary.push_back(i);
      } else if (e < 0.0) {
        (b == 0 ? out.occupied1 : out.occupied2).push_back(i);
      }
    }
  }
  out.region = detail::region_from_occupation(grid, out.occupied1, out.occupied2);
  try {
    const auto m = critical_momenta(p);
    out.k_c1 = m.k_c1;
    out.k_c2 = m.k_c2;
  } catch (const no_gapless_points&) {
  }
  return out;
}

/// Classification in the thermodynamic limit from the sign pattern of the
/// branches on [0, pi] (midpoints between zero crossings).
inline Region classify_thermodynamic(double h, double J, double J3) {
  const ReducedParams p{h, J, J3, 1};
  std::vector<double> cuts{0.0, pi};
  for (const auto& z : branch_zeros(h, J, J3)) cuts.push_back(z.k);
  std::sort(cuts.begin(), cuts.end());
  bool any1 = false, all1 = true, any2 = false, zero1 = false;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] - cuts[i] < 1e-14) continue;
    const auto q = dispersion(p, 0.5 * (cuts[i] + cuts[i + 1]));
    const bool n1 = q.E1 < 0.0;
    any1 |= n1;
    all1 &= n1;
    any2 |= q.E2 < 0.0;
    if (i == 0) zero1 = n1;
  }
  if (!any1 && !any2) return Region::V;
  if (any2) return Region::IV;
  if (all1) return Region::I;
  return zero1 ? Region::II : Region::III;
}

/// E_gs = sum of occupied quasiparticle energies - N h.
inline double ground_energy(const ReducedParams& p) {
  const auto phase = classify(p);
  const ModeGrid grid(p.N);
  double e = -p.N * p.h;
  for (auto i : phase.occupied1) e += dispersion(p, grid.k[i]).E1;
  for (auto i : phase.occupied2) e += dispersion(p, grid.k[i]).E2;
  return e;
}

namespace detail {
inline double dE_dh(const ReducedParams& p, double k, Branch b) {
  const double a = gap_numerator(p.h, p.J3, k);
  const double lam = std::hypot(a, off_diagonal(p.J, k));
  return b == Branch::lower ? 1.0 - a / (2.0 * lam) : 1.0 + a / (2.0 * lam);
}
}  // namespace detail

/// Weighted magnetization per cell <3 S1z + S2z>/2 = -(1/N) dE_gs/dh on the
/// finite grid.
inline double magnetization(const ReducedParams& p) {
  const auto phase = classify(p);
  const ModeGrid grid(p.N);
  double s = 0.0;
  for (auto i : phase.occupied1) s += detail::dE_dh(p, grid.k[i], Branch::lower);
  for (auto i : phase.occupied2) s += detail::dE_dh(p, grid.k[i], Branch::upper);
  return 1.0 - s / p.N;
}

/// Thermodynamic-limit magnetization by adaptive quadrature over the
/// occupied momentum intervals.
inline double magnetization_thermodynamic(double h, double J, double J3) {
  const ReducedParams p{h, J, J3, 1};
  p.validate();
  std::vector<double> cuts{0.0, pi};
  for (const auto& z : branch_zeros(h, J, J3)) cuts.push_back(z.k);
  std::sort(cuts.begin(), cuts.end());
  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    if (b - a < 1e-15) continue;
    const auto mid = dispersion(p, 0.5 * (a + b));
    for (Branch br : {Branch::lower, Branch::upper}) {
      const double e = br == Branch::lower ? mid.E1 : mid.E2;
      if (e >= 0.0) continue;
      auto f = [&](double k) { return detail::dE_dh(p, k, br); };
      integral += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, 1e-12);
    }
  }
  return 1.0 - 2.0 * integral / (2.0 * pi);
}

// ---------------------------------------------------------------------------
// Three-spin model (mu1 = mu2 = 1, J13 = J23 = J3, J14 = 0)

struct ThreeSpinLines {
  double Hc1 = 0.0;
  double Hc2 = 0.0;
  double Hs = 0.0;
  double first_order_onset = 0.0;  // J3 where Hc1 = 0
  double intersection = 0.0;       // J3 where Hc2 = 0
};

/// Band-edge zero crossings of E = H - (J3/2) cos k -+ |J1 + J2 e^{ik}|/2.
inline ThreeSpinLines three_spin_lines(double J1, double J2, double J3) {
  ThreeSpinLines out;
  out.Hc1 = (std::abs(J1 - J2) - J3) / 2.0;
  out.Hc2 = (J3 - std::abs(J1 + J2)) / 2.0;
  out.Hs = (J3 + std::abs(J1 + J2)) / 2.0;
  out.first_order_onset = std::abs(J1 - J2);
  out.intersection = std::abs(J1 + J2);
  return out;
}

}  // namespace multispin
