#pragma once

// Quadratic fermion form of the chain after Jordan-Wigner, its ground state
// and the correlation-matrix entanglement entropy.

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "multispin/errors.hpp"
#include "multispin/model.hpp"
#include "multispin/spin_terms.hpp"

namespace multispin {

/// H = sum_ij t_ij a_i^dag a_j + constant on 2N sites (site 2n: sublattice 1).
struct HoppingMatrix {
  Eigen::MatrixXd t;
  double constant = 0.0;
  int cells = 0;
  Boundary boundary = Boundary::open;
  int twist = 1;  // +1 periodic, -1 antiperiodic fermions (periodic chains only)

  int sites() const { return 2 * cells; }
};

/// The XY-string with coupling -Jx and m intermediate S^z factors maps to
/// the hopping -Jx / 2^(m+1).  `twist` multiplies the bonds that wrap around.
inline HoppingMatrix build_hopping(const GeneralCouplings& g, int cells, Boundary boundary = Boundary::open,
                                   int twist = 1) {
  g.validate();
  if (cells < 1) throw invalid_argument("need at least one cell");
  if (boundary == Boundary::periodic && cells < 2)
    throw invalid_argument("periodic chains need at least two cells");
  if (twist != 1 && twist != -1) throw invalid_argument("twist must be +1 or -1");
  HoppingMatrix m;
  m.cells = cells;
  m.boundary = boundary;
  m.twist = boundary == Boundary::periodic ? twist : 1;
  const int L = 2 * cells;
  m.t = Eigen::MatrixXd::Zero(L, L);
  auto hop = [&](int i, int j, double v, bool wraps) {
    if (wraps) v *= m.twist;
    m.t(i, j) += v;
    m.t(j, i) += v;
  };
  for (int n = 0; n < cells; ++n) {
    const int s1 = 2 * n, s2 = 2 * n + 1;
    m.t(s1, s1) += g.H * g.mu1;
    m.t(s2, s2) += g.H * g.mu2;
    m.constant -= 0.5 * g.H * (g.mu1 + g.mu2);
    hop(s1, s2, -g.J1 / 2.0, false);
    const bool wraps = n + 1 == cells;
    if (wraps && boundary == Boundary::open) continue;
    const int t1 = (s1 + 2) % L, t2 = (s2 + 2) % L;
    hop(s2, t1, -g.J2 / 2.0, wraps);
    hop(s1, t1, -g.J13 / 4.0, wraps);
    hop(s2, t2, -g.J23 / 4.0, wraps);
    hop(s1, t2, -g.J14 / 8.0, wraps);
  }
  return m;
}

inline HoppingMatrix build_hopping(const ReducedParams& p, Boundary boundary = Boundary::open, int twist = 1) {
  p.validate();
  return build_hopping(p.to_general(), p.N, boundary, twist);
}

/// Slater determinant filling every orbital with energy below -1e-12.
struct FreeFermionState {
  Eigen::VectorXd orbital_energies;  // ascending
  Eigen::MatrixXd orbitals;          // columns
  int occupied = 0;
  int zero_modes = 0;  // |eps| <= 1e-12, left empty
  double energy = 0.0;
};

inline FreeFermionState free_fermion_ground_state(const HoppingMatrix& m) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.t);
  if (es.info() != Eigen::Success) throw numerical_error("hopping matrix diagonalization failed");
  FreeFermionState s;
  s.orbital_energies = es.eigenvalues();
  s.orbitals = es.eigenvectors();
  s.energy = m.constant;
  for (Eigen::Index i = 0; i < s.orbital_energies.size(); ++i) {
    const double e = s.orbital_energies(i);
    if (std::abs(e) <= zero_energy_tolerance) {
      ++s.zero_modes;
    } else if (e < 0.0) {
      ++s.occupied;
      s.energy += e;
    }
  }
  return s;
}

/// Lowest energy with exactly `particles` fermions.
inline double lowest_energy_with(const HoppingMatrix& m, int particles) {
  if (particles < 0 || particles > m.sites()) throw invalid_argument("particle number out of range");
  const Eigen::VectorXd e = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m.t, Eigen::EigenvaluesOnly).eigenvalues();
  return m.constant + e.head(particles).sum();
}

/// C_ij = <a_i^dag a_j> for sites first .. first+size-1.
inline Eigen::MatrixXd correlation_matrix(const FreeFermionState& s, int first, int size) {
  if (first < 0 || size < 0 || first + size > s.orbitals.rows())
    throw invalid_argument("subsystem outside the chain");
  const auto occ = s.orbitals.block(first, 0, size, s.occupied);
  return occ * occ.transpose();
}

inline constexpr double occupation_clamp_tolerance = 1e-10;

/// S = -sum [nu ln nu + (1 - nu) ln (1 - nu)] over eigenvalues of C.
inline double entropy_from_correlation(const Eigen::MatrixXd& c) {
  if (c.rows() == 0) return 0.0;
  const Eigen::VectorXd nu = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(c, Eigen::EigenvaluesOnly).eigenvalues();
  double s = 0.0;
  for (Eigen::Index i = 0; i < nu.size(); ++i) {
    if (nu(i) < -occupation_clamp_tolerance || nu(i) > 1.0 + occupation_clamp_tolerance)
      throw numerical_error("correlation eigenvalue outside [0, 1]");
    const double x = std::clamp(nu(i), 0.0, 1.0);
    if (x > 0.0) s -= x * std::log(x);
    if (x < 1.0) s -= (1.0 - x) * std::log1p(-x);
  }
  return s;
}

/// Entropy of sites [0, cut); cut < 0 selects the chain center.
inline double ee_correlation(const HoppingMatrix& m, int cut = -1) {
  if (cut < 0) cut = m.sites() / 2;
  if (cut > m.sites()) throw invalid_argument("cut beyond the chain");
  return entropy_from_correlation(correlation_matrix(free_fermion_ground_state(m), 0, cut));
}

inline double ee_correlation(const ReducedParams& p, int cut = -1) {
  return ee_correlation(build_hopping(p), cut);
}

inline double ee_correlation(const GeneralCouplings& g, int cells, int cut = -1) {
  return ee_correlation(build_hopping(g, cells), cut);
}

/// Discontinuities of a scan y(x): adjacent pairs whose |dy| is at least
/// `fraction` of the largest |dy| in the scan.  Reported at pair midpoints.
inline std::vector<double> find_jumps(const std::vector<double>& x, const std::vector<double>& y,
                                      double fraction = 0.5) {
  if (x.size() != y.size()) throw invalid_argument("scan axes differ in length");
  std::vector<double> out;
  if (x.size() < 2) return out;
  double largest = 0.0;
  for (std::size_t i = 0; i + 1 < y.size(); ++i) largest = std::max(largest, std::abs(y[i + 1] - y[i]));
  if (largest == 0.0) return out;
  for (std::size_t i = 0; i + 1 < y.size(); ++i)
    if (std::abs(y[i + 1] - y[i]) >= fraction * largest) out.push_back(0.5 * (x[i] + x[i + 1]));
  return out;
}

}  // namespace multispin
