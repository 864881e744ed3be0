#pragma once

// Exact diagonalization of short chains, blocked by total S^z.

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "multispin/errors.hpp"
#include "multispin/lanczos.hpp"
#include "multispin/model.hpp"
#include "multispin/spin_terms.hpp"

namespace multispin {

inline constexpr int ed_max_sites = 14;

/// Basis bit i set <=> site i is spin up.
struct EdSector {
  int n_up = 0;
  std::vector<std::uint32_t> states;
  double energy = 0.0;
  double second_energy = 0.0;  // +inf for one-state sectors
  Eigen::VectorXd vector;
};

struct EdResult {
  int sites = 0;
  double energy = 0.0;
  double gap = 0.0;  // to the next level over all sectors
  int n_up = 0;
  std::vector<std::uint32_t> states;
  Eigen::VectorXd vector;
  std::vector<double> sector_energies;  // lowest energy at each n_up = 0..sites
  double entropy = 0.0;                 // cut at sites / 2
  double sz_per_cell = 0.0;
  double zeeman_moment = 0.0;  // (1/N) sum (mu1 Sz1 + mu2 Sz2)
};

namespace detail {

/// op|s> = amp |s'>; returns false if annihilated.
inline bool apply_string(const OperatorString& op, std::uint32_t s, std::uint32_t& out, double& amp) {
  amp = op.coefficient;
  for (const auto& [site, o] : op.factors) {
    const std::uint32_t bit = 1u << site;
    switch (o) {
      case LocalOp::Id: break;
      case LocalOp::Sz: amp *= (s & bit) ? 0.5 : -0.5; break;
      case LocalOp::Sx: s ^= bit; amp *= 0.5; break;
      case LocalOp::Sp:
        if (s & bit) return false;
        s |= bit;
        break;
      case LocalOp::Sm:
        if (!(s & bit)) return false;
        s &= ~bit;
        break;
      case LocalOp::Sy: throw invalid_argument("Sy must be rewritten with S+ and S-");
    }
  }
  out = s;
  return true;
}

inline bool conserves_sz(const OperatorString& op) {
  int d = 0;
  for (const auto& [site, o] : op.factors) {
    if (o == LocalOp::Sp) ++d;
    if (o == LocalOp::Sm) --d;
    if (o == LocalOp::Sx || o == LocalOp::Sy) return false;
  }
  return d == 0;
}

inline Eigen::SparseMatrix<double> sector_matrix(const std::vector<OperatorString>& ops,
                                                const std::vector<std::uint32_t>& states) {
  std::unordered_map<std::uint32_t, int> index;
  for (std::size_t i = 0; i < states.size(); ++i) index[states[i]] = static_cast<int>(i);
  std::vector<Eigen::Triplet<double>> entries;
  for (std::size_t i = 0; i < states.size(); ++i)
    for (const auto& op : ops) {
      std::uint32_t t;
      double a;
      if (apply_string(op, states[i], t, a)) entries.emplace_back(index.at(t), static_cast<int>(i), a);
    }
  const auto n = static_cast<Eigen::Index>(states.size());
  Eigen::SparseMatrix<double> h(n, n);
  h.setFromTriplets(entries.begin(), entries.end());
  return h;
}

inline constexpr Eigen::Index ed_dense_limit = 400;

}  // namespace detail

/// Dense matrix of the operator sum on the full 2^L space.
inline Eigen::MatrixXd dense_operator(const std::vector<OperatorString>& ops, int sites) {
  if (sites < 1 || sites > ed_max_sites) throw invalid_argument("dense operators are limited to 14 sites");
  const std::uint32_t dim = 1u << sites;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
  for (std::uint32_t s = 0; s < dim; ++s)
    for (const auto& op : ops) {
      if (op.last_site() >= sites) throw invalid_argument("operator string exceeds chain length");
      std::uint32_t t;
      double a;
      if (detail::apply_string(op, s, t, a)) m(t, s) += a;
    }
  return m;
}

/// Lowest eigenpair in the sector with n_up up spins.
inline EdSector diagonalize_sector(const std::vector<OperatorString>& ops, int sites, int n_up) {
  EdSector sec;
  sec.n_up = n_up;
  const std::uint32_t dim = 1u << sites;
  for (std::uint32_t s = 0; s < dim; ++s)
    if (std::popcount(s) == n_up) sec.states.push_back(s);
  const auto h = detail::sector_matrix(ops, sec.states);
  const Eigen::Index n = h.rows();
  if (n <= detail::ed_dense_limit) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es{Eigen::MatrixXd(h)};
    sec.energy = es.eigenvalues()(0);
    sec.second_energy = n > 1 ? es.eigenvalues()(1) : std::numeric_limits<double>::infinity();
    sec.vector = es.eigenvectors().col(0);
    return sec;
  }
  const LanczosConfig cfg{1e-12, 48, 200};
  const auto ground = lanczos_lowest([&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y = h * x; },
                                     Eigen::VectorXd::LinSpaced(n, 1.0, 2.0), cfg);
  sec.energy = ground.value;
  sec.vector = ground.vector;
  // Second level: shift the ground vector out of the way.
  const double shift = std::abs(ground.value) + Eigen::VectorXd(h.cwiseAbs() * Eigen::VectorXd::Ones(n)).maxCoeff() + 1.0;
  const Eigen::VectorXd& v0 = ground.vector;
  const auto excited = lanczos_lowest(
      [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
        Eigen::VectorXd px = x - v0 * v0.dot(x);
        y = h * px;
        y -= v0 * v0.dot(y);
        y += shift * v0 * v0.dot(x);
      },
      Eigen::VectorXd::LinSpaced(n, 2.0, 1.0), cfg);
  sec.second_energy = excited.value;
  return sec;
}

/// Von Neumann entropy of sites [0, cut) for a state given on a list of basis states.
inline double ed_entropy(const std::vector<std::uint32_t>& states, const Eigen::VectorXd& psi, int sites, int cut) {
  if (cut <= 0 || cut >= sites) return 0.0;
  const std::uint32_t left_dim = 1u << cut;
  const std::uint32_t right_dim = 1u << (sites - cut);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(left_dim, right_dim);
  for (std::size_t i = 0; i < states.size(); ++i) m(states[i] & (left_dim - 1), states[i] >> cut) = psi(i);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  double s = 0.0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    const double p = svd.singularValues()(i) * svd.singularValues()(i);
    if (p > 0.0) s -= p * std::log(p);
  }
  return s;
}

/// Ground state of a total-S^z conserving Hamiltonian on at most 14 sites.
/// `mu` weights the two sublattices in zeeman_moment.
inline EdResult exact_diag(const std::vector<OperatorString>& ops, int sites, double mu1 = 1.0, double mu2 = 1.0) {
  if (sites < 1 || sites > ed_max_sites) throw invalid_argument("exact_diag is limited to 14 spins");
  for (const auto& op : ops) {
    if (!detail::conserves_sz(op)) throw invalid_argument("exact_diag needs S^z-conserving strings");
    if (op.last_site() >= sites) throw invalid_argument("operator string exceeds chain length");
  }
  EdResult r;
  r.sites = sites;
  r.sector_energies.assign(sites + 1, 0.0);
  EdSector best;
  best.energy = std::numeric_limits<double>::infinity();
  for (int n = 0; n <= sites; ++n) {
    auto sec = diagonalize_sector(ops, sites, n);
    r.sector_energies[n] = sec.energy;
    if (sec.energy < best.energy) best = std::move(sec);
  }
  // Next level: second eigenvalue of the ground sector or the best other sector.
  double next = best.second_energy;
  for (int n = 0; n <= sites; ++n)
    if (n != best.n_up) next = std::min(next, r.sector_energies[n]);
  r.energy = best.energy;
  r.gap = next - best.energy;
  r.n_up = best.n_up;
  r.states = best.states;
  r.vector = best.vector;
  r.entropy = ed_entropy(r.states, r.vector, sites, sites / 2);
  const int cells = std::max(1, sites / 2);
  for (std::size_t i = 0; i < r.states.size(); ++i) {
    const double w = r.vector(i) * r.vector(i);
    for (int site = 0; site < sites; ++site) {
      const double sz = (r.states[i] >> site & 1u) ? 0.5 : -0.5;
      r.sz_per_cell += w * sz / cells;
      r.zeeman_moment += w * sz * (site % 2 == 0 ? mu1 : mu2) / cells;
    }
  }
  return r;
}

inline EdResult exact_diag(const GeneralCouplings& g, int cells, Boundary boundary = Boundary::open,
                           int twist = 1) {
  if (2 * cells > ed_max_sites) throw invalid_argument("exact_diag is limited to 7 cells");
  return exact_diag(spin_hamiltonian(g, cells, boundary, twist), 2 * cells, g.mu1, g.mu2);
}

inline EdResult exact_diag(const ReducedParams& p, Boundary boundary = Boundary::open, int twist = 1) {
  p.validate();
  return exact_diag(p.to_general(), p.N, boundary, twist);
}

}  // namespace multispin
