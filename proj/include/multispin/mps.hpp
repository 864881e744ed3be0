#pragma once

// Open-boundary matrix product states with real tensors A[i](left, phys, right).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/CXX11/Tensor>

#include "multispin/errors.hpp"

namespace multispin {

struct MPS {
  std::vector<Eigen::Tensor<double, 3>> A;
  int center = 0;  // site carrying the norm; left of it left-canonical, right of it right-canonical

  int length() const { return static_cast<int>(A.size()); }
  int bond_dim(int bond) const { return static_cast<int>(A[bond].dimension(2)); }
  int max_bond_dim() const {
    int d = 1;
    for (const auto& a : A) d = std::max<int>(d, static_cast<int>(a.dimension(2)));
    return d;
  }
};

namespace detail {

// Column-major storage makes both groupings plain maps.
inline Eigen::Map<Eigen::MatrixXd> left_grouped(Eigen::Tensor<double, 3>& a) {
  return {a.data(), a.dimension(0) * a.dimension(1), a.dimension(2)};
}
inline Eigen::Map<Eigen::MatrixXd> right_grouped(Eigen::Tensor<double, 3>& a) {
  return {a.data(), a.dimension(0), a.dimension(1) * a.dimension(2)};
}
inline Eigen::Map<const Eigen::MatrixXd> left_grouped(const Eigen::Tensor<double, 3>& a) {
  return {a.data(), a.dimension(0) * a.dimension(1), a.dimension(2)};
}
inline Eigen::Map<const Eigen::MatrixXd> right_grouped(const Eigen::Tensor<double, 3>& a) {
  return {a.data(), a.dimension(0), a.dimension(1) * a.dimension(2)};
}

inline Eigen::Tensor<double, 3> from_matrix(const Eigen::MatrixXd& m, Eigen::Index l, Eigen::Index d, Eigen::Index r) {
  Eigen::Tensor<double, 3> t(l, d, r);
  std::copy(m.data(), m.data() + m.size(), t.data());
  return t;
}

inline Eigen::MatrixXd thin_q(const Eigen::HouseholderQR<Eigen::MatrixXd>& qr, Eigen::Index rows, Eigen::Index k) {
  return qr.householderQ() * Eigen::MatrixXd::Identity(rows, k);
}

}  // namespace detail

/// Moves the orthogonality center one site right by QR.
inline void shift_center_right(MPS& psi) {
  const int c = psi.center;
  if (c + 1 >= psi.length()) throw invalid_argument("center already at the right edge");
  auto& a = psi.A[c];
  const Eigen::Index l = a.dimension(0), d = a.dimension(1);
  const Eigen::MatrixXd m = detail::left_grouped(a);
  const Eigen::Index k = std::min(m.rows(), m.cols());
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  const Eigen::MatrixXd r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  a = detail::from_matrix(detail::thin_q(qr, m.rows(), k), l, d, k);
  auto& b = psi.A[c + 1];
  const Eigen::MatrixXd next = r * detail::right_grouped(b);
  b = detail::from_matrix(next, k, b.dimension(1), b.dimension(2));
  psi.center = c + 1;
}

/// Moves the orthogonality center one site left by LQ.
inline void shift_center_left(MPS& psi) {
  const int c = psi.center;
  if (c == 0) throw invalid_argument("center already at the left edge");
  auto& a = psi.A[c];
  const Eigen::Index d = a.dimension(1), r = a.dimension(2);
  const Eigen::MatrixXd mt = detail::right_grouped(a).transpose();
  const Eigen::Index k = std::min(mt.rows(), mt.cols());
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(mt);
  const Eigen::MatrixXd rt = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  a = detail::from_matrix(detail::thin_q(qr, mt.rows(), k).transpose(), k, d, r);
  auto& b = psi.A[c - 1];
  const Eigen::MatrixXd prev = detail::left_grouped(b) * rt.transpose();
  b = detail::from_matrix(prev, b.dimension(0), b.dimension(1), k);
  psi.center = c - 1;
}

inline void move_center(MPS& psi, int site) {
  if (site < 0 || site >= psi.length()) throw invalid_argument("center site outside chain");
  while (psi.center < site) shift_center_right(psi);
  while (psi.center > site) shift_center_left(psi);
}

inline double norm(const MPS& psi) {
  const auto& a = psi.A[psi.center];
  return std::sqrt(std::inner_product(a.data(), a.data() + a.size(), a.data(), 0.0));
}

inline void normalize(MPS& psi) {
  auto& a = psi.A[psi.center];
  const double n = norm(psi);
  if (!(n > 0.0)) throw numerical_error("MPS has zero norm");
  a = a * (1.0 / n);
}

/// Random state with bond dimension min(D, 2^i, 2^(L-i)), center at site 0.
inline MPS random_mps(int sites, int bond_dim, std::uint64_t seed, int phys_dim = 2) {
  if (sites < 1 || bond_dim < 1) throw invalid_argument("random_mps needs sites >= 1 and bond_dim >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  auto cap = [&](int bond) {  // dimension to the right of site `bond`
    double left = std::pow(phys_dim, bond + 1), right = std::pow(phys_dim, sites - bond - 1);
    return static_cast<int>(std::min<double>({static_cast<double>(bond_dim), left, right}));
  };
  MPS psi;
  psi.A.resize(sites);
  for (int i = 0; i < sites; ++i) {
    const int l = i == 0 ? 1 : cap(i - 1);
    const int r = i + 1 == sites ? 1 : cap(i);
    psi.A[i] = Eigen::Tensor<double, 3>(l, phys_dim, r);
    for (Eigen::Index j = 0; j < psi.A[i].size(); ++j) psi.A[i].data()[j] = gauss(rng);
  }
  psi.center = sites - 1;
  move_center(psi, 0);
  normalize(psi);
  return psi;
}

/// Product state from a list of local basis indices.
inline MPS product_mps(const std::vector<int>& config, int phys_dim = 2) {
  MPS psi;
  for (int s : config) {
    if (s < 0 || s >= phys_dim) throw invalid_argument("local state out of range");
    Eigen::Tensor<double, 3> a(1, phys_dim, 1);
    a.setZero();
    a(0, s, 0) = 1.0;
    psi.A.push_back(a);
  }
  return psi;
}

/// Largest deviation from the left/right canonical conditions.
inline double canonical_residual(const MPS& psi) {
  double worst = 0.0;
  for (int i = 0; i < psi.length(); ++i) {
    if (i == psi.center) continue;
    const auto& a = psi.A[i];
    Eigen::MatrixXd g;
    if (i < psi.center) {
      const auto m = detail::left_grouped(a);
      g = m.transpose() * m;
    } else {
      const auto m = detail::right_grouped(a);
      g = m * m.transpose();
    }
    worst = std::max(worst, (g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff());
  }
  return worst;
}

/// Schmidt coefficients across the bond left of site `bond` (sites [0, bond) | [bond, L)).
inline Eigen::VectorXd schmidt_values(MPS psi, int bond) {
  if (bond <= 0 || bond >= psi.length()) throw invalid_argument("bond outside chain");
  move_center(psi, bond - 1);
  const Eigen::BDCSVD<Eigen::MatrixXd> svd(detail::left_grouped(psi.A[bond - 1]));
  Eigen::VectorXd s = svd.singularValues();
  const double n = s.norm();
  return n > 0.0 ? Eigen::VectorXd(s / n) : s;
}

inline double entanglement_entropy(const Eigen::VectorXd& schmidt) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < schmidt.size(); ++i) {
    const double p = schmidt(i) * schmidt(i);
    if (p > 0.0) s -= p * std::log(p);
  }
  return s;
}

/// Entropy of the left half, sites [0, L/2).
inline double ee_center(const MPS& psi) {
  if (psi.length() < 2) return 0.0;
  return entanglement_entropy(schmidt_values(psi, psi.length() / 2));
}

/// Full state vector (bit i of the index = local state of site i), L <= 20.
inline Eigen::VectorXd to_dense(const MPS& psi) {
  const int L = psi.length();
  if (L > 20) throw invalid_argument("dense MPS limited to 20 sites");
  Eigen::MatrixXd acc = Eigen::MatrixXd::Ones(1, 1);  // rows: configurations so far, cols: bond
  for (int i = 0; i < L; ++i) {
    const auto& a = psi.A[i];
    const Eigen::Index d = a.dimension(1), r = a.dimension(2);
    Eigen::MatrixXd next(acc.rows() * d, r);
    for (Eigen::Index s = 0; s < d; ++s) {
      Eigen::MatrixXd slice(a.dimension(0), r);
      for (Eigen::Index x = 0; x < a.dimension(0); ++x)
        for (Eigen::Index y = 0; y < r; ++y) slice(x, y) = a(x, s, y);
      const Eigen::MatrixXd part = acc * slice;
      // index = config + s * 2^i
      for (Eigen::Index c = 0; c < acc.rows(); ++c) next.row(c + s * acc.rows()) = part.row(c);
    }
    acc = std::move(next);
  }
  return acc.col(0);
}

}  // namespace multispin
