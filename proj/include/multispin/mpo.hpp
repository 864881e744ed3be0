#pragma once

// Matrix product operators built from operator strings by a finite-state
// machine: bond state 0 = nothing placed yet, 1 = string complete, others =
// open strings keyed by the operators already placed.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/CXX11/Tensor>

#include "multispin/errors.hpp"
#include "multispin/spin_terms.hpp"

namespace multispin {

inline constexpr int local_dim = 2;  // index 0 = spin down, 1 = spin up

/// <out|op|in> for the local basis above.
inline Eigen::Matrix2d local_matrix(LocalOp op) {
  Eigen::Matrix2d m = Eigen::Matrix2d::Zero();
  switch (op) {
    case LocalOp::Id: m << 1, 0, 0, 1; break;
    case LocalOp::Sz: m << -0.5, 0, 0, 0.5; break;
    case LocalOp::Sx: m << 0, 0.5, 0.5, 0; break;
    case LocalOp::Sp: m(1, 0) = 1.0; break;
    case LocalOp::Sm: m(0, 1) = 1.0; break;
    case LocalOp::Sy: throw invalid_argument("unsupported operator label Sy: rewrite with S+ and S-");
  }
  return m;
}

/// Change of 2 S^z under the operator, or nullopt when it has none.
inline std::optional<int> op_charge(LocalOp op) {
  switch (op) {
    case LocalOp::Id:
    case LocalOp::Sz: return 0;
    case LocalOp::Sp: return 1;
    case LocalOp::Sm: return -1;
    default: return std::nullopt;
  }
}

/// W[i](wl, wr, out, in); the chain starts in state 0 and ends in state 1.
struct MPO {
  std::vector<Eigen::Tensor<double, 4>> W;
  // charge[b][w]: number of spins raised by the operators placed left of
  // MPO bond b in state w. Empty when the strings do not conserve S^z.
  std::vector<std::vector<int>> charge;

  bool conserves_sz() const { return !charge.empty(); }

  int length() const { return static_cast<int>(W.size()); }
  int bond_dim(int bond) const {  // bond between sites bond and bond + 1
    return static_cast<int>(W[bond].dimension(1));
  }
  int max_bond_dim() const {
    int d = 0;
    for (const auto& w : W) d = std::max<int>(d, static_cast<int>(w.dimension(1)));
    return d;
  }
};

inline constexpr int mpo_max_span = 4;

inline MPO compile_mpo(const std::vector<OperatorString>& strings, int sites) {
  if (sites < 1) throw invalid_argument("MPO needs at least one site");
  // Open-string states per bond, keyed by the operator prefix.
  std::vector<std::map<std::vector<LocalOp>, int>> states(sites);
  struct Transition {
    int site, from, to;
    LocalOp op;
    double coef;
  };
  std::vector<Transition> moves;
  for (const auto& s : strings) {
    if (s.factors.empty()) throw invalid_argument("empty operator string");
    if (s.first_site() < 0 || s.last_site() >= sites) throw invalid_argument("operator string outside chain");
    if (s.span() > mpo_max_span) throw invalid_argument("operator string spans more than four sites");
    std::vector<LocalOp> ops(s.span(), LocalOp::Id);
    for (const auto& [site, op] : s.factors) {
      local_matrix(op);  // rejects unsupported labels
      ops[site - s.first_site()] = op;
    }
    int from = 0;
    std::vector<LocalOp> prefix;
    for (int j = 0; j < s.span(); ++j) {
      const int site = s.first_site() + j;
      prefix.push_back(ops[j]);
      if (j + 1 == s.span()) {
        moves.push_back({site, from, 1, ops[j], s.coefficient});
      } else {
        auto& table = states[site];
        auto it = table.find(prefix);
        if (it == table.end()) it = table.emplace(prefix, 2 + static_cast<int>(table.size())).first;
        moves.push_back({site, from, it->second, ops[j], 1.0});
        from = it->second;
      }
    }
  }
  MPO mpo;
  mpo.W.resize(sites);
  for (int i = 0; i < sites; ++i) {
    const int dl = i == 0 ? 2 : 2 + static_cast<int>(states[i - 1].size());
    const int dr = 2 + static_cast<int>(states[i].size());
    mpo.W[i] = Eigen::Tensor<double, 4>(dl, dr, local_dim, local_dim);
    mpo.W[i].setZero();
    for (int a = 0; a < local_dim; ++a) {
      mpo.W[i](0, 0, a, a) = 1.0;
        mpo.W[i](1, 1, a, a) = 1.0;
    }
  }
  bool conserving = true;
  mpo.charge.assign(sites + 1, {0, 0});
  for (int i = 0; i < sites; ++i) {
    auto& q = mpo.charge[i + 1];
    q.resize(2 + states[i].size());
    for (const auto& [prefix, w] : states[i]) {
      q[w] = 0;
      for (LocalOp op : prefix) {
        const auto c = op_charge(op);
        conserving = conserving && c.has_value();
        q[w] += c.value_or(0);
      }
    }
  }
  // Prefix transitions are identical for every string sharing the prefix.
  std::vector<std::map<std::pair<int, int>, bool>> seen(sites);
  for (const auto& t : moves) {
    if (t.to != 1) {
      if (seen[t.site][{t.from, t.to}]) continue;
      seen[t.site][{t.from, t.to}] = true;
    }
    const Eigen::Matrix2d m = local_matrix(t.op);
    for (int o = 0; o < local_dim; ++o)
      for (int n = 0; n < local_dim; ++n) mpo.W[t.site](t.from, t.to, o, n) += t.coef * m(o, n);
  }
  for (int i = 0; i < sites && conserving; ++i) {
    const auto& w = mpo.W[i];
    for (Eigen::Index a = 0; a < w.dimension(0); ++a)
      for (Eigen::Index b = 0; b < w.dimension(1); ++b)
        for (int o = 0; o < local_dim; ++o)
          for (int n = 0; n < local_dim; ++n)
            if (w(a, b, o, n) != 0.0 && mpo.charge[i + 1][b] != mpo.charge[i][a] + o - n) conserving = false;
  }
  if (!conserving) mpo.charge.clear();
  return mpo;
}

/// Dense 2^L matrix of the MPO (bit i of the index = site i up), L <= 14.
inline Eigen::MatrixXd mpo_to_dense(const MPO& mpo) {
  const int L = mpo.length();
  if (L > 14) throw invalid_argument("dense MPO contraction limited to 14 sites");
  const std::uint32_t dim = 1u << L;
  Eigen::MatrixXd out(dim, dim);
  for (std::uint32_t col = 0; col < dim; ++col)
    for (std::uint32_t row = 0; row < dim; ++row) {
      Eigen::RowVectorXd v = Eigen::RowVectorXd::Zero(mpo.W[0].dimension(0));
      v(0) = 1.0;
      for (int i = 0; i < L && !v.isZero(0.0); ++i) {
        const auto& w = mpo.W[i];
        const int o = row >> i & 1u, n = col >> i & 1u;
        Eigen::RowVectorXd next = Eigen::RowVectorXd::Zero(w.dimension(1));
        for (Eigen::Index a = 0; a < w.dimension(0); ++a) {
          if (v(a) == 0.0) continue;
          for (Eigen::Index b = 0; b < w.dimension(1); ++b) next(b) += v(a) * w(a, b, o, n);
        }
        v = std::move(next);
      }
      out(row, col) = v(1);
    }
  return out;
}

}  // namespace multispin
