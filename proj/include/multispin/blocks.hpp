#pragma once

// Dense tensors whose bond bases are sorted by S^z charge. Matrices built from
// them vanish outside the blocks where column charge - row charge equals a
// fixed shift, so products only visit those blocks.

#include <algorithm>
#include <map>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "multispin/errors.hpp"

namespace multispin::detail {

/// Charge labels of a bond basis, non-decreasing, grouped into ranges.
struct Sectors {
  std::vector<int> q;
  std::vector<int> charge;  // distinct values, ascending
  std::vector<Eigen::Index> start, size;

  Sectors() = default;
  explicit Sectors(std::vector<int> labels) : q(std::move(labels)) {
    if (!std::is_sorted(q.begin(), q.end())) throw invalid_argument("sector labels must be sorted");
    for (std::size_t i = 0; i < q.size(); ++i) {
      if (charge.empty() || charge.back() != q[i]) {
        charge.push_back(q[i]);
        start.push_back(static_cast<Eigen::Index>(i));
        size.push_back(0);
      }
      ++size.back();
    }
  }

  Eigen::Index dim() const { return static_cast<Eigen::Index>(q.size()); }
  int count() const { return static_cast<int>(charge.size()); }
  int find(int c) const {
    const auto it = std::lower_bound(charge.begin(), charge.end(), c);
    return it != charge.end() && *it == c ? static_cast<int>(it - charge.begin()) : -1;
  }
};

using ConstView = Eigen::Map<const Eigen::MatrixXd, 0, Eigen::OuterStride<>>;
using View = Eigen::Map<Eigen::MatrixXd, 0, Eigen::OuterStride<>>;

/// Matrix with entries only where cols.q - rows.q == shift.
struct Charged {
  ConstView m;
  const Sectors* rows;
  const Sectors* cols;
  int shift;
};

/// c (+)= alpha * op(a) * op(b), block by block. Without `accumulate` every
/// allowed block of c is overwritten, with zeros where no product exists.
inline void block_gemm(double alpha, const Charged& a, bool ta, const Charged& b, bool tb, View c, bool accumulate) {
  const Sectors& rows = ta ? *a.cols : *a.rows;
  const Sectors& mid = ta ? *a.rows : *a.cols;
  const Sectors& cols = tb ? *b.rows : *b.cols;
  const int sa = ta ? -a.shift : a.shift;
  const int sb = tb ? -b.shift : b.shift;
  for (int r = 0; r < rows.count(); ++r) {
    const int k = cols.find(rows.charge[r] + sa + sb);
    if (k < 0) continue;
    auto out = c.block(rows.start[r], cols.start[k], rows.size[r], cols.size[k]);
    const int m = mid.find(rows.charge[r] + sa);
    if (m < 0) {
      if (!accumulate) out.setZero();
      continue;
    }
    const Eigen::Index r0 = rows.start[r], rn = rows.size[r];
    const Eigen::Index m0 = mid.start[m], mn = mid.size[m];
    const Eigen::Index k0 = cols.start[k], kn = cols.size[k];
    const auto ab = [&](const auto& x, const auto& y) {
      if (accumulate)
        out.noalias() += alpha * x * y;
      else
        out.noalias() = alpha * x * y;
    };
    if (!ta && !tb) ab(a.m.block(r0, m0, rn, mn), b.m.block(m0, k0, mn, kn));
    if (!ta && tb) ab(a.m.block(r0, m0, rn, mn), b.m.block(k0, m0, kn, mn).transpose());
    if (ta && !tb) ab(a.m.block(m0, r0, mn, rn).transpose(), b.m.block(m0, k0, mn, kn));
    if (ta && tb) ab(a.m.block(m0, r0, mn, rn).transpose(), b.m.block(k0, m0, kn, mn).transpose());
  }
}

/// c (+)= alpha * a over the allowed blocks.
inline void block_axpy(double alpha, const Charged& a, View c, bool accumulate) {
  for (int r = 0; r < a.rows->count(); ++r) {
    const int k = a.cols->find(a.rows->charge[r] + a.shift);
    if (k < 0) continue;
    const auto src = a.m.block(a.rows->start[r], a.cols->start[k], a.rows->size[r], a.cols->size[k]);
    auto out = c.block(a.rows->start[r], a.cols->start[k], a.rows->size[r], a.cols->size[k]);
    if (accumulate)
      out += alpha * src;
    else
      out = alpha * src;
  }
}

struct BlockTruncation {
  Eigen::MatrixXd U, Vt;  // dense, zero outside blocks
  Eigen::VectorXd s;
  std::vector<int> q;  // charge of each kept singular vector, sorted
  double discarded = 0.0;
};

/// Truncated SVD of a matrix that vanishes unless row_q[r] == col_q[c]. Keeps
/// at most chi values with discarded weight <= cutoff; the new basis is sorted
/// by charge, and by decreasing singular value within a charge.
inline BlockTruncation block_svd(const Eigen::MatrixXd& m, const std::vector<int>& row_q, const std::vector<int>& col_q,
                                 int chi, double cutoff) {
  std::map<int, std::pair<std::vector<Eigen::Index>, std::vector<Eigen::Index>>> groups;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    if (!m.row(r).isZero(0.0)) groups[row_q[r]].first.push_back(r);
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    if (!m.col(c).isZero(0.0)) groups[col_q[c]].second.push_back(c);

  struct Block {
    int charge;
    const std::vector<Eigen::Index>* rows;
    const std::vector<Eigen::Index>* cols;
    Eigen::MatrixXd U, V;
    Eigen::VectorXd s;
  };
  std::vector<Block> blocks;
  for (const auto& [charge, rc] : groups) {
    if (rc.first.empty() || rc.second.empty()) continue;
    const Eigen::MatrixXd sub = m(rc.first, rc.second);
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(sub, Eigen::ComputeThinU | Eigen::ComputeThinV);
    blocks.push_back({charge, &rc.first, &rc.second, svd.matrixU(), svd.matrixV(), svd.singularValues()});
  }

  std::vector<std::tuple<double, int, Eigen::Index>> all;  // value, block, index
  double total = 0.0;
  for (int b = 0; b < static_cast<int>(blocks.size()); ++b)
    for (Eigen::Index j = 0; j < blocks[b].s.size(); ++j) {
      all.emplace_back(blocks[b].s(j), b, j);
      total += blocks[b].s(j) * blocks[b].s(j);
    }
  std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) {
    if (std::get<0>(x) != std::get<0>(y)) return std::get<0>(x) > std::get<0>(y);
    return std::tie(std::get<1>(x), std::get<2>(x)) < std::tie(std::get<1>(y), std::get<2>(y));
  });
  std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(chi), all.size());
  double tail = 0.0;
  for (std::size_t j = keep; j < all.size(); ++j) tail += std::get<0>(all[j]) * std::get<0>(all[j]);
  while (keep > 1) {
    const double v = std::get<0>(all[keep - 1]);
    if (tail + v * v > cutoff * total) break;
    tail += v * v;
    --keep;
  }
  if (keep == 0) throw numerical_error("block SVD of a zero matrix");
  all.resize(keep);
  std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) {
    return std::tie(std::get<1>(x), std::get<2>(x)) < std::tie(std::get<1>(y), std::get<2>(y));
  });

  BlockTruncation t;
  const auto k = static_cast<Eigen::Index>(keep);
  t.U = Eigen::MatrixXd::Zero(m.rows(), k);
  t.Vt = Eigen::MatrixXd::Zero(k, m.cols());
  t.s.resize(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const auto& [v, b, idx] = all[j];
    const Block& blk = blocks[b];
    t.s(j) = v;
    t.q.push_back(blk.charge);
    for (std::size_t r = 0; r < blk.rows->size(); ++r) t.U((*blk.rows)[r], j) = blk.U(r, idx);
    for (std::size_t c = 0; c < blk.cols->size(); ++c) t.Vt(j, (*blk.cols)[c]) = blk.V(c, idx);
  }
  t.s /= t.s.norm();
  t.discarded = total > 0.0 ? tail / total : 0.0;
  return t;
}

}  // namespace multispin::detail
