#pragma once

// Finite-chain two-site DMRG.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/CXX11/Tensor>

#include "multispin/blocks.hpp"
#include "multispin/errors.hpp"
#include "multispin/lanczos.hpp"
#include "multispin/model.hpp"
#include "multispin/mpo.hpp"
#include "multispin/mps.hpp"
#include "multispin/spin_terms.hpp"

namespace multispin {

struct SweepReport {
  int sweep = 0;
  bool rightward = true;
  double energy = 0.0;
  int max_bond_dim = 0;
  double max_discarded_weight = 0.0;
  long matvecs = 0;
};

struct SweepConfig {
  int chi_max = 300;
  double svd_cutoff = 1e-10;  // discarded weight per truncation
  int max_sweeps = 20;
  double energy_tol = 1e-9;  // sweep-to-sweep change relative to max(1, |E|)
  double lanczos_tol = 1e-10;
  int initial_bond_dim = 8;
  std::uint64_t seed = 20240607;
  int seeds = 2;
  bool conserve_sz = true;  // block tensors by S^z when the MPO allows it
  int n_up = -1;            // fixed number of up spins; -1 searches for the lowest sector
  std::function<void(const SweepReport&)> on_half_sweep;  // optional progress hook

  void validate() const {
    if (chi_max < 1) throw invalid_argument("chi_max must be >= 1");
    if (!(svd_cutoff >= 0.0) || !(energy_tol > 0.0) || !(lanczos_tol > 0.0))
      throw invalid_argument("tolerances must be positive");
    if (max_sweeps < 1 || initial_bond_dim < 1 || seeds < 1) throw invalid_argument("sweep counts must be positive");
  }
};

struct DmrgRun {
  double energy = 0.0;
  MPS state;
  std::uint64_t seed = 0;
  std::vector<double> half_sweep_energies;
  int sweeps = 0;
  double last_delta = 0.0;
  double max_discarded_weight = 0.0;
  double max_canonical_residual = 0.0;  // worst value seen after a sweep
  int n_up = -1;                        // sector of the run, -1 without blocking
  bool converged = false;
};

struct DmrgResult {
  double energy = 0.0;
  MPS state;
  DmrgRun best;
  std::vector<double> seed_energies;                   // runs in the chosen sector
  std::vector<std::pair<int, double>> sector_energies;  // (n_up, energy) for every sector tried
  int n_up = -1;
};

namespace detail {

using T3 = Eigen::Tensor<double, 3>;
using T4 = Eigen::Tensor<double, 4>;
using Pair = Eigen::IndexPair<int>;

/// Environments are stored as (bra, mpo, ket).
inline T3 edge_environment(Eigen::Index mpo_dim, Eigen::Index state) {
  T3 e(1, mpo_dim, 1);
  e.setZero();
  e(0, state, 0) = 1.0;
  return e;
}

inline T3 grow_left(const T3& env, const T3& a, const T4& w) {
  const Eigen::array<Pair, 1> c1{Pair(2, 0)};
  const Eigen::array<Pair, 2> c2{Pair(1, 0), Pair(2, 3)};
  const Eigen::array<Pair, 2> c3{Pair(0, 0), Pair(3, 1)};
  const T4 t1 = env.contract(a, c1);  // bra, w, s, ket'
  const T4 t2 = t1.contract(w, c2);   // bra, ket', w', t
  const T3 t3 = t2.contract(a, c3);   // ket', w', bra'
  return t3.shuffle(Eigen::array<int, 3>{2, 1, 0});
}

inline T3 grow_right(const T3& env, const T3& a, const T4& w) {
  const Eigen::array<Pair, 1> c1{Pair(2, 2)};
  const Eigen::array<Pair, 2> c2{Pair(1, 3), Pair(3, 1)};
  const Eigen::array<Pair, 2> c3{Pair(1, 2), Pair(3, 1)};
  const T4 t1 = a.contract(env, c1);  // ket, s, bra, w
  const T4 t2 = t1.contract(w, c2);   // ket, bra, w', t
  const T3 t3 = t2.contract(a, c3);   // ket, w', bra
  return t3.shuffle(Eigen::array<int, 3>{2, 1, 0});
}

/// H_eff theta for theta(left, s1, s2, right).
inline T4 apply_two_site(const T3& left, const T4& w1, const T4& w2, const T3& right, const T4& theta) {
  const Eigen::array<Pair, 1> c1{Pair(2, 0)};
  const Eigen::array<Pair, 2> c2{Pair(1, 0), Pair(2, 3)};
  const Eigen::array<Pair, 2> c3{Pair(3, 0), Pair(1, 3)};
  const Eigen::array<Pair, 2> c4{Pair(1, 2), Pair(3, 1)};
  const Eigen::Tensor<double, 5> t1 = left.contract(theta, c1);  // bra, w, s1, s2, r
  const Eigen::Tensor<double, 5> t2 = t1.contract(w1, c2);       // bra, s2, r, w', t1
  const Eigen::Tensor<double, 5> t3 = t2.contract(w2, c3);       // bra, r, t1, w'', t2
  return t3.contract(right, c4);                                 // bra, t1, t2, bra_r
}

struct Truncation {
  Eigen::MatrixXd U, Vt;
  Eigen::VectorXd s;
  double discarded = 0.0;
};

/// Keeps at most chi singular values with discarded weight <= cutoff.
inline Truncation truncated_svd(const Eigen::MatrixXd& m, int chi, double cutoff) {
  const Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double total = sv.squaredNorm();
  Eigen::Index keep = std::min<Eigen::Index>(chi, sv.size());
  double tail = sv.tail(sv.size() - keep).squaredNorm();
  while (keep > 1 && tail + sv(keep - 1) * sv(keep - 1) <= cutoff * total) {
    tail += sv(keep - 1) * sv(keep - 1);
    --keep;
  }
  Truncation t;
  t.U = svd.matrixU().leftCols(keep);
  t.Vt = svd.matrixV().leftCols(keep).transpose();
  t.s = sv.head(keep) / sv.head(keep).norm();
  t.discarded = total > 0.0 ? tail / total : 0.0;
  return t;
}

// Blocked counterparts of the contractions above. Bond sectors label the MPS
// bonds; mpo charges label the MPO bonds on either side.

inline ConstView middle_slice(const T3& t, Eigen::Index k) {
  return {t.data() + t.dimension(0) * k, t.dimension(0), t.dimension(2), Eigen::OuterStride<>(t.dimension(0) * t.dimension(1))};
}
inline View middle_slice(T3& t, Eigen::Index k) {
  return {t.data() + t.dimension(0) * k, t.dimension(0), t.dimension(2), Eigen::OuterStride<>(t.dimension(0) * t.dimension(1))};
}
inline View matrix_view(Eigen::MatrixXd& m) { return {m.data(), m.rows(), m.cols(), Eigen::OuterStride<>(m.rows())}; }
inline ConstView matrix_view(const Eigen::MatrixXd& m) {
  return {m.data(), m.rows(), m.cols(), Eigen::OuterStride<>(m.rows())};
}

// Physical indices with a nonzero W(w, w', out, in) for some out, w'.
inline bool mpo_row_used(const T4& w, Eigen::Index a, int in) {
  for (Eigen::Index b = 0; b < w.dimension(1); ++b)
    for (int o = 0; o < local_dim; ++o)
      if (w(a, b, o, in) != 0.0) return true;
  return false;
}

inline T3 grow_left_blocks(const T3& env, const T3& a, const T4& w, const Sectors& ql, const Sectors& qr,
                           const std::vector<int>& charge) {
  const Eigen::Index cl = a.dimension(0), cr = a.dimension(2);
  T3 out(cr, w.dimension(1), cr);
  out.setZero();
  Eigen::MatrixXd tmp(cl, cr);
  for (Eigen::Index x = 0; x < w.dimension(0); ++x)
    for (int s = 0; s < local_dim; ++s) {
      if (!mpo_row_used(w, x, s)) continue;
      const Charged lw{middle_slice(env, x), &ql, &ql, -charge[x]};
      block_gemm(1.0, lw, false, {middle_slice(a, s), &ql, &qr, s}, false, matrix_view(tmp), false);
      const Charged t{matrix_view(std::as_const(tmp)), &ql, &qr, s - charge[x]};
      for (Eigen::Index y = 0; y < w.dimension(1); ++y)
        for (int o = 0; o < local_dim; ++o)
          if (const double c = w(x, y, o, s); c != 0.0)
            block_gemm(c, {middle_slice(a, o), &ql, &qr, o}, true, t, false, middle_slice(out, y), true);
    }
  return out;
}

inline T3 grow_right_blocks(const T3& env, const T3& a, const T4& w, const Sectors& ql, const Sectors& qr,
                            const std::vector<int>& charge) {
  const Eigen::Index cl = a.dimension(0), cr = a.dimension(2);
  T3 out(cl, w.dimension(0), cl);
  out.setZero();
  Eigen::MatrixXd tmp(cr, cl);
  for (Eigen::Index y = 0; y < w.dimension(1); ++y)
    for (int s = 0; s < local_dim; ++s) {
      bool used = false;
      for (Eigen::Index x = 0; x < w.dimension(0) && !used; ++x)
        for (int o = 0; o < local_dim; ++o) used = used || w(x, y, o, s) != 0.0;
      if (!used) continue;
      const Charged ry{middle_slice(env, y), &qr, &qr, -charge[y]};
      block_gemm(1.0, ry, false, {middle_slice(a, s), &ql, &qr, s}, true, matrix_view(tmp), false);
      const Charged t{matrix_view(std::as_const(tmp)), &qr, &ql, -charge[y] - s};
      for (Eigen::Index x = 0; x < w.dimension(0); ++x)
        for (int o = 0; o < local_dim; ++o)
          if (const double c = w(x, y, o, s); c != 0.0)
            block_gemm(c, {middle_slice(a, o), &ql, &qr, o}, false, t, false, middle_slice(out, x), true);
    }
  return out;
}

/// H_eff on theta(left, s1, s2, right) restricted to the charge blocks.
class TwoSiteBlocks {
 public:
  TwoSiteBlocks(const T3& left, const T4& w1, const T4& w2, const T3& right, const Sectors& ql, const Sectors& qr,
                const std::vector<int>& cl, const std::vector<int>& cr)
      : left_(left), right_(right), ql_(ql), qr_(qr), cl_(cl), cr_(cr) {
    const int d = local_dim;
    for (Eigen::Index x = 0; x < w1.dimension(0); ++x)
      for (Eigen::Index z = 0; z < w2.dimension(1); ++z)
        for (int o1 = 0; o1 < d; ++o1)
          for (int o2 = 0; o2 < d; ++o2)
            for (int i1 = 0; i1 < d; ++i1)
              for (int i2 = 0; i2 < d; ++i2) {
                double c = 0.0;
                for (Eigen::Index y = 0; y < w1.dimension(1); ++y) c += w1(x, y, o1, i1) * w2(y, z, o2, i2);
                if (c != 0.0) terms_.push_back({static_cast<int>(x), i1 + d * i2, static_cast<int>(z), o1 + d * o2, c});
              }
    std::sort(terms_.begin(), terms_.end(),
              [](const Term& a, const Term& b) { return std::tie(a.z, a.out) < std::tie(b.z, b.out); });
    const auto slots = static_cast<std::size_t>(w1.dimension(0) * d * d);
    used_.assign(slots, false);
    for (const auto& t : terms_) used_[t.x * d * d + t.in] = true;
    p_.resize(slots);
    for (std::size_t k = 0; k < slots; ++k)
      if (used_[k]) p_[k].resize(ql.dim(), qr.dim());
    q_.resize(ql.dim(), qr.dim());
  }

  void apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) {
    const int d = local_dim;
    const Eigen::Index nl = ql_.dim(), nr = qr_.dim(), stride = nl * d * d;
    auto slice = [&](const double* base, int s) {
      return ConstView(base + nl * s, nl, nr, Eigen::OuterStride<>(stride));
    };
    for (std::size_t k = 0; k < p_.size(); ++k) {
      if (!used_[k]) continue;
      const int w = static_cast<int>(k) / (d * d), in = static_cast<int>(k) % (d * d);
      const Charged lw{middle_slice(left_, w), &ql_, &ql_, -cl_[w]};
      const Charged th{slice(x.data(), in), &ql_, &qr_, in % d + in / d};
      block_gemm(1.0, lw, false, th, false, matrix_view(p_[k]), false);
    }
    y.setZero(x.size());
    for (std::size_t a = 0; a < terms_.size();) {
      std::size_t b = a;
      const int z = terms_[a].z, out = terms_[a].out;
      const int shift = terms_[a].in % d + terms_[a].in / d - cl_[terms_[a].x];
      for (; b < terms_.size() && terms_[b].z == z && terms_[b].out == out; ++b) {
        const auto& t = terms_[b];
        block_axpy(t.c, {matrix_view(std::as_const(p_[t.x * d * d + t.in])), &ql_, &qr_, shift}, matrix_view(q_), b != a);
      }
      const Charged rz{middle_slice(right_, z), &qr_, &qr_, -cr_[z]};
      View dst(y.data() + nl * out, nl, nr, Eigen::OuterStride<>(stride));
      block_gemm(1.0, {matrix_view(std::as_const(q_)), &ql_, &qr_, shift}, false, rz, true, dst, true);
      a = b;
    }
  }

 private:
  struct Term {
    int x, in, z, out;
    double c;
  };
  const T3& left_;
  const T3& right_;
  const Sectors& ql_;
  const Sectors& qr_;
  const std::vector<int>& cl_;
  const std::vector<int>& cr_;
  std::vector<Term> terms_;
  std::vector<bool> used_;
  std::vector<Eigen::MatrixXd> p_;
  Eigen::MatrixXd q_;
};

/// theta(l, s1, s2, r) = A(l, s1, m) B(m, s2, r), zero outside the blocks.
inline T4 join_blocks(const T3& a, const T3& b, const Sectors& ql, const Sectors& qm, const Sectors& qr) {
  const int d = local_dim;
  const Eigen::Index nl = a.dimension(0), nr = b.dimension(2);
  T4 theta(nl, d, d, nr);
  theta.setZero();
  for (int s1 = 0; s1 < d; ++s1)
    for (int s2 = 0; s2 < d; ++s2) {
      View dst(theta.data() + nl * (s1 + d * s2), nl, nr, Eigen::OuterStride<>(nl * d * d));
      block_gemm(1.0, {middle_slice(a, s1), &ql, &qm, s1}, false, {middle_slice(b, s2), &qm, &qr, s2}, false, dst,
                 false);
    }
  return theta;
}

inline double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

/// Random state with n_up raised spins and definite bond charges (number of
/// up spins left of the bond), right-canonical with the center at site 0.
inline MPS random_sector_mps(int sites, int n_up, int per_charge, std::uint64_t seed, std::vector<Sectors>& bonds) {
  if (n_up < 0 || n_up > sites) throw invalid_argument("n_up outside [0, sites]");
  const int d = local_dim;
  bonds.assign(sites + 1, {});
  for (int b = 0; b <= sites; ++b) {
    const double mid = static_cast<double>(n_up) * b / sites;
    const int lo = std::max({0, n_up - (sites - b), static_cast<int>(std::floor(mid)) - 2});
    const int hi = std::min({b, n_up, static_cast<int>(std::ceil(mid)) + 2});
    std::vector<int> q;
    for (int c = lo; c <= hi; ++c) {
      const double cap = std::min(log_binomial(b, c), log_binomial(sites - b, n_up - c));
      const int m = static_cast<int>(std::min<double>(per_charge, std::round(std::exp(cap))));
      q.insert(q.end(), std::max(m, 1), c);
    }
    bonds[b] = Sectors(std::move(q));
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  MPS psi;
  psi.A.resize(sites);
  for (int i = 0; i < sites; ++i) {
    const auto &ql = bonds[i].q, &qr = bonds[i + 1].q;
    auto& a = psi.A[i];
    a = T3(static_cast<Eigen::Index>(ql.size()), d, static_cast<Eigen::Index>(qr.size()));
    a.setZero();
    for (Eigen::Index r = 0; r < a.dimension(2); ++r)
      for (int s = 0; s < d; ++s)
        for (Eigen::Index l = 0; l < a.dimension(0); ++l)
          if (qr[r] == ql[l] + s) a(l, s, r) = gauss(rng);
  }
  for (int i = sites - 1; i > 0; --i) {
    auto& a = psi.A[i];
    const Eigen::Index nr = a.dimension(2);
    std::vector<int> row_q = bonds[i].q, col_q(static_cast<std::size_t>(d * nr));
    for (Eigen::Index r = 0; r < nr; ++r)
      for (int s = 0; s < d; ++s) col_q[s + d * r] = bonds[i + 1].q[r] - s;
    const auto t = block_svd(right_grouped(a), row_q, col_q, std::numeric_limits<int>::max(), 0.0);
    const Eigen::Index k = t.s.size();
    a = from_matrix(t.Vt, k, d, nr);
    auto& prev = psi.A[i - 1];
    const Eigen::MatrixXd m = left_grouped(prev) * (t.U * t.s.asDiagonal());
    prev = from_matrix(m, prev.dimension(0), d, k);
    bonds[i] = Sectors(t.q);
  }
  psi.center = 0;
  normalize(psi);
  return psi;
}

}  // namespace detail

namespace detail {

inline DmrgRun sweep_until_converged(const MPO& H, const SweepConfig& cfg, std::uint64_t seed, int n_up) {
  const int L = H.length();
  if (L < 4) throw invalid_argument("DMRG needs at least four sites");
  const bool blocked = n_up >= 0;
  if (blocked && !H.conserves_sz()) throw invalid_argument("a fixed n_up needs an MPO that conserves S^z");
  DmrgRun run;
  run.seed = seed;
  run.n_up = n_up;
  MPS& psi = run.state;
  std::vector<Sectors> bonds;
  psi = blocked ? random_sector_mps(L, n_up, std::max(1, cfg.initial_bond_dim / 4), seed, bonds)
                : random_mps(L, cfg.initial_bond_dim, seed);
  const int d = local_dim;

  std::vector<T3> left(L), right(L);
  auto grow_l = [&](int i) {
    left[i + 1] = blocked ? grow_left_blocks(left[i], psi.A[i], H.W[i], bonds[i], bonds[i + 1], H.charge[i])
                          : grow_left(left[i], psi.A[i], H.W[i]);
  };
  auto grow_r = [&](int i) {
    right[i - 1] = blocked ? grow_right_blocks(right[i], psi.A[i], H.W[i], bonds[i], bonds[i + 1], H.charge[i + 1])
                           : grow_right(right[i], psi.A[i], H.W[i]);
  };
  left[0] = edge_environment(H.W[0].dimension(0), 0);
  right[L - 1] = edge_environment(H.W[L - 1].dimension(1), 1);
  for (int i = L - 1; i > 1; --i) grow_r(i);

  LanczosConfig lcfg{std::max(cfg.lanczos_tol, 1e-6), 32, 50};
  double previous = std::numeric_limits<double>::infinity();
  double energy = previous;
  long matvecs = 0;
  double sweep_discarded = 0.0;
  auto report = [&](int sweep, bool rightward) {
    run.half_sweep_energies.push_back(energy);
    if (cfg.on_half_sweep) cfg.on_half_sweep({sweep, rightward, energy, psi.max_bond_dim(), sweep_discarded, matvecs});
    sweep_discarded = 0.0;
  };

  auto optimize = [&](int i, bool moving_right) {
    T4 theta;
    if (blocked) {
      theta = join_blocks(psi.A[i], psi.A[i + 1], bonds[i], bonds[i + 1], bonds[i + 2]);
    } else {
      const Eigen::array<Pair, 1> join{Pair(2, 0)};
      theta = psi.A[i].contract(psi.A[i + 1], join);
    }
    const auto dims = theta.dimensions();
    const Eigen::Index n = theta.size();
    LanczosResult eig;
    const Eigen::Map<const Eigen::VectorXd> x0(theta.data(), n);
    if (blocked) {
      TwoSiteBlocks heff(left[i], H.W[i], H.W[i + 1], right[i + 1], bonds[i], bonds[i + 2], H.charge[i],
                         H.charge[i + 2]);
      eig = lanczos_lowest([&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { heff.apply(x, y); }, x0, lcfg);
    } else {
      auto matvec = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
        const Eigen::TensorMap<const T4> in(x.data(), dims);
        const T4 out = apply_two_site(left[i], H.W[i], H.W[i + 1], right[i + 1], T4(in));
        y = Eigen::Map<const Eigen::VectorXd>(out.data(), n);
      };
      eig = lanczos_lowest(matvec, x0, lcfg);
    }
    energy = eig.value;
    matvecs += eig.matvecs;
    const Eigen::Map<const Eigen::MatrixXd> m(eig.vector.data(), dims[0] * d, d * dims[3]);
    Eigen::MatrixXd U, Vt;
    Eigen::VectorXd s;
    double discarded = 0.0;
    if (blocked) {
      std::vector<int> row_q(static_cast<std::size_t>(m.rows())), col_q(static_cast<std::size_t>(m.cols()));
      for (Eigen::Index a = 0; a < dims[0]; ++a)
        for (int t = 0; t < d; ++t) row_q[a + dims[0] * t] = bonds[i].q[a] + t;
      for (Eigen::Index b = 0; b < dims[3]; ++b)
        for (int t = 0; t < d; ++t) col_q[t + d * b] = bonds[i + 2].q[b] - t;
      auto t = block_svd(m, row_q, col_q, cfg.chi_max, cfg.svd_cutoff);
      U = std::move(t.U);
      Vt = std::move(t.Vt);
      s = std::move(t.s);
      discarded = t.discarded;
      bonds[i + 1] = Sectors(std::move(t.q));
    } else {
      auto t = truncated_svd(m, cfg.chi_max, cfg.svd_cutoff);
      U = std::move(t.U);
      Vt = std::move(t.Vt);
      s = std::move(t.s);
      discarded = t.discarded;
    }
    run.max_discarded_weight = std::max(run.max_discarded_weight, discarded);
    sweep_discarded = std::max(sweep_discarded, discarded);
    const Eigen::Index k = s.size();
    if (moving_right) {
      psi.A[i] = from_matrix(U, dims[0], d, k);
      psi.A[i + 1] = from_matrix(s.asDiagonal() * Vt, k, d, dims[3]);
      psi.center = i + 1;
      grow_l(i);
    } else {
      psi.A[i] = from_matrix(U * s.asDiagonal(), dims[0], d, k);
      psi.A[i + 1] = from_matrix(Vt, k, d, dims[3]);
      psi.center = i;
      grow_r(i + 1);
    }
  };

  for (int sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
    for (int i = 0; i + 1 < L; ++i) optimize(i, true);
    report(sweep, true);
    for (int i = L - 2; i >= 0; --i) optimize(i, false);
    report(sweep, false);
    run.max_canonical_residual = std::max(run.max_canonical_residual, canonical_residual(psi));
    run.sweeps = sweep;
    run.last_delta = std::abs(energy - previous);
    run.energy = energy;
    if (run.last_delta < cfg.energy_tol * std::max(1.0, std::abs(energy))) {
      run.converged = true;
      return run;
    }
    previous = energy;
    // Residual r moves the energy by O(r^2).
    lcfg.tol = std::max(cfg.lanczos_tol, std::min(1e-6, 1e-2 * std::sqrt(run.last_delta)));
  }
  return run;
}

}  // namespace detail

/// <psi|O|psi> for a normalized state.
inline double mpo_expectation(const MPO& O, const MPS& psi) {
  if (O.length() != psi.length()) throw invalid_argument("MPO and MPS lengths differ");
  detail::T3 env = detail::edge_environment(O.W[0].dimension(0), 0);
  for (int i = 0; i < psi.length(); ++i) env = detail::grow_left(env, psi.A[i], O.W[i]);
  return env(0, 1, 0);
}

/// One DMRG run from a random state with the given seed; n_up >= 0 fixes the
/// number of up spins and blocks every tensor by S^z.
inline DmrgRun dmrg_run(const MPO& H, const SweepConfig& cfg, std::uint64_t seed, int n_up = -1) {
  cfg.validate();
  auto run = detail::sweep_until_converged(H, cfg, seed, n_up);
  if (!run.converged) throw dmrg_not_converged(run.last_delta, "DMRG did not converge within max_sweeps");
  return run;
}

/// Up-spin count of a cheap unblocked run, rounded.
inline int estimate_n_up(const MPO& H, const SweepConfig& cfg) {
  SweepConfig probe = cfg;
  probe.chi_max = std::min(cfg.chi_max, 32);
  probe.max_sweeps = 4;
  probe.energy_tol = 1e-6;
  const auto run = detail::sweep_until_converged(H, probe, cfg.seed, -1);
  const int L = H.length();
  std::vector<OperatorString> sz;
  for (int i = 0; i < L; ++i) sz.push_back({1.0, {{i, LocalOp::Sz}}});
  const double up = mpo_expectation(compile_mpo(sz, L), run.state) + 0.5 * L;
  return std::clamp(static_cast<int>(std::lround(up)), 0, L);
}

/// Lowest of cfg.seeds independent runs. With S^z blocking the sector is
/// cfg.n_up if set; otherwise the search starts at estimate_n_up and walks
/// to neighbouring sectors while the energy drops. Only the chosen sector has
/// to converge: a neighbour whose unconverged energy is already higher is
/// rejected.
inline DmrgResult dmrg_ground(const MPO& H, const SweepConfig& cfg = {}) {
  cfg.validate();
  auto in_sector = [&](int n_up) {
    DmrgResult out;
    bool have = false;
    for (int k = 0; k < cfg.seeds; ++k) {
      auto run = detail::sweep_until_converged(H, cfg, cfg.seed + static_cast<std::uint64_t>(k), n_up);
      out.seed_energies.push_back(run.energy);
      if (!have || run.energy < out.best.energy) {
        out.best = std::move(run);
        have = true;
      }
    }
    out.energy = out.best.energy;
    out.n_up = n_up;
    return out;
  };
  auto finish = [](DmrgResult out) {
    if (!out.best.converged) throw dmrg_not_converged(out.best.last_delta, "DMRG did not converge within max_sweeps");
    out.state = out.best.state;
    return out;
  };
  if (!cfg.conserve_sz || !H.conserves_sz()) return finish(in_sector(-1));
  if (cfg.n_up > H.length()) throw invalid_argument("n_up exceeds the number of sites");
  if (cfg.n_up >= 0) {
    auto out = in_sector(cfg.n_up);
    out.sector_energies = {{cfg.n_up, out.energy}};
    return finish(std::move(out));
  }
  std::map<int, DmrgResult> tried;
  auto energy_at = [&](int n) {
    auto it = tried.find(n);
    if (it == tried.end()) it = tried.emplace(n, in_sector(n)).first;
    return it->second.energy;
  };
  int best = estimate_n_up(H, cfg);
  for (int step : {1, -1})
    for (int n = best + step; n >= 0 && n <= H.length() && energy_at(n) < energy_at(best); n += step) best = n;
  std::vector<std::pair<int, double>> sectors;
  for (const auto& [n, r] : tried) sectors.emplace_back(n, r.energy);
  DmrgResult out = std::move(tried.at(best));
  out.sector_energies = std::move(sectors);
  return finish(std::move(out));
}

inline MPO hamiltonian_mpo(const GeneralCouplings& g, int cells) {
  return compile_mpo(spin_hamiltonian(g, cells, Boundary::open), 2 * cells);
}

inline MPO hamiltonian_mpo(const ReducedParams& p) {
  p.validate();
  return hamiltonian_mpo(p.to_general(), p.N);
}

}  // namespace multispin
