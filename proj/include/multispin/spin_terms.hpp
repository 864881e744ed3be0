#pragma once

// Spin-1/2 operator strings and the two-sublattice Hamiltonian written as a
// sum of real strings.

#include <algorithm>
#include <string_view>
#include <utility>
#include <vector>

#include "multispin/errors.hpp"
#include "multispin/model.hpp"

namespace multispin {

enum class Boundary { open, periodic };

enum class LocalOp { Id, Sx, Sy, Sz, Sp, Sm };

inline std::string_view to_string(LocalOp op) {
  switch (op) {
    case LocalOp::Id: return "Id";
    case LocalOp::Sx: return "Sx";
    case LocalOp::Sy: return "Sy";
    case LocalOp::Sz: return "Sz";
    case LocalOp::Sp: return "S+";
    case LocalOp::Sm: return "S-";
  }
  return "?";
}

/// coefficient * prod_f op_f(site_f); sites are absolute chain indices,
/// strictly increasing.
struct OperatorString {
  double coefficient = 0.0;
  std::vector<std::pair<int, LocalOp>> factors;

  int first_site() const { return factors.front().first; }
  int last_site() const { return factors.back().first; }
  int span() const { return factors.empty() ? 0 : last_site() - first_site() + 1; }
};

namespace detail {

inline OperatorString make_string(double c, std::vector<std::pair<int, LocalOp>> f) {
  std::sort(f.begin(), f.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < f.size(); ++i)
    if (f[i].first == f[i - 1].first) throw invalid_argument("operator string repeats a site");
  return {c, std::move(f)};
}

}  // namespace detail

/// c * (Sx_a Z Sx_b + Sy_a Z Sy_b) with Z = prod Sz over `middle`, rewritten
/// as c/2 * (S+_a Z S-_b + S-_a Z S+_b).
inline void append_xy(std::vector<OperatorString>& out, double c, int a, const std::vector<int>& middle, int b) {
  if (c == 0.0) return;
  for (auto [oa, ob] : {std::pair{LocalOp::Sp, LocalOp::Sm}, std::pair{LocalOp::Sm, LocalOp::Sp}}) {
    std::vector<std::pair<int, LocalOp>> f{{a, oa}, {b, ob}};
    for (int m : middle) f.emplace_back(m, LocalOp::Sz);
    out.push_back(detail::make_string(0.5 * c, std::move(f)));
  }
}

/// Site 2n holds sublattice 1 of cell n, site 2n+1 sublattice 2.  On a
/// periodic chain `twist` multiplies every string crossing the last cell.
inline std::vector<OperatorString> spin_hamiltonian(const GeneralCouplings& g, int cells,
                                                    Boundary boundary = Boundary::open, int twist = 1) {
  g.validate();
  if (cells < 1) throw invalid_argument("need at least one cell");
  if (boundary == Boundary::periodic && cells < 2)
    throw invalid_argument("periodic chains need at least two cells");
  if (twist != 1 && twist != -1) throw invalid_argument("twist must be +1 or -1");
  const int L = 2 * cells;
  std::vector<OperatorString> out;
  for (int n = 0; n < cells; ++n) {
    const int s1 = 2 * n, s2 = 2 * n + 1;
    if (g.H * g.mu1 != 0.0) out.push_back({-g.H * g.mu1, {{s1, LocalOp::Sz}}});
    if (g.H * g.mu2 != 0.0) out.push_back({-g.H * g.mu2, {{s2, LocalOp::Sz}}});
    append_xy(out, -g.J1, s1, {}, s2);
    const bool wraps = n + 1 == cells;
    if (wraps && boundary == Boundary::open) continue;
    const int t1 = (s1 + 2) % L, t2 = (s2 + 2) % L;
    const double sign = wraps ? twist : 1.0;
    append_xy(out, -sign * g.J2, s2, {}, t1);
    append_xy(out, -sign * g.J13, s1, {s2}, t1);
    append_xy(out, -sign * g.J23, s2, {t1}, t2);
    append_xy(out, -sign * g.J14, s1, {s2, t1}, t2);
  }
  return out;
}

inline std::vector<OperatorString> spin_hamiltonian(const ReducedParams& p, Boundary boundary = Boundary::open,
                                                    int twist = 1) {
  p.validate();
  return spin_hamiltonian(p.to_general(), p.N, boundary, twist);
}

}  // namespace multispin
