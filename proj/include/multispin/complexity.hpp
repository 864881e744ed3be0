#pragma once

// Nielsen complexity (static and after sudden quenches), Loschmidt echo and
// a per-mode engine for piecewise-constant field protocols.

#include <algorithm>
#include <cmath>
#include <complex>
#include <iterator>
#include <utility>
#include <vector>

#include "multispin/errors.hpp"
#include "multispin/model.hpp"

namespace multispin {

// ---------------------------------------------------------------------------
// Static complexity

enum class ModeRange {
  occupied,  // modes holding one quasiparticle in both reference and target
  full_grid,
};

namespace detail {

inline std::vector<std::size_t> nc_modes(const ReducedParams& ref, const ReducedParams& tgt, ModeRange range) {
  const ModeGrid grid(tgt.N);
  std::vector<std::size_t> out;
  if (range == ModeRange::full_grid) {
    for (std::size_t i = 0; i < grid.size(); ++i) out.push_back(i);
    return out;
  }
  const auto a = classify(ref).singly_occupied(grid.size());
  const auto b = classify(tgt).singly_occupied(grid.size());
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline void check_same_grid(const ReducedParams& ref, const ReducedParams& tgt) {
  ref.validate();
  tgt.validate();
  if (ref.N != tgt.N) throw invalid_argument("reference and target need the same N");
}

}  // namespace detail

/// C_N = sum_k ((theta_k^T - theta_k^R) / 2)^2.
inline double static_nc(const ReducedParams& ref, const ReducedParams& tgt, ModeRange range = ModeRange::occupied) {
  detail::check_same_grid(ref, tgt);
  const ModeGrid grid(tgt.N);
  double c = 0.0;
  for (auto i : detail::nc_modes(ref, tgt, range)) {
    const double d = 0.5 * (dispersion(tgt, grid.k[i]).theta - dispersion(ref, grid.k[i]).theta);
    c += d * d;
  }
  return c;
}

/// dC_N / dh^T at fixed mode set.
inline double static_nc_dh(const ReducedParams& ref, const ReducedParams& tgt, ModeRange range = ModeRange::occupied) {
  detail::check_same_grid(ref, tgt);
  const ModeGrid grid(tgt.N);
  double c = 0.0;
  for (auto i : detail::nc_modes(ref, tgt, range)) {
    const double k = grid.k[i];
    const double d = 0.5 * (dispersion(tgt, k).theta - dispersion(ref, k).theta);
    c += d * theta_gradient(tgt, k).d_h;
  }
  return c;
}

// ---------------------------------------------------------------------------
// Single sudden quench h -> h + delta

/// Omega_k = [theta_k(h) - theta_k(h + delta)] / 2 on the grid.
inline std::vector<double> quench_angles(const ReducedParams& p, double delta) {
  p.validate();
  const ModeGrid grid(p.N);
  std::vector<double> out;
  out.reserve(grid.size());
  const auto q = p.with_h(p.h + delta);
  for (double k : grid.k) out.push_back(0.5 * (dispersion(p, k).theta - dispersion(q, k).theta));
  return out;
}

struct NCRecord {
  double t = 0.0;
  double C_N = 0.0;
  double L = 1.0;
};

namespace detail {

/// s_k = sin^2(2 Omega_k) sin^2(Lambda_k(h + delta) t) over the modes whose
/// initial state holds one quasiparticle.
inline std::vector<double> quench_s(const ReducedParams& p, double delta, double t) {
  if (t < 0.0) throw invalid_argument("time must be nonnegative");
  p.validate();
  const ModeGrid grid(p.N);
  const auto q = p.with_h(p.h + delta);
  std::vector<double> s;
  for (auto i : classify(p).singly_occupied(grid.size())) {
    const double k = grid.k[i];
    const double omega = 0.5 * (dispersion(p, k).theta - dispersion(q, k).theta);
    const double a = std::sin(2.0 * omega), b = std::sin(dispersion(q, k).Lambda * t);
    s.push_back(a * a * b * b);
  }
  return s;
}

}  // namespace detail

/// C_N(t) = sum_k arccos^2 sqrt(1 - s_k), evaluated as arcsin^2 sqrt(s_k).
inline double nc_of_t(const ReducedParams& p, double delta, double t) {
  double c = 0.0;
  for (double s : detail::quench_s(p, delta, t)) {
    const double phi = std::asin(std::sqrt(std::clamp(s, 0.0, 1.0)));
    c += phi * phi;
  }
  return c;
}

/// L(t) = prod_k (1 - s_k).
inline double loschmidt(const ReducedParams& p, double delta, double t) {
  double l = 1.0;
  for (double s : detail::quench_s(p, delta, t)) l *= 1.0 - s;
  return l;
}

/// Computable bound sum_k s_k^2 on |-ln L - C_N|.
inline double le_nc_bound(const ReducedParams& p, double delta, double t) {
  double b = 0.0;
  for (double s : detail::quench_s(p, delta, t)) b += s * s;
  return b;
}

// ---------------------------------------------------------------------------
// Piecewise-constant protocols

struct QuenchSegment {
  double delta = 0.0;
  double duration = 0.0;
};

/// Field h(t) = base.h + delta_i on consecutive segments; the last segment
/// extends to infinity.
struct QuenchProtocol {
  ReducedParams base;
  std::vector<QuenchSegment> segments;

  void validate() const {
    if (segments.empty()) throw invalid_argument("protocol needs at least one segment");
    for (const auto& s : segments)
      if (!(s.duration >= 0.0) || !std::isfinite(s.delta)) throw invalid_argument("segment durations must be >= 0");
  }
};

/// Amplitudes of one mode: amp1 on the lower orbital, amp2 on the upper
/// orbital of the current segment's Bloch Hamiltonian.
struct ModeState {
  double k = 0.0;
  std::complex<double> amp1{1.0, 0.0};
  std::complex<double> amp2{0.0, 0.0};
  double theta = 0.0;  // frame angle of the current basis
};

/// Mode data of the alternating chain.  Modes are the singly occupied ones
/// of the initial ground state.
struct FourSpinSpectrum {
  double J = 1.0;
  double J3 = 0.0;
  int N = 51;

  double theta(double h, double k) const { return dispersion({h, J, J3, N}, k).theta; }
  std::pair<double, double> energies(double h, double k) const {
    const auto q = dispersion({h, J, J3, N}, k);
    return {q.E1, q.E2};
  }
  std::vector<double> modes(double h0) const {
    const ReducedParams p{h0, J, J3, N};
    const ModeGrid grid(N);
    std::vector<double> ks;
    for (auto i : classify(p).singly_occupied(grid.size())) ks.push_back(grid.k[i]);
    return ks;
  }
};

/// Transverse-field XY chain, one two-level system per pair (k, -k) with
/// 0 < k < pi.  cos theta_k = (h - cos k)/eps_k, energies -/+ eps_k.
struct XYSpectrum {
  double gamma = 1.0;
  int N = 101;

  static double eps(double h, double gamma, double k) { return std::hypot(h - std::cos(k), gamma * std::sin(k)); }

  double theta(double h, double k) const {
    const double e = eps(h, gamma, k);
    if (e < zero_energy_tolerance) throw invalid_argument("XY mode is gapless at this field and momentum");
    return std::atan2(gamma * std::sin(k), h - std::cos(k));
  }
  std::pair<double, double> energies(double h, double k) const {
    const double e = eps(h, gamma, k);
    return {-e, e};
  }
  std::vector<double> modes(double) const {
    std::vector<double> ks;
    for (int l = 1; 2 * l < N; ++l) ks.push_back(2.0 * pi * l / N);
    return ks;
  }
};

/// XY Bogoliubov angle; throws when the mode is gapless.
inline double xy_mode_angle(double h, double gamma, double k) {
  if (std::abs(gamma) > 1.0) throw invalid_argument("|gamma| must not exceed 1");
  return XYSpectrum{gamma, 1}.theta(h, k);
}

namespace detail {

/// Express the state in the frame of angle theta_new.
inline void change_frame(ModeState& m, double theta_new) {
  const double om = 0.5 * (m.theta - theta_new);
  const double c = std::cos(om), s = std::sin(om);
  const auto a1 = c * m.amp1 - s * m.amp2;
  const auto a2 = s * m.amp1 + c * m.amp2;
  m.amp1 = a1;
  m.amp2 = a2;
  m.theta = theta_new;
}

inline void apply_phases(ModeState& m, double e1, double e2, double tau) {
  m.amp1 *= std::polar(1.0, -e1 * tau);
  m.amp2 *= std::polar(1.0, -e2 * tau);
}

/// |<ground(theta0)|psi>| and the angle arccos of it, the latter through
/// atan2 to stay accurate near zero.
inline std::pair<double, double> overlap_with_reference(const ModeState& m, double theta0) {
  ModeState r = m;
  change_frame(r, theta0);
  const double a = std::abs(r.amp1), b = std::abs(r.amp2);
  return {std::min(1.0, a), std::atan2(b, a)};
}

}  // namespace detail

struct EvolveResult {
  std::vector<ModeState> modes;
  NCRecord record;
};

/// Per-mode evolution through the protocol up to time t.  Starts in the
/// ground state of the base field; C_N = sum_k arccos^2 |<psi_k(0)|psi_k(t)>|
/// and L = prod_k |<psi_k(0)|psi_k(t)>|^2.
template <class Spectrum>
EvolveResult evolve(const Spectrum& spec, const QuenchProtocol& protocol, double t) {
  protocol.validate();
  if (t < 0.0) throw invalid_argument("time must be nonnegative");
  const double h0 = protocol.base.h;
  EvolveResult out;
  out.record.t = t;
  for (double k : spec.modes(h0)) {
    const double theta0 = spec.theta(h0, k);
    ModeState m{k, {1.0, 0.0}, {0.0, 0.0}, theta0};
    double remaining = t;
    for (std::size_t i = 0; i < protocol.segments.size() && remaining > 0.0; ++i) {
      const auto& seg = protocol.segments[i];
      const bool last = i + 1 == protocol.segments.size();
      const double tau = last ? remaining : std::min(remaining, seg.duration);
      const double h = h0 + seg.delta;
      detail::change_frame(m, spec.theta(h, k));
      const auto [e1, e2] = spec.energies(h, k);
      detail::apply_phases(m, e1, e2, tau);
      remaining -= tau;
    }
    const auto [ov, phi] = detail::overlap_with_reference(m, theta0);
    out.record.C_N += phi * phi;
    out.record.L *= ov * ov;
    out.modes.push_back(m);
  }
  return out;
}

/// Evaluates evolve() on a sorted time grid, advancing each mode
/// incrementally instead of restarting from t = 0.
template <class Spectrum>
std::vector<NCRecord> evolve_series(const Spectrum& spec, const QuenchProtocol& protocol,
                                    const std::vector<double>& times) {
  protocol.validate();
  if (!std::is_sorted(times.begin(), times.end()) || (!times.empty() && times.front() < 0.0))
    throw invalid_argument("times must be sorted and nonnegative");
  const double h0 = protocol.base.h;
  std::vector<NCRecord> out(times.size());
  for (std::size_t j = 0; j < times.size(); ++j) out[j].t = times[j];

  // Segment boundaries.
  std::vector<double> starts{0.0};
  for (std::size_t i = 0; i + 1 < protocol.segments.size(); ++i) starts.push_back(starts.back() + protocol.segments[i].duration);

  for (double k : spec.modes(h0)) {
    const double theta0 = spec.theta(h0, k);
    std::vector<double> theta_seg, e1_seg, e2_seg;
    for (const auto& seg : protocol.segments) {
      theta_seg.push_back(spec.theta(h0 + seg.delta, k));
      const auto [a, b] = spec.energies(h0 + seg.delta, k);
      e1_seg.push_back(a);
      e2_seg.push_back(b);
    }
    ModeState seg_start{k, {1.0, 0.0}, {0.0, 0.0}, theta0};
    std::size_t seg = 0;
    detail::change_frame(seg_start, theta_seg[0]);
    for (std::size_t j = 0; j < times.size(); ++j) {
      const double t = times[j];
      while (seg + 1 < protocol.segments.size() && t > starts[seg + 1]) {
        detail::apply_phases(seg_start, e1_seg[seg], e2_seg[seg], protocol.segments[seg].duration);
        ++seg;
        detail::change_frame(seg_start, theta_seg[seg]);
      }
      ModeState m = seg_start;
      detail::apply_phases(m, e1_seg[seg], e2_seg[seg], t - starts[seg]);
      const auto [ov, phi] = detail::overlap_with_reference(m, theta0);
      out[j].C_N += phi * phi;
      out[j].L *= ov * ov;
    }
  }
  return out;
}

/// Alternating (delta, T) and (0, T) segments, n_cycles times, then delta
/// held for all later times.
inline QuenchProtocol multi_quench_protocol(const ReducedParams& base, double delta, double T, int n_cycles) {
  if (n_cycles < 1) throw invalid_argument("n_cycles must be >= 1");
  if (!(T > 0.0)) throw invalid_argument("quench period T must be positive");
  QuenchProtocol p{base, {}};
  for (int i = 0; i < n_cycles; ++i) {
    p.segments.push_back({delta, T});
    p.segments.push_back({0.0, T});
  }
  p.segments.push_back({delta, 0.0});
  return p;
}

/// C_N(t), L(t) on t = 0, dt, ..., t_max for the alternating protocol.
template <class Spectrum>
std::vector<NCRecord> multi_quench_scan(const Spectrum& spec, const ReducedParams& base, double delta, double T,
                                        int n_cycles, double t_max, double dt = 0.05) {
  if (!(dt > 0.0) || !(t_max >= 0.0)) throw invalid_argument("need dt > 0 and t_max >= 0");
  const auto protocol = multi_quench_protocol(base, delta, T, n_cycles);
  std::vector<double> times;
  const auto n = static_cast<std::size_t>(std::floor(t_max / dt + 1e-9));
  for (std::size_t i = 0; i <= n; ++i) times.push_back(static_cast<double>(i) * dt);
  return evolve_series(spec, protocol, times);
}

}  // namespace multispin
