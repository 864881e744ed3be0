// multispin: scans of the alternating spin chain written as CSV.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "multispin/complexity.hpp"
#include "multispin/csv.hpp"
#include "multispin/dmrg.hpp"
#include "multispin/info_geometry.hpp"
#include "multispin/model.hpp"
#include "multispin/parallel.hpp"
#include "multispin/real_space.hpp"

namespace ms = multispin;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_usage = 2;
constexpr int exit_numerical = 3;

/// Options of one subcommand, echoed into the CSV header in declaration order.
class Params {
 public:
  explicit Params(CLI::App* app) : app_(app) {}

  template <class T>
  CLI::Option* add(const std::string& name, T& ref, const std::string& help) {
    echo_.emplace_back(name, [&ref] { return show(ref); });
    return app_->add_option("--" + name, ref, help)->capture_default_str();
  }

  std::vector<std::pair<std::string, std::string>> echo() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [k, f] : echo_) out.emplace_back(k, f());
    return out;
  }

 private:
  static std::string show(double x) { return ms::format_number(x); }
  static std::string show(int x) { return std::to_string(x); }
  static std::string show(bool x) { return x ? "true" : "false"; }
  static std::string show(const std::string& x) { return x; }

  CLI::App* app_;
  std::vector<std::pair<std::string, std::function<std::string()>>> echo_;
};

struct Axis {
  double min = 0.0, max = 1.0, step = 0.01;

  std::vector<double> points(const std::string& name) const {
    if (!(step > 0.0)) throw ms::invalid_argument(name + " step must be > 0");
    if (!(min < max)) throw ms::invalid_argument(name + " min must be < max");
    const auto n = static_cast<long long>(std::floor((max - min) / step + 1e-9));
    std::vector<double> out;
    for (long long i = 0; i <= n; ++i) out.push_back(min + static_cast<double>(i) * step);
    return out;
  }
};

struct Command {
  CLI::App* app = nullptr;
  std::unique_ptr<Params> params;
  std::function<ms::CsvTable()> run;
};

using Row = std::vector<ms::CsvCell>;

std::vector<Row> scan(const std::vector<double>& xs, const std::function<Row(double)>& f) {
  return ms::parallel_map(xs.size(), [&](std::size_t i) { return f(xs[i]); });
}

ms::ModeRange parse_range(const std::string& s) {
  if (s == "occupied") return ms::ModeRange::occupied;
  if (s == "full") return ms::ModeRange::full_grid;
  throw ms::invalid_argument("--range must be occupied or full");
}

struct ChainModel {
  std::string model = "four-spin";
  double h = 0.25, J = 1.0;         // four-spin
  double H = 0.0, J1 = 1.2, J2 = 0.8;  // three-spin
  int cells = 51;

  void add(Params& p) {
    p.add("model", model, "four-spin or three-spin");
    p.add("h", h, "field (four-spin model)");
    p.add("J", J, "intra-cell coupling (four-spin model)");
    p.add("H", H, "field (three-spin model)");
    p.add("J1", J1, "intra-cell coupling (three-spin model)");
    p.add("J2", J2, "inter-cell coupling (three-spin model)");
    p.add("cells", cells, "number of two-site cells");
  }
  ms::GeneralCouplings at(double J3) const {
    if (model == "four-spin") return ms::ReducedParams{h, J, J3, cells}.to_general();
    if (model == "three-spin") return ms::GeneralCouplings::three_spin(H, J1, J2, J3);
    throw ms::invalid_argument("--model must be four-spin or three-spin");
  }
};

// ---------------------------------------------------------------------------

void add_phase_diagram(CLI::App& root, std::map<std::string, Command>& cmds) {
  auto& c = cmds["phase-diagram"];
  c.app = root.add_subcommand("phase-diagram", "critical lines h1, h2, h3, h13 versus J3, or a region grid");
  c.params = std::make_unique<Params>(c.app);
  auto J = std::make_shared<double>(1.0);
  auto j3 = std::make_shared<Axis>(Axis{0.0, 3.0, 0.01});
  auto hx = std::make_shared<Axis>(Axis{-1.0, 6.0, 0.0});
  c.params->add("J", *J, "intra-cell coupling");
  c.params->add("J3-min", j3->min, "");
  c.params->add("J3-max", j3->max, "");
  c.params->add("step", j3->step, "J3 step");
  c.params->add("h-min", hx->min, "grid mode only");
  c.params->add("h-max", hx->max, "grid mode only");
  c.params->add("h-step", hx->step, "> 0 selects region-grid output");
  c.run = [=] {
    ms::CsvTable t;
    const auto xs = j3->points("J3");
    if (hx->step > 0.0) {
      const auto hs = hx->points("h");
      t.columns = {"J3", "h", "region"};
      for (double x : xs)
        for (double h : hs) t.rows.push_back({x, h, std::string(ms::to_string(ms::classify_thermodynamic(h, *J, x)))});
      return t;
    }
    t.columns = {"J3", "h1", "h2", "h3", "h13", "k_m"};
    t.rows = scan(xs, [&](double x) -> Row {
      const auto c = ms::critical_fields(*J, x);
      return {x, c.h1, c.h2, c.h3, c.h13, c.k_m};
    });
    return t;
  };
}

void add_dispersion(CLI::App& root, std::map<std::string, Command>& cmds) {
  auto& c = cmds["dispersion"];
  c.app = root.add_subcommand("dispersion", "quasiparticle bands on the momentum grid");
  c.params = std::make_unique<Params>(c.app);
  auto p = std::make_shared<ms::ReducedParams>(ms::ReducedParams{0.5, 1.0, 0.2, 51});
  c.params->add("h", p->h, "field");
  c.params->add("J", p->J, "intra-cell coupling");
  c.params->add("J3", p->J3, "three-spin coupling");
  c.params->add("N", p->N, "cells");
  c.run = [=] {
    p->validate();
    ms::CsvTable t;
    t.columns = {"lambda", "k", "E1", "E2", "Lambda", "theta"};
    const ms::ModeGrid grid(p->N);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto q = ms::dispersion(*p, grid.k[i]);
      t.rows.push_back({static_cast<long long>(grid.lambda[i]), q.k, q.E1, q.E2, q.Lambda, q.theta});
    }
    return t;
  };
}

void add_metric(CLI::App& root, std::map<std::string, Command>& cmds) {
  auto& c = cmds["metric"];
  c.app = root.add_subcommand("metric", "information metric components along h at fixed J3");
  c.params = std::make_unique<Params>(c.app);
  auto p = std::make_shared<ms::ReducedParams>(ms::ReducedParams{0.0, 1.0, 0.5, 51});
  auto ax = std::make_shared<Axis>(Axis{0.2, 1.1, 0.005});
  auto kind = std::make_shared<std::string>("finite");
  c.params->add("J", p->J, "intra-cell coupling");
  c.params->add("J3", p->J3, "three-spin coupling");
  c.params->add("N", p->N, "cells");
  c.params->add("h-min", ax->min, "");
  c.params->add("h-max", ax->max, "");
  c.params->add("step", ax->step, "h step");
  c.params->add("kind", *kind, "finite (sum over modes) or thermo (per cell, N -> infinity)");
  c.run = [=] {
    p->validate();
    if (*kind != "finite" && *kind != "thermo") throw ms::invalid_argument("--kind must be finite or thermo");
    ms::CsvTable t;
    t.columns = {"h", "J3", "g_hh", "g_hJ3", "g_J3J3", "det"};
    t.rows = scan(ax->points("h"), [&](double h) -> Row {
      const auto g = *kind == "finite" ? ms::qim(p->with_h(h)) : ms::qim_thermo(h, p->J3, p->J);
      return {h, p->J3, g.g_hh, g.g_hJ3, g.g_J3J3, g.det()};
    });
    return t;
  };
}

void add_ricci(CLI::App& root, std::map<std::string, Command>& cmds) {
  auto& c = cmds["ricci"];
  c.app = root.add_subcommand("ricci", "Ricci scalar of the information metric along h at fixed J3");
  c.params = std::make_unique<Params>(c.app);
  auto p = std::make_shared<ms::ReducedParams>(ms::ReducedParams{0.0, 1.0, 0.5, 1001});
  auto ax = std::make_shared<Axis>(Axis{0.2, 1.1, 0.005});
  auto metric = std::make_shared<std::string>("finite");
  auto fd = std::make_shared<double>(1e-4);
  auto skip = std::make_shared<bool>(false);
  c.params->add("J", p->J, "intra-cell coupling");
  c.params->add("J3", p->J3, "three-spin coupling");
  c.params->add("N", p->N, "cells");
  c.params->add("h-min", ax->min, "");
  c.params->add("h-max", ax->max, "");
  c.params->add("step", ax->step, "h step");
  c.params->add("metric", *metric, "finite (frozen occupation) or continuum (thermodynamic metric times N)");
  c.params->add("fd-step", *fd, "finite-difference step");
  c.params->add("skip-degenerate", *skip, "write nan where the metric is degenerate instead of failing");
  c.run = [=] {
    p->validate();
    if (*metric != "finite" && *metric != "continuum") throw ms::invalid_argument("--metric must be finite or continuum");
    ms::CsvTable t;
    t.columns = {"h", "R"};
    t.rows = scan(ax->points("h"), [&](double h) -> Row {
      try {
        const double R = *metric == "finite"
                             ? ms::ricci(ms::FiniteSizeMetric{p->J, p->N, false}, h, p->J3, *fd)
                             : ms::ricci(ms::ContinuumMetric{p->J, static_cast<double>(p->N)}, h, p->J3, *fd);
        return {h, R};
      } catch (const ms::curvature_undefined&) {
        if (!*skip) throw;
        return {h, std::nan("")};
      }
    });
    return t;
  };
}

struct GeodesicArgs {
  double h0 = 1.0, J30 = 1.0, J3dot0 = 0.04, J = 1.0, dtau = 1e-4, fd_step = 1e-5;
  int N = 51, steps = 200000;
  bool renormalize = true;

  void add(Params& p) {
    p.add("h0", h0, "initial h");
    p.add("J30", J30, "initial J3");
    p.add("J3dot0", J3dot0, "initial dJ3/dtau; dh/dtau follows from unit norm");
    p.add("J", J, "intra-cell coupling");
    p.add("N", N, "cells (metric per cell)");
    p.add("steps", steps, "RK4 steps");
    p.add("dtau", dtau, "RK4 step");
    p.add("fd-step", fd_step, "finite-difference step for Christoffel symbols");
    p.add("renormalize", renormalize, "restore unit speed where the occupation changes");
  }
  ms::GeodesicResult run() const {
    const ms::FiniteSizeMetric f{J, N, true};
    const auto s = ms::normalized_start(f, h0, J30, J3dot0);
    return ms::geodesic(f, s, steps, dtau, {-10.0, 10.0, 0.0, 10.0}, fd_step, renormalize);
  }
};

std::string stop_name(ms::GeodesicStop s) {
  switch (s) {
    case ms::GeodesicStop::completed: return "completed";
    case ms::GeodesicStop::left_domain: return "left_domain";
    case ms::GeodesicStop::degenerate_metric: return "degenerate_metric";
  }
  return "?";
}

void add_geodesic(CLI::App& root, std::map<std::string, Command>& cmds) {
  auto& c = cmds["geodesic"];
  c.app = root.add_subcommand("geodesic", "unit-speed geodesic of the per-cell metric");
  c.params = std::make_unique<Params>(c.app);
  auto g = std::make_shared<GeodesicArgs>();
  auto every = std::make_shared<int>(100);
  g->add(*c.params);
  c.params->add("every", *every, "write every n-th step");
  c.run = [=] {
    if (*every < 1) throw ms::invalid_argument("--every must be >= 1");
    const auto r = g->run();
    ms::CsvTable t;
    t.columns = {"tau", "h", "J3", "dh", "dJ3", "h1", "dC_dh", "stop"};
    const auto& tr = r.trajectory;
    for (std::size_t i = 0; i < tr.size(); ++i) {
      if (i % static_cast<std::size_t>(*every) != 0 && i + 1 != tr.size()) continue;
      const auto& s = tr[i];
      t.rows.push_back({s.tau, s.h, s.J3, s.dh, s.dJ3, ms::critical_fields(g->J, s.J3).h1, 1.0 / std::abs(s.dh),
                        i + 1 == tr.size() ? stop_name(r.stop) : std::string("running")});
    }
    return t;
  };
}

void add_fsc(CLI::App& root, std::map<std::string, Command>& cmds) {
  auto& c = cmds["fsc"];
  c.app = root.add_subcommand("fsc", "Fubini-Study complexity and dC/dh along the geodesic at target h values");
  c.params = std::make_unique<Params>(c.app);
  auto g = std::make_shared<GeodesicArgs>();
  auto ax = std::make_shared<Axis>(Axis{1.0, 3.05, 0.05});
  g->add(*c.params);
  c.params->add("h-min", ax->min, "first target h");
  c.params->add("h-max", ax->max, "last target h (clipped to the range reached)");
  c.params->add("step", ax->step, "target h step");
  c.run = [=] {
    const auto r = g->run();
    double lo = r.trajectory.front().h, hi = lo;
    for (const auto& s : r.trajectory) {
      lo = std::min(lo, s.h);
      hi = std::max(hi, s.h);
    }
    ms::CsvTable t;
    t.columns = {"h", "J3", "C", "dC_dh"};
    for (double h : ax->points("h")) {
      if (h < lo || h > hi) continue;
      const auto p = ms::fsc(r.trajectory, h);
      // J3 at the same tau by linear interpolation.
      double J3 = r.trajectory.back().J3;
      for (std::size_t i = 1; i < r.trajectory.size(); ++i)
        if (r.trajectory[i].tau >= p.tau) {
          const auto &a = r.trajectory[i - 1], &b = r.trajectory[i];
          J3 = a.J3 + (b.J3 - a.J3) * (p.tau - a.tau) / (b.tau - a.tau);
          break;
        }
      t.rows.push_back({h, J3, p.tau, p.dC_dh});
    }
    return t;
  };
}

void add_nc_static(CLI::App& root, std::map<std::string, Command>& cmds) {
  auto& c = cmds["nc-static"];
  c.app = root.add_subcommand("nc-static", "Nielsen complexity between ground states, scanned over target h");
  c.params = std::make_unique<Params>(c.app);
  auto ref = std::make_shared<ms::ReducedParams>(ms::ReducedParams{0.2, 1.0, 0.1, 101});
  auto J3T = std::make_shared<double>(0.3);
  auto ax = std::make_shared<Axis>(Axis{0.0, 2.0, 0.005});
  auto range = std::make_shared<std::string>("occupied");
  c.params->add("hR", ref->h, "reference field");
  c.params->add("J3R", ref->J3, "reference J3");
  c.params->add("J3T", *J3T, "target J3");
  c.params->add("J", ref->J, "intra-cell coupling");
  c.params->add("N", ref->N, "cells");
  c.params->add("h-min", ax->min, "");
  c.params->add("h-max", ax->max, "");
  c.params->add("step", ax->step, "target h step");
  c.params->add("range", *range, "occupied (common singly occupied modes) or full (whole grid)");
  c.run = [=] {
    ref->validate();
    const auto mode = parse_range(*range);
    ms::CsvTable t;
    t.columns = {"hT", "C", "dC_dhT"};
    t.rows = scan(ax->points("h"), [&](double h) -> Row {
      const ms::ReducedParams tgt{h, ref->J, *J3T, ref->N};
      return {h, ms::static_nc(*ref, tgt, mode), ms::static_nc_dh(*ref, tgt, mode)};
    });
    return t;
  };
}

struct TimeAxis {
  double t_max = 50.0, dt = 0.05;
  void add(Params& p) {
    p.add("t-max", t_max, "final time");
    p.add("dt", dt, "time step");
  }
  std::vector<double> points() const {
    if (!(dt > 0.0) || !(t_max > 0.0)) throw ms::invalid_argument("need dt > 0 and t-max > 0");
    return Axis{0.0, t_max, dt}.points("t");
  }
};

void add_quench(CLI::App& root, std::map<std::string, Command>& cmds) {
  auto& c = cmds["quench"];
  c.app = root.add_subcommand("quench", "single sudden quench h -> h + delta: complexity and Loschmidt echo");
  c.params = std::make_unique<Params>(c.app);
  auto p = std::make_shared<ms::ReducedParams>(ms::ReducedParams{0.5, 1.0, 0.2, 101});
  auto delta = std::make_shared<double>(0.1);
  auto ta = std::make_shared<TimeAxis>();
  c.params->add("h", p->h, "initial field");
  c.params->add("delta", *delta, "field jump");
  c.params->add("J", p->J, "intra-cell coupling");
  c.params->add("J3", p->J3, "three-spin coupling");
  c.params->add("N", p->N, "cells");
  ta->add(*c.params);
  c.run = [=] {
    p->validate();
    ms::CsvTable t;
    t.columns = {"t", "C_N_over_N", "L", "minus_lnL_over_N"};
    t.rows = scan(ta->points(), [&](double time) -> Row {
      const double L = ms::loschmidt(*p, *delta, time);
      return {time, ms::nc_of_t(*p, *delta, time) / p->N, L, 0.0 - std::log(L) / p->N};
    });
    return t;
  };
}

void add_multi_quench(CLI::App& root, std::map<std::string, Command>& cmds) {
  auto& c = cmds["multi-quench"];
  c.app = root.add_subcommand("multi-quench", "alternating quenches (delta, T), (0, T), ..., then delta held");
  c.params = std::make_unique<Params>(c.app);
  auto p = std::make_shared<ms::ReducedParams>(ms::ReducedParams{1.0, 1.0, 1.5, 501});
  auto delta = std::make_shared<double>(-0.2);
  auto T = std::make_shared<double>(15.0);
  auto cycles = std::make_shared<int>(3);
  auto ta = std::make_shared<TimeAxis>(TimeAxis{200.0, 0.05});
  c.params->add("h0", p->h, "initial field");
  c.params->add("delta", *delta, "field jump");
  c.params->add("T", *T, "segment duration");
  c.params->add("cycles", *cycles, "number of (delta, 0) pairs before delta is held");
  c.params->add("J", p->J, "intra-cell coupling");
  c.params->add("J3", p->J3, "three-spin coupling");
  c.params->add("N", p->N, "cells");
  ta->add(*c.params);
  c.run = [=] {
    p->validate();
    const auto series = ms::multi_quench_scan(ms::FourSpinSpectrum{p->J, p->J3, p->N}, *p, *delta, *T, *cycles,
                                              ta->t_max, ta->dt);
    ms::CsvTable t;
    t.columns = {"t", "C_N_over_N", "L"};
    for (const auto& r : series) t.rows.push_back({r.t, r.C_N / p->N, r.L});
    return t;
  };
}

void add_xy_quench(CLI::App& root, std::map<std::string, Command>& cmds) {
  auto& c = cmds["xy-quench"];
  c.app = root.add_subcommand("xy-quench", "quench of the transverse-field XY chain (cycles = 0: single quench)");
  c.params = std::make_unique<Params>(c.app);
  auto gamma = std::make_shared<double>(1.0);
  auto h0 = std::make_shared<double>(1.2);
  auto delta = std::make_shared<double>(-0.2);
  auto T = std::make_shared<double>(15.0);
  auto cycles = std::make_shared<int>(0);
  auto N = std::make_shared<int>(101);
  auto ta = std::make_shared<TimeAxis>();
  c.params->add("gamma", *gamma, "anisotropy");
  c.params->add("h0", *h0, "initial field");
  c.params->add("delta", *delta, "field jump");
  c.params->add("T", *T, "segment duration (cycles > 0)");
  c.params->add("cycles", *cycles, "number of (delta, 0) pairs before delta is held");
  c.params->add("N", *N, "sites");
  ta->add(*c.params);
  c.run = [=] {
    if (*N < 2) throw ms::invalid_argument("--N must be >= 2");
    const ms::XYSpectrum spec{*gamma, *N};
    ms::QuenchProtocol protocol{ms::ReducedParams{*h0, 1.0, 0.0, *N}, {{*delta, 0.0}}};
    if (*cycles > 0) protocol = ms::multi_quench_protocol(protocol.base, *delta, *T, *cycles);
    const auto series = ms::evolve_series(spec, protocol, ta->points());
    ms::CsvTable t;
    t.columns = {"t", "C_N_over_N", "L"};
    for (const auto& r : series) t.rows.push_back({r.t, r.C_N / *N, r.L});
    return t;
  };
}

void add_ee_corr(CLI::App& root, std::map<std::string, Command>& cmds) {
  auto& c = cmds["ee-corr"];
  c.app = root.add_subcommand("ee-corr", "half-chain entanglement entropy from the free-fermion correlation matrix");
  c.params = std::make_unique<Params>(c.app);
  auto m = std::make_shared<ChainModel>();
  auto ax = std::make_shared<Axis>(Axis{0.0, 3.0, 0.01});
  m->add(*c.params);
  c.params->add("J3-min", ax->min, "");
  c.params->add("J3-max", ax->max, "");
  c.params->add("step", ax->step, "J3 step");
  c.run = [=] {
    m->at(0.0);
    ms::CsvTable t;
    t.columns = {"J3", "S"};
    t.rows = scan(ax->points("J3"), [&](double J3) -> Row { return {J3, ms::ee_correlation(m->at(J3), m->cells)}; });
    return t;
  };
}

void add_ee_dmrg(CLI::App& root, std::map<std::string, Command>& cmds, const std::uint64_t& seed) {
  auto& c = cmds["ee-dmrg"];
  c.app = root.add_subcommand("ee-dmrg", "half-chain entanglement entropy and ground energy from two-site DMRG");
  c.params = std::make_unique<Params>(c.app);
  auto m = std::make_shared<ChainModel>();
  auto ax = std::make_shared<Axis>(Axis{0.0, 3.0, 0.01});
  auto cfg = std::make_shared<ms::SweepConfig>();
  m->add(*c.params);
  c.params->add("J3-min", ax->min, "");
  c.params->add("J3-max", ax->max, "");
  c.params->add("step", ax->step, "J3 step");
  c.params->add("chi", cfg->chi_max, "maximum bond dimension");
  c.params->add("cutoff", cfg->svd_cutoff, "discarded weight per truncation");
  c.params->add("max-sweeps", cfg->max_sweeps, "");
  c.params->add("energy-tol", cfg->energy_tol, "sweep-to-sweep energy change relative to max(1, |E|)");
  c.params->add("seeds", cfg->seeds, "independent random starts; the lowest energy is kept");
  c.params->add("conserve-sz", cfg->conserve_sz, "block tensors by S^z and search the lowest sector");
  c.run = [=, &seed] {
    m->at(0.0);
    cfg->seed = seed;
    ms::CsvTable t;
    t.columns = {"J3", "S", "energy"};
    t.rows = scan(ax->points("J3"), [&](double J3) -> Row {
      const auto r = ms::dmrg_ground(ms::hamiltonian_mpo(m->at(J3), m->cells), *cfg);
      return {J3, ms::ee_center(r.state), r.energy};
    });
    return t;
  };
}

/// Appends "--key value" for config entries not already given on the command line.
std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::string path;
  std::set<std::string> given;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const auto& a = args[i];
    if (a.rfind("--", 0) != 0) continue;
    const auto eq = a.find('=');
    const std::string key = a.substr(2, eq == std::string::npos ? std::string::npos : eq - 2);
    given.insert(key);
    if (key == "config") path = eq != std::string::npos ? a.substr(eq + 1) : (i + 1 < args.size() ? args[i + 1] : "");
  }
  if (path.empty()) return args;
  std::ifstream f(path);
  if (!f) throw CLI::ValidationError("--config", "cannot open " + path);
  std::string line;
  while (std::getline(f, line)) {
    if (!line.empty() && line[0] == '#') line = line.substr(1);
    std::string k, v;
    if (!ms::split_key_value(line, k, v)) continue;
    if (k == "tool" || k == "command" || k == "config" || given.count(k)) continue;
    args.push_back("--" + k);
    args.push_back(v);
    given.insert(k);
  }
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Information geometry, complexity and entanglement of the alternating spin-1/2 chain with "
               "three- and four-spin exchange."};
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);
  app.fallthrough();
  std::string output, config;
  std::uint64_t seed = 0;
  app.add_option("-o,--output", output, "output file (default: standard output)");
  app.add_option("--config", config, "file of key = value lines merged under the command-line flags");
  app.add_option("--seed", seed, "random seed (DMRG initial states)")->capture_default_str();
  app.set_version_flag("--version", std::string("multispin ") + MULTISPIN_VERSION);

  std::map<std::string, Command> cmds;
  add_phase_diagram(app, cmds);
  add_dispersion(app, cmds);
  add_metric(app, cmds);
  add_ricci(app, cmds);
  add_geodesic(app, cmds);
  add_fsc(app, cmds);
  add_nc_static(app, cmds);
  add_quench(app, cmds);
  add_multi_quench(app, cmds);
  add_ee_corr(app, cmds);
  add_ee_dmrg(app, cmds, seed);
  add_xy_quench(app, cmds);

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = merge_config(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    const auto parsed = app.get_subcommands();
    std::cerr << "error: " << e.what() << '\n' << (parsed.empty() ? app.help() : parsed.front()->help());
    return exit_usage;
  }

  for (auto& [name, cmd] : cmds) {
    if (!cmd.app->parsed()) continue;
    try {
      auto table = cmd.run();
      table.header.insert(table.header.begin(), {{"tool", std::string("multispin ") + MULTISPIN_VERSION},
                                                 {"command", name}});
      for (auto& kv : cmd.params->echo()) table.header.push_back(kv);
      table.header.emplace_back("seed", std::to_string(seed));
      if (output.empty()) {
        table.write(std::cout);
      } else {
        std::ofstream f(output, std::ios::binary);
        if (!f) throw ms::invalid_argument("cannot write " + output);
        table.write(f);
      }
      return exit_ok;
    } catch (const ms::invalid_argument& e) {
      std::cerr << "error: " << e.what() << '\n' << cmd.app->help();
      return exit_usage;
    } catch (const ms::numerical_error& e) {
      std::cerr << "numerical failure: " << e.what() << '\n';
      return exit_numerical;
    }
  }
  return exit_usage;
}
