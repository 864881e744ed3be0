#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "multispin/csv.hpp"
#include "multispin/info_geometry.hpp"
#include "multispin/real_space.hpp"

using namespace multispin;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("multispin_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Run run(const std::string& args, const std::string& env = "") {
  const auto err = scratch() / "stderr.txt";
  const std::string cmd = env + " " + MULTISPIN_CLI_PATH + " " + args + " 2>" + err.string();
  Run r;
  FILE* p = ::popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, p)) > 0;) r.out.append(buf, n);
  const int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(err);
  return r;
}

CsvDocument parse(const std::string& text) {
  std::istringstream is(text);
  return read_csv(is);
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : ",") + x;
  return s;
}

}  // namespace

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("phase-diagram --J3-max 0.1 --step 0.05").code, 0);
  EXPECT_EQ(run("--help").code, 0);

  const auto unknown = run("ricci --no-such-flag 1");
  EXPECT_EQ(unknown.code, 2);
  EXPECT_NE(unknown.err.find("Usage"), std::string::npos);
  EXPECT_TRUE(unknown.out.empty());

  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("ricci --step 0").code, 2);
  EXPECT_EQ(run("ricci --h-min 1 --h-max 0.5").code, 2);
  EXPECT_EQ(run("ee-corr --model five-spin").code, 2);
  EXPECT_EQ(run("dispersion --N 0").code, 2);
  EXPECT_EQ(run("quench --J3 abc").code, 2);
}

TEST(Cli, NumericalFailuresExitThree) {
  // Fully polarized: the metric vanishes identically.
  const auto ricci = run("ricci --J3 0.5 --h-min 5 --h-max 5.1 --step 0.05 --N 21");
  EXPECT_EQ(ricci.code, 3);
  EXPECT_NE(ricci.err.find("degenerate"), std::string::npos);

  const auto skipped = run("ricci --J3 0.5 --h-min 5 --h-max 5.1 --step 0.05 --N 21 --skip-degenerate true");
  EXPECT_EQ(skipped.code, 0);
  for (const auto& row : parse(skipped.out).rows) EXPECT_EQ(row[1], "nan");

  const auto dmrg = run("ee-dmrg --cells 6 --J3-max 0.1 --step 0.1 --max-sweeps 1 --energy-tol 1e-300");
  EXPECT_EQ(dmrg.code, 3);
}

TEST(Cli, HeaderEchoesEveryParameter) {
  const auto r = run("quench --h 0.5 --delta 0.1 --J3 0.2 --N 11 --t-max 0.5 --seed 9");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = parse(r.out);
  EXPECT_EQ(doc.header.at("tool"), std::string("multispin ") + MULTISPIN_VERSION);
  EXPECT_EQ(doc.header.at("command"), "quench");
  EXPECT_EQ(doc.header.at("seed"), "9");
  EXPECT_EQ(std::stod(doc.header.at("h")), 0.5);
  EXPECT_EQ(std::stod(doc.header.at("J3")), 0.2);
  EXPECT_EQ(doc.header.at("N"), "11");
  EXPECT_EQ(std::stod(doc.header.at("t-max")), 0.5);
  EXPECT_EQ(doc.header.count("dt"), 1u);
  EXPECT_EQ(doc.header.count("J"), 1u);
  EXPECT_EQ(doc.rows.size(), 11u);
}

TEST(Cli, SpecExampleColumns) {
  const auto ricci = run("ricci --J3 0.5 --h-min 0.2 --h-max 0.25 --step 0.005 --N 1001");
  ASSERT_EQ(ricci.code, 0) << ricci.err;
  EXPECT_EQ(join(parse(ricci.out).columns), "h,R");
  EXPECT_EQ(parse(ricci.out).rows.size(), 11u);

  const auto quench = run("quench --h 0.5 --delta 0.1 --J3 0.2 --N 101 --t-max 50");
  ASSERT_EQ(quench.code, 0) << quench.err;
  const auto q = parse(quench.out);
  EXPECT_EQ(join(q.columns), "t,C_N_over_N,L,minus_lnL_over_N");
  EXPECT_EQ(q.rows.size(), 1001u);
  EXPECT_DOUBLE_EQ(q.numbers("t").back(), 50.0);

  const auto dmrg = run("ee-dmrg --model three-spin --H 0 --J1 1.2 --J2 0.8 --J3-min 0 --J3-max 0.2 --step 0.1 "
                        "--cells 6 --chi 300");
  ASSERT_EQ(dmrg.code, 0) << dmrg.err;
  EXPECT_EQ(join(parse(dmrg.out).columns), "J3,S,energy");

  const std::pair<const char*, const char*> others[] = {
      {"phase-diagram --J3-max 0.1 --step 0.05", "J3,h1,h2,h3,h13,k_m"},
      {"phase-diagram --J3-max 0.1 --step 0.05 --h-min 0 --h-max 1 --h-step 0.5", "J3,h,region"},
      {"dispersion --N 5", "lambda,k,E1,E2,Lambda,theta"},
      {"metric --h-max 0.3 --step 0.05 --N 51", "h,J3,g_hh,g_hJ3,g_J3J3,det"},
      {"metric --h-max 0.3 --step 0.05 --kind thermo", "h,J3,g_hh,g_hJ3,g_J3J3,det"},
      {"geodesic --steps 200 --every 50", "tau,h,J3,dh,dJ3,h1,dC_dh,stop"},
      {"fsc --steps 2000 --h-max 1.1 --step 0.05", "h,J3,C,dC_dh"},
      {"nc-static --h-max 0.1 --step 0.05 --N 21", "hT,C,dC_dhT"},
      {"multi-quench --N 21 --t-max 1", "t,C_N_over_N,L"},
      {"ee-corr --J3-max 0.1 --step 0.05 --cells 11", "J3,S"},
      {"xy-quench --N 21 --t-max 1", "t,C_N_over_N,L"},
      {"xy-quench --N 21 --t-max 1 --cycles 2 --T 0.3", "t,C_N_over_N,L"},
  };
  for (const auto& [args, cols] : others) {
    const auto r = run(args);
    ASSERT_EQ(r.code, 0) << args << "\n" << r.err;
    const auto doc = parse(r.out);
    EXPECT_EQ(join(doc.columns), cols) << args;
    EXPECT_FALSE(doc.rows.empty()) << args;
  }
}

TEST(Cli, ValuesMatchLibrary) {
  const auto r = run("ricci --J3 0.5 --h-min 0.2 --h-max 0.3 --step 0.05 --N 1001");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = parse(r.out);
  const auto hs = doc.numbers("h");
  const auto Rs = doc.numbers("R");
  for (std::size_t i = 0; i < hs.size(); ++i)
    EXPECT_EQ(Rs[i], ricci(FiniteSizeMetric{1.0, 1001, false}, hs[i], 0.5));

  const auto e = run("ee-corr --h 0.25 --J3-min 0.6 --J3-max 0.8 --step 0.1 --cells 21");
  ASSERT_EQ(e.code, 0) << e.err;
  const auto ed = parse(e.out);
  const auto J3s = ed.numbers("J3");
  const auto S = ed.numbers("S");
  ASSERT_EQ(J3s.size(), 3u);
  for (std::size_t i = 0; i < J3s.size(); ++i) EXPECT_EQ(S[i], ee_correlation(ReducedParams{0.25, 1.0, J3s[i], 21}, -1));
}

TEST(Cli, RerunsAreByteIdentical) {
  const std::string args = "ee-corr --J3-max 1.5 --step 0.05 --cells 21";
  const auto one = run(args, "MULTISPIN_WORKERS=1");
  const auto many = run(args, "MULTISPIN_WORKERS=4");
  ASSERT_EQ(one.code, 0);
  EXPECT_EQ(one.out, many.out);

  const std::string dmrg = "ee-dmrg --cells 5 --J3-max 0.5 --step 0.25 --seed 17";
  const auto a = run(dmrg, "MULTISPIN_WORKERS=1");
  const auto b = run(dmrg, "MULTISPIN_WORKERS=3");
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
}

TEST(Cli, OutputFileMatchesStdout) {
  const auto path = scratch() / "out.csv";
  const std::string args = "nc-static --h-max 0.2 --step 0.05 --N 21";
  ASSERT_EQ(run(args + " -o " + path.string()).code, 0);
  EXPECT_EQ(slurp(path), run(args).out);
}

TEST(Cli, HeaderReproducesRun) {
  const char* cases[] = {
      "metric --J3 0.3 --h-min 0.1 --h-max 0.4 --step 0.1 --N 31",
      "geodesic --steps 300 --every 100 --J3dot0 0.05 --renormalize false",
      "multi-quench --N 31 --t-max 2 --dt 0.1 --T 0.5 --cycles 2",
      "ee-corr --model three-spin --J1 1.1 --J3-max 0.2 --step 0.1 --cells 9",
      "ee-dmrg --cells 5 --J3-max 0.2 --step 0.1 --chi 16 --seed 5",
  };
  for (const char* args : cases) {
    const auto first = run(args);
    ASSERT_EQ(first.code, 0) << args << "\n" << first.err;
    const auto cfg = scratch() / "header.csv";
    std::ofstream(cfg, std::ios::binary) << first.out;
    const auto command = parse(first.out).header.at("command");
    const auto again = run(command + " --config " + cfg.string());
    ASSERT_EQ(again.code, 0) << args << "\n" << again.err;
    EXPECT_EQ(again.out, first.out) << args;
  }
}

TEST(Cli, CommandLineOverridesConfig) {
  const auto cfg = scratch() / "params.conf";
  std::ofstream(cfg) << "# comment line\nJ3-max = 0.2\nstep = 0.1\ncells = 7\n";
  const auto r = run("ee-corr --config " + cfg.string() + " --cells 9");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = parse(r.out);
  EXPECT_EQ(doc.header.at("cells"), "9");
  EXPECT_EQ(doc.rows.size(), 3u);

  EXPECT_EQ(run("ee-corr --config " + (scratch() / "missing.conf").string()).code, 2);
}
