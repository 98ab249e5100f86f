#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include <rcising/io.hpp>

namespace fs = std::filesystem;
using namespace rcising;

namespace {

struct RunResult {
  int code;
  std::string out;
  std::string err;
};

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "rcising_cli_test" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

RunResult run_cli(const std::string& args, const fs::path& dir) {
  const fs::path out = dir / "stdout.txt", err = dir / "stderr.txt";
  const std::string cmd = std::string(RCISING_CLI) + " " + args + " > " + out.string() + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  RunResult r{WIFEXITED(status) ? WEXITSTATUS(status) : -1, "", ""};
  if (fs::exists(out)) r.out = io::read_file(out);
  if (fs::exists(err)) r.err = io::read_file(err);
  return r;
}

std::string first_line(const fs::path& p) {
  const std::string s = io::read_file(p);
  return s.substr(0, s.find('\n'));
}

// Every output except the manifest, whose wall time differs between runs.
void expect_same_outputs(const fs::path& a, const fs::path& b) {
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    const std::string name = entry.path().filename().string();
    if (name == "manifest.json" || name == "stdout.txt" || name == "stderr.txt") continue;
    ASSERT_TRUE(fs::exists(b / name)) << name;
    EXPECT_EQ(io::read_file(entry.path()), io::read_file(b / name)) << name;
    ++compared;
  }
  EXPECT_GE(compared, 2u);
}

const std::string kIic = "iic-scan --d 3 --L 6 --geometry box --beta 0.2 --xs '3;0;0 0;3;0' --sweeps 400 --burn_in 50";
const std::string kAvoid = "avoidance --d 2 --L 8 --beta 0.3 --x '3;0' --y '0;3' --ks 1,2 --sweeps 300 --burn_in 30";

}  // namespace

TEST(IoFormat, SeventeenSignificantDigits) {
  EXPECT_EQ(io::fmt_double(0.1), "0.10000000000000001");
  EXPECT_EQ(io::fmt_double(1.0), "1");
  EXPECT_EQ(io::fmt_double(std::nan("")), "nan");
  EXPECT_EQ(std::stod(io::fmt_double(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(IoConfig, ParsesKeyValueWithComments) {
  const auto c = io::Config::parse("# comment\nbeta = 0.5\n\n d=3 \nbetas = 0.1, 0.2 0.3\n");
  EXPECT_DOUBLE_EQ(c.get_double("beta"), 0.5);
  EXPECT_EQ(c.get_int("d"), 3);
  EXPECT_EQ(c.get_doubles("betas"), (std::vector<double>{0.1, 0.2, 0.3}));
  EXPECT_EQ(io::Config::parse(c.to_text()).values(), c.values());
}

TEST(IoConfig, ErrorsNameTheField) {
  const auto c = io::Config::parse("beta = abc\n");
  try {
    (void)c.get_double("beta");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("'beta'"), std::string::npos);
  }
  try {
    (void)c.get("beta_c");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("'beta_c'"), std::string::npos);
  }
  EXPECT_THROW(c.check_known({"d"}), ConfigError);
  EXPECT_THROW(io::Config::parse("no equals sign\n"), ConfigError);
}

TEST(IoConfig, ReadsManifestConfig) {
  const auto c = io::Config::parse(R"({"tool": "rcising", "config": {"beta": "0.25", "d": "3"}})");
  EXPECT_EQ(c.get("beta"), "0.25");
  EXPECT_EQ(c.get("d"), "3");
  EXPECT_THROW(io::Config::parse(R"({"tool": "rcising"})"), ConfigError);
}

TEST(IoCsv, RejectsSeparatorsAndWidthMismatch) {
  io::Csv csv({"a", "b"});
  csv.row({"1", "2"});
  EXPECT_EQ(csv.str(), "a,b\n1,2\n");
  EXPECT_THROW(csv.row({"1"}), ConfigError);
  EXPECT_THROW(csv.row({"1,2", "3"}), ConfigError);
}

TEST(IoTable, CsvRoundTrip) {
  experiments::TwoPointTable t;
  t.dim = 2;
  t.period = 4;
  experiments::TwoPointTable::for_each_in_box(2, 1, [&](const Coord& x) {
    t.set(x, x == Coord{0, 0} ? 1.0 : 0.1 + 0.01 * x[0] + 0.001 * x[1], 1e-3);
  });
  t.set({2, 0}, 0.05, 1e-4);
  const auto back = io::parse_table_csv(io::table_csv(t), 4);
  EXPECT_EQ(io::table_csv(back), io::table_csv(t));
  EXPECT_DOUBLE_EQ(back.value({-2, 0}), 0.05);
  EXPECT_THROW(io::parse_table_csv("a,b\n", 0), ConfigError);
}

TEST(Cli, VerifySwitchingSmallCorpus) {
  const auto dir = scratch("switching");
  const auto r = run_cli("verify-switching --corpus small --out " + dir.string(), dir);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(first_line(dir / "switching.csv"), "graph,beta,s1,s2,n_events,max_abs_diff,max_rel_diff");
  EXPECT_NE(r.out.find("max |lhs - rhs|"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "manifest.json"));
  EXPECT_TRUE(fs::exists(dir / "summary.txt"));
}

TEST(Cli, MissingBetaCIsAConfigError) {
  const auto dir = scratch("missing_beta_c");
  const auto r = run_cli("chi-scan --d 3 --L 4 --betas 0.1 --out " + dir.string(), dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("beta_c"), std::string::npos);
}

TEST(Cli, OversizedOracleExitsThree) {
  const auto dir = scratch("oversized");
  const auto r = run_cli("verify-derivative --d 2 --L 5 --out " + dir.string(), dir);
  EXPECT_EQ(r.code, 3) << r.err;
}

TEST(Cli, UnknownKeysAndBadValuesExitTwo) {
  const auto dir = scratch("unknown");
  io::write_file(dir / "bad.cfg", "d = 3\nL = 4\nbeta_c = 0.2\nbetas = 0.1\nsweepz = 10\n");
  auto r = run_cli("chi-scan --config " + (dir / "bad.cfg").string() + " --out " + dir.string(), dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("sweepz"), std::string::npos);
  r = run_cli("sample-fk --d 2 --L 4 --beta -1 --out " + dir.string(), dir);
  EXPECT_EQ(r.code, 2);
  r = run_cli("avoidance --d 2 --L 8 --beta 0.3 --x '0;0' --y '0;3' --out " + dir.string(), dir);
  EXPECT_EQ(r.code, 2);
  r = run_cli("no-such-command", dir);
  EXPECT_EQ(r.code, 2);
}

TEST(Cli, HelpDocumentsSchemas) {
  const auto dir = scratch("help");
  const std::vector<std::pair<std::string, std::string>> schemas{
      {"bubbles", "radius,B_partial,B_open_partial"},
      {"chi-scan", "beta,chi,chi_se,scaled"},
      {"iic-scan", "x,prob,se,n_samples"},
      {"verify-switching", "graph,beta,s1,s2"},
      {"verify-coupling", "graph,beta,S,tv_distance"},
      {"verify-backbone", "rho_total"},
      {"verify-derivative", "fd_vs_spin"},
      {"sample-current", "p_zero,p_even,p_odd"},
      {"sample-fk", "p_open"},
      {"avoidance", "k,p_avoid,se,gap,gap_se"},
      {"mixing-probe", "cov_delta"},
      {"regular-scales", "p4_vacuous"},
      {"report-constant", "lower_bound"},
  };
  for (const auto& [cmd, schema] : schemas) {
    const auto r = run_cli(cmd + " --help", dir);
    EXPECT_EQ(r.code, 0) << cmd;
    EXPECT_NE(r.out.find(schema), std::string::npos) << cmd;
  }
}

TEST(Cli, GoldenHeaders) {
  const auto dir = scratch("headers");
  auto r = run_cli(kIic + " --out " + (dir / "iic").string(), dir);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(first_line(dir / "iic" / "iic_scan.csv"), "x,prob,se,n_samples");
  EXPECT_EQ(first_line(dir / "iic" / "iic_deltas.csv"), "x_i,x_j,delta,se");

  r = run_cli("chi-scan --d 2 --L 6 --beta_c literature --beta_factors 0.5,0.6 --sweeps 300 --out " +
                  (dir / "chi").string(),
              dir);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(first_line(dir / "chi" / "chi_scan.csv"), "beta,chi,chi_se,scaled");

  r = run_cli("bubbles --d 2 --L 6 --beta 0.3 --sweeps 300 --out " + (dir / "bub").string(), dir);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(first_line(dir / "bub" / "bubbles.csv"), "radius,B_partial,B_open_partial");
  EXPECT_EQ(first_line(dir / "bub" / "two_point.csv"), "x,value,se");

  // A saved table reproduces the bubble sums without sampling.
  r = run_cli("bubbles --table " + (dir / "bub" / "two_point.csv").string() + " --table_period 6 --out " +
                  (dir / "bub2").string(),
              dir);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(io::read_file(dir / "bub" / "bubbles.csv"), io::read_file(dir / "bub2" / "bubbles.csv"));
}

TEST(Cli, ChiScanScaledColumn) {
  const auto dir = scratch("scaled");
  const auto r = run_cli("chi-scan --d 2 --L 6 --beta_c 0.44 --betas 0.22 --sweeps 300 --out " + dir.string(), dir);
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = io::read_file(dir / "chi_scan.csv");
  const auto row = io::split(csv.substr(csv.find('\n') + 1, csv.find('\n', csv.find('\n') + 1) - csv.find('\n') - 1), ',');
  ASSERT_EQ(row.size(), 4u);
  EXPECT_NEAR(std::stod(row[3]), (1 - 0.22 / 0.44) * std::stod(row[1]), 1e-12);
}

TEST(Cli, SameSeedIsByteIdentical) {
  for (const std::string& cmd : {kIic, kAvoid}) {
    const auto a = scratch("repeat_a"), b = scratch("repeat_b");
    ASSERT_EQ(run_cli(cmd + " --seed 7 --out " + a.string(), a).code, 0);
    ASSERT_EQ(run_cli(cmd + " --seed 7 --out " + b.string(), b).code, 0);
    expect_same_outputs(a, b);
  }
}

TEST(Cli, DifferentSeedsDiffer) {
  const auto a = scratch("seed_a"), b = scratch("seed_b");
  ASSERT_EQ(run_cli(kAvoid + " --seed 1 --out " + a.string(), a).code, 0);
  ASSERT_EQ(run_cli(kAvoid + " --seed 2 --out " + b.string(), b).code, 0);
  EXPECT_NE(io::read_file(a / "avoidance.csv"), io::read_file(b / "avoidance.csv"));
}

TEST(Cli, ThreadCountDoesNotChangeResults) {
  const auto a = scratch("threads_a"), b = scratch("threads_b");
  ASSERT_EQ(run_cli(kIic + " --threads 1 --out " + a.string(), a).code, 0);
  ASSERT_EQ(run_cli(kIic + " --threads 3 --out " + b.string(), b).code, 0);
  expect_same_outputs(a, b);
}

TEST(Cli, ManifestAloneReproducesOutputs) {
  for (const std::string& cmd : {kIic, kAvoid, std::string("sample-current --graph 4:0-1,1-2,2-3,3-0 --beta 0.7 "
                                                           "--sources '0 2' --sweeps 200 --seed 11")}) {
    const auto a = scratch("manifest_a"), b = scratch("manifest_b");
    ASSERT_EQ(run_cli(cmd + " --out " + a.string(), a).code, 0);
    const auto r = run_cli(std::string(cmd.substr(0, cmd.find(' '))) + " --config " + (a / "manifest.json").string() +
                               " --out " + b.string(),
                           b);
    ASSERT_EQ(r.code, 0) << r.err;
    expect_same_outputs(a, b);
    // Defaults are written back, so the manifest config is complete.
    const auto ca = io::Config::from_file((a / "manifest.json").string());
    const auto cb = io::Config::from_file((b / "manifest.json").string());
    EXPECT_EQ(ca.values(), cb.values());
    EXPECT_TRUE(ca.has("seed"));
    EXPECT_TRUE(ca.has("sweeps"));
  }
}

TEST(Cli, KeyValueConfigFileMatchesFlags) {
  const auto a = scratch("cfg_a"), b = scratch("cfg_b");
  io::write_file(b / "run.cfg",
                 "# avoidance run\nd = 2\nL = 8\nbeta = 0.3\nx = 3;0\ny = 0;3\nks = 1,2\nsweeps = 300\nburn_in = 30\n");
  ASSERT_EQ(run_cli(kAvoid + " --out " + a.string(), a).code, 0);
  ASSERT_EQ(run_cli("avoidance --config " + (b / "run.cfg").string() + " --out " + b.string(), b).code, 0);
  EXPECT_EQ(io::read_file(a / "avoidance.csv"), io::read_file(b / "avoidance.csv"));
}

TEST(Cli, OracleCommandsReportExactAgreement) {
  const auto dir = scratch("oracles");
  auto r = run_cli("verify-coupling --out " + (dir / "c").string(), dir);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("tanh(beta)"), std::string::npos);
  r = run_cli("verify-backbone --out " + (dir / "b").string(), dir);
  ASSERT_EQ(r.code, 0) << r.err;
  r = run_cli("verify-derivative --d 2 --L 3 --out " + (dir / "d").string(), dir);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(first_line(dir / "d" / "derivative.csv"),
            "beta,chi,fd,spin_form,current_form,fd_vs_spin,fd_vs_current,spin_vs_current");
}

TEST(Cli, ReportConstantFromInputs) {
  const auto dir = scratch("report");
  const auto r = run_cli(
      "report-constant --d 5 --beta_c literature --A_hat 1.1 --A_se 0.05 --p_hat 0.8 --p_se 0.02 --b_open 0.3 --out " +
          dir.string(),
      dir);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("external, unverified"), std::string::npos);
  const std::string csv = io::read_file(dir / "report_constant.csv");
  EXPECT_NE(csv.find(",false,false"), std::string::npos);
}
