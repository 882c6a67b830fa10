#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "pcomp/csv.hpp"
#include "pcomp/version.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kData = PCOMP_DATA_DIR;

struct Result {
  int status;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "pcomp");
  std::ostringstream out, err;
  const int status = pcomp::cli::run(args, out, err);
  return {status, out.str(), err.str()};
}

pcomp::csv::Table table(const std::string& text) {
  std::istringstream in(text);
  return pcomp::csv::read(in);
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "pcomp_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const std::vector<std::vector<std::string>>& invocations() {
  static const std::vector<std::vector<std::string>> all{
      {"integrate", "--terms", kData + "/terms8.txt", "--samples", "500"},
      {"integrate", "--terms", kData + "/terms8.txt", "--weights", kData + "/weights8.txt", "--samples", "500"},
      {"bayes", "--net", kData + "/family3.net", "--pair", "F0_0,C2_0", "--samples", "2000", "--every", "100"},
      {"bayes", "--family", "3", "--couples", "2", "--pair", "F0_0,F0_2", "--samples", "500"},
      {"knapsack", "--instance", kData + "/knapsack10.csv", "--samples", "5000", "--dp"},
      {"knapsack", "--instance", kData + "/knapsack10.csv", "--samples", "5000", "--k", "1", "--backend", "lfsr32"},
      {"ising", "--model", kData + "/and_gate.model", "--mode", "sample", "--sweeps", "200"},
      {"ising", "--model", kData + "/and_gate.model", "--sampler", "mh", "--clamp", "2=1", "--sweeps", "200"},
      {"ising", "--model", kData + "/and_gate.model", "--mode", "anneal", "--sweeps", "100", "--backend", "counter"},
      {"qmc", "--circuit", kData + "/ghz3.circuit", "--target", "7", "--samples", "2000"},
      {"qmc", "--circuit", kData + "/ghz3.circuit", "--samples", "2000", "--proposal", "magnitude"},
      {"tfim", "--config", kData + "/chain4.tfim", "--sweeps", "100", "--burn-in", "50", "--thin", "2", "--exact"},
      {"tfim", "--config", kData + "/chain4.tfim", "--mode", "anneal", "--sweeps", "100"},
      {"bench", "--samples", "1000", "--chains", "2", "--fc", "1e6"},
      {"bench", "--kernel", "ising", "--model", kData + "/and_gate.model", "--samples", "1000"},
  };
  return all;
}

}  // namespace

TEST(Cli, IsingExample) {
  const auto r = run({"ising", "--model", kData + "/and_gate.model", "--mode", "sample", "--sweeps", "100", "--seed", "7"});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_TRUE(r.err.empty());
  const auto t = table(r.out);
  EXPECT_EQ(t.header, (std::vector<std::string>{"sweep", "energy", "s0", "s1", "s2"}));
  EXPECT_EQ(t.rows.size(), 100u);
  EXPECT_EQ(t.meta_value("seed"), "7");
  EXPECT_EQ(t.meta_value("subcommand"), "ising");
}

TEST(Cli, UsageErrors) {
  for (const auto& args : std::vector<std::vector<std::string>>{
           {"ising", "--mode", "sample"},
           {"integrate", "--terms", kData + "/terms8.txt", "--samples", "0"},
           {"knapsack", "--instance", kData + "/knapsack10.csv", "--samples", "0"},
           {"qmc", "--circuit", kData + "/ghz3.circuit", "--bogus"},
           {"ising", "--model", kData + "/and_gate.model", "--mode", "dream"},
           {},
           {"frobnicate"},
       }) {
    const auto r = run(args);
    EXPECT_NE(r.status, 0);
    EXPECT_FALSE(r.err.empty());
    EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1) << r.err;
  }
  const auto missing = run({"ising", "--sweeps", "10"});
  EXPECT_NE(missing.err.find("--model"), std::string::npos);
}

TEST(Cli, Version) {
  const auto r = run({"--version"});
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find(std::string("pcomp ") + PCOMP_VERSION), std::string::npos);
}

TEST(Cli, EverySubcommandIsDeterministic) {
  for (const auto& args : invocations()) {
    const auto a = run(args), b = run(args);
    ASSERT_EQ(a.status, 0) << args[0] << ": " << a.err;
    ASSERT_EQ(b.status, 0);
    EXPECT_FALSE(pcomp::csv::data_rows(a.out).empty()) << args[0];
    EXPECT_EQ(pcomp::csv::data_rows(a.out), pcomp::csv::data_rows(b.out)) << args[0];
  }
}

TEST(Cli, SeedChangesOutput) {
  auto args = invocations()[9];
  const auto a = run(args);
  args.insert(args.end(), {"--seed", "99"});
  const auto b = run(args);
  EXPECT_NE(pcomp::csv::data_rows(a.out), pcomp::csv::data_rows(b.out));
}

TEST(Cli, HeaderCarriesProvenance) {
  const auto r = run(invocations()[0]);
  const auto t = table(r.out);
  EXPECT_EQ(t.meta_value("tool"), std::string("pcomp ") + PCOMP_VERSION);
  EXPECT_EQ(t.meta_value("seed"), "20211");
  EXPECT_EQ(t.meta_value("backend"), "longperiod");
  EXPECT_EQ(t.meta_value("config_hash").size(), 16u);
  const auto other = table(run(invocations()[1]).out);
  EXPECT_NE(other.meta_value("config_hash"), t.meta_value("config_hash"));
}

TEST(Cli, EnvironmentSeed) {
  ::setenv("PCOMP_SEED", "4242", 1);
  const auto env = run(invocations()[9]);
  auto explicit_args = invocations()[9];
  explicit_args.insert(explicit_args.end(), {"--seed", "4242"});
  const auto flag = run(explicit_args);
  ::setenv("PCOMP_SEED", "oops", 1);
  const auto bad = run(invocations()[9]);
  ::unsetenv("PCOMP_SEED");
  EXPECT_EQ(table(env.out).meta_value("seed"), "4242");
  EXPECT_EQ(pcomp::csv::data_rows(env.out), pcomp::csv::data_rows(flag.out));
  EXPECT_NE(bad.status, 0);
}

TEST(Cli, IntegrateReportsExactSum) {
  const auto t = table(run({"integrate", "--terms", kData + "/terms8.txt", "--weights", kData + "/weights8.txt"}).out);
  EXPECT_EQ(t.rows[0][t.column("exact")], "36");
  EXPECT_NEAR(std::stod(t.rows[0][t.column("estimate")]), 36.0, 1.0);
}

TEST(Cli, KnapsackFindsOptimumOnSample) {
  const auto t = table(run({"knapsack", "--instance", kData + "/knapsack10.csv", "--samples", "20000", "--dp"}).out);
  EXPECT_EQ(t.rows[0][t.column("dp_optimum")], "295");
  EXPECT_EQ(t.rows[0][t.column("best_value")], "295");
  EXPECT_EQ(t.rows[0][t.column("selection")].size(), 10u);
}

TEST(Cli, OutputFileAndPlainFormat) {
  const auto path = scratch("qmc.csv");
  auto args = invocations()[9];
  const auto to_stdout = run(args);
  args.insert(args.end(), {"-o", path.string()});
  const auto to_file = run(args);
  ASSERT_EQ(to_file.status, 0) << to_file.err;
  EXPECT_TRUE(to_file.out.empty());
  EXPECT_EQ(slurp(path), to_stdout.out);  // --output does not enter the config hash

  auto plain = invocations()[9];
  plain.insert(plain.end(), {"--format", "plain"});
  const auto p = run(plain);
  EXPECT_EQ(p.out.find('#'), std::string::npos);
  EXPECT_EQ(p.out.find(','), std::string::npos);
  EXPECT_EQ(p.out.rfind("estimate_re estimate_im", 0), 0u);
}

TEST(Cli, IoErrorsNameThePath) {
  auto args = invocations()[0];
  args.insert(args.end(), {"-o", "/nonexistent-dir/out.csv"});
  const auto r = run(args);
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("/nonexistent-dir/out.csv"), std::string::npos);

  const auto bad_file = scratch("broken.model");
  std::ofstream(bad_file) << "0 1\n";
  const auto b = run({"ising", "--model", bad_file.string()});
  EXPECT_EQ(b.status, 1);
  EXPECT_NE(b.err.find(bad_file.string()), std::string::npos);
  EXPECT_NE(b.err.find("line 1"), std::string::npos);
}

TEST(Cli, EmptyTraceIsHeaderOnly) {
  const auto path = scratch("empty_trace.csv");
  const auto r = run({"knapsack", "--instance", kData + "/knapsack10.csv", "--samples", "10", "--trace-every", "1000",
                      "--trace", path.string()});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto t = pcomp::csv::read_file(path.string());
  EXPECT_EQ(t.header, (std::vector<std::string>{"step", "best_value"}));
  EXPECT_TRUE(t.rows.empty());
}

TEST(Cli, LongTraceRoundTrips) {
  const auto path = scratch("long_trace.csv");
  const auto r = run({"knapsack", "--instance", kData + "/knapsack10.csv", "--samples", "100000", "--trace-every",
                      "1", "--trace", path.string()});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto text = slurp(path);
  const auto t = table(text);
  ASSERT_EQ(t.rows.size(), 100000u);
  std::ostringstream rewritten;
  pcomp::csv::Writer w(rewritten, t.header, t.meta);
  double prev = 0;
  for (std::size_t k = 0; k < t.rows.size(); ++k) {
    ASSERT_EQ(t.rows[k][0], std::to_string(k + 1));
    const double v = std::stod(t.rows[k][1]);
    ASSERT_GE(v, prev);
    prev = v;
    w.row(t.rows[k]);
  }
  EXPECT_EQ(rewritten.str(), text);
}

TEST(Cli, BenchAccounting) {
  const auto one = table(run({"bench", "--samples", "1000000"}).out);
  EXPECT_GT(std::stod(one.meta_value("samples_per_second")), 0.0);
  EXPECT_GT(std::stod(one.meta_value("elapsed_seconds")), 0.0);
  EXPECT_EQ(one.rows[0][one.column("total_samples")], "1000000");
  EXPECT_NEAR(std::stod(one.rows[0][one.column("mean_bit0")]), 0.5, 0.005);

  const auto two = table(run({"bench", "--samples", "1000000", "--chains", "2"}).out);
  EXPECT_EQ(two.rows[0][two.column("total_samples")], "2000000");

  const auto fc = table(run({"bench", "--samples", "1000", "--fc", "125e6"}).out);
  EXPECT_EQ(std::stod(fc.rows[0][fc.column("ideal_samples_per_second")]), 1.25e8);
  EXPECT_TRUE(one.rows[0][one.column("ideal_samples_per_second")].empty());
}

TEST(Cli, ExitStatusZeroIffSilent) {
  auto all = invocations();
  all.push_back({"ising", "--model", kData + "/and_gate.model", "--clamp", "7=1"});
  all.push_back({"ising", "--model", kData + "/and_gate.model", "--clamp", "0=-1"});
  all.push_back({"bayes", "--family", "2", "--pair", "F0_0,nobody"});
  all.push_back({"bayes", "--pair", "a,b"});
  all.push_back({"bench", "--kernel", "ising"});
  all.push_back({"qmc", "--circuit", kData + "/ghz3.circuit", "--target", "8"});
  all.push_back({"tfim", "--config", kData + "/and_gate.model"});
  for (const auto& args : all) {
    const auto r = run(args);
    EXPECT_EQ(r.status == 0, r.err.empty()) << args[0] << ": " << r.err;
  }
}
