#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "sqglab/io/files.hpp"

namespace fs = std::filesystem;

namespace {

int run(const std::string& sub, const fs::path& cfg, const fs::path& out) {
  const std::string cmd = std::string(SQGLAB_CLI_PATH) + " " + sub + " --config " + cfg.string() + " --out " +
                          out.string() + " > " + (out.parent_path() / (sub + ".log")).string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "run.cfg";
  std::ofstream(p) << text;
  return p;
}

std::map<std::string, std::string> key_values(const fs::path& p) {
  std::map<std::string, std::string> kv;
  std::istringstream in(sqglab::io::read_file(p));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

const char* kInvariant =
    "N=32\nalpha=0.9\nt_end=1\ndt=0.05\ninit=cos-mode\ninit_k1=1\nsnapshot_stride=4\nq=2\n";

}  // namespace

TEST(Cli, SimulateInvariantModeDecaysExponentially) {
  const fs::path dir = oracle::temp_dir("cli");
  const fs::path out = dir / "out";
  ASSERT_EQ(run("simulate", write_config(dir, kInvariant), out), 0);
  for (const char* f : {"timeseries.csv", "snapshot_initial.sqg", "snapshot_final.sqg", "config.txt", "report.txt"})
    EXPECT_TRUE(fs::exists(out / f)) << f;

  std::istringstream csv(sqglab::io::read_file(out / "timeseries.csv"));
  std::string line;
  int rows = 0;
  bool saw_header = false;
  while (std::getline(csv, line)) {
    if (line.rfind("#", 0) == 0) continue;
    if (!saw_header) {
      EXPECT_EQ(line, "t,linf,l2,lq,mean,holder_lp,dt_used");
      saw_header = true;
      continue;
    }
    double t, linf;
    ASSERT_EQ(std::sscanf(line.c_str(), "%lf,%lf", &t, &linf), 2);
    EXPECT_NEAR(linf, std::exp(-t), 1e-6) << line;
    ++rows;
  }
  EXPECT_EQ(rows, 6);  // t = 0, 0.2, ..., 1

  const auto fin = sqglab::io::read_snapshot(out / "snapshot_final.sqg");
  EXPECT_DOUBLE_EQ(fin.meta.time, 1.0);
  EXPECT_DOUBLE_EQ(fin.meta.alpha, 0.9);
  const auto rep = key_values(out / "report.txt");
  EXPECT_EQ(rep.at("max-principle").substr(0, 4), "pass");
  EXPECT_EQ(rep.at("lq-decay").substr(0, 4), "pass");
  fs::remove_all(dir);
}

TEST(Cli, ArtifactsEmbedEffectiveConfig) {
  const fs::path dir = oracle::temp_dir("cli");
  ASSERT_EQ(run("simulate", write_config(dir, kInvariant), dir / "out"), 0);
  const std::string csv = sqglab::io::read_file(dir / "out" / "timeseries.csv");
  EXPECT_NE(csv.find("# subcommand=simulate"), std::string::npos);
  EXPECT_NE(csv.find("# alpha=0.9"), std::string::npos);
  EXPECT_NE(csv.find("# N=32"), std::string::npos);
  const auto cfg = key_values(dir / "out" / "config.txt");
  EXPECT_EQ(cfg.at("t_end"), "1");
  EXPECT_EQ(cfg.at("beta"), "0.5");  // defaults are written too
  fs::remove_all(dir);
}

TEST(Cli, RunsAreByteIdentical) {
  const fs::path dir = oracle::temp_dir("cli");
  const fs::path cfg = write_config(dir, "N=32\nalpha=0.8\nt_end=0.3\nseed=7\nsnapshot_stride=2\n");
  ASSERT_EQ(run("simulate", cfg, dir / "a"), 0);
  ASSERT_EQ(run("simulate", cfg, dir / "b"), 0);
  for (const char* f : {"timeseries.csv", "snapshot_final.sqg", "report.txt"})
    EXPECT_EQ(sqglab::io::read_file(dir / "a" / f), sqglab::io::read_file(dir / "b" / f)) << f;
  fs::remove_all(dir);
}

TEST(Cli, HolderScanReadsSnapshot) {
  const fs::path dir = oracle::temp_dir("cli");
  ASSERT_EQ(run("simulate", write_config(dir, kInvariant), dir / "sim"), 0);
  const fs::path cfg =
      write_config(dir, "N=32\nbeta=0.5\nsnapshot=" + (dir / "sim" / "snapshot_final.sqg").string() + "\n");
  ASSERT_EQ(run("holder-scan", cfg, dir / "scan"), 0);
  const std::string csv = sqglab::io::read_file(dir / "scan" / "holder_scan.csv");
  EXPECT_NE(csv.find("j,lp_block_sup,lp_weighted,pairing_block_sup,pairing_weighted"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "scan" / "report.txt"));
  fs::remove_all(dir);
}

TEST(Cli, DualPairReportsSmallDrift) {
  const fs::path dir = oracle::temp_dir("cli");
  const fs::path cfg = write_config(dir, "N=32\nalpha=0.8\nt_end=0.4\ndt=0.01\ndual_s=0.3\nseed=3\npsi_k1=2\npsi_k2=1\n");
  ASSERT_EQ(run("dual-pair", cfg, dir / "out"), 0);
  const auto rep = key_values(dir / "out" / "report.txt");
  // The dual velocity is interpolated linearly between forward steps, so the
  // drift is second order in dt (1.5e-5 at dt = 0.01).
  EXPECT_LT(std::stod(rep.at("drift")), 1e-4);
  EXPECT_EQ(rep.at("dual-lp-monotone").substr(0, 4), "pass");
  EXPECT_TRUE(fs::exists(dir / "out" / "dual_pair.csv"));
  fs::remove_all(dir);
}

TEST(Cli, ChainSucceedsAtDefaults) {
  const fs::path dir = oracle::temp_dir("cli");
  ASSERT_EQ(run("chain", write_config(dir, "alpha=0.9\n"), dir / "out"), 0);
  const auto kv = key_values(dir / "out" / "chain.txt");
  EXPECT_EQ(kv.at("all_positive"), "true");
  EXPECT_EQ(kv.at("A"), "5");
  EXPECT_EQ(kv.at("q"), "32");
  EXPECT_TRUE(kv.count("T_19"));
  EXPECT_TRUE(kv.count("sensitivity_theta_sup"));
  fs::remove_all(dir);
}

TEST(Cli, VerifyKernelPasses) {
  const fs::path dir = oracle::temp_dir("cli");
  ASSERT_EQ(run("verify-kernel", write_config(dir, "N=64\nalpha=0.9\nlattice_radius=12\nmax_mode=3\n"), dir / "out"), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "verify_kernel.csv"));
  fs::remove_all(dir);
}

TEST(Cli, BadInputsFailWithMessages) {
  const fs::path dir = oracle::temp_dir("cli");
  EXPECT_EQ(run("simulate", write_config(dir, "alpha=2.5\n"), dir / "out"), 2);
  const std::string log = sqglab::io::read_file(dir / "simulate.log");
  EXPECT_NE(log.find("alpha"), std::string::npos) << log;
  EXPECT_EQ(run("dual-pair", write_config(dir, "N=16\nt_end=0.1\ndual_s=0.5\n"), dir / "out"), 2);
  EXPECT_EQ(run("chain", write_config(dir, "alpha=0.1\n"), dir / "out"), 2);
  EXPECT_NE(run("simulate", dir / "missing.cfg", dir / "out"), 0);
  fs::remove_all(dir);
}
