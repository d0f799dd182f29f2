#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "sqglab/initial_conditions.hpp"
#include "sqglab/io/config.hpp"
#include "sqglab/io/files.hpp"

using namespace sqglab;
using namespace sqglab::io;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text, "run.cfg");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, EmptyTextGivesDefaults) {
  const RunConfig c = parse_config("");
  EXPECT_EQ(c.alpha, 0.9);
  EXPECT_EQ(c.N, 128);
  EXPECT_EQ(c.d, 2);
  EXPECT_EQ(c.velocity, "riesz-perp");
  EXPECT_EQ(c.q, 32.0);
}

TEST(Config, ParsesValuesCommentsAndWhitespace) {
  const RunConfig c = parse_config("# header\n  alpha = 0.7   # trailing\nN=64\n\nvelocity = mollified\ndissipation=false\nseed=42\n");
  EXPECT_EQ(c.alpha, 0.7);
  EXPECT_EQ(c.N, 64);
  EXPECT_EQ(c.velocity, "mollified");
  EXPECT_FALSE(c.dissipation);
  EXPECT_EQ(c.seed, 42u);
}

TEST(Config, OutOfRangeValueNamesKeyAndLine) {
  const std::string msg = error_of("N=64\nalpha = 2.5\n");
  EXPECT_NE(msg.find("run.cfg:2"), std::string::npos) << msg;
  EXPECT_NE(msg.find("alpha"), std::string::npos) << msg;
  EXPECT_NE(error_of("N=100\n").find("power of two"), std::string::npos);
  EXPECT_NE(error_of("beta=1\n").find("beta"), std::string::npos);
}

TEST(Config, UnknownKeySuggestsNearestKey) {
  const std::string msg = error_of("alpah=0.5\n");
  EXPECT_NE(msg.find("unknown key 'alpah'"), std::string::npos) << msg;
  EXPECT_NE(msg.find("did you mean 'alpha'"), std::string::npos) << msg;
  EXPECT_EQ(error_of("zzzzzzzz=1\n").find("did you mean"), std::string::npos);
}

TEST(Config, StructuralErrors) {
  EXPECT_NE(error_of("alpha=0.5\nalpha=0.6\n").find("duplicate key 'alpha'"), std::string::npos);
  EXPECT_NE(error_of("alpha=\n").find("empty value"), std::string::npos);
  EXPECT_NE(error_of("just words\n").find("expected key=value"), std::string::npos);
  EXPECT_NE(error_of("=3\n").find("missing key"), std::string::npos);
  EXPECT_FALSE(error_of("alpha=abc\n").empty());
  EXPECT_FALSE(error_of("N=12.5\n").empty());
  EXPECT_FALSE(error_of("velocity=fast\n").empty());
  EXPECT_FALSE(error_of("dissipation=maybe\n").empty());
}

TEST(Config, EffectiveConfigRoundTrips) {
  RunConfig c = parse_config("alpha=0.65\nN=32\nq=3\ninit=cos-mode\n");
  const RunConfig back = parse_config(config_text(c));
  EXPECT_EQ(config_text(back), config_text(c));
  EXPECT_EQ(back.alpha, 0.65);
  EXPECT_EQ(back.init, "cos-mode");
  EXPECT_EQ(back.snapshot, "");
}

TEST(Config, LoadReportsMissingFile) {
  EXPECT_THROW(load_config("/nonexistent/dir/run.cfg"), ConfigError);
}

TEST(Snapshot, RoundTripIsBitwise) {
  const TorusGrid g(2, 8);
  const GridField f = random_mean_zero(g, 3, 1.0, 3);
  const std::string bytes = encode_snapshot(f, {0.75, 1.25});
  EXPECT_EQ(bytes.size(), kSnapshotHeaderBytes + 8 * 64);
  EXPECT_EQ(bytes.size(), 544u);
  EXPECT_EQ(bytes.substr(0, 4), "SQG1");
  const LoadedSnapshot s = decode_snapshot(bytes);
  EXPECT_EQ(s.meta.alpha, 0.75);
  EXPECT_EQ(s.meta.time, 1.25);
  EXPECT_TRUE(s.field.grid() == g);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(s.field[i], f[i]);
  EXPECT_EQ(encode_snapshot(s.field, s.meta), bytes);
}

TEST(Snapshot, LayoutIsLittleEndian) {
  const TorusGrid g(1, 8);
  GridField f(g);
  f[0] = 1.0;
  const std::string b = encode_snapshot(f, {0.5, 0.0});
  EXPECT_EQ(static_cast<unsigned char>(b[4]), 1u);   // version
  EXPECT_EQ(static_cast<unsigned char>(b[8]), 1u);   // d
  EXPECT_EQ(static_cast<unsigned char>(b[12]), 8u);  // N
  // 1.0 = 0x3ff0000000000000, highest byte last.
  EXPECT_EQ(static_cast<unsigned char>(b[kSnapshotHeaderBytes + 7]), 0x3fu);
  EXPECT_EQ(static_cast<unsigned char>(b[kSnapshotHeaderBytes + 6]), 0xf0u);
}

TEST(Snapshot, RejectsCorruptFiles) {
  const std::string good = encode_snapshot(GridField(TorusGrid(2, 8)), {});
  auto message = [](const std::string& bytes) {
    try {
      decode_snapshot(bytes);
    } catch (const FormatError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  std::string bad = good;
  bad[0] = 'X';
  EXPECT_NE(message(bad).find("bad magic"), std::string::npos);
  EXPECT_NE(message(good.substr(0, 20)).find("truncated header"), std::string::npos);
  bad = good;
  bad[4] = 2;
  EXPECT_NE(message(bad).find("version mismatch"), std::string::npos);
  EXPECT_NE(message(good.substr(0, good.size() - 1)).find("truncated data"), std::string::npos);
  EXPECT_NE(message(good + "x").find("trailing bytes"), std::string::npos);
  bad = good;
  bad[12] = 7;
  EXPECT_NE(message(bad).find("invalid grid"), std::string::npos);
}

TEST(Files, AtomicWriteLeavesNoTemporary) {
  const auto dir = oracle::temp_dir("io");
  const auto path = dir / "snap.sqg";
  const GridField f = random_mean_zero(TorusGrid(2, 16), 1, 1.0, 4);
  write_snapshot(path, f, {0.9, 2.0});
  EXPECT_TRUE(std::filesystem::exists(path));
  EXPECT_FALSE(std::filesystem::exists(dir / "snap.sqg.tmp"));
  const LoadedSnapshot s = read_snapshot(path);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_EQ(s.field[i], f[i]);
  // Overwrite in place.
  write_snapshot(path, f * 2.0, {0.9, 3.0});
  EXPECT_EQ(read_snapshot(path).meta.time, 3.0);
  EXPECT_THROW(read_file(dir / "missing"), std::runtime_error);
  std::filesystem::remove_all(dir);
}

TEST(Files, CsvNumbersRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) EXPECT_EQ(std::stod(csv_number(v)), v);
  EXPECT_EQ(csv_number(0.5), "0.5");
}

TEST(Files, TimeseriesLayout) {
  std::vector<SeriesRow> rows{{0.0, 1.0, 2.0, 3.0, 0.0, 0.0}, {0.5, 0.5, 1.0, 1.5, 0.0, 0.5}};
  const std::string csv = encode_timeseries({"alpha=0.9"}, rows, {1.25});
  EXPECT_EQ(csv,
            "# alpha=0.9\n"
            "t,linf,l2,lq,mean,holder_lp,dt_used\n"
            "0,1,2,3,0,1.25,0\n"
            "0.5,0.5,1,1.5,0,0,0.5\n");
}
