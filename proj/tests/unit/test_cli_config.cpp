#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "cli.hpp"

using namespace gravdec;
using namespace gravdec::cli;

TEST(CliConfig, ParsesKeyValueLinesWithComments) {
  const auto m = parse_config_text("# header\nseed = 12\n  dp.method=voxel   # trailing\n\nconvention = diosi\n");
  EXPECT_EQ(m.at("seed"), "12");
  EXPECT_EQ(m.at("dp.method"), "voxel");
  EXPECT_EQ(m.at("convention"), "diosi");
}

TEST(CliConfig, RejectsMalformedUnknownAndDuplicateLines) {
  EXPECT_THROW(parse_config_text("seed 12\n"), InvalidInput);
  EXPECT_THROW(parse_config_text("= 3\n"), InvalidInput);
  EXPECT_THROW(parse_config_text("no.such.key = 1\n"), InvalidInput);
  EXPECT_THROW(parse_config_text("seed = 1\nseed = 2\n"), InvalidInput);
}

TEST(CliConfig, TypedValidation) {
  Config c;
  EXPECT_THROW(c.set("seed", "abc"), InvalidInput);
  EXPECT_THROW(c.set("dp.voxel_n", "1.5"), InvalidInput);
  EXPECT_THROW(c.set("sn.include_self", "maybe"), InvalidInput);
  EXPECT_THROW(c.set("constants.G", "inf"), InvalidInput);
  EXPECT_THROW(c.set("bogus", "1"), InvalidInput);
  c.set("sn.include_self", "false");
  EXPECT_FALSE(c.boolean("sn.include_self"));
  c.set("dp.voxel_n", "32");
  EXPECT_EQ(c.count("dp.voxel_n", 1), 32u);
  c.set("dp.voxel_n", "0");
  EXPECT_THROW(c.count("dp.voxel_n", 1), InvalidInput);
}

TEST(CliConfig, LaterLayersOverride) {
  Config c;
  c.merge(parse_config_text("seed = 3\nconvention = diosi\n"));
  c.set("seed", "9");
  EXPECT_EQ(c.integer("seed"), 9);
  EXPECT_EQ(c.convention(), Convention::diosi);
  c.set("convention", "other");
  EXPECT_THROW(c.convention(), InvalidInput);
}

TEST(CliConfig, ManifestEchoesEveryKey) {
  Config c;
  const auto j = c.to_json();
  for (const auto& s : key_specs()) EXPECT_TRUE(j.contains(s.key)) << s.key;
  EXPECT_TRUE(j.at("dp.side").is_null());
  EXPECT_TRUE(j.at("com.n").is_number_integer());
}

TEST(CliConfig, MirrorPresetFillsUnsetKeysOnly) {
  Config c;
  apply_dp_preset(c);
  EXPECT_DOUBLE_EQ(c.number("dp.side"), 1e-3);
  EXPECT_DOUBLE_EQ(c.number("dp.d"), 1e-11);
  EXPECT_DOUBLE_EQ(c.number("dp.mass"), 5e-12);
  Config d;
  d.set("dp.d", "0");
  apply_dp_preset(d);
  EXPECT_EQ(d.number("dp.d"), 0.0);
  EXPECT_DOUBLE_EQ(d.number("dp.side"), 1e-3);
}

TEST(CliConfig, NumberFormatting) {
  EXPECT_EQ(csv_number(1.5e9), "1.50000000e+09");
  EXPECT_EQ(csv_number(std::numeric_limits<double>::infinity()), "+inf");
  EXPECT_EQ(csv_number(-2.0), "-2.00000000e+00");
  EXPECT_EQ(json_number(std::numeric_limits<double>::infinity()), "+inf");
  EXPECT_TRUE(json_number(2.5).is_number());
}

TEST(CliConfig, ErrorRecordCarriesCode) {
  const auto r = error_record(kInvalidParameter, "invalid_parameter", "bad");
  EXPECT_EQ(r.at("error").at("code"), 3);
  EXPECT_EQ(r.at("error").at("message"), "bad");
}
