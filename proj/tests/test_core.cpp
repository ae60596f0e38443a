// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <set>

#include "templink/config.hpp"
#include "templink/error.hpp"
#include "templink/io.hpp"
#include "templink/parallel.hpp"
#include "templink/rng.hpp"

namespace fs = std::filesystem;
using namespace templink;

namespace {

fs::path temp_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("templink_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Config, ParsesCommentsBlanksAndTypes) {
  const auto cfg = Config::parse("# comment\n\na=1\nb = 2.5\nc=true\nd=hello\ne=1,2,3\n");
  EXPECT_EQ(cfg.get_int("a", 0), 1);
  EXPECT_DOUBLE_EQ(cfg.get_double("b", 0.0), 2.5);
  EXPECT_TRUE(cfg.get_bool("c", false));
  EXPECT_EQ(cfg.get_string("d", ""), "hello");
  EXPECT_EQ(cfg.get_sizes("e", {}), (std::vector<std::size_t>{1, 2, 3}));
  EXPECT_EQ(cfg.get_int("missing", 42), 42);
}

TEST(Config, MalformedValuesAreConfigErrors) {
  const auto cfg = Config::parse("a=abc\n");
  try {
    (void)cfg.get_int("a", 0);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::config_error);
  }
  EXPECT_THROW(Config::parse("no equals sign\n"), Error);
}

TEST(Config, MergeOverlaysAndSerializationIsCanonical) {
  auto base = Config::parse("b=1\na=2\n");
  base.merge(Config::parse("b=3\nc=4\n"));
  EXPECT_EQ(base.get_int("b", 0), 3);
  EXPECT_EQ(base.serialize(), Config::parse(base.serialize()).serialize());
  EXPECT_LT(base.serialize().find("a="), base.serialize().find("b="));
}

TEST(Config, SaveLoadRoundTrip) {
  const auto dir = temp_dir("config");
  auto cfg = Config::parse("x=1\ny=two\n");
  cfg.save(dir / "c.cfg");
  EXPECT_EQ(Config::load(dir / "c.cfg").entries(), cfg.entries());
  EXPECT_THROW(Config::load(dir / "absent.cfg"), Error);
}

TEST(Rng, StreamsAreReproducibleAndKeyed) {
  Rng a(7, {1, 2});
  Rng b(7, {1, 2});
  Rng c(7, {2, 1});
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    EXPECT_EQ(x, b());
    differs |= x != c();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, DistributionsStayInRangeWithSaneMoments) {
  Rng rng(11, {0});
  double sum = 0.0;
  double sum_sq = 0.0;
  constexpr int kDraws = 200000;
  for (int i = 0; i < kDraws; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(rng.below(17), 17u);
    const double z = rng.normal();
    sum += z;
    sum_sq += z * z;
  }
  EXPECT_NEAR(sum / kDraws, 0.0, 0.01);
  EXPECT_NEAR(sum_sq / kDraws, 1.0, 0.02);

  double poisson_sum = 0.0;
  for (int i = 0; i < 50000; ++i) poisson_sum += rng.poisson(3.5);
  EXPECT_NEAR(poisson_sum / 50000.0, 3.5, 0.05);
}

TEST(Rng, SampleWithoutReplacementIsDistinct) {
  std::vector<int> items(100);
  for (int i = 0; i < 100; ++i) items[i] = i;
  Rng rng(3, {});
  const auto picked = sample_without_replacement(items, 30, rng);
  EXPECT_EQ(picked.size(), 30u);
  EXPECT_EQ(std::set<int>(picked.begin(), picked.end()).size(), 30u);
  auto shuffled = items;
  shuffle(shuffled, rng);
  std::sort(shuffled.begin(), shuffled.end());
  EXPECT_EQ(shuffled, items);
}

TEST(Io, FormatDoubleIsFixedPrecision) {
  EXPECT_EQ(format_double(0.5), "0.500000");
  EXPECT_EQ(format_double(1.0 / 3.0, 3), "0.333");
}

TEST(Io, CsvReaderChecksHeaderAndReportsLines) {
  const auto dir = temp_dir("csv");
  {
    std::ofstream out(dir / "a.csv");
    out << "x,y\n1,2\n3,oops\n";
  }
  CsvReader reader(dir / "a.csv", "x,y");
  std::vector<std::string_view> fields;
  ASSERT_TRUE(reader.next(fields));
  EXPECT_EQ(parse_field<int>(reader, fields[1], "y"), 2);
  ASSERT_TRUE(reader.next(fields));
  try {
    (void)parse_field<int>(reader, fields[1], "y");
    FAIL() << "expected a parse error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::parse_error);
    EXPECT_NE(std::string(e.what()).find(":3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(CsvReader(dir / "a.csv", "x,z"), Error);
}

TEST(Parallel, VisitsEveryIndexOnceForAnyThreadCount) {
  for (std::size_t threads : {1u, 2u, 5u}) {
    set_thread_count(threads);
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits) EXPECT_EQ(h.load(), 1);
  }
  set_thread_count(0);
}
