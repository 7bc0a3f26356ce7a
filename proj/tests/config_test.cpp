#include "treeloc/config.hpp"

#include <gtest/gtest.h>

#include "treeloc/error.hpp"

namespace treeloc {
namespace {

ErrorKind kind_of(std::string_view json) {
  try {
    parse_config_json(json);
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error for " << json;
  return ErrorKind::kIo;
}

TEST(Config, EmptyObjectGivesDefaults) {
  const auto c = parse_config_json("{}");
  EXPECT_EQ(c.avg_palm_height_m, 6.0);
  EXPECT_EQ(c.avg_other_tree_height_m, 4.0);
  EXPECT_EQ(c.merge_radius_m, 4.0);
  EXPECT_EQ(c.confidence_threshold, 0.0);
  EXPECT_EQ(c.dedup_method, DedupMethod::kRegistered);
}

TEST(Config, OverridesAndRoundTrip) {
  const auto c = parse_config_json(
      R"({"avg_palm_height_m": 9.5, "merge_radius_m": 2, "dedup_method": "radius"})");
  EXPECT_EQ(c.avg_palm_height_m, 9.5);
  EXPECT_EQ(c.merge_radius_m, 2.0);
  EXPECT_EQ(c.dedup_method, DedupMethod::kRadius);
  const auto json = write_config_json(c);
  EXPECT_EQ(write_config_json(parse_config_json(json)), json);
}

TEST(Config, RejectsBadInput) {
  EXPECT_EQ(kind_of(R"({"merge_radius": 4})"), ErrorKind::kConfig);
  EXPECT_EQ(kind_of(R"({"merge_radius_m": -1})"), ErrorKind::kConfig);
  EXPECT_EQ(kind_of(R"({"confidence_threshold": 2})"), ErrorKind::kConfig);
  EXPECT_EQ(kind_of(R"({"dedup_method": "kmeans"})"), ErrorKind::kConfig);
  EXPECT_EQ(kind_of(R"({"avg_palm_height_m": "tall"})"), ErrorKind::kConfig);
  EXPECT_EQ(kind_of("[1, 2]"), ErrorKind::kConfig);
  EXPECT_EQ(kind_of("{"), ErrorKind::kConfig);
}

}  // namespace
}  // namespace treeloc
