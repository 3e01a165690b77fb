#include "ocm3d/grid_io.hpp"

#include <gtest/gtest.h>

#include <cstring>

#include "generators.hpp"
#include "ocm3d/errors.hpp"

namespace ocm3d {
namespace {

VoxelGrid SampleGrid() {
  gen::Rng rng(41);
  const RoiPointCloud cloud = gen::RandomCloud(rng, 200, false);
  return Voxelize(cloud, PointAwareGrid(cloud.points, {4, 3, 5}));
}

TEST(VoxelGridContainer, HeaderLayout) {
  const auto bytes = EncodeVoxelGrid(SampleGrid());
  ASSERT_GE(bytes.size(), 20u);
  EXPECT_EQ(std::memcmp(bytes.data(), "OCMV", 4), 0);
  EXPECT_EQ(bytes[4], kGridFormatVersion);
  EXPECT_EQ(bytes[5], 1);  // point-aware
  EXPECT_EQ(bytes[8], 4);  // nx, little-endian
  EXPECT_EQ(bytes[12], 3);
  EXPECT_EQ(bytes[16], 5);
  const std::size_t cells = 60;
  EXPECT_EQ(bytes.size(), 20 + 8 * (5 + 4 + 6) + cells * 3 * 4 + cells * 4 + 8);
}

TEST(VoxelGridContainer, RoundTrip) {
  const VoxelGrid g = SampleGrid();
  const VoxelGrid back = DecodeVoxelGrid(EncodeVoxelGrid(g));
  EXPECT_EQ(back.spec.boundaries, g.spec.boundaries);
  EXPECT_EQ(back.spec.mode, g.spec.mode);
  EXPECT_EQ(back.counts, g.counts);
  EXPECT_EQ(back.out_of_range, g.out_of_range);
  ASSERT_EQ(back.features.size(), g.features.size());
  for (std::size_t i = 0; i < g.features.size(); ++i) {
    EXPECT_NEAR(back.features[i], g.features[i], 1e-7);
  }
  EXPECT_EQ(EncodeVoxelGrid(back), EncodeVoxelGrid(g));
}

TEST(HeatmapContainer, RoundTripAndMagic) {
  const VoxelGrid g = SampleGrid();
  const Heatmap3D hm = HeatmapTarget(g.spec, g.spec.CellCenter({1, 1, 1}));
  const auto bytes = EncodeHeatmap(hm);
  EXPECT_EQ(std::memcmp(bytes.data(), "OCMH", 4), 0);
  const Heatmap3D back = DecodeHeatmap(bytes);
  EXPECT_EQ(back.spec.boundaries, hm.spec.boundaries);
  ASSERT_EQ(back.scores.size(), hm.scores.size());
  EXPECT_EQ(back.at({1, 1, 1}), 1.0f);
  EXPECT_THROW(DecodeVoxelGrid(bytes), FormatError);
}

TEST(Containers, CorruptInput) {
  auto bytes = EncodeVoxelGrid(SampleGrid());
  auto truncated = bytes;
  truncated.resize(truncated.size() - 3);
  EXPECT_THROW(DecodeVoxelGrid(truncated), FormatError);
  auto versioned = bytes;
  versioned[4] = 9;
  EXPECT_THROW(DecodeVoxelGrid(versioned), FormatError);
  auto trailing = bytes;
  trailing.push_back(0);
  EXPECT_THROW(DecodeVoxelGrid(trailing), FormatError);
  EXPECT_THROW(DecodeHeatmap(std::vector<std::uint8_t>{}), FormatError);
}

TEST(Summary, MentionsOccupancyAndBoundaries) {
  const std::string s = SummarizeVoxelGrid(SampleGrid());
  EXPECT_NE(s.find("occupancy"), std::string::npos);
  EXPECT_NE(s.find("x:"), std::string::npos);
}

}  // namespace
}  // namespace ocm3d
