#include <gtest/gtest.h>

#include "gesturekit/codebook.hpp"
#include "gesturekit/error_model.hpp"
#include "test_support.hpp"

using namespace gesturekit;

namespace {

Codebook unit_codebook() {
  return Codebook(unit_sphere_template(), CodebookShape::kSpherical, {0, 0, 0}, {1, 1, 1});
}

}  // namespace

TEST(Residuals, AreSignedOffsetsFromTheAssignedCodeword) {
  const auto cb = unit_codebook();
  std::vector<Trace> traces{testkit::make_trace({{1.1, 0, 0}, {0, 0, -0.8}, {0.05, 0.02, -1.0}})};
  const auto r = compute_residuals(traces, cb);
  EXPECT_EQ(r.total(), 3u);
  ASSERT_EQ(r.per_codeword[0].size(), 1u);
  EXPECT_NEAR(r.per_codeword[0][0][0], 0.1, 1e-15);
  ASSERT_EQ(r.per_codeword[5].size(), 2u);  // (0,0,-1)
  EXPECT_NEAR(r.per_codeword[5][0][2], 0.2, 1e-15);
  EXPECT_NEAR(r.per_codeword[5][1][0], 0.05, 1e-15);
  EXPECT_EQ(r.per_timestep.size(), 3u);
}

TEST(AxisStatistics, PopulationMomentsWithFloor) {
  std::vector<Vec3> v{{1, 0, 5}, {3, 0, 5}};
  const auto g = axis_statistics(v);
  EXPECT_DOUBLE_EQ(g.mean[0], 2.0);
  EXPECT_DOUBLE_EQ(g.stddev[0], 1.0);
  EXPECT_DOUBLE_EQ(g.stddev[1], kSigmaFloor);
  EXPECT_DOUBLE_EQ(g.mean[2], 5.0);
}

TEST(ErrorModel, SparseCodewordsInheritTheGlobalFit) {
  const auto cb = unit_codebook();
  Rng rng(1);
  std::normal_distribution<double> n(0.0, 0.05);
  std::vector<Vec3> pts;
  for (int i = 0; i < 200; ++i) pts.push_back({n(rng), n(rng), -1.0 + n(rng)});
  for (int i = 0; i < 3; ++i) pts.push_back({1.0 + n(rng), n(rng), n(rng)});
  std::vector<Trace> traces{testkit::make_trace(pts)};
  const auto m = build_error_model(traces, cb, 7);
  ASSERT_EQ(m.size(), cb.size());
  EXPECT_FALSE(m.codewords()[5].inherited);
  EXPECT_EQ(m.codewords()[5].residual_count, 200u);
  EXPECT_NEAR(m.codewords()[5].axis.stddev[0], 0.05, 0.01);
  EXPECT_TRUE(m.codewords()[0].inherited);
  EXPECT_TRUE(m.codewords()[2].inherited);  // no residuals at all
  EXPECT_EQ(m.codewords()[2].band_axis, m.global().band_axis);
}

TEST(ErrorModel, DeterministicUnderSeed) {
  const auto cb = unit_codebook();
  Rng rng(4);
  std::normal_distribution<double> n(0.0, 0.1);
  std::vector<Vec3> pts;
  for (int i = 0; i < 300; ++i) pts.push_back({n(rng), n(rng), -1.0 + n(rng)});
  std::vector<Trace> traces{testkit::make_trace(pts)};
  EXPECT_EQ(build_error_model(traces, cb, 3), build_error_model(traces, cb, 3));
}
