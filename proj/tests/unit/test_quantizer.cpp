#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <numeric>

#include "gesturekit/codebook.hpp"
#include "gesturekit/error.hpp"
#include "gesturekit/error_model.hpp"
#include "gesturekit/quantizer.hpp"
#include "test_support.hpp"

using namespace gesturekit;
using Big = boost::multiprecision::cpp_dec_float_50;

namespace {

// Codewords at (1,0,0) and (-3,0,0): distances 1 and 3 from the origin.
Codebook two_point_codebook() {
  return Codebook({{1, 0, 0}, {-3, 0, 0}}, CodebookShape::kElliptical, {-1, 0, 0}, {2, 1, 1});
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

TEST(InverseDistance, MatchesHandComputedWeights) {
  const auto p = codeword_probabilities_inverse_distance({0, 0, 0}, two_point_codebook());
  ASSERT_EQ(p.size(), 2u);
  EXPECT_NEAR(p[0], 0.75, 1e-15);
  EXPECT_NEAR(p[1], 0.25, 1e-15);
}

TEST(InverseDistance, CoincidentSampleIsAPointMass) {
  const auto p = codeword_probabilities_inverse_distance({-3, 0, 0}, two_point_codebook());
  EXPECT_EQ(p, (std::vector<double>{0.0, 1.0}));
}

TEST(InverseDistance, SumsToOneOnRandomInputs) {
  Rng rng(11);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<Vec3> pts{{0, 0, -1}, {0.3, 0.1, -0.9}, {1.1, -0.2, -1.2}, {0.5, 0.5, 0.5}};
  std::vector<Trace> traces{testkit::make_trace(pts)};
  const auto cb = build_elliptical_codebook(traces);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 s{n(rng), n(rng), n(rng)};
    EXPECT_NEAR(sum(codeword_probabilities_inverse_distance(s, cb)), 1.0, 1e-12);
  }
}

// Independent evaluation of the per-axis Gaussian formula in 50-digit decimal,
// computing densities directly instead of in log space.
TEST(AxisGaussian, MatchesMultiprecisionOracle) {
  Rng rng(5);
  std::uniform_real_distribution<double> off(-0.3, 0.3), sd(0.02, 0.4);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + trial % 7;
    std::vector<Vec3> offsets(n);
    std::vector<AxisGaussian> params(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (int k = 0; k < 3; ++k) {
        offsets[i][k] = off(rng);
        params[i].mean[k] = off(rng) / 3.0;
        params[i].stddev[k] = sd(rng);
      }
    }
    const auto p = axis_gaussian_distribution(offsets, params);

    std::vector<Big> dens(n);
    Big total = 0;
    const Big two_pi = 2 * boost::math::constants::pi<Big>();
    for (std::size_t i = 0; i < n; ++i) {
      Big var_product = 1, expo = 0;
      for (int k = 0; k < 3; ++k) {
        const Big s = params[i].stddev[k];
        const Big z = Big(offsets[i][k]) - Big(params[i].mean[k]);
        var_product *= s * s;
        expo -= z * z / (2 * s * s);
      }
      dens[i] = exp(expo) / sqrt(two_pi * var_product);
      total += dens[i];
    }
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double want = static_cast<double>(dens[i] / total);
      EXPECT_NEAR(p[i], want, 1e-13 + 1e-12 * want);
      s += p[i];
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(AxisGaussian, FarOffsetsDoNotUnderflowToNan) {
  std::vector<Vec3> offsets{{40, 0, 0}, {45, 0, 0}};
  std::vector<AxisGaussian> params(2, AxisGaussian{{0, 0, 0}, {0.01, 0.01, 0.01}});
  const auto p = axis_gaussian_distribution(offsets, params);
  EXPECT_DOUBLE_EQ(p[0], 1.0);
  EXPECT_DOUBLE_EQ(p[1], 0.0);
}

TEST(AxisGaussian, SigmaIsFloored) {
  std::vector<Vec3> offsets{{0, 0, 0}, {0, 0, 0}};
  std::vector<AxisGaussian> params{AxisGaussian{{0, 0, 0}, {0, 0, 0}}, AxisGaussian{{0, 0, 0}, {kSigmaFloor, kSigmaFloor, kSigmaFloor}}};
  const auto p = axis_gaussian_distribution(offsets, params);
  // Both collapse to the floor; the remaining gap is rounding in the log-space normalization.
  EXPECT_NEAR(p[0], 0.5, 1e-14);
}

TEST(AxisGaussian, MismatchedSizesThrow) {
  std::vector<Vec3> offsets(2);
  std::vector<AxisGaussian> params(3);
  EXPECT_THROW(axis_gaussian_distribution(offsets, params), ValidationError);
}

TEST(GmmQuantizer, UsesTheBandChosenByOffsetMagnitude) {
  // One codeword whose magnitude mixture has bands at 0.1 and 1.0: offsets
  // below the 0.55 midpoint use the tight axis model, above it the wide one.
  CodewordErrorModel m;
  m.magnitude.components = {{0.5, 0.1, 0.05}, {0.5, 1.0, 0.2}};
  m.band_axis = {AxisGaussian{{0, 0, 0}, {0.05, 0.05, 0.05}}, AxisGaussian{{0, 0, 0}, {0.7, 0.7, 0.7}}};
  m.axis = m.band_axis[0];
  m.residual_count = 100;
  GmmErrorModel model({m, m}, m);
  EXPECT_EQ(&model.params_for(0, {0.5, 0, 0}), &model.codewords()[0].band_axis[0]);
  EXPECT_EQ(&model.params_for(0, {0.55, 0, 0}), &model.codewords()[0].band_axis[1]);

  const auto cb = two_point_codebook();
  const Vec3 sample{0.6, 0, 0};  // offsets 0.4 (tight band) and 3.6 (wide band)
  const auto p = codeword_probabilities_gmm(sample, cb, model);
  std::vector<Vec3> offsets{sample - cb[0], sample - cb[1]};
  std::vector<AxisGaussian> params{m.band_axis[0], m.band_axis[1]};
  EXPECT_EQ(p, axis_gaussian_distribution(offsets, params));
}

TEST(GmmQuantizer, RequiresAnErrorModel) {
  const auto tr = testkit::make_trace({{0, 0, 0}, {0, 0, 0}});
  EXPECT_THROW(trace_distributions(tr, two_point_codebook(), QuantizerKind::kStatisticalGmm, nullptr),
               ValidationError);
}

TEST(Sampler, MonteCarloFrequenciesMatchAnalyticProbabilities) {
  std::vector<Vec3> pts(4, Vec3{0, 0, 0});
  const auto tr = testkit::make_trace(pts);
  const auto dists = trace_distributions(tr, two_point_codebook(), QuantizerKind::kStatisticalRandom, nullptr);
  SequenceSampler sampler(dists);
  Rng rng(2024);
  std::size_t zeros = 0, total = 0;
  SymbolSequence seq;
  for (int i = 0; i < 25000; ++i) {
    sampler.draw(rng, seq);
    for (auto s : seq) zeros += s == 0;
    total += seq.size();
  }
  ASSERT_EQ(total, 100000u);
  EXPECT_NEAR(double(zeros) / double(total), 0.75, 0.01);
}

TEST(Deterministic, QuantizesToNearest) {
  const auto tr = testkit::make_trace({{0.9, 0, 0}, {-2, 0, 0}, {-1.01, 0, 0}});
  EXPECT_EQ(quantize_deterministic(tr, two_point_codebook()), (SymbolSequence{0, 1, 1}));
  EXPECT_EQ(sample_observation_sequence(tr, two_point_codebook(), QuantizerKind::kDeterministicElliptical, nullptr, 99),
            (SymbolSequence{0, 1, 1}));
}

TEST(Deterministic, SmoothingIsACenteredWindowOfThree) {
  const auto tr = testkit::make_trace({{0, 0, 0}, {3, 0, 0}, {0, 0, 0}, {0, 0, 0}});
  const auto pts = prepare_points(tr, {.smooth = true});
  EXPECT_DOUBLE_EQ(pts[0][0], 1.5);
  EXPECT_DOUBLE_EQ(pts[1][0], 1.0);
  EXPECT_DOUBLE_EQ(pts[2][0], 1.0);
  EXPECT_DOUBLE_EQ(pts[3][0], 0.0);
}

TEST(QuantizerKind, NamesRoundTrip) {
  for (auto k : {QuantizerKind::kDeterministicSpherical, QuantizerKind::kDeterministicElliptical,
                 QuantizerKind::kStatisticalGmm, QuantizerKind::kStatisticalRandom}) {
    EXPECT_EQ(quantizer_kind_from_string(to_string(k)), k);
  }
  EXPECT_THROW(quantizer_kind_from_string("fuzzy"), ValidationError);
}
