#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <json.hpp>
#include <limits>

#include "gesturekit/classifier.hpp"
#include "gesturekit/error.hpp"
#include "gesturekit/training.hpp"
#include "test_support.hpp"

using namespace gesturekit;

namespace {
ClassifierConfig deterministic(QuantizerKind kind) {
  ClassifierConfig c;
  c.quantizer = kind;
  return c;
}
}  // namespace
using Big = boost::multiprecision::cpp_dec_float_50;

namespace {

struct Trained {
  Dataset data;
  std::vector<GestureModel> models;
};

const Trained& trained() {
  static const Trained t = [] {
    Trained out;
    out.data = testkit::small_dataset(3, 8, 21);
    TrainingConfig cfg;
    cfg.n_states = 5;
    cfg.max_iters = 30;
    cfg.seed = 2;
    out.models = train_all(out.data, cfg).models;
    return out;
  }();
  return t;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

TEST(Posterior, MatchesMultiprecisionBayes) {
  const std::vector<double> ll{-10.0, -12.0, -14.0};
  for (const auto& priors : {std::vector<double>{1.0 / 3, 1.0 / 3, 1.0 / 3}, std::vector<double>{0.5, 0.3, 0.2}}) {
    const auto r = posterior_from_log_likelihoods(ll, priors);
    Big total = 0;
    std::vector<Big> joint;
    for (std::size_t i = 0; i < 3; ++i) {
      joint.push_back(Big(priors[i]) * exp(Big(ll[i])));
      total += joint.back();
    }
    double s = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      EXPECT_NEAR(r.posterior[i], static_cast<double>(joint[i] / total), 1e-15);
      s += r.posterior[i];
    }
    EXPECT_NEAR(s, 1.0, 1e-15);
    EXPECT_FALSE(r.degenerate);
  }
  // Uniform priors: e^{-2k} / (1 + e^{-2} + e^{-4}); first term ~0.8668.
  const auto u = posterior_from_log_likelihoods(ll, std::vector<double>(3, 1.0 / 3));
  EXPECT_NEAR(u.posterior[0], 1.0 / (1.0 + std::exp(-2.0) + std::exp(-4.0)), 1e-15);
}

TEST(Posterior, HugeNegativeLikelihoodsStayFinite) {
  const std::vector<double> ll{-50000.0, -50001.0};
  const auto r = posterior_from_log_likelihoods(ll, std::vector<double>{0.5, 0.5});
  // The difference of two numbers near 5e4 only carries ~1e-11 absolute precision.
  EXPECT_NEAR(r.posterior[0], 1.0 / (1.0 + std::exp(-1.0)), 1e-11);
}

TEST(Posterior, ImpossibleEverywhereFallsBackToUniform) {
  const std::vector<double> ll{-kInf, -kInf, -kInf, -kInf};
  const auto r = posterior_from_log_likelihoods(ll, std::vector<double>(4, 0.25));
  EXPECT_TRUE(r.degenerate);
  for (double p : r.posterior) EXPECT_DOUBLE_EQ(p, 0.25);

  const std::vector<double> one{-kInf, -3.0};
  const auto s = posterior_from_log_likelihoods(one, std::vector<double>{0.5, 0.5});
  EXPECT_FALSE(s.degenerate);
  EXPECT_EQ(s.posterior, (std::vector<double>{0.0, 1.0}));
}

TEST(Classifier, ConfigIsValidated) {
  ClassifierConfig cfg;
  cfg.thr = 0.0;
  EXPECT_THROW(validate(cfg, 3), ValidationError);
  cfg.thr = 1.0;
  EXPECT_THROW(validate(cfg, 3), ValidationError);
  cfg.thr = 0.5;
  cfg.priors = std::vector<double>{0.5, 0.5};
  EXPECT_THROW(validate(cfg, 3), ValidationError);
  cfg.priors = std::vector<double>{0.5, 0.25, 0.25};
  EXPECT_NO_THROW(validate(cfg, 3));
}

TEST(Classifier, DeterministicRecognizesTrainingTraces) {
  const auto& t = trained();
  std::size_t right = 0;
  for (const auto& tr : t.data.traces()) {
    const auto r = classify_deterministic(tr, t.models, deterministic(QuantizerKind::kDeterministicElliptical));
    ASSERT_TRUE(r.decision.has_value());
    right += *r.label == *tr.label();
  }
  EXPECT_GE(right, t.data.size() - 1);
}

TEST(Classifier, StatisticalEqualsReplayOfItsStream) {
  const auto& t = trained();
  for (double thr : {0.2, 0.5, 0.8, 0.95}) {
    ClassifierConfig cfg;
    cfg.thr = thr;
    for (std::size_t i = 0; i < t.data.size(); i += 3) {
      const auto& tr = t.data.traces()[i];
      const auto live = classify_statistical(tr, t.models, cfg, 100 + i);
      const auto rec = record_samples(tr, t.models, cfg, 100 + i);
      EXPECT_EQ(rec.winners.size(), cfg.hypothesis.max_samples);
      const auto again = replay(rec, t.models, thr, cfg.hypothesis);
      EXPECT_EQ(live.decision, again.decision);
      EXPECT_EQ(live.samples_used, again.samples_used);
      ASSERT_EQ(live.gestures.size(), again.gestures.size());
      for (std::size_t g = 0; g < live.gestures.size(); ++g) {
        EXPECT_EQ(live.gestures[g].probability, again.gestures[g].probability);
        EXPECT_EQ(live.gestures[g].passed, again.gestures[g].passed);
      }
    }
  }
}

TEST(Classifier, SameSeedSameAnswer) {
  const auto& t = trained();
  ClassifierConfig cfg;
  const auto& tr = t.data.traces()[4];
  const auto a = classify(tr, t.models, cfg, 7);
  const auto b = classify(tr, t.models, cfg, 7);
  EXPECT_EQ(a.decision, b.decision);
  EXPECT_EQ(a.samples_used, b.samples_used);
  for (std::size_t g = 0; g < a.gestures.size(); ++g) EXPECT_EQ(a.gestures[g].mean_posterior, b.gestures[g].mean_posterior);
}

TEST(Classifier, EstimatesAreProbabilities) {
  const auto& t = trained();
  const auto r = classify(t.data.traces()[0], t.models, {}, 3);
  double s = 0.0;
  for (const auto& g : r.gestures) {
    EXPECT_GE(g.probability, 0.0);
    EXPECT_LE(g.probability, 1.0);
    s += g.mean_posterior;
  }
  // Gestures consume different sample counts, so only bound the sum.
  EXPECT_GT(s, 0.0);
  EXPECT_LT(s, 3.0);
}

TEST(Classifier, HighThresholdAbstainsAndSerializesNull) {
  ClassificationResult r;
  r.gestures = {{"a", 0.6, 0.55, 100, false}, {"b", 0.4, 0.45, 100, false}};
  r.samples_used = 100;
  const auto j = nlohmann::json::parse(classification_to_json(r));
  EXPECT_TRUE(j["decision"].is_null());
  EXPECT_EQ(j["gestures"].size(), 2u);
  EXPECT_EQ(j["gestures"][0]["label"], "a");

  // An ambiguous input: the two models were trained on the same movement.
  TrainingConfig tc;
  tc.n_states = 5;
  tc.seed = 1;
  const auto twins = train_all(testkit::twin_dataset(8, 4), tc).models;
  ClassifierConfig cfg;
  cfg.thr = 0.99;
  const auto query = testkit::twin_dataset(1, 99).traces()[0];
  const auto res = classify(query, twins, cfg, 1);
  EXPECT_FALSE(res.decision.has_value());
  EXPECT_TRUE(nlohmann::json::parse(classification_to_json(res))["decision"].is_null());
}

TEST(Classifier, PriorsShiftThePosterior) {
  const auto& t = trained();
  std::vector<SymbolSequence> obs;
  for (const auto& m : t.models) obs.push_back(quantize_deterministic(t.data.traces()[0], *m.codebook));
  // Only a short prefix, so the posterior is not saturated.
  for (auto& o : obs) o.resize(4);
  const auto flat = gesture_posteriors(t.models, obs, std::vector<double>(3, 1.0 / 3));
  const auto tilted = gesture_posteriors(t.models, obs, std::vector<double>{0.01, 0.495, 0.495});
  ASSERT_LT(flat.posterior[0], 1.0);
  EXPECT_LT(tilted.posterior[0], flat.posterior[0]);
  EXPECT_NEAR(posterior(t.models, 0, obs), flat.posterior[0], 1e-12);
}
