#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "gesturekit/error.hpp"
#include "gesturekit/hmm.hpp"
#include "test_support.hpp"

using namespace gesturekit;
using gesturekit::testkit::enumerate_likelihood;
using gesturekit::testkit::random_hmm;
using gesturekit::testkit::random_obs;

namespace {

Hmm fixture_hmm() {
  Matrix a(2, 2), b(2, 2);
  a(0, 0) = 0.7, a(0, 1) = 0.3, a(1, 0) = 0.4, a(1, 1) = 0.6;
  b(0, 0) = 0.9, b(0, 1) = 0.1, b(1, 0) = 0.2, b(1, 1) = 0.8;
  return Hmm(a, b, {0.6, 0.4}, Topology::ergodic());
}

}  // namespace

TEST(Hmm, ConstructorValidatesStochasticRows) {
  Matrix a(2, 2, 0.5), b(2, 2, 0.5);
  EXPECT_NO_THROW(Hmm(a, b, {0.5, 0.5}, Topology::ergodic()));
  Matrix bad = a;
  bad(0, 0) = 0.6;
  EXPECT_THROW(Hmm(bad, b, {0.5, 0.5}, Topology::ergodic()), ValidationError);
  EXPECT_THROW(Hmm(a, b, {0.9, 0.5}, Topology::ergodic()), ValidationError);
  // Left-to-right forbids going backwards.
  EXPECT_THROW(Hmm(a, b, {1.0, 0.0}, Topology::left_to_right(1)), ValidationError);
}

TEST(Hmm, ForwardMatchesPathEnumeration) {
  Rng rng(123);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + trial % 3, v = 1 + (trial / 3) % 4, len = 1 + trial % 6;
    const auto hmm = random_hmm(rng, n, v);
    const auto obs = random_obs(rng, len, v);
    const double want = std::log(static_cast<double>(enumerate_likelihood(hmm, obs)));
    EXPECT_NEAR(log_likelihood(hmm, obs), want, 1e-10 * std::abs(want) + 1e-12);
    EXPECT_NEAR(LikelihoodEvaluator(hmm).log_likelihood(obs), want, 1e-10 * std::abs(want) + 1e-12);
  }
}

TEST(Hmm, FixtureLogLikelihood) {
  // Independent value from tests/oracles/em_fixture.py (sum of both sequences).
  const auto hmm = fixture_hmm();
  const double ll = log_likelihood(hmm, SymbolSequence{0, 1, 1, 0}) + log_likelihood(hmm, SymbolSequence{1, 0, 0});
  EXPECT_NEAR(ll, -5.068401252895450018887367, 1e-12);
}

TEST(Hmm, LongSequencesDoNotUnderflow) {
  Rng rng(9);
  const auto hmm = random_hmm(rng, 3, 4);
  const auto obs = random_obs(rng, 5000, 4);
  const double ll = log_likelihood(hmm, obs);
  EXPECT_TRUE(std::isfinite(ll));
  EXPECT_LT(ll, -1000.0);
}

TEST(Hmm, ImpossibleObservationIsMinusInfinity) {
  Matrix a(1, 1, 1.0), b(1, 2);
  b(0, 0) = 1.0;
  const Hmm hmm(a, b, {1.0}, Topology::ergodic());
  EXPECT_EQ(log_likelihood(hmm, SymbolSequence{0, 1}), -std::numeric_limits<double>::infinity());
  EXPECT_EQ(LikelihoodEvaluator(hmm).log_likelihood(SymbolSequence{1}), -std::numeric_limits<double>::infinity());
  EXPECT_THROW(forward_backward(hmm, SymbolSequence{1}), ValidationError);
}

TEST(Hmm, ObservationsAreChecked) {
  const auto hmm = fixture_hmm();
  EXPECT_THROW(log_likelihood(hmm, SymbolSequence{}), ValidationError);
  EXPECT_THROW(log_likelihood(hmm, SymbolSequence{0, 2}), ValidationError);
  EXPECT_THROW(log_likelihood(hmm, SymbolSequence{-1}), ValidationError);
}

TEST(Hmm, PosteriorsMatchEnumeratedMarginals) {
  Rng rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + trial % 2, v = 3, len = 2 + trial % 4;
    const auto hmm = random_hmm(rng, n, v);
    const auto obs = random_obs(rng, len, v);
    // gamma(t, i) by brute force: sum of path weights with state i at t.
    Matrix gamma(len, n);
    long double z = 0.0L;
    std::vector<std::size_t> path(len, 0);
    while (true) {
      long double p = hmm.pi(path[0]) * hmm.b(path[0], obs[0]);
      for (std::size_t t = 1; t < len; ++t) p *= hmm.a(path[t - 1], path[t]) * hmm.b(path[t], obs[t]);
      z += p;
      for (std::size_t t = 0; t < len; ++t) gamma(t, path[t]) += static_cast<double>(p);
      std::size_t t = 0;
      while (t < len && ++path[t] == n) path[t++] = 0;
      if (t == len) break;
    }
    const auto post = forward_backward(hmm, obs);
    for (std::size_t t = 0; t < len; ++t) {
      double row = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        EXPECT_NEAR(post.state(t, i), gamma(t, i) / static_cast<double>(z), 1e-12);
        row += post.state(t, i);
      }
      EXPECT_NEAR(row, 1.0, 1e-12);
    }
    for (std::size_t t = 0; t + 1 < len; ++t) {
      for (std::size_t i = 0; i < n; ++i) {
        double xi_row = 0.0;
        for (std::size_t j = 0; j < n; ++j) xi_row += post.transition[t](i, j);
        EXPECT_NEAR(xi_row, post.state(t, i), 1e-12);
      }
    }
  }
}

TEST(BaumWelch, OneStepMatchesExactRationalUpdate) {
  // Values from tests/oracles/em_fixture.py (exact rationals, path enumeration).
  const auto hmm = fixture_hmm();
  const std::vector<SymbolSequence> seqs{{0, 1, 1, 0}, {1, 0, 0}};
  const auto mask = topology_mask(Topology::ergodic(), 2);
  double ll = 0.0;
  const auto next = baum_welch_step(hmm, mask, seqs, &ll);
  EXPECT_NEAR(ll, -5.068401252895450018887367, 1e-12);
  EXPECT_NEAR(next.pi(0), 0.5063891250341524156203361, 1e-12);
  EXPECT_NEAR(next.pi(1), 0.4936108749658475843796639, 1e-12);
  EXPECT_NEAR(next.a(0, 0), 0.5937257718576541594539689, 1e-12);
  EXPECT_NEAR(next.a(0, 1), 0.4062742281423458405460311, 1e-12);
  EXPECT_NEAR(next.a(1, 0), 0.5228035317453197912800093, 1e-12);
  EXPECT_NEAR(next.a(1, 1), 0.4771964682546802087199907, 1e-12);
  EXPECT_NEAR(next.b(0, 0), 0.8709714623585011329331593, 1e-12);
  EXPECT_NEAR(next.b(0, 1), 0.1290285376414988670668407, 1e-12);
  EXPECT_NEAR(next.b(1, 0), 0.2203870288198371916755041, 1e-12);
  EXPECT_NEAR(next.b(1, 1), 0.7796129711801628083244959, 1e-12);
}

TEST(BaumWelch, LikelihoodNeverDecreases) {
  Rng rng(31);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 2 + trial % 4, v = 2 + trial % 5;
    const auto topo = trial % 2 ? Topology::ergodic() : Topology::left_to_right(2);
    auto init = make_topology(topo, n, v, trial);
    std::vector<SymbolSequence> seqs;
    for (int s = 0; s < 4; ++s) seqs.push_back(random_obs(rng, 8 + s, v));
    const auto res = baum_welch_from(init.hmm, init.mask, seqs, 40, 1e-12);
    const auto& h = res.report.log_likelihood_history;
    ASSERT_GE(h.size(), 2u);
    for (std::size_t i = 1; i < h.size(); ++i) EXPECT_GE(h[i], h[i - 1] - 1e-9) << "trial " << trial << " iter " << i;
  }
}

TEST(BaumWelch, LeftToRightStructureIsPreserved) {
  Rng rng(8);
  std::vector<SymbolSequence> seqs;
  for (int s = 0; s < 5; ++s) seqs.push_back(random_obs(rng, 20, 6));
  TrainConfig cfg;
  cfg.n_states = 6;
  cfg.n_symbols = 6;
  cfg.topology = Topology::left_to_right(2);
  const auto res = baum_welch_train(seqs, cfg);
  const auto& h = res.hmm;
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 6; ++j) {
      if (j < i || j > i + 2) {
        EXPECT_EQ(h.a(i, j), 0.0) << i << "->" << j;
      }
    }
    if (i > 0) {
      EXPECT_EQ(h.pi(i), 0.0);
    }
  }
  EXPECT_EQ(h.pi(0), 1.0);
  // Smoothing keeps every emission strictly positive.
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t k = 0; k < 6; ++k) EXPECT_GT(h.b(i, k), 0.0);
  }
}

TEST(BaumWelch, DeterministicUnderSeed) {
  Rng rng(2);
  std::vector<SymbolSequence> seqs;
  for (int s = 0; s < 3; ++s) seqs.push_back(random_obs(rng, 15, 5));
  TrainConfig cfg;
  cfg.n_states = 4;
  cfg.n_symbols = 5;
  cfg.seed = 42;
  EXPECT_EQ(baum_welch_train(seqs, cfg).hmm, baum_welch_train(seqs, cfg).hmm);
}

TEST(BaumWelch, RejectsBadInput) {
  TrainConfig cfg;
  EXPECT_THROW(baum_welch_train(std::vector<SymbolSequence>{}, cfg), ValidationError);
  EXPECT_THROW(make_topology(Topology::left_to_right(-1), 3, 3, 0), ValidationError);
  EXPECT_THROW(make_topology(Topology::ergodic(), 0, 3, 0), ValidationError);
}

TEST(Hmm, SampledSequencesFollowTheEmissions) {
  Matrix a(1, 1, 1.0), b(1, 3);
  b(0, 0) = 0.2, b(0, 1) = 0.5, b(0, 2) = 0.3;
  const Hmm hmm(a, b, {1.0}, Topology::ergodic());
  Rng rng(5);
  const auto s = sample_sequence(hmm, 100000, rng);
  std::array<double, 3> f{};
  for (auto x : s) f[x] += 1e-5;
  EXPECT_NEAR(f[0], 0.2, 0.01);
  EXPECT_NEAR(f[1], 0.5, 0.01);
  EXPECT_NEAR(f[2], 0.3, 0.01);
}
