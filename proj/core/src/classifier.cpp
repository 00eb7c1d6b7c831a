#include "gesturekit/classifier.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "gesturekit/error.hpp"
#include "numeric.hpp"

namespace gesturekit {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::vector<double> effective_priors(std::span<const GestureModel> models, const ClassifierConfig& cfg) {
  if (cfg.priors) return *cfg.priors;
  return priors_of(models);
}

std::size_t argmax_lowest(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

// One joint draw = one sampled observation sequence per gesture, each from that
// gesture's own codebook and quantizer with its own RNG stream.
class JointSampler {
 public:
  JointSampler(const Trace& trace, std::span<const GestureModel> models, const ClassifierConfig& cfg,
               std::uint64_t seed)
      : priors_(effective_priors(models, cfg)) {
    const std::size_t n = models.size();
    samplers_.reserve(n);
    evaluators_.reserve(n);
    rngs_.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
      const auto dists =
          trace_distributions(trace, *models[j].codebook, cfg.quantizer, &models[j].error_model, cfg.quantize);
      samplers_.emplace_back(dists);
      evaluators_.emplace_back(models[j].hmm);
      rngs_.push_back(make_rng(seed, j));
    }
    buffer_.resize(n);
    ll_.resize(n);
  }

  std::size_t size() const { return samplers_.size(); }

  // Appends count draws: the winner index and the running posterior sums.
  void draw(std::size_t count, std::vector<std::uint32_t>& winners, std::vector<double>& posterior_sums,
            bool& degenerate) {
    for (std::size_t s = 0; s < count; ++s) {
      for (std::size_t j = 0; j < size(); ++j) {
        samplers_[j].draw(rngs_[j], buffer_[j]);
        ll_[j] = evaluators_[j].log_likelihood(buffer_[j]);
      }
      const auto post = posterior_from_log_likelihoods(ll_, priors_);
      degenerate = degenerate || post.degenerate;
      for (std::size_t j = 0; j < size(); ++j) posterior_sums[j] += post.posterior[j];
      winners.push_back(static_cast<std::uint32_t>(argmax_lowest(post.posterior)));
    }
  }

 private:
  std::vector<double> priors_;
  std::vector<SequenceSampler> samplers_;
  std::vector<LikelihoodEvaluator> evaluators_;
  std::vector<Rng> rngs_;
  std::vector<SymbolSequence> buffer_;
  std::vector<double> ll_;
};

std::vector<std::uint8_t> events_for(std::span<const std::uint32_t> winners, std::size_t gesture) {
  std::vector<std::uint8_t> out(winners.size());
  for (std::size_t s = 0; s < winners.size(); ++s) out[s] = winners[s] == gesture ? 1 : 0;
  return out;
}

std::size_t count_wins(std::span<const std::uint32_t> winners, std::size_t gesture) {
  return static_cast<std::size_t>(std::count(winners.begin(), winners.end(), static_cast<std::uint32_t>(gesture)));
}

// Among the given gestures, the one whose test clears the highest threshold on
// the full stream; ties by total wins, then lowest index.
std::size_t strongest(std::span<const std::uint32_t> winners, std::span<const std::size_t> gestures,
                      const HypothesisConfig& hypothesis) {
  std::size_t best = gestures.front();
  double best_level = -std::numeric_limits<double>::infinity();
  std::size_t best_wins = 0;
  for (std::size_t g : gestures) {
    const auto events = events_for(winners, g);
    const double level = acceptance_level(events, hypothesis);
    const std::size_t wins = count_wins(winners, g);
    if (level > best_level || (level == best_level && wins > best_wins)) {
      best = g;
      best_level = level;
      best_wins = wins;
    }
  }
  return best;
}

HypothesisConfig with_threshold(HypothesisConfig h, double thr) {
  h.prob = thr;
  return h;
}

void fill_estimates(ClassificationResult& result, std::span<const GestureModel> models,
                    std::span<const std::uint32_t> winners, std::span<const double> posterior_sums,
                    std::span<const std::size_t> samples, std::span<const std::uint8_t> passed) {
  result.gestures.resize(models.size());
  const double n = static_cast<double>(winners.size());
  for (std::size_t g = 0; g < models.size(); ++g) {
    auto& e = result.gestures[g];
    e.label = models[g].label;
    e.samples = samples[g];
    e.passed = passed[g] != 0;
    if (samples[g] > 0) {
      e.probability = static_cast<double>(count_wins(winners.first(samples[g]), g)) / static_cast<double>(samples[g]);
    }
    e.mean_posterior = n > 0 ? std::clamp(posterior_sums[g] / n, 0.0, 1.0) : 0.0;
  }
}

}  // namespace

void validate(const ClassifierConfig& cfg, std::size_t n_models) {
  if (!(cfg.thr > 0.0 && cfg.thr < 1.0)) throw ValidationError("thr must lie in (0, 1)");
  validate(with_threshold(cfg.hypothesis, cfg.thr));
  if (cfg.priors) {
    if (cfg.priors->size() != n_models) throw ValidationError("need one prior per gesture");
    double total = 0.0;
    for (double p : *cfg.priors) {
      if (!(p >= 0.0) || !std::isfinite(p)) throw ValidationError("priors must be non-negative");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ValidationError("priors must sum to 1");
  }
}

PosteriorResult posterior_from_log_likelihoods(std::span<const double> log_likelihoods, std::span<const double> priors) {
  if (log_likelihoods.size() != priors.size() || priors.empty()) {
    throw ValidationError("need one prior per likelihood");
  }
  const std::size_t n = priors.size();
  std::vector<double> joint(n);
  for (std::size_t k = 0; k < n; ++k) {
    joint[k] = priors[k] > 0.0 ? std::log(priors[k]) + log_likelihoods[k] : -std::numeric_limits<double>::infinity();
  }
  const double norm = log_sum_exp(joint);
  PosteriorResult r;
  if (!std::isfinite(norm)) {
    r.posterior.assign(n, 1.0 / static_cast<double>(n));
    r.degenerate = true;
    return r;
  }
  r.posterior.resize(n);
  for (std::size_t k = 0; k < n; ++k) r.posterior[k] = std::exp(joint[k] - norm);
  return r;
}

PosteriorResult gesture_posteriors(std::span<const GestureModel> models, std::span<const SymbolSequence> observations,
                                   std::span<const double> priors) {
  if (observations.size() != models.size()) throw ValidationError("need one observation sequence per gesture");
  std::vector<double> ll(models.size());
  for (std::size_t j = 0; j < models.size(); ++j) {
    check_observations(models[j].hmm, observations[j]);
    ll[j] = log_likelihood(models[j].hmm, observations[j]);
  }
  return posterior_from_log_likelihoods(ll, priors);
}

double posterior(std::span<const GestureModel> models, std::size_t k, std::span<const SymbolSequence> observations) {
  if (k >= models.size()) throw ValidationError("gesture index out of range");
  const auto priors = priors_of(models);
  return gesture_posteriors(models, observations, priors).posterior[k];
}

ClassificationResult classify_deterministic(const Trace& trace, std::span<const GestureModel> models,
                                            const ClassifierConfig& cfg) {
  if (models.empty()) throw ValidationError("model set is empty");
  const auto start = Clock::now();
  const auto priors = effective_priors(models, cfg);
  std::vector<double> ll(models.size());
  // Shared codebooks quantize once.
  const Codebook* last = nullptr;
  SymbolSequence obs;
  for (std::size_t j = 0; j < models.size(); ++j) {
    if (models[j].codebook.get() != last) {
      obs = quantize_deterministic(trace, *models[j].codebook, cfg.quantize);
      last = models[j].codebook.get();
    }
    ll[j] = LikelihoodEvaluator(models[j].hmm).log_likelihood(obs);
  }
  const auto post = posterior_from_log_likelihoods(ll, priors);
  const std::size_t best = argmax_lowest(post.posterior);

  ClassificationResult r;
  r.decision = best;
  r.label = models[best].label;
  r.samples_used = 1;
  r.degenerate = post.degenerate;
  r.gestures.resize(models.size());
  for (std::size_t g = 0; g < models.size(); ++g) {
    r.gestures[g] = {models[g].label, g == best ? 1.0 : 0.0, post.posterior[g], 1, g == best};
  }
  r.elapsed_ms = ms_since(start);
  return r;
}

ClassificationResult classify_statistical(const Trace& trace, std::span<const GestureModel> models,
                                          const ClassifierConfig& cfg, std::uint64_t seed) {
  if (models.empty()) throw ValidationError("model set is empty");
  if (!is_statistical(cfg.quantizer)) throw ValidationError("classify_statistical needs a statistical quantizer");
  validate(cfg, models.size());
  const auto start = Clock::now();
  const auto hypothesis = with_threshold(cfg.hypothesis, cfg.thr);
  const std::size_t n = models.size();

  JointSampler sampler(trace, models, cfg, seed);
  std::vector<std::uint32_t> winners;
  winners.reserve(hypothesis.max_samples);
  std::vector<double> posterior_sums(n, 0.0);
  bool degenerate = false;

  std::vector<SequentialTest> tests(n, SequentialTest(cfg.thr, hypothesis));
  std::size_t drawn = 0;
  auto all_decided = [&] {
    return std::all_of(tests.begin(), tests.end(), [](const SequentialTest& t) { return t.decided(); });
  };
  while (!all_decided()) {
    const std::size_t step = std::min(hypothesis.batch, hypothesis.max_samples - drawn);
    sampler.draw(step, winners, posterior_sums, degenerate);
    for (std::size_t g = 0; g < n; ++g) {
      if (tests[g].decided()) continue;
      const auto batch = std::span<const std::uint32_t>(winners).subspan(drawn, step);
      tests[g].observe(count_wins(batch, g), step);
    }
    drawn += step;
  }

  std::vector<std::size_t> passers;
  std::vector<std::uint8_t> passed(n);
  std::vector<std::size_t> samples(n);
  for (std::size_t g = 0; g < n; ++g) {
    passed[g] = tests[g].result();
    samples[g] = tests[g].samples();
    if (passed[g]) passers.push_back(g);
  }

  ClassificationResult r;
  if (passers.size() == 1) {
    r.decision = passers.front();
  } else if (passers.size() > 1) {
    // Rank candidates on the full stream so the live decision matches replay.
    sampler.draw(hypothesis.max_samples - winners.size(), winners, posterior_sums, degenerate);
    r.decision = strongest(winners, passers, hypothesis);
  }
  if (r.decision) r.label = models[*r.decision].label;
  r.samples_used = winners.size();
  r.degenerate = degenerate;
  fill_estimates(r, models, winners, posterior_sums, samples, passed);
  r.elapsed_ms = ms_since(start);
  return r;
}

ClassificationResult classify(const Trace& trace, std::span<const GestureModel> models, const ClassifierConfig& cfg,
                              std::uint64_t seed) {
  if (is_statistical(cfg.quantizer)) return classify_statistical(trace, models, cfg, seed);
  return classify_deterministic(trace, models, cfg);
}

SampleRecord record_samples(const Trace& trace, std::span<const GestureModel> models, const ClassifierConfig& cfg,
                            std::uint64_t seed) {
  if (models.empty()) throw ValidationError("model set is empty");
  if (!is_statistical(cfg.quantizer)) throw ValidationError("record_samples needs a statistical quantizer");
  validate(cfg, models.size());
  JointSampler sampler(trace, models, cfg, seed);
  SampleRecord rec;
  rec.posterior_sums.assign(models.size(), 0.0);
  rec.winners.reserve(cfg.hypothesis.max_samples);
  sampler.draw(cfg.hypothesis.max_samples, rec.winners, rec.posterior_sums, rec.degenerate);
  return rec;
}

ClassificationResult replay(const SampleRecord& record, std::span<const GestureModel> models, double thr,
                            const HypothesisConfig& hypothesis_in) {
  const auto hypothesis = with_threshold(hypothesis_in, thr);
  validate(hypothesis);
  const std::size_t n = models.size();
  if (record.posterior_sums.size() != n) throw ValidationError("sample record does not match the model set");
  std::vector<std::size_t> passers;
  std::vector<std::uint8_t> passed(n);
  std::vector<std::size_t> samples(n);
  std::size_t used = 0;
  for (std::size_t g = 0; g < n; ++g) {
    const auto events = events_for(record.winners, g);
    const auto res = sequential_test(events, thr, hypothesis);
    passed[g] = res.decision;
    samples[g] = res.samples;
    used = std::max(used, res.samples);
    if (res.decision) passers.push_back(g);
  }
  ClassificationResult r;
  if (passers.size() == 1) {
    r.decision = passers.front();
  } else if (passers.size() > 1) {
    r.decision = strongest(record.winners, passers, hypothesis);
    used = record.winners.size();
  }
  if (r.decision) r.label = models[*r.decision].label;
  r.samples_used = used;
  r.degenerate = record.degenerate;
  // Posterior means are over the whole record here, not the consumed prefix.
  fill_estimates(r, models, record.winners, record.posterior_sums, samples, passed);
  return r;
}

std::string classification_to_json(const ClassificationResult& result) {
  using nlohmann::json;
  json gestures = json::array();
  for (const auto& g : result.gestures) {
    gestures.push_back({{"label", g.label},
                        {"probability", g.probability},
                        {"mean_posterior", g.mean_posterior},
                        {"samples", g.samples},
                        {"passed", g.passed}});
  }
  json j = {{"decision", result.label ? json(*result.label) : json(nullptr)},
            {"decision_index", result.decision ? json(*result.decision) : json(nullptr)},
            {"gestures", std::move(gestures)},
            {"samples_used", result.samples_used},
            {"elapsed_ms", result.elapsed_ms},
            {"degenerate", result.degenerate}};
  return j.dump();
}

}  // namespace gesturekit
