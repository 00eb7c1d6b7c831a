#include "gesturekit/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "format.hpp"
#include "gesturekit/error.hpp"

namespace gesturekit {

namespace {

struct ModelSets {
  std::vector<GestureModel> spherical;
  std::vector<GestureModel> elliptical;

  const std::vector<GestureModel>& for_kind(QuantizerKind k) const {
    return uses_spherical_codebook(k) ? spherical : elliptical;
  }
};

ModelSets train_for(const Dataset& train, std::span<const QuantizerKind> kinds, TrainingConfig tc) {
  ModelSets sets;
  const bool need_sph = std::any_of(kinds.begin(), kinds.end(), uses_spherical_codebook);
  const bool need_ell = std::any_of(kinds.begin(), kinds.end(), [](QuantizerKind k) { return !uses_spherical_codebook(k); });
  if (need_sph) {
    tc.quantizer = QuantizerKind::kDeterministicSpherical;
    sets.spherical = train_all(train, tc).models;
  }
  if (need_ell) {
    tc.quantizer = QuantizerKind::kDeterministicElliptical;
    sets.elliptical = train_all(train, tc).models;
  }
  return sets;
}

ClassifierConfig classifier_config(const EvalConfig& cfg, std::size_t n_models) {
  ClassifierConfig cc;
  cc.thr = cfg.thr_one_over_n ? 1.0 / static_cast<double>(n_models) : cfg.thr;
  cc.hypothesis = cfg.hypothesis;
  cc.quantize = cfg.training.error.quantize;
  return cc;
}

Dataset subset(const Dataset& d, std::span<const std::string> labels) {
  std::vector<Trace> out;
  for (const auto& t : d.traces()) {
    if (std::find(labels.begin(), labels.end(), *t.label()) != labels.end()) out.push_back(t);
  }
  return Dataset(std::move(out), d.provenance());
}

nlohmann::json timing_json(const TimingStats& t) {
  return {{"mean_ms", t.mean_ms}, {"p95_ms", t.p95_ms}, {"mean_samples", t.mean_samples},
          {"classifications", t.classifications}};
}

}  // namespace

void validate(const EvalConfig& cfg) {
  if (!(cfg.split_ratio > 0.0 && cfg.split_ratio < 1.0)) throw ValidationError("split ratio must lie in (0, 1)");
  if (cfg.repetitions == 0) throw ValidationError("need at least one repetition");
  if (cfg.kinds.empty()) throw ValidationError("no quantizer kinds to evaluate");
}

std::pair<Dataset, Dataset> split(const Dataset& dataset, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw ValidationError("split ratio must lie in (0, 1)");
  dataset.require_trainable();
  std::vector<Trace> train, test;
  const auto& labels = dataset.labels();
  for (std::size_t g = 0; g < labels.size(); ++g) {
    auto traces = dataset.traces_for(labels[g]);
    Rng rng = make_rng(seed, g);
    std::shuffle(traces.begin(), traces.end(), rng);
    const auto n = traces.size();
    const auto n_train =
        std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(ratio * static_cast<double>(n))), 1, n - 1);
    for (std::size_t i = 0; i < n; ++i) (i < n_train ? train : test).push_back(std::move(traces[i]));
  }
  return {Dataset(std::move(train), dataset.provenance()), Dataset(std::move(test), dataset.provenance())};
}

RunMetrics compute_metrics(std::span<const std::string> labels, std::span<const std::string> truth,
                           std::span<const std::optional<std::string>> predicted) {
  if (truth.size() != predicted.size()) throw ValidationError("truth and prediction counts differ");
  std::map<std::string, std::size_t> index;
  RunMetrics r;
  for (const auto& l : labels) {
    index.emplace(l, r.gestures.size());
    r.gestures.push_back({l});
  }
  std::size_t correct = 0, abstained = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto t = index.find(truth[i]);
    const bool positive = t != index.end();
    if (positive) ++r.gestures[t->second].support;
    const auto& p = predicted[i];
    if (!p) ++abstained;
    if (p && positive && *p == truth[i]) {
      ++r.gestures[t->second].tp;
      ++correct;
      continue;
    }
    if (!p && !positive) ++correct;  // negative trace left alone
    if (positive) ++r.gestures[t->second].fn;
    if (p) {
      const auto q = index.find(*p);
      if (q == index.end()) throw ValidationError("prediction '" + *p + "' is not a known gesture");
      ++r.gestures[q->second].fp;
    }
  }
  double psum = 0.0, rsum = 0.0;
  std::size_t rcount = 0;
  for (auto& g : r.gestures) {
    g.precision_defined = g.tp + g.fp > 0;
    g.precision = g.precision_defined ? static_cast<double>(g.tp) / static_cast<double>(g.tp + g.fp) : 1.0;
    g.recall = g.support ? static_cast<double>(g.tp) / static_cast<double>(g.support) : 0.0;
    psum += g.precision;
    if (g.support) {
      rsum += g.recall;
      ++rcount;
    }
  }
  const double n = static_cast<double>(truth.size());
  r.macro_precision = r.gestures.empty() ? 0.0 : psum / static_cast<double>(r.gestures.size());
  r.macro_recall = rcount ? rsum / static_cast<double>(rcount) : 0.0;
  r.recognition = truth.empty() ? 0.0 : static_cast<double>(correct) / n;
  r.abstention = truth.empty() ? 0.0 : static_cast<double>(abstained) / n;
  return r;
}

TimingStats timing_stats(std::span<const double> elapsed_ms, std::span<const std::size_t> samples) {
  TimingStats t;
  t.classifications = elapsed_ms.size();
  if (elapsed_ms.empty()) return t;
  std::vector<double> sorted(elapsed_ms.begin(), elapsed_ms.end());
  std::sort(sorted.begin(), sorted.end());
  t.mean_ms = mean(elapsed_ms);
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(sorted.size())));
  t.p95_ms = sorted[std::max<std::size_t>(rank, 1) - 1];
  double s = 0.0;
  for (auto x : samples) s += static_cast<double>(x);
  t.mean_samples = samples.empty() ? 0.0 : s / static_cast<double>(samples.size());
  return t;
}

RunMetrics evaluate(std::span<const GestureModel> models, const Dataset& test, QuantizerKind kind,
                    const ClassifierConfig& base, std::uint64_t seed) {
  ClassifierConfig cfg = base;
  cfg.quantizer = kind;
  std::vector<std::string> labels, truth;
  for (const auto& m : models) labels.push_back(m.label);
  std::vector<std::optional<std::string>> predicted;
  std::vector<double> elapsed;
  std::vector<std::size_t> samples;
  const auto& traces = test.traces();
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const auto r = classify(traces[i], models, cfg, derive_seed(seed, i));
    truth.push_back(traces[i].label().value_or(""));
    predicted.push_back(r.label);
    elapsed.push_back(r.elapsed_ms);
    samples.push_back(r.samples_used);
  }
  auto m = compute_metrics(labels, truth, predicted);
  m.kind = kind;
  m.thr = cfg.thr;
  m.timing = timing_stats(elapsed, samples);
  return m;
}

std::vector<ThresholdPoint> sweep_threshold(std::span<const GestureModel> models, const Dataset& test,
                                            std::span<const double> thr_grid, const ClassifierConfig& base,
                                            std::uint64_t seed) {
  std::vector<std::string> labels, truth;
  for (const auto& m : models) labels.push_back(m.label);
  std::vector<SampleRecord> records;
  const auto& traces = test.traces();
  for (std::size_t i = 0; i < traces.size(); ++i) {
    records.push_back(record_samples(traces[i], models, base, derive_seed(seed, i)));
    truth.push_back(traces[i].label().value_or(""));
  }
  std::vector<ThresholdPoint> out;
  for (double thr : thr_grid) {
    std::vector<std::optional<std::string>> predicted;
    std::vector<std::size_t> samples;
    for (const auto& rec : records) {
      const auto r = replay(rec, models, thr, base.hypothesis);
      predicted.push_back(r.label);
      samples.push_back(r.samples_used);
    }
    ThresholdPoint p{thr, compute_metrics(labels, truth, predicted)};
    p.metrics.kind = base.quantizer;
    p.metrics.thr = thr;
    p.metrics.timing = timing_stats({}, samples);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<KindSummary> summarize(std::span<const RunMetrics> runs) {
  std::vector<KindSummary> out;
  std::vector<QuantizerKind> order;
  for (const auto& r : runs) {
    if (std::find(order.begin(), order.end(), r.kind) == order.end()) order.push_back(r.kind);
  }
  for (auto k : order) {
    std::vector<double> rec, prec, recall, ms;
    for (const auto& r : runs) {
      if (r.kind != k) continue;
      rec.push_back(r.recognition);
      prec.push_back(r.macro_precision);
      recall.push_back(r.macro_recall);
      ms.push_back(r.timing.mean_ms);
    }
    out.push_back({k, mean(rec), stddev(rec), mean(prec), mean(recall), mean(ms)});
  }
  return out;
}

MetricsReport run_protocol(const Dataset& dataset, const EvalConfig& cfg) {
  validate(cfg);
  MetricsReport report;
  for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
    const auto [train, test] = split(dataset, cfg.split_ratio, derive_seed(cfg.seed, rep));
    TrainingConfig tc = cfg.training;
    tc.seed = derive_seed(cfg.seed, 1000 + rep);
    const auto sets = train_for(train, cfg.kinds, tc);
    for (auto kind : cfg.kinds) {
      const auto& models = sets.for_kind(kind);
      auto run = evaluate(models, test, kind, classifier_config(cfg, models.size()), derive_seed(cfg.seed, 2000 + rep));
      run.repetition = rep;
      report.runs.push_back(std::move(run));
    }
  }
  report.summary = summarize(report.runs);
  return report;
}

std::vector<CountRow> gesture_count_sensitivity(const Dataset& dataset, std::span<const std::size_t> counts,
                                                const EvalConfig& cfg) {
  validate(cfg);
  std::vector<CountRow> rows;
  for (std::size_t count : counts) {
    if (count < 1 || count > dataset.labels().size()) throw ValidationError("gesture count exceeds the dataset");
    std::vector<CountRow> per_kind;
    for (auto k : cfg.kinds) {
      CountRow row;
      row.count = count;
      row.kind = k;
      per_kind.push_back(std::move(row));
    }
    for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
      auto labels = dataset.labels();
      Rng rng = make_rng(cfg.seed, 7919 * count + rep);
      std::shuffle(labels.begin(), labels.end(), rng);
      labels.resize(count);
      EvalConfig one = cfg;
      one.repetitions = 1;
      one.seed = derive_seed(cfg.seed, 104729 * count + rep);
      const auto report = run_protocol(subset(dataset, labels), one);
      for (std::size_t k = 0; k < cfg.kinds.size(); ++k) per_kind[k].per_repetition.push_back(report.runs[k].recognition);
    }
    for (auto& row : per_kind) {
      row.mean = mean(row.per_repetition);
      row.stddev = stddev(row.per_repetition);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<UserCountRow> user_count_sensitivity(std::span<const GestureTemplate> templates,
                                                 std::span<const NoiseSpec> noise,
                                                 std::span<const std::size_t> subject_counts,
                                                 const SyntheticSetConfig& base, const EvalConfig& cfg) {
  validate(cfg);
  std::vector<UserCountRow> rows;
  const std::vector<QuantizerKind> kinds{QuantizerKind::kDeterministicElliptical};
  for (std::size_t subjects : subject_counts) {
    std::vector<double> acc;
    for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
      SyntheticSetConfig sc = base;
      sc.subjects = subjects;
      sc.seed = derive_seed(base.seed, rep);
      const auto data = generate_dataset(templates, noise, sc);
      const auto [train, test] = split(data, cfg.split_ratio, derive_seed(cfg.seed, rep));
      TrainingConfig tc = cfg.training;
      tc.seed = derive_seed(cfg.seed, 1000 + rep);
      const auto sets = train_for(train, kinds, tc);
      acc.push_back(evaluate(sets.elliptical, test, kinds[0], classifier_config(cfg, sets.elliptical.size()),
                             derive_seed(cfg.seed, 2000 + rep))
                        .recognition);
    }
    rows.push_back({subjects, mean(acc), stddev(acc)});
  }
  return rows;
}

TimingStats time_classification(std::span<const GestureModel> models, const Dataset& test, QuantizerKind kind,
                                const ClassifierConfig& base, std::uint64_t seed) {
  return evaluate(models, test, kind, base, seed).timing;
}

double dead_start_false_positive_rate(std::span<const GestureModel> models, std::span<const Trace> negatives,
                                      const ClassifierConfig& cfg, std::uint64_t seed) {
  if (negatives.empty()) return 0.0;
  std::size_t fp = 0;
  for (std::size_t i = 0; i < negatives.size(); ++i) {
    if (classify(negatives[i], models, cfg, derive_seed(seed, i)).decision) ++fp;
  }
  return static_cast<double>(fp) / static_cast<double>(negatives.size());
}

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stddev(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::string report_to_json(const MetricsReport& report, bool include_timing) {
  using nlohmann::json;
  json runs = json::array();
  for (const auto& r : report.runs) {
    json gestures = json::array();
    for (const auto& g : r.gestures) {
      gestures.push_back({{"label", g.label},
                          {"tp", g.tp},
                          {"fp", g.fp},
                          {"fn", g.fn},
                          {"support", g.support},
                          {"precision", g.precision},
                          {"precision_defined", g.precision_defined},
                          {"recall", g.recall}});
    }
    runs.push_back({{"kind", to_string(r.kind)},
                    {"repetition", r.repetition},
                    {"thr", r.thr},
                    {"recognition", r.recognition},
                    {"abstention", r.abstention},
                    {"macro_precision", r.macro_precision},
                    {"macro_recall", r.macro_recall},
                    {"mean_samples", r.timing.mean_samples},
                    {"gestures", std::move(gestures)}});
    if (include_timing) runs.back()["timing"] = timing_json(r.timing);
  }
  json summary = json::array();
  for (const auto& s : report.summary) {
    summary.push_back({{"kind", to_string(s.kind)},
                       {"mean_recognition", s.mean_recognition},
                       {"stddev_recognition", s.stddev_recognition},
                       {"mean_macro_precision", s.mean_macro_precision},
                       {"mean_macro_recall", s.mean_macro_recall}});
    if (include_timing) summary.back()["mean_ms"] = s.mean_ms;
  }
  return json{{"summary", std::move(summary)}, {"runs", std::move(runs)}}.dump(1) + "\n";
}

std::string report_to_csv(const MetricsReport& report) {
  std::ostringstream out;
  out << "kind,repetition,thr,label,tp,fp,fn,support,precision,precision_defined,recall,recognition\n";
  for (const auto& r : report.runs) {
    for (const auto& g : r.gestures) {
      out << to_string(r.kind) << ',' << r.repetition << ',' << format_double(r.thr) << ',' << g.label << ','
          << g.tp << ',' << g.fp << ',' << g.fn << ',' << g.support << ',' << format_double(g.precision) << ','
          << (g.precision_defined ? 1 : 0) << ',' << format_double(g.recall) << ',' << format_double(r.recognition)
          << '\n';
    }
  }
  return out.str();
}

std::string sweep_to_csv(std::span<const ThresholdPoint> sweep, QuantizerKind kind) {
  std::ostringstream out;
  out << "kind,thr,label,precision,precision_defined,recall,recognition,abstention\n";
  for (const auto& p : sweep) {
    for (const auto& g : p.metrics.gestures) {
      out << to_string(kind) << ',' << format_double(p.thr) << ',' << g.label << ',' << format_double(g.precision)
          << ',' << (g.precision_defined ? 1 : 0) << ',' << format_double(g.recall) << ','
          << format_double(p.metrics.recognition) << ',' << format_double(p.metrics.abstention) << '\n';
    }
  }
  return out.str();
}

}  // namespace gesturekit
