#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>

#include "gesturekit/classifier.hpp"
#include "gesturekit/drift.hpp"
#include "gesturekit/error.hpp"
#include "gesturekit/evaluation.hpp"
#include "gesturekit/model.hpp"
#include "gesturekit/rng.hpp"
#include "gesturekit/synthetic.hpp"
#include "gesturekit/trace.hpp"
#include "gesturekit/training.hpp"

namespace gesturekit::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void require_file(const std::string& path, const char* what) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw ValidationError(std::string(what) + " '" + path + "' not found");
}

AccelUnits parse_units(const std::string& s) {
  if (s == "g") return AccelUnits::kG;
  if (s == "ms2" || s == "m/s2" || s == "m/s^2") return AccelUnits::kMetersPerSecond2;
  throw ValidationError("unknown units '" + s + "' (expected g or ms2)");
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path);
  f << text;
  if (!f) throw Error("cannot write " + path);
}

/// Catalogue id ("circle-xy-cw"), base shape or "no-gesture".
GestureTemplate resolve_template(const std::string& name) {
  for (auto& t : gesture_catalog(24)) {
    if (t.id == name) return t;
  }
  return make_template(name);
}

std::vector<QuantizerKind> parse_kinds(const std::string& csv) {
  std::vector<QuantizerKind> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(quantizer_kind_from_string(item));
  }
  if (out.empty()) throw ValidationError("no quantizer kinds given");
  return out;
}

Topology parse_topology(const std::string& name, int band) {
  if (name == "ergodic") return Topology::ergodic();
  if (name == "lr" || name == "left_to_right" || name == "left-to-right") {
    if (band < 1) throw ValidationError("--band must be at least 1");
    return Topology::left_to_right(band);
  }
  throw ValidationError("unknown topology '" + name + "' (expected lr or ergodic)");
}

// --- gen -------------------------------------------------------------------

struct GenArgs {
  std::vector<std::string> templates;
  std::size_t catalog = 0;
  std::size_t count = 10;
  std::vector<double> noise{0.02, 0.02, 0.02};
  double orientation_jitter = 0.0;
  double speed_jitter = 0.0;
  std::size_t subjects = 1;
  double subject_bias = 0.1;
  double rate = kDefaultSampleRateHz;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_gen(const GenArgs& a, std::ostream& out) {
  std::vector<GestureTemplate> templates;
  if (a.catalog > 0) templates = gesture_catalog(a.catalog);
  for (const auto& name : a.templates) templates.push_back(resolve_template(name));
  if (templates.empty()) throw ValidationError("give at least one --template or --catalog N");
  if (a.count == 0) throw ValidationError("--count must be positive");

  NoiseSpec noise;
  noise.sigma = {a.noise[0], a.noise[1], a.noise[2]};
  noise.orientation_jitter = a.orientation_jitter;
  noise.speed_jitter = a.speed_jitter;
  validate(noise);
  std::vector<NoiseSpec> per(templates.size(), noise);

  SyntheticSetConfig cfg;
  cfg.traces_per_gesture = a.count;
  cfg.rate_hz = a.rate;
  cfg.subjects = a.subjects;
  cfg.subject_bias = a.subjects > 1 ? a.subject_bias : 0.0;
  cfg.seed = a.seed;
  const auto data = generate_dataset(templates, per, cfg);

  if (a.out.empty()) {
    write_traces(out, data.traces());
    return kExitOk;
  }
  save_traces(a.out, data.traces());
  json labels = json::array();
  for (const auto& l : data.labels()) labels.push_back(l);
  out << json{{"out", a.out}, {"traces", data.size()}, {"samples", data.sample_count()}, {"labels", labels}}.dump()
      << "\n";
  return kExitOk;
}

// --- train -----------------------------------------------------------------

struct TrainArgs {
  std::string data;
  std::string units = "g";
  std::string quantizer = "statistical_gmm";
  std::size_t states = 8;
  std::string topology = "lr";
  int band = 3;
  std::size_t codebook_size = kDefaultCodebookSize;
  std::size_t max_iters = 100;
  std::uint64_t seed = 0;
  std::string out;
  std::string report;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  require_file(a.data, "trace file");
  const auto data = load_traces(a.data, parse_units(a.units));
  TrainingConfig cfg;
  cfg.quantizer = quantizer_kind_from_string(a.quantizer);
  cfg.n_states = a.states;
  cfg.topology = parse_topology(a.topology, a.band);
  cfg.codebook_size = a.codebook_size;
  cfg.max_iters = a.max_iters;
  cfg.seed = a.seed;
  const auto trained = train_all(data, cfg);
  save_models(trained.models, a.out);
  const auto report = training_report_json(trained);
  if (!a.report.empty()) write_text(a.report, report);
  out << report;
  return kExitOk;
}

// --- classify --------------------------------------------------------------

struct ClassifyArgs {
  std::string models;
  std::string trace;
  std::string units = "g";
  std::string quantizer = "statistical_gmm";
  double thr = 0.5;
  double alpha = 0.1;
  std::size_t max_samples = 1000;
  std::size_t batch = 50;
  std::uint64_t seed = 0;
  bool timing = false;
};

int cmd_classify(const ClassifyArgs& a, std::ostream& out, std::ostream& err) {
  require_file(a.models, "model file");
  require_file(a.trace, "trace file");
  const auto models = load_models(a.models);
  const auto data = load_traces(a.trace, parse_units(a.units));
  if (data.empty()) throw ValidationError("trace file holds no traces");

  ClassifierConfig cfg;
  cfg.quantizer = quantizer_kind_from_string(a.quantizer);
  cfg.thr = a.thr;
  cfg.hypothesis.alpha = a.alpha;
  cfg.hypothesis.max_samples = a.max_samples;
  cfg.hypothesis.batch = a.batch;
  validate(cfg, models.size());

  // One JSON object per trace, one per line.
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& tr = data.traces()[i];
    const auto result = classify(tr, models, cfg, derive_seed(a.seed, i));
    auto j = json::parse(classification_to_json(result));
    j["trace_id"] = tr.id();
    if (!a.timing) {
      err << "classified " << (tr.id().empty() ? std::to_string(i) : tr.id()) << " in " << num(result.elapsed_ms)
          << " ms\n";
      j.erase("elapsed_ms");
    }
    out << j.dump() << "\n";
  }
  return kExitOk;
}

// --- eval ------------------------------------------------------------------

struct EvalArgs {
  std::string data;
  std::string units = "g";
  std::size_t benchmark = 0;
  std::size_t traces_per_gesture = 20;
  std::size_t repetitions = 10;
  double split_ratio = 0.75;
  std::string kinds = "spherical,elliptical,gmm,random";
  double thr = 0.5;
  bool thr_one_over_n = false;
  std::size_t states = 8;
  std::size_t max_samples = 1000;
  std::uint64_t seed = 0;
  std::string out_json;
  std::string out_csv;
  std::string sweep_csv;
  std::string sweep_kind = "statistical_gmm";
  bool timing = false;
};

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  Dataset data;
  if (a.benchmark > 0) {
    if (!a.data.empty()) throw ValidationError("--data and --benchmark are mutually exclusive");
    BenchmarkSetSpec spec;
    spec.gestures = a.benchmark;
    spec.traces_per_gesture = a.traces_per_gesture;
    data = benchmark_dataset(spec, a.seed);
  } else {
    if (a.data.empty()) throw ValidationError("give --data FILE or --benchmark N");
    require_file(a.data, "trace file");
    data = load_traces(a.data, parse_units(a.units));
  }

  EvalConfig cfg;
  cfg.split_ratio = a.split_ratio;
  cfg.repetitions = a.repetitions;
  cfg.kinds = parse_kinds(a.kinds);
  cfg.thr = a.thr;
  cfg.thr_one_over_n = a.thr_one_over_n;
  cfg.hypothesis.max_samples = a.max_samples;
  cfg.training.n_states = a.states;
  cfg.seed = a.seed;
  validate(cfg);

  err << "evaluating " << data.labels().size() << " gestures, " << data.size() << " traces, " << cfg.repetitions
      << " repetitions\n";
  const auto report = run_protocol(data, cfg);
  const auto full = report_to_json(report, a.timing);
  if (!a.out_json.empty()) write_text(a.out_json, full);
  if (!a.out_csv.empty()) write_text(a.out_csv, report_to_csv(report));

  if (!a.sweep_csv.empty()) {
    // Threshold sweep on the first repetition's split, same seeds as the protocol.
    const auto kind = quantizer_kind_from_string(a.sweep_kind);
    if (!is_statistical(kind)) throw ValidationError("--sweep-kind must be a statistical quantizer");
    const auto [train, test] = split(data, cfg.split_ratio, derive_seed(cfg.seed, 0));
    TrainingConfig tc = cfg.training;
    tc.quantizer = kind;
    tc.seed = derive_seed(cfg.seed, 1000);
    const auto models = train_all(train, tc).models;
    ClassifierConfig base;
    base.quantizer = kind;
    base.hypothesis = cfg.hypothesis;
    const auto sweep = sweep_threshold(models, test, cfg.thr_grid, base, derive_seed(cfg.seed, 2000));
    write_text(a.sweep_csv, sweep_to_csv(sweep, kind));
  }

  auto j = json::parse(full);
  out << json{{"summary", j["summary"]}}.dump(1) << "\n";
  return kExitOk;
}

// --- drift -----------------------------------------------------------------

struct DriftArgs {
  std::vector<double> angles_deg{0.5, 1.0, 2.0, 5.0};
  double duration = 10.0;
  double dt = 0.01;
  std::string out;
};

int cmd_drift(const DriftArgs& a, std::ostream& out) {
  if (!(a.duration > 0.0) || !(a.dt > 0.0) || a.dt >= a.duration) {
    throw ValidationError("need 0 < --dt < --duration");
  }
  std::vector<double> rad;
  for (double d : a.angles_deg) rad.push_back(d * std::numbers::pi / 180.0);
  const auto rows = drift_curve(rad, a.duration, a.dt);

  std::ostringstream csv;
  csv << "angle_deg,t,error_m,closed_form_m\n";
  for (const auto& r : rows) {
    csv << num(r.angle * 180.0 / std::numbers::pi) << ',' << num(r.t) << ',' << num(r.error) << ','
        << num(drift_closed_form(r.angle, r.t)) << '\n';
  }
  if (a.out.empty()) {
    out << csv.str();
    return kExitOk;
  }
  write_text(a.out, csv.str());

  json per = json::array();
  for (double angle : rad) {
    std::vector<DriftRow> mine;
    for (const auto& r : rows) {
      if (r.angle == angle) mine.push_back(r);
    }
    per.push_back({{"angle_deg", angle * 180.0 / std::numbers::pi},
                   {"final_error_m", mine.empty() ? 0.0 : mine.back().error},
                   {"closed_form_m", drift_closed_form(angle, a.duration)},
                   {"loglog_slope", loglog_slope(mine)}});
  }
  out << json{{"out", a.out}, {"rows", rows.size()}, {"angles", per}}.dump() << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"gesturekit: accelerometer gesture recognition with uncertain quantization"};
  app.name("gesturekit");
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate synthetic gesture traces (trace CSV)");
  g->add_option("--template", gen.templates, "Shape or catalogue id (repeatable)");
  g->add_option("--catalog", gen.catalog, "Add the first N catalogue gestures");
  g->add_option("--count", gen.count, "Traces per template")->capture_default_str();
  g->add_option("--noise-xyz", gen.noise, "Per-axis sensor noise stddev, g")->expected(3)->capture_default_str();
  g->add_option("--orientation-jitter", gen.orientation_jitter, "Per-angle stddev, radians")->capture_default_str();
  g->add_option("--speed-jitter", gen.speed_jitter, "Relative duration stddev")->capture_default_str();
  g->add_option("--subjects", gen.subjects, "Spread traces over this many subjects")->capture_default_str();
  g->add_option("--subject-bias", gen.subject_bias, "Per-subject orientation stddev, radians")
      ->capture_default_str();
  g->add_option("--rate", gen.rate, "Sample rate, Hz")->capture_default_str();
  g->add_option("--seed", gen.seed)->capture_default_str();
  g->add_option("--out", gen.out, "Output CSV (stdout when omitted)");

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train one HMM per gesture and write a model file");
  t->add_option("--data", train.data, "Labeled trace CSV")->required();
  t->add_option("--units", train.units, "g or ms2")->capture_default_str();
  t->add_option("--quantizer", train.quantizer, "Selects the codebook kind")->capture_default_str();
  t->add_option("--states", train.states)->capture_default_str();
  t->add_option("--topology", train.topology, "lr or ergodic")->capture_default_str();
  t->add_option("--band", train.band, "Left-to-right band width")->capture_default_str();
  t->add_option("--codebook-size", train.codebook_size)->capture_default_str();
  t->add_option("--max-iters", train.max_iters)->capture_default_str();
  t->add_option("--seed", train.seed)->capture_default_str();
  t->add_option("--out", train.out, "Model file")->required();
  t->add_option("--report", train.report, "Also write the training report here");

  ClassifyArgs cls;
  auto* c = app.add_subcommand("classify", "Classify every trace in a CSV");
  c->add_option("--models", cls.models)->required();
  c->add_option("--trace", cls.trace, "Trace CSV (labels optional)")->required();
  c->add_option("--units", cls.units)->capture_default_str();
  c->add_option("--quantizer", cls.quantizer)->capture_default_str();
  c->add_option("--thr", cls.thr, "Conditional threshold")->capture_default_str();
  c->add_option("--alpha", cls.alpha)->capture_default_str();
  c->add_option("--max-samples", cls.max_samples)->capture_default_str();
  c->add_option("--batch", cls.batch)->capture_default_str();
  c->add_option("--seed", cls.seed)->capture_default_str();
  c->add_flag("--timing", cls.timing, "Include elapsed_ms in the output");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Repeated train/test evaluation");
  e->add_option("--data", ev.data, "Labeled trace CSV");
  e->add_option("--units", ev.units)->capture_default_str();
  e->add_option("--benchmark", ev.benchmark, "Use the synthetic benchmark set with N gestures");
  e->add_option("--traces-per-gesture", ev.traces_per_gesture)->capture_default_str();
  e->add_option("--repetitions", ev.repetitions)->capture_default_str();
  e->add_option("--split", ev.split_ratio, "Training fraction")->capture_default_str();
  e->add_option("--kinds", ev.kinds, "Comma-separated quantizer kinds")->capture_default_str();
  e->add_option("--thr", ev.thr)->capture_default_str();
  e->add_flag("--thr-one-over-n", ev.thr_one_over_n, "Use thr = 1/N");
  e->add_option("--states", ev.states)->capture_default_str();
  e->add_option("--max-samples", ev.max_samples)->capture_default_str();
  e->add_option("--seed", ev.seed)->capture_default_str();
  e->add_option("--out-json", ev.out_json);
  e->add_option("--out-csv", ev.out_csv);
  e->add_option("--sweep-csv", ev.sweep_csv, "Threshold sweep on the first repetition");
  e->add_option("--sweep-kind", ev.sweep_kind)->capture_default_str();
  e->add_flag("--timing", ev.timing, "Include wall-clock fields in the JSON report");

  DriftArgs dr;
  auto* d = app.add_subcommand("drift", "Dead-reckoning drift of a still phone (CSV)");
  d->add_option("--angles", dr.angles_deg, "Orientation errors, degrees")->capture_default_str();
  d->add_option("--duration", dr.duration)->capture_default_str();
  d->add_option("--dt", dr.dt)->capture_default_str();
  d->add_option("--out", dr.out, "Output CSV (stdout when omitted)");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kExitOk : kExitInvalidInput;
  }

  try {
    if (*g) return cmd_gen(gen, out);
    if (*t) return cmd_train(train, out);
    if (*c) return cmd_classify(cls, out, err);
    if (*e) return cmd_eval(ev, out, err);
    if (*d) return cmd_drift(dr, out);
  } catch (const ParseError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitInvalidInput;
  } catch (const ValidationError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitInvalidInput;
  } catch (const FormatError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitInvalidInput;
  } catch (const nlohmann::json::exception& ex) {
    err << "error: malformed JSON: " << ex.what() << "\n";
    return kExitInvalidInput;
  } catch (const std::exception& ex) {
    err << "internal error: " << ex.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace gesturekit::cli
