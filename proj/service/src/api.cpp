#include "gesturekit/service.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "gesturekit/error.hpp"
#include "gesturekit/evaluation.hpp"
#include "gesturekit/training.hpp"

namespace gesturekit::service {
namespace {

using nlohmann::json;

struct HttpError {
  int status;
  std::string message;
  json extra = json::object();
};

Response reply(int status, const json& j) { return {status, j.dump()}; }

Response error_reply(const HttpError& e) {
  json j = e.extra;
  j["error"] = e.message;
  return reply(e.status, j);
}

json parse_body(const std::string& body, bool allow_empty = true) {
  if (body.empty() || std::all_of(body.begin(), body.end(), [](char c) { return std::isspace(uint8_t(c)); })) {
    if (allow_empty) return json::object();
    throw HttpError{400, "request body is empty"};
  }
  try {
    return json::parse(body);
  } catch (const json::parse_error& e) {
    throw HttpError{400, std::string("malformed JSON: ") + e.what()};
  }
}

double number_field(const json& j, const char* name) {
  if (!j.at(name).is_number()) throw HttpError{400, std::string("'") + name + "' must be a number"};
  return j.at(name).get<double>();
}

std::uint64_t unsigned_field(const json& j, const char* name) {
  const auto& v = j.at(name);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw HttpError{400, std::string("'") + name + "' must be a non-negative integer"};
  }
  return v.get<std::uint64_t>();
}

double probability_field(const json& j, const char* name) {
  const double v = number_field(j, name);
  if (!(v > 0.0 && v < 1.0)) throw HttpError{400, std::string("'") + name + "' must lie in (0, 1)"};
  return v;
}

QuantizerKind quantizer_field(const json& j) {
  if (!j.at("quantizer").is_string()) throw HttpError{400, "'quantizer' must be a string"};
  try {
    return quantizer_kind_from_string(j.at("quantizer").get<std::string>());
  } catch (const ValidationError& e) {
    throw HttpError{400, e.what()};
  }
}

/// [[t, ax, ay, az], ...] in g.
Trace trace_from_json(const json& samples, std::optional<std::string> label, std::string id) {
  if (!samples.is_array()) throw HttpError{400, "samples must be an array of [t, ax, ay, az]"};
  std::vector<AccelSample> out;
  out.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& row = samples[i];
    if (!row.is_array() || row.size() != 4 ||
        !std::all_of(row.begin(), row.end(), [](const json& v) { return v.is_number(); })) {
      throw HttpError{400, "sample " + std::to_string(i) + " is not [t, ax, ay, az]"};
    }
    out.push_back({row[0].get<double>(), {row[1].get<double>(), row[2].get<double>(), row[3].get<double>()}});
  }
  try {
    return Trace(std::move(out), std::move(label), std::nullopt, std::move(id));
  } catch (const ValidationError& e) {
    throw HttpError{400, e.what()};
  }
}

json config_json(const SessionConfig& c) {
  return {{"thr", c.thr},
          {"quantizer", to_string(c.quantizer)},
          {"priors", c.priors},
          {"alpha", c.alpha},
          {"max_samples", c.max_samples},
          {"min_samples", c.min_samples},
          {"seed", c.seed}};
}

/// Normalized prior per model; unlisted labels weigh 1.
std::vector<double> prior_vector(const std::vector<GestureModel>& models, const std::map<std::string, double>& w) {
  std::vector<double> p;
  double total = 0.0;
  for (const auto& m : models) {
    const auto it = w.find(m.label);
    p.push_back(it == w.end() ? 1.0 : it->second);
    total += p.back();
  }
  for (double& x : p) x /= total;
  return p;
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> out;
  std::stringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '/')) {
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

const char* to_string(ClassifyMode m) { return m == ClassifyMode::kSignaled ? "signaled" : "dead_start"; }

}  // namespace

std::size_t Api::session_count() const {
  std::shared_lock lock(mutex_);
  return sessions_.size();
}

std::shared_ptr<Session> Api::find(const std::string& id) const {
  std::shared_lock lock(mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw HttpError{404, "unknown session '" + id + "'"};
  return it->second;
}

Response Api::handle(const std::string& method, const std::string& path, const std::string& body,
                     const std::multimap<std::string, std::string>& query) {
  try {
    const auto seg = split_path(path);
    if (seg.empty() || seg[0] != "sessions") throw HttpError{404, "no route for " + path};
    auto method_not_allowed = [&]() { return HttpError{405, "method " + method + " not allowed on " + path}; };

    if (seg.size() == 1) {
      if (method != "POST") throw method_not_allowed();
      return create_session(body);
    }
    auto session = find(seg[1]);
    auto& s = *session;
    if (seg.size() == 2) {
      if (method != "GET") throw method_not_allowed();
      return get_session(s);
    }
    const std::string& what = seg[2];
    if (what == "gestures" && seg.size() == 3) {
      if (method != "POST") throw method_not_allowed();
      return add_gesture(s, body);
    }
    if (what == "gestures" && seg.size() == 5 && seg[4] == "samples") {
      if (method != "POST") throw method_not_allowed();
      return add_sample(s, seg[3], body);
    }
    if (seg.size() == 3) {
      if (what == "train") {
        if (method != "POST") throw method_not_allowed();
        return train(s, body);
      }
      if (what == "classify") {
        if (method != "POST") throw method_not_allowed();
        return classify(s, body);
      }
      if (what == "config") {
        if (method == "GET") return get_config(s);
        if (method == "PATCH") return patch_config(s, body);
        throw method_not_allowed();
      }
      if (what == "metrics") {
        if (method != "GET") throw method_not_allowed();
        return metrics(s, query);
      }
      if (what == "models") {
        if (method != "GET") throw method_not_allowed();
        return models(s);
      }
    }
    throw HttpError{404, "no route for " + path};
  } catch (const HttpError& e) {
    return error_reply(e);
  } catch (const json::exception& e) {
    return error_reply({400, std::string("invalid body: ") + e.what()});
  } catch (const ValidationError& e) {
    return error_reply({400, e.what()});
  } catch (const std::exception& e) {
    return error_reply({500, e.what()});
  }
}

Response Api::create_session(const std::string& body) {
  parse_body(body);  // reject malformed JSON; no fields yet
  auto s = std::make_shared<Session>();
  {
    std::unique_lock lock(mutex_);
    s->id = "s" + std::to_string(next_id_++);
    sessions_.emplace(s->id, s);
  }
  return reply(201, {{"session_id", s->id}, {"config", config_json(s->config)}});
}

Response Api::get_session(Session& s) {
  std::lock_guard lock(s.mutex);
  json gestures = json::array();
  for (const auto& g : s.gestures) gestures.push_back({{"label", g}, {"samples", s.samples.at(g).size()}});
  return reply(200, {{"session_id", s.id},
                     {"gestures", gestures},
                     {"trained", s.models != nullptr},
                     {"stale", s.stale},
                     {"config", config_json(s.config)}});
}

Response Api::add_gesture(Session& s, const std::string& body) {
  const auto j = parse_body(body, false);
  if (!j.is_object() || !j.contains("label") || !j["label"].is_string()) {
    throw HttpError{400, "body must be {\"label\": string}"};
  }
  const auto label = j["label"].get<std::string>();
  if (label.empty() || label.find('/') != std::string::npos) throw HttpError{400, "label must be non-empty, no '/'"};
  std::lock_guard lock(s.mutex);
  const bool created = !s.samples.count(label);
  if (created) {
    s.gestures.push_back(label);
    s.samples[label];
    if (s.models) s.stale = true;
  }
  return reply(created ? 201 : 200, {{"label", label}, {"samples", s.samples[label].size()}, {"created", created}});
}

Response Api::add_sample(Session& s, const std::string& label, const std::string& body) {
  const auto j = parse_body(body, false);
  std::lock_guard lock(s.mutex);
  const auto it = s.samples.find(label);
  if (it == s.samples.end()) throw HttpError{404, "unknown gesture '" + label + "'"};
  const auto& arr = j.is_object() && j.contains("samples") ? j["samples"] : j;
  it->second.push_back(trace_from_json(arr, label, label + "-" + std::to_string(it->second.size())));
  if (s.models) s.stale = true;
  return reply(201, {{"label", label}, {"samples", it->second.size()}, {"stale", s.stale}});
}

Response Api::train(Session& s, const std::string& body) {
  const auto j = parse_body(body);
  if (!j.is_object()) throw HttpError{400, "body must be an object"};
  std::lock_guard lock(s.mutex);

  TrainingConfig cfg;
  cfg.quantizer = j.contains("quantizer") ? quantizer_field(j) : s.config.quantizer;
  if (j.contains("n_states")) {
    cfg.n_states = unsigned_field(j, "n_states");
    if (cfg.n_states == 0) throw HttpError{400, "'n_states' must be positive"};
  }
  cfg.seed = j.contains("seed") ? unsigned_field(j, "seed") : s.config.seed;

  if (s.gestures.empty()) throw HttpError{409, "no gestures registered", {{"required", s.config.min_samples}}};
  std::vector<Trace> traces;
  for (const auto& g : s.gestures) {
    const auto& v = s.samples.at(g);
    if (v.size() < s.config.min_samples) {
      throw HttpError{409,
                      "gesture '" + g + "' has " + std::to_string(v.size()) + " samples, needs " +
                          std::to_string(s.config.min_samples),
                      {{"gesture", g}, {"count", v.size()}, {"required", s.config.min_samples}}};
    }
    traces.insert(traces.end(), v.begin(), v.end());
  }
  auto trained = train_all(Dataset(std::move(traces), "session " + s.id), cfg);
  s.models = std::make_shared<const std::vector<GestureModel>>(std::move(trained.models));
  s.stale = false;
  s.history.clear();  // metrics always describe the current model set

  json gestures = json::array();
  for (const auto& g : s.gestures) gestures.push_back({{"label", g}, {"samples", s.samples.at(g).size()}});
  return reply(200, {{"trained", true},
                     {"quantizer", to_string(cfg.quantizer)},
                     {"n_states", cfg.n_states},
                     {"seed", cfg.seed},
                     {"gestures", gestures},
                     {"report", json::parse(training_report_json(trained))}});
}

Response Api::classify(Session& s, const std::string& body) {
  const auto j = parse_body(body, false);
  const json& samples = j.is_object() ? j.value("samples", json()) : j;
  auto trace = trace_from_json(samples, std::nullopt, "query");

  ClassifyMode mode = ClassifyMode::kSignaled;
  std::optional<std::string> expected;
  std::optional<double> thr;
  std::optional<std::uint64_t> seed;
  std::optional<QuantizerKind> quantizer;
  if (j.is_object()) {
    if (j.contains("mode")) {
      const auto m = j["mode"].is_string() ? j["mode"].get<std::string>() : "";
      if (m == "signaled") mode = ClassifyMode::kSignaled;
      else if (m == "dead_start") mode = ClassifyMode::kDeadStart;
      else throw HttpError{400, "'mode' must be \"signaled\" or \"dead_start\""};
    }
    if (j.contains("thr")) thr = probability_field(j, "thr");
    if (j.contains("seed")) seed = unsigned_field(j, "seed");
    if (j.contains("quantizer")) quantizer = quantizer_field(j);
    if (j.contains("expected") && !j["expected"].is_null()) {
      if (!j["expected"].is_string()) throw HttpError{400, "'expected' must be a string"};
      expected = j["expected"].get<std::string>();
    }
  }
  if (mode == ClassifyMode::kDeadStart && expected) throw HttpError{400, "dead_start traces carry no expected label"};

  // Snapshot, then classify without holding the session lock.
  std::shared_ptr<const std::vector<GestureModel>> models;
  SessionConfig config;
  bool stale = false;
  {
    std::lock_guard lock(s.mutex);
    models = s.models;
    config = s.config;
    stale = s.stale;
  }
  if (!models) throw HttpError{409, "session has no trained models"};
  if (expected && std::none_of(models->begin(), models->end(), [&](const auto& m) { return m.label == *expected; })) {
    throw HttpError{400, "expected label '" + *expected + "' is not a trained gesture"};
  }

  ClassifierConfig cfg;
  cfg.quantizer = quantizer.value_or(config.quantizer);
  cfg.thr = thr.value_or(config.thr);
  cfg.hypothesis.alpha = config.alpha;
  cfg.hypothesis.max_samples = config.max_samples;
  cfg.hypothesis.batch = std::min(cfg.hypothesis.batch, config.max_samples);
  cfg.priors = prior_vector(*models, config.priors);
  validate(cfg, models->size());

  HistoryEntry entry;
  entry.mode = mode;
  entry.expected = expected;
  entry.hypothesis = cfg.hypothesis;
  ClassificationResult result;
  const auto start = std::chrono::steady_clock::now();
  const auto run_seed = seed.value_or(config.seed);
  if (is_statistical(cfg.quantizer)) {
    // Keep the full stream so /metrics can replay it at other thresholds.
    entry.record = record_samples(trace, *models, cfg, run_seed);
    result = replay(*entry.record, *models, cfg.thr, cfg.hypothesis);
  } else {
    result = classify_deterministic(trace, *models, cfg);
    entry.decision = result.decision;
  }
  result.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  {
    std::lock_guard lock(s.mutex);
    if (s.models == models) s.history.push_back(std::move(entry));
  }

  auto out = json::parse(classification_to_json(result));
  out["mode"] = to_string(mode);
  out["thr"] = cfg.thr;
  out["quantizer"] = to_string(cfg.quantizer);
  out["stale"] = stale;
  if (mode == ClassifyMode::kDeadStart) out["no_gesture"] = !result.decision.has_value();
  if (expected) {
    out["expected"] = *expected;
    out["correct"] = result.label && *result.label == *expected;
  }
  return reply(200, out);
}

Response Api::get_config(Session& s) {
  std::lock_guard lock(s.mutex);
  return reply(200, config_json(s.config));
}

Response Api::patch_config(Session& s, const std::string& body) {
  const auto j = parse_body(body, false);
  if (!j.is_object()) throw HttpError{400, "body must be an object"};
  std::lock_guard lock(s.mutex);
  SessionConfig c = s.config;  // validate everything before applying anything
  for (const auto& [key, value] : j.items()) {
    if (key == "thr") {
      c.thr = probability_field(j, "thr");
    } else if (key == "alpha") {
      c.alpha = probability_field(j, "alpha");
    } else if (key == "quantizer") {
      c.quantizer = quantizer_field(j);
    } else if (key == "max_samples") {
      c.max_samples = unsigned_field(j, "max_samples");
      if (c.max_samples == 0) throw HttpError{400, "'max_samples' must be positive"};
    } else if (key == "min_samples") {
      c.min_samples = unsigned_field(j, "min_samples");
      if (c.min_samples < 2) throw HttpError{400, "'min_samples' must be at least 2"};
    } else if (key == "seed") {
      c.seed = unsigned_field(j, "seed");
    } else if (key == "priors") {
      if (!value.is_object()) throw HttpError{400, "'priors' must map labels to weights"};
      std::map<std::string, double> p;
      for (const auto& [label, w] : value.items()) {
        if (!s.samples.count(label)) throw HttpError{400, "prior for unknown gesture '" + label + "'"};
        if (!w.is_number() || !(w.get<double>() > 0.0) || !std::isfinite(w.get<double>())) {
          throw HttpError{400, "prior weight for '" + label + "' must be a positive number"};
        }
        p[label] = w.get<double>();
      }
      c.priors = std::move(p);
    } else {
      throw HttpError{400, "unknown config field '" + key + "'"};
    }
  }
  s.config = std::move(c);
  return reply(200, config_json(s.config));
}

Response Api::metrics(Session& s, const std::multimap<std::string, std::string>& query) {
  std::shared_ptr<const std::vector<GestureModel>> models;
  std::vector<HistoryEntry> history;
  double thr = 0.0;
  {
    std::lock_guard lock(s.mutex);
    models = s.models;
    history = s.history;
    thr = s.config.thr;
  }
  if (const auto it = query.find("thr"); it != query.end()) {
    try {
      std::size_t pos = 0;
      thr = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw HttpError{400, "thr must be a number"};
    }
    if (!(thr > 0.0 && thr < 1.0)) throw HttpError{400, "thr must lie in (0, 1)"};
  }

  json out = {{"thr", thr}, {"trained", models != nullptr}, {"classifications", history.size()}};
  if (!models) {
    out["gestures"] = json::array();
    return reply(200, out);
  }
  std::vector<std::string> labels;
  for (const auto& m : *models) labels.push_back(m.label);

  // Replaying the recorded streams makes the numbers a pure function of thr.
  std::vector<std::string> truth;
  std::vector<std::optional<std::string>> predicted;
  std::size_t abstentions = 0, dead_start = 0, dead_start_fp = 0, signaled = 0;
  for (const auto& e : history) {
    std::optional<std::size_t> d = e.decision;
    if (e.record) {
      auto h = e.hypothesis;
      d = replay(*e.record, *models, thr, h).decision;
    }
    if (!d) ++abstentions;
    if (e.mode == ClassifyMode::kDeadStart) {
      ++dead_start;
      if (d) ++dead_start_fp;
      truth.emplace_back();  // not a gesture label: any decision is a false positive
    } else {
      ++signaled;
      if (!e.expected) continue;
      truth.push_back(*e.expected);
    }
    predicted.push_back(d ? std::optional<std::string>(labels[*d]) : std::nullopt);
  }
  out["abstentions"] = abstentions;
  out["signaled"] = signaled;
  out["dead_start"] = {{"traces", dead_start},
                       {"false_positives", dead_start_fp},
                       {"false_positive_rate", dead_start ? double(dead_start_fp) / double(dead_start) : 0.0}};
  json gestures = json::array();
  if (truth.empty()) {
    for (const auto& l : labels) gestures.push_back({{"label", l}, {"support", 0}});
    out["gestures"] = gestures;
    return reply(200, out);
  }
  const auto m = compute_metrics(labels, truth, predicted);
  for (const auto& g : m.gestures) {
    gestures.push_back({{"label", g.label},
                        {"tp", g.tp},
                        {"fp", g.fp},
                        {"fn", g.fn},
                        {"support", g.support},
                        {"precision", g.precision},
                        {"precision_defined", g.precision_defined},
                        {"recall", g.recall}});
  }
  out["gestures"] = gestures;
  out["evaluated"] = truth.size();
  out["macro_precision"] = m.macro_precision;
  out["macro_recall"] = m.macro_recall;
  out["recognition"] = m.recognition;
  out["abstention_rate"] = m.abstention;
  return reply(200, out);
}

Response Api::models(Session& s) {
  std::shared_ptr<const std::vector<GestureModel>> models;
  {
    std::lock_guard lock(s.mutex);
    models = s.models;
  }
  if (!models) throw HttpError{409, "session has no trained models"};
  return {200, models_to_json(*models)};
}

}  // namespace gesturekit::service
