#include "gesturekit/model.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "gesturekit/error.hpp"

namespace gesturekit {

using nlohmann::json;

namespace {

json to_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

Vec3 vec3_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw FormatError("expected a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    rows.push_back(json(std::vector<double>(row.begin(), row.end())));
  }
  return rows;
}

Matrix matrix_from(const json& j) {
  if (!j.is_array() || j.empty()) throw FormatError("expected a non-empty matrix");
  const std::size_t cols = j[0].size();
  Matrix m(j.size(), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw FormatError("ragged matrix");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

json to_json(const Codebook& cb) {
  json words = json::array();
  for (const auto& c : cb.codewords()) words.push_back(to_json(c));
  return {{"shape", to_string(cb.shape())},
          {"center", to_json(cb.center())},
          {"radii", to_json(cb.radii())},
          {"codewords", std::move(words)}};
}

Codebook codebook_from(const json& j) {
  std::vector<Vec3> words;
  for (const auto& w : j.at("codewords")) words.push_back(vec3_from(w));
  return Codebook(std::move(words), codebook_shape_from_string(j.at("shape").get<std::string>()),
                  vec3_from(j.at("center")), vec3_from(j.at("radii")));
}

json to_json(const Topology& t) {
  return {{"kind", t.kind == TopologyKind::kErgodic ? "ergodic" : "left_to_right"}, {"band", t.band}};
}

Topology topology_from(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "ergodic") return Topology::ergodic();
  if (kind == "left_to_right") return Topology::left_to_right(j.at("band").get<int>());
  throw FormatError("unknown topology '" + kind + "'");
}

json to_json(const Hmm& h) {
  return {{"n_states", h.n_states()},
          {"n_symbols", h.n_symbols()},
          {"topology", to_json(h.topology())},
          {"A", to_json(h.transitions())},
          {"B", to_json(h.emissions())},
          {"pi", h.initial()}};
}

Hmm hmm_from(const json& j) {
  Hmm h(matrix_from(j.at("A")), matrix_from(j.at("B")), j.at("pi").get<std::vector<double>>(),
        topology_from(j.at("topology")));
  if (h.n_states() != j.at("n_states").get<std::size_t>() || h.n_symbols() != j.at("n_symbols").get<std::size_t>()) {
    throw FormatError("HMM dimensions disagree with its matrices");
  }
  return h;
}

json to_json(const AxisGaussian& g) { return {{"mean", to_json(g.mean)}, {"stddev", to_json(g.stddev)}}; }

AxisGaussian axis_from(const json& j) { return {vec3_from(j.at("mean")), vec3_from(j.at("stddev"))}; }

json to_json(const CodewordErrorModel& m) {
  json comps = json::array();
  for (const auto& c : m.magnitude.components) {
    comps.push_back({{"weight", c.weight}, {"mean", c.mean}, {"stddev", c.stddev}});
  }
  json bands = json::array();
  for (const auto& b : m.band_axis) bands.push_back(to_json(b));
  return {{"axis", to_json(m.axis)},
          {"components", std::move(comps)},
          {"fallback", m.magnitude.fallback},
          {"band_axis", std::move(bands)},
          {"residual_count", m.residual_count},
          {"inherited", m.inherited}};
}

CodewordErrorModel codeword_model_from(const json& j) {
  CodewordErrorModel m;
  m.axis = axis_from(j.at("axis"));
  for (const auto& c : j.at("components")) {
    m.magnitude.components.push_back(
        {c.at("weight").get<double>(), c.at("mean").get<double>(), c.at("stddev").get<double>()});
  }
  m.magnitude.fallback = j.at("fallback").get<bool>();
  for (const auto& b : j.at("band_axis")) m.band_axis.push_back(axis_from(b));
  m.residual_count = j.at("residual_count").get<std::size_t>();
  m.inherited = j.at("inherited").get<bool>();
  return m;
}

json to_json(const GmmErrorModel& e) {
  json words = json::array();
  for (const auto& c : e.codewords()) words.push_back(to_json(c));
  return {{"global", to_json(e.global())}, {"codewords", std::move(words)}};
}

GmmErrorModel error_model_from(const json& j) {
  std::vector<CodewordErrorModel> words;
  for (const auto& c : j.at("codewords")) words.push_back(codeword_model_from(c));
  return GmmErrorModel(std::move(words), codeword_model_from(j.at("global")));
}

}  // namespace

void validate_models(std::span<const GestureModel> models) {
  if (models.empty()) throw ValidationError("model set is empty");
  std::set<std::string> labels;
  double total = 0.0;
  for (const auto& m : models) {
    if (!labels.insert(m.label).second) throw ValidationError("duplicate gesture label '" + m.label + "'");
    if (!m.codebook) throw ValidationError("gesture '" + m.label + "' has no codebook");
    if (m.hmm.n_symbols() != m.codebook->size()) {
      throw ValidationError("gesture '" + m.label + "' HMM alphabet does not match its codebook");
    }
    if (m.error_model.size() != m.codebook->size()) {
      throw ValidationError("gesture '" + m.label + "' error model does not match its codebook");
    }
    if (!(m.prior > 0.0 && m.prior <= 1.0)) throw ValidationError("gesture '" + m.label + "' prior outside (0, 1]");
    total += m.prior;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ValidationError("gesture priors do not sum to 1");
}

bool shares_codebook(std::span<const GestureModel> models) {
  if (models.empty()) return false;
  for (const auto& m : models) {
    if (m.codebook != models.front().codebook) return false;
  }
  return true;
}

std::vector<GestureModel> set_priors(std::vector<GestureModel> models, std::span<const double> weights) {
  if (weights.size() != models.size()) throw ValidationError("need one prior weight per gesture");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("prior weights must be non-negative");
    total += w;
  }
  if (!(total > 0.0)) throw ValidationError("prior weights are all zero");
  for (std::size_t i = 0; i < models.size(); ++i) models[i].prior = weights[i] / total;
  return models;
}

std::vector<double> priors_of(std::span<const GestureModel> models) {
  std::vector<double> out;
  out.reserve(models.size());
  for (const auto& m : models) out.push_back(m.prior);
  return out;
}

std::string models_to_json(std::span<const GestureModel> models) {
  validate_models(models);
  const bool shared = models.size() > 1 && shares_codebook(models);
  json doc;
  doc["version"] = kModelFormatVersion;
  if (shared) doc["shared_codebook"] = to_json(*models.front().codebook);
  json list = json::array();
  for (const auto& m : models) {
    list.push_back({{"label", m.label},
                    {"prior", m.prior},
                    {"codebook", shared ? json("shared") : to_json(*m.codebook)},
                    {"hmm", to_json(m.hmm)},
                    {"error_model", to_json(m.error_model)}});
  }
  doc["models"] = std::move(list);
  return doc.dump(1) + "\n";
}

std::vector<GestureModel> models_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (!doc.is_object() || !doc.contains("version")) throw FormatError("model file has no version field");
    const int version = doc.at("version").get<int>();
    if (version != kModelFormatVersion) throw UnsupportedVersionError(version);
    std::shared_ptr<const Codebook> shared;
    if (doc.contains("shared_codebook")) shared = std::make_shared<const Codebook>(codebook_from(doc["shared_codebook"]));
    std::vector<GestureModel> models;
    for (const auto& j : doc.at("models")) {
      GestureModel m;
      m.label = j.at("label").get<std::string>();
      m.prior = j.at("prior").get<double>();
      const auto& cb = j.at("codebook");
      if (cb.is_string()) {
        if (cb.get<std::string>() != "shared" || !shared) throw FormatError("dangling shared codebook reference");
        m.codebook = shared;
      } else {
        m.codebook = std::make_shared<const Codebook>(codebook_from(cb));
      }
      m.hmm = hmm_from(j.at("hmm"));
      m.error_model = error_model_from(j.at("error_model"));
      models.push_back(std::move(m));
    }
    validate_models(models);
    return models;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed model file: ") + e.what());
  } catch (const FormatError&) {
    throw;
  } catch (const ValidationError& e) {
    throw FormatError(std::string("model file violates an invariant: ") + e.what());
  }
}

void save_models(std::span<const GestureModel> models, const std::filesystem::path& path) {
  const auto text = models_to_json(models);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write model file " + path.string());
  out << text;
}

std::vector<GestureModel> load_models(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return models_from_json(ss.str());
}

}  // namespace gesturekit
