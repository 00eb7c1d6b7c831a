#include "gesturekit/training.hpp"

#include <json.hpp>

#include "gesturekit/error.hpp"

namespace gesturekit {

GestureModel train_gesture(const std::string& label, std::span<const Trace> traces,
                           std::shared_ptr<const Codebook> codebook, const TrainingConfig& cfg, std::uint64_t seed,
                           GestureTrainingReport* report) {
  if (traces.empty()) throw ValidationError("gesture '" + label + "' has no training traces");
  if (!codebook) throw ValidationError("gesture '" + label + "' has no codebook");

  std::vector<SymbolSequence> sequences;
  sequences.reserve(traces.size());
  for (const auto& t : traces) sequences.push_back(quantize_deterministic(t, *codebook, cfg.error.quantize));

  TrainConfig hc;
  hc.n_states = cfg.n_states;
  hc.n_symbols = codebook->size();
  hc.topology = cfg.topology;
  hc.max_iters = cfg.max_iters;
  hc.tol = cfg.tol;
  hc.emission_smoothing = cfg.emission_smoothing;
  hc.seed = derive_seed(seed, 0);
  auto trained = baum_welch_train(sequences, hc);

  GestureModel m;
  m.label = label;
  m.codebook = codebook;
  m.hmm = std::move(trained.hmm);
  m.error_model = build_error_model(traces, *codebook, derive_seed(seed, 1), cfg.error);
  m.prior = 1.0;

  if (report) {
    report->label = label;
    report->traces = traces.size();
    report->hmm = std::move(trained.report);
    report->codeword_usage.assign(codebook->size(), 0);
    for (const auto& s : sequences) {
      for (Symbol x : s) ++report->codeword_usage[static_cast<std::size_t>(x)];
    }
    report->inherited_codewords = 0;
    for (const auto& c : m.error_model.codewords()) report->inherited_codewords += c.inherited ? 1 : 0;
  }
  return m;
}

TrainedModels train_all(const Dataset& train, const TrainingConfig& cfg) {
  train.require_trainable();
  TrainedModels out;
  std::shared_ptr<const Codebook> shared;
  if (uses_spherical_codebook(cfg.quantizer)) {
    shared = std::make_shared<const Codebook>(build_spherical_codebook(train, cfg.codebook_size));
  }
  const auto& labels = train.labels();
  for (std::size_t g = 0; g < labels.size(); ++g) {
    const auto traces = train.traces_for(labels[g]);
    auto codebook =
        shared ? shared : std::make_shared<const Codebook>(build_elliptical_codebook(traces, cfg.codebook_size));
    GestureTrainingReport report;
    out.models.push_back(train_gesture(labels[g], traces, codebook, cfg, derive_seed(cfg.seed, g), &report));
    out.reports.push_back(std::move(report));
  }
  const std::vector<double> uniform(out.models.size(), 1.0);
  out.models = set_priors(std::move(out.models), uniform);
  return out;
}

std::string training_report_json(const TrainedModels& trained) {
  nlohmann::json gestures = nlohmann::json::array();
  for (const auto& r : trained.reports) {
    gestures.push_back({{"label", r.label},
                        {"traces", r.traces},
                        {"iterations", r.hmm.iterations},
                        {"converged", r.hmm.converged},
                        {"log_likelihood", r.hmm.log_likelihood_history},
                        {"reseeded_states", r.hmm.reseeded_states},
                        {"codeword_usage", r.codeword_usage},
                        {"inherited_codewords", r.inherited_codewords}});
  }
  return nlohmann::json{{"gestures", std::move(gestures)}}.dump(1) + "\n";
}

}  // namespace gesturekit
