#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gesturekit/codebook.hpp"
#include "gesturekit/error_model.hpp"
#include "gesturekit/hmm.hpp"

namespace gesturekit {

/// Everything needed to score one gesture. Codebooks are shared by pointer so a
/// spherical model set holds a single codebook object.
struct GestureModel {
  std::string label;
  std::shared_ptr<const Codebook> codebook;
  Hmm hmm;
  GmmErrorModel error_model;
  double prior = 1.0;
};

/// Current model file format version.
inline constexpr int kModelFormatVersion = 1;

/// Throws ValidationError unless the set is non-empty, labels are unique,
/// priors lie in (0, 1] and sum to 1 within 1e-9.
void validate_models(std::span<const GestureModel> models);

/// True when every model points at the same codebook object.
bool shares_codebook(std::span<const GestureModel> models);

/// Normalizes non-negative weights into priors. Throws ValidationError on a
/// negative weight, an all-zero vector, or a size mismatch.
std::vector<GestureModel> set_priors(std::vector<GestureModel> models, std::span<const double> weights);

std::vector<double> priors_of(std::span<const GestureModel> models);

/// Versioned JSON document `{"version":1,"models":[...]}`. A shared codebook is
/// written once under "shared_codebook" and referenced as "shared".
std::string models_to_json(std::span<const GestureModel> models);
std::vector<GestureModel> models_from_json(const std::string& text);

void save_models(std::span<const GestureModel> models, const std::filesystem::path& path);
/// Throws UnsupportedVersionError or FormatError; never returns a partial set.
std::vector<GestureModel> load_models(const std::filesystem::path& path);

}  // namespace gesturekit
