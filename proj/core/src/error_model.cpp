#include "gesturekit/error_model.hpp"

#include <algorithm>
#include <cmath>

#include "gesturekit/error.hpp"
#include "gesturekit/rng.hpp"

namespace gesturekit {

namespace {

constexpr std::size_t kMinResidualsPerBand = 3;

std::vector<double> magnitudes(std::span<const Vec3> offsets) {
  std::vector<double> out;
  out.reserve(offsets.size());
  for (const auto& o : offsets) out.push_back(norm(o));
  return out;
}

CodewordErrorModel fit_codeword(std::span<const Vec3> offsets, std::uint64_t seed, const MixtureFitConfig& cfg) {
  CodewordErrorModel m;
  m.residual_count = offsets.size();
  m.axis = axis_statistics(offsets, cfg.sigma_floor);
  const auto mags = magnitudes(offsets);
  m.magnitude = fit_gmm(mags, cfg, seed).mixture;

  std::vector<std::vector<Vec3>> bands(m.magnitude.components.size());
  for (std::size_t i = 0; i < offsets.size(); ++i) bands[m.magnitude.select(mags[i])].push_back(offsets[i]);
  for (const auto& band : bands) {
    m.band_axis.push_back(band.size() >= kMinResidualsPerBand ? axis_statistics(band, cfg.sigma_floor) : m.axis);
  }
  return m;
}

}  // namespace

std::size_t ResidualSet::total() const {
  std::size_t n = 0;
  for (const auto& r : per_codeword) n += r.size();
  return n;
}

ResidualSet compute_residuals(std::span<const Trace> traces, const Codebook& codebook, const QuantizeOptions& options) {
  ResidualSet out;
  out.per_codeword.resize(codebook.size());
  for (const auto& tr : traces) {
    const auto points = prepare_points(tr, options);
    if (out.per_timestep.size() < points.size()) out.per_timestep.resize(points.size());
    for (std::size_t t = 0; t < points.size(); ++t) {
      const std::size_t i = codebook.nearest(points[t]);
      const Vec3 offset = points[t] - codebook[i];
      out.per_codeword[i].push_back(offset);
      out.per_timestep[t].push_back(offset);
    }
  }
  return out;
}

AxisGaussian axis_statistics(std::span<const Vec3> offsets, double sigma_floor) {
  AxisGaussian g;
  g.stddev = {sigma_floor, sigma_floor, sigma_floor};
  if (offsets.empty()) return g;
  const double n = static_cast<double>(offsets.size());
  for (int k = 0; k < 3; ++k) {
    double mean = 0.0;
    for (const auto& o : offsets) mean += o[k];
    mean /= n;
    double var = 0.0;
    for (const auto& o : offsets) var += (o[k] - mean) * (o[k] - mean);
    g.mean[k] = mean;
    g.stddev[k] = std::max(std::sqrt(var / n), sigma_floor);
  }
  return g;
}

GmmErrorModel::GmmErrorModel(std::vector<CodewordErrorModel> codewords, CodewordErrorModel global)
    : codewords_(std::move(codewords)), global_(std::move(global)) {
  auto check = [](const CodewordErrorModel& m) {
    if (m.magnitude.components.empty() || m.band_axis.size() != m.magnitude.components.size()) {
      throw ValidationError("error model codeword has inconsistent mixture bands");
    }
    double w = 0.0;
    for (const auto& c : m.magnitude.components) w += c.weight;
    if (std::abs(w - 1.0) > 1e-9) throw ValidationError("error model mixture weights do not sum to 1");
  };
  for (const auto& c : codewords_) check(c);
  check(global_);
}

const AxisGaussian& GmmErrorModel::params_for(std::size_t codeword, const Vec3& offset) const {
  const auto& m = codewords_.at(codeword);
  return m.band_axis[m.magnitude.select(norm(offset))];
}

GmmErrorModel build_error_model(const ResidualSet& residuals, std::uint64_t seed, const ErrorModelConfig& cfg) {
  std::vector<Vec3> pooled;
  pooled.reserve(residuals.total());
  for (const auto& r : residuals.per_codeword) pooled.insert(pooled.end(), r.begin(), r.end());
  if (pooled.empty()) throw ValidationError("error model needs at least one residual");

  CodewordErrorModel global = fit_codeword(pooled, derive_seed(seed, residuals.per_codeword.size()), cfg.mixture);
  std::vector<CodewordErrorModel> per_codeword;
  per_codeword.reserve(residuals.per_codeword.size());
  for (std::size_t i = 0; i < residuals.per_codeword.size(); ++i) {
    const auto& r = residuals.per_codeword[i];
    if (r.size() < kMinResidualsPerCodeword) {
      CodewordErrorModel inherited = global;
      inherited.residual_count = r.size();
      inherited.inherited = true;
      per_codeword.push_back(std::move(inherited));
    } else {
      per_codeword.push_back(fit_codeword(r, derive_seed(seed, i), cfg.mixture));
    }
  }
  return GmmErrorModel(std::move(per_codeword), std::move(global));
}

GmmErrorModel build_error_model(std::span<const Trace> traces, const Codebook& codebook, std::uint64_t seed,
                                const ErrorModelConfig& cfg) {
  if (traces.empty()) throw ValidationError("error model needs at least one trace");
  return build_error_model(compute_residuals(traces, codebook, cfg.quantize), seed, cfg);
}

}  // namespace gesturekit
