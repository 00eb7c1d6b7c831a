#include "gesturekit/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gesturekit/error.hpp"

namespace gesturekit {

namespace {

constexpr double kStochasticTolerance = 1e-9;
constexpr double kOccupancyFloor = 1e-300;
constexpr double kInitPerturbation = 0.01;

void check_distribution(std::span<const double> row, const std::string& what) {
  double sum = 0.0;
  for (double v : row) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError(what + " has a negative or non-finite entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kStochasticTolerance) throw ValidationError(what + " does not sum to 1");
}

void fill_perturbed(std::span<double> row, const std::vector<bool>& allowed, Rng& rng) {
  std::uniform_real_distribution<double> jitter(-kInitPerturbation, kInitPerturbation);
  double sum = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    row[j] = allowed[j] ? 1.0 + jitter(rng) : 0.0;
    sum += row[j];
  }
  for (double& v : row) v /= sum;
}

void fill_uniform(std::span<double> row, const std::vector<bool>& allowed) {
  const auto n = static_cast<double>(std::count(allowed.begin(), allowed.end(), true));
  for (std::size_t j = 0; j < row.size(); ++j) row[j] = allowed[j] ? 1.0 / n : 0.0;
}

struct ScaledPasses {
  Matrix alpha;  // scaled forward variables
  Matrix beta;   // scaled backward variables
  std::vector<double> scale;
  double log_likelihood;
};

// Rabiner-style scaling: alpha rows sum to 1, beta shares the same scale factors.
// Returns false when the observation has zero probability.
bool scaled_passes(const Hmm& hmm, std::span<const Symbol> obs, ScaledPasses& out) {
  const std::size_t n = hmm.n_states();
  const std::size_t len = obs.size();
  out.alpha = Matrix(len, n);
  out.beta = Matrix(len, n);
  out.scale.assign(len, 0.0);
  out.log_likelihood = 0.0;

  for (std::size_t t = 0; t < len; ++t) {
    double c = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double v;
      if (t == 0) {
        v = hmm.pi(j);
      } else {
        v = 0.0;
        for (std::size_t i = 0; i < n; ++i) v += out.alpha(t - 1, i) * hmm.a(i, j);
      }
      v *= hmm.b(j, static_cast<std::size_t>(obs[t]));
      out.alpha(t, j) = v;
      c += v;
    }
    if (!(c > 0.0)) return false;
    out.scale[t] = c;
    out.log_likelihood += std::log(c);
    for (std::size_t j = 0; j < n; ++j) out.alpha(t, j) /= c;
  }

  for (std::size_t j = 0; j < n; ++j) out.beta(len - 1, j) = 1.0;
  for (std::size_t t = len - 1; t-- > 0;) {
    for (std::size_t i = 0; i < n; ++i) {
      double v = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        v += hmm.a(i, j) * hmm.b(j, static_cast<std::size_t>(obs[t + 1])) * out.beta(t + 1, j);
      }
      out.beta(t, i) = v / out.scale[t + 1];
    }
  }
  return true;
}

}  // namespace

std::string to_string(const Topology& t) {
  return t.kind == TopologyKind::kErgodic ? "ergodic" : "left_to_right(" + std::to_string(t.band) + ")";
}

TopologyMask topology_mask(const Topology& topology, std::size_t n_states) {
  if (n_states == 0) throw ValidationError("an HMM needs at least one state");
  TopologyMask mask;
  mask.transitions.assign(n_states, std::vector<bool>(n_states, true));
  mask.initial.assign(n_states, true);
  if (topology.kind == TopologyKind::kLeftToRight) {
    if (topology.band < 0) throw ValidationError("left-to-right band must be non-negative");
    const auto band = static_cast<std::size_t>(topology.band);
    for (std::size_t i = 0; i < n_states; ++i) {
      for (std::size_t j = 0; j < n_states; ++j) mask.transitions[i][j] = j >= i && j <= i + band;
    }
    for (std::size_t i = 1; i < n_states; ++i) mask.initial[i] = false;
  }
  return mask;
}

Hmm::Hmm(Matrix transitions, Matrix emissions, std::vector<double> initial, Topology topology)
    : a_(std::move(transitions)), b_(std::move(emissions)), pi_(std::move(initial)), topology_(topology) {
  const std::size_t n = a_.rows();
  if (n == 0 || a_.cols() != n) throw ValidationError("transition matrix must be square and non-empty");
  if (b_.rows() != n || b_.cols() == 0) throw ValidationError("emission matrix must have one row per state");
  if (pi_.size() != n) throw ValidationError("initial distribution must have one entry per state");
  for (std::size_t i = 0; i < n; ++i) {
    check_distribution(a_.row(i), "transition row " + std::to_string(i));
    check_distribution(b_.row(i), "emission row " + std::to_string(i));
  }
  check_distribution(pi_, "initial distribution");
  const auto mask = topology_mask(topology_, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!mask.allowed(i, j) && a_(i, j) != 0.0) {
        throw ValidationError("transition " + std::to_string(i) + "->" + std::to_string(j) + " violates " +
                              to_string(topology_));
      }
    }
  }
}

InitialModel make_topology(const Topology& topology, std::size_t n_states, std::size_t n_symbols, std::uint64_t seed) {
  auto mask = topology_mask(topology, n_states);
  if (n_symbols == 0) throw ValidationError("an HMM needs at least one symbol");
  Rng rng(seed);
  Matrix a(n_states, n_states);
  Matrix b(n_states, n_symbols);
  std::vector<double> pi(n_states);
  const std::vector<bool> all_symbols(n_symbols, true);
  for (std::size_t i = 0; i < n_states; ++i) fill_perturbed(a.row(i), mask.transitions[i], rng);
  for (std::size_t i = 0; i < n_states; ++i) fill_perturbed(b.row(i), all_symbols, rng);
  fill_perturbed(pi, mask.initial, rng);
  return {std::move(mask), Hmm(std::move(a), std::move(b), std::move(pi), topology)};
}

LikelihoodEvaluator::LikelihoodEvaluator(const Hmm& hmm)
    : n_states_(hmm.n_states()),
      n_symbols_(hmm.n_symbols()),
      pi_(hmm.initial()),
      incoming_(hmm.n_states()),
      emission_by_symbol_(hmm.n_symbols() * hmm.n_states()),
      alpha_(hmm.n_states()),
      next_(hmm.n_states()) {
  for (std::size_t i = 0; i < n_states_; ++i) {
    for (std::size_t j = 0; j < n_states_; ++j) {
      if (hmm.a(i, j) != 0.0) incoming_[j].push_back({i, hmm.a(i, j)});
    }
  }
  for (std::size_t k = 0; k < n_symbols_; ++k) {
    for (std::size_t j = 0; j < n_states_; ++j) emission_by_symbol_[k * n_states_ + j] = hmm.b(j, k);
  }
}

double LikelihoodEvaluator::log_likelihood(std::span<const Symbol> obs) const {
  const double neg_inf = -std::numeric_limits<double>::infinity();
  if (obs.empty()) return 0.0;
  double ll = 0.0;
  for (std::size_t t = 0; t < obs.size(); ++t) {
    const auto o = static_cast<std::size_t>(obs[t]);
    if (o >= n_symbols_) throw ValidationError("symbol " + std::to_string(obs[t]) + " is outside the alphabet");
    const double* emit = &emission_by_symbol_[o * n_states_];
    double c = 0.0;
    for (std::size_t j = 0; j < n_states_; ++j) {
      double v;
      if (t == 0) {
        v = pi_[j];
      } else {
        v = 0.0;
        for (const auto& e : incoming_[j]) v += alpha_[e.from] * e.p;
      }
      v *= emit[j];
      next_[j] = v;
      c += v;
    }
    if (!(c > 0.0)) return neg_inf;
    ll += std::log(c);
    const double inv = 1.0 / c;
    for (std::size_t j = 0; j < n_states_; ++j) alpha_[j] = next_[j] * inv;
  }
  return ll;
}

void check_observations(const Hmm& hmm, std::span<const Symbol> obs) {
  if (obs.empty()) throw ValidationError("observation sequence is empty");
  for (Symbol s : obs) {
    if (s < 0 || static_cast<std::size_t>(s) >= hmm.n_symbols()) {
      throw ValidationError("symbol " + std::to_string(s) + " is outside the alphabet of " +
                            std::to_string(hmm.n_symbols()));
    }
  }
}

double log_likelihood(const Hmm& hmm, std::span<const Symbol> obs) {
  check_observations(hmm, obs);
  return LikelihoodEvaluator(hmm).log_likelihood(obs);
}

Posteriors forward_backward(const Hmm& hmm, std::span<const Symbol> obs) {
  check_observations(hmm, obs);
  ScaledPasses p;
  if (!scaled_passes(hmm, obs, p)) throw ValidationError("observation sequence has zero probability");
  const std::size_t n = hmm.n_states();
  const std::size_t len = obs.size();
  Posteriors out;
  out.log_likelihood = p.log_likelihood;
  out.state = Matrix(len, n);
  for (std::size_t t = 0; t < len; ++t) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      out.state(t, i) = p.alpha(t, i) * p.beta(t, i);
      s += out.state(t, i);
    }
    for (std::size_t i = 0; i < n; ++i) out.state(t, i) /= s;
  }
  out.transition.reserve(len > 0 ? len - 1 : 0);
  for (std::size_t t = 0; t + 1 < len; ++t) {
    Matrix xi(n, n);
    double s = 0.0;
    const auto o = static_cast<std::size_t>(obs[t + 1]);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        xi(i, j) = p.alpha(t, i) * hmm.a(i, j) * hmm.b(j, o) * p.beta(t + 1, j);
        s += xi(i, j);
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) xi(i, j) /= s;
    }
    out.transition.push_back(std::move(xi));
  }
  return out;
}

Hmm baum_welch_step(const Hmm& hmm, const TopologyMask& mask, std::span<const SymbolSequence> sequences,
                    double* total_log_likelihood, std::vector<std::size_t>* reseeded) {
  const std::size_t n = hmm.n_states();
  const std::size_t v = hmm.n_symbols();
  Matrix trans_num(n, n);
  std::vector<double> trans_den(n, 0.0);
  Matrix emit_num(n, v);
  std::vector<double> emit_den(n, 0.0);
  std::vector<double> init(n, 0.0);
  double total = 0.0;
  std::size_t used = 0;

  ScaledPasses p;
  for (const auto& obs : sequences) {
    check_observations(hmm, obs);
    if (!scaled_passes(hmm, obs, p)) {
      total = -std::numeric_limits<double>::infinity();
      continue;
    }
    ++used;
    total += p.log_likelihood;
    const std::size_t len = obs.size();
    for (std::size_t t = 0; t < len; ++t) {
      // With this scaling alpha*beta already sums to 1 over states.
      const auto o = static_cast<std::size_t>(obs[t]);
      for (std::size_t i = 0; i < n; ++i) {
        const double g = p.alpha(t, i) * p.beta(t, i);
        if (t == 0) init[i] += g;
        emit_num(i, o) += g;
        emit_den[i] += g;
        if (t + 1 < len) trans_den[i] += g;
      }
      if (t + 1 < len) {
        const auto next = static_cast<std::size_t>(obs[t + 1]);
        const double inv_scale = 1.0 / p.scale[t + 1];
        for (std::size_t i = 0; i < n; ++i) {
          const double ai = p.alpha(t, i) * inv_scale;
          if (ai == 0.0) continue;
          for (std::size_t j = 0; j < n; ++j) {
            trans_num(i, j) += ai * hmm.a(i, j) * hmm.b(j, next) * p.beta(t + 1, j);
          }
        }
      }
    }
  }
  if (total_log_likelihood) *total_log_likelihood = total;
  if (used == 0) throw ValidationError("no training sequence has positive probability under the model");

  Matrix a(n, n);
  Matrix b(n, v);
  std::vector<double> pi(n);
  const std::vector<bool> all_symbols(v, true);
  for (std::size_t i = 0; i < n; ++i) {
    bool starved = false;
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += trans_num(i, j);
    if (trans_den[i] > kOccupancyFloor && row > kOccupancyFloor) {
      for (std::size_t j = 0; j < n; ++j) a(i, j) = mask.allowed(i, j) ? trans_num(i, j) / row : 0.0;
    } else {
      fill_uniform(a.row(i), mask.transitions[i]);
      starved = true;
    }
    if (emit_den[i] > kOccupancyFloor) {
      double erow = 0.0;
      for (std::size_t k = 0; k < v; ++k) erow += emit_num(i, k);
      for (std::size_t k = 0; k < v; ++k) b(i, k) = emit_num(i, k) / erow;
    } else {
      fill_uniform(b.row(i), all_symbols);
      starved = true;
    }
    if (starved && reseeded) reseeded->push_back(i);
  }
  double init_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) init_sum += mask.initial[i] ? init[i] : 0.0;
  for (std::size_t i = 0; i < n; ++i) pi[i] = mask.initial[i] ? init[i] / init_sum : 0.0;
  return Hmm(std::move(a), std::move(b), std::move(pi), hmm.topology());
}

TrainResult baum_welch_from(const Hmm& start, const TopologyMask& mask, std::span<const SymbolSequence> sequences,
                            std::size_t max_iters, double tol) {
  if (sequences.empty()) throw ValidationError("Baum-Welch needs at least one sequence");
  if (max_iters == 0) throw ValidationError("max_iters must be at least 1");
  if (!(tol > 0.0)) throw ValidationError("tol must be positive");
  TrainResult result{start, {}};
  double prev = -std::numeric_limits<double>::infinity();
  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    double ll = 0.0;
    std::vector<std::size_t> reseeded;
    Hmm next = baum_welch_step(result.hmm, mask, sequences, &ll, &reseeded);
    result.report.log_likelihood_history.push_back(ll);
    if (iter > 0 && ll - prev < tol) {
      result.report.converged = true;
      return result;
    }
    prev = ll;
    result.hmm = std::move(next);
    result.report.iterations = iter + 1;
    for (auto s : reseeded) {
      if (std::find(result.report.reseeded_states.begin(), result.report.reseeded_states.end(), s) ==
          result.report.reseeded_states.end()) {
        result.report.reseeded_states.push_back(s);
      }
    }
  }
  double final_ll = 0.0;
  LikelihoodEvaluator eval(result.hmm);
  for (const auto& obs : sequences) final_ll += eval.log_likelihood(obs);
  result.report.log_likelihood_history.push_back(final_ll);
  return result;
}

TrainResult baum_welch_train(std::span<const SymbolSequence> sequences, const TrainConfig& cfg) {
  auto init = make_topology(cfg.topology, cfg.n_states, cfg.n_symbols, cfg.seed);
  auto result = baum_welch_from(init.hmm, init.mask, sequences, cfg.max_iters, cfg.tol);
  if (cfg.emission_smoothing > 0.0) result.hmm = smooth_emissions(result.hmm, cfg.emission_smoothing);
  return result;
}

Hmm smooth_emissions(const Hmm& hmm, double epsilon) {
  Matrix b = hmm.emissions();
  for (std::size_t i = 0; i < b.rows(); ++i) {
    double s = 0.0;
    for (double& x : b.row(i)) {
      x += epsilon;
      s += x;
    }
    for (double& x : b.row(i)) x /= s;
  }
  return Hmm(hmm.transitions(), std::move(b), hmm.initial(), hmm.topology());
}

SymbolSequence sample_sequence(const Hmm& hmm, std::size_t length, Rng& rng) {
  auto draw = [&rng](std::span<const double> p) {
    std::discrete_distribution<std::size_t> d(p.begin(), p.end());
    return d(rng);
  };
  SymbolSequence out;
  out.reserve(length);
  if (length == 0) return out;
  std::size_t state = draw(hmm.initial());
  for (std::size_t t = 0; t < length; ++t) {
    out.push_back(static_cast<Symbol>(draw(hmm.emissions().row(state))));
    if (t + 1 < length) state = draw(hmm.transitions().row(state));
  }
  return out;
}

}  // namespace gesturekit
