#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gesturekit/quantizer.hpp"
#include "gesturekit/rng.hpp"

namespace gesturekit {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  const std::vector<double>& data() const { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

enum class TopologyKind { kErgodic, kLeftToRight };

struct Topology {
  TopologyKind kind = TopologyKind::kLeftToRight;
  /// Left-to-right only: state i may move to states i..i+band.
  int band = 3;

  static Topology ergodic() { return {TopologyKind::kErgodic, 0}; }
  static Topology left_to_right(int band = 3) { return {TopologyKind::kLeftToRight, band}; }

  friend bool operator==(const Topology&, const Topology&) = default;
};

std::string to_string(const Topology& t);

/// Which transitions and initial states a topology permits.
struct TopologyMask {
  std::vector<std::vector<bool>> transitions;
  std::vector<bool> initial;

  bool allowed(std::size_t from, std::size_t to) const { return transitions[from][to]; }
};

TopologyMask topology_mask(const Topology& topology, std::size_t n_states);

/// Discrete HMM θ = (A, B, π). Construction validates stochasticity and topology.
class Hmm {
 public:
  Hmm() = default;
  Hmm(Matrix transitions, Matrix emissions, std::vector<double> initial, Topology topology);

  std::size_t n_states() const { return a_.rows(); }
  std::size_t n_symbols() const { return b_.cols(); }
  const Matrix& transitions() const { return a_; }
  const Matrix& emissions() const { return b_; }
  const std::vector<double>& initial() const { return pi_; }
  const Topology& topology() const { return topology_; }

  double a(std::size_t i, std::size_t j) const { return a_(i, j); }
  double b(std::size_t i, std::size_t k) const { return b_(i, k); }
  double pi(std::size_t i) const { return pi_[i]; }

  friend bool operator==(const Hmm&, const Hmm&) = default;

 private:
  Matrix a_;
  Matrix b_;
  std::vector<double> pi_;
  Topology topology_;
};

/// Topology mask plus a seeded starting θ: uniform over allowed entries with
/// a relative perturbation of at most 1%. Throws ValidationError for band < 0
/// or n_states == 0.
struct InitialModel {
  TopologyMask mask;
  Hmm hmm;
};
InitialModel make_topology(const Topology& topology, std::size_t n_states, std::size_t n_symbols, std::uint64_t seed);

/// Precomputed sparse view of an HMM for repeated likelihood evaluation.
class LikelihoodEvaluator {
 public:
  explicit LikelihoodEvaluator(const Hmm& hmm);

  /// log P(obs | θ) via the scaled forward recursion; -inf when impossible.
  double log_likelihood(std::span<const Symbol> obs) const;

 private:
  struct Edge {
    std::size_t from;
    double p;
  };
  std::size_t n_states_;
  std::size_t n_symbols_;
  std::vector<double> pi_;
  std::vector<std::vector<Edge>> incoming_;
  std::vector<double> emission_by_symbol_;  // n_symbols x n_states
  mutable std::vector<double> alpha_, next_;
};

/// Throws ValidationError if obs is empty or contains a symbol outside the alphabet.
void check_observations(const Hmm& hmm, std::span<const Symbol> obs);

double log_likelihood(const Hmm& hmm, std::span<const Symbol> obs);

struct Posteriors {
  /// gamma(t, i) = P(state_t = i | obs).
  Matrix state;
  /// xi[t](i, j) = P(state_t = i, state_{t+1} = j | obs), t < T-1.
  std::vector<Matrix> transition;
  double log_likelihood = 0.0;
};

/// Scaled forward-backward. Throws ValidationError when obs has zero probability.
Posteriors forward_backward(const Hmm& hmm, std::span<const Symbol> obs);

struct TrainConfig {
  std::size_t n_states = 8;
  std::size_t n_symbols = kDefaultCodebookSize;
  Topology topology = Topology::left_to_right(3);
  std::size_t max_iters = 100;
  double tol = 1e-6;
  std::uint64_t seed = 0;
  /// Added to every emission after training, then rows renormalized.
  double emission_smoothing = 1e-6;
};

struct TrainReport {
  /// Total log-likelihood of the training set before each EM step, and after the last.
  std::vector<double> log_likelihood_history;
  std::size_t iterations = 0;
  bool converged = false;
  /// States whose rows were re-seeded because no sequence occupied them.
  std::vector<std::size_t> reseeded_states;
};

struct TrainResult {
  Hmm hmm;
  TrainReport report;
};

/// One multi-sequence Baum-Welch re-estimation of hmm. Masked entries stay 0;
/// rows of unoccupied states are reset to uniform over their allowed entries
/// and reported through `reseeded`.
Hmm baum_welch_step(const Hmm& hmm, const TopologyMask& mask, std::span<const SymbolSequence> sequences,
                    double* total_log_likelihood = nullptr, std::vector<std::size_t>* reseeded = nullptr);

TrainResult baum_welch_train(std::span<const SymbolSequence> sequences, const TrainConfig& cfg);

/// Same EM loop from an explicit starting point (no smoothing applied).
TrainResult baum_welch_from(const Hmm& start, const TopologyMask& mask, std::span<const SymbolSequence> sequences,
                            std::size_t max_iters, double tol);

Hmm smooth_emissions(const Hmm& hmm, double epsilon);

/// Draws an observation sequence of the given length from the model.
SymbolSequence sample_sequence(const Hmm& hmm, std::size_t length, Rng& rng);

}  // namespace gesturekit
