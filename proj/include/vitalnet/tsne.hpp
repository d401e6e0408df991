#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "vitalnet/matrix.hpp"

namespace vitalnet::tsne {

// Joint affinities P: symmetric, zero diagonal, summing to one.
struct AffinityMatrix {
  Matrix p;
  double perplexity = 0.0;
};

struct Embedding {
  Matrix y;                         // n x 2
  std::vector<double> kl_history;   // KL(P || Q) after each iteration
};

struct EmbedOptions {
  double perplexity = 30.0;
  std::size_t iterations = 1000;
  double learning_rate = 200.0;
  double exaggeration = 12.0;
  std::size_t exaggeration_iterations = 250;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  std::size_t momentum_switch = 250;
  double min_gain = 0.01;
  double init_scale = 1e-4;
  std::uint64_t seed = 1;
};

inline constexpr double kPerplexityTolerance = 1e-5;
inline constexpr int kMaxBisectionSteps = 200;
inline constexpr double kAffinityFloor = 1e-12;

Matrix squared_distances(const Matrix& x);

// Row-stochastic Gaussian affinities; each row's bandwidth is bisected until
// 2^H(row) matches the perplexity to within kPerplexityTolerance.
Matrix conditional_affinities(const Matrix& x, double perplexity);

// 2^(Shannon entropy in bits) of row i, ignoring the diagonal.
double row_perplexity(const Matrix& conditional, std::size_t row);

// (P_{j|i} + P_{i|j}) / 2n, off-diagonal entries floored then renormalized.
AffinityMatrix symmetrize(const Matrix& conditional, double perplexity = 0.0);

// Student-t similarities normalized over all pairs.
Matrix joint_q(const Matrix& y);
double kl_divergence(const Matrix& p, const Matrix& y);
// dKL/dY, n x 2.
Matrix kl_gradient(const Matrix& p, const Matrix& y);

Embedding embed(const Matrix& x, const EmbedOptions& options = {});
Embedding embed_affinities(const AffinityMatrix& affinities, const EmbedOptions& options = {});

// CSV: window_index,patient_id,label,y1,y2
void write_embedding(const Embedding& embedding, std::span<const std::string> patient_ids,
                     std::span<const int> labels, std::ostream& out);

}  // namespace vitalnet::tsne
