#include "vitalnet/tsne.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "vitalnet/error.hpp"
#include "vitalnet/rng.hpp"
#include "vitalnet/stats.hpp"

namespace vitalnet::tsne {

Matrix squared_distances(const Matrix& x) {
  const std::size_t n = x.rows();
  Matrix d(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < x.cols(); ++k) {
        const double diff = x(i, k) - x(j, k);
        s += diff * diff;
      }
      d(i, j) = s;
      d(j, i) = s;
    }
  }
  return d;
}

namespace {

// Fills row i of `out` with exp(-beta (d - d_min)) normalized, returns the
// entropy in bits.
double gaussian_row(const Matrix& dist, std::size_t i, double beta, Matrix& out) {
  const std::size_t n = dist.rows();
  double d_min = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    if (j != i) d_min = std::min(d_min, dist(i, j));
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double v = j == i ? 0.0 : std::exp(-beta * (dist(i, j) - d_min));
    out(i, j) = v;
    sum += v;
  }
  double entropy = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    out(i, j) /= sum;
    if (out(i, j) > 0.0) entropy -= out(i, j) * std::log2(out(i, j));
  }
  return entropy;
}

}  // namespace

double row_perplexity(const Matrix& conditional, std::size_t row) {
  double entropy = 0.0;
  for (std::size_t j = 0; j < conditional.cols(); ++j) {
    const double p = conditional(row, j);
    if (j != row && p > 0.0) entropy -= p * std::log2(p);
  }
  return std::exp2(entropy);
}

Matrix conditional_affinities(const Matrix& x, double perplexity) {
  const std::size_t n = x.rows();
  if (!(perplexity >= 2.0)) throw ValidationError("t-SNE: perplexity must be at least 2");
  if (!(perplexity < static_cast<double>(n))) {
    throw ValidationError("t-SNE: perplexity " + std::to_string(perplexity) + " must be below the point count " +
                          std::to_string(n));
  }
  const Matrix dist = squared_distances(x);
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    // Search log(beta): expand the bracket, then bisect.
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    double log_beta = 0.0;
    bool converged = false;
    for (int step = 0; step < kMaxBisectionSteps; ++step) {
      const double realized = std::exp2(gaussian_row(dist, i, std::exp(log_beta), out));
      if (std::fabs(realized - perplexity) < kPerplexityTolerance) {
        converged = true;
        break;
      }
      // Larger beta concentrates the row and lowers its perplexity.
      if (realized > perplexity) {
        lo = log_beta;
        log_beta = std::isinf(hi) ? log_beta + 2.0 : 0.5 * (lo + hi);
      } else {
        hi = log_beta;
        log_beta = std::isinf(lo) ? log_beta - 2.0 : 0.5 * (lo + hi);
      }
    }
    if (!converged) {
      throw Error("t-SNE: perplexity search did not converge for row " + std::to_string(i));
    }
  }
  return out;
}

AffinityMatrix symmetrize(const Matrix& conditional, double perplexity) {
  const std::size_t n = conditional.rows();
  AffinityMatrix a{Matrix(n, n), perplexity};
  const double scale = 1.0 / (2.0 * static_cast<double>(n));
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = std::max((conditional(i, j) + conditional(j, i)) * scale, kAffinityFloor);
      a.p(i, j) = v;
      a.p(j, i) = v;
      total += 2.0 * v;
    }
  }
  for (double& v : a.p.data()) v /= total;
  return a;
}

Matrix joint_q(const Matrix& y) {
  const std::size_t n = y.rows();
  Matrix q(n, n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = y(i, 0) - y(j, 0);
      const double dy = y(i, 1) - y(j, 1);
      const double w = 1.0 / (1.0 + dx * dx + dy * dy);
      q(i, j) = w;
      q(j, i) = w;
      total += 2.0 * w;
    }
  }
  for (double& v : q.data()) v /= total;
  return q;
}

double kl_divergence(const Matrix& p, const Matrix& y) {
  const Matrix q = joint_q(y);
  double kl = 0.0;
  for (std::size_t i = 0; i < p.rows(); ++i) {
    for (std::size_t j = 0; j < p.cols(); ++j) {
      if (i != j && p(i, j) > 0.0) kl += p(i, j) * std::log(p(i, j) / std::max(q(i, j), 1e-300));
    }
  }
  return std::max(kl, 0.0);
}

Matrix kl_gradient(const Matrix& p, const Matrix& y) {
  const std::size_t n = y.rows();
  Matrix w(n, n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = y(i, 0) - y(j, 0);
      const double dy = y(i, 1) - y(j, 1);
      const double v = 1.0 / (1.0 + dx * dx + dy * dy);
      w(i, j) = v;
      w(j, i) = v;
      total += 2.0 * v;
    }
  }
  Matrix grad(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double coeff = 4.0 * (p(i, j) - w(i, j) / total) * w(i, j);
      grad(i, 0) += coeff * (y(i, 0) - y(j, 0));
      grad(i, 1) += coeff * (y(i, 1) - y(j, 1));
    }
  }
  return grad;
}

Embedding embed_affinities(const AffinityMatrix& affinities, const EmbedOptions& options) {
  const std::size_t n = affinities.p.rows();
  if (n < 4) throw ValidationError("t-SNE: need at least 4 points");

  Rng rng(options.seed);
  Embedding e{Matrix(n, 2), {}};
  for (double& v : e.y.data()) v = options.init_scale * rng.normal();

  Matrix velocity(n, 2), gains(n, 2, 1.0);
  Matrix exaggerated = affinities.p;
  for (double& v : exaggerated.data()) v *= options.exaggeration;

  e.kl_history.reserve(options.iterations);
  for (std::size_t it = 0; it < options.iterations; ++it) {
    const Matrix& p = it < options.exaggeration_iterations ? exaggerated : affinities.p;
    const double momentum = it < options.momentum_switch ? options.initial_momentum : options.final_momentum;
    const Matrix grad = kl_gradient(p, e.y);
    for (std::size_t k = 0; k < grad.data().size(); ++k) {
      double& gain = gains.data()[k];
      const double g = grad.data()[k];
      double& vel = velocity.data()[k];
      gain = (g > 0.0) != (vel > 0.0) ? gain + 0.2 : gain * 0.8;
      gain = std::max(gain, options.min_gain);
      vel = momentum * vel - options.learning_rate * gain * g;
      e.y.data()[k] += vel;
    }
    // Keep the embedding centered.
    for (std::size_t d = 0; d < 2; ++d) {
      double mean = 0.0;
      for (std::size_t i = 0; i < n; ++i) mean += e.y(i, d);
      mean /= static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) e.y(i, d) -= mean;
    }
    e.kl_history.push_back(kl_divergence(affinities.p, e.y));
  }
  return e;
}

Embedding embed(const Matrix& x, const EmbedOptions& options) {
  if (x.rows() < 4) throw ValidationError("t-SNE: need at least 4 points");
  return embed_affinities(symmetrize(conditional_affinities(x, options.perplexity), options.perplexity), options);
}

void write_embedding(const Embedding& embedding, std::span<const std::string> patient_ids,
                     std::span<const int> labels, std::ostream& out) {
  if (patient_ids.size() != embedding.y.rows() || labels.size() != embedding.y.rows()) {
    throw ShapeError("write_embedding: ids and labels must match the embedding rows");
  }
  out << "window_index,patient_id,label,y1,y2\n";
  for (std::size_t i = 0; i < embedding.y.rows(); ++i) {
    out << i << ',' << patient_ids[i] << ',' << labels[i] << ',' << format_fixed(embedding.y(i, 0)) << ','
        << format_fixed(embedding.y(i, 1)) << '\n';
  }
}

}  // namespace vitalnet::tsne
