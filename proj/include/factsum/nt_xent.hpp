#pragma once

#include <span>
#include <vector>

namespace factsum {

struct LossConfig {
  double tau = 0.05;
  double lambda = 5.0;
};

void validate_loss_config(const LossConfig& config);

using Vector = std::vector<double>;

/// Column-wise mean of an n x d matrix given as rows. Throws on n == 0 or ragged rows.
Vector mean_pool(std::span<const Vector> rows);

/// Cosine similarity; throws on zero-norm input or dimension mismatch.
double cosine_sim(std::span<const double> a, std::span<const double> b);

struct NtXentResult {
  double loss = 0.0;
  Vector grad_doc;
  Vector grad_pos;
  std::vector<Vector> grad_negs;
};

/// -log softmax of the positive among {positive} U negatives, over cosine
/// similarities to the anchor divided by tau. Max-logit stabilized.
double nt_xent_loss(std::span<const double> z_doc, std::span<const double> z_pos, std::span<const Vector> z_negs,
                    double tau);

/// Loss together with its analytic gradient with respect to every input vector.
NtXentResult nt_xent_with_grad(std::span<const double> z_doc, std::span<const double> z_pos,
                               std::span<const Vector> z_negs, double tau);

inline double combined_loss(double ce, double cl, double lambda) { return ce + lambda * cl; }

}  // namespace factsum
