#include "factsum/nt_xent.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace factsum {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void check_dims(std::span<const double> z_doc, std::span<const double> z_pos, std::span<const Vector> z_negs) {
  if (z_pos.size() != z_doc.size()) throw std::invalid_argument("nt_xent: positive dimension mismatch");
  for (const auto& v : z_negs)
    if (v.size() != z_doc.size()) throw std::invalid_argument("nt_xent: negative dimension mismatch");
}

// d cos(a, b) / d a
Vector cosine_grad(std::span<const double> a, std::span<const double> b, double cos) {
  const double na = std::sqrt(dot(a, a));
  const double nb = std::sqrt(dot(b, b));
  Vector g(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) g[i] = b[i] / (na * nb) - cos * a[i] / (na * na);
  return g;
}

// -log softmax(logits)[0], written as (max - l0) + log1p(sum of the other
// exp(l - max)) so tiny losses keep their precision.
double log_softmax_loss(const std::vector<double>& logits) {
  const auto top = static_cast<std::size_t>(std::max_element(logits.begin(), logits.end()) - logits.begin());
  const double mx = logits[top];
  double rest = 0.0;
  for (std::size_t j = 0; j < logits.size(); ++j)
    if (j != top) rest += std::exp(logits[j] - mx);
  return std::max(0.0, (mx - logits[0]) + std::log1p(rest));
}

}  // namespace

void validate_loss_config(const LossConfig& config) {
  if (!(config.tau > 0.0)) throw std::invalid_argument("tau must be > 0");
  if (!(config.lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
}

Vector mean_pool(std::span<const Vector> rows) {
  if (rows.empty()) throw std::invalid_argument("mean_pool: no rows");
  Vector out(rows.front().size(), 0.0);
  for (const auto& r : rows) {
    if (r.size() != out.size()) throw std::invalid_argument("mean_pool: ragged rows");
    for (std::size_t i = 0; i < r.size(); ++i) out[i] += r[i];
  }
  for (auto& v : out) v /= static_cast<double>(rows.size());
  return out;
}

double cosine_sim(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("cosine_sim: dimension mismatch");
  const double na = std::sqrt(dot(a, a));
  const double nb = std::sqrt(dot(b, b));
  if (na == 0.0 || nb == 0.0) throw std::invalid_argument("cosine_sim: zero-norm vector");
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

double nt_xent_loss(std::span<const double> z_doc, std::span<const double> z_pos, std::span<const Vector> z_negs,
                    double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("nt_xent: tau must be > 0");
  check_dims(z_doc, z_pos, z_negs);
  std::vector<double> logits;
  logits.reserve(z_negs.size() + 1);
  logits.push_back(cosine_sim(z_doc, z_pos) / tau);
  for (const auto& v : z_negs) logits.push_back(cosine_sim(z_doc, v) / tau);
  return log_softmax_loss(logits);
}

NtXentResult nt_xent_with_grad(std::span<const double> z_doc, std::span<const double> z_pos,
                               std::span<const Vector> z_negs, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("nt_xent: tau must be > 0");
  check_dims(z_doc, z_pos, z_negs);
  const std::size_t m = z_negs.size() + 1;
  auto candidate = [&](std::size_t j) -> std::span<const double> {
    return j == 0 ? z_pos : std::span<const double>(z_negs[j - 1]);
  };

  std::vector<double> sims(m), logits(m);
  for (std::size_t j = 0; j < m; ++j) {
    sims[j] = cosine_sim(z_doc, candidate(j));
    logits[j] = sims[j] / tau;
  }
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(m);
  double sum = 0.0;
  for (std::size_t j = 0; j < m; ++j) sum += (p[j] = std::exp(logits[j] - mx));
  for (auto& v : p) v /= sum;

  NtXentResult r;
  r.loss = log_softmax_loss(logits);
  r.grad_doc.assign(z_doc.size(), 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    // dL/dsim_j = (p_j - [j == positive]) / tau
    const double coeff = (p[j] - (j == 0 ? 1.0 : 0.0)) / tau;
    const auto c = candidate(j);
    const auto g_doc = cosine_grad(z_doc, c, sims[j]);
    for (std::size_t i = 0; i < g_doc.size(); ++i) r.grad_doc[i] += coeff * g_doc[i];
    auto g_c = cosine_grad(c, z_doc, sims[j]);
    for (auto& v : g_c) v *= coeff;
    if (j == 0) r.grad_pos = std::move(g_c);
    else r.grad_negs.push_back(std::move(g_c));
  }
  return r;
}

}  // namespace factsum
