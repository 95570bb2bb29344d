#include "factsum/rouge.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

namespace factsum {

namespace {

bool is_word_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

std::unordered_map<std::string, std::size_t> ngram_counts(const std::vector<std::string>& toks, int n) {
  std::unordered_map<std::string, std::size_t> counts;
  if (toks.size() < static_cast<std::size_t>(n)) return counts;
  for (std::size_t i = 0; i + n <= toks.size(); ++i) {
    std::string key = toks[i];
    for (int k = 1; k < n; ++k) {
      key.push_back('\x1f');
      key += toks[i + k];
    }
    ++counts[key];
  }
  return counts;
}

}  // namespace

RougeScore RougeScore::from_counts(std::size_t overlap, std::size_t candidate_total, std::size_t reference_total) {
  RougeScore s;
  if (candidate_total == 0 || reference_total == 0) return s;
  s.precision = static_cast<double>(overlap) / static_cast<double>(candidate_total);
  s.recall = static_cast<double>(overlap) / static_cast<double>(reference_total);
  if (overlap > 0) s.f1 = 2.0 * static_cast<double>(overlap) / static_cast<double>(candidate_total + reference_total);
  return s;
}

RougeVariant parse_rouge_variant(std::string_view s) {
  if (s == "R1" || s == "r1" || s == "rouge1") return RougeVariant::R1;
  if (s == "R2" || s == "r2" || s == "rouge2") return RougeVariant::R2;
  if (s == "RL" || s == "rl" || s == "rougeL") return RougeVariant::RL;
  throw std::invalid_argument("unknown ROUGE variant '" + std::string(s) + "'");
}

const char* to_string(RougeVariant v) {
  switch (v) {
    case RougeVariant::R1: return "R1";
    case RougeVariant::R2: return "R2";
    case RougeVariant::RL: return "RL";
  }
  return "?";
}

std::vector<std::string> rouge_tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (is_word_byte(c)) {
      cur.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : ch);
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

RougeScore rouge_n_tokens(const std::vector<std::string>& candidate, const std::vector<std::string>& reference,
                          int n) {
  if (n != 1 && n != 2) throw std::invalid_argument("rouge_n: n must be 1 or 2");
  const auto cand = ngram_counts(candidate, n);
  const auto ref = ngram_counts(reference, n);
  std::size_t cand_total = candidate.size() >= static_cast<std::size_t>(n) ? candidate.size() - n + 1 : 0;
  std::size_t ref_total = reference.size() >= static_cast<std::size_t>(n) ? reference.size() - n + 1 : 0;
  std::size_t overlap = 0;
  for (const auto& [gram, c] : cand) {
    auto it = ref.find(gram);
    if (it != ref.end()) overlap += std::min(c, it->second);
  }
  return RougeScore::from_counts(overlap, cand_total, ref_total);
}

RougeScore rouge_l_tokens(const std::vector<std::string>& candidate, const std::vector<std::string>& reference) {
  if (candidate.empty() || reference.empty()) return {};
  // Two-row LCS table.
  std::vector<std::size_t> prev(reference.size() + 1, 0), cur(reference.size() + 1, 0);
  for (const auto& c : candidate) {
    for (std::size_t j = 1; j <= reference.size(); ++j)
      cur[j] = (c == reference[j - 1]) ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return RougeScore::from_counts(prev.back(), candidate.size(), reference.size());
}

RougeScore rouge_n(std::string_view candidate, std::string_view reference, int n) {
  return rouge_n_tokens(rouge_tokenize(candidate), rouge_tokenize(reference), n);
}

RougeScore rouge_l(std::string_view candidate, std::string_view reference) {
  return rouge_l_tokens(rouge_tokenize(candidate), rouge_tokenize(reference));
}

RougeScore rouge(RougeVariant variant, std::string_view candidate, std::string_view reference) {
  switch (variant) {
    case RougeVariant::R1: return rouge_n(candidate, reference, 1);
    case RougeVariant::R2: return rouge_n(candidate, reference, 2);
    case RougeVariant::RL: return rouge_l(candidate, reference);
  }
  return {};
}

}  // namespace factsum
