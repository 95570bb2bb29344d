#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace factsum {

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  static RougeScore from_counts(std::size_t overlap, std::size_t candidate_total, std::size_t reference_total);
};

enum class RougeVariant { R1, R2, RL };

RougeVariant parse_rouge_variant(std::string_view s);
const char* to_string(RougeVariant v);

/// Lowercased ASCII alphanumeric runs. Bytes >= 0x80 count as word characters
/// so UTF-8 words are kept whole. No stemming.
std::vector<std::string> rouge_tokenize(std::string_view text);

RougeScore rouge_n(std::string_view candidate, std::string_view reference, int n);
RougeScore rouge_l(std::string_view candidate, std::string_view reference);
RougeScore rouge(RougeVariant variant, std::string_view candidate, std::string_view reference);

// Token-level variants, for callers that tokenize once.
RougeScore rouge_n_tokens(const std::vector<std::string>& candidate, const std::vector<std::string>& reference, int n);
RougeScore rouge_l_tokens(const std::vector<std::string>& candidate, const std::vector<std::string>& reference);

}  // namespace factsum
