#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "factsum/corpus.hpp"
#include "factsum/rouge.hpp"
#include "factsum/scorer.hpp"

namespace factsum {

struct SelectionConfig {
  RougeVariant variant = RougeVariant::R1;
  int candidate_pool = 5;  // sentences sent to the consistency scorer
  std::string mask_token = "<mask>";
  bool skip_short_docs = true;
};

struct SelectionScore {
  std::size_t sentence_index = 0;
  double rouge_f1 = 0.0;
  std::optional<int> factuality;  // empty = outside the candidate pool
  double combined = 0.0;
};

struct PseudoExample {
  std::string doc_id;
  std::string pseudo_document;
  std::string pseudo_summary;
  std::size_t selected_index = 0;
  std::vector<SelectionScore> scores;
};

class ShortDocumentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scores every sentence by ROUGE F1 against the rest of the document (other
/// sentences joined with single spaces), then asks `scorer` about the
/// `candidate_pool` best-by-ROUGE sentences only. `cache` may be null.
std::vector<SelectionScore> score_sentences(const AnnotatedDocument& doc, const SelectionConfig& config,
                                            ConsistencyScorer& scorer, VerdictCache* cache = nullptr);

/// Highest combined score among scored sentences; ties go to the lower index.
std::size_t select_gap_sentence(const std::vector<SelectionScore>& scores);

PseudoExample build_pseudo_example(const AnnotatedDocument& doc, std::size_t selected_index,
                                   const std::string& mask_token);

/// Inverse of build_pseudo_example's masking: puts the summary back in place of the mask.
std::string reconstruct(const std::string& pseudo_document, const std::string& pseudo_summary,
                        const std::string& mask_token);

void validate_selection_config(const SelectionConfig& config);

}  // namespace factsum
