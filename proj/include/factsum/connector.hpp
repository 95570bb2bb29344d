#pragma once

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "factsum/corpus.hpp"

namespace factsum {

struct ConnectorConfig {
  std::string mask_token = "<mask>";
  std::size_t position = 1;  // insert before this (1-based) sentence
};

class PositionOutOfRange : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

void validate_connector_config(const ConnectorConfig& config);

/// Document text with `mask_token` and one space spliced in front of sentence
/// `position`. Everything else is preserved byte for byte.
std::string insert_mask(const AnnotatedDocument& doc, const ConnectorConfig& config);

/// Score computed by the caller for a corpus sample masked at one position.
using SweepEvaluator = std::function<double(const std::vector<std::string>& masked_texts, std::size_t position)>;

struct SweepRow {
  std::size_t position = 0;
  std::optional<double> score;  // empty when evaluation failed
  std::string error;
};

struct SweepResult {
  std::size_t best_position = 0;
  std::vector<SweepRow> table;
};

/// Masks the sample at every position, evaluates each, and returns the
/// best-scoring position (smallest on ties). Documents with fewer sentences
/// than a position are passed to the evaluator unmasked for that position.
SweepResult sweep_positions(const std::vector<AnnotatedDocument>& sample, const std::vector<std::size_t>& positions,
                            const SweepEvaluator& evaluate, const std::string& mask_token = "<mask>");

}  // namespace factsum
