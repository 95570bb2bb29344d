#include "factsum/connector.hpp"

#include <exception>

#include "factsum/text.hpp"

namespace factsum {

void validate_connector_config(const ConnectorConfig& config) {
  if (config.mask_token.empty()) throw std::invalid_argument("mask token must be non-empty");
  for (char c : config.mask_token)
    if (is_space(c)) throw std::invalid_argument("mask token must not contain whitespace");
  if (config.position < 1) throw std::invalid_argument("mask position must be >= 1");
}

std::string insert_mask(const AnnotatedDocument& doc, const ConnectorConfig& config) {
  validate_connector_config(config);
  if (config.position > doc.sentences.size())
    throw PositionOutOfRange("mask position " + std::to_string(config.position) + " exceeds sentence count " +
                             std::to_string(doc.sentences.size()) + " in '" + doc.doc_id + "'");
  const auto at = doc.sentences[config.position - 1].char_start;
  std::string out;
  out.reserve(doc.text.size() + config.mask_token.size() + 1);
  out.append(doc.text, 0, at);
  out += config.mask_token;
  out.push_back(' ');
  out.append(doc.text, at);
  return out;
}

SweepResult sweep_positions(const std::vector<AnnotatedDocument>& sample, const std::vector<std::size_t>& positions,
                            const SweepEvaluator& evaluate, const std::string& mask_token) {
  SweepResult result;
  bool any = false;
  double best = 0.0;
  for (auto pos : positions) {
    SweepRow row;
    row.position = pos;
    try {
      ConnectorConfig cfg{mask_token, pos};
      std::vector<std::string> masked;
      masked.reserve(sample.size());
      for (const auto& doc : sample)
        masked.push_back(pos <= doc.sentences.size() ? insert_mask(doc, cfg) : doc.text);
      row.score = evaluate(masked, pos);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    if (row.score && (!any || *row.score > best || (*row.score == best && pos < result.best_position))) {
      any = true;
      best = *row.score;
      result.best_position = pos;
    }
    result.table.push_back(std::move(row));
  }
  if (!any) throw std::runtime_error("sweep_positions: every position failed to evaluate");
  return result;
}

}  // namespace factsum
