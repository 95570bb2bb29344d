#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "factsum/corpus.hpp"

namespace factsum {

enum class EntityStatus { Factual, Hallucinated };

struct HallucinationReport {
  std::size_t mention_index = 0;  // into summary.entities
  EntityMention mention;
  EntityStatus status = EntityStatus::Factual;
  std::optional<std::size_t> replacement_index;  // into document.entities
  std::optional<EntityMention> replacement;
};

enum class CorrectionStrategy { Replace, Remove, Combined };

CorrectionStrategy parse_strategy(std::string_view s);
const char* to_string(CorrectionStrategy s);

// Recase capitalizes the first character left at the start of a sentence whose
// opening words were removed.
enum class EditKind { Replace, Remove, Recase };

const char* to_string(EditKind k);

struct Edit {
  EditKind kind = EditKind::Remove;
  std::size_t char_start = 0;  // byte range in the original summary text
  std::size_t char_end = 0;
  std::string original_text;
  std::string new_text;
  std::vector<std::size_t> removed_token_indices;

  bool operator==(const Edit&) const = default;
};

struct CorrectedSummary {
  std::string text;
  std::vector<Edit> edits;
  // The summary re-annotated for the corrected text: removed tokens dropped,
  // replacement tokens spliced in, offsets and heads remapped.
  AnnotatedDocument summary;
  std::size_t hallucinated = 0;
  std::size_t replaced = 0;
  std::size_t removed = 0;

  bool changed() const { return !edits.empty(); }
};

/// One report per summary entity. Matching is on normalized surface only;
/// NER labels are ignored for detection.
std::vector<HallucinationReport> detect_hallucinations(const AnnotatedDocument& document,
                                                       const AnnotatedDocument& summary);
std::vector<HallucinationReport> detect_hallucinations(const SummaryExample& example);

/// Document entity with the same label whose word set is a non-empty subset of
/// the mention's word set; the largest wins, earliest on ties. Returns its index.
std::optional<std::size_t> find_replacement(const EntityMention& mention, const AnnotatedDocument& document);

/// Tokens to delete when removing `mention` from `summary` (sorted ascending).
std::vector<std::size_t> remove_entity_with_deps(const EntityMention& mention, const AnnotatedDocument& summary);

CorrectedSummary correct(const SummaryExample& example, CorrectionStrategy strategy);

/// Applies edits right-to-left; edits must not overlap.
std::string apply_edits(std::string_view original, const std::vector<Edit>& edits);

json edits_to_json(const std::vector<Edit>& edits);
std::vector<Edit> edits_from_json(const json& j);

}  // namespace factsum
