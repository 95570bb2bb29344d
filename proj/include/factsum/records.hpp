#pragma once

#include <string>

#include "factsum/contrastor.hpp"
#include "factsum/corpus.hpp"
#include "factsum/corrector.hpp"
#include "factsum/factgsg.hpp"

namespace factsum {

// {doc_id, pseudo_document, pseudo_summary, selected_index, scores:[{i, rouge, factcc, combined}]}
// factcc is null for sentences outside the candidate pool.
json to_json(const PseudoExample& ex);

// {doc_id, mode, seed, negatives:[{text, span:[s,e], original, replacement}]}
json negatives_record(const std::string& doc_id, const NegativeSet& set, NegativeMode mode);

// {mode, seed, samples:[...]} attached to a summary example inside `run`.
json negatives_attachment(const NegativeSet& set, NegativeMode mode);

// doc_id \t mention \t status \t replacement   (replacement empty when none)
std::string report_tsv_line(const std::string& doc_id, const HallucinationReport& r);

}  // namespace factsum
