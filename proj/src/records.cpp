#include "factsum/records.hpp"

namespace factsum {

namespace {

// TSV fields must stay on one line.
std::string tsv_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\\': out += "\\\\"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

}  // namespace

json to_json(const PseudoExample& ex) {
  json scores = json::array();
  for (const auto& s : ex.scores) {
    json row;
    row["i"] = s.sentence_index;
    row["rouge"] = s.rouge_f1;
    row["factcc"] = s.factuality ? json(*s.factuality) : json(nullptr);
    row["combined"] = s.combined;
    scores.push_back(std::move(row));
  }
  json j;
  j["doc_id"] = ex.doc_id;
  j["pseudo_document"] = ex.pseudo_document;
  j["pseudo_summary"] = ex.pseudo_summary;
  j["selected_index"] = ex.selected_index;
  j["scores"] = std::move(scores);
  return j;
}

json negatives_record(const std::string& doc_id, const NegativeSet& set, NegativeMode mode) {
  json j;
  j["doc_id"] = doc_id;
  j["mode"] = to_string(mode);
  j["seed"] = set.seed;
  j["negatives"] = negatives_to_json(set);
  return j;
}

json negatives_attachment(const NegativeSet& set, NegativeMode mode) {
  json j;
  j["mode"] = to_string(mode);
  j["seed"] = set.seed;
  j["samples"] = negatives_to_json(set);
  return j;
}

std::string report_tsv_line(const std::string& doc_id, const HallucinationReport& r) {
  std::string line = tsv_escape(doc_id);
  line += '\t';
  line += tsv_escape(r.mention.surface);
  line += '\t';
  line += r.status == EntityStatus::Factual ? "factual" : "hallucinated";
  line += '\t';
  if (r.replacement) line += tsv_escape(r.replacement->surface);
  return line;
}

}  // namespace factsum
