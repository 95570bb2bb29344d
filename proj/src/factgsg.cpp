#include "factsum/factgsg.hpp"

#include <algorithm>
#include <numeric>

#include "factsum/text.hpp"

namespace factsum {

namespace {

std::vector<std::string> entities_in(const AnnotatedDocument& doc, const SentenceSpan& s) {
  std::vector<std::string> out;
  for (const auto& e : doc.entities)
    if (e.token_start >= s.token_start && e.token_end <= s.token_end) out.push_back(e.surface);
  return out;
}

std::string_view trim_right(std::string_view s) {
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string_view trim_left(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  return s;
}

}  // namespace

void validate_selection_config(const SelectionConfig& config) {
  if (config.candidate_pool < 1) throw std::invalid_argument("candidate_pool must be >= 1");
  if (config.mask_token.empty()) throw std::invalid_argument("mask_token must be non-empty");
}

std::vector<SelectionScore> score_sentences(const AnnotatedDocument& doc, const SelectionConfig& config,
                                            ConsistencyScorer& scorer, VerdictCache* cache) {
  validate_selection_config(config);
  const auto n = doc.sentences.size();
  if (n < 2) throw ShortDocumentError("document '" + doc.doc_id + "' has fewer than 2 sentences");

  std::vector<std::vector<std::string>> sent_tokens(n);
  for (std::size_t i = 0; i < n; ++i) sent_tokens[i] = rouge_tokenize(doc.sentence_text(i));

  // Joining with a single space adds no ROUGE tokens, so the rest-of-document
  // token sequence is the concatenation of the other sentences' tokens.
  auto rest_tokens = [&](std::size_t skip) {
    std::vector<std::string> out;
    for (std::size_t j = 0; j < n; ++j)
      if (j != skip) out.insert(out.end(), sent_tokens[j].begin(), sent_tokens[j].end());
    return out;
  };

  std::vector<SelectionScore> scores(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto rest = rest_tokens(i);
    RougeScore r;
    switch (config.variant) {
      case RougeVariant::R1: r = rouge_n_tokens(sent_tokens[i], rest, 1); break;
      case RougeVariant::R2: r = rouge_n_tokens(sent_tokens[i], rest, 2); break;
      case RougeVariant::RL: r = rouge_l_tokens(sent_tokens[i], rest); break;
    }
    scores[i] = {i, r.f1, std::nullopt, r.f1};
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a].rouge_f1 > scores[b].rouge_f1; });
  const auto pool = std::min<std::size_t>(n, static_cast<std::size_t>(config.candidate_pool));

  for (std::size_t k = 0; k < pool; ++k) {
    const auto i = order[k];
    std::optional<int> verdict;
    if (cache) verdict = cache->lookup(doc.doc_id, i);
    if (!verdict) {
      ScoredText claim{std::string(doc.sentence_text(i)), entities_in(doc, doc.sentences[i])};
      ScoredText context;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        if (!context.text.empty()) context.text.push_back(' ');
        context.text += doc.sentence_text(j);
        auto ents = entities_in(doc, doc.sentences[j]);
        context.entities.insert(context.entities.end(), ents.begin(), ents.end());
      }
      verdict = scorer.score(claim, context);
      if (cache) cache->store(doc.doc_id, i, *verdict);
    }
    scores[i].factuality = *verdict;
    scores[i].combined = scores[i].rouge_f1 + *verdict;
  }
  return scores;
}

std::size_t select_gap_sentence(const std::vector<SelectionScore>& scores) {
  if (scores.empty()) throw std::invalid_argument("select_gap_sentence: empty score list");
  const SelectionScore* best = nullptr;
  for (const auto& s : scores) {
    if (!s.factuality) continue;
    if (!best || s.combined > best->combined ||
        (s.combined == best->combined && s.sentence_index < best->sentence_index))
      best = &s;
  }
  if (!best) throw std::invalid_argument("select_gap_sentence: no sentence carries a factuality verdict");
  return best->sentence_index;
}

PseudoExample build_pseudo_example(const AnnotatedDocument& doc, std::size_t selected_index,
                                   const std::string& mask_token) {
  if (selected_index >= doc.sentences.size())
    throw std::out_of_range("build_pseudo_example: sentence index out of range");
  const auto& s = doc.sentences[selected_index];
  const std::string_view text(doc.text);
  const auto before = trim_right(text.substr(0, s.char_start));
  const auto after = trim_left(text.substr(s.char_end));

  PseudoExample ex;
  ex.doc_id = doc.doc_id;
  ex.selected_index = selected_index;
  ex.pseudo_summary = std::string(doc.sentence_text(selected_index));
  auto& out = ex.pseudo_document;
  out.reserve(before.size() + mask_token.size() + after.size() + 2);
  out.append(before);
  if (!before.empty()) out.push_back(' ');
  out += mask_token;
  if (!after.empty()) out.push_back(' ');
  out.append(after);
  return ex;
}

std::string reconstruct(const std::string& pseudo_document, const std::string& pseudo_summary,
                        const std::string& mask_token) {
  auto pos = pseudo_document.find(mask_token);
  if (pos == std::string::npos) throw std::invalid_argument("reconstruct: mask token not found");
  return pseudo_document.substr(0, pos) + pseudo_summary + pseudo_document.substr(pos + mask_token.size());
}

}  // namespace factsum
