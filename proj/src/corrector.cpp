#include "factsum/corrector.hpp"

#include <algorithm>
#include <cassert>
#include <limits>
#include <set>
#include <stdexcept>
#include <unordered_set>

#include "factsum/rouge.hpp"
#include "factsum/text.hpp"

namespace factsum {

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

bool climbs_to(std::string_view deprel) { return deprel == "pobj" || deprel == "prep"; }

bool blocks_descent(std::string_view deprel) {
  return deprel == "compound" || deprel == "relcl" || deprel == "fixed";
}

const SentenceSpan* sentence_of(const AnnotatedDocument& doc, std::size_t token) {
  for (const auto& s : doc.sentences)
    if (token >= s.token_start && token < s.token_end) return &s;
  return nullptr;
}

std::set<std::string> word_set(std::string_view surface) {
  auto toks = rouge_tokenize(surface);
  return {toks.begin(), toks.end()};
}

// Token of the mention whose head lies outside it (or that is the root).
std::size_t mention_root(const AnnotatedDocument& doc, const EntityMention& m) {
  for (std::size_t i = m.token_start; i < m.token_end; ++i) {
    const auto h = doc.tokens[i].head_index;
    if (h == i || h < m.token_start || h >= m.token_end) return i;
  }
  return m.token_start;
}

char to_upper(char c) { return (c >= 'a' && c <= 'z') ? static_cast<char>(c - 'a' + 'A') : c; }

struct Replacement {
  std::size_t summary_mention = 0;
  std::size_t document_entity = 0;
};

}  // namespace

CorrectionStrategy parse_strategy(std::string_view s) {
  if (s == "replace") return CorrectionStrategy::Replace;
  if (s == "remove") return CorrectionStrategy::Remove;
  if (s == "combined") return CorrectionStrategy::Combined;
  throw std::invalid_argument("unknown correction strategy '" + std::string(s) + "'");
}

const char* to_string(CorrectionStrategy s) {
  switch (s) {
    case CorrectionStrategy::Replace: return "replace";
    case CorrectionStrategy::Remove: return "remove";
    case CorrectionStrategy::Combined: return "combined";
  }
  return "?";
}

const char* to_string(EditKind k) {
  switch (k) {
    case EditKind::Replace: return "replace";
    case EditKind::Remove: return "remove";
    case EditKind::Recase: return "recase";
  }
  return "?";
}

std::vector<HallucinationReport> detect_hallucinations(const AnnotatedDocument& document,
                                                       const AnnotatedDocument& summary) {
  std::unordered_set<std::string> doc_surfaces;
  for (const auto& e : document.entities) doc_surfaces.insert(normalize_surface(e.surface));

  std::vector<HallucinationReport> out;
  out.reserve(summary.entities.size());
  for (std::size_t i = 0; i < summary.entities.size(); ++i) {
    HallucinationReport r;
    r.mention_index = i;
    r.mention = summary.entities[i];
    if (!doc_surfaces.count(normalize_surface(r.mention.surface))) {
      r.status = EntityStatus::Hallucinated;
      r.replacement_index = find_replacement(r.mention, document);
      if (r.replacement_index) r.replacement = document.entities[*r.replacement_index];
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<HallucinationReport> detect_hallucinations(const SummaryExample& example) {
  return detect_hallucinations(example.document, example.summary);
}

std::optional<std::size_t> find_replacement(const EntityMention& mention, const AnnotatedDocument& document) {
  const auto target = word_set(mention.surface);
  std::optional<std::size_t> best;
  std::size_t best_size = 0;
  for (std::size_t i = 0; i < document.entities.size(); ++i) {
    const auto& e = document.entities[i];
    if (e.label != mention.label) continue;
    const auto words = word_set(e.surface);
    if (words.empty()) continue;
    if (!std::includes(target.begin(), target.end(), words.begin(), words.end())) continue;
    if (words.size() > best_size) {
      best = i;
      best_size = words.size();
    }
  }
  return best;
}

std::vector<std::size_t> remove_entity_with_deps(const EntityMention& mention, const AnnotatedDocument& summary) {
  const auto* sent = sentence_of(summary, mention.token_start);
  const std::size_t lo = sent ? sent->token_start : 0;
  const std::size_t hi = sent ? sent->token_end : summary.tokens.size();

  std::vector<std::vector<std::size_t>> children(hi - lo);
  for (std::size_t i = lo; i < hi; ++i) {
    const auto h = summary.tokens[i].head_index;
    if (h != i && h >= lo && h < hi) children[h - lo].push_back(i);
  }

  std::vector<char> in_set(hi - lo, 0);
  for (std::size_t i = mention.token_start; i < mention.token_end; ++i) in_set[i - lo] = 1;

  auto all_children_in = [&](std::size_t h) {
    return std::all_of(children[h - lo].begin(), children[h - lo].end(),
                       [&](std::size_t c) { return in_set[c - lo] != 0; });
  };

  // Upward: prep/pobj heads left with no other children, to a fixpoint.
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = lo; i < hi; ++i) {
      if (!in_set[i - lo]) continue;
      const auto h = summary.tokens[i].head_index;
      if (h == i || h < lo || h >= hi || in_set[h - lo]) continue;
      if (!climbs_to(summary.tokens[h].deprel) || !all_children_in(h)) continue;
      in_set[h - lo] = 1;
      assert(all_children_in(h));
      changed = true;
    }
  }

  // Downward: every dependent reachable through non-excluded arcs.
  std::vector<std::size_t> stack;
  for (std::size_t i = lo; i < hi; ++i)
    if (in_set[i - lo]) stack.push_back(i);
  while (!stack.empty()) {
    const auto t = stack.back();
    stack.pop_back();
    for (auto c : children[t - lo]) {
      if (in_set[c - lo] || blocks_descent(summary.tokens[c].deprel)) continue;
      in_set[c - lo] = 1;
      stack.push_back(c);
    }
  }

  std::vector<std::size_t> out;
  for (std::size_t i = lo; i < hi; ++i)
    if (in_set[i - lo]) out.push_back(i);
  return out;
}

std::string apply_edits(std::string_view original, const std::vector<Edit>& edits) {
  std::vector<const Edit*> order;
  for (const auto& e : edits) order.push_back(&e);
  std::sort(order.begin(), order.end(), [](const Edit* a, const Edit* b) { return a->char_start > b->char_start; });
  std::string out(original);
  std::size_t limit = out.size();
  for (const auto* e : order) {
    if (e->char_start > e->char_end || e->char_end > limit)
      throw std::invalid_argument("apply_edits: overlapping or out-of-range edit");
    out.replace(e->char_start, e->char_end - e->char_start, e->new_text);
    limit = e->char_start;
  }
  return out;
}

namespace {

// Builds the corrected annotation for `summary` given the edits and the
// removed/replaced token structure.
AnnotatedDocument remap_summary(const SummaryExample& ex, const std::string& new_text, const std::vector<Edit>& edits,
                                const std::vector<char>& removed, const std::vector<Replacement>& replacements) {
  const auto& sum = ex.summary;
  const auto& doc = ex.document;
  const auto n = sum.tokens.size();

  auto shift = [&](std::size_t pos) {
    long long delta = 0;
    for (const auto& e : edits)
      if (e.char_end <= pos)
        delta += static_cast<long long>(e.new_text.size()) - static_cast<long long>(e.char_end - e.char_start);
    return static_cast<std::size_t>(static_cast<long long>(pos) + delta);
  };

  // replaced_by[i] = index into `replacements` for tokens of a replaced mention.
  std::vector<std::size_t> replaced_by(n, kNone);
  for (std::size_t r = 0; r < replacements.size(); ++r) {
    const auto& m = sum.entities[replacements[r].summary_mention];
    for (auto i = m.token_start; i < m.token_end; ++i) replaced_by[i] = r;
  }

  AnnotatedDocument out;
  out.doc_id = sum.doc_id;
  out.text = new_text;
  out.connected_text = sum.connected_text;

  std::vector<std::size_t> new_index(n, kNone);
  std::vector<std::size_t> replacement_root(replacements.size(), kNone);
  std::vector<std::size_t> replacement_first(replacements.size(), kNone);
  // Pending head fixups: (new token, old summary token whose head it inherits)
  std::vector<std::pair<std::size_t, std::size_t>> inherit_head;
  std::vector<std::pair<std::size_t, std::size_t>> plain_head;

  for (std::size_t i = 0; i < n; ++i) {
    if (removed[i]) continue;
    if (replaced_by[i] != kNone) {
      const auto r = replaced_by[i];
      const auto& m = sum.entities[replacements[r].summary_mention];
      if (i == m.token_start) {
        const auto& de = doc.entities[replacements[r].document_entity];
        const auto base = shift(sum.tokens[m.token_start].char_start);
        const auto doc_base = doc.tokens[de.token_start].char_start;
        const auto first_new = out.tokens.size();
        replacement_first[r] = first_new;
        const auto summary_root = mention_root(sum, m);
        for (auto k = de.token_start; k < de.token_end; ++k) {
          const auto& dt = doc.tokens[k];
          Token t;
          t.index = out.tokens.size();
          t.char_start = base + (dt.char_start - doc_base);
          t.char_end = base + (dt.char_end - doc_base);
          t.text = new_text.substr(t.char_start, t.char_end - t.char_start);
          const bool internal = dt.head_index != k && dt.head_index >= de.token_start && dt.head_index < de.token_end;
          if (internal) {
            t.head_index = first_new + (dt.head_index - de.token_start);
            t.deprel = dt.deprel;
          } else {
            if (replacement_root[r] == kNone) replacement_root[r] = t.index;
            t.deprel = sum.tokens[summary_root].deprel;
            inherit_head.emplace_back(t.index, summary_root);
          }
          out.tokens.push_back(std::move(t));
        }
        // A replacement with no external arc (degenerate parse) still needs a root.
        if (replacement_root[r] == kNone) {
          replacement_root[r] = first_new;
          out.tokens[first_new].deprel = sum.tokens[summary_root].deprel;
          inherit_head.emplace_back(first_new, summary_root);
        }
      }
      new_index[i] = replacement_root[r];
      continue;
    }
    const auto& st = sum.tokens[i];
    Token t;
    t.index = out.tokens.size();
    t.char_start = shift(st.char_start);
    t.char_end = t.char_start + (st.char_end - st.char_start);
    t.text = new_text.substr(t.char_start, t.char_end - t.char_start);
    t.deprel = st.deprel;
    new_index[i] = t.index;
    plain_head.emplace_back(t.index, i);
    out.tokens.push_back(std::move(t));
  }

  // Nearest surviving ancestor of old token `h`; kNone if the chain ends at a removed root.
  auto surviving = [&](std::size_t h) {
    for (std::size_t steps = 0; steps <= n; ++steps) {
      if (new_index[h] != kNone) return new_index[h];
      const auto next = sum.tokens[h].head_index;
      if (next == h) return kNone;
      h = next;
    }
    return kNone;
  };

  for (auto [t, old] : plain_head) {
    const auto h = sum.tokens[old].head_index;
    const auto mapped = (h == old) ? kNone : surviving(h);
    out.tokens[t].head_index = (mapped == kNone || mapped == t) ? t : mapped;
    if (mapped == kNone && h != old) out.tokens[t].deprel = "ROOT";
  }
  for (auto [t, old_root] : inherit_head) {
    const auto h = sum.tokens[old_root].head_index;
    const auto mapped = (h == old_root) ? kNone : surviving(h);
    out.tokens[t].head_index = (mapped == kNone) ? t : mapped;
  }

  for (const auto& s : sum.sentences) {
    std::size_t first = kNone, last = kNone;
    for (auto i = s.token_start; i < s.token_end; ++i) {
      if (removed[i]) continue;
      std::size_t lo = new_index[i], hi = new_index[i];
      if (replaced_by[i] != kNone) {
        const auto r = replaced_by[i];
        const auto& de = doc.entities[replacements[r].document_entity];
        lo = replacement_first[r];
        hi = lo + (de.token_end - de.token_start) - 1;
      }
      if (first == kNone) first = lo;
      last = hi;
    }
    if (first == kNone) continue;
    out.sentences.push_back({first, last + 1, out.tokens[first].char_start, out.tokens[last].char_end});
  }

  for (std::size_t ei = 0; ei < sum.entities.size(); ++ei) {
    const auto& e = sum.entities[ei];
    if (replaced_by[e.token_start] != kNone) {
      const auto r = replaced_by[e.token_start];
      const auto& de = doc.entities[replacements[r].document_entity];
      const auto first = replacement_first[r];
      EntityMention m{first, first + (de.token_end - de.token_start), e.label, {}};
      m.surface = std::string(out.span_text(m.token_start, m.token_end));
      out.entities.push_back(std::move(m));
      continue;
    }
    bool intact = true;
    for (auto i = e.token_start; i < e.token_end; ++i) intact = intact && !removed[i];
    if (!intact) continue;
    EntityMention m{new_index[e.token_start], new_index[e.token_end - 1] + 1, e.label, {}};
    m.surface = std::string(out.span_text(m.token_start, m.token_end));
    out.entities.push_back(std::move(m));
  }
  return out;
}

}  // namespace

CorrectedSummary correct(const SummaryExample& example, CorrectionStrategy strategy) {
  const auto& sum = example.summary;
  const auto& doc = example.document;
  const auto& text = sum.text;
  const auto n = sum.tokens.size();
  const auto reports = detect_hallucinations(example);

  CorrectedSummary result;
  std::vector<char> protect(n, 0);
  std::vector<Replacement> replacements;
  std::vector<std::size_t> to_remove;

  for (const auto& r : reports) {
    if (r.status == EntityStatus::Factual) {
      for (auto i = r.mention.token_start; i < r.mention.token_end; ++i) protect[i] = 1;
      continue;
    }
    ++result.hallucinated;
    const bool can_replace = r.replacement_index && strategy != CorrectionStrategy::Remove;
    if (can_replace) {
      replacements.push_back({r.mention_index, *r.replacement_index});
      for (auto i = r.mention.token_start; i < r.mention.token_end; ++i) protect[i] = 1;
    } else if (strategy != CorrectionStrategy::Replace) {
      to_remove.push_back(r.mention_index);
    }
  }

  // Removal sets are computed per mention on the original parse and merged.
  std::vector<char> removed(n, 0);
  for (auto mi : to_remove) {
    const auto& m = sum.entities[mi];
    for (auto t : remove_entity_with_deps(m, sum))
      if (!protect[t]) removed[t] = 1;
    for (auto i = m.token_start; i < m.token_end; ++i) {
      if (protect[i]) throw std::logic_error("correct: overlapping hallucinated mentions");
    }
  }
  result.removed = to_remove.size();
  result.replaced = replacements.size();

  std::vector<char> sentence_start(n, 0);
  for (const auto& s : sum.sentences)
    if (s.token_start < n) sentence_start[s.token_start] = 1;

  std::vector<Edit> edits;
  for (const auto& rep : replacements) {
    const auto& m = sum.entities[rep.summary_mention];
    const auto& de = doc.entities[rep.document_entity];
    Edit e;
    e.kind = EditKind::Replace;
    e.char_start = sum.mention_char_start(m);
    e.char_end = sum.mention_char_end(m);
    e.original_text = text.substr(e.char_start, e.char_end - e.char_start);
    e.new_text = de.surface;
    edits.push_back(std::move(e));
  }

  for (std::size_t i = 0; i < n;) {
    if (!removed[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    bool starts_sentence = false;
    Edit e;
    e.kind = EditKind::Remove;
    while (j < n && removed[j]) {
      // Only a capitalized sentence opening is carried over to the next word.
      if (sentence_start[j] && !sum.tokens[j].text.empty())
        starts_sentence = starts_sentence || (sum.tokens[j].text[0] >= 'A' && sum.tokens[j].text[0] <= 'Z');
      e.removed_token_indices.push_back(j);
      ++j;
    }
    std::size_t start = sum.tokens[i].char_start;
    std::size_t end = sum.tokens[j - 1].char_end;
    std::size_t before = start;
    while (before > 0 && is_space(text[before - 1])) --before;
    std::size_t after = end;
    while (after < text.size() && is_space(text[after])) ++after;

    if (after == text.size() || is_closing_punct(text[after])) {
      start = before;
      end = after;
    } else if (after > end) {
      end = after;
    }
    e.char_start = start;
    e.char_end = end;
    e.original_text = text.substr(start, end - start);
    edits.push_back(std::move(e));

    if (starts_sentence && j < n && sum.tokens[j].char_start == end) {
      const char c = text[end];
      const char up = to_upper(c);
      auto rep = std::find_if(edits.begin(), edits.end(), [&](const Edit& x) {
        return x.kind == EditKind::Replace && x.char_start == end;
      });
      if (rep != edits.end()) {
        if (!rep->new_text.empty()) rep->new_text[0] = to_upper(rep->new_text[0]);
      } else if (up != c) {
        edits.push_back({EditKind::Recase, end, end + 1, std::string(1, c), std::string(1, up), {}});
      }
    }
    i = j;
  }

  std::sort(edits.begin(), edits.end(), [](const Edit& a, const Edit& b) { return a.char_start < b.char_start; });
  for (std::size_t k = 1; k < edits.size(); ++k)
    if (edits[k].char_start < edits[k - 1].char_end) throw std::logic_error("correct: overlapping edits");

  result.text = apply_edits(text, edits);
  result.summary = remap_summary(example, result.text, edits, removed, replacements);
  result.edits = std::move(edits);
  return result;
}

json edits_to_json(const std::vector<Edit>& edits) {
  json arr = json::array();
  for (const auto& e : edits)
    arr.push_back({{"kind", to_string(e.kind)},
                   {"start", e.char_start},
                   {"end", e.char_end},
                   {"original_text", e.original_text},
                   {"new_text", e.new_text},
                   {"removed_token_indices", e.removed_token_indices}});
  return arr;
}

std::vector<Edit> edits_from_json(const json& j) {
  std::vector<Edit> out;
  for (const auto& x : j) {
    Edit e;
    const auto kind = x.at("kind").get<std::string>();
    if (kind == "replace") e.kind = EditKind::Replace;
    else if (kind == "remove") e.kind = EditKind::Remove;
    else if (kind == "recase") e.kind = EditKind::Recase;
    else throw std::invalid_argument("unknown edit kind '" + kind + "'");
    e.char_start = x.at("start").get<std::size_t>();
    e.char_end = x.at("end").get<std::size_t>();
    e.original_text = x.at("original_text").get<std::string>();
    e.new_text = x.at("new_text").get<std::string>();
    e.removed_token_indices = x.at("removed_token_indices").get<std::vector<std::size_t>>();
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace factsum
