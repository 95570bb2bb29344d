#include "fixtures.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "factsum/text.hpp"

namespace factsum::testing {

namespace {

bool attaches_left(const std::string& t) {
  if (t.empty()) return false;
  if (t.size() == 1 && is_closing_punct(t[0])) return true;
  return t[0] == '\'' || t == "n't";
}

struct RawToken {
  std::string text;
  long head;
  std::string deprel;
};

std::vector<RawToken> parse_sentence(const std::string& spec) {
  std::vector<RawToken> out;
  std::istringstream in(spec);
  for (std::string item; in >> item;) {
    const auto b = item.rfind(':');
    const auto a = b == std::string::npos || b == 0 ? std::string::npos : item.rfind(':', b - 1);
    if (a == std::string::npos) throw std::invalid_argument("bad token spec '" + item + "'");
    out.push_back({item.substr(0, a), std::stol(item.substr(a + 1, b - a - 1)), item.substr(b + 1)});
  }
  return out;
}

AnnotatedDocument assemble(const std::string& doc_id, const std::vector<std::vector<RawToken>>& sentences) {
  AnnotatedDocument d;
  d.doc_id = doc_id;
  for (const auto& sent : sentences) {
    if (sent.empty()) throw std::invalid_argument("empty sentence");
    const auto base = d.tokens.size();
    SentenceSpan span;
    span.token_start = base;
    for (std::size_t i = 0; i < sent.size(); ++i) {
      const auto& rt = sent[i];
      if (!d.text.empty() && !(i > 0 && attaches_left(rt.text))) d.text += ' ';
      Token t;
      t.index = d.tokens.size();
      t.text = rt.text;
      t.char_start = d.text.size();
      d.text += rt.text;
      t.char_end = d.text.size();
      t.head_index = rt.head == 0 ? t.index : base + static_cast<std::size_t>(rt.head - 1);
      t.deprel = rt.deprel;
      d.tokens.push_back(std::move(t));
    }
    span.token_end = d.tokens.size();
    span.char_start = d.tokens[span.token_start].char_start;
    span.char_end = d.tokens.back().char_end;
    d.sentences.push_back(span);
  }
  return d;
}

}  // namespace

AnnotatedDocument build_doc(const std::string& doc_id, const std::vector<std::string>& sentences) {
  std::vector<std::vector<RawToken>> parsed;
  for (const auto& s : sentences) parsed.push_back(parse_sentence(s));
  return assemble(doc_id, parsed);
}

AnnotatedDocument flat_doc(const std::string& doc_id, const std::vector<std::string>& sentences) {
  std::vector<std::vector<RawToken>> parsed;
  for (const auto& s : sentences) {
    std::vector<RawToken> sent;
    std::istringstream in(s);
    for (std::string w; in >> w;) {
      std::string trail;
      while (w.size() > 1 && is_closing_punct(w.back())) {
        trail.insert(trail.begin(), w.back());
        w.pop_back();
      }
      sent.push_back({w, sent.empty() ? 0L : 1L, sent.empty() ? "ROOT" : "dep"});
      for (char c : trail) sent.push_back({std::string(1, c), 1, "punct"});
    }
    parsed.push_back(std::move(sent));
  }
  return assemble(doc_id, parsed);
}

void add_entity(AnnotatedDocument& doc, const std::string& surface, const std::string& label, std::size_t occurrence) {
  for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
    for (std::size_t j = i + 1; j <= doc.tokens.size(); ++j) {
      const auto text = doc.span_text(i, j);
      if (text.size() > surface.size()) break;
      if (text != surface) continue;
      if (occurrence-- > 0) break;
      EntityMention m{i, j, label, surface};
      auto at = std::lower_bound(doc.entities.begin(), doc.entities.end(), m,
                                 [](const EntityMention& a, const EntityMention& b) { return a.token_start < b.token_start; });
      doc.entities.insert(at, std::move(m));
      return;
    }
  }
  throw std::invalid_argument("entity '" + surface + "' not found in " + doc.doc_id);
}

SummaryExample make_example(AnnotatedDocument document, AnnotatedDocument summary) {
  SummaryExample ex;
  summary.doc_id = document.doc_id;
  ex.document = std::move(document);
  ex.summary = std::move(summary);
  return ex;
}

}  // namespace factsum::testing
