#include "factsum/corpus.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include "factsum/text.hpp"

namespace factsum {

namespace {

std::string idx(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

void add(std::vector<Violation>& out, std::string rule, std::string detail) {
  out.push_back({std::move(rule), std::move(detail)});
}

void check_tokens(const AnnotatedDocument& doc, std::vector<Violation>& out) {
  const auto& text = doc.text;
  const auto n = doc.tokens.size();
  std::size_t prev_end = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& t = doc.tokens[i];
    const auto where = idx("tokens", i);
    if (t.index != i) add(out, "token index mismatch", where + ".i = " + std::to_string(t.index));
    bool in_bounds = t.char_end <= text.size();
    if (t.char_start >= t.char_end) {
      add(out, "token span empty", where);
    } else if (!in_bounds) {
      add(out, "token span out of bounds", where);
    } else {
      if (!is_char_boundary(text, t.char_start) || !is_char_boundary(text, t.char_end))
        add(out, "offset splits UTF-8 character", where);
      if (text.compare(t.char_start, t.char_end - t.char_start, t.text) != 0)
        add(out, "token text mismatch", where);
    }
    if (i > 0 && t.char_start < prev_end) add(out, "token order", where + " starts before previous token ends");
    prev_end = std::max(prev_end, t.char_end);
    if (t.head_index >= n) add(out, "head out of range", where + ".head = " + std::to_string(t.head_index));
  }

  // Every head chain must reach a self-loop root. 0 = unvisited, 1 = on stack, 2 = reaches root.
  std::vector<char> state(n, 0);
  std::vector<std::size_t> path;
  for (std::size_t start = 0; start < n; ++start) {
    if (state[start]) continue;
    path.clear();
    std::size_t cur = start;
    bool cycle = false;
    while (true) {
      if (cur >= n) break;  // reported as head out of range
      if (state[cur] == 2) break;
      if (state[cur] == 1) {
        cycle = true;
        break;
      }
      state[cur] = 1;
      path.push_back(cur);
      const auto head = doc.tokens[cur].head_index;
      if (head == cur) break;
      cur = head;
    }
    for (auto p : path) state[p] = 2;
    if (cycle) add(out, "dependency cycle", "cycle reachable from " + idx("tokens", start));
  }
}

void check_sentences(const AnnotatedDocument& doc, std::vector<Violation>& out) {
  const auto n = doc.tokens.size();
  std::size_t expected = 0;
  for (std::size_t i = 0; i < doc.sentences.size(); ++i) {
    const auto& s = doc.sentences[i];
    const auto where = idx("sentences", i);
    if (s.token_start != expected || s.token_end <= s.token_start || s.token_end > n) {
      add(out, "sentence partition", where + " covers [" + std::to_string(s.token_start) + ", " +
                                          std::to_string(s.token_end) + "), expected start " +
                                          std::to_string(expected));
    } else if (s.char_start != doc.tokens[s.token_start].char_start ||
               s.char_end != doc.tokens[s.token_end - 1].char_end) {
      add(out, "sentence offsets", where + " byte range does not match its tokens");
    }
    if (s.token_end > expected) expected = s.token_end;
  }
  if (expected != n) add(out, "sentence partition", "sentences cover " + std::to_string(expected) + " of " +
                                                        std::to_string(n) + " tokens");
}

void check_entities(const AnnotatedDocument& doc, std::vector<Violation>& out) {
  const auto n = doc.tokens.size();
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  for (std::size_t i = 0; i < doc.entities.size(); ++i) {
    const auto& e = doc.entities[i];
    const auto where = idx("entities", i);
    if (e.label.empty()) add(out, "entity label empty", where);
    if (e.token_start >= e.token_end) {
      add(out, "entity empty", where);
      continue;
    }
    if (e.token_end > n) {
      add(out, "entity out of bounds", where);
      continue;
    }
    spans.emplace_back(e.token_start, e.token_end);
    const auto& first = doc.tokens[e.token_start];
    const auto& last = doc.tokens[e.token_end - 1];
    if (first.char_start < last.char_end && last.char_end <= doc.text.size()) {
      if (doc.text.compare(first.char_start, last.char_end - first.char_start, e.surface) != 0)
        add(out, "EntityMention alignment", where + ".surface does not equal covered token text");
    }
  }
  std::sort(spans.begin(), spans.end());
  for (std::size_t i = 1; i < spans.size(); ++i)
    if (spans[i].first < spans[i - 1].second)
      add(out, "entity overlap", "tokens [" + std::to_string(spans[i].first) + ", " +
                                     std::to_string(spans[i - 1].second) + ") claimed twice");
}

void prefix(std::vector<Violation>& v, const std::string& p) {
  for (auto& x : v) x.detail = p + x.detail;
}

// ---- JSON parsing -------------------------------------------------------

std::string join(const std::string& base, const char* key) {
  return base.empty() ? std::string(key) : base + "." + key;
}

[[noreturn]] void fail(std::size_t line, const std::string& path, const std::string& msg) {
  throw CorpusError(line, path, msg);
}

const json& field(const json& obj, const char* key, std::size_t line, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(line, join(path, key), "missing field");
  return *it;
}

std::size_t get_index(const json& obj, const char* key, std::size_t line, const std::string& path) {
  const auto& v = field(obj, key, line, path);
  if (v.is_number_unsigned()) return v.get<std::size_t>();
  if (v.is_number_integer()) fail(line, join(path, key), "expected non-negative integer");
  fail(line, join(path, key), "expected integer");
}

std::string get_string(const json& obj, const char* key, std::size_t line, const std::string& path) {
  const auto& v = field(obj, key, line, path);
  if (!v.is_string()) fail(line, join(path, key), "expected string");
  return v.get<std::string>();
}

const json& get_array(const json& obj, const char* key, std::size_t line,
                                const std::string& path) {
  const auto& v = field(obj, key, line, path);
  if (!v.is_array()) fail(line, join(path, key), "expected array");
  return v;
}

void require_object(const json& v, std::size_t line, const std::string& path) {
  if (!v.is_object()) fail(line, path, "expected object");
}

void check_keys(const json& obj, std::initializer_list<const char*> known, bool strict, std::size_t line,
                const std::string& path) {
  if (!strict) return;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = std::any_of(known.begin(), known.end(), [&](const char* k) { return it.key() == k; });
    if (!ok) fail(line, path.empty() ? it.key() : path + "." + it.key(), "unknown key");
  }
}

}  // namespace

std::string_view AnnotatedDocument::sentence_text(std::size_t i) const {
  const auto& s = sentences.at(i);
  return std::string_view(text).substr(s.char_start, s.char_end - s.char_start);
}

std::string_view AnnotatedDocument::span_text(std::size_t token_start, std::size_t token_end) const {
  if (token_start >= token_end) return {};
  const auto b = tokens[token_start].char_start;
  const auto e = tokens[token_end - 1].char_end;
  return std::string_view(text).substr(b, e - b);
}

const std::string& record_id(const Record& r) {
  if (const auto* d = std::get_if<AnnotatedDocument>(&r)) return d->doc_id;
  return std::get<SummaryExample>(r).document.doc_id;
}

std::vector<Violation> validate(const AnnotatedDocument& doc) {
  std::vector<Violation> out;
  if (doc.doc_id.empty()) add(out, "doc_id empty", "doc_id");
  if (!is_valid_utf8(doc.text)) add(out, "invalid UTF-8", "text");
  check_tokens(doc, out);
  check_sentences(doc, out);
  check_entities(doc, out);
  return out;
}

std::vector<Violation> validate(const SummaryExample& ex) {
  auto out = validate(ex.document);
  prefix(out, "document.");
  auto s = validate(ex.summary);
  prefix(s, "summary.");
  out.insert(out.end(), s.begin(), s.end());
  return out;
}

std::vector<Violation> validate(const Record& r) {
  return std::visit([](const auto& x) { return validate(x); }, r);
}

CorpusError::CorpusError(std::size_t line, std::string path, const std::string& message)
    : std::runtime_error((line ? "line " + std::to_string(line) + ": " : std::string()) +
                         (path.empty() ? "" : path + ": ") + message),
      line_(line),
      path_(std::move(path)) {}

namespace {
std::string describe(const std::vector<Violation>& v) {
  std::string msg = "validation failed:";
  for (const auto& x : v) msg += " [" + x.rule + "] " + x.detail + ";";
  return msg;
}
}  // namespace

ValidationError::ValidationError(std::size_t line, std::vector<Violation> violations)
    : CorpusError(line, "", describe(violations)), violations_(std::move(violations)) {}

json to_json(const AnnotatedDocument& doc) {
  json j;
  j["doc_id"] = doc.doc_id;
  j["text"] = doc.text;
  auto& toks = j["tokens"] = json::array();
  for (const auto& t : doc.tokens)
    toks.push_back({{"i", t.index}, {"text", t.text}, {"start", t.char_start},
                    {"end", t.char_end}, {"head", t.head_index}, {"deprel", t.deprel}});
  auto& sents = j["sentences"] = json::array();
  for (const auto& s : doc.sentences)
    sents.push_back({{"tok_start", s.token_start}, {"tok_end", s.token_end},
                     {"start", s.char_start}, {"end", s.char_end}});
  auto& ents = j["entities"] = json::array();
  for (const auto& e : doc.entities)
    ents.push_back({{"tok_start", e.token_start}, {"tok_end", e.token_end},
                    {"label", e.label}, {"surface", e.surface}});
  if (doc.connected_text) j["connected_text"] = *doc.connected_text;
  return j;
}

json to_json(const SummaryExample& ex) {
  json j;
  j["document"] = to_json(ex.document);
  j["summary"] = to_json(ex.summary);
  if (!ex.edits.is_null()) j["edits"] = ex.edits;
  if (!ex.negatives.is_null()) j["negatives"] = ex.negatives;
  return j;
}

json to_json(const Record& r) {
  return std::visit([](const auto& x) { return to_json(x); }, r);
}

AnnotatedDocument document_from_json(const json& j, bool strict, std::size_t line,
                                     const std::string& path) {
  require_object(j, line, path);
  check_keys(j, {"doc_id", "text", "tokens", "sentences", "entities", "connected_text"}, strict, line, path);
  AnnotatedDocument doc;
  doc.doc_id = get_string(j, "doc_id", line, path);
  doc.text = get_string(j, "text", line, path);

  const auto tpath = join(path, "tokens");
  const auto& toks = get_array(j, "tokens", line, path);
  doc.tokens.reserve(toks.size());
  for (std::size_t i = 0; i < toks.size(); ++i) {
    const auto p = idx(tpath, i);
    const auto& t = toks[i];
    require_object(t, line, p);
    check_keys(t, {"i", "text", "start", "end", "head", "deprel"}, strict, line, p);
    doc.tokens.push_back({get_index(t, "i", line, p), get_string(t, "text", line, p),
                          get_index(t, "start", line, p), get_index(t, "end", line, p),
                          get_index(t, "head", line, p), get_string(t, "deprel", line, p)});
  }

  const auto spath = join(path, "sentences");
  const auto& sents = get_array(j, "sentences", line, path);
  for (std::size_t i = 0; i < sents.size(); ++i) {
    const auto p = idx(spath, i);
    const auto& s = sents[i];
    require_object(s, line, p);
    check_keys(s, {"tok_start", "tok_end", "start", "end"}, strict, line, p);
    doc.sentences.push_back({get_index(s, "tok_start", line, p), get_index(s, "tok_end", line, p),
                             get_index(s, "start", line, p), get_index(s, "end", line, p)});
  }

  const auto epath = join(path, "entities");
  const auto& ents = get_array(j, "entities", line, path);
  for (std::size_t i = 0; i < ents.size(); ++i) {
    const auto p = idx(epath, i);
    const auto& e = ents[i];
    require_object(e, line, p);
    check_keys(e, {"tok_start", "tok_end", "label", "surface"}, strict, line, p);
    doc.entities.push_back({get_index(e, "tok_start", line, p), get_index(e, "tok_end", line, p),
                            get_string(e, "label", line, p), get_string(e, "surface", line, p)});
  }

  if (auto it = j.find("connected_text"); it != j.end()) {
    if (!it->is_string()) fail(line, join(path, "connected_text"), "expected string");
    doc.connected_text = it->get<std::string>();
  }
  return doc;
}

SummaryExample example_from_json(const json& j, bool strict, std::size_t line) {
  require_object(j, line, "");
  check_keys(j, {"document", "summary", "edits", "negatives"}, strict, line, "");
  SummaryExample ex;
  ex.document = document_from_json(field(j, "document", line, ""), strict, line, "document");
  ex.summary = document_from_json(field(j, "summary", line, ""), strict, line, "summary");
  if (auto it = j.find("edits"); it != j.end()) ex.edits = *it;
  if (auto it = j.find("negatives"); it != j.end()) ex.negatives = *it;
  return ex;
}

Record parse_record(std::string_view line, std::size_t line_number, const ReadOptions& options) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw CorpusError(line_number, "", std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw CorpusError(line_number, "", "record is not a JSON object");

  const bool is_example = j.contains("document") || j.contains("summary");
  if (options.expect == RecordKind::Document && is_example)
    throw CorpusError(line_number, "", "expected a document record, found a summary example");
  if (options.expect == RecordKind::Example && !is_example)
    throw CorpusError(line_number, "", "expected a summary example record, found a document");

  Record r = is_example ? Record{example_from_json(j, options.strict, line_number)}
                        : Record{document_from_json(j, options.strict, line_number)};
  if (options.validate) {
    auto v = validate(r);
    if (!v.empty()) throw ValidationError(line_number, std::move(v));
  }
  return r;
}

std::string serialize(const Record& r) {
  return to_json(r).dump(-1, ' ', false, json::error_handler_t::strict);
}

CorpusReader::CorpusReader(std::istream& in, ReadOptions options) : in_(in), options_(options) {}

std::optional<Record> CorpusReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    if (std::all_of(line.begin(), line.end(), is_space)) continue;
    auto r = parse_record(line, line_, options_);
    if (!seen_ids_.insert(record_id(r)).second)
      throw ValidationError(line_, {{"doc_id duplicate", "doc_id '" + record_id(r) + "' already seen"}});
    return r;
  }
  return std::nullopt;
}

std::vector<Record> read_corpus(std::istream& in, ReadOptions options) {
  CorpusReader reader(in, options);
  std::vector<Record> out;
  while (auto r = reader.next()) out.push_back(std::move(*r));
  return out;
}

void write_corpus(std::ostream& out, const std::vector<Record>& records) {
  for (const auto& r : records) out << serialize(r) << '\n';
}

}  // namespace factsum
