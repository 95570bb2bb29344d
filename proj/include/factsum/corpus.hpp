#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <variant>
#include <vector>

#include <json.hpp>

namespace factsum {

using json = nlohmann::ordered_json;

struct Token {
  std::size_t index = 0;
  std::string text;
  std::size_t char_start = 0;  // byte offsets, end exclusive
  std::size_t char_end = 0;
  std::size_t head_index = 0;  // == index for the root
  std::string deprel;

  bool is_root() const { return head_index == index; }
  bool operator==(const Token&) const = default;
};

struct SentenceSpan {
  std::size_t token_start = 0;
  std::size_t token_end = 0;
  std::size_t char_start = 0;
  std::size_t char_end = 0;

  bool operator==(const SentenceSpan&) const = default;
};

struct EntityMention {
  std::size_t token_start = 0;
  std::size_t token_end = 0;
  std::string label;
  std::string surface;

  bool operator==(const EntityMention&) const = default;
};

struct AnnotatedDocument {
  std::string doc_id;
  std::string text;
  std::vector<Token> tokens;
  std::vector<SentenceSpan> sentences;
  std::vector<EntityMention> entities;
  // Added by the connector stage; carried through unchanged by other stages.
  std::optional<std::string> connected_text;

  std::string_view sentence_text(std::size_t i) const;
  // Byte range covered by tokens [token_start, token_end).
  std::string_view span_text(std::size_t token_start, std::size_t token_end) const;
  std::size_t mention_char_start(const EntityMention& m) const { return tokens[m.token_start].char_start; }
  std::size_t mention_char_end(const EntityMention& m) const { return tokens[m.token_end - 1].char_end; }

  bool operator==(const AnnotatedDocument&) const = default;
};

struct SummaryExample {
  AnnotatedDocument document;
  AnnotatedDocument summary;
  // Stage outputs attached to an example (edit list, negative set). Null when absent.
  json edits;
  json negatives;

  bool operator==(const SummaryExample&) const = default;
};

using Record = std::variant<AnnotatedDocument, SummaryExample>;

const std::string& record_id(const Record& r);

struct Violation {
  std::string rule;
  std::string detail;
};

std::vector<Violation> validate(const AnnotatedDocument& doc);
std::vector<Violation> validate(const SummaryExample& ex);
std::vector<Violation> validate(const Record& r);

/// Malformed input. `line` is 1-based, 0 when not read from a stream.
class CorpusError : public std::runtime_error {
 public:
  CorpusError(std::size_t line, std::string path, const std::string& message);
  std::size_t line() const { return line_; }
  const std::string& path() const { return path_; }

 private:
  std::size_t line_;
  std::string path_;
};

class ValidationError : public CorpusError {
 public:
  ValidationError(std::size_t line, std::vector<Violation> violations);
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

enum class RecordKind { Any, Document, Example };

struct ReadOptions {
  bool strict = true;  // reject unknown keys
  RecordKind expect = RecordKind::Any;
  bool validate = true;
};

json to_json(const AnnotatedDocument& doc);
json to_json(const SummaryExample& ex);
json to_json(const Record& r);

// Schema-level parsing without invariant checks; `line` is used for error reporting.
AnnotatedDocument document_from_json(const json& j, bool strict, std::size_t line = 0,
                                     const std::string& path = "");
SummaryExample example_from_json(const json& j, bool strict, std::size_t line = 0);

/// Parses and (optionally) validates one corpus line.
Record parse_record(std::string_view line, std::size_t line_number, const ReadOptions& options);

std::string serialize(const Record& r);

/// Streaming reader: yields records in file order, each validated, with doc_id
/// uniqueness enforced across the stream.
class CorpusReader {
 public:
  explicit CorpusReader(std::istream& in, ReadOptions options = {});

  std::optional<Record> next();
  std::size_t line_number() const { return line_; }

 private:
  std::istream& in_;
  ReadOptions options_;
  std::size_t line_ = 0;
  std::unordered_set<std::string> seen_ids_;
};

std::vector<Record> read_corpus(std::istream& in, ReadOptions options = {});
void write_corpus(std::ostream& out, const std::vector<Record>& records);

}  // namespace factsum
