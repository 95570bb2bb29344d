#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "factsum/connector.hpp"
#include "factsum/contrastor.hpp"
#include "factsum/corpus.hpp"
#include "factsum/corrector.hpp"
#include "factsum/factgsg.hpp"
#include "factsum/scorer.hpp"

namespace factsum {

enum class Stage { PretrainData, Connect, Correct, Negatives };

Stage parse_stage(std::string_view s);
const char* to_string(Stage s);

enum class ErrorPolicy { Skip, Abort };

struct NegativeConfig {
  NegativeMode mode = NegativeMode::Intrinsic;
  std::size_t k = 5;
  std::optional<std::uint64_t> seed;
  // Emit the standalone `{doc_id, mode, seed, negatives}` line instead of
  // attaching the set to the example record.
  bool standalone = false;
};

struct PipelineConfig {
  std::vector<Stage> stages;
  SelectionConfig selection;
  CorrectionStrategy strategy = CorrectionStrategy::Combined;
  NegativeConfig negatives;
  ConnectorConfig connector;
  ScorerBinding scorer = HeuristicBinding{};
  std::size_t workers = 1;
  bool strict_schema = true;
  ErrorPolicy on_error = ErrorPolicy::Abort;
};

/// Throws std::invalid_argument describing the first inconsistency.
void validate_config(const PipelineConfig& config);

/// Reads a JSON config object; absent keys keep the values already in `base`.
PipelineConfig config_from_json(const json& j, PipelineConfig base = {});

struct StageReport {
  std::string stage;
  std::size_t in = 0;
  std::size_t out = 0;
  std::size_t skipped_short = 0;
  std::size_t skipped_error = 0;
  std::size_t skipped_empty = 0;
  std::size_t hallucinated_entities = 0;
  std::size_t replaced = 0;
  std::size_t removed = 0;
  std::size_t changed = 0;
  std::size_t short_negative_sets = 0;
  std::size_t empty_negative_sets = 0;

  std::size_t skipped() const { return skipped_short + skipped_error + skipped_empty; }
  void merge(const StageReport& o);
};

struct RunReport {
  std::vector<StageReport> stages;  // "read" first, then configured stages
  std::size_t scorer_cache_hits = 0;
  double wall_seconds = 0.0;

  const StageReport* find(std::string_view stage) const;
};

json to_json(const RunReport& report);

/// A record-level failure under the abort policy.
class PipelineError : public std::runtime_error {
 public:
  PipelineError(std::string doc_id, std::string stage, const std::string& message, int exit_code);
  const std::string& doc_id() const { return doc_id_; }
  const std::string& stage() const { return stage_; }
  int exit_code() const { return exit_code_; }

 private:
  std::string doc_id_;
  std::string stage_;
  int exit_code_;
};

/// Applies the configured stages to every line of `in`, writing one line per
/// surviving record to `out` in input order. `bank` is required for extrinsic
/// negatives. Output bytes do not depend on `config.workers`.
RunReport run(const PipelineConfig& config, std::istream& in, std::ostream& out, const EntityBank* bank = nullptr);

/// Entity bank over the document side of every record in `in`.
EntityBank build_entity_bank(std::istream& in, std::size_t workers, bool strict);

struct CorpusStats {
  std::size_t documents = 0;
  std::size_t sentences = 0;
  std::map<std::string, std::size_t> entities;  // per label
  std::size_t summaries = 0;
  std::size_t summary_sentences = 0;
  std::map<std::string, std::size_t> summary_entities;
  std::size_t hallucinated = 0;
};

CorpusStats stats(std::istream& in, const ReadOptions& options = {});
void write_stats(std::ostream& out, const CorpusStats& s);

struct ValidationSummary {
  std::size_t records = 0;
  std::size_t invalid = 0;
};

/// Prints `line\tdoc_id\trule\tdetail` for every violation found.
ValidationSummary validate_stream(std::istream& in, std::ostream& out, const ReadOptions& options = {});

/// Detection-only TSV report (doc_id, mention, status, replacement). Returns the
/// number of hallucinated mentions.
std::size_t write_detection_report(std::istream& in, std::ostream& out, const ReadOptions& options = {});

}  // namespace factsum
