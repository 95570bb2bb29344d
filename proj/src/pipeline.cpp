#include "factsum/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "factsum/ordered_pool.hpp"
#include "factsum/records.hpp"
#include "factsum/text.hpp"

namespace factsum {

Stage parse_stage(std::string_view s) {
  if (s == "pretrain-data") return Stage::PretrainData;
  if (s == "connect") return Stage::Connect;
  if (s == "correct") return Stage::Correct;
  if (s == "negatives") return Stage::Negatives;
  throw std::invalid_argument("unknown stage '" + std::string(s) + "'");
}

const char* to_string(Stage s) {
  switch (s) {
    case Stage::PretrainData: return "pretrain-data";
    case Stage::Connect: return "connect";
    case Stage::Correct: return "correct";
    case Stage::Negatives: return "negatives";
  }
  return "?";
}

void validate_config(const PipelineConfig& c) {
  if (c.stages.empty()) throw std::invalid_argument("no stages selected");
  if (c.workers < 1) throw std::invalid_argument("workers must be >= 1");
  validate_selection_config(c.selection);
  validate_connector_config(c.connector);
  if (c.selection.mask_token != c.connector.mask_token)
    throw std::invalid_argument("mask token differs between pretrain-data ('" + c.selection.mask_token +
                                "') and connect ('" + c.connector.mask_token + "')");
  for (std::size_t i = 0; i < c.stages.size(); ++i) {
    const auto s = c.stages[i];
    if (std::count(c.stages.begin(), c.stages.end(), s) > 1)
      throw std::invalid_argument(std::string("stage '") + to_string(s) + "' listed twice");
    const bool terminal = s == Stage::PretrainData || (s == Stage::Negatives && c.negatives.standalone);
    if (terminal && i + 1 != c.stages.size())
      throw std::invalid_argument(std::string("stage '") + to_string(s) + "' must be the last stage");
  }
  if (std::count(c.stages.begin(), c.stages.end(), Stage::Negatives)) {
    if (!c.negatives.seed) throw std::invalid_argument("negatives stage requires a seed");
    if (c.negatives.k < 1) throw std::invalid_argument("negatives k must be >= 1");
  }
  if (const auto* r = std::get_if<RemoteBinding>(&c.scorer)) {
    if (r->timeout.count() <= 0) throw std::invalid_argument("scorer timeout must be > 0");
    if (r->max_concurrent < 1) throw std::invalid_argument("scorer max_concurrent must be >= 1");
    if (r->endpoint.empty()) throw std::invalid_argument("remote scorer needs an endpoint");
  }
}

PipelineConfig config_from_json(const json& j, PipelineConfig c) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  if (auto it = j.find("stages"); it != j.end()) {
    c.stages.clear();
    for (const auto& s : *it) c.stages.push_back(parse_stage(s.get<std::string>()));
  }
  if (auto it = j.find("workers"); it != j.end()) c.workers = it->get<std::size_t>();
  if (auto it = j.find("strict_schema"); it != j.end()) c.strict_schema = it->get<bool>();
  if (auto it = j.find("on_error"); it != j.end()) {
    const auto v = it->get<std::string>();
    if (v == "skip") c.on_error = ErrorPolicy::Skip;
    else if (v == "abort") c.on_error = ErrorPolicy::Abort;
    else throw std::invalid_argument("on_error must be skip or abort");
  }
  if (auto it = j.find("selection"); it != j.end()) {
    const auto& s = *it;
    if (s.contains("variant")) c.selection.variant = parse_rouge_variant(s["variant"].get<std::string>());
    if (s.contains("candidate_pool")) c.selection.candidate_pool = s["candidate_pool"].get<int>();
    if (s.contains("mask_token")) c.selection.mask_token = s["mask_token"].get<std::string>();
    if (s.contains("skip_short_docs")) c.selection.skip_short_docs = s["skip_short_docs"].get<bool>();
  }
  if (auto it = j.find("correction"); it != j.end()) {
    if (it->contains("strategy")) c.strategy = parse_strategy((*it)["strategy"].get<std::string>());
  }
  if (auto it = j.find("negatives"); it != j.end()) {
    const auto& n = *it;
    if (n.contains("mode")) c.negatives.mode = parse_negative_mode(n["mode"].get<std::string>());
    if (n.contains("k")) c.negatives.k = n["k"].get<std::size_t>();
    if (n.contains("seed") && !n["seed"].is_null()) c.negatives.seed = n["seed"].get<std::uint64_t>();
  }
  if (auto it = j.find("connector"); it != j.end()) {
    const auto& n = *it;
    if (n.contains("position")) c.connector.position = n["position"].get<std::size_t>();
    if (n.contains("mask_token")) c.connector.mask_token = n["mask_token"].get<std::string>();
  }
  if (auto it = j.find("scorer"); it != j.end()) {
    const auto& s = *it;
    const auto kind = s.value("kind", std::string("heuristic"));
    if (kind == "heuristic") {
      c.scorer = HeuristicBinding{};
    } else if (kind == "remote") {
      RemoteBinding r;
      r.endpoint = s.value("endpoint", std::string());
      r.timeout = std::chrono::milliseconds(s.value("timeout_ms", 10000));
      r.max_concurrent = s.value("max_concurrent", 4);
      c.scorer = r;
    } else {
      throw std::invalid_argument("scorer kind must be heuristic or remote");
    }
  }
  return c;
}

void StageReport::merge(const StageReport& o) {
  in += o.in;
  out += o.out;
  skipped_short += o.skipped_short;
  skipped_error += o.skipped_error;
  skipped_empty += o.skipped_empty;
  hallucinated_entities += o.hallucinated_entities;
  replaced += o.replaced;
  removed += o.removed;
  changed += o.changed;
  short_negative_sets += o.short_negative_sets;
  empty_negative_sets += o.empty_negative_sets;
}

const StageReport* RunReport::find(std::string_view stage) const {
  for (const auto& s : stages)
    if (s.stage == stage) return &s;
  return nullptr;
}

json to_json(const RunReport& r) {
  json stages = json::array();
  for (const auto& s : r.stages) {
    stages.push_back({{"stage", s.stage},
                      {"in", s.in},
                      {"out", s.out},
                      {"skipped_short", s.skipped_short},
                      {"skipped_error", s.skipped_error},
                      {"skipped_empty", s.skipped_empty},
                      {"hallucinated_entities", s.hallucinated_entities},
                      {"replaced", s.replaced},
                      {"removed", s.removed},
                      {"changed", s.changed},
                      {"short_negative_sets", s.short_negative_sets},
                      {"empty_negative_sets", s.empty_negative_sets}});
  }
  return {{"stages", stages}, {"scorer_cache_hits", r.scorer_cache_hits}, {"wall_seconds", r.wall_seconds}};
}

PipelineError::PipelineError(std::string doc_id, std::string stage, const std::string& message, int exit_code)
    : std::runtime_error(stage + (doc_id.empty() ? "" : " [" + doc_id + "]") + ": " + message),
      doc_id_(std::move(doc_id)),
      stage_(std::move(stage)),
      exit_code_(exit_code) {}

namespace {

constexpr int kDataError = 2;
constexpr int kScorerError = 3;

struct Line {
  std::size_t number = 0;
  std::string text;
};

struct Failure {
  std::size_t stage = 0;  // index into report stages
  std::string message;
  int exit_code = kDataError;
};

struct Outcome {
  std::vector<StageReport> deltas;
  std::optional<std::string> output;
  std::string doc_id;
  std::optional<Failure> failure;
};

enum class StepResult { Continue, Skip, Done };

class Runner {
 public:
  Runner(const PipelineConfig& config, const EntityBank* bank)
      : config_(config), bank_(bank), scorer_(make_scorer(config.scorer)) {}

  Outcome process(const Line& line) const {
    Outcome o;
    o.deltas.resize(config_.stages.size() + 1);
    o.deltas[0].in = 1;
    Record rec;
    try {
      rec = parse_record(line.text, line.number, {config_.strict_schema, RecordKind::Any, true});
    } catch (const std::exception& e) {
      o.failure = Failure{0, e.what(), kDataError};
      o.deltas[0].skipped_error = 1;
      return o;
    }
    o.deltas[0].out = 1;
    o.doc_id = record_id(rec);

    for (std::size_t i = 0; i < config_.stages.size(); ++i) {
      auto& d = o.deltas[i + 1];
      d.in = 1;
      StepResult step;
      try {
        step = apply(config_.stages[i], rec, d, o.output);
      } catch (const ScorerError& e) {
        o.failure = Failure{i + 1, e.what(), kScorerError};
        d.skipped_error = 1;
        return o;
      } catch (const std::exception& e) {
        o.failure = Failure{i + 1, e.what(), kDataError};
        d.skipped_error = 1;
        return o;
      }
      if (step == StepResult::Skip) return o;
      d.out = 1;
      if (step == StepResult::Done) return o;
    }
    o.output = serialize(rec);
    return o;
  }

  std::size_t cache_hits() const { return cache_.hits(); }

 private:
  static AnnotatedDocument& document_of(Record& rec) {
    if (auto* d = std::get_if<AnnotatedDocument>(&rec)) return *d;
    return std::get<SummaryExample>(rec).document;
  }

  static SummaryExample& example_of(Record& rec, Stage s) {
    auto* ex = std::get_if<SummaryExample>(&rec);
    if (!ex) throw std::invalid_argument(std::string("stage '") + to_string(s) + "' needs summary example records");
    return *ex;
  }

  StepResult apply(Stage s, Record& rec, StageReport& d, std::optional<std::string>& output) const {
    switch (s) {
      case Stage::Connect: {
        auto& doc = document_of(rec);
        if (contains(doc.text, config_.connector.mask_token))
          throw std::invalid_argument("document already contains the mask token");
        doc.connected_text = insert_mask(doc, config_.connector);
        return StepResult::Continue;
      }
      case Stage::Correct: {
        auto& ex = example_of(rec, s);
        auto result = correct(ex, config_.strategy);
        d.hallucinated_entities = result.hallucinated;
        d.replaced = result.replaced;
        d.removed = result.removed;
        d.changed = result.changed() ? 1 : 0;
        ex.edits = edits_to_json(result.edits);
        ex.summary = std::move(result.summary);
        return StepResult::Continue;
      }
      case Stage::Negatives: {
        auto& ex = example_of(rec, s);
        const auto seed = derive_seed(*config_.negatives.seed, ex.document.doc_id);
        auto set = generate_negatives(ex, config_.negatives.mode, config_.negatives.k, seed, bank_);
        if (set.status == NegativeSet::Status::Short) d.short_negative_sets = 1;
        if (set.status == NegativeSet::Status::Empty) d.empty_negative_sets = 1;
        if (config_.negatives.standalone) {
          if (set.status == NegativeSet::Status::Empty) {
            d.skipped_empty = 1;
            return StepResult::Skip;
          }
          output = negatives_record(ex.document.doc_id, set, config_.negatives.mode).dump();
          return StepResult::Done;
        }
        ex.negatives = negatives_attachment(set, config_.negatives.mode);
        return StepResult::Continue;
      }
      case Stage::PretrainData: {
        const auto& doc = document_of(rec);
        const auto& sel = config_.selection;
        if (contains(doc.text, sel.mask_token)) throw std::invalid_argument("document already contains the mask token");
        std::vector<SelectionScore> scores;
        try {
          scores = score_sentences(doc, sel, *scorer_, &cache_);
        } catch (const ShortDocumentError&) {
          if (!sel.skip_short_docs) throw;
          d.skipped_short = 1;
          return StepResult::Skip;
        }
        auto ex = build_pseudo_example(doc, select_gap_sentence(scores), sel.mask_token);
        ex.scores = std::move(scores);
        output = to_json(ex).dump();
        return StepResult::Done;
      }
    }
    return StepResult::Continue;
  }

  const PipelineConfig& config_;
  const EntityBank* bank_;
  std::unique_ptr<ConsistencyScorer> scorer_;
  mutable VerdictCache cache_;
};

std::function<std::optional<Line>()> line_producer(std::istream& in) {
  auto counter = std::make_shared<std::size_t>(0);
  return [&in, counter]() -> std::optional<Line> {
    std::string text;
    while (std::getline(in, text)) {
      ++*counter;
      if (std::all_of(text.begin(), text.end(), is_space)) continue;
      return Line{*counter, std::move(text)};
    }
    return std::nullopt;
  };
}

}  // namespace

RunReport run(const PipelineConfig& config, std::istream& in, std::ostream& out, const EntityBank* bank) {
  validate_config(config);
  for (auto s : config.stages)
    if (s == Stage::Negatives && config.negatives.mode == NegativeMode::Extrinsic && !bank)
      throw std::invalid_argument("extrinsic negatives need an entity bank");

  const auto started = std::chrono::steady_clock::now();
  Runner runner(config, bank);

  RunReport report;
  report.stages.resize(config.stages.size() + 1);
  report.stages[0].stage = "read";
  for (std::size_t i = 0; i < config.stages.size(); ++i) report.stages[i + 1].stage = to_string(config.stages[i]);

  std::unordered_set<std::string> seen;
  ordered_parallel_map<Line, Outcome>(
      config.workers, config.workers * 4, line_producer(in),
      [&](Line& line) { return runner.process(line); },
      [&](Outcome& o) {
        // doc_id uniqueness is checked here so the verdict follows input order.
        if (!o.failure && !seen.insert(o.doc_id).second) {
          o.deltas.assign(o.deltas.size(), StageReport{});
          o.deltas[0].in = 1;
          o.deltas[0].skipped_error = 1;
          o.output.reset();
          o.failure = Failure{0, "duplicate doc_id '" + o.doc_id + "'", kDataError};
        }
        if (o.failure && config.on_error == ErrorPolicy::Abort)
          throw PipelineError(o.doc_id, report.stages[o.failure->stage].stage, o.failure->message, o.failure->exit_code);
        for (std::size_t i = 0; i < o.deltas.size(); ++i) report.stages[i].merge(o.deltas[i]);
        if (o.output) out << *o.output << '\n';
        return true;
      });

  report.scorer_cache_hits = runner.cache_hits();
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

EntityBank build_entity_bank(std::istream& in, std::size_t workers, bool strict) {
  EntityBank bank;
  ordered_parallel_map<Line, EntityBank>(
      workers, workers * 4, line_producer(in),
      [&](Line& line) {
        EntityBank part;
        auto rec = parse_record(line.text, line.number, {strict, RecordKind::Any, true});
        if (const auto* d = std::get_if<AnnotatedDocument>(&rec)) part.add_document(*d);
        else part.add_document(std::get<SummaryExample>(rec).document);
        return part;
      },
      [&](EntityBank& part) {
        bank.merge(part);
        return true;
      });
  return bank;
}

CorpusStats stats(std::istream& in, const ReadOptions& options) {
  CorpusStats s;
  CorpusReader reader(in, options);
  auto count_doc = [](const AnnotatedDocument& d, std::size_t& sentences, std::map<std::string, std::size_t>& ents) {
    sentences += d.sentences.size();
    for (const auto& e : d.entities) ++ents[e.label];
  };
  while (auto rec = reader.next()) {
    ++s.documents;
    if (const auto* d = std::get_if<AnnotatedDocument>(&*rec)) {
      count_doc(*d, s.sentences, s.entities);
      continue;
    }
    const auto& ex = std::get<SummaryExample>(*rec);
    count_doc(ex.document, s.sentences, s.entities);
    ++s.summaries;
    count_doc(ex.summary, s.summary_sentences, s.summary_entities);
    for (const auto& r : detect_hallucinations(ex))
      if (r.status == EntityStatus::Hallucinated) ++s.hallucinated;
  }
  return s;
}

void write_stats(std::ostream& out, const CorpusStats& s) {
  out << "documents\t" << s.documents << '\n';
  out << "sentences\t" << s.sentences << '\n';
  for (const auto& [label, n] : s.entities) out << "entities." << label << '\t' << n << '\n';
  out << "summaries\t" << s.summaries << '\n';
  out << "summary_sentences\t" << s.summary_sentences << '\n';
  for (const auto& [label, n] : s.summary_entities) out << "summary_entities." << label << '\t' << n << '\n';
  out << "hallucinated\t" << s.hallucinated << '\n';
}

ValidationSummary validate_stream(std::istream& in, std::ostream& out, const ReadOptions& options) {
  ValidationSummary summary;
  std::unordered_set<std::string> seen;
  auto next = line_producer(in);
  ReadOptions parse_only = options;
  parse_only.validate = false;
  while (auto line = next()) {
    ++summary.records;
    std::vector<Violation> violations;
    std::string id = "-";
    try {
      auto rec = parse_record(line->text, line->number, parse_only);
      id = record_id(rec);
      violations = validate(rec);
      if (!seen.insert(id).second) violations.push_back({"doc_id duplicate", "doc_id"});
    } catch (const CorpusError& e) {
      violations.push_back({"schema", e.what()});
    }
    if (violations.empty()) continue;
    ++summary.invalid;
    for (const auto& v : violations) out << line->number << '\t' << id << '\t' << v.rule << '\t' << v.detail << '\n';
  }
  return summary;
}

std::size_t write_detection_report(std::istream& in, std::ostream& out, const ReadOptions& options) {
  ReadOptions opts = options;
  opts.expect = RecordKind::Example;
  CorpusReader reader(in, opts);
  std::size_t hallucinated = 0;
  while (auto rec = reader.next()) {
    const auto& ex = std::get<SummaryExample>(*rec);
    for (const auto& r : detect_hallucinations(ex)) {
      if (r.status == EntityStatus::Hallucinated) ++hallucinated;
      out << report_tsv_line(ex.document.doc_id, r) << '\n';
    }
  }
  return hallucinated;
}

}  // namespace factsum
