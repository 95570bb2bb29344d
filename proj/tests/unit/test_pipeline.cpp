#include <stdexcept>
#include <doctest.h>

#include <sstream>

#include "factsum/ordered_pool.hpp"
#include "factsum/pipeline.hpp"
#include "fixtures.hpp"
#include "scenarios.hpp"
#include "synthetic.hpp"

using namespace factsum;
using namespace factsum::testing;

namespace {

struct Output {
  std::string text;
  RunReport report;
};

Output run_on(const PipelineConfig& cfg, const std::string& input, const EntityBank* bank = nullptr) {
  std::istringstream in(input);
  std::ostringstream out;
  auto report = run(cfg, in, out, bank);
  return {out.str(), report};
}

PipelineConfig config(std::vector<Stage> stages, std::size_t workers = 1) {
  PipelineConfig c;
  c.stages = std::move(stages);
  c.workers = workers;
  c.negatives.seed = 17;
  return c;
}

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("ordered_parallel_map keeps input order") {
  for (std::size_t workers : {1u, 2u, 8u}) {
    int next = 0;
    std::vector<int> got;
    ordered_parallel_map<int, int>(
        workers, workers * 4,
        [&]() -> std::optional<int> {
          if (next == 500) return std::nullopt;
          return next++;
        },
        [](int& x) { return x * x; },
        [&](int& y) {
          got.push_back(y);
          return true;
        });
    REQUIRE(got.size() == 500);
    for (int i = 0; i < 500; ++i) CHECK(got[i] == i * i);
  }
}

TEST_CASE("ordered_parallel_map rethrows in order and stops early") {
  int next = 0;
  std::vector<int> got;
  auto produce = [&]() -> std::optional<int> {
    if (next == 100) return std::nullopt;
    return next++;
  };
  CHECK_THROWS_AS((ordered_parallel_map<int, int>(
                      4, 16, produce,
                      [](int& x) {
                        if (x == 30) throw std::runtime_error("bad");
                        return x;
                      },
                      [&](int& y) {
                        got.push_back(y);
                        return true;
                      })),
                  std::runtime_error);
  CHECK(got.size() == 30);

  next = 0;
  got.clear();
  ordered_parallel_map<int, int>(4, 16, produce, [](int& x) { return x; }, [&](int& y) {
    got.push_back(y);
    return y < 9;
  });
  CHECK(got.size() == 10);
}

TEST_CASE("worker count does not change output bytes") {
  const auto input = to_jsonl(synthetic_examples(300, 51));
  EntityBank bank;
  for (const auto& ex : synthetic_examples(300, 51)) bank.add_document(ex.document);
  for (auto mode : {NegativeMode::Intrinsic, NegativeMode::Extrinsic}) {
    auto one = config({Stage::Connect, Stage::Correct, Stage::Negatives}, 1);
    one.negatives.mode = mode;
    auto eight = one;
    eight.workers = 8;
    const auto a = run_on(one, input, &bank);
    const auto b = run_on(eight, input, &bank);
    CHECK(a.text == b.text);
    CHECK(lines_of(a.text).size() == 300);
  }
  const auto docs = to_jsonl(synthetic_documents(300, 52));
  CHECK(run_on(config({Stage::PretrainData}, 1), docs).text == run_on(config({Stage::PretrainData}, 8), docs).text);
}

TEST_CASE("correct stage counts changed summaries") {
  std::vector<SummaryExample> examples;
  for (int i = 0; i < 5; ++i) {
    auto ex = arteta_example();
    ex.document.doc_id = ex.summary.doc_id = "a" + std::to_string(i);
    if (i != 1 && i != 3) {
      ex.summary = build_doc(ex.document.doc_id, {"Arteta:2:nsubj joined:0:ROOT Arsenal:2:dobj .:2:punct"});
      add_entity(ex.summary, "Arteta", "PERSON");
      add_entity(ex.summary, "Arsenal", "ORG");
    }
    examples.push_back(ex);
  }
  const auto r = run_on(config({Stage::Correct}), to_jsonl(examples));
  const auto* s = r.report.find("correct");
  REQUIRE(s != nullptr);
  CHECK(s->in == 5);
  CHECK(s->out == 5);
  CHECK(s->changed == 2);
  CHECK(s->hallucinated_entities == 4);
  CHECK(s->replaced == 2);
  CHECK(s->removed == 2);

  const auto lines = lines_of(r.text);
  REQUIRE(lines.size() == 5);
  const auto second = std::get<SummaryExample>(parse_record(lines[1], 2, {}));
  CHECK(second.summary.text == "Former Arsenal midfielder Arteta has taken up a coaching role.");
  CHECK(second.edits.size() == 2);
}

TEST_CASE("empty input") {
  const auto r = run_on(config({Stage::Correct, Stage::Negatives}), "");
  CHECK(r.text.empty());
  for (const auto& s : r.report.stages) {
    CHECK(s.in == 0);
    CHECK(s.out == 0);
    CHECK(s.skipped() == 0);
  }
  CHECK(r.report.stages.front().stage == "read");
}

TEST_CASE("separate stages equal fused stages") {
  const auto input = to_jsonl(synthetic_examples(100, 53));
  const auto fused = run_on(config({Stage::Connect, Stage::Correct, Stage::Negatives}), input).text;
  auto step = run_on(config({Stage::Connect}), input).text;
  step = run_on(config({Stage::Correct}), step).text;
  step = run_on(config({Stage::Negatives}), step).text;
  CHECK(step == fused);
}

TEST_CASE("pretrain-data output") {
  const auto docs = synthetic_documents(20, 54);
  auto input = to_jsonl(docs);
  input += serialize(flat_doc("tiny", {"One sentence only."})) + "\n";
  const auto r = run_on(config({Stage::PretrainData}), input);
  const auto lines = lines_of(r.text);
  CHECK(lines.size() == 20);
  const auto* s = r.report.find("pretrain-data");
  REQUIRE(s != nullptr);
  CHECK(s->skipped_short == 1);
  CHECK(s->out == 20);
  const auto j = json::parse(lines[0]);
  CHECK(j["doc_id"] == docs[0].doc_id);
  CHECK(j["pseudo_document"].get<std::string>().find("<mask>") != std::string::npos);
  CHECK(j["scores"].size() == docs[0].sentences.size());

  auto strict = config({Stage::PretrainData});
  strict.selection.skip_short_docs = false;
  CHECK_THROWS_AS(run_on(strict, input), PipelineError);
}

TEST_CASE("standalone negatives skip empty sets") {
  auto ex = arteta_example();
  ex.summary = correct(ex, CorrectionStrategy::Combined).summary;
  auto none = arteta_example();
  none.document.doc_id = none.summary.doc_id = "none";
  none.summary = build_doc("none", {"Nobody:2:nsubj left:0:ROOT Chelsea:2:dobj"});
  add_entity(none.summary, "Chelsea", "ORG");

  auto cfg = config({Stage::Negatives});
  cfg.negatives.standalone = true;
  const auto r = run_on(cfg, to_jsonl(std::vector<SummaryExample>{ex, none}));
  const auto lines = lines_of(r.text);
  REQUIRE(lines.size() == 1);
  const auto j = json::parse(lines[0]);
  CHECK(j["doc_id"] == "arteta");
  CHECK(j["mode"] == "intrinsic");
  CHECK(j["seed"] == derive_seed(17, "arteta"));
  CHECK(j["negatives"].size() == 5);
  CHECK(r.report.find("negatives")->skipped_empty == 1);
}

TEST_CASE("error policies") {
  auto input = to_jsonl(synthetic_examples(3, 55));
  input.insert(input.find('\n') + 1, "{broken\n");

  auto abort_cfg = config({Stage::Correct});
  try {
    run_on(abort_cfg, input);
    FAIL("expected abort");
  } catch (const PipelineError& e) {
    CHECK(e.exit_code() == 2);
    CHECK(e.stage() == "read");
  }

  auto skip_cfg = abort_cfg;
  skip_cfg.on_error = ErrorPolicy::Skip;
  const auto r = run_on(skip_cfg, input);
  CHECK(lines_of(r.text).size() == 3);
  CHECK(r.report.find("read")->skipped_error == 1);

  const auto dup = to_jsonl(synthetic_examples(2, 56)) + to_jsonl(synthetic_examples(1, 56));
  CHECK_THROWS_AS(run_on(abort_cfg, dup), PipelineError);
  CHECK(lines_of(run_on(skip_cfg, dup).text).size() == 2);

  auto docs_only = to_jsonl(synthetic_documents(2, 57));
  CHECK_THROWS_AS(run_on(abort_cfg, docs_only), PipelineError);
}

TEST_CASE("mask already present is rejected") {
  auto d = flat_doc("m", {"This has <mask> already.", "Second sentence."});
  auto cfg = config({Stage::Connect});
  CHECK_THROWS_AS(run_on(cfg, serialize(d) + "\n"), PipelineError);
}

TEST_CASE("config validation and parsing") {
  auto c = config({Stage::Correct});
  CHECK_NOTHROW(validate_config(c));
  c.stages = {};
  CHECK_THROWS_AS(validate_config(c), std::invalid_argument);
  c.stages = {Stage::Correct, Stage::Correct};
  CHECK_THROWS_AS(validate_config(c), std::invalid_argument);
  c.stages = {Stage::PretrainData, Stage::Connect};
  CHECK_THROWS_AS(validate_config(c), std::invalid_argument);
  c.stages = {Stage::Negatives};
  c.negatives.seed.reset();
  CHECK_THROWS_AS(validate_config(c), std::invalid_argument);
  c = config({Stage::Connect});
  c.connector.mask_token = "[M]";
  CHECK_THROWS_AS(validate_config(c), std::invalid_argument);

  const auto j = json::parse(R"({
    "stages": ["connect", "correct", "negatives"],
    "workers": 3,
    "on_error": "skip",
    "correction": {"strategy": "remove"},
    "negatives": {"mode": "extrinsic", "k": 4, "seed": 9},
    "connector": {"position": 2, "mask_token": "[M]"},
    "selection": {"mask_token": "[M]", "variant": "RL", "candidate_pool": 3},
    "scorer": {"kind": "remote", "endpoint": "http://localhost:9", "timeout_ms": 250, "max_concurrent": 2}
  })");
  const auto p = config_from_json(j);
  CHECK(p.stages == std::vector<Stage>{Stage::Connect, Stage::Correct, Stage::Negatives});
  CHECK(p.workers == 3);
  CHECK(p.on_error == ErrorPolicy::Skip);
  CHECK(p.strategy == CorrectionStrategy::Remove);
  CHECK(p.negatives.mode == NegativeMode::Extrinsic);
  CHECK(p.negatives.k == 4);
  CHECK(p.negatives.seed == 9u);
  CHECK(p.connector.position == 2);
  CHECK(p.selection.variant == RougeVariant::RL);
  CHECK(p.selection.candidate_pool == 3);
  const auto* remote = std::get_if<RemoteBinding>(&p.scorer);
  REQUIRE(remote != nullptr);
  CHECK(remote->timeout.count() == 250);
  CHECK_NOTHROW(validate_config(p));
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"stages": ["shuffle"]})")), std::invalid_argument);
}

TEST_CASE("stats") {
  std::ostringstream s;
  {
    std::istringstream in(serialize(fire_document()) + "\n");
    const auto st = stats(in);
    CHECK(st.documents == 1);
    CHECK(st.sentences == 3);
    CHECK(st.entities.at("GPE") == 3);
    CHECK(st.entities.at("DATE") == 2);
  }
  {
    auto ex = arteta_example();
    ex.summary = correct(ex, CorrectionStrategy::Combined).summary;
    std::istringstream in(serialize(ex) + "\n");
    CHECK(stats(in).hallucinated == 0);
  }
}

TEST_CASE("stats on a known ten-record corpus") {
  // Five documents (fire: 3 sentences, 5 entities) and five Arteta examples.
  std::string input;
  std::size_t doc_sentences = 0, sum_sentences = 0;
  for (int i = 0; i < 5; ++i) {
    auto d = fire_document();
    d.doc_id = "fire" + std::to_string(i);
    input += serialize(d) + "\n";
    auto ex = arteta_example();
    ex.document.doc_id = ex.summary.doc_id = "arteta" + std::to_string(i);
    input += serialize(ex) + "\n";
    doc_sentences += d.sentences.size() + ex.document.sentences.size();
    sum_sentences += ex.summary.sentences.size();
  }
  std::istringstream in(input);
  const auto st = stats(in);
  CHECK(st.documents == 10);
  CHECK(st.summaries == 5);
  CHECK(st.sentences == doc_sentences);
  CHECK(st.sentences == 30);
  CHECK(st.summary_sentences == 5);
  CHECK(st.entities.at("PERSON") == 20);
  CHECK(st.entities.at("GPE") == 15);
  CHECK(st.entities.at("DATE") == 15);
  CHECK(st.entities.at("ORG") == 5);
  CHECK(st.entities.at("CARDINAL") == 5);
  CHECK(st.summary_entities.at("ORG") == 10);
  CHECK(st.summary_entities.at("PERSON") == 5);
  CHECK(st.hallucinated == 10);

  std::ostringstream out;
  write_stats(out, st);
  CHECK(out.str().find("documents\t10") != std::string::npos);
}

TEST_CASE("validate_stream reports violations per line") {
  auto bad = fire_document();
  bad.doc_id = "bad";
  bad.tokens[1].head_index = 999;
  std::istringstream in(serialize(fire_document()) + "\n" + to_json(bad).dump() + "\n{oops\n");
  std::ostringstream out;
  const auto summary = validate_stream(in, out);
  CHECK(summary.records == 3);
  CHECK(summary.invalid == 2);
  CHECK(out.str().find("2\tbad\thead out of range") != std::string::npos);
}

TEST_CASE("detection report") {
  std::istringstream in(serialize(arteta_example()) + "\n");
  std::ostringstream out;
  CHECK(write_detection_report(in, out) == 2);
  const auto lines = lines_of(out.str());
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "arteta\tArsenal\tfactual\t");
  CHECK(lines[1] == "arteta\tMikel Arteta\thallucinated\tArteta");
  CHECK(lines[2] == "arteta\tManchester City\thallucinated\t");
}

TEST_CASE("run report json") {
  const auto r = run_on(config({Stage::Correct}), to_jsonl(synthetic_examples(4, 58)));
  const auto j = to_json(r.report);
  CHECK(j["stages"][0]["stage"] == "read");
  CHECK(j["stages"][1]["stage"] == "correct");
  CHECK(j["stages"][1]["in"] == 4);
}
