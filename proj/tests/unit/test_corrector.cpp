#include <stdexcept>
#include <doctest.h>

#include <set>

#include "factsum/corrector.hpp"
#include "factsum/text.hpp"
#include "fixtures.hpp"
#include "scenarios.hpp"
#include "synthetic.hpp"

using namespace factsum;
using namespace factsum::testing;

namespace {

std::string corrected(const SummaryExample& ex, CorrectionStrategy s) { return normalize_spacing(correct(ex, s).text); }

std::size_t hallucinated_count(const AnnotatedDocument& doc, const AnnotatedDocument& sum) {
  std::size_t n = 0;
  for (const auto& r : detect_hallucinations(doc, sum)) n += r.status == EntityStatus::Hallucinated;
  return n;
}

std::vector<std::string> words_of(const AnnotatedDocument& d, const std::vector<std::size_t>& idx) {
  std::vector<std::string> out;
  for (auto i : idx) out.push_back(d.tokens[i].text);
  return out;
}

}  // namespace

TEST_CASE("detection on the Arteta summary") {
  const auto reports = detect_hallucinations(arteta_example());
  REQUIRE(reports.size() == 3);
  CHECK(reports[0].mention.surface == "Arsenal");
  CHECK(reports[0].status == EntityStatus::Factual);
  CHECK(reports[1].status == EntityStatus::Hallucinated);
  REQUIRE(reports[1].replacement.has_value());
  CHECK(reports[1].replacement->surface == "Arteta");
  CHECK(reports[2].status == EntityStatus::Hallucinated);
  CHECK_FALSE(reports[2].replacement.has_value());
}

TEST_CASE("detection ignores labels and case") {
  auto doc = flat_doc("d", {"Visitors came from PARIS on Monday."});
  add_entity(doc, "PARIS", "GPE");
  auto sum = flat_doc("d", {"Visitors came from Paris."});
  add_entity(sum, "Paris", "ORG");
  CHECK(detect_hallucinations(doc, sum)[0].status == EntityStatus::Factual);
  auto plain = flat_doc("d", {"Nothing here."});
  CHECK(detect_hallucinations(doc, plain).empty());
}

TEST_CASE("replacement lookup") {
  auto doc = flat_doc("d", {"Laidlaw spoke.", "Laidlaw signed.", "Greg played."});
  add_entity(doc, "Laidlaw", "ORG", 0);
  add_entity(doc, "Laidlaw", "PERSON", 1);
  add_entity(doc, "Greg", "PERSON");
  auto sum = flat_doc("d", {"Greg Laidlaw said so."});
  add_entity(sum, "Greg Laidlaw", "PERSON");
  // Both PERSON entities are one-word subsets; the earliest wins.
  const auto idx = find_replacement(sum.entities[0], doc);
  REQUIRE(idx.has_value());
  CHECK(doc.entities[*idx].label == "PERSON");
  CHECK(doc.entities[*idx].surface == "Laidlaw");

  auto doc2 = flat_doc("d", {"Laidlaw spoke.", "Greg Laidlaw signed."});
  add_entity(doc2, "Laidlaw", "PERSON");
  add_entity(doc2, "Greg Laidlaw", "PERSON");
  auto sum2 = flat_doc("d", {"Scrum half Greg Laidlaw Jr said so."});
  add_entity(sum2, "Greg Laidlaw Jr", "PERSON");
  CHECK(doc2.entities[*find_replacement(sum2.entities[0], doc2)].surface == "Greg Laidlaw");

  const auto ex = arteta_example();
  CHECK_FALSE(find_replacement(ex.summary.entities[2], ex.document).has_value());
}

TEST_CASE("removal sets follow the dependency passes") {
  const auto ex = arteta_example();
  CHECK(words_of(ex.summary, remove_entity_with_deps(ex.summary.entities[2], ex.summary)) ==
        std::vector<std::string>{"at", "Manchester", "City"});
  CHECK(words_of(ex.summary, remove_entity_with_deps(ex.summary.entities[1], ex.summary)) ==
        std::vector<std::string>{"Mikel", "Arteta"});

  const auto tap = tap_water_example();
  CHECK(words_of(tap.summary, remove_entity_with_deps(tap.summary.entities[0], tap.summary)) ==
        std::vector<std::string>{"80,000"});
  CHECK(words_of(tap.summary, remove_entity_with_deps(tap.summary.entities[1], tap.summary)) ==
        std::vector<std::string>{"in", "Lancashire"});
  CHECK(words_of(tap.summary, remove_entity_with_deps(tap.summary.entities[2], tap.summary)) ==
        std::vector<std::string>{"for", "three", "weeks"});
}

TEST_CASE("downward descent stops at compound, relcl and fixed arcs") {
  auto sum = build_doc("d", {"old:3:amod club:3:compound Smith:5:nsubj who:5:nsubj spoke:0:ROOT"});
  add_entity(sum, "Smith", "PERSON");
  CHECK(words_of(sum, remove_entity_with_deps(sum.entities[0], sum)) == std::vector<std::string>{"old", "Smith"});

  auto rel = build_doc("d", {"Smith:4:nsubj who:3:nsubj won:1:relcl left:0:ROOT"});
  add_entity(rel, "Smith", "PERSON");
  CHECK(words_of(rel, remove_entity_with_deps(rel.entities[0], rel)) == std::vector<std::string>{"Smith"});

  auto fixed = build_doc("d", {"Smith:3:nsubj Jr:1:fixed left:0:ROOT"});
  add_entity(fixed, "Smith", "PERSON");
  CHECK(words_of(fixed, remove_entity_with_deps(fixed.entities[0], fixed)) == std::vector<std::string>{"Smith"});
}

TEST_CASE("upward pass climbs nested preposition chains") {
  auto sum = build_doc("d", {"Fans:2:nsubj cheered:0:ROOT in:2:prep front:3:pobj of:4:prep Oslo:5:pobj .:2:punct"});
  add_entity(sum, "Oslo", "GPE");
  CHECK(words_of(sum, remove_entity_with_deps(sum.entities[0], sum)) ==
        std::vector<std::string>{"in", "front", "of", "Oslo"});
}

TEST_CASE("removal stays inside the mention's sentence") {
  auto sum = build_doc("d", {"He:2:nsubj won:0:ROOT .:2:punct", "in:1:ROOT Oslo:1:pobj .:1:punct"});
  add_entity(sum, "Oslo", "GPE");
  for (auto t : remove_entity_with_deps(sum.entities[0], sum)) CHECK(t >= 3);
}

TEST_CASE("Arteta strategies") {
  const auto ex = arteta_example();
  CHECK(corrected(ex, CorrectionStrategy::Replace) ==
        "Former Arsenal midfielder Arteta has taken up a coaching role at Manchester City.");
  CHECK(corrected(ex, CorrectionStrategy::Remove) == "Former Arsenal midfielder has taken up a coaching role.");
  CHECK(corrected(ex, CorrectionStrategy::Combined) ==
        "Former Arsenal midfielder Arteta has taken up a coaching role.");

  const auto c = correct(ex, CorrectionStrategy::Combined);
  CHECK(c.hallucinated == 2);
  CHECK(c.replaced == 1);
  CHECK(c.removed == 1);
  CHECK(c.changed());
  CHECK(c.text == "Former Arsenal midfielder Arteta has taken up a coaching role.");
}

TEST_CASE("remove outputs for hand-parsed summaries") {
  CHECK(corrected(tap_water_example(), CorrectionStrategy::Remove) ==
        "Tap water in homes has been declared safe to drink, after the discovery of a parasite at a treatment "
        "works left residents boiling water.");
  CHECK(corrected(rio_silver_example(), CorrectionStrategy::Remove) ==
        "Won her second Olympic silver of Rio 2016 by finishing second in the women's sprint.");
  CHECK(corrected(stocks_headline_example(), CorrectionStrategy::Remove) == "summary of stocks news on tuesday ##");
}

TEST_CASE("recase edits and replacement capitalization") {
  const auto c = correct(rio_silver_example(), CorrectionStrategy::Remove);
  bool recased = false;
  for (const auto& e : c.edits) recased = recased || e.kind == EditKind::Recase;
  CHECK(recased);

  auto doc = flat_doc("d", {"Arteta trained in oslo."});
  add_entity(doc, "Arteta", "PERSON");
  add_entity(doc, "oslo", "GPE");
  auto sum = build_doc("d", {"Madrid:2:compound oslo:3:nsubj shone:0:ROOT .:3:punct"});
  add_entity(sum, "Madrid", "GPE");
  add_entity(sum, "oslo", "GPE");
  CHECK(correct(make_example(doc, sum), CorrectionStrategy::Remove).text == "Oslo shone.");
}

TEST_CASE("all-factual summaries are untouched") {
  auto ex = arteta_example();
  ex.summary = build_doc("arteta", {"Arteta:2:nsubj left:0:ROOT Arsenal:2:dobj .:2:punct"});
  add_entity(ex.summary, "Arteta", "PERSON");
  add_entity(ex.summary, "Arsenal", "ORG");
  for (auto s : {CorrectionStrategy::Replace, CorrectionStrategy::Remove, CorrectionStrategy::Combined}) {
    const auto c = correct(ex, s);
    CHECK(c.text == ex.summary.text);
    CHECK(c.edits.empty());
    CHECK_FALSE(c.changed());
    CHECK(c.summary == ex.summary);
  }
}

TEST_CASE("edits replay and serialize") {
  for (auto& ex : synthetic_examples(300, 77)) {
    for (auto s : {CorrectionStrategy::Replace, CorrectionStrategy::Remove, CorrectionStrategy::Combined}) {
      const auto c = correct(ex, s);
      CHECK(apply_edits(ex.summary.text, c.edits) == c.text);
      const auto back = edits_from_json(edits_to_json(c.edits));
      CHECK(back == c.edits);
      CHECK(apply_edits(ex.summary.text, back) == c.text);
    }
  }
}

TEST_CASE("corrected annotations stay valid and consistent") {
  for (auto& ex : synthetic_examples(300, 78)) {
    for (auto s : {CorrectionStrategy::Replace, CorrectionStrategy::Remove, CorrectionStrategy::Combined}) {
      const auto c = correct(ex, s);
      CAPTURE(ex.summary.text);
      CAPTURE(c.text);
      CHECK(c.summary.text == c.text);
      CHECK(validate(c.summary).empty());
      if (s != CorrectionStrategy::Replace) {
        CHECK(hallucinated_count(ex.document, c.summary) == 0);
      } else {
        for (const auto& r : detect_hallucinations(ex.document, c.summary))
          if (r.status == EntityStatus::Hallucinated) CHECK_FALSE(r.replacement.has_value());
      }
    }
  }
}

TEST_CASE("factual mentions are never edited") {
  for (auto& ex : synthetic_examples(300, 79)) {
    const auto reports = detect_hallucinations(ex);
    const auto c = correct(ex, CorrectionStrategy::Combined);
    for (const auto& r : reports) {
      if (r.status != EntityStatus::Factual) continue;
      const auto s = ex.summary.mention_char_start(r.mention);
      const auto e = ex.summary.mention_char_end(r.mention);
      for (const auto& ed : c.edits) {
        if (ed.kind == EditKind::Recase) continue;
        CHECK((ed.char_end <= s || ed.char_start >= e));
      }
    }
  }
}

TEST_CASE("apply_edits rejects overlap") {
  std::vector<Edit> edits{{EditKind::Remove, 0, 5, "abcde", "", {}}, {EditKind::Remove, 3, 7, "defg", "", {}}};
  CHECK_THROWS_AS(apply_edits("abcdefgh", edits), std::invalid_argument);
  CHECK_THROWS_AS(apply_edits("abc", {{EditKind::Remove, 2, 9, "", "", {}}}), std::invalid_argument);
}

TEST_CASE("strategy names") {
  CHECK(parse_strategy("combined") == CorrectionStrategy::Combined);
  CHECK(std::string(to_string(CorrectionStrategy::Remove)) == "remove");
  CHECK_THROWS_AS(parse_strategy("delete"), std::invalid_argument);
  CHECK_THROWS_AS(edits_from_json(json::parse(R"([{"kind":"shuffle"}])")), std::exception);
}
