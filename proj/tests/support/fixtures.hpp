#pragma once

#include <string>
#include <vector>

#include "factsum/corpus.hpp"

namespace factsum::testing {

// Each sentence is a space-separated list of `text:head:deprel` tokens with
// 1-based heads local to the sentence, 0 for the root. Punctuation and
// clitics ("'s", "n't") attach to the previous token without a space.
AnnotatedDocument build_doc(const std::string& doc_id, const std::vector<std::string>& sentences);

// Sentences of plain words; every token hangs off the first one.
AnnotatedDocument flat_doc(const std::string& doc_id, const std::vector<std::string>& sentences);

// Marks the `occurrence`-th run of tokens whose text is exactly `surface`.
void add_entity(AnnotatedDocument& doc, const std::string& surface, const std::string& label,
                std::size_t occurrence = 0);

SummaryExample make_example(AnnotatedDocument document, AnnotatedDocument summary);

}  // namespace factsum::testing
