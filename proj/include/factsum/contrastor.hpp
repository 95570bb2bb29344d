#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "factsum/corpus.hpp"

namespace factsum {

enum class EntityCategory { Number, Date, Named };

/// MONEY/QUANTITY/CARDINAL -> Number, DATE/TIME -> Date, anything else -> Named.
EntityCategory categorize(std::string_view label);
const char* to_string(EntityCategory c);

/// Per-category multisets of entity surfaces.
class EntityBank {
 public:
  void add(std::string_view label, const std::string& surface);
  void add_document(const AnnotatedDocument& doc);
  void merge(const EntityBank& other);

  const std::map<std::string, std::size_t>& surfaces(EntityCategory c) const {
    return buckets_[static_cast<std::size_t>(c)];
  }
  // Total mentions (with multiplicity) in a category.
  std::size_t size(EntityCategory c) const;
  bool empty() const;

 private:
  std::array<std::map<std::string, std::size_t>, 3> buckets_;
};

template <typename Range>
EntityBank harvest_entity_bank(const Range& documents) {
  EntityBank bank;
  for (const auto& d : documents) bank.add_document(d);
  return bank;
}

enum class NegativeMode { Intrinsic, Extrinsic };

NegativeMode parse_negative_mode(std::string_view s);
const char* to_string(NegativeMode m);

struct NegativeSample {
  std::string text;
  std::size_t span_start = 0;  // byte range of the replaced entity in the source summary
  std::size_t span_end = 0;
  std::string original;
  std::string replacement;
  NegativeMode mode = NegativeMode::Intrinsic;
};

struct NegativeSet {
  enum class Status { Complete, Short, Empty };
  std::vector<NegativeSample> samples;
  std::uint64_t seed = 0;
  Status status = Status::Complete;
};

/// Builds up to `k` distinct negatives, each replacing one factual summary
/// entity with a same-category entity: from the document (intrinsic) or from
/// `bank` minus the document's surfaces (extrinsic). Deterministic in `seed`.
/// `bank` is required for extrinsic mode.
NegativeSet generate_negatives(const SummaryExample& example, NegativeMode mode, std::size_t k, std::uint64_t seed,
                               const EntityBank* bank = nullptr);

json negatives_to_json(const NegativeSet& set);

/// Stable 64-bit seed for one example, mixed from the run seed and doc_id.
std::uint64_t derive_seed(std::uint64_t run_seed, std::string_view doc_id);

}  // namespace factsum
