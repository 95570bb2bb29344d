#include "factsum/contrastor.hpp"

#include <random>
#include <stdexcept>
#include <unordered_set>

#include "factsum/corrector.hpp"
#include "factsum/text.hpp"

namespace factsum {

EntityCategory categorize(std::string_view label) {
  if (label == "MONEY" || label == "QUANTITY" || label == "CARDINAL") return EntityCategory::Number;
  if (label == "DATE" || label == "TIME") return EntityCategory::Date;
  return EntityCategory::Named;
}

const char* to_string(EntityCategory c) {
  switch (c) {
    case EntityCategory::Number: return "number";
    case EntityCategory::Date: return "date";
    case EntityCategory::Named: return "named";
  }
  return "?";
}

void EntityBank::add(std::string_view label, const std::string& surface) {
  if (surface.empty()) return;
  ++buckets_[static_cast<std::size_t>(categorize(label))][surface];
}

void EntityBank::add_document(const AnnotatedDocument& doc) {
  for (const auto& e : doc.entities) add(e.label, e.surface);
}

void EntityBank::merge(const EntityBank& other) {
  for (std::size_t c = 0; c < buckets_.size(); ++c)
    for (const auto& [surface, count] : other.buckets_[c]) buckets_[c][surface] += count;
}

std::size_t EntityBank::size(EntityCategory c) const {
  std::size_t n = 0;
  for (const auto& [_, count] : surfaces(c)) n += count;
  return n;
}

bool EntityBank::empty() const {
  for (const auto& b : buckets_)
    if (!b.empty()) return false;
  return true;
}

NegativeMode parse_negative_mode(std::string_view s) {
  if (s == "intrinsic") return NegativeMode::Intrinsic;
  if (s == "extrinsic") return NegativeMode::Extrinsic;
  throw std::invalid_argument("unknown negative mode '" + std::string(s) + "'");
}

const char* to_string(NegativeMode m) { return m == NegativeMode::Intrinsic ? "intrinsic" : "extrinsic"; }

std::uint64_t derive_seed(std::uint64_t run_seed, std::string_view doc_id) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : doc_id) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::uint64_t z = run_seed ^ h;  // splitmix64 finalizer
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

// Portable bounded draw; std::uniform_int_distribution differs across standard libraries.
std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

struct Candidate {
  std::string surface;
  std::size_t weight = 0;
};

struct Slot {
  std::size_t mention = 0;  // index into summary.entities
  std::vector<Candidate> pool;
  std::size_t total = 0;
};

}  // namespace

NegativeSet generate_negatives(const SummaryExample& example, NegativeMode mode, std::size_t k, std::uint64_t seed,
                               const EntityBank* bank) {
  if (mode == NegativeMode::Extrinsic && !bank) throw std::invalid_argument("extrinsic negatives require an entity bank");
  const auto& doc = example.document;
  const auto& sum = example.summary;

  NegativeSet set;
  set.seed = seed;

  std::unordered_set<std::string> doc_surfaces;
  for (const auto& e : doc.entities) doc_surfaces.insert(normalize_surface(e.surface));

  std::vector<Slot> slots;
  bool any_factual = false;
  for (const auto& r : detect_hallucinations(example)) {
    if (r.status != EntityStatus::Factual) continue;
    any_factual = true;
    const auto category = categorize(r.mention.label);
    const auto original = normalize_surface(r.mention.surface);
    Slot slot;
    slot.mention = r.mention_index;
    auto push = [&](const std::string& surface, std::size_t weight) {
      for (auto& c : slot.pool)
        if (c.surface == surface) {
          c.weight += weight;
          slot.total += weight;
          return;
        }
      slot.pool.push_back({surface, weight});
      slot.total += weight;
    };
    if (mode == NegativeMode::Intrinsic) {
      for (const auto& e : doc.entities)
        if (categorize(e.label) == category && normalize_surface(e.surface) != original) push(e.surface, 1);
    } else {
      for (const auto& [surface, count] : bank->surfaces(category)) {
        const auto key = normalize_surface(surface);
        if (key != original && !doc_surfaces.count(key)) slot.pool.push_back({surface, count}), slot.total += count;
      }
    }
    if (!slot.pool.empty()) slots.push_back(std::move(slot));
  }
  if (!any_factual) {
    set.status = NegativeSet::Status::Empty;
    return set;
  }

  std::mt19937_64 rng(seed);
  std::unordered_set<std::string> seen{sum.text};
  const std::size_t budget = 10 * k;
  for (std::size_t draws = 0; draws < budget && set.samples.size() < k && !slots.empty(); ++draws) {
    const auto si = draw_below(rng, slots.size());
    auto& slot = slots[si];
    auto ticket = draw_below(rng, slot.total);
    std::size_t ci = 0;
    while (ticket >= slot.pool[ci].weight) ticket -= slot.pool[ci++].weight;
    Candidate chosen = std::move(slot.pool[ci]);
    slot.pool.erase(slot.pool.begin() + static_cast<std::ptrdiff_t>(ci));
    slot.total -= chosen.weight;

    const auto& m = sum.entities[slot.mention];
    NegativeSample s;
    s.span_start = sum.mention_char_start(m);
    s.span_end = sum.mention_char_end(m);
    s.original = m.surface;
    s.replacement = chosen.surface;
    s.mode = mode;
    s.text = sum.text.substr(0, s.span_start) + chosen.surface + sum.text.substr(s.span_end);
    if (slot.pool.empty()) slots.erase(slots.begin() + static_cast<std::ptrdiff_t>(si));
    if (s.replacement == s.original || !seen.insert(s.text).second) continue;
    set.samples.push_back(std::move(s));
  }
  set.status = set.samples.size() >= k ? NegativeSet::Status::Complete : NegativeSet::Status::Short;
  return set;
}

json negatives_to_json(const NegativeSet& set) {
  json arr = json::array();
  for (const auto& s : set.samples)
    arr.push_back({{"text", s.text},
                   {"span", {s.span_start, s.span_end}},
                   {"original", s.original},
                   {"replacement", s.replacement}});
  return arr;
}

}  // namespace factsum
