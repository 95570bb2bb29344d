#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace factsum {

/// A sentence (or context passage) plus the surfaces of the entities it mentions.
struct ScoredText {
  std::string text;
  std::vector<std::string> entities;
};

class ScorerError : public std::runtime_error {
 public:
  enum class Kind { Transport, Protocol };
  ScorerError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Binary consistency judgement: 1 when `claim` is supported by `context`.
/// Implementations must be callable from several threads at once.
class ConsistencyScorer {
 public:
  virtual ~ConsistencyScorer() = default;
  virtual int score(const ScoredText& claim, const ScoredText& context) = 0;
};

/// Label 1 iff every claim entity matches a context entity after surface
/// normalization. Entity-less claims are consistent.
class HeuristicScorer final : public ConsistencyScorer {
 public:
  int score(const ScoredText& claim, const ScoredText& context) override;
};

struct HeuristicBinding {};

struct RemoteBinding {
  std::string endpoint;  // e.g. http://localhost:8080 or http://host:port/prefix
  std::chrono::milliseconds timeout{10000};
  int max_concurrent = 4;
};

using ScorerBinding = std::variant<HeuristicBinding, RemoteBinding>;

/// Client for the HTTP scoring service: POST <endpoint>/score with
/// {"claim", "context"} and expects {"label": 0|1}.
class RemoteScorer final : public ConsistencyScorer {
 public:
  explicit RemoteScorer(RemoteBinding binding);
  int score(const ScoredText& claim, const ScoredText& context) override;

 private:
  RemoteBinding binding_;
  std::string scheme_host_port_;
  std::string path_;
  std::counting_semaphore<> slots_;
};

std::unique_ptr<ConsistencyScorer> make_scorer(const ScorerBinding& binding);

/// Verdict cache keyed by (doc_id, sentence index), shared across workers.
class VerdictCache {
 public:
  std::optional<int> lookup(const std::string& doc_id, std::size_t sentence);
  void store(const std::string& doc_id, std::size_t sentence, int label);
  std::size_t hits() const { return hits_.load(); }

 private:
  std::mutex mu_;
  std::map<std::pair<std::string, std::size_t>, int> verdicts_;
  std::atomic<std::size_t> hits_{0};
};

}  // namespace factsum
