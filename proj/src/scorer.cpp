#include "factsum/scorer.hpp"

#include <httplib.h>

#include <algorithm>
#include <unordered_set>

#include "factsum/corpus.hpp"
#include "factsum/text.hpp"

namespace factsum {

int HeuristicScorer::score(const ScoredText& claim, const ScoredText& context) {
  std::unordered_set<std::string> known;
  for (const auto& e : context.entities) known.insert(normalize_surface(e));
  for (const auto& e : claim.entities)
    if (!known.count(normalize_surface(e))) return 0;
  return 1;
}

namespace {

// Splits "http://host:port/prefix" into ("http://host:port", "/prefix").
std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
  auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos) throw std::invalid_argument("endpoint must include a scheme: " + endpoint);
  auto path_start = endpoint.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {endpoint, ""};
  auto path = endpoint.substr(path_start);
  while (!path.empty() && path.back() == '/') path.pop_back();
  return {endpoint.substr(0, path_start), path};
}

}  // namespace

RemoteScorer::RemoteScorer(RemoteBinding binding)
    : binding_(std::move(binding)), slots_(std::max(1, binding_.max_concurrent)) {
  if (binding_.timeout.count() <= 0) throw std::invalid_argument("remote scorer timeout must be positive");
  if (binding_.max_concurrent < 1) throw std::invalid_argument("remote scorer max_concurrent must be >= 1");
  std::tie(scheme_host_port_, path_) = split_endpoint(binding_.endpoint);
}

int RemoteScorer::score(const ScoredText& claim, const ScoredText& context) {
  json body{{"claim", claim.text}, {"context", context.text}};

  httplib::Result res;
  {
    slots_.acquire();
    struct Release {
      std::counting_semaphore<>& s;
      ~Release() { s.release(); }
    } release{slots_};
    httplib::Client client(scheme_host_port_);
    const auto secs = binding_.timeout.count() / 1000;
    const auto usecs = (binding_.timeout.count() % 1000) * 1000;
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    res = client.Post(path_ + "/score", body.dump(), "application/json");
  }

  if (!res) throw ScorerError(ScorerError::Kind::Transport, "scorer request failed: " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw ScorerError(ScorerError::Kind::Protocol, "scorer returned HTTP " + std::to_string(res->status));

  json reply;
  try {
    reply = json::parse(res->body);
  } catch (const json::parse_error&) {
    throw ScorerError(ScorerError::Kind::Protocol, "scorer response is not JSON");
  }
  if (!reply.is_object() || !reply.contains("label"))
    throw ScorerError(ScorerError::Kind::Protocol, "scorer response missing 'label'");
  const auto& label = reply["label"];
  if (!label.is_number_integer() || (label.get<int>() != 0 && label.get<int>() != 1))
    throw ScorerError(ScorerError::Kind::Protocol, "scorer label must be 0 or 1");
  return label.get<int>();
}

std::unique_ptr<ConsistencyScorer> make_scorer(const ScorerBinding& binding) {
  if (const auto* remote = std::get_if<RemoteBinding>(&binding)) return std::make_unique<RemoteScorer>(*remote);
  return std::make_unique<HeuristicScorer>();
}

std::optional<int> VerdictCache::lookup(const std::string& doc_id, std::size_t sentence) {
  std::lock_guard lock(mu_);
  auto it = verdicts_.find({doc_id, sentence});
  if (it == verdicts_.end()) return std::nullopt;
  ++hits_;
  return it->second;
}

void VerdictCache::store(const std::string& doc_id, std::size_t sentence, int label) {
  std::lock_guard lock(mu_);
  verdicts_.emplace(std::make_pair(doc_id, sentence), label);
}

}  // namespace factsum
