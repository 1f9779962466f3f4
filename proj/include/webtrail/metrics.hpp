#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "webtrail/chat_client.hpp"
#include "webtrail/run_store.hpp"
#include "webtrail/sitegraph.hpp"

namespace webtrail {

class Embedder {
 public:
  virtual ~Embedder() = default;
  // One vector per text. Throws embedder_unavailable.
  virtual std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) = 0;
};

// Fixed text -> vector table; unknown texts raise embedder_unavailable.
class TableEmbedder : public Embedder {
 public:
  explicit TableEmbedder(std::map<std::string, std::vector<double>> table);
  std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override;

 private:
  std::map<std::string, std::vector<double>> table_;
};

// Bag-of-words feature hashing over lowercase word tokens. Deterministic
// and dependency-free; the default for offline reports.
class HashingEmbedder : public Embedder {
 public:
  explicit HashingEmbedder(std::size_t dimensions = 256);
  std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override;

 private:
  std::size_t dimensions_;
};

// Remote embedding endpoint: POST {model, input:[texts]} ->
// {"embeddings": [[...], ...]} or {"data": [{"embedding": [...]}, ...]}.
class RemoteEmbedder : public Embedder {
 public:
  explicit RemoteEmbedder(ChatEndpoint endpoint);
  std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override;

 private:
  ChatClient client_;
};

// 1 - mean cosine similarity over unordered pairs of distinct positions, with
// vectors unit-normalized first; the mean is clamped to [0, 1].
double diversity_from_vectors(const std::vector<std::vector<double>>& vectors);

// Throws fewer_than_two_titles or embedder_unavailable.
double diversity_score(const std::vector<std::string>& titles, Embedder& embedder);

struct CoverageReport {
  std::size_t fixed_covered = 0;
  std::size_t fixed_total = 0;
  std::vector<std::string> fixed_missing;
  std::map<std::string, std::size_t> dynamic_executed;  // "<page>/<group>" -> executed members
  std::map<std::string, std::size_t> dynamic_sizes;
  std::size_t pages_explored = 0;
  std::map<std::string, std::size_t> tuples_by_kind;
  std::size_t refined = 0;
  std::size_t discarded = 0;
  std::optional<double> diversity;

  double discard_rate() const;
};

void to_json(nlohmann::json& j, const CoverageReport& r);

// Compares the run's executed tasks against the graph's ground truth.
// Throws backend_mismatch for runs not made on the simulator.
CoverageReport coverage_report(const RunStore& run, const SiteGraph& graph);

std::string format_report_table(const CoverageReport& report);

}  // namespace webtrail
