#include "webtrail/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

#include "webtrail/explorer.hpp"
#include "webtrail/hash.hpp"

namespace webtrail {

using nlohmann::json;

TableEmbedder::TableEmbedder(std::map<std::string, std::vector<double>> table) : table_(std::move(table)) {}

std::vector<std::vector<double>> TableEmbedder::embed(const std::vector<std::string>& texts) {
  std::vector<std::vector<double>> out;
  for (const auto& t : texts) {
    auto it = table_.find(t);
    if (it == table_.end()) throw Error(ErrorCode::embedder_unavailable, "no embedding for '" + t + "'");
    out.push_back(it->second);
  }
  return out;
}

HashingEmbedder::HashingEmbedder(std::size_t dimensions) : dimensions_(std::max<std::size_t>(dimensions, 1)) {}

std::vector<std::vector<double>> HashingEmbedder::embed(const std::vector<std::string>& texts) {
  std::vector<std::vector<double>> out;
  for (const auto& text : texts) {
    std::vector<double> v(dimensions_, 0.0);
    std::string word;
    auto flush = [&] {
      if (word.empty()) return;
      const auto h = sha256_u64(word);
      v[h % dimensions_] += (h >> 63) ? -1.0 : 1.0;
      word.clear();
    };
    for (unsigned char c : text) {
      if (std::isalnum(c)) {
        word.push_back(static_cast<char>(std::tolower(c)));
      } else {
        flush();
      }
    }
    flush();
    out.push_back(std::move(v));
  }
  return out;
}

RemoteEmbedder::RemoteEmbedder(ChatEndpoint endpoint) : client_(std::move(endpoint), ErrorCode::embedder_unavailable) {}

std::vector<std::vector<double>> RemoteEmbedder::embed(const std::vector<std::string>& texts) {
  const json body{{"model", client_.endpoint().model}, {"input", texts}};
  try {
    const json reply = json::parse(client_.post(body.dump()));
    std::vector<std::vector<double>> out;
    if (reply.contains("embeddings")) {
      out = reply.at("embeddings").get<std::vector<std::vector<double>>>();
    } else {
      for (const auto& item : reply.at("data")) out.push_back(item.at("embedding").get<std::vector<double>>());
    }
    if (out.size() != texts.size())
      throw Error(ErrorCode::embedder_unavailable, "embedder returned " + std::to_string(out.size()) + " vectors");
    return out;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::embedder_unavailable, std::string("malformed embedding reply: ") + e.what());
  }
}

double diversity_from_vectors(const std::vector<std::vector<double>>& vectors) {
  if (vectors.size() < 2) throw Error(ErrorCode::fewer_than_two_titles, "diversity needs at least two titles");
  std::vector<std::vector<double>> unit;
  for (const auto& v : vectors) {
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    std::vector<double> u(v.size(), 0.0);
    if (norm > 0.0) {
      for (std::size_t i = 0; i < v.size(); ++i) u[i] = v[i] / norm;
    }
    unit.push_back(std::move(u));
  }
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < unit.size(); ++a) {
    for (std::size_t b = a + 1; b < unit.size(); ++b) {
      const std::size_t n = std::min(unit[a].size(), unit[b].size());
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i) dot += unit[a][i] * unit[b][i];
      sum += dot;
      ++pairs;
    }
  }
  const double mean = std::clamp(sum / static_cast<double>(pairs), 0.0, 1.0);
  return 1.0 - mean;
}

double diversity_score(const std::vector<std::string>& titles, Embedder& embedder) {
  if (titles.size() < 2) throw Error(ErrorCode::fewer_than_two_titles, "diversity needs at least two titles");
  auto vectors = embedder.embed(titles);
  if (vectors.size() != titles.size())
    throw Error(ErrorCode::embedder_unavailable, "embedder returned the wrong number of vectors");
  return diversity_from_vectors(vectors);
}

double CoverageReport::discard_rate() const {
  const std::size_t attempted = refined + discarded;
  return attempted == 0 ? 0.0 : static_cast<double>(discarded) / static_cast<double>(attempted);
}

void to_json(json& j, const CoverageReport& r) {
  j = json{{"fixed_covered", r.fixed_covered},
           {"fixed_total", r.fixed_total},
           {"fixed_missing", r.fixed_missing},
           {"dynamic_executed", r.dynamic_executed},
           {"dynamic_sizes", r.dynamic_sizes},
           {"pages_explored", r.pages_explored},
           {"tuples_by_kind", r.tuples_by_kind},
           {"refined", r.refined},
           {"discarded", r.discarded},
           {"discard_rate", r.discard_rate()}};
  j["diversity"] = r.diversity ? json(*r.diversity) : json(nullptr);
}

CoverageReport coverage_report(const RunStore& run, const SiteGraph& graph) {
  const json meta = run.read_json(run_files::kRun);
  const std::string backend = meta.value("backend", std::string());
  if (backend != "sim") throw Error(ErrorCode::backend_mismatch, "coverage needs a simulator run, got '" + backend + "'");

  const ExplorationState state = Explorer::load(run);
  std::set<std::string> executed;
  for (const auto& t : state.tasks) executed.insert(t.key);

  CoverageReport report;
  const GroundTruth truth = ground_truth_leaf_tasks(graph);
  report.fixed_total = truth.fixed.size();
  for (const auto& leaf : truth.fixed) {
    if (executed.contains(leaf.key)) {
      ++report.fixed_covered;
    } else {
      report.fixed_missing.push_back(leaf.key);
    }
  }
  for (const auto& group : truth.dynamic) {
    const std::string name = group.page_id + "/" + group.group;
    report.dynamic_sizes[name] = group.member_keys.size();
    auto& count = report.dynamic_executed[name];
    for (const auto& key : group.member_keys) count += executed.contains(key) ? 1 : 0;
  }
  report.pages_explored = state.explored.size();
  report.tuples_by_kind = {{"action_oriented", 0}, {"info_seeking", 0}};
  for (const auto& t : state.tuples) ++report.tuples_by_kind[std::string(to_string(t.kind))];
  if (run.exists(run_files::kRefined)) report.refined = run.read_jsonl(run_files::kRefined).size();
  if (run.exists(run_files::kDiscards)) report.discarded = run.read_jsonl(run_files::kDiscards).size();
  return report;
}

std::string format_report_table(const CoverageReport& r) {
  std::ostringstream out;
  out << "metric                     value\n";
  out << "fixed-leaf coverage        " << r.fixed_covered << "/" << r.fixed_total << "\n";
  for (const auto& [group, n] : r.dynamic_executed)
    out << "dynamic " << group << std::string(group.size() < 19 ? 19 - group.size() : 1, ' ') << n << "/"
        << r.dynamic_sizes.at(group) << "\n";
  out << "pages explored             " << r.pages_explored << "\n";
  for (const auto& [kind, n] : r.tuples_by_kind)
    out << "tuples " << kind << std::string(kind.size() < 20 ? 20 - kind.size() : 1, ' ') << n << "\n";
  out << "refined                    " << r.refined << "\n";
  out << "discarded                  " << r.discarded << "\n";
  char rate[32];
  std::snprintf(rate, sizeof rate, "%.4f", r.discard_rate());
  out << "discard rate               " << rate << "\n";
  if (r.diversity) {
    char div[32];
    std::snprintf(div, sizeof div, "%.4f", *r.diversity);
    out << "diversity                  " << div << "\n";
  }
  return out.str();
}

}  // namespace webtrail
