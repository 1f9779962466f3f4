// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "support/brute_force.hpp"
#include "support/cli_runner.hpp"
#include "support/test_paths.hpp"
#include "webtrail/agents.hpp"
#include "webtrail/explorer.hpp"
#include "webtrail/metrics.hpp"
#include "webtrail/prompts.hpp"
#include "webtrail/scripted_oracle.hpp"
#include "webtrail/sft.hpp"
#include "webtrail/sim_env.hpp"

namespace webtrail {
namespace {

using nlohmann::json;
using testing::fixture;
using testing::read_file;
using testing::TempDir;
using Clock = std::chrono::steady_clock;

// Collects failed expectations for one criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
  }
  bool ok() const { return failures_.empty(); }
  std::string summary() const {
    std::string out;
    for (std::size_t i = 0; i < failures_.size() && i < 3; ++i) out += (i ? "; " : "") + failures_[i];
    if (failures_.size() > 3) out += "; +" + std::to_string(failures_.size() - 3) + " more";
    return out;
  }

 private:
  std::vector<std::string> failures_;
};

std::shared_ptr<const SiteGraph> graph_of(const std::string& file) {
  return std::make_shared<const SiteGraph>(load_sitegraph_file(fixture(file)));
}

std::string page_name(const Simulator& sim, const std::string& identity) {
  const auto* page = sim.page_for_identity(identity);
  return page ? page->page_id : identity;
}

using PageSteps = std::pair<std::string, std::vector<testing::Step>>;

std::set<PageSteps> fixed_set(const std::vector<testing::BruteLeaf>& leaves) {
  std::set<PageSteps> out;
  for (const auto& l : leaves) {
    if (l.dynamic_group.empty()) out.emplace(l.page, l.steps);
  }
  return out;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// 1. Fixture coverage on forum-mini.
void coverage(Check& c) {
  const auto start = Clock::now();
  auto graph = graph_of("forum-mini.json");
  SimEnvironment env(graph);
  ScriptedOracle oracle(graph);
  Explorer explorer(env, oracle, {100, 2, 4, 0});
  const auto state = explorer.explore();
  const double elapsed = seconds_since(start);

  const Simulator sim(graph);
  std::multiset<std::string> visited;
  for (const auto& d : state.dequeues) visited.insert(page_name(sim, d.page_id));
  c.expect(visited == std::multiset<std::string>{"home", "forums", "forum", "create-forum", "forum-created"},
           "pages visited: " + std::to_string(visited.size()));

  const auto truth = ground_truth_leaf_tasks(*graph);
  std::set<std::string> executed;
  for (const auto& t : state.tasks) executed.insert(t.key);
  std::size_t covered = 0;
  for (const auto& leaf : truth.fixed) covered += executed.contains(leaf.key);
  c.expect(truth.fixed.size() == 12 && covered == 12,
           "fixed leaves " + std::to_string(covered) + "/" + std::to_string(truth.fixed.size()));

  // The ground truth itself agrees with an independent enumeration.
  const auto brute = fixed_set(testing::brute_force_distinct_leaves(fixture("forum-mini.json"), 3));
  c.expect(brute.size() == truth.fixed.size(), "brute-force leaf count " + std::to_string(brute.size()));
  const auto done = fixed_set(testing::executed_leaves(state, sim));
  for (const auto& leaf : brute) c.expect(done.contains(leaf), "leaf not executed on " + leaf.first);
  c.expect(elapsed < 10.0, "runtime " + std::to_string(elapsed) + " s");
}

// 2. Menu hierarchy on menu-deep.
void menu_hierarchy(Check& c) {
  const auto start = Clock::now();
  auto graph = graph_of("menu-deep.json");
  SimEnvironment env(graph);
  ScriptedOracle oracle(graph);
  Explorer explorer(env, oracle, {100, 2, 4, 0});
  const auto state = explorer.explore();
  const double elapsed = seconds_since(start);
  const Simulator sim(graph);

  const auto expected = fixed_set(testing::brute_force_distinct_leaves(fixture("menu-deep.json"), 3));
  const auto executed = fixed_set(testing::executed_leaves(state, sim));
  c.expect(executed == expected, "executed leaves differ from brute-force enumeration (" +
                                     std::to_string(executed.size()) + " vs " + std::to_string(expected.size()) + ")");
  for (const auto& t : state.tasks) {
    const auto* page = sim.page_for_identity(t.task.origin_page);
    const auto& last = t.task.action_sequence.back();
    const auto* def = page && last.element_id ? page->find(*last.element_id) : nullptr;
    c.expect(def && def->behavior.kind != Behavior::Kind::reveal, "expansion-only task kept: " + t.task.title);
    // Every menu of the fixture sits on the seed page, so the full sequence
    // must replay from the initial state.
    SimState s = sim.initial_state();
    try {
      for (const auto& a : t.task.action_sequence) s = sim.step(s, a).state;
    } catch (const Error& e) {
      c.expect(false, "prefix missing for " + t.task.title + ": " + e.what());
    }
  }
  c.expect(elapsed < 10.0, "runtime " + std::to_string(elapsed) + " s");
}

// Counts task replays of the wrapped environment.
class CountingEnv : public Environment {
 public:
  explicit CountingEnv(Environment& inner) : inner_(inner) {}
  SessionHandle reset() override { return inner_.reset(); }
  void restart(SessionHandle& s) override {
    ++restarts;
    inner_.restart(s);
  }
  Observation execute(SessionHandle& s, const Action& a) override { return inner_.execute(s, a); }
  Observation observe(const SessionHandle& s) override { return inner_.observe(s); }
  void close(SessionHandle& s) override { inner_.close(s); }
  std::string backend_name() const override { return inner_.backend_name(); }
  int restarts = 0;

 private:
  Environment& inner_;
};

// 3. Breadth-first loop conformance.
void loop_conformance(Check& c) {
  auto graph = graph_of("forum-mini.json");
  for (std::size_t k : {1u, 3u, 100u}) {
    SimEnvironment sim_env(graph);
    CountingEnv env(sim_env);
    ScriptedOracle oracle(graph);
    int restarts_at_k = -1;
    std::size_t seen = 0;
    ExplorerEvents events;
    events.on_tuple = [&](const TaskTuple&) {
      if (++seen == k) restarts_at_k = env.restarts;
    };
    Explorer explorer(env, oracle, {k, 2, 4, 0}, nullptr, events);
    const auto state = explorer.explore();
    const std::string tag = "k=" + std::to_string(k) + ": ";

    c.expect(state.tuples.size() <= k, tag + std::to_string(state.tuples.size()) + " tuples");
    std::set<std::string> pages;
    for (std::size_t i = 0; i < state.dequeues.size(); ++i) {
      c.expect(pages.insert(state.dequeues[i].page_id).second, tag + "page explored twice");
      if (i > 0) c.expect(state.dequeues[i - 1].depth <= state.dequeues[i].depth, tag + "depth decreased");
    }
    if (state.tuples.size() == k) {
      c.expect(restarts_at_k >= 0 && env.restarts - restarts_at_k <= 1,
               tag + std::to_string(env.restarts - restarts_at_k) + " executions after the budget was reached");
    } else {
      c.expect(state.queue.empty(), tag + "stopped early without reaching the budget");
    }
  }
}

// Scripted oracle with mock completeness scores and too many info asks.
class MockScoreOracle : public ScriptedOracle {
 public:
  using ScriptedOracle::ScriptedOracle;
  std::vector<int> scores = {2, 5, 1, 3, 4};
  std::size_t next = 0;

 protected:
  SynthesisDraft do_synthesize(const SynthesisInput& input) override {
    SynthesisDraft d = ScriptedOracle::do_synthesize(input);
    d.score = scores[next++ % scores.size()];
    d.description += " #" + std::to_string(d.score);
    return d;
  }
  std::vector<SimpleTask> do_info_seeking(const Observation& o, const std::vector<Action>&) override {
    std::vector<SimpleTask> asks(3);
    for (int i = 0; i < 3; ++i) asks[i].title = "Question " + std::to_string(i + 1) + " about " + o.url;
    return asks;
  }
};

// 4. Synthesis gates.
void synthesis_gates(Check& c) {
  for (const char* file : {"forum-mini.json", "menu-deep.json"}) {
    auto graph = graph_of(file);
    SimEnvironment env(graph);
    MockScoreOracle oracle(graph);
    Explorer explorer(env, oracle, {100, 2, 4, 0});
    const auto state = explorer.explore();
    std::map<std::string, int> asks_per_page;
    for (const auto& t : state.tuples) {
      c.expect(t.completeness_score >= kMinRetainedScore,
               std::string(file) + ": tuple with score " + std::to_string(t.completeness_score));
      if (t.kind == TupleKind::action_oriented) {
        c.expect(t.trajectory.size() >= 3, std::string(file) + ": action tuple from " +
                                               std::to_string(t.trajectory.size()) + " actions");
      } else {
        ++asks_per_page[t.trajectory.final_observation.page_id];
      }
    }
    for (const auto& [page, n] : asks_per_page)
      c.expect(n <= Oracle::kMaxInfoAsks, std::string(file) + ": " + std::to_string(n) + " asks on one page");
    c.expect(oracle.next > 0, std::string(file) + ": no synthesis was attempted");
  }
}

std::vector<TaskTuple> tuples_from_traces(Environment& env) {
  std::vector<TaskTuple> out;
  for (const auto& item : json::parse(read_file(fixture("redundant-trace.traces.json")))) {
    SessionGuard s(env, env.reset());
    TaskTuple t;
    t.description = item.at("description");
    t.kind = item.at("kind") == "info_seeking" ? TupleKind::info_seeking : TupleKind::action_oriented;
    t.completeness_score = 4;
    Observation current = env.observe(*s);
    for (const auto& a : item.at("actions").get<std::vector<Action>>()) {
      Observation next = env.execute(*s, a);
      t.trajectory.steps.push_back({current, a, ""});
      current = next;
    }
    t.trajectory.final_observation = current;
    out.push_back(t);
  }
  return out;
}

// 5. Refinement cap and optimal refinement.
void refinement(Check& c) {
  auto graph = graph_of("forum-mini.json");
  SimEnvironment env(graph);
  ScriptedOracle oracle(graph);
  Explorer explorer(env, oracle, {100, 2, 4, 0});
  const auto tuples = explorer.explore().tuples;
  c.expect(!tuples.empty(), "no exploration tuples");

  const auto never = refine_all(env, [] { return std::make_unique<NeverFinishingAgent>(); }, tuples, {});
  for (const auto& o : never) {
    c.expect(o.discarded(), "never-finishing agent produced a refined tuple");
    c.expect(o.attempted.size() == 30, "discarded trajectory has " + std::to_string(o.attempted.size()) + " steps");
  }

  const auto optimal = refine_all(env, [&] { return std::make_unique<OptimalSimAgent>(graph); }, tuples, {});
  for (std::size_t i = 0; i < optimal.size(); ++i) {
    c.expect(!optimal[i].discarded(), "optimal agent discarded: " + optimal[i].discard_reason);
    if (optimal[i].refined)
      c.expect(optimal[i].refined->trajectory.size() <= tuples[i].trajectory.size(), "refined trace grew");
  }

  auto redundant = graph_of("redundant-trace.json");
  SimEnvironment renv(redundant);
  const auto traces = tuples_from_traces(renv);
  const auto results = refine_all(renv, [&] { return std::make_unique<OptimalSimAgent>(redundant); }, traces, {});
  for (std::size_t i = 0; i < results.size(); ++i) {
    c.expect(!results[i].discarded(), "redundant-trace tuple discarded: " + results[i].discard_reason);
    if (results[i].refined)
      c.expect(results[i].refined->trajectory.size() <= traces[i].trajectory.size(), "redundant trace grew");
  }
  if (results.size() == 2 && results[0].refined)
    c.expect(results[0].refined->trajectory.size() < traces[0].trajectory.size(), "redundant trace not shortened");
}

// 6. SFT export formula.
void sft_formula(Check& c) {
  TempDir dir;
  auto graph = graph_of("forum-mini.json");
  SimEnvironment env(graph, std::make_shared<ScreenshotStore>(dir.path()));
  ScriptedOracle oracle(graph);
  Explorer explorer(env, oracle, {100, 2, 4, 0});
  std::vector<TaskTuple> refined;
  for (const auto& o : refine_all(env, [&] { return std::make_unique<OptimalSimAgent>(graph); },
                                  explorer.explore().tuples, {})) {
    if (o.refined) refined.push_back(*o.refined);
  }
  c.expect(!refined.empty(), "nothing refined");

  std::size_t expected_records = 0;
  for (const auto& t : refined) {
    const auto actions = t.trajectory.actions();
    const auto examples = tuple_to_examples(t);
    expected_records += actions.size() + 1;
    c.expect(examples.size() == actions.size() + 1, "record count for '" + t.description + "'");
    for (std::size_t j = 1; j <= examples.size(); ++j) {
      const std::size_t window = std::min<std::size_t>(3, j - 1);
      const auto& ex = examples[j - 1];
      c.expect(ex.history.size() == window, "history window at step " + std::to_string(j));
      c.expect(std::equal(ex.history.begin(), ex.history.end(), actions.begin() + static_cast<long>(j - 1 - window)),
               "history content at step " + std::to_string(j));
    }
    c.expect(!examples.empty() && examples.back().action.kind == ActionKind::stop, "last record is not stop");
  }

  RunStore run(dir.path());
  const auto manifest = export_dataset(run, "forum-mini", refined);
  c.expect(manifest.total_records() == expected_records, "manifest record count");
  const std::string text = *run.read(run_files::kDataset);
  const auto parsed = parse_dataset(text);
  c.expect(parsed.size() == expected_records, "parsed record count");
  c.expect(serialize_dataset(parsed) == text, "round trip is not byte-identical");
  std::vector<SftExample> direct;
  for (const auto& t : refined) {
    const auto part = tuple_to_examples(t);
    direct.insert(direct.end(), part.begin(), part.end());
  }
  c.expect(parsed == direct, "round trip lost information");
  export_dataset(run, "forum-mini", refined);
  c.expect(*run.read(run_files::kDataset) == text, "second export differs");
}

// 7. Diversity metric.
void diversity(Check& c) {
  TableEmbedder same({{"t", {0.3, 0.4, 0.5}}});
  c.expect(std::abs(diversity_score({"t", "t", "t", "t"}, same)) <= 1e-9, "identical titles");

  const double r = std::sqrt(0.5);
  TableEmbedder four({{"a", {0.5, 0.5, r}}, {"b", {0.5, 0.5, r}}, {"c", {1, 0, 0}}, {"d", {0, 1, 0}}});
  const double score = diversity_score({"a", "b", "c", "d"}, four);
  c.expect(std::abs(score - 0.5) <= 1e-9, "four-vector fixture scored " + std::to_string(score));

  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int violations = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::uniform_int_distribution<std::size_t> size(3, 10);
    std::vector<std::vector<double>> v(size(rng), std::vector<double>(8));
    for (auto& vec : v)
      for (auto& x : vec) x = u(rng) + 1e-3;
    const double before = diversity_from_vectors(v);
    std::uniform_int_distribution<std::size_t> pick(0, v.size() - 1);
    v.push_back(v[pick(rng)]);
    if (diversity_from_vectors(v) > before + 1e-12) ++violations;
  }
  c.expect(violations == 0,
           "duplicate insertion raised the score in " + std::to_string(violations) + "/100 randomized sets");
}

// 8. Determinism of the full pipeline through the command-line tool.
void determinism(Check& c) {
  TempDir dir;
  const std::string site = fixture("forum-mini.json").string();
  std::map<std::string, std::string> files[2];
  for (int i = 0; i < 2; ++i) {
    const std::string run_dir = (dir / ("run" + std::to_string(i))).string();
    for (const auto& args : std::vector<std::vector<std::string>>{
             {"explore", site, "--budget", "100", "--seed", "0", "--run-dir", run_dir},
             {"refine", run_dir},
             {"export", run_dir}}) {
      const auto r = testing::run_webtrail(args, dir.path());
      c.expect(r.exit_code == 0, args[0] + " exited " + std::to_string(r.exit_code) + ": " + r.err);
    }
    for (const char* name : {run_files::kExploration, run_files::kRefined, run_files::kDataset}) {
      try {
        files[i][name] = read_file(std::filesystem::path(run_dir) / name);
      } catch (const std::exception& e) {
        c.expect(false, e.what());
      }
    }
  }
  for (const auto& [name, text] : files[0]) {
    c.expect(!text.empty(), name + " is empty");
    c.expect(files[1][name] == text, name + " differs between runs");
  }
}

// 9. Prompt templates against golden copies.
void prompt_fidelity(Check& c) {
  const std::vector<std::pair<PromptId, std::string>> templates = {
      {PromptId::discover, "discover.txt"},
      {PromptId::discover_differential, "discover_differential.txt"},
      {PromptId::visual_change, "visual_change.txt"},
      {PromptId::categorize, "categorize.txt"},
      {PromptId::info_seeking, "info_seeking.txt"}};
  for (const auto& [id, file] : templates) {
    std::string golden;
    try {
      golden = read_file(testing::golden("prompts/" + file));
    } catch (const std::exception& e) {
      c.expect(false, e.what());
      continue;
    }
    std::map<std::string, std::string> values;
    for (const auto& name : prompt_placeholders(id)) values[name] = "<value of " + name + ">";
    std::string expected = golden;
    for (const auto& [name, value] : values) {
      const std::string marker = "{{" + name + "}}";
      for (auto pos = expected.find(marker); pos != std::string::npos; pos = expected.find(marker, pos + value.size()))
        expected.replace(pos, marker.size(), value);
    }
    c.expect(expected.find("{{") == std::string::npos, file + ": undeclared placeholder in golden copy");
    c.expect(render_prompt(id, values) == expected, file + ": rendered prompt differs from golden copy");
  }
}

}  // namespace
}  // namespace webtrail

int main() {
  spdlog::set_level(spdlog::level::warn);
  using Criterion = std::pair<const char*, std::function<void(webtrail::Check&)>>;
  const std::vector<Criterion> criteria = {
      {"fixture coverage (forum-mini)", webtrail::coverage},
      {"menu hierarchy (menu-deep)", webtrail::menu_hierarchy},
      {"breadth-first loop and budgets", webtrail::loop_conformance},
      {"synthesis gates", webtrail::synthesis_gates},
      {"refinement cap and optimal refinement", webtrail::refinement},
      {"fine-tuning record formula", webtrail::sft_formula},
      {"diversity metric", webtrail::diversity},
      {"pipeline determinism", webtrail::determinism},
      {"prompt fidelity", webtrail::prompt_fidelity},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    webtrail::Check check;
    try {
      criteria[i].second(check);
    } catch (const std::exception& e) {
      check.expect(false, std::string("unexpected exception: ") + e.what());
    }
    std::cout << (check.ok() ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first;
    if (!check.ok()) std::cout << ": " << check.summary();
    std::cout << std::endl;
    failed += check.ok() ? 0 : 1;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
