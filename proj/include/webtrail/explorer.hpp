#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "webtrail/core.hpp"
#include "webtrail/env.hpp"
#include "webtrail/oracle.hpp"
#include "webtrail/run_store.hpp"

namespace webtrail {

struct ExplorerConfig {
  std::size_t budget = 1000;
  int dynamic_cap = 2;
  int menu_depth = 4;
  std::uint64_t seed = 0;
};

// A simple task that was executed and kept in the final task set.
struct ExecutedTask {
  SimpleTask task;  // menu leaves carry the full ancestor prefix
  std::string signature;
  std::string key;        // structural key
  std::string landed_on;  // page identity after the last action
  bool new_page = false;

  bool operator==(const ExecutedTask&) const = default;
};

struct DequeueRecord {
  std::string page_id;
  std::size_t depth = 0;

  bool operator==(const DequeueRecord&) const = default;
};

struct ExplorationState {
  std::deque<QueueEntry> queue;      // nondecreasing depth, discovery order within a depth
  std::set<std::string> explored;    // pages whose pipeline has started
  std::set<std::string> discovered;  // explored or enqueued
  std::set<std::string> registry;    // task signatures seen on any page
  std::vector<SimpleTask> known_tasks;
  std::vector<TaskTuple> tuples;     // T_ex
  std::vector<ExecutedTask> tasks;   // final task set, expansion-only tasks excluded
  std::vector<DequeueRecord> dequeues;
  std::size_t expansions = 0;
  std::size_t task_executions = 0;
  std::size_t budget = 0;
  bool done = false;

  bool budget_reached() const { return tuples.size() >= budget; }

  bool operator==(const ExplorationState&) const = default;
};

void to_json(nlohmann::json& j, const ExecutedTask& t);
void from_json(const nlohmann::json& j, ExecutedTask& t);
void to_json(nlohmann::json& j, const ExplorationState& s);
void from_json(const nlohmann::json& j, ExplorationState& s);

// Observation hooks, mainly for tests.
struct ExplorerEvents {
  std::function<void(const QueueEntry&)> on_dequeue;
  std::function<void(const ExecutedTask&)> on_task_executed;
  std::function<void(const TaskTuple&)> on_tuple;
};

// Drops disallowed tasks and tasks whose signature is already registered;
// survivors are registered. Signatures are computed against `o`.
std::vector<SimpleTask> filter_tasks(const std::vector<SimpleTask>& candidates, std::set<std::string>& registry,
                                     const Observation& o);

// Picks min(cap, |group|) tasks per group number, keeping input order.
// Fixed tasks in the input are ignored.
std::vector<SimpleTask> sample_dynamic(const std::vector<SimpleTask>& dynamic, int cap, std::uint64_t seed);

// Seed for one page's dynamic sampling.
std::uint64_t page_sampling_seed(std::uint64_t seed, const std::string& page_id);

bool detect_new_page(const Observation& before, const Observation& after);

// Breadth-first exploration that turns a site into task tuples.
class Explorer {
 public:
  Explorer(Environment& env, Oracle& oracle, ExplorerConfig config, const RunStore* store = nullptr,
           ExplorerEvents events = {});

  // Fresh run from the environment's seed page.
  ExplorationState explore();

  // Continues a persisted run; a finished state is returned unchanged.
  ExplorationState resume(ExplorationState state);

  // Runs the per-page pipeline for one dequeued entry.
  void navigate_page(ExplorationState& state, const QueueEntry& entry);

  // Writes state.json, exploration.jsonl and tasks.jsonl.
  void persist(const ExplorationState& state) const;

  static ExplorationState load(const RunStore& store);

 private:
  struct Execution;
  struct Pending;

  std::optional<Execution> execute_task(const QueueEntry& entry, const SimpleTask& task);
  std::vector<Pending> expand_menu_hierarchy(ExplorationState& state, const QueueEntry& entry,
                                             const SimpleTask& expansion, const Observation& before,
                                             const Observation& after, int depth);
  void process(ExplorationState& state, const QueueEntry& entry, const Observation& page_obs, Pending& pending,
               std::vector<Pending>& worklist);
  void add_tuple(ExplorationState& state, TaskTuple tuple);
  void enqueue(ExplorationState& state, QueueEntry entry);
  void run_loop(ExplorationState& state);

  Environment& env_;
  Oracle& oracle_;
  ExplorerConfig config_;
  const RunStore* store_;
  ExplorerEvents events_;
  SessionHandle session_;
};

}  // namespace webtrail
