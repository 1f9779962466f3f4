#include "webtrail/explorer.hpp"

#include <spdlog/spdlog.h>

#include <future>
#include <map>
#include <random>

#include "webtrail/hash.hpp"
#include "webtrail/signature.hpp"

namespace webtrail {

using nlohmann::json;

struct Explorer::Execution {
  Trajectory trajectory;  // entry trace followed by the task's own actions
};

struct Explorer::Pending {
  SimpleTask task;
  std::string signature;
  std::string key;
  std::optional<Execution> cached;
  // Observation the outcome is compared with; the page observation if unset.
  std::optional<Observation> base;
  // Menu leaves are already known not to be expansions.
  bool classified = false;
};

namespace {

bool skippable(ErrorCode code) {
  switch (code) {
    case ErrorCode::replay_divergence:
    case ErrorCode::element_not_found:
    case ErrorCode::action_not_applicable:
    case ErrorCode::navigation_timeout:
      return true;
    default:
      return false;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Free operations

std::vector<SimpleTask> filter_tasks(const std::vector<SimpleTask>& candidates, std::set<std::string>& registry,
                                     const Observation& o) {
  std::vector<SimpleTask> kept;
  for (const auto& task : candidates) {
    if (!task.is_allowed) continue;
    if (!registry.insert(task_signature(task, o)).second) continue;
    kept.push_back(task);
  }
  return kept;
}

std::uint64_t page_sampling_seed(std::uint64_t seed, const std::string& page_id) {
  return sha256_u64(std::to_string(seed) + "\n" + page_id);
}

std::vector<SimpleTask> sample_dynamic(const std::vector<SimpleTask>& dynamic, int cap, std::uint64_t seed) {
  if (cap < 0) throw Error(ErrorCode::invalid_argument, "dynamic cap must be >= 0");
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < dynamic.size(); ++i) {
    if (dynamic[i].category == TaskCategory::dynamic && dynamic[i].group_number)
      groups[*dynamic[i].group_number].push_back(i);
  }
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> chosen;
  for (auto& [group, members] : groups) {
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(cap), members.size());
    // Partial Fisher-Yates over the member indices.
    for (std::size_t i = 0; i < take; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng() % (members.size() - i));
      std::swap(members[i], members[j]);
    }
    chosen.insert(chosen.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(take));
  }
  std::sort(chosen.begin(), chosen.end());
  std::vector<SimpleTask> out;
  for (auto i : chosen) out.push_back(dynamic[i]);
  return out;
}

bool detect_new_page(const Observation& before, const Observation& after) { return before.page_id != after.page_id; }

// ---------------------------------------------------------------------------
// Serialization

void to_json(json& j, const ExecutedTask& t) {
  j = json{{"task", t.task}, {"signature", t.signature}, {"key", t.key}, {"landed_on", t.landed_on},
           {"new_page", t.new_page}};
}

void from_json(const json& j, ExecutedTask& t) {
  t.task = j.at("task").get<SimpleTask>();
  t.signature = j.at("signature").get<std::string>();
  t.key = j.at("key").get<std::string>();
  t.landed_on = j.at("landed_on").get<std::string>();
  t.new_page = j.at("new_page").get<bool>();
}

void to_json(json& j, const ExplorationState& s) {
  json dequeues = json::array();
  for (const auto& d : s.dequeues) dequeues.push_back({{"page_id", d.page_id}, {"depth", d.depth}});
  j = json{{"queue", s.queue},
           {"explored", s.explored},
           {"discovered", s.discovered},
           {"registry", s.registry},
           {"known_tasks", s.known_tasks},
           {"tuples", s.tuples},
           {"tasks", s.tasks},
           {"dequeues", dequeues},
           {"expansions", s.expansions},
           {"task_executions", s.task_executions},
           {"budget", s.budget},
           {"done", s.done}};
}

void from_json(const json& j, ExplorationState& s) {
  s.queue = j.at("queue").get<std::deque<QueueEntry>>();
  s.explored = j.at("explored").get<std::set<std::string>>();
  s.discovered = j.at("discovered").get<std::set<std::string>>();
  s.registry = j.at("registry").get<std::set<std::string>>();
  s.known_tasks = j.at("known_tasks").get<std::vector<SimpleTask>>();
  s.tuples = j.at("tuples").get<std::vector<TaskTuple>>();
  s.tasks = j.at("tasks").get<std::vector<ExecutedTask>>();
  s.dequeues.clear();
  for (const auto& d : j.at("dequeues")) s.dequeues.push_back({d.at("page_id"), d.at("depth")});
  s.expansions = j.at("expansions").get<std::size_t>();
  s.task_executions = j.at("task_executions").get<std::size_t>();
  s.budget = j.at("budget").get<std::size_t>();
  s.done = j.at("done").get<bool>();
}

// ---------------------------------------------------------------------------
// Explorer

Explorer::Explorer(Environment& env, Oracle& oracle, ExplorerConfig config, const RunStore* store,
                   ExplorerEvents events)
    : env_(env), oracle_(oracle), config_(config), store_(store), events_(std::move(events)) {
  if (config_.budget < 1) throw Error(ErrorCode::invalid_argument, "budget must be >= 1");
  if (config_.dynamic_cap < 0) throw Error(ErrorCode::invalid_argument, "dynamic cap must be >= 0");
  if (config_.menu_depth < 1) throw Error(ErrorCode::invalid_argument, "menu depth must be >= 1");
}

void Explorer::enqueue(ExplorationState& state, QueueEntry entry) {
  state.discovered.insert(entry.page_id);
  auto pos = std::find_if(state.queue.begin(), state.queue.end(),
                          [&](const QueueEntry& queued) { return queued.depth > entry.depth; });
  state.queue.insert(pos, std::move(entry));
}

void Explorer::add_tuple(ExplorationState& state, TaskTuple tuple) {
  if (state.budget_reached()) return;
  if (events_.on_tuple) events_.on_tuple(tuple);
  state.tuples.push_back(std::move(tuple));
}

std::optional<Explorer::Execution> Explorer::execute_task(const QueueEntry& entry, const SimpleTask& task) {
  try {
    Execution exec{env_.replay(session_, entry)};
    for (const auto& action : task.action_sequence) {
      Observation next = env_.execute(session_, action);
      exec.trajectory.steps.push_back({std::move(exec.trajectory.final_observation), action, {}});
      exec.trajectory.final_observation = std::move(next);
    }
    return exec;
  } catch (const Error& e) {
    if (!skippable(e.code())) throw;
    spdlog::info("task '{}' on {} skipped: {}", task.title, entry.page_id, e.what());
    return std::nullopt;
  }
}

std::vector<Explorer::Pending> Explorer::expand_menu_hierarchy(ExplorationState& state, const QueueEntry& entry,
                                                               const SimpleTask& expansion, const Observation& before,
                                                               const Observation& after, int depth) {
  std::vector<SimpleTask> children;
  for (auto& child : oracle_.discover_differential_tasks(before, after)) {
    SimpleTask full = child;
    full.action_sequence = expansion.action_sequence;
    full.action_sequence.insert(full.action_sequence.end(), child.action_sequence.begin(), child.action_sequence.end());
    children.push_back(std::move(full));
  }
  children = filter_tasks(children, state.registry, after);

  std::vector<Pending> leaves;
  for (auto& child : children) {
    state.known_tasks.push_back(child);
    auto exec = execute_task(entry, child);
    if (!exec) continue;
    ++state.task_executions;
    const Observation& outcome = exec->trajectory.final_observation;
    if (!detect_new_page(after, outcome) && oracle_.is_moderate_visual_change(after, outcome).answer) {
      ++state.expansions;
      if (depth + 1 > config_.menu_depth) {
        spdlog::warn("menu depth cap {} reached at '{}' on {}; subtree dropped", config_.menu_depth, child.title,
                     entry.page_id);
        continue;
      }
      auto nested = expand_menu_hierarchy(state, entry, child, after, outcome, depth + 1);
      std::move(nested.begin(), nested.end(), std::back_inserter(leaves));
      continue;
    }
    Pending leaf;
    leaf.signature = task_signature(child, after);
    leaf.key = structural_key(child.action_sequence, after);
    leaf.task = std::move(child);
    leaf.cached = std::move(exec);
    leaf.base = after;
    leaf.classified = true;
    leaves.push_back(std::move(leaf));
  }
  return leaves;
}

void Explorer::process(ExplorationState& state, const QueueEntry& entry, const Observation& page_obs,
                       Pending& pending, std::vector<Pending>& worklist) {
  const SimpleTask& task = pending.task;
  if (task.info_seeking) {
    Trajectory path = env_.replay(session_, entry);
    auto result = oracle_.synthesize_and_evaluate({TupleKind::info_seeking, std::move(path), task});
    if (result.tuple) add_tuple(state, std::move(*result.tuple));
    return;
  }

  std::optional<Execution> exec = std::move(pending.cached);
  if (!exec) {
    exec = execute_task(entry, task);
    if (!exec) return;
    ++state.task_executions;
  }
  const Observation& base = pending.base ? *pending.base : page_obs;
  const Observation& outcome = exec->trajectory.final_observation;

  ExecutedTask record{task, pending.signature, pending.key, outcome.page_id, detect_new_page(base, outcome)};
  if (record.new_page) {
    state.tasks.push_back(record);
    if (events_.on_task_executed) events_.on_task_executed(record);
    if (state.explored.contains(outcome.page_id)) return;
    // A page already waiting in the queue keeps its first (shallowest) trace.
    if (!state.discovered.contains(outcome.page_id)) {
      std::vector<Action> trace = entry.trace;
      trace.insert(trace.end(), task.action_sequence.begin(), task.action_sequence.end());
      enqueue(state, make_queue_entry(outcome.page_id, std::move(trace)));
    }
    if (exec->trajectory.size() >= static_cast<std::size_t>(kMinActionOrientedActions)) {
      auto result = oracle_.synthesize_and_evaluate({TupleKind::action_oriented, std::move(exec->trajectory), task});
      if (result.tuple) {
        add_tuple(state, std::move(*result.tuple));
      } else {
        spdlog::info("synthesis after '{}' rejected: {}", task.title, result.reason);
      }
    }
    return;
  }

  if (!pending.classified && oracle_.is_moderate_visual_change(base, outcome).answer) {
    ++state.expansions;
    auto leaves = expand_menu_hierarchy(state, entry, task, base, outcome, 1);
    if (leaves.empty()) spdlog::info("expansion '{}' on {} revealed no leaf tasks", task.title, entry.page_id);
    std::move(leaves.begin(), leaves.end(), std::back_inserter(worklist));
    return;
  }
  state.tasks.push_back(record);
  if (events_.on_task_executed) events_.on_task_executed(record);
}

void Explorer::navigate_page(ExplorationState& state, const QueueEntry& entry) {
  const Observation o = env_.goto_page(session_, entry);

  auto candidates = oracle_.discover_simple_tasks(o, state.known_tasks);
  auto survivors = filter_tasks(candidates, state.registry, o);
  state.known_tasks.insert(state.known_tasks.end(), survivors.begin(), survivors.end());

  // Categorization and info-seeking proposals are independent calls.
  auto categorized = std::async(std::launch::async, [&] { return oracle_.categorize_tasks(o, survivors); });
  auto info = std::async(std::launch::async, [&] { return oracle_.propose_info_seeking(o, entry.trace); });
  std::vector<SimpleTask> labeled;
  std::vector<SimpleTask> asks;
  std::exception_ptr failure;
  try {
    labeled = categorized.get();
  } catch (...) {
    failure = std::current_exception();
  }
  try {
    asks = info.get();
  } catch (...) {
    if (!failure) failure = std::current_exception();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<SimpleTask> fixed;
  std::vector<SimpleTask> dynamic;
  for (auto& t : labeled) (t.category == TaskCategory::dynamic ? dynamic : fixed).push_back(std::move(t));
  auto sampled = sample_dynamic(dynamic, config_.dynamic_cap, page_sampling_seed(config_.seed, o.page_id));

  std::vector<Pending> worklist;
  for (auto* group : {&fixed, &sampled}) {
    for (auto& t : *group) {
      Pending p;
      p.signature = task_signature(t, o);
      p.key = structural_key(t.action_sequence, o);
      p.task = std::move(t);
      worklist.push_back(std::move(p));
    }
  }
  for (auto& ask : asks) worklist.push_back(Pending{std::move(ask), {}, {}, std::nullopt, std::nullopt, false});

  for (std::size_t i = 0; i < worklist.size(); ++i) {
    if (state.budget_reached()) return;
    Pending pending = std::move(worklist[i]);
    process(state, entry, o, pending, worklist);
  }
}

void Explorer::run_loop(ExplorationState& state) {
  while (!state.queue.empty() && !state.budget_reached()) {
    QueueEntry entry = std::move(state.queue.front());
    state.queue.pop_front();
    if (state.explored.contains(entry.page_id)) continue;
    state.explored.insert(entry.page_id);
    state.dequeues.push_back({entry.page_id, entry.depth});
    if (events_.on_dequeue) events_.on_dequeue(entry);
    try {
      navigate_page(state, entry);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::schema_violation) {
        spdlog::warn("page {} aborted: {}", entry.page_id, e.what());
      } else if (skippable(e.code())) {
        spdlog::warn("page {} skipped: {}", entry.page_id, e.what());
      } else {
        throw;
      }
    }
    persist(state);
  }
  state.done = true;
  persist(state);
}

ExplorationState Explorer::explore() {
  ExplorationState state;
  state.budget = config_.budget;
  session_ = env_.reset();
  SessionGuard guard(env_, session_);
  const Observation seed = env_.observe(session_);
  enqueue(state, make_queue_entry(seed.page_id, {}));
  run_loop(state);
  return state;
}

ExplorationState Explorer::resume(ExplorationState state) {
  if (state.done) return state;
  state.budget = config_.budget;
  session_ = env_.reset();
  SessionGuard guard(env_, session_);
  run_loop(state);
  return state;
}

void Explorer::persist(const ExplorationState& state) const {
  if (!store_) return;
  std::vector<json> tuples(state.tuples.begin(), state.tuples.end());
  std::vector<json> tasks(state.tasks.begin(), state.tasks.end());
  store_->write_jsonl(run_files::kExploration, tuples);
  store_->write_jsonl(run_files::kTasks, tasks);
  store_->write_atomic(run_files::kState, json(state).dump() + "\n");
}

ExplorationState Explorer::load(const RunStore& store) {
  const json j = store.read_json(run_files::kState);
  try {
    return j.get<ExplorationState>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("state.json: ") + e.what());
  }
}

}  // namespace webtrail
