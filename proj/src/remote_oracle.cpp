#include "webtrail/remote_oracle.hpp"

#include <spdlog/spdlog.h>

#include <fstream>
#include <sstream>

#include "webtrail/hash.hpp"
#include "webtrail/signature.hpp"

namespace webtrail {
namespace {

using nlohmann::json;

[[noreturn]] void schema_error(const std::string& message) { throw Error(ErrorCode::schema_violation, message); }

void expect_array(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key) || !j.at(key).is_array())
    schema_error(std::string("expected an object with array '") + key + "'");
}

ActionKind wire_kind(const std::string& type) {
  if (auto kind = parse_action_kind(type)) return *kind;
  std::string squashed;
  for (char c : type) {
    if (c != '_' && c != ' ') squashed.push_back(c);
  }
  if (auto kind = parse_action_kind(squashed)) return *kind;
  schema_error("unknown action type '" + type + "'");
}

std::string scalar_text(const json& j) { return j.is_string() ? j.get<std::string>() : j.dump(); }

void validate_task_list(const json& reply) {
  expect_array(reply, "task_list");
  tasks_from_wire(reply.at("task_list"));
}

std::string history_text(const std::vector<Action>& history) {
  json lines = json::array();
  for (const auto& a : history) lines.push_back(format_action(a));
  return lines.dump();
}

std::string trajectory_text(const Trajectory& trajectory) {
  json steps = json::array();
  for (const auto& step : trajectory.steps) {
    json s{{"page", step.observation.url}, {"action", format_action(step.action)}};
    if (step.action.element_id) {
      if (const auto* e = step.observation.find(*step.action.element_id)) s["element_text"] = e->text;
    }
    steps.push_back(std::move(s));
  }
  return steps.dump();
}

}  // namespace

std::optional<std::string> OracleRequest::violation() const {
  const int expected = prompt_image_count(prompt_id);
  if (static_cast<int>(images.size()) != expected)
    return std::string(to_string(prompt_id)) + " carries " + std::to_string(expected) + " image(s), got " +
           std::to_string(images.size());
  return std::nullopt;
}

json tasks_to_wire(const std::vector<SimpleTask>& tasks, const Observation& o) {
  json list = json::array();
  for (const auto& task : tasks) {
    json actions = json::array();
    for (const auto& a : task.action_sequence) {
      const auto* e = a.element_id ? o.find(*a.element_id) : nullptr;
      actions.push_back({{"element_id", a.element_id ? json(*a.element_id) : json(nullptr)},
                         {"text", e ? e->text : std::string()},
                         {"type", to_string(a.kind)},
                         {"input", a.inputs}});
    }
    list.push_back({{"title", task.title}, {"is_allowed", task.is_allowed}, {"action_sequence", actions}});
  }
  return list;
}

std::vector<SimpleTask> tasks_from_wire(const json& task_list) {
  std::vector<SimpleTask> tasks;
  for (const auto& item : task_list) {
    if (!item.is_object() || !item.contains("title") || !item.at("title").is_string())
      schema_error("task without a title");
    SimpleTask task;
    task.title = item.at("title").get<std::string>();
    const auto& allowed = item.value("is_allowed", json(true));
    if (!allowed.is_boolean()) schema_error("is_allowed must be a boolean");
    task.is_allowed = allowed.get<bool>();
    if (!item.contains("action_sequence") || !item.at("action_sequence").is_array())
      schema_error("task '" + task.title + "' has no action_sequence");
    for (const auto& step : item.at("action_sequence")) {
      if (!step.is_object() || !step.contains("type") || !step.at("type").is_string())
        schema_error("action without a type in '" + task.title + "'");
      Action a;
      a.kind = wire_kind(step.at("type").get<std::string>());
      if (step.contains("element_id") && !step.at("element_id").is_null() && a.kind != ActionKind::go_to)
        a.element_id = scalar_text(step.at("element_id"));
      if (step.contains("input")) {
        const auto& input = step.at("input");
        if (input.is_array()) {
          for (const auto& v : input) a.inputs.push_back(scalar_text(v));
        } else if (!input.is_null()) {
          a.inputs.push_back(scalar_text(input));
        }
      }
      task.action_sequence.push_back(std::move(a));
    }
    tasks.push_back(std::move(task));
  }
  return tasks;
}

std::string extract_json_text(std::string_view reply) {
  const auto open = reply.find('{');
  const auto close = reply.rfind('}');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open)
    schema_error("reply contains no JSON object");
  return std::string(reply.substr(open, close - open + 1));
}

RemoteOracle::RemoteOracle(RemoteOracleConfig config, std::shared_ptr<ScreenshotStore> images)
    : config_(std::move(config)),
      images_(std::move(images)),
      chat_(config_.endpoint, ErrorCode::oracle_unavailable),
      in_flight_(std::clamp(config_.max_in_flight, 1, kMaxInFlightLimit)) {}

std::optional<std::string> RemoteOracle::cache_lookup(const std::string& key) const {
  if (!config_.cache_dir) return std::nullopt;
  std::ifstream in(*config_.cache_dir / (key + ".json"));
  if (!in) return std::nullopt;
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void RemoteOracle::cache_store(const std::string& key, const std::string& reply) const {
  if (!config_.cache_dir) return;
  std::error_code ec;
  std::filesystem::create_directories(*config_.cache_dir, ec);
  const auto path = *config_.cache_dir / (key + ".json");
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    out << reply;
    if (!out) {
      spdlog::warn("cannot write oracle cache entry {}", path.string());
      return;
    }
  }
  std::filesystem::rename(tmp, path, ec);
}

json RemoteOracle::ask(const OracleRequest& request, const std::function<void(const json&)>& validate) {
  if (auto violation = request.violation()) throw Error(ErrorCode::invalid_argument, *violation);

  std::string key_material = std::string(to_string(request.prompt_id)) + "\n" + request.text;
  for (const auto& handle : request.images) key_material += "\n" + handle;
  const std::string key = sha256_hex(key_material);

  auto parse_valid = [&](const std::string& reply) {
    json j = json::parse(extract_json_text(reply));
    validate(j);
    return j;
  };

  if (auto cached = cache_lookup(key)) {
    try {
      return parse_valid(*cached);
    } catch (const std::exception& e) {
      spdlog::warn("ignoring unusable oracle cache entry {}: {}", key, e.what());
    }
  }

  ChatMessage user{"user", request.text, {}};
  for (const auto& handle : request.images) {
    if (!images_ || !images_->contains(handle))
      throw Error(ErrorCode::missing_screenshot, "oracle request refers to missing image '" + handle + "'");
    user.images.push_back(base64_encode(images_->read(handle)));
  }
  std::vector<ChatMessage> conversation{user};

  std::string last_problem;
  for (int attempt = 0; attempt <= config_.schema_retries; ++attempt) {
    std::string reply;
    {
      in_flight_.acquire();
      try {
        reply = chat_.complete(conversation);
      } catch (...) {
        in_flight_.release();
        throw;
      }
      in_flight_.release();
    }
    try {
      json j = parse_valid(reply);
      cache_store(key, reply);
      return j;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::schema_violation) throw;
      last_problem = e.what();
    } catch (const json::exception& e) {
      last_problem = e.what();
    }
    spdlog::warn("{} reply failed schema check (attempt {}): {}", to_string(request.prompt_id), attempt + 1,
                 last_problem);
    conversation.push_back({"assistant", reply, {}});
    conversation.push_back({"user", kSchemaReminder, {}});
  }
  throw Error(ErrorCode::schema_violation, std::string(to_string(request.prompt_id)) + " reply still malformed after " +
                                               std::to_string(config_.schema_retries) + " re-asks: " + last_problem);
}

std::vector<SimpleTask> RemoteOracle::do_discover(const Observation& o, const std::vector<SimpleTask>& observed) {
  OracleRequest request{PromptId::discover,
                        render_prompt(PromptId::discover, {{"HTML", o.simplified_html},
                                                           {"PAST_ACTION_SEQUENCES", tasks_to_wire(observed, o).dump()}}),
                        {o.screenshot}};
  return tasks_from_wire(ask(request, validate_task_list).at("task_list"));
}

std::vector<SimpleTask> RemoteOracle::do_discover_differential(const Observation& before, const Observation& after) {
  OracleRequest request{PromptId::discover_differential,
                        render_prompt(PromptId::discover_differential, {{"HTML", after.simplified_html}}),
                        {before.screenshot, after.screenshot}};
  return tasks_from_wire(ask(request, validate_task_list).at("task_list"));
}

VisualVerdict RemoteOracle::do_visual_change(const Observation& before, const Observation& after) {
  OracleRequest request{PromptId::visual_change, render_prompt(PromptId::visual_change, {}),
                        {before.screenshot, after.screenshot}};
  const json reply = ask(request, [](const json& j) {
    if (!j.is_object() || !j.contains("answer") || !j.at("answer").is_boolean())
      schema_error("expected {reason, answer: boolean}");
  });
  return {reply.value("reason", std::string()), reply.at("answer").get<bool>()};
}

std::vector<SimpleTask> RemoteOracle::do_categorize(const Observation& o, const std::vector<SimpleTask>& tasks) {
  OracleRequest request{PromptId::categorize,
                        render_prompt(PromptId::categorize,
                                      {{"HTML", o.simplified_html}, {"SHORT_TASKS", tasks_to_wire(tasks, o).dump()}}),
                        {o.screenshot}};
  // Replies are matched back to the input by title, in order.
  auto match = [&tasks](const json& reply) {
    expect_array(reply, "task_list");
    std::vector<SimpleTask> out = tasks;
    std::vector<bool> assigned(tasks.size(), false);
    for (const auto& item : reply.at("task_list")) {
      if (!item.is_object() || !item.contains("title") || !item.contains("category"))
        schema_error("categorized task needs title and category");
      const std::string title = scalar_text(item.at("title"));
      const std::string category = scalar_text(item.at("category"));
      std::size_t i = 0;
      while (i < tasks.size() && (assigned[i] || normalize_label(tasks[i].title) != normalize_label(title))) ++i;
      if (i == tasks.size()) schema_error("categorized unknown task '" + title + "'");
      assigned[i] = true;
      if (category == "fixed") {
        out[i].category = TaskCategory::fixed;
      } else if (category == "dynamic") {
        out[i].category = TaskCategory::dynamic;
        const auto& group = item.value("group_number", json());
        if (!group.is_number_integer()) schema_error("dynamic task '" + title + "' lacks an integer group_number");
        out[i].group_number = group.get<int>();
      } else {
        schema_error("unknown category '" + category + "'");
      }
    }
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      if (!assigned[i]) schema_error("task '" + tasks[i].title + "' was not categorized");
    }
    return out;
  };
  return match(ask(request, [&](const json& j) { match(j); }));
}

std::vector<SimpleTask> RemoteOracle::do_info_seeking(const Observation& o, const std::vector<Action>& history) {
  OracleRequest request{PromptId::info_seeking,
                        render_prompt(PromptId::info_seeking,
                                      {{"HTML", o.simplified_html}, {"ACTION_HISTORY", history_text(history)}}),
                        {o.screenshot}};
  const json reply = ask(request, [](const json& j) {
    expect_array(j, "ask_list");
    for (const auto& item : j.at("ask_list")) {
      if (!item.is_object() || !item.contains("ask") || !item.at("ask").is_string()) schema_error("ask without text");
    }
  });
  std::vector<SimpleTask> asks;
  for (const auto& item : reply.at("ask_list")) {
    SimpleTask ask;
    ask.title = item.at("ask").get<std::string>();
    ask.info_seeking = true;
    asks.push_back(std::move(ask));
  }
  return asks;
}

SynthesisDraft RemoteOracle::do_synthesize(const SynthesisInput& input) {
  json last{{"title", input.last.title}, {"actions", json::array()}};
  for (const auto& a : input.last.action_sequence) last["actions"].push_back(format_action(a));
  OracleRequest request{
      PromptId::synthesize_evaluate,
      render_prompt(PromptId::synthesize_evaluate,
                    {{"TASK_KIND", input.kind == TupleKind::action_oriented ? "action-oriented" : "information-seeking"},
                     {"ACTION_HISTORY", trajectory_text(input.trajectory)},
                     {"LAST_TASK", last.dump()}}),
      {input.trajectory.final_observation.screenshot}};
  const json reply = ask(request, [](const json& j) {
    if (!j.is_object() || !j.contains("description") || !j.at("description").is_string() || !j.contains("score") ||
        !j.at("score").is_number_integer())
      schema_error("expected {description: string, score: integer}");
  });
  return {reply.at("description").get<std::string>(), reply.at("score").get<int>()};
}

}  // namespace webtrail
