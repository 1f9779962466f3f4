#include "webtrail/sft.hpp"

#include <filesystem>
#include <sstream>

namespace webtrail {
namespace {

using nlohmann::json;

constexpr std::string_view kTaskPrefix = "Task: ";
constexpr std::string_view kTreePrefix = "Accessibility tree:\n";
constexpr std::string_view kHistoryHeader = "Previous actions:";
constexpr std::string_view kNoHistory = "Previous actions: none";
constexpr std::string_view kActionPrefix = "Action: ";

json text_part(std::string text) { return {{"type", "text"}, {"text", std::move(text)}}; }

std::string strip_prefix(const std::string& text, std::string_view prefix, const char* what) {
  if (text.compare(0, prefix.size(), prefix) != 0)
    throw Error(ErrorCode::parse_error, std::string("malformed ") + what + " part");
  return text.substr(prefix.size());
}

std::string default_reasoning(const Observation& o, const Action& a) {
  if (a.kind == ActionKind::stop) return "The task is complete.";
  std::string label;
  if (a.element_id) {
    const auto* e = o.find(*a.element_id);
    label = e ? e->text : *a.element_id;
  }
  return "Next I " + std::string(to_string(a.kind)) + (label.empty() ? "" : " \"" + label + "\"") + ".";
}

}  // namespace

std::vector<SftExample> tuple_to_examples(const TaskTuple& tuple) {
  if (!tuple.refined) throw Error(ErrorCode::unrefined_tuple, "tuple '" + tuple.description + "' is not refined");
  const auto& steps = tuple.trajectory.steps;
  const auto actions = tuple.trajectory.actions();
  std::vector<SftExample> out;
  for (std::size_t j = 0; j <= steps.size(); ++j) {
    const bool last = j == steps.size();
    const Observation& o = last ? tuple.trajectory.final_observation : steps[j].observation;
    SftExample ex;
    ex.task = tuple.description;
    ex.image = o.screenshot;
    ex.tree = o.simplified_html;
    const std::size_t from = j > kHistoryWindow ? j - kHistoryWindow : 0;
    ex.history.assign(actions.begin() + static_cast<std::ptrdiff_t>(from), actions.begin() + static_cast<std::ptrdiff_t>(j));
    ex.action = last ? Action::stop() : steps[j].action;
    ex.reasoning = last ? tuple.trajectory.final_reasoning : steps[j].reasoning;
    if (ex.reasoning.empty()) ex.reasoning = default_reasoning(o, ex.action);
    out.push_back(std::move(ex));
  }
  return out;
}

json example_to_record(const SftExample& ex) {
  std::string history;
  if (ex.history.empty()) {
    history = kNoHistory;
  } else {
    history = kHistoryHeader;
    for (std::size_t i = 0; i < ex.history.size(); ++i)
      history += "\n" + std::to_string(i + 1) + ". " + format_action(ex.history[i]);
  }
  json user{{"role", "user"},
            {"content", json::array({text_part(std::string(kTaskPrefix) + ex.task),
                                     json{{"type", "image"}, {"image", ex.image}},
                                     text_part(std::string(kTreePrefix) + ex.tree), text_part(history)})}};
  json assistant{{"role", "assistant"},
                 {"content", json::array({text_part(ex.reasoning),
                                          text_part(std::string(kActionPrefix) + format_action(ex.action))})}};
  return {{"conversations", json::array({user, assistant})}};
}

SftExample example_from_record(const json& record) {
  try {
    const auto& conv = record.at("conversations");
    if (conv.size() != 2 || conv.at(0).at("role") != "user" || conv.at(1).at("role") != "assistant")
      throw Error(ErrorCode::parse_error, "record must hold one user and one assistant message");
    const auto& user = conv.at(0).at("content");
    const auto& assistant = conv.at(1).at("content");
    if (user.size() != 4 || assistant.size() != 2) throw Error(ErrorCode::parse_error, "unexpected content layout");
    SftExample ex;
    ex.task = strip_prefix(user.at(0).at("text").get<std::string>(), kTaskPrefix, "task");
    ex.image = user.at(1).at("image").get<std::string>();
    ex.tree = strip_prefix(user.at(2).at("text").get<std::string>(), kTreePrefix, "tree");
    const std::string history = user.at(3).at("text").get<std::string>();
    if (history != kNoHistory) {
      std::istringstream lines(strip_prefix(history, kHistoryHeader, "history"));
      std::string line;
      std::getline(lines, line);  // remainder of the header line
      std::size_t n = 0;
      while (std::getline(lines, line)) {
        const std::string number = std::to_string(++n) + ". ";
        ex.history.push_back(parse_action_text(strip_prefix(line, number, "history")));
      }
      if (ex.history.empty() || ex.history.size() > kHistoryWindow)
        throw Error(ErrorCode::parse_error, "history must hold 1 to 3 actions");
    }
    ex.reasoning = assistant.at(0).at("text").get<std::string>();
    ex.action = parse_action_text(strip_prefix(assistant.at(1).at("text").get<std::string>(), kActionPrefix, "action"));
    return ex;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse_error, e.what());
  }
}

std::string serialize_dataset(const std::vector<SftExample>& examples) {
  std::string out;
  for (const auto& ex : examples) {
    out += example_to_record(ex).dump();
    out.push_back('\n');
  }
  return out;
}

std::vector<SftExample> parse_dataset(std::string_view text) {
  std::vector<SftExample> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(example_from_record(json::parse(line)));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::parse_error, e.what());
    }
  }
  return out;
}

std::size_t DatasetManifest::total_records() const {
  std::size_t total = 0;
  for (const auto& [site, n] : records_per_site) total += n;
  return total;
}

void to_json(json& j, const DatasetManifest& m) {
  j = json{{"records_per_site", m.records_per_site},
           {"tuples_per_site", m.tuples_per_site},
           {"total_records", m.total_records()}};
}

void from_json(const json& j, DatasetManifest& m) {
  m.records_per_site = j.at("records_per_site").get<std::map<std::string, std::size_t>>();
  m.tuples_per_site = j.value("tuples_per_site", std::map<std::string, std::size_t>{});
}

DatasetManifest export_dataset(const RunStore& run, const std::string& site, const std::vector<TaskTuple>& refined) {
  std::vector<SftExample> examples;
  for (const auto& tuple : refined) {
    auto part = tuple_to_examples(tuple);
    std::move(part.begin(), part.end(), std::back_inserter(examples));
  }
  for (const auto& ex : examples) {
    if (ex.image.empty() || !std::filesystem::is_regular_file(run.path(ex.image)))
      throw Error(ErrorCode::missing_screenshot, "image '" + ex.image + "' is not in " + run.dir().string());
  }
  DatasetManifest manifest;
  manifest.records_per_site[site] = examples.size();
  manifest.tuples_per_site[site] = refined.size();
  run.write_atomic(run_files::kDataset, serialize_dataset(examples));
  run.write_json(run_files::kDatasetManifest, manifest);
  return manifest;
}

DatasetManifest merge_datasets(const std::vector<RunStore>& runs, const RunStore& out) {
  DatasetManifest merged;
  std::string dataset;
  for (const auto& run : runs) {
    const auto manifest = run.read_json(run_files::kDatasetManifest).get<DatasetManifest>();
    const std::string text = run.read_required(run_files::kDataset);
    for (const auto& ex : parse_dataset(text)) {
      const auto target = out.path(ex.image);
      if (std::filesystem::exists(target)) continue;
      std::error_code ec;
      std::filesystem::create_directories(target.parent_path(), ec);
      std::filesystem::copy_file(run.path(ex.image), target, ec);
      if (ec) throw Error(ErrorCode::missing_screenshot, "cannot copy " + run.path(ex.image).string() + ": " + ec.message());
    }
    dataset += text;
    for (const auto& [site, n] : manifest.records_per_site) merged.records_per_site[site] += n;
    for (const auto& [site, n] : manifest.tuples_per_site) merged.tuples_per_site[site] += n;
  }
  out.write_atomic(run_files::kDataset, dataset);
  out.write_json(run_files::kDatasetManifest, merged);
  return merged;
}

}  // namespace webtrail
