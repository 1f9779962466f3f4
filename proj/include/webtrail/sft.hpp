#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "webtrail/core.hpp"
#include "webtrail/run_store.hpp"

namespace webtrail {

inline constexpr std::size_t kHistoryWindow = 3;

struct SftExample {
  std::string task;
  std::string image;  // screenshot handle relative to the run directory
  std::string tree;   // simplified markup / accessibility tree text
  std::vector<Action> history;
  Action action;
  std::string reasoning;

  bool operator==(const SftExample&) const = default;
};

// n actions yield n+1 examples; the last one's action is stop. Throws
// unrefined_tuple for exploration tuples.
std::vector<SftExample> tuple_to_examples(const TaskTuple& tuple);

// One conversational record:
//   {"conversations":[{"role":"user","content":[task, image, tree, history]},
//                     {"role":"assistant","content":[reasoning, action]}]}
nlohmann::json example_to_record(const SftExample& example);
SftExample example_from_record(const nlohmann::json& record);  // parse_error on malformed input

std::string serialize_dataset(const std::vector<SftExample>& examples);
std::vector<SftExample> parse_dataset(std::string_view text);

struct DatasetManifest {
  std::map<std::string, std::size_t> records_per_site;
  std::map<std::string, std::size_t> tuples_per_site;

  std::size_t total_records() const;
};

void to_json(nlohmann::json& j, const DatasetManifest& m);
void from_json(const nlohmann::json& j, DatasetManifest& m);

// Writes the dataset and its manifest into the run directory. Throws
// missing_screenshot when an example's image is absent from the run.
DatasetManifest export_dataset(const RunStore& run, const std::string& site, const std::vector<TaskTuple>& refined);

// Concatenates the datasets of several runs into `out`, copying images.
DatasetManifest merge_datasets(const std::vector<RunStore>& runs, const RunStore& out);

}  // namespace webtrail
