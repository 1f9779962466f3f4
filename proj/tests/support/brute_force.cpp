#include "support/brute_force.hpp"

#include <cctype>
#include <deque>
#include <map>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "support/test_paths.hpp"

namespace webtrail::testing {
namespace {

using nlohmann::json;

struct RawElement {
  std::string id;
  std::string role;
  json behavior;
  bool excluded = false;
  std::string group;
};

std::vector<RawElement> raw_elements(const json& page, int n) {
  std::vector<RawElement> out;
  for (const auto& e : page.at("elements")) {
    RawElement r{e.at("element_id"), e.at("role"), e.value("behavior", json("noop")), e.contains("excluded_class"),
                 e.value("dynamic_group", "")};
    if (r.group.empty()) {
      out.push_back(r);
      continue;
    }
    for (int i = 1; i <= n; ++i) {
      RawElement copy = r;
      copy.id = r.id + "-" + std::to_string(i);
      out.push_back(copy);
    }
  }
  return out;
}

Action to_action(const Step& s) {
  if (s.first == "click") return Action::click(s.second);
  if (s.first == "check") return Action::check(s.second);
  if (s.first == "fill") return Action::fill(s.second, "x");
  if (s.first == "press") return Action::press(s.second, "Enter");
  if (s.first == "selectoption") return Action::select_option(s.second, "Option 1");
  throw std::logic_error("unexpected step " + s.first);
}

const ElementDef& def_of(const Simulator& sim, const std::string& page, const std::string& id) {
  for (const auto& p : sim.graph().pages) {
    if (p.page_id != page) continue;
    for (const auto& e : p.elements) {
      if (e.element_id == id) return e;
    }
  }
  throw std::logic_error("no element " + id + " on " + page);
}

// Shortest sequence of clicks on reveal toggles after which `id` is visible.
std::vector<Step> shortest_reveal(const Simulator& sim, const std::string& page, const std::string& id,
                                  const std::vector<RawElement>& elements) {
  const ElementDef& target = def_of(sim, page, id);
  SimState start;
  start.page_id = page;
  std::deque<std::pair<SimState, std::vector<Step>>> frontier{{start, {}}};
  std::set<SimState> seen{start};
  while (!frontier.empty()) {
    auto [state, path] = frontier.front();
    frontier.pop_front();
    if (sim.is_visible(state, target)) return path;
    if (path.size() >= 6) continue;
    for (const auto& e : elements) {
      if (!e.behavior.is_object() || !e.behavior.contains("reveal")) continue;
      if (!sim.is_visible(state, def_of(sim, page, e.id))) continue;
      SimState next = sim.step(state, Action::click(e.id)).state;
      if (!seen.insert(next).second) continue;
      auto longer = path;
      longer.emplace_back("click", e.id);
      frontier.emplace_back(next, longer);
    }
  }
  throw std::logic_error("element " + id + " is never visible");
}

std::string page_name(const Simulator& sim, const std::string& identity) {
  const PageDef* p = sim.page_for_identity(identity);
  return p ? p->page_id : identity;
}

}  // namespace

std::vector<Step> steps_of(const std::vector<Action>& actions) {
  std::vector<Step> out;
  for (const auto& a : actions) out.emplace_back(std::string(to_string(a.kind)), a.element_id.value_or(""));
  return out;
}

std::vector<BruteLeaf> brute_force_leaves(const std::filesystem::path& site_file, int dynamic_items) {
  const json doc = json::parse(read_file(site_file));
  auto graph = std::make_shared<const SiteGraph>(load_sitegraph_file(site_file, dynamic_items));
  const Simulator sim(graph);

  std::vector<BruteLeaf> leaves;
  for (const auto& page : doc.at("pages")) {
    const std::string name = page.at("page_id");
    const auto elements = raw_elements(page, dynamic_items);
    std::map<std::string, std::string> role_of;
    for (const auto& e : elements) role_of[e.id] = e.role;

    for (const auto& e : elements) {
      if (e.excluded) continue;
      std::vector<Step> action;
      if (e.behavior.is_string()) {
        if (e.behavior == "noop") continue;
        action.emplace_back(e.role == "checkbox" ? "check" : "click", e.id);
      } else if (e.behavior.contains("navigate")) {
        action.emplace_back("click", e.id);
      } else if (e.behavior.contains("submit")) {
        for (const auto& field : e.behavior["submit"].value("required", std::vector<std::string>{})) {
          if (field == e.id) continue;
          const std::string& role = role_of.at(field);
          action.emplace_back(role == "textbox" ? "fill" : role == "select" ? "selectoption" : "check", field);
        }
        if (e.role == "textbox") {
          action.emplace_back("fill", e.id);
          action.emplace_back("press", e.id);
        } else {
          action.emplace_back("click", e.id);
        }
      } else {
        continue;  // reveal toggles are not leaves
      }

      BruteLeaf leaf{name, shortest_reveal(sim, name, e.id, elements), e.group};
      leaf.steps.insert(leaf.steps.end(), action.begin(), action.end());

      SimState state;
      state.page_id = name;
      for (const auto& s : leaf.steps) state = sim.step(state, to_action(s)).state;
      leaves.push_back(std::move(leaf));
    }
  }
  return leaves;
}

std::vector<BruteLeaf> brute_force_distinct_leaves(const std::filesystem::path& site_file, int dynamic_items) {
  const json doc = json::parse(read_file(site_file));
  std::map<std::string, std::string> role_of;
  std::map<std::string, std::string> label_of;
  std::map<std::string, std::vector<std::string>> edges;
  for (const auto& page : doc.at("pages")) {
    const std::string name = page.at("page_id");
    for (const auto& e : raw_elements(page, dynamic_items)) {
      role_of[name + "/" + e.id] = e.role;
      if (e.behavior.is_object() && e.behavior.contains("navigate")) edges[name].push_back(e.behavior["navigate"]);
      if (e.behavior.is_object() && e.behavior.contains("submit")) edges[name].push_back(e.behavior["submit"]["target"]);
    }
    for (const auto& e : page.at("elements")) {
      std::string text;
      for (char c : e.at("text").get<std::string>()) {
        const char lower = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (std::isspace(static_cast<unsigned char>(lower))) {
          if (!text.empty() && text.back() != ' ') text += ' ';
        } else {
          text += lower;
        }
      }
      while (!text.empty() && text.back() == ' ') text.pop_back();
      if (!e.contains("dynamic_group")) {
        label_of[name + "/" + e.at("element_id").get<std::string>()] = text;
        continue;
      }
      for (int i = 1; i <= dynamic_items; ++i)
        label_of[name + "/" + e.at("element_id").get<std::string>() + "-" + std::to_string(i)] = text + " " + std::to_string(i);
    }
  }

  std::map<std::string, int> depth{{doc.at("seed_page_id"), 0}};
  std::deque<std::string> frontier{doc.at("seed_page_id")};
  while (!frontier.empty()) {
    const std::string page = frontier.front();
    frontier.pop_front();
    for (const auto& next : edges[page]) {
      if (depth.emplace(next, depth[page] + 1).second) frontier.push_back(next);
    }
  }

  std::map<std::string, BruteLeaf> by_key;
  for (auto& leaf : brute_force_leaves(site_file, dynamic_items)) {
    std::string key;
    for (const auto& [kind, id] : leaf.steps)
      key += kind + ":" + role_of[leaf.page + "/" + id] + ":" + label_of[leaf.page + "/" + id] + "|";
    auto it = by_key.find(key);
    if (it == by_key.end() || depth.at(leaf.page) < depth.at(it->second.page)) by_key[key] = leaf;
  }
  std::vector<BruteLeaf> out;
  for (auto& [key, leaf] : by_key) out.push_back(std::move(leaf));
  return out;
}

std::vector<BruteLeaf> executed_leaves(const ExplorationState& state, const Simulator& sim) {
  std::vector<BruteLeaf> out;
  for (const auto& t : state.tasks) out.push_back({page_name(sim, t.task.origin_page), steps_of(t.task.action_sequence), ""});
  return out;
}

}  // namespace webtrail::testing
