#include "webtrail/sitegraph.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "webtrail/signature.hpp"

namespace webtrail {
namespace {

using nlohmann::json;

[[noreturn]] void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

std::optional<ExcludedClass> parse_excluded(const std::string& name) {
  for (auto c : {ExcludedClass::auth, ExcludedClass::payment, ExcludedClass::account_mod, ExcludedClass::transient,
                 ExcludedClass::tooltip}) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

Behavior parse_behavior(const json& j, const std::string& where) {
  Behavior b;
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    if (name == "toggle") {
      b.kind = Behavior::Kind::toggle;
    } else if (name == "noop") {
      b.kind = Behavior::Kind::noop;
    } else {
      fail(ErrorCode::parse_error, where + ": unknown behavior '" + name + "'");
    }
    return b;
  }
  if (!j.is_object() || j.size() != 1) fail(ErrorCode::parse_error, where + ": malformed behavior");
  if (j.contains("navigate")) {
    b.kind = Behavior::Kind::navigate;
    b.target = j.at("navigate").get<std::string>();
  } else if (j.contains("reveal")) {
    b.kind = Behavior::Kind::reveal;
    b.ids = j.at("reveal").get<std::vector<std::string>>();
  } else if (j.contains("submit")) {
    b.kind = Behavior::Kind::submit;
    const auto& s = j.at("submit");
    b.target = s.at("target").get<std::string>();
    b.ids = s.value("required", std::vector<std::string>{});
  } else {
    fail(ErrorCode::parse_error, where + ": unknown behavior");
  }
  return b;
}

ElementDef parse_element(const json& j, const std::string& page_id) {
  ElementDef e;
  e.element_id = j.at("element_id").get<std::string>();
  const std::string where = page_id + "/" + e.element_id;
  e.text = j.at("text").get<std::string>();
  auto role = parse_element_role(j.at("role").get<std::string>());
  if (!role || *role == ElementRole::other) fail(ErrorCode::parse_error, where + ": unknown role");
  e.role = *role;
  if (j.contains("visibility")) {
    const auto& v = j.at("visibility");
    if (v.is_object()) {
      e.revealed_by = v.at("revealed_by").get<std::string>();
    } else if (v.get<std::string>() != "visible") {
      fail(ErrorCode::parse_error, where + ": unknown visibility");
    }
  }
  e.behavior = parse_behavior(j.value("behavior", json("noop")), where);
  if (j.contains("dynamic_group")) e.dynamic_group = j.at("dynamic_group").get<std::string>();
  if (j.contains("excluded_class")) {
    e.excluded_class = parse_excluded(j.at("excluded_class").get<std::string>());
    if (!e.excluded_class) fail(ErrorCode::parse_error, where + ": unknown excluded_class");
  }
  if (j.contains("info_payload")) e.info_payload = j.at("info_payload").get<std::string>();
  return e;
}

// Replaces each dynamic template with its items and rewrites references to
// the template id in reveal lists.
void materialize_dynamic(PageDef& page, int count) {
  std::map<std::string, std::vector<std::string>> expanded;
  std::vector<ElementDef> out;
  for (auto& e : page.elements) {
    if (!e.dynamic_group) {
      out.push_back(e);
      continue;
    }
    auto& ids = expanded[e.element_id];
    for (int i = 1; i <= count; ++i) {
      ElementDef item = e;
      item.element_id = e.element_id + "-" + std::to_string(i);
      item.text = e.text + " " + std::to_string(i);
      ids.push_back(item.element_id);
      out.push_back(std::move(item));
    }
  }
  for (auto& e : out) {
    if (e.behavior.kind != Behavior::Kind::reveal) continue;
    std::vector<std::string> ids;
    for (const auto& id : e.behavior.ids) {
      if (auto it = expanded.find(id); it != expanded.end()) {
        ids.insert(ids.end(), it->second.begin(), it->second.end());
      } else {
        ids.push_back(id);
      }
    }
    e.behavior.ids = std::move(ids);
  }
  page.elements = std::move(out);
}

void validate_page(const SiteGraph& graph, const PageDef& page) {
  std::set<std::string> ids;
  for (const auto& e : page.elements) {
    if (!ids.insert(e.element_id).second)
      fail(ErrorCode::parse_error, page.page_id + ": duplicate element_id '" + e.element_id + "'");
  }
  for (const auto& e : page.elements) {
    const std::string where = page.page_id + "/" + e.element_id;
    if (e.revealed_by && !page.find(*e.revealed_by))
      fail(ErrorCode::parse_error, where + ": revealed_by names unknown element '" + *e.revealed_by + "'");
    if ((e.behavior.kind == Behavior::Kind::navigate || e.behavior.kind == Behavior::Kind::submit) &&
        !graph.page(e.behavior.target))
      fail(ErrorCode::dangling_target, where + ": target page '" + e.behavior.target + "' does not exist");
  }
  for (const auto& e : page.elements) {
    std::set<std::string> seen{e.element_id};
    const ElementDef* current = &e;
    while (current->revealed_by) {
      if (!seen.insert(*current->revealed_by).second)
        fail(ErrorCode::reveal_cycle, page.page_id + ": reveal chain through '" + e.element_id + "' does not terminate");
      current = page.find(*current->revealed_by);
    }
  }
  for (const auto& e : page.elements) {
    const std::string where = page.page_id + "/" + e.element_id;
    if (e.revealed_by) {
      const auto& parent = page.find(*e.revealed_by)->behavior;
      if (parent.kind != Behavior::Kind::reveal ||
          std::find(parent.ids.begin(), parent.ids.end(), e.element_id) == parent.ids.end())
        fail(ErrorCode::parse_error, where + ": not listed in the reveal set of '" + *e.revealed_by + "'");
    }
    if (e.behavior.kind == Behavior::Kind::reveal) {
      for (const auto& id : e.behavior.ids) {
        const auto* child = page.find(id);
        if (!child || child->revealed_by != e.element_id)
          fail(ErrorCode::parse_error, where + ": revealed element '" + id + "' must declare revealed_by");
      }
    }
    if (e.behavior.kind == Behavior::Kind::submit) {
      for (const auto& id : e.behavior.ids) {
        const auto* field = page.find(id);
        if (!field || (field->role != ElementRole::textbox && field->role != ElementRole::select &&
                       field->role != ElementRole::checkbox))
          fail(ErrorCode::parse_error, where + ": required field '" + id + "' is not a form field on this page");
      }
    }
  }
}

std::string sample_input(const ElementDef& e) { return "sample " + normalize_label(e.text); }

Action fill_action(const ElementDef& field) {
  switch (field.role) {
    case ElementRole::select: return Action::select_option(field.element_id, "Option 1");
    case ElementRole::checkbox: return Action::check(field.element_id);
    default: return Action::fill(field.element_id, sample_input(field));
  }
}

KeyedStep keyed(const Action& a, const PageDef& page) {
  KeyedStep step{a.kind, {}, {}};
  if (a.element_id) {
    const auto* e = page.find(*a.element_id);
    step.role = std::string(to_string(e->role));
    step.label = normalize_label(e->text);
  }
  return step;
}

bool excluded_in_chain(const PageDef& page, const ElementDef& e) {
  if (e.excluded_class) return true;
  for (const auto* toggle : reveal_chain(page, e)) {
    if (toggle->excluded_class) return true;
  }
  return false;
}

}  // namespace

std::string_view to_string(ExcludedClass excluded) {
  switch (excluded) {
    case ExcludedClass::auth: return "auth";
    case ExcludedClass::payment: return "payment";
    case ExcludedClass::account_mod: return "account_mod";
    case ExcludedClass::transient: return "transient";
    case ExcludedClass::tooltip: return "tooltip";
  }
  return "auth";
}

const ElementDef* PageDef::find(std::string_view element_id) const {
  for (const auto& e : elements) {
    if (e.element_id == element_id) return &e;
  }
  return nullptr;
}

const PageDef* SiteGraph::page(std::string_view page_id) const {
  for (const auto& p : pages) {
    if (p.page_id == page_id) return &p;
  }
  return nullptr;
}

const PageDef* SiteGraph::page_by_url(std::string_view url) const {
  const std::string wanted = normalize_url(url);
  for (const auto& p : pages) {
    if (normalize_url(p.url) == wanted) return &p;
  }
  return nullptr;
}

const PageDef& SiteGraph::seed() const { return *page(seed_page_id); }

SiteGraph load_sitegraph(std::string_view document, std::optional<int> dynamic_item_count) {
  SiteGraph graph;
  try {
    const json doc = json::parse(document);
    graph.site = doc.at("site").get<std::string>();
    graph.seed_page_id = doc.at("seed_page_id").get<std::string>();
    graph.dynamic_item_count = dynamic_item_count.value_or(doc.value("dynamic_item_count", 3));
    if (graph.dynamic_item_count < 0) fail(ErrorCode::parse_error, "dynamic_item_count must be >= 0");
    for (const auto& p : doc.at("pages")) {
      PageDef page;
      page.page_id = p.at("page_id").get<std::string>();
      page.url = p.value("url", "sim://" + graph.site + "/" + page.page_id);
      for (const auto& e : p.at("elements")) page.elements.push_back(parse_element(e, page.page_id));
      if (graph.page(page.page_id)) fail(ErrorCode::parse_error, "duplicate page_id '" + page.page_id + "'");
      graph.pages.push_back(std::move(page));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::parse_error, e.what());
  }
  if (!graph.page(graph.seed_page_id))
    fail(ErrorCode::dangling_target, "seed page '" + graph.seed_page_id + "' does not exist");
  for (auto& page : graph.pages) materialize_dynamic(page, graph.dynamic_item_count);
  for (const auto& page : graph.pages) validate_page(graph, page);
  return graph;
}

SiteGraph load_sitegraph_file(const std::filesystem::path& path, std::optional<int> dynamic_item_count) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::environment_unreachable, "cannot read site file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return load_sitegraph(buffer.str(), dynamic_item_count);
}

std::vector<const ElementDef*> reveal_chain(const PageDef& page, const ElementDef& element) {
  std::vector<const ElementDef*> chain;
  const ElementDef* current = &element;
  while (current->revealed_by) {
    current = page.find(*current->revealed_by);
    chain.push_back(current);
  }
  std::reverse(chain.begin(), chain.end());
  return chain;
}

std::map<std::string, int> page_depths(const SiteGraph& graph) {
  std::map<std::string, int> depth{{graph.seed_page_id, 0}};
  std::deque<std::string> frontier{graph.seed_page_id};
  while (!frontier.empty()) {
    const auto* page = graph.page(frontier.front());
    frontier.pop_front();
    for (const auto& e : page->elements) {
      if (e.behavior.kind != Behavior::Kind::navigate && e.behavior.kind != Behavior::Kind::submit) continue;
      if (depth.emplace(e.behavior.target, depth[page->page_id] + 1).second) frontier.push_back(e.behavior.target);
    }
  }
  return depth;
}

std::vector<Action> leaf_actions(const PageDef& page, const ElementDef& element) {
  std::vector<Action> actions;
  switch (element.behavior.kind) {
    case Behavior::Kind::navigate:
      actions.push_back(Action::click(element.element_id));
      break;
    case Behavior::Kind::toggle:
      actions.push_back(element.role == ElementRole::checkbox ? Action::check(element.element_id)
                                                              : Action::click(element.element_id));
      break;
    case Behavior::Kind::submit:
      for (const auto& id : element.behavior.ids) {
        if (id != element.element_id) actions.push_back(fill_action(*page.find(id)));
      }
      if (element.role == ElementRole::textbox) {
        actions.push_back(Action::fill(element.element_id, sample_input(element)));
        actions.push_back(Action::press(element.element_id, "Enter"));
      } else {
        actions.push_back(Action::click(element.element_id));
      }
      break;
    case Behavior::Kind::reveal:
    case Behavior::Kind::noop:
      break;
  }
  return actions;
}

GroundTruth ground_truth_leaf_tasks(const SiteGraph& graph) {
  const auto depths = page_depths(graph);
  auto depth_of = [&](const std::string& page_id) {
    auto it = depths.find(page_id);
    return it == depths.end() ? std::numeric_limits<int>::max() : it->second;
  };

  std::map<std::string, LeafTask> fixed;
  std::map<std::pair<std::string, std::string>, std::set<std::string>> groups;
  for (const auto& page : graph.pages) {
    for (const auto& e : page.elements) {
      auto own = leaf_actions(page, e);
      if (own.empty() || excluded_in_chain(page, e)) continue;
      LeafTask leaf{page.page_id, e.element_id, {}, {}};
      for (const auto* toggle : reveal_chain(page, e)) leaf.actions.push_back(Action::click(toggle->element_id));
      leaf.actions.insert(leaf.actions.end(), own.begin(), own.end());
      std::vector<KeyedStep> steps;
      for (const auto& a : leaf.actions) steps.push_back(keyed(a, page));
      leaf.key = structural_key(steps);

      if (e.dynamic_group) {
        groups[{page.page_id, *e.dynamic_group}].insert(leaf.key);
        continue;
      }
      auto it = fixed.find(leaf.key);
      if (it == fixed.end()) {
        fixed.emplace(leaf.key, std::move(leaf));
      } else {
        const int current = depth_of(it->second.page_id);
        const int candidate = depth_of(page.page_id);
        if (candidate < current || (candidate == current && page.page_id < it->second.page_id))
          it->second = std::move(leaf);
      }
    }
  }

  GroundTruth truth;
  for (auto& [key, leaf] : fixed) truth.fixed.push_back(std::move(leaf));
  for (auto& [id, keys] : groups) truth.dynamic.push_back({id.first, id.second, {keys.begin(), keys.end()}});
  return truth;
}

}  // namespace webtrail
