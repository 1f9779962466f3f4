#include "webtrail/simulator.hpp"

#include "webtrail/hash.hpp"

namespace webtrail {
namespace {

std::string escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string render_element(const SimState& state, const ElementDef& e) {
  const std::string id = "id=\"" + escape(e.element_id) + "\"";
  const std::string text = escape(e.text);
  auto value = [&] {
    auto it = state.values.find(e.element_id);
    return it == state.values.end() ? std::string() : escape(it->second);
  };
  switch (e.role) {
    case ElementRole::link:
      return "<a " + id + ">" + text + "</a>";
    case ElementRole::button:
      if (e.behavior.kind == Behavior::Kind::toggle)
        return "<button " + id + " aria-pressed=\"" + (state.toggled.contains(e.element_id) ? "true" : "false") +
               "\">" + text + "</button>";
      return "<button " + id + ">" + text + "</button>";
    case ElementRole::menu_toggle:
      return "<button " + id + " aria-expanded=\"" + (state.expanded.contains(e.element_id) ? "true" : "false") +
             "\">" + text + "</button>";
    case ElementRole::textbox:
      return "<input " + id + " type=\"text\" placeholder=\"" + text + "\" value=\"" + value() + "\"/>";
    case ElementRole::select:
      return "<select " + id + " value=\"" + value() + "\">" + text + "</select>";
    case ElementRole::checkbox:
      return "<label><input " + id + " type=\"checkbox\"" + (state.checked.contains(e.element_id) ? " checked" : "") +
             "/>" + text + "</label>";
    case ElementRole::other:
      break;
  }
  return "<span " + id + ">" + text + "</span>";
}

[[noreturn]] void not_applicable(const Action& action, const ElementDef& e) {
  throw Error(ErrorCode::action_not_applicable,
              std::string(to_string(action.kind)) + " does not apply to " + std::string(to_string(e.role)) + " '" +
                  e.element_id + "'");
}

}  // namespace

Simulator::Simulator(std::shared_ptr<const SiteGraph> graph) : graph_(std::move(graph)) {
  for (const auto& page : graph_->pages) identities_.emplace(page.page_id, identity_of(page));
}

SimState Simulator::initial_state() const { return navigate(graph_->seed_page_id); }

SimState Simulator::navigate(const std::string& page_id) const {
  SimState state;
  state.page_id = page_id;
  return state;
}

const PageDef& Simulator::page_of(const SimState& state) const {
  const auto* page = graph_->page(state.page_id);
  if (!page) throw Error(ErrorCode::invalid_argument, "state refers to unknown page '" + state.page_id + "'");
  return *page;
}

bool Simulator::is_visible(const SimState& state, const ElementDef& element) const {
  const auto& page = page_of(state);
  const ElementDef* current = &element;
  while (current->revealed_by) {
    if (!state.expanded.contains(*current->revealed_by)) return false;
    current = page.find(*current->revealed_by);
  }
  return true;
}

std::vector<const ElementDef*> Simulator::visible_elements(const SimState& state) const {
  std::vector<const ElementDef*> out;
  for (const auto& e : page_of(state).elements) {
    if (is_visible(state, e)) out.push_back(&e);
  }
  return out;
}

std::string Simulator::identity_of(const PageDef& page) const {
  std::vector<ObservedElement> at_load;
  for (const auto& e : page.elements) {
    if (!e.revealed_by) at_load.push_back({e.element_id, e.text, e.role, {}});
  }
  return page_identity(page.url, at_load);
}

const PageDef* Simulator::page_for_identity(std::string_view identity) const {
  for (const auto& [page_id, token] : identities_) {
    if (token == identity) return graph_->page(page_id);
  }
  return nullptr;
}

std::string Simulator::screenshot_handle(const Observation& observation) {
  Observation unshot = observation;
  unshot.screenshot.clear();
  return "images/" + sha256_hex(nlohmann::json(unshot).dump()).substr(0, 16) + ".png";
}

Observation Simulator::observe(const SimState& state) const {
  const auto& page = page_of(state);
  Observation o;
  o.page_id = identities_.at(page.page_id);
  o.url = normalize_url(page.url);
  std::string html = "<body>\n";
  int index = 0;
  for (const auto* e : visible_elements(state)) {
    o.elements.push_back({e->element_id, e->text, e->role, {16, 16 + 40 * index, 320, 32}});
    ++index;
    html += render_element(state, *e) + "\n";
    if (e->info_payload) html += "<p>" + escape(*e->info_payload) + "</p>\n";
  }
  html += "</body>";
  o.simplified_html = std::move(html);
  o.screenshot = screenshot_handle(o);
  return o;
}

SimState Simulator::submit(const SimState& state, const PageDef& page, const ElementDef& element) const {
  std::vector<std::string> missing;
  for (const auto& id : element.behavior.ids) {
    const auto* field = page.find(id);
    const bool filled = field->role == ElementRole::checkbox
                            ? state.checked.contains(id)
                            : (state.values.contains(id) && !state.values.at(id).empty());
    if (!filled) missing.push_back(id);
  }
  if (!missing.empty()) {
    std::string names;
    for (const auto& id : missing) names += (names.empty() ? "" : ", ") + id;
    throw Error(ErrorCode::submit_missing_required, "'" + element.element_id + "' requires " + names);
  }
  return navigate(element.behavior.target);
}

SimStep Simulator::step(const SimState& state, const Action& action) const {
  if (auto verdict = validate_action(action); !verdict) throw Error(ErrorCode::invalid_argument, verdict.violation);
  const auto& page = page_of(state);
  SimState next = state;

  switch (action.kind) {
    case ActionKind::go_to: {
      const auto* target = graph_->page_by_url(action.inputs.front());
      if (!target) throw Error(ErrorCode::action_not_applicable, "no page at '" + action.inputs.front() + "'");
      next = navigate(target->page_id);
      return {next, observe(next)};
    }
    case ActionKind::stop:
    case ActionKind::scroll_up:
    case ActionKind::scroll_down:
      return {next, observe(next)};
    default:
      break;
  }

  const auto* e = page.find(*action.element_id);
  if (!e || !is_visible(state, *e))
    throw Error(ErrorCode::element_not_visible, "element '" + *action.element_id + "' is not visible");

  const auto& id = e->element_id;
  switch (action.kind) {
    case ActionKind::click:
      if (e->role == ElementRole::checkbox) {
        if (!next.checked.erase(id)) next.checked.insert(id);
        break;
      }
      switch (e->behavior.kind) {
        case Behavior::Kind::navigate:
          next = navigate(e->behavior.target);
          break;
        case Behavior::Kind::reveal:
          if (!next.expanded.erase(id)) next.expanded.insert(id);
          break;
        case Behavior::Kind::submit:
          if (e->role != ElementRole::textbox) next = submit(state, page, *e);
          break;
        case Behavior::Kind::toggle:
          if (!next.toggled.erase(id)) next.toggled.insert(id);
          break;
        case Behavior::Kind::noop:
          break;
      }
      break;
    case ActionKind::fill:
      if (e->role != ElementRole::textbox) not_applicable(action, *e);
      next.values[id] = action.inputs.front();
      break;
    case ActionKind::press:
      if (e->role != ElementRole::textbox) not_applicable(action, *e);
      if (action.inputs.front() == "Enter" && e->behavior.kind == Behavior::Kind::submit) next = submit(state, page, *e);
      break;
    case ActionKind::select_option:
      if (e->role != ElementRole::select) not_applicable(action, *e);
      next.values[id] = action.inputs.front();
      break;
    case ActionKind::check:
      if (e->role != ElementRole::checkbox) not_applicable(action, *e);
      next.checked.insert(id);
      break;
    case ActionKind::uncheck:
      if (e->role != ElementRole::checkbox) not_applicable(action, *e);
      next.checked.erase(id);
      break;
    default:
      break;
  }
  return {next, observe(next)};
}

}  // namespace webtrail
