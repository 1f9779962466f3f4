#pragma once

#include <compare>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "webtrail/core.hpp"
#include "webtrail/sitegraph.hpp"

namespace webtrail {

struct SimState {
  std::string page_id;
  std::set<std::string> expanded;             // reveal toggles currently open
  std::map<std::string, std::string> values;  // textbox / select values
  std::set<std::string> checked;              // checkboxes
  std::set<std::string> toggled;              // non-checkbox toggle elements

  auto operator<=>(const SimState&) const = default;
  bool operator==(const SimState&) const = default;
};

struct SimStep {
  SimState state;
  Observation observation;
};

// Pure transition function over a SiteGraph. Holds no mutable state.
class Simulator {
 public:
  explicit Simulator(std::shared_ptr<const SiteGraph> graph);

  const SiteGraph& graph() const { return *graph_; }
  std::shared_ptr<const SiteGraph> graph_ptr() const { return graph_; }

  SimState initial_state() const;

  // Throws element_not_visible, submit_missing_required,
  // action_not_applicable or invalid_argument.
  SimStep step(const SimState& state, const Action& action) const;

  Observation observe(const SimState& state) const;

  bool is_visible(const SimState& state, const ElementDef& element) const;
  std::vector<const ElementDef*> visible_elements(const SimState& state) const;

  // Identity token of a page as it loads (no reveals, no field state).
  std::string identity_of(const PageDef& page) const;

  // Maps an identity token back to the page definition; null if unknown.
  const PageDef* page_for_identity(std::string_view identity) const;

  // Rendering input the screenshot is derived from; also the source of the
  // image handle.
  static std::string screenshot_handle(const Observation& observation);

 private:
  const PageDef& page_of(const SimState& state) const;
  SimState navigate(const std::string& page_id) const;
  SimState submit(const SimState& state, const PageDef& page, const ElementDef& element) const;

  std::shared_ptr<const SiteGraph> graph_;
  std::map<std::string, std::string> identities_;
};

}  // namespace webtrail
