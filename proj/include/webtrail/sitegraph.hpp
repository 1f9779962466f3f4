#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "webtrail/core.hpp"

namespace webtrail {

enum class ExcludedClass { auth, payment, account_mod, transient, tooltip };

std::string_view to_string(ExcludedClass excluded);

struct Behavior {
  enum class Kind { navigate, reveal, submit, toggle, noop };

  Kind kind = Kind::noop;
  std::string target;             // navigate, submit
  std::vector<std::string> ids;   // revealed ids for reveal, required ids for submit

  bool operator==(const Behavior&) const = default;
};

struct ElementDef {
  std::string element_id;
  std::string text;
  ElementRole role = ElementRole::other;
  std::optional<std::string> revealed_by;
  Behavior behavior;
  std::optional<std::string> dynamic_group;
  std::optional<ExcludedClass> excluded_class;
  std::optional<std::string> info_payload;
};

struct PageDef {
  std::string page_id;
  std::string url;
  std::vector<ElementDef> elements;

  const ElementDef* find(std::string_view element_id) const;
};

struct SiteGraph {
  std::string site;
  std::string seed_page_id;
  int dynamic_item_count = 3;
  std::vector<PageDef> pages;

  const PageDef* page(std::string_view page_id) const;
  const PageDef* page_by_url(std::string_view url) const;
  const PageDef& seed() const;
};

// Parses and validates a site document. Elements tagged with a dynamic_group
// are templates: each is materialized into `dynamic_item_count` items with ids
// "<id>-<i>" and labels "<text> <i>" (i from 1).
// Throws parse_error, dangling_target or reveal_cycle.
SiteGraph load_sitegraph(std::string_view document, std::optional<int> dynamic_item_count = std::nullopt);

// Missing or unreadable files raise environment_unreachable.
SiteGraph load_sitegraph_file(const std::filesystem::path& path,
                              std::optional<int> dynamic_item_count = std::nullopt);

// Chain of reveal toggles that must be clicked, outermost first, before
// `element` is visible.
std::vector<const ElementDef*> reveal_chain(const PageDef& page, const ElementDef& element);

// Shortest navigation distance of every page from the seed, counting only
// navigate and submit edges. Unreachable pages are absent.
std::map<std::string, int> page_depths(const SiteGraph& graph);

struct LeafTask {
  std::string page_id;
  std::string element_id;
  std::vector<Action> actions;  // full action sequence incl. the reveal prefix
  std::string key;              // structural key
};

struct DynamicGroupTruth {
  std::string page_id;
  std::string group;
  std::vector<std::string> member_keys;
};

struct GroundTruth {
  std::vector<LeafTask> fixed;           // sorted by key, deduplicated across pages
  std::vector<DynamicGroupTruth> dynamic;  // sorted by (page, group)

  std::size_t signature_count() const { return fixed.size() + dynamic.size(); }
};

// Every non-excluded leaf functionality: each navigate, submit or toggle
// element reachable through its reveal chain. A leaf repeated on several
// pages (same structural key) is attributed to the shallowest page.
GroundTruth ground_truth_leaf_tasks(const SiteGraph& graph);

// Canonical action sequence that exercises `element` on its page, without
// the reveal prefix. Empty for reveal and noop elements.
std::vector<Action> leaf_actions(const PageDef& page, const ElementDef& element);

}  // namespace webtrail
