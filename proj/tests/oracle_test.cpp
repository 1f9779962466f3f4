#include <gtest/gtest.h>

#include <algorithm>

#include "support/codes.hpp"
#include "support/test_paths.hpp"
#include "webtrail/scripted_oracle.hpp"
#include "webtrail/signature.hpp"
#include "webtrail/simulator.hpp"

namespace webtrail {
namespace {

using testing::error_of;
using testing::fixture;

std::shared_ptr<const SiteGraph> forum_mini() {
  return std::make_shared<const SiteGraph>(load_sitegraph_file(fixture("forum-mini.json")));
}

// Observation, state and trajectory reached by running `actions` from the seed.
struct Walk {
  SimState state;
  Trajectory trajectory;
};

Walk walk(const Simulator& sim, const std::vector<Action>& actions) {
  Walk w{sim.initial_state(), {}};
  Observation current = sim.observe(w.state);
  for (const auto& a : actions) {
    auto next = sim.step(w.state, a);
    w.trajectory.steps.push_back({current, a, ""});
    w.state = next.state;
    current = next.observation;
  }
  w.trajectory.final_observation = current;
  return w;
}

const SimpleTask* titled(const std::vector<SimpleTask>& tasks, const std::string& title) {
  auto it = std::find_if(tasks.begin(), tasks.end(), [&](const auto& t) { return t.title == title; });
  return it == tasks.end() ? nullptr : &*it;
}

class ScriptedOracleTest : public ::testing::Test {
 protected:
  std::shared_ptr<const SiteGraph> graph = forum_mini();
  Simulator sim{graph};
  ScriptedOracle oracle{graph};

  Observation at(const std::vector<Action>& actions) { return walk(sim, actions).trajectory.final_observation; }
};

TEST_F(ScriptedOracleTest, DiscoverOnHome) {
  const auto tasks = oracle.discover_simple_tasks(at({}), {});
  ASSERT_EQ(tasks.size(), 6u);
  const auto* expand = titled(tasks, "Expand MarvelsGrantMan136 menu");
  ASSERT_NE(expand, nullptr);
  EXPECT_EQ(expand->action_sequence, std::vector<Action>{Action::click("profile")});

  const auto search = std::find_if(tasks.begin(), tasks.end(), [](const auto& t) {
    return t.action_sequence.size() == 2 && t.action_sequence[0].kind == ActionKind::fill;
  });
  ASSERT_NE(search, tasks.end());
  EXPECT_EQ(search->action_sequence[0].element_id, "search");
  EXPECT_EQ(search->action_sequence[1].kind, ActionKind::press);

  std::size_t disallowed = 0;
  for (const auto& t : tasks) {
    EXPECT_FALSE(validate_simple_task(t).has_value()) << t.title;
    EXPECT_EQ(t.origin_page, at({}).page_id);
    EXPECT_EQ(t.category, TaskCategory::unclassified);
    if (!t.is_allowed) {
      ++disallowed;
      EXPECT_EQ(t.action_sequence, std::vector<Action>{Action::click("login")});
    }
  }
  EXPECT_EQ(disallowed, 1u);
}

TEST_F(ScriptedOracleTest, AlreadyObservedTasksAreDisallowed) {
  const Observation home = at({});
  const auto first = oracle.discover_simple_tasks(home, {});
  const auto again = oracle.discover_simple_tasks(home, first);
  ASSERT_EQ(again.size(), first.size());
  for (const auto& t : again) EXPECT_FALSE(t.is_allowed) << t.title;
}

TEST_F(ScriptedOracleTest, LoginOnlyPage) {
  auto graph2 = std::make_shared<const SiteGraph>(load_sitegraph(R"({
    "site": "gate", "seed_page_id": "gate",
    "pages": [{"page_id": "gate", "elements": [
      {"element_id": "login", "text": "Log in", "role": "button", "behavior": "noop", "excluded_class": "auth"}]}]
  })"));
  ScriptedOracle o2(graph2);
  const auto tasks = o2.discover_simple_tasks(Simulator(graph2).observe(Simulator(graph2).initial_state()), {});
  ASSERT_EQ(tasks.size(), 1u);
  EXPECT_FALSE(tasks[0].is_allowed);
}

TEST_F(ScriptedOracleTest, EmptyPageYieldsNothing) {
  const Observation created = at({Action::click("nav-forums"), Action::click("create-forum"),
                                  Action::fill("name", "n"), Action::fill("description", "d"),
                                  Action::click("create")});
  ASSERT_TRUE(created.elements.empty());
  EXPECT_TRUE(oracle.discover_simple_tasks(created, {}).empty());
}

TEST_F(ScriptedOracleTest, DifferentialAfterExpansion) {
  const Observation before = at({});
  const Observation after = at({Action::click("profile")});
  const auto tasks = oracle.discover_differential_tasks(before, after);
  ASSERT_EQ(tasks.size(), 2u);
  std::vector<std::string> ids;
  for (const auto& t : tasks) {
    for (const auto& a : t.action_sequence) {
      ASSERT_TRUE(a.element_id);
      EXPECT_TRUE(is_new_element(*after.find(*a.element_id), before));
      ids.push_back(*a.element_id);
    }
  }
  std::sort(ids.begin(), ids.end());
  EXPECT_EQ(ids, (std::vector<std::string>{"profile-link", "settings-link"}));
}

TEST_F(ScriptedOracleTest, DifferentialAcrossPagesIsRejected) {
  EXPECT_EQ(error_of([&] { oracle.discover_differential_tasks(at({}), at({Action::click("nav-forums")})); }),
            ErrorCode::invalid_argument);
}

TEST_F(ScriptedOracleTest, VisualChange) {
  const Observation home = at({});
  EXPECT_TRUE(oracle.is_moderate_visual_change(home, at({Action::click("profile")})).answer);
  const auto same = oracle.is_moderate_visual_change(home, at({Action::check("dark-mode")}));
  EXPECT_FALSE(same.answer);
  EXPECT_FALSE(same.reason.empty());
}

TEST_F(ScriptedOracleTest, CategorizeForumLinks) {
  const Observation forums = at({Action::click("nav-forums")});
  const auto tasks = oracle.categorize_tasks(forums, oracle.discover_simple_tasks(forums, {}));
  std::size_t dynamic = 0;
  for (const auto& t : tasks) {
    ASSERT_NE(t.category, TaskCategory::unclassified);
    const bool is_forum_link = t.action_sequence.back().element_id->starts_with("forum-link-");
    EXPECT_EQ(t.category == TaskCategory::dynamic, is_forum_link) << t.title;
    if (t.category == TaskCategory::dynamic) {
      ++dynamic;
      EXPECT_EQ(t.group_number, 1);
    } else {
      EXPECT_FALSE(t.group_number);
    }
  }
  EXPECT_EQ(dynamic, 3u);
}

TEST_F(ScriptedOracleTest, CategorizeInterleavedGroups) {
  auto g = std::make_shared<const SiteGraph>(load_sitegraph(R"({
    "site": "shop", "seed_page_id": "list", "dynamic_item_count": 2,
    "pages": [
      {"page_id": "list", "elements": [
        {"element_id": "item", "text": "Item", "role": "link", "behavior": {"navigate": "detail"}, "dynamic_group": "items"},
        {"element_id": "about", "text": "About", "role": "link", "behavior": {"navigate": "detail"}},
        {"element_id": "tag", "text": "Tag", "role": "link", "behavior": {"navigate": "detail"}, "dynamic_group": "tags"}]},
      {"page_id": "detail", "elements": []}]
  })"));
  ScriptedOracle o(g);
  Simulator s(g);
  const Observation list = s.observe(s.initial_state());
  const auto tasks = o.categorize_tasks(list, o.discover_simple_tasks(list, {}));
  ASSERT_EQ(tasks.size(), 5u);
  std::map<std::string, std::optional<int>> groups;
  for (const auto& t : tasks) groups[*t.action_sequence.back().element_id] = t.group_number;
  EXPECT_EQ(groups["item-1"], 1);
  EXPECT_EQ(groups["item-2"], 1);
  EXPECT_EQ(groups["tag-1"], 2);
  EXPECT_EQ(groups["tag-2"], 2);
  EXPECT_EQ(groups["about"], std::nullopt);
}

TEST_F(ScriptedOracleTest, InfoSeekingAsks) {
  const std::vector<Action> path = {Action::fill("search", "x"), Action::press("search", "Enter")};
  const auto on_forum = oracle.propose_info_seeking(at(path), path);
  ASSERT_EQ(on_forum.size(), 1u);
  EXPECT_TRUE(on_forum[0].info_seeking);
  EXPECT_TRUE(on_forum[0].action_sequence.empty());
  EXPECT_FALSE(validate_simple_task(on_forum[0]).has_value());

  EXPECT_TRUE(oracle.propose_info_seeking(at({}), {}).empty());
}

TEST_F(ScriptedOracleTest, InfoSeekingIsCapped) {
  auto g = std::make_shared<const SiteGraph>(load_sitegraph(R"({
    "site": "wiki", "seed_page_id": "p",
    "pages": [{"page_id": "p", "elements": [
      {"element_id": "a", "text": "A", "role": "link", "behavior": "noop", "info_payload": "alpha"},
      {"element_id": "b", "text": "B", "role": "link", "behavior": "noop", "info_payload": "beta"},
      {"element_id": "c", "text": "C", "role": "link", "behavior": "noop", "info_payload": "gamma"}]}]
  })"));
  ScriptedOracle o(g);
  Simulator s(g);
  EXPECT_EQ(o.propose_info_seeking(s.observe(s.initial_state()), {}).size(),
            static_cast<std::size_t>(Oracle::kMaxInfoAsks));
}

class SynthesisTest : public ScriptedOracleTest {
 protected:
  SynthesisInput create_forum() {
    const auto* page = graph->page("create-forum");
    const auto submit = leaf_actions(*page, *page->find("create"));
    std::vector<Action> path = {Action::click("nav-forums"), Action::click("create-forum")};
    path.insert(path.end(), submit.begin(), submit.end());
    SynthesisInput in;
    in.kind = TupleKind::action_oriented;
    in.trajectory = walk(sim, path).trajectory;
    in.last.title = "Submit the create forum form";
    in.last.action_sequence = submit;
    return in;
  }
};

TEST_F(SynthesisTest, CreateForumIsAccepted) {
  const auto in = create_forum();
  ASSERT_EQ(in.trajectory.size(), 5u);
  const auto result = oracle.synthesize_and_evaluate(in);
  ASSERT_EQ(result.status, SynthesisStatus::accepted);
  ASSERT_TRUE(result.tuple);
  EXPECT_TRUE(result.tuple->description.starts_with("Create a new forum"));
  EXPECT_NE(result.tuple->description.find("forum name"), std::string::npos);
  EXPECT_GE(result.tuple->completeness_score, kMinRetainedScore);
  EXPECT_EQ(result.tuple->trajectory, in.trajectory);
  EXPECT_FALSE(result.tuple->refined);
  EXPECT_FALSE(validate_task_tuple(*result.tuple).has_value());
}

TEST_F(SynthesisTest, ShortActionTraceIsRejectedBeforeAsking) {
  SynthesisInput in;
  in.kind = TupleKind::action_oriented;
  in.trajectory = walk(sim, {Action::click("nav-forums"), Action::click("create-forum")}).trajectory;
  in.last.title = "Navigate to Create forum";
  in.last.action_sequence = {Action::click("create-forum")};
  const auto result = oracle.synthesize_and_evaluate(in);
  EXPECT_EQ(result.status, SynthesisStatus::precondition_rejected);
  EXPECT_FALSE(result.tuple);
}

TEST_F(SynthesisTest, InfoSeekingNeedsNoMinimumLength) {
  SynthesisInput in;
  in.kind = TupleKind::info_seeking;
  in.trajectory = walk(sim, {Action::click("nav-forums")}).trajectory;
  in.last.title = "What does the \"About these forums\" section say?";
  in.last.info_seeking = true;
  const auto result = oracle.synthesize_and_evaluate(in);
  ASSERT_EQ(result.status, SynthesisStatus::accepted);
  EXPECT_EQ(result.tuple->kind, TupleKind::info_seeking);
}

TEST_F(SynthesisTest, IncoherentTraceScoresLow) {
  auto in = create_forum();
  // The first recorded action names an element its observation lacks.
  in.trajectory.steps[0].action = Action::click("create");
  const auto result = oracle.synthesize_and_evaluate(in);
  EXPECT_EQ(result.status, SynthesisStatus::low_score);
  EXPECT_FALSE(result.tuple);
  EXPECT_LT(ScriptedOracle::kIncoherentScore, kMinRetainedScore);
}

}  // namespace
}  // namespace webtrail
