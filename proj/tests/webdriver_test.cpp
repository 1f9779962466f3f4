#include <gtest/gtest.h>

#include <algorithm>

#include "support/codes.hpp"
#include "support/fake_servers.hpp"
#include "support/test_paths.hpp"
#include "webtrail/explorer.hpp"
#include "webtrail/scripted_oracle.hpp"
#include "webtrail/sim_env.hpp"
#include "webtrail/webdriver_env.hpp"

namespace webtrail {
namespace {

using testing::error_of;
using testing::FakeWebDriver;
using testing::fixture;
using testing::TempDir;

class WebDriverTest : public ::testing::Test {
 protected:
  std::shared_ptr<const SiteGraph> graph =
      std::make_shared<const SiteGraph>(load_sitegraph_file(fixture("forum-mini.json")));
  Simulator sim{graph};
  FakeWebDriver driver{graph};
  TempDir dir;
  std::shared_ptr<ScreenshotStore> store = std::make_shared<ScreenshotStore>(dir.path());

  WebDriverEnvironment make_env() {
    WebDriverConfig cfg;
    cfg.endpoint = driver.base_url();
    cfg.seed_url = "sim://forum-mini/home";
    cfg.timeout = std::chrono::seconds(5);
    return WebDriverEnvironment(cfg, store);
  }

  SimState on(const std::string& page) const {
    SimState s;
    s.page_id = page;
    return s;
  }
};

TEST_F(WebDriverTest, ResetAnnotatesTheSeedPage) {
  auto env = make_env();
  SessionGuard s(env, env.reset());
  const Observation o = env.observe(*s);
  const Observation expected = sim.observe(sim.initial_state());
  EXPECT_EQ(o.page_id, expected.page_id);
  EXPECT_EQ(o.elements, expected.elements);
  EXPECT_EQ(o.simplified_html, expected.simplified_html);
  EXPECT_TRUE(store->contains(o.screenshot));
  EXPECT_EQ(env.backend_name(), "live");

  const auto cmds = driver.commands();
  EXPECT_EQ(cmds.front(), "POST /session");
  EXPECT_NE(std::find(cmds.begin(), cmds.end(), "DELETE /session/wd-1/cookie"), cmds.end());
  EXPECT_NE(std::find(cmds.begin(), cmds.end(), "POST /session/wd-1/url"), cmds.end());
}

TEST_F(WebDriverTest, ActionsMatchTheSimulator) {
  auto env = make_env();
  SessionGuard s(env, env.reset());
  const Observation menu = env.execute(*s, Action::click("profile"));
  EXPECT_EQ(menu.page_id, sim.observe(sim.initial_state()).page_id);  // same document
  EXPECT_EQ(menu.elements.size(), 8u);

  const Observation forums = env.execute(*s, Action::click("nav-forums"));
  EXPECT_EQ(forums.page_id, sim.identity_of(*graph->page("forums")));

  env.restart(*s);
  env.execute(*s, Action::fill("search", "laptops"));
  const Observation forum = env.execute(*s, Action::press("search", "Enter"));
  EXPECT_EQ(forum.page_id, sim.identity_of(*graph->page("forum")));
  EXPECT_EQ(s->page_id, forum.page_id);
}

TEST_F(WebDriverTest, CheckConsultsSelectedState) {
  auto env = make_env();
  SessionGuard s(env, env.reset());
  env.execute(*s, Action::check("dark-mode"));
  env.execute(*s, Action::check("dark-mode"));  // already checked: no click
  auto cmds = driver.commands();
  const auto clicks = std::count(cmds.begin(), cmds.end(), "POST /session/wd-1/element/dark-mode/click");
  EXPECT_EQ(clicks, 1);
  env.execute(*s, Action::uncheck("dark-mode"));
  cmds = driver.commands();
  EXPECT_EQ(std::count(cmds.begin(), cmds.end(), "POST /session/wd-1/element/dark-mode/click"), 2);
}

TEST_F(WebDriverTest, ErrorMapping) {
  auto env = make_env();
  SessionHandle s = env.reset();
  EXPECT_EQ(error_of([&] { env.execute(s, Action::click("absent")); }), ErrorCode::element_not_found);
  EXPECT_EQ(error_of([&] { env.execute(s, Action{ActionKind::fill, "search", {}}); }), ErrorCode::invalid_argument);
  driver.expire_sessions();
  EXPECT_EQ(error_of([&] { env.execute(s, Action::click("nav-home")); }), ErrorCode::session_closed);
}

TEST_F(WebDriverTest, CloseDeletesTheSession) {
  auto env = make_env();
  SessionHandle s = env.reset();
  EXPECT_EQ(driver.open_sessions(), 1u);
  env.close(s);
  EXPECT_EQ(driver.open_sessions(), 0u);
}

TEST(WebDriverUnreachable, ResetFails) {
  std::string url;
  {
    auto graph = std::make_shared<const SiteGraph>(load_sitegraph_file(fixture("forum-mini.json")));
    FakeWebDriver gone(graph);
    url = gone.base_url();
  }
  WebDriverConfig cfg;
  cfg.endpoint = url;
  cfg.seed_url = "sim://forum-mini/home";
  cfg.timeout = std::chrono::seconds(2);
  cfg.retries = 0;
  WebDriverEnvironment env(cfg, nullptr);
  EXPECT_EQ(error_of([&] { env.reset(); }), ErrorCode::environment_unreachable);
}

TEST(WebDriverScript, CarriesMarker) {
  EXPECT_EQ(WebDriverEnvironment::annotate_script().rfind(WebDriverEnvironment::kAnnotateMarker, 0), 0u);
}

TEST_F(WebDriverTest, ExplorationMatchesSimBackend) {
  ExplorerConfig cfg;
  cfg.budget = 100;

  auto live = make_env();
  ScriptedOracle oracle_a(graph);
  const ExplorationState via_live = Explorer(live, oracle_a, cfg).explore();

  SimEnvironment simenv(graph);
  ScriptedOracle oracle_b(graph);
  const ExplorationState via_sim = Explorer(simenv, oracle_b, cfg).explore();

  EXPECT_EQ(via_live.explored, via_sim.explored);
  ASSERT_EQ(via_live.tuples.size(), via_sim.tuples.size());
  for (std::size_t i = 0; i < via_sim.tuples.size(); ++i) {
    EXPECT_EQ(via_live.tuples[i].description, via_sim.tuples[i].description);
    EXPECT_EQ(via_live.tuples[i].trajectory.actions(), via_sim.tuples[i].trajectory.actions());
  }
  EXPECT_EQ(driver.open_sessions(), 0u);
}

}  // namespace
}  // namespace webtrail
