#include <gtest/gtest.h>

#include "support/codes.hpp"
#include "support/test_paths.hpp"
#include "webtrail/prompts.hpp"

namespace webtrail {
namespace {

using testing::error_of;
using testing::golden;
using testing::read_file;

struct GoldenCase {
  PromptId id;
  const char* file;
  std::vector<std::string> placeholders;
  int images;
};

class PromptGolden : public ::testing::TestWithParam<GoldenCase> {};

TEST_P(PromptGolden, TemplateMatchesByteForByte) {
  const auto& c = GetParam();
  EXPECT_EQ(std::string(prompt_template(c.id)), read_file(golden(std::string("prompts/") + c.file)));
}

TEST_P(PromptGolden, DeclaredPlaceholdersAndImages) {
  const auto& c = GetParam();
  EXPECT_EQ(prompt_placeholders(c.id), c.placeholders);
  EXPECT_EQ(prompt_image_count(c.id), c.images);
}

TEST_P(PromptGolden, RenderSubstitutesEveryPlaceholder) {
  const auto& c = GetParam();
  std::map<std::string, std::string> values;
  for (const auto& p : c.placeholders) values[p] = "<<" + p + " value>>";
  const std::string out = render_prompt(c.id, values);
  EXPECT_EQ(out.find("{{"), std::string::npos);
  for (const auto& p : c.placeholders) EXPECT_NE(out.find("<<" + p + " value>>"), std::string::npos) << p;

  // Rendering is a pure substitution: swapping values back restores the template.
  std::string restored = out;
  for (const auto& p : c.placeholders) {
    const std::string v = "<<" + p + " value>>";
    for (auto pos = restored.find(v); pos != std::string::npos; pos = restored.find(v))
      restored.replace(pos, v.size(), "{{" + p + "}}");
  }
  EXPECT_EQ(restored, std::string(prompt_template(c.id)));
}

INSTANTIATE_TEST_SUITE_P(
    Templates, PromptGolden,
    ::testing::Values(GoldenCase{PromptId::discover, "discover.txt", {"HTML", "PAST_ACTION_SEQUENCES"}, 1},
                      GoldenCase{PromptId::discover_differential, "discover_differential.txt", {"HTML"}, 2},
                      GoldenCase{PromptId::visual_change, "visual_change.txt", {}, 2},
                      GoldenCase{PromptId::categorize, "categorize.txt", {"HTML", "SHORT_TASKS"}, 1},
                      GoldenCase{PromptId::info_seeking, "info_seeking.txt", {"HTML", "ACTION_HISTORY"}, 1}),
    [](const auto& info) { return std::string(to_string(info.param.id)); });

TEST(RenderPrompt, MissingValueIsRejected) {
  EXPECT_EQ(error_of([] { render_prompt(PromptId::discover, {{"HTML", "<a/>"}}); }), ErrorCode::invalid_argument);
}

TEST(RenderPrompt, UnknownKeyIsRejected) {
  EXPECT_EQ(error_of([] { render_prompt(PromptId::visual_change, {{"HTML", "<a/>"}}); }),
            ErrorCode::invalid_argument);
}

TEST(RenderPrompt, ValuesAreNotReexpanded) {
  const std::string out =
      render_prompt(PromptId::discover_differential, {{"HTML", "literal {{HTML}} inside"}});
  EXPECT_NE(out.find("literal {{HTML}} inside"), std::string::npos);
}

TEST(RenderPrompt, SynthesisTemplateHasItsOwnPlaceholders) {
  const auto names = prompt_placeholders(PromptId::synthesize_evaluate);
  EXPECT_FALSE(names.empty());
  std::map<std::string, std::string> values;
  for (const auto& n : names) values[n] = "x";
  EXPECT_EQ(render_prompt(PromptId::synthesize_evaluate, values).find("{{"), std::string::npos);
}

}  // namespace
}  // namespace webtrail
