#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace webtrail {

enum class PromptId { discover, discover_differential, visual_change, categorize, info_seeking, synthesize_evaluate };

std::string_view to_string(PromptId id);

// Raw template text with {{PLACEHOLDER}} markers.
std::string_view prompt_template(PromptId id);

// Placeholders the template declares, in order of first appearance.
std::vector<std::string> prompt_placeholders(PromptId id);

// Number of screenshots a request for this prompt carries.
int prompt_image_count(PromptId id);

// Substitutes every declared placeholder. Throws invalid_argument when a
// declared placeholder has no value or a value names no placeholder.
std::string render_prompt(PromptId id, const std::map<std::string, std::string>& values);

}  // namespace webtrail
