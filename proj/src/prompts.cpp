#include "webtrail/prompts.hpp"

#include "webtrail/error.hpp"

namespace webtrail {
namespace {

constexpr std::string_view k_discover = R"PROMPT(You are an intelligent agent capable of analyzing web pages and identifying short tasks based on screenshots and UI elements.

You are given:
- A screenshot of a web page with visible HTML elements annotated with red/yellow circles and numbers.
- The simplified HTML of the screenshot, where each HTML element has an "id" attribute that corresponds to the red/yellow circle number in the screenshot.
- A list of already observed short tasks with associated HTML elements.

Your goal is to exhaustively analyze the screenshot and HTML elements to identify all possible short tasks that can be performed on the web page.

Each short task is composed of a title and a sequence of UI actions required to accomplish that task.
Here are the supported UI action types:
- goto: Go to the specified URL. The action has one input which is the URL.
- click: Click on the specified HTML element. The action does not have any input.
- fill: Fill the specified HTML element with text input. The action has one input which is the text to fill.
- press: Press a key on the specified HTML element. The action has one input which is the key to press.
- selectoption: Select an option from a dropdown. The action has one input which is the option to select.
- check: Check a checkbox. The action does not have any input.
- uncheck: Uncheck a checkbox. The action does not have any input.
- stop: Stop the current action. The action does not have any input.

Instructions:
1. Examine every annotated element:
   - For each HTML element with an "id" attribute, determine if it can be used to perform a short task.
   - Include elements that are viewed as pictures or icons.
2. Generate diverse short tasks:
   - Identify as many short tasks as possible as long as they can perform meaningful actions on the web page.
   - First, identify short tasks that cover panel/header/sidebar elements, typically located at the top or left or right side of the screenshot.
   - Second, identify short tasks for expandable UI elements, such as menus, dropdowns, and down-arrow buttons.
   - Finally, identify short tasks for other elements.
   - Include short tasks that involve various actions, such as navigation, clicking, filling forms, selecting options, checking/unchecking boxes, and pressing keys.
3. Respect action order in short tasks:
   - Some short tasks will require multiple actions to be completed in a specific order. As such, these actions should be collapsed into a single short task with an ordered action sequence.
   - Example 1: "Search for an item" short task is completed by (1) filling the search box and (2) pressing ENTER.
   - Example 2: "Create post" short task is completed by (1) filling title, (2) filling content, (3) selecting post category, and (4) clicking the "Create post" button.
   - Some other short tasks will be simple and require only a single action.
   - Two independent actions should not appear in the same short task.
4. Appropriate usage of multiple actions in short tasks:
   - A short task can have multiple actions when they appear as a group in the UI to perform a specific function.
   - When a short task contains one or more fill actions, ensure that the short task ends with a non-fill action (e.g., click, press).
   - A help or tooltip or formatting hint element should not be part of multiple action short tasks.
   - If the same action appears in multiple short tasks, keep the longer short task and remove the shorter one.
   - Make sure that mandatory elements (typically marked with asterisks) are covered by the corresponding short task.
5. Use realistic inputs:
   - Predict meaningful input values based on the context of the screenshot and HTML.
   - For a fill action, provide realistic text input that a user would typically enter in that field.
   - Carefully examine whether an input field can contain space characters, special characters, or only numbers, and provide input accordingly.
6. Set is_allowed appropriately:
   - Use false for short tasks that require login, logout, sign up, account creation/modification, payment, or operate on transient UI elements like ads, pop-ups, or modals.
   - Use false if the short task is already present in the list of observed short tasks.
   - However, account viewing is allowed. Use true for viewing account or profile.
7. Avoid some tasks and actions:
   - Avoid any read text actions.
   - Avoid any short task that operates on date pickers.

You are provided the following information:
- The screenshot of the web page with visible HTML elements annotated with red/yellow circles and numbers. The screenshot is attached with this message.
- The simplified HTML of the screenshot: {{HTML}}
- The list of already observed short tasks with associated HTML elements: {{PAST_ACTION_SEQUENCES}}

Generate the list of short tasks complying the following JSON schema:
{
  "task_list": [
    {
      "title": <title of the task>,
      "is_allowed": <true if the task is allowed, false otherwise>,
      "action_sequence": [
        {
          "element_id": <Id of GUI element>,
          "text": <text of the GUI element>,
          "type": <type of the action: fill, click, goto, stop, ...>,
          "input": [<input value 1>, ...]
        },
        ...
      ]
    },
    ...
  ]
}
)PROMPT";

constexpr std::string_view k_discover_differential = R"PROMPT(You are an intelligent agent capable of analyzing web pages and identifying short tasks based on screenshots and UI elements.

You are given:
- Two screenshots of the web page. The first screenshot is before the action is performed. The second screenshot is after the action is performed that has newly visible HTML elements highlighted with red/yellow circles and numbers.
- The simplified HTML of the second screenshot, where each HTML element has an "id" attribute that corresponds to the red/yellow circle number in the screenshot.

Your goal is to exhaustively analyze the screenshot and HTML elements to identify all possible short tasks from the newly visible part of the second screenshot.

Each short task is composed of a title and a sequence of UI actions required to accomplish that task.
Here are the supported UI action types:
- goto: Go to the specified URL. The action has one input which is the URL.
- click: Click on the specified HTML element. The action does not have any input.
- fill: Fill the specified HTML element with text input. The action has one input which is the text to fill.
- press: Press a key on the specified HTML element. The action has one input which is the key to press.
- selectoption: Select an option from a dropdown. The action has one input which is the option to select.
- check: Check a checkbox. The action does not have any input.
- uncheck: Uncheck a checkbox. The action does not have any input.
- stop: Stop the current action. The action does not have any input.

Instructions:
1. Examine every annotated element from the second screenshot:
   - For each HTML element with an "id" attribute, determine if it can be used to perform a short task.
   - Include elements that are viewed as pictures or icons.
2. Generate diverse short tasks:
   - Identify as many short tasks as possible as long as they can perform meaningful actions on the web page.
   - First, identify short tasks that cover panel/header/sidebar elements, typically located at the top or left or right side of the screenshot.
   - Second, identify short tasks for expandable UI elements, such as menus, dropdowns, and down-arrow buttons.
   - Finally, identify short tasks for other elements.
   - Include short tasks that involve various actions, such as navigation, clicking, filling forms, selecting options, checking/unchecking boxes, and pressing keys.
3. Respect action order in short tasks:
   - Some short tasks will require multiple actions to be completed in a specific order. As such, these actions should be collapsed into a single short task with an ordered action sequence.
   - For example, "Search for an item" short task is completed by (1) filling the search box and (2) pressing ENTER.
   - Some other short tasks will be simple and require only a single action. For example, "Add to cart" short task in a shopping website is performed by one action - (1) click on the button.
   - Two independent actions should not appear in the same short task. For example, clicking on user profile and clicking on notifications are independent actions and should not be part of the same short task.
4. Use realistic inputs:
   - Predict meaningful input values based on the context of the screenshot and HTML.
5. Set is_allowed appropriately:
   - Use false for short tasks that require login, logout, sign up, account creation/modification, payment, or operate on transient UI elements like ads, pop-ups, or modals.
   - However, account viewing is allowed. Use true for viewing account or profile.
6. Avoid some tasks and actions:
   - Avoid any read text actions.
   - Avoid any short task that operates on date pickers.

You are provided the following information:
- Two screenshots of the web page where first one is before the action and the second one is after the action. The screenshots are attached with this message.
- The simplified HTML of the second screenshot: {{HTML}}

Generate the list of short tasks complying the following JSON schema:
{
  "task_list": [
    {
      "title": <title of the task>,
      "is_allowed": <true if the task is allowed, false otherwise>,
      "action_sequence": [
        {
          "element_id": <Id of GUI element>,
          "text": <text of the GUI element>,
          "type": <type of the action: fill, click, goto, stop, ...>,
          "input": [<input value 1>, ...]
        },
        ...
      ]
    },
    ...
  ]
}
)PROMPT";

constexpr std::string_view k_visual_change = R"PROMPT(You are an intelligent agent capable of identifying whether an action on a web page causes a moderate visual change based on screenshots.

You are given two screenshots of a web page. The first one is before an action is performed, and the second one is after the action is performed. Your job is to identify whether the action caused a moderate visual change on the web page.

Your response should comply the following JSON schema:
{
  "reason": <brief explanation of why the page changed moderately>,
  "answer": <true if moderate visual change, false otherwise>
}
)PROMPT";

constexpr std::string_view k_categorize = R"PROMPT(You are an intelligent agent capable of analyzing the HTML and screenshot of a web page to identify and categorize short tasks based on UI elements.

You are given:
- A screenshot of a web page with visible HTML elements annotated with red/yellow circles and numbers.
- The simplified HTML of the screenshot, where each HTML element has an "id" attribute that corresponds to the red/yellow circle number in the screenshot.
- A list of identified short tasks with the annotated UI elements.

Your goal is to analyze the screenshot, HTML elements and short tasks (with annotated UI elements) and then categorize each short task into "fixed" or "dynamic".

You must follow the guidelines below:
1. An element is "fixed" if it has fixed position on the page and provides specific functionality. For example, "search box" at Amazon home page is "fixed".
2. An element is "dynamic" if it does not have a fixed position on the page. Most commonly, "dynamic" elements are list of items, such as product lists and search results, providing similar functionalities. For example, "product list" at Amazon search results page is "dynamic".
3. Assign a group number for each dynamic UI element. If a list of UI elements appear as a group then each UI element in that group should be assigned the same group number. For example, if there are 20 products from a search result in a shopping website, then all those 20 product UI elements should be assigned the same group number.
4. There can be multiple groups of dynamic UI elements on the same page. As such, each group should have a different group number. For example, if there are 20 products from a search result and 10 recommended products on the same page, then the 20 products should be assigned one group number and the 10 recommended products should be assigned another group number.
5. Short tasks in each dynamic group should perform similar actions/functions. Sometimes, there are UI elements that appear closer in a group but perform quite different actions/functions. In such cases, those UI elements should be assigned different group numbers. For example, in a list of product search results, there are links to product details and buttons to add products to cart. In this case, the product detail links and add to cart buttons should be assigned different group numbers even though they appear closer in a group.
6. Usually following UI elements are not dynamic:
   - UI elements located at top or left or right header/panel/sidebar.
   - Expandable UI elements, such as menus, dropdowns, and down-arrow buttons.
   - UI elements appeared as a list of tabs.

You are provided the following information:
- The screenshot of the web page with visible HTML elements annotated with red/yellow circles and numbers. The screenshot is attached with this message.
- The simplified HTML of the screenshot: {{HTML}}
- The list of identified short tasks with annotated HTML elements: {{SHORT_TASKS}}

Generate the list of categorized short tasks complying the following JSON schema:
{
  "task_list": [
    {
      "title": <title of the task>,
      "category": <fixed or dynamic>,
      "group_number": <group number for dynamic tasks only>
    },
    ...
  ]
}
)PROMPT";

constexpr std::string_view k_info_seeking = R"PROMPT(You are an intelligent agent capable of analyzing a web page and identifying information that a user highly like to seek from the web page.

You are given:
- The screenshot of the web page.
- The simplified HTML of the web page: {{HTML}}
- Action history: {{ACTION_HISTORY}}

Your goal is to analyze the screenshot, HTML element, and action history and then identify a list of potential asks that a user highly like to seek from the web page.

You must follow the principles below:
- Generate everything based on the screenshot, HTML element, and action history.
- Generate between 0 and 2 asks that represent natural information seeking behavior of a user.
- Don't generate any ask if a user is unlikely to seek any information from the web page.

Generate the list of asks complying the following JSON schema:
{
  "ask_list": [
    {
      "reason": <reason why the information is useful to seek>,
      "ask": <information-seeking question>
    },
    ...
  ]
}
)PROMPT";

// Synthesis and completeness scoring for complex tasks.
constexpr std::string_view k_synthesize_evaluate = R"PROMPT(You are an intelligent agent that turns a recorded sequence of web page actions into a realistic task a user could ask for, and judges how complete that sequence is for the task.

You are given:
- The screenshot of the web page after the last action. The screenshot is attached with this message.
- The kind of task to produce: {{TASK_KIND}}
- The recorded actions, in order, with the page each one was performed on: {{ACTION_HISTORY}}
- The last short task that was performed: {{LAST_TASK}}

Write one task description that a user would plausibly give, such that the recorded actions accomplish it. For an information-seeking task, phrase it as a question the final page answers. Then score from 1 to 5 how completely and coherently the recorded actions accomplish the description, where 1 means unrelated or broken and 5 means complete with no missing step.

Respond complying the following JSON schema:
{
  "description": <task description>,
  "score": <integer from 1 to 5>
}
)PROMPT";

}  // namespace

std::string_view to_string(PromptId id) {
  switch (id) {
    case PromptId::discover: return "discover";
    case PromptId::discover_differential: return "discover_differential";
    case PromptId::visual_change: return "visual_change";
    case PromptId::categorize: return "categorize";
    case PromptId::info_seeking: return "info_seeking";
    case PromptId::synthesize_evaluate: return "synthesize_evaluate";
  }
  return "discover";
}

std::string_view prompt_template(PromptId id) {
  switch (id) {
    case PromptId::discover: return k_discover;
    case PromptId::discover_differential: return k_discover_differential;
    case PromptId::visual_change: return k_visual_change;
    case PromptId::categorize: return k_categorize;
    case PromptId::info_seeking: return k_info_seeking;
    case PromptId::synthesize_evaluate: return k_synthesize_evaluate;
  }
  return k_discover;
}

std::vector<std::string> prompt_placeholders(PromptId id) {
  std::vector<std::string> names;
  const std::string_view text = prompt_template(id);
  std::size_t pos = 0;
  while ((pos = text.find("{{", pos)) != std::string_view::npos) {
    const auto end = text.find("}}", pos);
    if (end == std::string_view::npos) break;
    std::string name(text.substr(pos + 2, end - pos - 2));
    bool seen = false;
    for (const auto& n : names) seen = seen || n == name;
    if (!seen) names.push_back(std::move(name));
    pos = end + 2;
  }
  return names;
}

int prompt_image_count(PromptId id) {
  return id == PromptId::visual_change || id == PromptId::discover_differential ? 2 : 1;
}

std::string render_prompt(PromptId id, const std::map<std::string, std::string>& values) {
  const auto names = prompt_placeholders(id);
  for (const auto& [key, value] : values) {
    bool declared = false;
    for (const auto& n : names) declared = declared || n == key;
    if (!declared)
      throw Error(ErrorCode::invalid_argument, "prompt " + std::string(to_string(id)) + " has no placeholder " + key);
  }
  std::string out;
  const std::string_view text = prompt_template(id);
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto open = text.find("{{", pos);
    if (open == std::string_view::npos) {
      out.append(text.substr(pos));
      break;
    }
    const auto close = text.find("}}", open);
    out.append(text.substr(pos, open - pos));
    const std::string name(text.substr(open + 2, close - open - 2));
    auto it = values.find(name);
    if (it == values.end())
      throw Error(ErrorCode::invalid_argument, "prompt " + std::string(to_string(id)) + " needs a value for " + name);
    out += it->second;
    pos = close + 2;
  }
  return out;
}

}  // namespace webtrail
