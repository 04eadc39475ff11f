#pragma once

#include <cstddef>
#include <string>

#include "lateralbench/dataset.hpp"

namespace lateral::llm {

// The zero-shot prompt. The default keeps the evaluated protocol's exact
// wording, including the "liste of choices :" spelling; header overrides are
// possible but change the measured protocol.
struct PromptTemplate {
  std::string choices_header = "liste of choices :";

  // Renders: question, blank line, choices header, one "N- text." line per
  // choice (N from 1), blank line, the JSON-format footer. Pure function of
  // the instance.
  std::string render(const PuzzleInstance& instance) const;
};

std::string build_prompt(const PuzzleInstance& instance);

enum class ParseStatus {
  ok,
  no_json_found,   // no JSON object anywhere in the reply
  missing_key,     // object(s) found, none carries "answer"
  not_an_integer,  // "answer" present but not an integer or integer string
  out_of_range,    // integer outside 1..n_choices
};

std::string_view parse_status_name(ParseStatus status);

struct AnswerParse {
  ParseStatus status = ParseStatus::no_json_found;
  int choice_index = -1;      // 0-based, valid when status == ok
  size_t span_begin = 0;      // byte range of the matched JSON object in raw
  size_t span_end = 0;
  std::string detail;         // offending value / context for diagnostics
};

// Locates the first JSON object in `raw` containing the key "answer",
// tolerating surrounding prose and markdown fences. Accepts an integer or a
// numeric string, 1-based, and converts to a 0-based index. Statuses are
// distinguishable so the retry policy can react per failure kind.
AnswerParse parse_answer(const std::string& raw, int n_choices);

}  // namespace lateral::llm
