#include "lateralbench/llm/prompt.hpp"

#include <cctype>

#include <nlohmann/json.hpp>

namespace lateral::llm {

std::string PromptTemplate::render(const PuzzleInstance& instance) const {
  std::string out = instance.question;
  out += "\n\n";
  out += choices_header;
  out += "\n";
  for (size_t i = 0; i < instance.choices.size(); ++i) {
    out += std::to_string(i + 1);  // the protocol numbers choices from 1
    out += "- ";
    out += instance.choices[i];
    out += ".\n";
  }
  out += "\nResponse should be in json format :\n";
  out += "{ \"answer\": Number of the choice }\n";
  return out;
}

std::string build_prompt(const PuzzleInstance& instance) {
  return PromptTemplate{}.render(instance);
}

std::string_view parse_status_name(ParseStatus status) {
  switch (status) {
    case ParseStatus::ok: return "ok";
    case ParseStatus::no_json_found: return "NoJsonFound";
    case ParseStatus::missing_key: return "MissingKey";
    case ParseStatus::not_an_integer: return "NotAnInteger";
    case ParseStatus::out_of_range: return "OutOfRange";
  }
  return "?";
}

namespace {

// Returns one past the closing brace of the JSON object starting at `begin`
// (raw[begin] == '{'), or npos when unbalanced. String-aware, so braces in
// quoted text do not confuse the depth count.
size_t find_object_end(const std::string& raw, size_t begin) {
  int depth = 0;
  bool in_string = false;
  for (size_t i = begin; i < raw.size(); ++i) {
    const char c = raw[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
    } else if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::string::npos;
}

bool integer_from_value(const nlohmann::json& value, long long& out) {
  if (value.is_number_integer()) {
    out = value.get<long long>();
    return true;
  }
  if (value.is_string()) {
    const std::string& s = value.get_ref<const std::string&>();
    size_t i = 0;
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    size_t j = s.size();
    while (j > i && std::isspace(static_cast<unsigned char>(s[j - 1]))) --j;
    if (i >= j) return false;
    size_t k = i;
    if (s[k] == '+' || s[k] == '-') ++k;
    if (k >= j) return false;
    for (size_t p = k; p < j; ++p) {
      if (!std::isdigit(static_cast<unsigned char>(s[p]))) return false;
    }
    try {
      out = std::stoll(s.substr(i, j - i));
    } catch (const std::exception&) {
      return false;
    }
    return true;
  }
  return false;
}

}  // namespace

AnswerParse parse_answer(const std::string& raw, int n_choices) {
  AnswerParse result;
  bool saw_object = false;

  for (size_t pos = raw.find('{'); pos != std::string::npos;
       pos = raw.find('{', pos + 1)) {
    const size_t end = find_object_end(raw, pos);
    if (end == std::string::npos) continue;
    const auto candidate =
        nlohmann::json::parse(raw.begin() + static_cast<ptrdiff_t>(pos),
                              raw.begin() + static_cast<ptrdiff_t>(end),
                              nullptr, /*allow_exceptions=*/false);
    if (candidate.is_discarded() || !candidate.is_object()) continue;
    saw_object = true;
    if (!candidate.contains("answer")) continue;

    result.span_begin = pos;
    result.span_end = end;
    long long value = 0;
    if (!integer_from_value(candidate.at("answer"), value)) {
      result.status = ParseStatus::not_an_integer;
      result.detail = candidate.at("answer").dump();
      return result;
    }
    if (value < 1 || value > n_choices) {
      result.status = ParseStatus::out_of_range;
      result.detail = std::to_string(value);
      return result;
    }
    result.status = ParseStatus::ok;
    result.choice_index = static_cast<int>(value - 1);  // 1-based on the wire
    return result;
  }

  result.status =
      saw_object ? ParseStatus::missing_key : ParseStatus::no_json_found;
  return result;
}

}  // namespace lateral::llm
