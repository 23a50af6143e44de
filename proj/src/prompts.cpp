#include "episodic/prompts.hpp"

#include <fstream>
#include <sstream>

#include "episodic/error.hpp"

namespace episodic {

PromptTemplate PromptTemplate::parse(std::string_view file_text) {
  constexpr std::string_view kSeparator = "\n---\n";
  const auto at = file_text.find(kSeparator);
  if (at == std::string_view::npos) {
    throw Error(ErrorCode::kSchemaViolation, "prompt template lacks the \"---\" line between system and user parts");
  }
  PromptTemplate t;
  t.system = std::string(file_text.substr(0, at));
  t.user = std::string(file_text.substr(at + kSeparator.size()));
  while (!t.user.empty() && (t.user.back() == '\n' || t.user.back() == '\r')) t.user.pop_back();
  return t;
}

std::string render(std::string_view text, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto open = text.find("{{", pos);
    if (open == std::string_view::npos) {
      out.append(text.substr(pos));
      break;
    }
    const auto close = text.find("}}", open + 2);
    if (close == std::string_view::npos) {
      out.append(text.substr(pos));
      break;
    }
    out.append(text.substr(pos, open - pos));
    const std::string name(text.substr(open + 2, close - open - 2));
    auto it = values.find(name);
    if (it == values.end()) {
      throw Error(ErrorCode::kInvalidArgument, "no value for prompt placeholder {{" + name + "}}", {{"placeholder", name}});
    }
    out.append(it->second);
    pos = close + 2;
  }
  return out;
}

namespace {

PromptTemplate builtin_template(std::string_view file) {
  const auto text = detail::embedded_asset(file);
  if (text.empty()) throw Error(ErrorCode::kIoFailure, "missing built-in prompt " + std::string(file));
  return PromptTemplate::parse(text);
}

PromptTemplate load_or_builtin(const std::filesystem::path& directory, std::string_view file) {
  std::ifstream in(directory / file);
  if (!in) return builtin_template(file);
  std::ostringstream text;
  text << in.rdbuf();
  return PromptTemplate::parse(text.str());
}

}  // namespace

const PromptSet& PromptSet::builtin() {
  static const PromptSet set{builtin_template("script_writer.txt"), builtin_template("expert_analyst.txt"),
                             builtin_template("emotion_rater.txt"), builtin_template("date_normalizer.txt"),
                             builtin_template("location_normalizer.txt")};
  return set;
}

PromptSet PromptSet::load(const std::filesystem::path& directory) {
  return {load_or_builtin(directory, "script_writer.txt"), load_or_builtin(directory, "expert_analyst.txt"),
          load_or_builtin(directory, "emotion_rater.txt"), load_or_builtin(directory, "date_normalizer.txt"),
          load_or_builtin(directory, "location_normalizer.txt")};
}

}  // namespace episodic
