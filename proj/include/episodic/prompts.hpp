#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace episodic {

/// One role prompt: a system part and a user part with {{name}} placeholders.
/// On disk the two parts are separated by a line holding only "---".
struct PromptTemplate {
  std::string system;
  std::string user;

  static PromptTemplate parse(std::string_view file_text);
};

/// Replaces every {{name}}; a placeholder without a value is an InvalidArgument.
std::string render(std::string_view text, const std::map<std::string, std::string>& values);

/// The augmentation roles. Built-in copies of prompts/*.txt are compiled
/// into the library.
struct PromptSet {
  PromptTemplate script_writer;
  PromptTemplate expert_analyst;
  PromptTemplate emotion_rater;
  PromptTemplate date_normalizer;
  PromptTemplate location_normalizer;

  static const PromptSet& builtin();
  /// Loads <dir>/<role>.txt, falling back to the built-in copy per file.
  static PromptSet load(const std::filesystem::path& directory);
};

namespace detail {
std::string_view embedded_asset(std::string_view name);
}

}  // namespace episodic
