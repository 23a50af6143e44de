#pragma once

#include <string>
#include <string_view>

namespace episodic {

std::string_view trim(std::string_view text);

/// Lowercases ASCII letters only; other bytes pass through.
std::string ascii_lower(std::string_view text);

}  // namespace episodic
