#pragma once

#include <map>
#include <string>
#include <vector>

#include "episodic/record.hpp"

namespace oracle {

/// Exact k nearest neighbours by cosine (descending, ties by ascending id),
/// found by comparing every pair.
std::map<std::string, std::vector<std::string>> knn(const std::vector<episodic::MemoryRecord>& records,
                                                    std::size_t k);

}  // namespace oracle
