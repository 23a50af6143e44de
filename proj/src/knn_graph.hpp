#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace episodic::detail {

/// Exact k-NN graph over `count` row-major float vectors.
///
/// Candidates are screened with a blocked single-precision GEMM (each pair
/// scored once), then the survivors of every row are rescored with the
/// double-precision cosine and ordered by (cosine desc, index asc). A row
/// whose float margin cannot guarantee exactness is recomputed by a full
/// double scan, so the output always equals the brute-force answer.
///
/// Returns count * min(k, count - 1) indices.
std::vector<std::uint32_t> build_knn_graph(const float* matrix, std::span<const double> norms, std::size_t count,
                                           std::size_t dimension, std::size_t k);

}  // namespace episodic::detail
