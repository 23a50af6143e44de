#include "knn_graph.hpp"

#include <algorithm>
#include <limits>

#include <Eigen/Core>

#include "episodic/store.hpp"

namespace episodic::detail {

namespace {

constexpr std::size_t kBlock = 1024;
// Extra float candidates kept per row beyond k; large enough that the
// exactness margin almost always clears on real data.
constexpr std::size_t kSlack = 24;

struct Candidate {
  float score;
  std::uint32_t index;
};

struct MinScoreOnTop {
  bool operator()(const Candidate& a, const Candidate& b) const { return a.score > b.score; }
};

class CandidateHeaps {
 public:
  CandidateHeaps(std::size_t rows, std::size_t capacity)
      : capacity_(capacity),
        slots_(rows * capacity),
        sizes_(rows, 0),
        floor_(rows, -std::numeric_limits<float>::infinity()) {}

  void offer(std::size_t row, float score, std::uint32_t index) {
    if (score <= floor_[row] && sizes_[row] == capacity_) return;
    Candidate* heap = slots_.data() + row * capacity_;
    auto& size = sizes_[row];
    if (size < capacity_) {
      heap[size++] = {score, index};
      std::push_heap(heap, heap + size, MinScoreOnTop{});
      if (size == capacity_) floor_[row] = heap[0].score;
      return;
    }
    std::pop_heap(heap, heap + size, MinScoreOnTop{});
    heap[size - 1] = {score, index};
    std::push_heap(heap, heap + size, MinScoreOnTop{});
    floor_[row] = heap[0].score;
  }

  std::span<Candidate> row(std::size_t r) { return {slots_.data() + r * capacity_, sizes_[r]}; }

 private:
  std::size_t capacity_;
  std::vector<Candidate> slots_;
  std::vector<std::uint32_t> sizes_;
  std::vector<float> floor_;
};

struct Scored {
  double cosine;
  std::uint32_t index;
};

bool ranks_before(const Scored& a, const Scored& b) {
  if (a.cosine != b.cosine) return a.cosine > b.cosine;
  return a.index < b.index;
}

}  // namespace

std::vector<std::uint32_t> build_knn_graph(const float* matrix, std::span<const double> norms, std::size_t count,
                                           std::size_t dimension, std::size_t k) {
  if (count < 2 || k == 0) return {};
  const std::size_t kk = std::min(k, count - 1);
  const std::size_t capacity = std::min(count - 1, kk + kSlack);
  // Bound on |float dot - double cosine| for unit vectors, doubled.
  const float margin = static_cast<float>(4.0 * static_cast<double>(dimension) * 6e-8 + 1e-5);

  auto exact = [&](std::size_t a, std::size_t b) {
    return dot_f64(matrix + a * dimension, matrix + b * dimension, dimension) / (norms[a] * norms[b]);
  };

  CandidateHeaps heaps(count, capacity);
  {
    using ColMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor>;
    Eigen::Map<const ColMatrix> vectors(matrix, static_cast<Eigen::Index>(dimension),
                                        static_cast<Eigen::Index>(count));
    ColMatrix scores(kBlock, kBlock);
    for (std::size_t bi = 0; bi < count; bi += kBlock) {
      const std::size_t ni = std::min(kBlock, count - bi);
      for (std::size_t bj = bi; bj < count; bj += kBlock) {
        const std::size_t nj = std::min(kBlock, count - bj);
        auto block = scores.topLeftCorner(static_cast<Eigen::Index>(ni), static_cast<Eigen::Index>(nj));
        block.noalias() = vectors.middleCols(static_cast<Eigen::Index>(bi), static_cast<Eigen::Index>(ni)).transpose() *
                          vectors.middleCols(static_cast<Eigen::Index>(bj), static_cast<Eigen::Index>(nj));
        const bool diagonal = bi == bj;
        for (std::size_t j = 0; j < nj; ++j) {
          const float* column = scores.data() + j * kBlock;
          const auto gj = static_cast<std::uint32_t>(bj + j);
          for (std::size_t i = 0; i < ni; ++i) {
            const auto gi = static_cast<std::uint32_t>(bi + i);
            if (diagonal) {
              if (i != j) heaps.offer(gi, column[i], gj);
            } else {
              heaps.offer(gi, column[i], gj);
              heaps.offer(gj, column[i], gi);
            }
          }
        }
      }
    }
  }

  std::vector<std::uint32_t> graph(count * kk);
  std::vector<Scored> scored;
  for (std::size_t r = 0; r < count; ++r) {
    auto candidates = heaps.row(r);
    bool certain = candidates.size() == count - 1;
    if (!certain) {
      std::sort(candidates.begin(), candidates.end(),
                [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
      certain = candidates.back().score < candidates[kk - 1].score - margin;
    }

    scored.clear();
    if (certain) {
      for (const auto& c : candidates) scored.push_back({exact(r, c.index), c.index});
    } else {
      for (std::size_t j = 0; j < count; ++j) {
        if (j != r) scored.push_back({exact(r, j), static_cast<std::uint32_t>(j)});
      }
    }
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(kk), scored.end(), ranks_before);
    for (std::size_t i = 0; i < kk; ++i) graph[r * kk + i] = scored[i].index;
  }
  return graph;
}

}  // namespace episodic::detail
