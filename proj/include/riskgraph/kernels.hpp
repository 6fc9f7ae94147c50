#pragma once

#include <cstddef>
#include <vector>

#include "riskgraph/matrix.hpp"

namespace riskgraph {

// Execution policy for the data-parallel kernels. Every kernel computes each
// output element with a fixed, thread-independent accumulation order, so
// Serial and Parallel produce bit-identical results; Parallel only changes
// which thread owns which output rows.
enum class Exec { Serial, Parallel };

namespace kernels {

// out = a * b
void matmul(const Matrix& a, const Matrix& b, Matrix& out, Exec exec = Exec::Parallel);

// out = a * b^T   (a: n x k, b: m x k -> n x m)
void matmul_a_bt(const Matrix& a, const Matrix& b, Matrix& out, Exec exec = Exec::Parallel);

// out = a^T * b   (a: n x r, b: n x c -> r x c)
void matmul_at_b(const Matrix& a, const Matrix& b, Matrix& out, Exec exec = Exec::Parallel);

struct Neighbor {
  int index;
  double sq_dist;
};

// For each query row, the k corpus rows with smallest squared Euclidean
// distance, ordered by (distance, index) ascending. exclude_diagonal skips
// corpus row j == query row i (self-queries on a shared matrix).
std::vector<std::vector<Neighbor>> knn_query(const Matrix& queries, const Matrix& corpus,
                                             int k, bool exclude_diagonal,
                                             Exec exec = Exec::Parallel);

// Per-node count of edges among the node's neighbours (triangles through the
// node). adj must hold sorted, deduplicated, self-loop-free neighbour lists.
std::vector<long long> triangle_counts(const std::vector<std::vector<int>>& adj,
                                       Exec exec = Exec::Parallel);

// out.row(i) = mean of in.row(j) over j in groups[i]; groups must be non-empty.
void group_mean_rows(const Matrix& in, const std::vector<std::vector<int>>& groups,
                     Matrix& out, Exec exec = Exec::Parallel);

struct WeightedRef {
  int src;
  double w;
};

// out.row(i) = sum over (src, w) in refs[i] of w * in.row(src). refs rows may
// be empty (zero row).
void weighted_gather_rows(const Matrix& in, const std::vector<std::vector<WeightedRef>>& refs,
                          Matrix& out, Exec exec = Exec::Parallel);

}  // namespace kernels
}  // namespace riskgraph
