#include <doctest.h>

#include <vector>

#include "riskgraph/kernels.hpp"
#include "riskgraph/rng.hpp"

using namespace riskgraph;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (double& x : m.data()) x = rng.normal();
  return m;
}

// naive reference used to check both execution policies
Matrix naive_matmul(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t < a.cols(); ++t) s += a(i, t) * b(t, j);
      out(i, j) = s;
    }
  return out;
}

}  // namespace

TEST_CASE("matmul variants match a naive reference") {
  Rng rng(11);
  const Matrix a = random_matrix(17, 9, rng);
  const Matrix b = random_matrix(9, 13, rng);
  Matrix out;
  kernels::matmul(a, b, out, Exec::Serial);
  const Matrix expected = naive_matmul(a, b);
  for (std::size_t i = 0; i < out.data().size(); ++i)
    CHECK(out.data()[i] == doctest::Approx(expected.data()[i]).epsilon(1e-12));

  Matrix bt(13, 9);
  for (std::size_t i = 0; i < 9; ++i)
    for (std::size_t j = 0; j < 13; ++j) bt(j, i) = b(i, j);
  Matrix out2;
  kernels::matmul_a_bt(a, bt, out2, Exec::Serial);
  for (std::size_t i = 0; i < out2.data().size(); ++i)
    CHECK(out2.data()[i] == doctest::Approx(expected.data()[i]).epsilon(1e-12));

  Matrix at(9, 17);
  for (std::size_t i = 0; i < 17; ++i)
    for (std::size_t j = 0; j < 9; ++j) at(j, i) = a(i, j);
  Matrix out3;
  kernels::matmul_at_b(at, b, out3, Exec::Serial);
  // at^T * b = a * b
  for (std::size_t i = 0; i < out3.data().size(); ++i)
    CHECK(out3.data()[i] == doctest::Approx(expected.data()[i]).epsilon(1e-12));
}

TEST_CASE("serial and parallel execution produce bit-identical results") {
  Rng rng(42);
  const Matrix a = random_matrix(33, 21, rng);
  const Matrix b = random_matrix(21, 27, rng);
  Matrix serial, parallel;
  kernels::matmul(a, b, serial, Exec::Serial);
  kernels::matmul(a, b, parallel, Exec::Parallel);
  CHECK(serial == parallel);

  Matrix s2, p2;
  kernels::matmul_at_b(a, a, s2, Exec::Serial);
  kernels::matmul_at_b(a, a, p2, Exec::Parallel);
  CHECK(s2 == p2);

  const Matrix pts = random_matrix(64, 5, rng);
  auto ls = kernels::knn_query(pts, pts, 7, true, Exec::Serial);
  auto lp = kernels::knn_query(pts, pts, 7, true, Exec::Parallel);
  REQUIRE(ls.size() == lp.size());
  for (std::size_t i = 0; i < ls.size(); ++i) {
    REQUIRE(ls[i].size() == lp[i].size());
    for (std::size_t j = 0; j < ls[i].size(); ++j) {
      CHECK(ls[i][j].index == lp[i][j].index);
      CHECK(ls[i][j].sq_dist == lp[i][j].sq_dist);
    }
  }

  std::vector<std::vector<int>> adj(40);
  for (int i = 0; i < 40; ++i)
    for (int j = 0; j < 40; ++j)
      if (i != j && ((i * 7 + j * 13) % 5 == 0)) adj[i].push_back(j);
  for (auto& lst : adj) {
    std::sort(lst.begin(), lst.end());
    lst.erase(std::unique(lst.begin(), lst.end()), lst.end());
  }
  // symmetrize
  for (int i = 0; i < 40; ++i)
    for (int j : adj[i])
      if (std::find(adj[j].begin(), adj[j].end(), i) == adj[j].end()) adj[j].push_back(i);
  for (auto& lst : adj) std::sort(lst.begin(), lst.end());
  CHECK(kernels::triangle_counts(adj, Exec::Serial) ==
        kernels::triangle_counts(adj, Exec::Parallel));
}

TEST_CASE("knn_query orders by distance then index and honours k") {
  Matrix pts(4, 1);
  pts(0, 0) = 0.0;
  pts(1, 0) = 1.0;
  pts(2, 0) = 1.0;
  pts(3, 0) = 5.0;
  auto lists = kernels::knn_query(pts, pts, 2, true);
  // from point 0: ties at distance 1 resolve to the smaller index first
  CHECK(lists[0][0].index == 1);
  CHECK(lists[0][1].index == 2);
  // duplicate rows are distance 0 of each other
  CHECK(lists[1][0].index == 2);
  CHECK(lists[1][0].sq_dist == 0.0);
  for (const auto& lst : lists) CHECK(lst.size() == 2);
}

TEST_CASE("group_mean_rows averages the selected rows") {
  Matrix in(3, 2);
  in(0, 0) = 0.0;
  in(0, 1) = 2.0;
  in(1, 0) = 2.0;
  in(1, 1) = 0.0;
  in(2, 0) = 4.0;
  in(2, 1) = 4.0;
  std::vector<std::vector<int>> groups = {{0, 1}, {2}, {0, 1, 2}};
  Matrix out;
  kernels::group_mean_rows(in, groups, out);
  CHECK(out(0, 0) == 1.0);
  CHECK(out(0, 1) == 1.0);
  CHECK(out(1, 0) == 4.0);
  CHECK(out(2, 0) == 2.0);
  CHECK(out(2, 1) == 2.0);
}

TEST_CASE("weighted_gather_rows accumulates in fixed order") {
  Matrix in(2, 1);
  in(0, 0) = 3.0;
  in(1, 0) = 5.0;
  std::vector<std::vector<kernels::WeightedRef>> refs(3);
  refs[0] = {{0, 0.5}, {1, 0.5}};
  refs[2] = {{1, 2.0}};
  Matrix out;
  kernels::weighted_gather_rows(in, refs, out);
  CHECK(out(0, 0) == 4.0);
  CHECK(out(1, 0) == 0.0);
  CHECK(out(2, 0) == 10.0);
}
