#include "riskgraph/kernels.hpp"

#include <algorithm>
#include <cassert>

namespace riskgraph {
namespace kernels {

namespace {

template <class F>
void for_each_row(std::size_t n, Exec exec, F&& body) {
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i)
      body(static_cast<std::size_t>(i));
  } else {
    for (std::size_t i = 0; i < n; ++i) body(i);
  }
}

}  // namespace

void matmul(const Matrix& a, const Matrix& b, Matrix& out, Exec exec) {
  assert(a.cols() == b.rows());
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  out = Matrix(n, m, 0.0);
  for_each_row(n, exec, [&](std::size_t i) {
    const double* ai = a.row(i);
    double* oi = out.row(i);
    for (std::size_t t = 0; t < k; ++t) {
      const double av = ai[t];
      if (av == 0.0) continue;
      const double* bt = b.row(t);
      for (std::size_t j = 0; j < m; ++j) oi[j] += av * bt[j];
    }
  });
}

void matmul_a_bt(const Matrix& a, const Matrix& b, Matrix& out, Exec exec) {
  assert(a.cols() == b.cols());
  const std::size_t n = a.rows(), k = a.cols(), m = b.rows();
  out = Matrix(n, m, 0.0);
  for_each_row(n, exec, [&](std::size_t i) {
    const double* ai = a.row(i);
    double* oi = out.row(i);
    for (std::size_t j = 0; j < m; ++j) {
      const double* bj = b.row(j);
      double sum = 0.0;
      for (std::size_t t = 0; t < k; ++t) sum += ai[t] * bj[t];
      oi[j] = sum;
    }
  });
}

void matmul_at_b(const Matrix& a, const Matrix& b, Matrix& out, Exec exec) {
  assert(a.rows() == b.rows());
  const std::size_t n = a.rows(), r = a.cols(), c = b.cols();
  out = Matrix(r, c, 0.0);
  // parallel over output rows; each output element is one fixed-order sum
  for_each_row(r, exec, [&](std::size_t i) {
    double* oi = out.row(i);
    for (std::size_t t = 0; t < n; ++t) {
      const double av = a(t, i);
      if (av == 0.0) continue;
      const double* bt = b.row(t);
      for (std::size_t j = 0; j < c; ++j) oi[j] += av * bt[j];
    }
  });
}

std::vector<std::vector<Neighbor>> knn_query(const Matrix& queries, const Matrix& corpus,
                                             int k, bool exclude_diagonal, Exec exec) {
  assert(queries.cols() == corpus.cols());
  const std::size_t nq = queries.rows(), nc = corpus.rows(), d = queries.cols();
  std::vector<std::vector<Neighbor>> result(nq);
  for_each_row(nq, exec, [&](std::size_t i) {
    const double* qi = queries.row(i);
    std::vector<Neighbor> cand;
    cand.reserve(nc);
    for (std::size_t j = 0; j < nc; ++j) {
      if (exclude_diagonal && j == i) continue;
      const double* cj = corpus.row(j);
      double s = 0.0;
      for (std::size_t t = 0; t < d; ++t) {
        const double diff = qi[t] - cj[t];
        s += diff * diff;
      }
      cand.push_back({static_cast<int>(j), s});
    }
    const std::size_t kk = std::min<std::size_t>(k, cand.size());
    auto cmp = [](const Neighbor& a, const Neighbor& b) {
      if (a.sq_dist != b.sq_dist) return a.sq_dist < b.sq_dist;
      return a.index < b.index;
    };
    std::partial_sort(cand.begin(), cand.begin() + kk, cand.end(), cmp);
    cand.resize(kk);
    result[i] = std::move(cand);
  });
  return result;
}

std::vector<long long> triangle_counts(const std::vector<std::vector<int>>& adj, Exec exec) {
  const std::size_t n = adj.size();
  std::vector<long long> tri(n, 0);
  for_each_row(n, exec, [&](std::size_t v) {
    const auto& nv = adj[v];
    long long count = 0;
    // edges (u, w) with u < w, both neighbours of v
    for (int u : nv) {
      const auto& nu = adj[u];
      // count members of nv strictly greater than u that are also in nu
      auto it1 = std::upper_bound(nv.begin(), nv.end(), u);
      auto it2 = nu.begin();
      while (it1 != nv.end() && it2 != nu.end()) {
        if (*it1 < *it2) {
          ++it1;
        } else if (*it2 < *it1) {
          ++it2;
        } else {
          ++count;
          ++it1;
          ++it2;
        }
      }
    }
    tri[v] = count;
  });
  return tri;
}

void group_mean_rows(const Matrix& in, const std::vector<std::vector<int>>& groups,
                     Matrix& out, Exec exec) {
  const std::size_t n = groups.size(), d = in.cols();
  out = Matrix(n, d, 0.0);
  for_each_row(n, exec, [&](std::size_t i) {
    const auto& g = groups[i];
    assert(!g.empty());
    double* oi = out.row(i);
    for (int src : g) {
      const double* r = in.row(src);
      for (std::size_t t = 0; t < d; ++t) oi[t] += r[t];
    }
    const double inv = 1.0 / static_cast<double>(g.size());
    for (std::size_t t = 0; t < d; ++t) oi[t] *= inv;
  });
}

void weighted_gather_rows(const Matrix& in, const std::vector<std::vector<WeightedRef>>& refs,
                          Matrix& out, Exec exec) {
  const std::size_t n = refs.size(), d = in.cols();
  out = Matrix(n, d, 0.0);
  for_each_row(n, exec, [&](std::size_t i) {
    double* oi = out.row(i);
    for (const auto& ref : refs[i]) {
      const double* r = in.row(ref.src);
      for (std::size_t t = 0; t < d; ++t) oi[t] += ref.w * r[t];
    }
  });
}

}  // namespace kernels
}  // namespace riskgraph
