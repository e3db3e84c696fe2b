#include "tsr/diffusion.hpp"

#include "tsr/errors.hpp"
#include "tsr/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tsr {

Matrix affinity_from_distance(const Matrix& dist, int kernel_k) {
    const int n = dist.rows;
    std::vector<double> sigma(n, 1.0);
    std::vector<double> row;
    for (int i = 0; i < n; ++i) {
        row.clear();
        for (int j = 0; j < n; ++j)
            if (j != i) row.push_back(dist(i, j));
        if (row.empty()) continue;
        const int k = std::clamp(kernel_k, 1, int(row.size()));
        std::nth_element(row.begin(), row.begin() + (k - 1), row.end());
        double s = row[k - 1];
        if (s <= 0) {
            // duplicates at distance zero: fall back to the smallest
            // positive distance
            s = 0;
            for (int j = 0; j < n; ++j)
                if (j != i && dist(i, j) > 0 && (s == 0 || dist(i, j) < s)) s = dist(i, j);
            if (s <= 0) s = 1.0;
        }
        sigma[i] = s;
    }

    Matrix a(n, n, 0.0);
    for (int i = 0; i < n; ++i) {
        a(i, i) = 1.0;
        for (int j = i + 1; j < n; ++j) {
            const double v = std::exp(-dist(i, j) * dist(i, j) / (sigma[i] * sigma[j]));
            a(i, j) = v;
            a(j, i) = v;
        }
    }
    return a;
}

namespace {

// Row-sparse transition matrix: each row keeps its knn_w strongest
// affinities (ties by lower column), normalized to sum 1.
struct Transition {
    int n = 0;
    int k = 0;
    std::vector<int> cols;     // n x k
    std::vector<double> vals;  // n x k
};

Transition make_transition(const Matrix& a, int knn_w) {
    Transition p;
    p.n = a.rows;
    p.k = std::clamp(knn_w, 1, a.rows);
    p.cols.resize(std::size_t(p.n) * p.k);
    p.vals.resize(std::size_t(p.n) * p.k);

    std::vector<int> order(a.rows);
    for (int i = 0; i < p.n; ++i) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
            return a(i, x) > a(i, y) || (a(i, x) == a(i, y) && x < y);
        });
        double sum = 0;
        for (int j = 0; j < p.k; ++j) sum += a(i, order[j]);
        for (int j = 0; j < p.k; ++j) {
            p.cols[std::size_t(i) * p.k + j] = order[j];
            p.vals[std::size_t(i) * p.k + j] = sum > 0 ? a(i, order[j]) / sum : 0.0;
        }
    }
    return p;
}

} // namespace

Matrix lcdp(const Matrix& affinity, int knn_w, int iters) {
    const int n = affinity.rows;
    Matrix w = affinity;
    if (iters <= 0 || n == 0) return w;

    const Transition p = make_transition(affinity, knn_w);
    Matrix t(n, n, 0.0);
    Matrix next(n, n, 0.0);
    for (int it = 0; it < iters; ++it) {
        // t = P * w
        parallel_for(std::size_t(n), [&](std::size_t i) {
            double* ti = &t.data[i * n];
            std::fill(ti, ti + n, 0.0);
            for (int j = 0; j < p.k; ++j) {
                const double pij = p.vals[i * p.k + j];
                if (pij == 0) continue;
                const double* wrow = &w.data[std::size_t(p.cols[i * p.k + j]) * n];
                for (int l = 0; l < n; ++l) ti[l] += pij * wrow[l];
            }
        });
        // next = t * P^T, filled on the upper triangle and mirrored so the
        // result is symmetric to the last bit
        parallel_for(std::size_t(n), [&](std::size_t i) {
            const double* ti = &t.data[i * n];
            for (int j = int(i); j < n; ++j) {
                double acc = 0;
                for (int l = 0; l < p.k; ++l)
                    acc += ti[p.cols[std::size_t(j) * p.k + l]] * p.vals[std::size_t(j) * p.k + l];
                next(int(i), j) = acc;
            }
        });
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < i; ++j) next(i, j) = next(j, i);
        std::swap(w, next);
    }
    return w;
}

Matrix constrained_lcdp(const Matrix& affinity, const std::vector<int>& subset, int knn_w,
                        int iters) {
    const int m = int(subset.size());
    for (int i = 0; i < m; ++i) {
        if (subset[i] < 0 || subset[i] >= affinity.rows)
            throw DimensionMismatch("subset index out of range");
        if (i > 0 && subset[i] <= subset[i - 1])
            throw DimensionMismatch("subset indices must be strictly ascending");
    }
    Matrix sub(m, m, 0.0);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) sub(i, j) = affinity(subset[i], subset[j]);
    const int k = std::max(1, std::min(knn_w, m - 1));
    return lcdp(sub, k, iters);
}

} // namespace tsr
