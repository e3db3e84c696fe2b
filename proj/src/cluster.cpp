#include "tsr/cluster.hpp"

#include "tsr/errors.hpp"
#include "tsr/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace tsr {

namespace {

struct KmeansResult {
    std::vector<int> assignment;
    double sse = std::numeric_limits<double>::infinity();
};

double sqdist(const Eigen::MatrixXd& x, int row, const Eigen::VectorXd& c) {
    return (x.row(row).transpose() - c).squaredNorm();
}

KmeansResult kmeans_once(const Eigen::MatrixXd& x, int k, Rng rng) {
    const int n = int(x.rows());
    std::vector<Eigen::VectorXd> centers;
    centers.reserve(k);

    // k-means++ seeding
    centers.push_back(x.row(int(rng.below(std::uint64_t(n)))).transpose());
    std::vector<double> d2(n);
    for (int c = 1; c < k; ++c) {
        double total = 0;
        for (int i = 0; i < n; ++i) {
            double best = sqdist(x, i, centers[0]);
            for (std::size_t j = 1; j < centers.size(); ++j)
                best = std::min(best, sqdist(x, i, centers[j]));
            d2[i] = best;
            total += best;
        }
        int pick = 0;
        if (total > 0) {
            double target = rng.uniform() * total, acc = 0;
            for (int i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc >= target) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = int(rng.below(std::uint64_t(n)));
        }
        centers.push_back(x.row(pick).transpose());
    }

    std::vector<int> assign(n, -1);
    std::vector<int> count(k);
    for (int iter = 0; iter < 100; ++iter) {
        bool moved = false;
        std::fill(count.begin(), count.end(), 0);
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double bd = sqdist(x, i, centers[0]);
            for (int c = 1; c < k; ++c) {
                double d = sqdist(x, i, centers[c]);
                if (d < bd) {
                    bd = d;
                    best = c;
                }
            }
            if (assign[i] != best) {
                assign[i] = best;
                moved = true;
            }
            ++count[best];
        }
        // deterministic fix-up: hand each empty cluster the point farthest
        // from its current center
        for (int c = 0; c < k; ++c) {
            if (count[c] > 0) continue;
            int worst = -1;
            double wd = -1;
            for (int i = 0; i < n; ++i) {
                if (count[assign[i]] <= 1) continue;
                double d = sqdist(x, i, centers[assign[i]]);
                if (d > wd) {
                    wd = d;
                    worst = i;
                }
            }
            if (worst >= 0) {
                --count[assign[worst]];
                assign[worst] = c;
                ++count[c];
                moved = true;
            }
        }
        for (int c = 0; c < k; ++c) centers[c].setZero();
        for (int i = 0; i < n; ++i) centers[assign[i]] += x.row(i).transpose();
        for (int c = 0; c < k; ++c)
            if (count[c] > 0) centers[c] /= double(count[c]);
        if (!moved && iter > 0) break;
    }

    KmeansResult r;
    r.assignment = std::move(assign);
    r.sse = 0;
    for (int i = 0; i < n; ++i) r.sse += sqdist(x, i, centers[r.assignment[i]]);
    return r;
}

} // namespace

std::vector<std::pair<int, int>> select_training(const ClusterModel& model, const Matrix& dist) {
    std::vector<std::pair<int, int>> training;
    for (int c = 0; c < model.cluster_count; ++c) {
        std::vector<int> members;
        for (int i = 0; i < int(model.assignment.size()); ++i)
            if (model.assignment[i] == c) members.push_back(i);
        if (members.empty()) continue;
        const int medoid = model.medoids[c];
        std::stable_sort(members.begin(), members.end(), [&](int a, int b) {
            double da = dist(a, medoid), db = dist(b, medoid);
            return da < db || (da == db && a < b);
        });
        const std::size_t take = (members.size() + 1) / 2;
        members.resize(take);
        std::sort(members.begin(), members.end());
        for (int i : members) training.emplace_back(i, c);
    }
    return training;
}

ClusterModel spectral_cluster(const Matrix& dist, int M, std::uint64_t seed, int restarts) {
    const int n = dist.rows;
    if (M < 1 || M > n)
        throw InvalidM("cluster count " + std::to_string(M) + " out of range for " +
                       std::to_string(n) + " shapes");

    // local scale: distance to the 7th nearest neighbor (or the farthest one
    // on small sets)
    std::vector<double> sigma(n);
    {
        std::vector<double> row(n - 1);
        for (int i = 0; i < n; ++i) {
            int m = 0;
            for (int j = 0; j < n; ++j)
                if (j != i) row[m++] = dist(i, j);
            const int k = std::min(7, n - 1);
            std::nth_element(row.begin(), row.begin() + (k - 1), row.end());
            sigma[i] = std::max(row[k - 1], 1e-12);
        }
    }

    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            a(i, j) = std::exp(-dist(i, j) * dist(i, j) / (sigma[i] * sigma[j]));
    Eigen::VectorXd dinv = a.rowwise().sum().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd l = dinv.asDiagonal() * a * dinv.asDiagonal();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(l);
    if (solver.info() != Eigen::Success)
        throw EigenFailure("eigen decomposition did not converge");
    // eigenvalues ascend; the top-M eigenvectors are the last M columns
    Eigen::MatrixXd x = solver.eigenvectors().rightCols(M);
    for (int i = 0; i < n; ++i) {
        const double norm = x.row(i).norm();
        if (norm > 0) x.row(i) /= norm;
    }

    KmeansResult best;
    for (int r = 0; r < restarts; ++r) {
        KmeansResult cur = kmeans_once(x, M, Rng::substream(seed, std::uint64_t(r)));
        if (cur.sse < best.sse) best = std::move(cur);
    }

    // relabel by first appearance so ids are stable
    std::vector<int> remap(M, -1);
    int next = 0;
    for (int i = 0; i < n; ++i)
        if (remap[best.assignment[i]] < 0) remap[best.assignment[i]] = next++;

    ClusterModel model;
    model.cluster_count = M;
    model.assignment.resize(n);
    for (int i = 0; i < n; ++i) model.assignment[i] = remap[best.assignment[i]];

    model.medoids.assign(M, -1);
    for (int c = 0; c < M; ++c) {
        double bestsum = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
            if (model.assignment[i] != c) continue;
            double s = 0;
            for (int j = 0; j < n; ++j)
                if (model.assignment[j] == c) s += dist(i, j);
            if (s < bestsum) {
                bestsum = s;
                model.medoids[c] = i;
            }
        }
    }
    model.training = select_training(model, dist);
    return model;
}

} // namespace tsr
