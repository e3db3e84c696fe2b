#include "tsr/relevance.hpp"

#include "tsr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tsr {

std::vector<double> pknn_from_distances(const std::vector<double>& query_distances,
                                        const Matrix& table, int K) {
    const int n = table.rows;
    if (n == 0) throw EmptyGallery("relevance table is empty");
    if (int(query_distances.size()) != n)
        throw DimensionMismatch("distance count " + std::to_string(query_distances.size()) +
                                " does not match table rows " + std::to_string(n));
    K = std::clamp(K, 1, n);

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return query_distances[a] < query_distances[b] ||
               (query_distances[a] == query_distances[b] && a < b);
    });

    std::vector<double> p(table.cols, 0.0);
    for (int k = 0; k < K; ++k)
        for (int c = 0; c < table.cols; ++c) p[c] += table(order[k], c);
    const double total = std::accumulate(p.begin(), p.end(), 0.0);
    if (total > 0)
        for (double& v : p) v /= total;
    return p;
}

double relevance_cost(double p_rf, double p_knn, double floor) {
    return -std::log(std::max(p_knn, floor)) - std::log(std::max(p_rf, floor));
}

RelevantClusterSet relevant_clusters(const std::vector<double>& p_rf,
                                     const std::vector<double>& p_knn, double epsilon,
                                     double floor) {
    if (p_rf.size() != p_knn.size())
        throw DimensionMismatch("relevance distributions have different lengths");
    RelevantClusterSet set;
    set.cost.resize(p_rf.size());
    for (std::size_t c = 0; c < p_rf.size(); ++c) {
        set.cost[c] = relevance_cost(p_rf[c], p_knn[c], floor);
        if (set.cost[c] < epsilon) set.clusters.push_back(int(c));
    }
    return set;
}

} // namespace tsr
