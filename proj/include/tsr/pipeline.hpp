#pragma once

#include "tsr/index.hpp"
#include "tsr/relevance.hpp"
#include "tsr/types.hpp"

namespace tsr {

enum class QueryMode {
    Tsr,       // cluster filtering, then local ranking
    TsrDp,     // cluster filtering, then diffused ranking
    LocalOnly, // baseline: local ranking over the whole gallery
    LocalDp,   // baseline: diffused ranking over the whole gallery
};

QueryMode parse_query_mode(const std::string& name); // "tsr" | "tsr+dp" | "local-only" | "local+dp"
std::string to_string(QueryMode mode);

struct QueryResult {
    std::string query_id;
    QueryMode mode = QueryMode::Tsr;
    std::vector<int> relevant_clusters;   // empty in local-only modes
    std::vector<double> cluster_cost;     // J per cluster (tsr modes)
    std::vector<double> p_rf, p_knn;      // per cluster (tsr modes)
    bool used_fallback = false;
    // Full-length ranking: shapes from relevant clusters first (by similarity),
    // then the filtered-out remainder (by raw local distance) so top-2C
    // metrics always have enough entries. included_count marks the boundary;
    // only entries before it are retrieval output in tsr modes.
    std::vector<std::pair<int, double>> ranking; // (gallery index, similarity)
    int included_count = 0;
};

struct BuildReport {
    struct Failure {
        std::string id;
        std::string error;
    };
    std::vector<Failure> failures;
};

// Offline stage: preprocess -> features -> distance matrix -> spectral
// clustering -> core selection -> forest -> relevance table. Deterministic
// given (gallery, config); independent of the thread count.
RetrievalIndex build_index(const Gallery& gallery, BuildConfig config, bool strict = true,
                           BuildReport* report = nullptr);

// Online stage. The query never needs a label.
QueryResult query(const RetrievalIndex& index, const BinaryShape& shape, QueryMode mode);

// Fail-open rule for an empty Stage-I result: keep the single argmin-J
// cluster and set the fallback flag.
RelevantClusterSet fallback(RelevantClusterSet set);

} // namespace tsr
